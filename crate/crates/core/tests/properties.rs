//! Property-based invariants across the density, solver and oracle layers.

use proptest::prelude::*;
use radial_bv::*;

fn closed_form_density() -> impl Strategy<Value = EnergyDensity> {
    prop_oneof![
        (1.2f64..6.0).prop_map(|mu| EnergyDensity::phi_mu(mu).unwrap()),
        (2.0f64..4.0).prop_map(|k| EnergyDensity::g_tilde_k(k).unwrap()),
        Just(EnergyDensity::minimal_surface()),
    ]
}

proptest! {
    #[test]
    fn derivatives_match_finite_differences(d in closed_form_density(), t in 0.01f64..100.0) {
        let h = 1e-6 * (1.0 + t);
        let fd = (d.g(t + h).unwrap() - d.g(t - h).unwrap()) / (2.0 * h);
        let gp = d.g_prime(t).unwrap();
        prop_assert!((fd - gp).abs() <= 1e-6 * gp.abs().max(1e-9), "g' fd {fd} vs {gp}");

        // difference the saturation defect: identical derivative, no
        // cancellation against the recession slope at large t
        let h2 = 1e-5 * (1.0 + t);
        let fd2 = (d.g_prime_defect(t - h2).unwrap() - d.g_prime_defect(t + h2).unwrap()) / (2.0 * h2);
        let gpp = d.g_second(t).unwrap();
        prop_assert!((fd2 - gpp).abs() <= 1e-5 * gpp.abs().max(1e-9), "g'' fd {fd2} vs {gpp}");
    }

    #[test]
    fn inverse_slope_round_trips(d in closed_form_density(), exp in -2f64..6.0) {
        let t = 10f64.powf(exp);
        let defect = d.g_prime_defect(t).unwrap();
        prop_assume!(defect > 0.0);
        let back = d.inv_g_prime_from_defect(defect).unwrap();
        prop_assert!((back - t).abs() <= 1e-10 * t.max(1.0), "{back} vs {t}");
    }

    #[test]
    fn density_is_convex(
        d in closed_form_density(),
        a in 0f64..200.0,
        b in 0f64..200.0,
        theta in 0f64..1.0,
    ) {
        let mid = theta * a + (1.0 - theta) * b;
        let lhs = d.g(mid).unwrap();
        let rhs = theta * d.g(a).unwrap() + (1.0 - theta) * d.g(b).unwrap();
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn slope_strictly_below_recession(d in closed_form_density(), exp in -3f64..6.0) {
        let t = 10f64.powf(exp);
        // strict monotonicity and the strict bound, via the defect
        let here = d.g_prime_defect(t).unwrap();
        let up = d.g_prime_defect(t * 1.01 + 1e-9).unwrap();
        prop_assert!(up < here);
        prop_assert!(here > 0.0);
        prop_assert!(d.g_prime(t).unwrap() <= d.g_prime_inf());
    }

    #[test]
    fn phi_sandwich_bounds(mu in 1.3f64..4.0, exp in -2f64..3.0) {
        // c Phi_mu(t) <= g(t) <= C Phi_mubar(t) with the grid-certified
        // constants, for the minimal surface density (mu = mubar = 3
        // up to the certified nu's) and for g~_2.
        for d in [EnergyDensity::minimal_surface(), EnergyDensity::g_tilde_k(2.0).unwrap()] {
            let mut grid: Vec<f64> = (0..400).map(|i| 1e3f64.powf(i as f64 / 399.0) - 1.0).collect();
            grid.insert(0, 0.0);
            let bounds = d.verify_ellipticity(&grid).unwrap();
            let c = bounds.nu1 / (d.mu() - 1.0);
            let big_c = bounds.nu2 / (d.mu_bar() - 1.0);
            let t = 10f64.powf(exp);
            let phi_lo = EnergyDensity::phi_mu(d.mu()).unwrap().g(t).unwrap();
            let phi_hi = EnergyDensity::phi_mu(d.mu_bar()).unwrap().g(t).unwrap();
            let g = d.g(t).unwrap();
            prop_assert!(c * phi_lo <= g * (1.0 + 1e-9) + 1e-12);
            prop_assert!(g <= big_c * phi_hi * (1.0 + 1e-9) + 1e-12);
        }
        let _ = mu;
    }
}

fn small_problem() -> impl Strategy<Value = RadialProblem> {
    (
        1.3f64..5.0,
        0.6f64..1.5,
        1.5f64..3.0,
        -2f64..2.0,
        0.01f64..4.0,
        any::<bool>(),
    )
        .prop_map(|(mu, rho1, ratio, base, gap, rising)| {
            let (m1, m2) = if rising { (base, base + gap) } else { (base + gap, base) };
            RadialProblem::new(
                EnergyDensity::phi_mu(mu).unwrap(),
                rho1,
                rho1 * ratio,
                m1,
                m2,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn height_gain_monotone_in_flux(p in small_problem(), x in 0.05f64..0.95, y in 0.05f64..0.95) {
        let lam_max = p.lambda_max();
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        prop_assume!(hi - lo > 1e-6);
        let d_lo = delta_m(&p, lo * lam_max).unwrap();
        let d_hi = delta_m(&p, hi * lam_max).unwrap();
        prop_assert!(d_lo < d_hi, "{d_lo} !< {d_hi}");
    }

    #[test]
    fn solve_invariants_and_symmetries(p in small_problem(), c in -3f64..3.0) {
        let sol = solve(&p).unwrap();

        // flux bounds and bisection consistency
        prop_assert!(sol.lambda >= 0.0 && sol.lambda <= p.lambda_max() * (1.0 + 1e-12));
        if sol.attained_inner && sol.lambda > 0.0 {
            let resid = (delta_m(&p, sol.lambda).unwrap() - p.gap()).abs();
            prop_assert!(resid <= 1e-10 * p.gap().max(1.0), "residual {resid}");
        }
        if !sol.attained_inner {
            prop_assert_eq!(sol.lambda, p.lambda_max());
            prop_assert!(sol.energy.penalty_inner > 0.0);
        }

        // flux constancy on the stored grid
        if sol.lambda > 0.0 {
            for n in sol.profile.iter().step_by(37) {
                let flux = n.r * p.density.g_prime(n.du.abs()).unwrap();
                prop_assert!((flux - sol.lambda).abs() <= 1e-9 * sol.lambda.max(1.0));
            }
        }

        // bound checks
        prop_assert!(check_max_principle(&p, &sol).passed);
        prop_assert!(check_lower_bound(&p, &sol).passed);
        prop_assert_eq!(sol.trace_outer, p.m2);
        prop_assert_eq!(sol.energy.penalty_outer, 0.0);
        prop_assert_eq!(sol.energy.singular, 0.0);

        // shifting the data shifts the profile, same flux
        let shifted = RadialProblem::new(p.density.clone(), p.rho1, p.rho2, p.m1 + c, p.m2 + c).unwrap();
        let sol_s = solve(&shifted).unwrap();
        prop_assert!((sol_s.lambda - sol.lambda).abs() <= 1e-9 * sol.lambda.max(1.0));
        for (a, b) in sol.profile.iter().zip(&sol_s.profile).step_by(53) {
            prop_assert!((b.u - (a.u + c)).abs() <= 1e-9 * (1.0 + a.u.abs() + c.abs()));
        }

        // swapping the data mirrors the profile and flips the sign
        let mirrored = RadialProblem::new(p.density.clone(), p.rho1, p.rho2, p.m2, p.m1).unwrap();
        let sol_m = solve(&mirrored).unwrap();
        prop_assert_eq!(sol_m.lambda, sol.lambda);
        prop_assert_eq!(sol_m.sign, -sol.sign);
        for (a, b) in sol.profile.iter().zip(&sol_m.profile).step_by(53) {
            prop_assert!((b.u - (p.m1 + p.m2 - a.u)).abs() <= 1e-9 * (1.0 + a.u.abs()));
        }

        // classification agrees with the solver
        let class = classify_boundary_behavior(&p).unwrap();
        prop_assert_eq!(matches!(class, BoundaryBehavior::Attained), sol.attained_inner);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_energy_is_convex(
        va in proptest::collection::vec(-5f64..5.0, 33),
        vb in proptest::collection::vec(-5f64..5.0, 33),
        theta in 0f64..1.0,
    ) {
        let p = RadialProblem::new(EnergyDensity::phi_mu(2.5).unwrap(), 1.0, 2.0, 0.0, 1.0).unwrap();
        let cfg = OracleConfig { cells: 32, ..OracleConfig::default() };
        let nodes = radial_bv::grid::graded_grid(1.0, 2.0, 32);
        let fa = DiscreteRadialFunction::new(nodes.clone(), va.clone()).unwrap();
        let fb = DiscreteRadialFunction::new(nodes.clone(), vb.clone()).unwrap();
        let mix: Vec<f64> = va.iter().zip(&vb).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
        let fm = DiscreteRadialFunction::new(nodes, mix).unwrap();
        let ea = discrete_energy(&p, &fa, &cfg).unwrap();
        let eb = discrete_energy(&p, &fb, &cfg).unwrap();
        let em = discrete_energy(&p, &fm, &cfg).unwrap();
        let rhs = theta * ea + (1.0 - theta) * eb;
        prop_assert!(em <= rhs + 1e-9 * (1.0 + rhs.abs()), "{em} > {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn minimizer_never_loses_to_the_analytic_answer(p in small_problem()) {
        let cfg = OracleConfig { cells: 128, ..OracleConfig::default() };
        let sol = solve(&p).unwrap();
        let u_h = minimize(&p, &cfg).unwrap();
        let sampled = {
            let values = u_h
                .nodes
                .iter()
                .map(|&r| profile_at(&sol, &p, r).unwrap().0)
                .collect::<Vec<_>>();
            DiscreteRadialFunction::new(u_h.nodes.clone(), values).unwrap()
        };
        let e_min = discrete_energy(&p, &u_h, &cfg).unwrap();
        let e_ref = discrete_energy(&p, &sampled, &cfg).unwrap();
        prop_assert!(
            e_min <= e_ref + cfg.tol * (1.0 + e_ref.abs()),
            "oracle {e_min} lost to analytic {e_ref}"
        );
    }
}
