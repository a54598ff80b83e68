//! Command-line front end: configure radial problems, solve them,
//! cross-check against the discrete oracle, and emit machine-readable
//! results (CSV/JSON) plus static SVG plots.

mod config;
mod output;

use clap::{Parser, Subcommand};
use config::{DensityConfig, RunArgs, RunConfig};
use output::{fmt_g17, ser_maybe_inf, solution_csv, svg_line_plot, write_file, write_json};
use radial_bv::{
    check_lower_bound, check_max_principle, classify_boundary_behavior, oracle_agreement,
    regularization_study, solve_with_grid, suite, sweep_problems, AgreementThresholds,
    BoundaryBehavior, OracleConfig, OracleMode, RadialProblem, RadialSolution,
};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Malformed configuration; exit code 64.
    Config(String),
    /// Numerical failure; exit code 1.
    Numeric(String),
    /// A verification check failed; exit code 2.
    CheckFailed,
}

impl From<radial_bv::Error> for CliError {
    fn from(e: radial_bv::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "radial-bv",
    version,
    about = "Radially symmetric linear-growth variational problems on an annulus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem; write solution.csv, summary.json, profile.svg
    Solve(RunArgs),
    /// Seeded random problem sweep with bound checks per solution
    Sweep(RunArgs),
    /// Run the full verification checklist (exit 2 on any failure)
    Verify(RunArgs),
    /// Compare the semi-analytic solution against the discrete minimizer
    OracleCompare(RunArgs),
    /// Regularization convergence study in both modes
    RegStudy(RunArgs),
}

fn main() {
    // Worker pool size for sweep parallelism.
    if let Ok(threads) = std::env::var("RADIAL_BV_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Sweep(args) => run_sweep(&args),
        Command::Verify(args) => run_verify(&args),
        Command::OracleCompare(args) => run_oracle_compare(&args),
        Command::RegStudy(args) => run_reg_study(&args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            std::process::exit(64);
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("{}", serde_json::json!({ "error": msg }));
            std::process::exit(1);
        }
        Err(CliError::CheckFailed) => {
            eprintln!("verification failed");
            std::process::exit(2);
        }
    }
}

#[derive(Serialize)]
struct ProblemBlock<'a> {
    density: &'a DensityConfig,
    rho1: f64,
    rho2: f64,
    m1: f64,
    m2: f64,
}

impl<'a> ProblemBlock<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Self { density: &cfg.density, rho1: cfg.rho1, rho2: cfg.rho2, m1: cfg.m1, m2: cfg.m2 }
    }
}

#[derive(Serialize)]
struct ToleranceBlock {
    quad_rel: f64,
    grid_floor_rel: f64,
    profile_cells: usize,
    oracle_cells: Option<usize>,
    oracle_tol: Option<f64>,
    penalty_smoothing: Option<f64>,
}

impl ToleranceBlock {
    fn solver_only(profile_cells: usize) -> Self {
        Self {
            quad_rel: radial_bv::solver::QUAD_REL,
            grid_floor_rel: radial_bv::grid::GRID_FLOOR_REL,
            profile_cells,
            oracle_cells: None,
            oracle_tol: None,
            penalty_smoothing: None,
        }
    }

    fn with_oracle(profile_cells: usize, oracle: &OracleConfig) -> Self {
        Self {
            quad_rel: radial_bv::solver::QUAD_REL,
            grid_floor_rel: radial_bv::grid::GRID_FLOOR_REL,
            profile_cells,
            oracle_cells: Some(oracle.cells),
            oracle_tol: Some(oracle.tol),
            penalty_smoothing: Some(oracle.penalty_smoothing),
        }
    }
}

#[derive(Serialize)]
struct EnergyBlock {
    bulk: f64,
    singular: f64,
    penalty_inner: f64,
    penalty_outer: f64,
    total: f64,
}

impl From<radial_bv::EnergyBreakdown> for EnergyBlock {
    fn from(e: radial_bv::EnergyBreakdown) -> Self {
        Self {
            bulk: e.bulk,
            singular: e.singular,
            penalty_inner: e.penalty_inner,
            penalty_outer: e.penalty_outer,
            total: e.total,
        }
    }
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    command: &'static str,
    problem: ProblemBlock<'a>,
    tolerances: ToleranceBlock,
    lambda: f64,
    sign: f64,
    attained_inner: bool,
    trace_inner: f64,
    trace_outer: f64,
    #[serde(serialize_with = "ser_maybe_inf")]
    delta_m_infinity: f64,
    delta_m_infinite: bool,
    energy: EnergyBlock,
}

fn solve_problem(cfg: &RunConfig, cells: usize) -> Result<(RadialProblem, RadialSolution), CliError> {
    let p = cfg.problem()?;
    let sol = solve_with_grid(&p, cells)?;
    Ok((p, sol))
}

fn run_solve(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args)?;
    let cells = cfg.cells.unwrap_or(radial_bv::solver::DEFAULT_PROFILE_CELLS);
    let (p, sol) = solve_problem(&cfg, cells)?;

    if cfg.formats.csv {
        write_file(&cfg.out.join("solution.csv"), &solution_csv(&p, &sol))?;
    }
    if cfg.formats.json {
        let summary = SolveSummary {
            command: "solve",
            problem: ProblemBlock::new(&cfg),
            tolerances: ToleranceBlock::solver_only(cells),
            lambda: sol.lambda,
            sign: sol.sign,
            attained_inner: sol.attained_inner,
            trace_inner: sol.trace_inner,
            trace_outer: sol.trace_outer,
            delta_m_infinity: sol.delta_m_infinity,
            delta_m_infinite: sol.delta_m_infinity.is_infinite(),
            energy: sol.energy.into(),
        };
        write_json(&cfg.out.join("summary.json"), &summary)?;
    }
    if cfg.formats.svg {
        let pts: Vec<(f64, f64)> = sol.profile.iter().map(|n| (n.r, n.u)).collect();
        let svg = svg_line_plot("radial profile", "r", "u", &[("u(r)", pts)]);
        write_file(&cfg.out.join("profile.svg"), &svg)?;
    }

    println!(
        "lambda = {}, attained_inner = {}, trace_inner = {}, total energy = {}",
        fmt_g17(sol.lambda),
        sol.attained_inner,
        fmt_g17(sol.trace_inner),
        fmt_g17(sol.energy.total)
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    index: usize,
    mu: f64,
    rho1: f64,
    rho2: f64,
    m1: f64,
    m2: f64,
    lambda: f64,
    attained_inner: bool,
    trace_inner: f64,
    #[serde(serialize_with = "ser_maybe_inf")]
    delta_m_infinity: f64,
    bulk: f64,
    penalty_inner: f64,
    total: f64,
    max_principle: bool,
    lower_bound: bool,
    classification_consistent: bool,
}

#[derive(Serialize)]
struct SweepSummary {
    command: &'static str,
    seed: u64,
    count: usize,
    tolerances: ToleranceBlock,
    all_passed: bool,
    rows: Vec<SweepRow>,
}

fn run_sweep(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args)?;
    let cells = cfg.cells.unwrap_or(radial_bv::solver::DEFAULT_PROFILE_CELLS);
    let cases = sweep_problems(cfg.seed, cfg.sweep_count);

    let rows: Vec<Result<SweepRow, CliError>> = cases
        .par_iter()
        .enumerate()
        .map(|(index, case)| {
            let p = case.problem()?;
            let sol = solve_with_grid(&p, cells)?;
            let class = classify_boundary_behavior(&p)?;
            Ok(SweepRow {
                index,
                mu: case.mu,
                rho1: case.rho1,
                rho2: case.rho2,
                m1: case.m1,
                m2: case.m2,
                lambda: sol.lambda,
                attained_inner: sol.attained_inner,
                trace_inner: sol.trace_inner,
                delta_m_infinity: sol.delta_m_infinity,
                bulk: sol.energy.bulk,
                penalty_inner: sol.energy.penalty_inner,
                total: sol.energy.total,
                max_principle: check_max_principle(&p, &sol).passed,
                lower_bound: check_lower_bound(&p, &sol).passed,
                classification_consistent: matches!(class, BoundaryBehavior::Attained)
                    == sol.attained_inner,
            })
        })
        .collect();
    let rows: Vec<SweepRow> = rows.into_iter().collect::<Result<_, _>>()?;

    let all_passed = rows
        .iter()
        .all(|r| r.max_principle && r.lower_bound && r.classification_consistent);

    if cfg.formats.csv {
        let mut csv = String::from(
            "index,mu,rho1,rho2,m1,m2,lambda,attained_inner,trace_inner,delta_m_infinity,bulk,penalty_inner,total,max_principle,lower_bound,classification_consistent\n",
        );
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.index,
                fmt_g17(r.mu),
                fmt_g17(r.rho1),
                fmt_g17(r.rho2),
                fmt_g17(r.m1),
                fmt_g17(r.m2),
                fmt_g17(r.lambda),
                r.attained_inner,
                fmt_g17(r.trace_inner),
                if r.delta_m_infinity.is_infinite() {
                    "inf".to_string()
                } else {
                    fmt_g17(r.delta_m_infinity)
                },
                fmt_g17(r.bulk),
                fmt_g17(r.penalty_inner),
                fmt_g17(r.total),
                r.max_principle,
                r.lower_bound,
                r.classification_consistent
            ));
        }
        write_file(&cfg.out.join("sweep.csv"), &csv)?;
    }
    if cfg.formats.json {
        let summary = SweepSummary {
            command: "sweep",
            seed: cfg.seed,
            count: rows.len(),
            tolerances: ToleranceBlock::solver_only(cells),
            all_passed,
            rows,
        };
        write_json(&cfg.out.join("summary.json"), &summary)?;
    }

    println!("sweep: {} problems, all checks passed: {all_passed}", cfg.sweep_count);
    if all_passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

#[derive(Serialize)]
struct CheckBlock {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct VerifySummary {
    command: &'static str,
    seed: u64,
    tolerances: ToleranceBlock,
    checks: Vec<CheckBlock>,
    all_passed: bool,
}

fn run_verify(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args)?;
    let reports = suite::run_all(cfg.seed);
    let all_passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        println!("[{}] {} - {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }

    if cfg.formats.json {
        let summary = VerifySummary {
            command: "verify",
            seed: cfg.seed,
            tolerances: ToleranceBlock::with_oracle(
                radial_bv::solver::DEFAULT_PROFILE_CELLS,
                &OracleConfig::default(),
            ),
            checks: reports
                .iter()
                .map(|r| CheckBlock {
                    name: r.name.to_string(),
                    passed: r.passed,
                    detail: r.detail.clone(),
                })
                .collect(),
            all_passed,
        };
        write_json(&cfg.out.join("summary.json"), &summary)?;
    }

    if all_passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

#[derive(Serialize)]
struct ThresholdBlock {
    linf: f64,
    energy_rel: f64,
}

#[derive(Serialize)]
struct CompareSummary<'a> {
    command: &'static str,
    problem: ProblemBlock<'a>,
    tolerances: ToleranceBlock,
    thresholds: ThresholdBlock,
    attained_inner: bool,
    linf: f64,
    l1: f64,
    energy_gap: f64,
    passed: bool,
}

fn run_oracle_compare(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args)?;
    let p = cfg.problem()?;
    let cells = cfg.cells.unwrap_or(2048);

    let attained = matches!(classify_boundary_behavior(&p)?, BoundaryBehavior::Attained);
    let thresholds = AgreementThresholds {
        linf: if attained { 5e-3 } else { 1e-2 },
        energy_rel: 1e-3,
    };
    let oracle_cfg = OracleConfig { cells, tol: cfg.tol, ..OracleConfig::default() };
    let report = oracle_agreement(&p, &oracle_cfg, &thresholds)?;

    if cfg.formats.json {
        let summary = CompareSummary {
            command: "oracle-compare",
            problem: ProblemBlock::new(&cfg),
            tolerances: ToleranceBlock::with_oracle(radial_bv::solver::DEFAULT_PROFILE_CELLS, &oracle_cfg),
            thresholds: ThresholdBlock { linf: thresholds.linf, energy_rel: thresholds.energy_rel },
            attained_inner: report.attained_inner,
            linf: report.linf,
            l1: report.l1,
            energy_gap: report.energy_gap,
            passed: report.passed,
        };
        write_json(&cfg.out.join("summary.json"), &summary)?;
    }

    println!(
        "oracle compare: linf = {:.3e}, l1 = {:.3e}, energy gap = {:.3e}, passed = {}",
        report.linf, report.l1, report.energy_gap, report.passed
    );
    if report.passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

#[derive(Serialize)]
struct RegRow {
    mode: &'static str,
    delta: f64,
    l1_distance_to_limit: Option<f64>,
    energy: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct RegSummary<'a> {
    command: &'static str,
    problem: ProblemBlock<'a>,
    tolerances: ToleranceBlock,
    deltas: Vec<f64>,
    rows: Vec<RegRow>,
    quadratic_monotone: bool,
    density_shift_monotone: bool,
}

fn run_reg_study(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args)?;
    let p = cfg.problem()?;
    let cells = cfg.cells.unwrap_or(2048);
    let tau = p
        .density
        .default_tau()
        .ok_or_else(|| CliError::Config("density has an empty regularization window".into()))?;

    let mut rows = Vec::new();
    let mut monotone = [true, true];
    for (mi, (label, mode)) in [
        ("quadratic", OracleMode::QuadraticReg { delta: 0.0 }),
        ("density-shift", OracleMode::DensityReg { delta: 0.0, tau }),
    ]
    .into_iter()
    .enumerate()
    {
        let oracle_cfg = OracleConfig { cells, tol: cfg.tol, mode, ..OracleConfig::default() };
        let points = regularization_study(&p, &cfg.deltas, &oracle_cfg)?;
        let mut prev: Option<f64> = None;
        for (delta, point) in cfg.deltas.iter().zip(points) {
            match point {
                Ok(pt) => {
                    if let Some(prev) = prev {
                        if pt.l1_distance_to_limit >= prev {
                            monotone[mi] = false;
                        }
                    }
                    prev = Some(pt.l1_distance_to_limit);
                    rows.push(RegRow {
                        mode: label,
                        delta: *delta,
                        l1_distance_to_limit: Some(pt.l1_distance_to_limit),
                        energy: Some(pt.energy),
                        error: None,
                    });
                }
                Err(e) => {
                    monotone[mi] = false;
                    rows.push(RegRow {
                        mode: label,
                        delta: *delta,
                        l1_distance_to_limit: None,
                        energy: None,
                        error: Some(e.to_string()),
                    });
                }
            }
        }
    }

    if cfg.formats.csv {
        let mut csv = String::from("mode,delta,l1_distance_to_limit,energy\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                r.mode,
                fmt_g17(r.delta),
                r.l1_distance_to_limit.map(fmt_g17).unwrap_or_default(),
                r.energy.map(fmt_g17).unwrap_or_default()
            ));
        }
        write_file(&cfg.out.join("reg_study.csv"), &csv)?;
    }
    if cfg.formats.svg {
        let series: Vec<(&str, Vec<(f64, f64)>)> = ["quadratic", "density-shift"]
            .iter()
            .map(|label| {
                let pts = rows
                    .iter()
                    .filter(|r| &r.mode == label)
                    .filter_map(|r| {
                        r.l1_distance_to_limit
                            .map(|l1| (r.delta.log10(), l1.max(1e-300).log10()))
                    })
                    .collect();
                (*label, pts)
            })
            .collect();
        let svg = svg_line_plot(
            "regularization convergence",
            "log10 delta",
            "log10 L1 distance",
            &series,
        );
        write_file(&cfg.out.join("reg_study.svg"), &svg)?;
    }
    if cfg.formats.json {
        let summary = RegSummary {
            command: "reg-study",
            problem: ProblemBlock::new(&cfg),
            tolerances: ToleranceBlock::with_oracle(
                radial_bv::solver::DEFAULT_PROFILE_CELLS,
                &OracleConfig { cells, tol: cfg.tol, ..OracleConfig::default() },
            ),
            deltas: cfg.deltas.clone(),
            rows,
            quadratic_monotone: monotone[0],
            density_shift_monotone: monotone[1],
        };
        write_json(&cfg.out.join("summary.json"), &summary)?;
    }

    println!(
        "reg study: quadratic monotone = {}, density-shift monotone = {}",
        monotone[0], monotone[1]
    );
    Ok(())
}
