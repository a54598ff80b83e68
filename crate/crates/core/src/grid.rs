//! Graded radial grids.
//!
//! Profiles can have a power-type derivative blow-up at the inner
//! radius, so both the stored solver profile and the discrete oracle
//! use the same geometric grading clustered toward `rho1`. Sharing the
//! generator keeps node-aligned comparisons exact.

/// Relative offset of the first interior node from `rho1`.
pub const GRID_FLOOR_REL: f64 = 1e-10;

/// Geometrically graded nodes `rho1 = r_0 < ... < r_cells = rho2`.
///
/// Interior offsets from `rho1` form a geometric sequence whose
/// smallest element is `GRID_FLOOR_REL * (rho2 - rho1)`. Endpoints are
/// exactly the supplied radii.
pub fn graded_grid(rho1: f64, rho2: f64, cells: usize) -> Vec<f64> {
    assert!(cells >= 1, "grid needs at least one cell");
    assert!(rho1 < rho2, "grid needs rho1 < rho2");
    let delta = rho2 - rho1;
    let mut nodes = Vec::with_capacity(cells + 1);
    nodes.push(rho1);
    if cells >= 2 {
        let theta = GRID_FLOOR_REL.powf(1.0 / (cells as f64 - 1.0));
        for i in 1..cells {
            nodes.push(rho1 + delta * theta.powi((cells - i) as i32));
        }
    }
    nodes.push(rho2);
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact() {
        let g = graded_grid(1.0, 2.0, 512);
        assert_eq!(g.len(), 513);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[512], 2.0);
    }

    #[test]
    fn strictly_increasing_and_graded() {
        let g = graded_grid(0.5, 8.0, 2048);
        for w in g.windows(2) {
            assert!(w[0] < w[1]);
        }
        let first = g[1] - g[0];
        let last = g[2048] - g[2047];
        assert!(first < 1e-8 * last);
        assert!((first - GRID_FLOOR_REL * 7.5).abs() < 1e-15);
    }

    #[test]
    fn single_cell() {
        assert_eq!(graded_grid(1.0, 2.0, 1), vec![1.0, 2.0]);
    }
}
