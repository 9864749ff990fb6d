//! The radial operator `u ↦ -(w u')'/w + μ sinh^{-2} u` with `w = sinh^{m-1}`
//! on a truncation `[r_min, L]`, discretized by finite volumes.
//!
//! Stiffness uses `w` at cell midpoints, the mass of each node is the
//! integral of `w` over its dual cell, and the generalized problem
//! `K u = λ M u` is symmetrized as `M^{-1/2} K M^{-1/2}`, the discrete form
//! of `v = sqrt(w) u`. All entries are assembled as ratios of logarithms so
//! the huge dynamic range of `w` never materializes.

use crate::error::{Error, Result};
use crate::hyperbolic::Dimensions;
use crate::numerics::quadrature::gauss_legendre;
use crate::numerics::{eigen_smallest_k, TridiagonalSystem};
use crate::radial::{log_weight, mckean_bound};
use crate::testfn::alpha;

pub const DEFAULT_GRID: usize = 4096;
pub const DEFAULT_MAX_GRID: usize = 65_536;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// `V(r) = (m-1)^2/4 + α(r) + μ / sinh^2(r)`, the potential after `v = sqrt(w) u`.
pub fn schrodinger_potential(dims: Dimensions, mu: f64, r: f64) -> f64 {
    let s = r.sinh();
    mckean_bound(dims) + alpha(dims, r) + mu / (s * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEigenproblem {
    pub dims: Dimensions,
    pub mu: f64,
    /// Left end; `0` means the natural (weighted-form) condition at the origin.
    pub r_min: f64,
    pub l: f64,
    /// Number of grid cells of the coarse level.
    pub grid: usize,
    /// Relative tolerance on the Richardson correction.
    pub tolerance: f64,
    /// Largest grid tried before giving up.
    pub max_grid: usize,
}

impl RadialEigenproblem {
    /// Dirichlet truncation at `L` with the default left end: the origin
    /// for `μ = 0`, otherwise a Dirichlet cap at `max(h, 1e-6)`.
    pub fn new(dims: Dimensions, mu: f64, l: f64, grid: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::domain(format!("truncation radius L = {l} must be positive")));
        }
        let r_min = if mu == 0.0 {
            0.0
        } else {
            (l / grid as f64).max(1e-6)
        };
        let p = RadialEigenproblem {
            dims,
            mu,
            r_min,
            l,
            grid,
            tolerance: DEFAULT_TOLERANCE,
            max_grid: DEFAULT_MAX_GRID.max(grid),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::domain("eigenvalue tolerance must be positive"));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn with_max_grid(mut self, max_grid: usize) -> Self {
        self.max_grid = max_grid.max(self.grid);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::domain(format!("μ = {} must be nonnegative", self.mu)));
        }
        if !(self.r_min >= 0.0 && self.r_min < self.l) {
            return Err(Error::domain(format!(
                "need 0 <= r_min < L, got r_min = {}, L = {}",
                self.r_min, self.l
            )));
        }
        if self.grid < 16 {
            return Err(Error::domain(format!("grid must have at least 16 cells, got {}", self.grid)));
        }
        if self.r_min == 0.0 && self.mu > 0.0 {
            return Err(Error::domain("μ > 0 needs r_min > 0"));
        }
        Ok(())
    }

    /// Number of unknowns on a grid of `cells` cells.
    fn unknowns(&self, cells: usize) -> usize {
        if self.r_min == 0.0 {
            cells
        } else {
            cells - 1
        }
    }

    /// The symmetrized matrix on `cells` cells and the node radii.
    pub fn assemble(&self, cells: usize) -> Result<(TridiagonalSystem, Vec<f64>)> {
        let natural = self.r_min == 0.0;
        let h = (self.l - self.r_min) / cells as f64;
        let n = self.unknowns(cells);
        // node radii: r_min + i h for i = 0..n (natural) or i = 1..=n (Dirichlet)
        let offset = if natural { 0 } else { 1 };
        let nodes: Vec<f64> = (0..n).map(|i| self.r_min + (i + offset) as f64 * h).collect();
        let lw = |r: f64| log_weight(self.dims, r);
        // log of w at the midpoint to the right of each node, and to the left of the first
        let ln_mid_right: Vec<f64> = nodes.iter().map(|&r| lw(r + 0.5 * h)).collect();
        let ln_mid_first_left = lw(nodes[0] - 0.5 * h);
        let ln_mass: Vec<f64> = nodes
            .iter()
            .map(|&r| ln_cell_mass(self.dims, (r - 0.5 * h).max(0.0), r + 0.5 * h))
            .collect();

        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let right = (ln_mid_right[i] - ln_mass[i]).exp();
            let left = if i == 0 {
                if natural {
                    0.0
                } else {
                    (ln_mid_first_left - ln_mass[0]).exp()
                }
            } else {
                (ln_mid_right[i - 1] - ln_mass[i]).exp()
            };
            let s = nodes[i].sinh();
            let centrifugal = if self.mu > 0.0 { self.mu / (s * s) } else { 0.0 };
            // the cell masses carry one factor of h, the stiffness 1/h
            diag.push((left + right) / h + centrifugal);
            if i + 1 < n {
                let ln_e = ln_mid_right[i] - 0.5 * (ln_mass[i] + ln_mass[i + 1]);
                off.push(-ln_e.exp() / h);
            }
        }
        Ok((TridiagonalSystem::new(diag, off)?, nodes))
    }
}

/// `ln ∫_a^b sinh^{m-1}` on a short cell by fixed Gauss–Legendre in log space.
fn ln_cell_mass(dims: Dimensions, a: f64, b: f64) -> f64 {
    let gl = gauss_legendre(12);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let logs: Vec<f64> = gl
        .nodes
        .iter()
        .map(|x| log_weight(dims, mid + half * x))
        .collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = gl
        .weights
        .iter()
        .zip(&logs)
        .map(|(w, l)| w * (l - shift).exp())
        .sum();
    shift + (half * sum).ln()
}

/// Eigenvalues with the grid that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialEigs {
    /// Richardson-extrapolated eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Coarse grid of the final Richardson pair.
    pub grid: usize,
    /// Largest `|λ_{2N} - λ_N| / 3` over the returned values.
    pub correction: f64,
}

/// The `k` smallest eigenvalues of `problem`, extrapolated from grids `N`
/// and `2N`; `N` doubles until the correction is within tolerance.
pub fn radial_eigs_detailed(problem: &RadialEigenproblem, k: usize) -> Result<RadialEigs> {
    problem.validate()?;
    if k == 0 || k > problem.unknowns(problem.grid) {
        return Err(Error::InvalidK {
            k,
            n: problem.unknowns(problem.grid),
        });
    }
    let solve = |cells: usize| -> Result<Vec<f64>> {
        let (sys, _) = problem.assemble(cells)?;
        eigen_smallest_k(&sys, k)
    };
    let mut cells = problem.grid;
    let mut coarse = solve(cells)?;
    loop {
        let fine = solve(2 * cells)?;
        let mut worst: f64 = 0.0;
        let mut converged = true;
        let values: Vec<f64> = coarse
            .iter()
            .zip(&fine)
            .map(|(&c, &f)| {
                let corr = (f - c) / 3.0;
                worst = worst.max(corr.abs());
                if corr.abs() > problem.tolerance * f.abs().max(1.0) {
                    converged = false;
                }
                f + corr
            })
            .collect();
        if converged {
            return Ok(RadialEigs {
                values,
                grid: cells,
                correction: worst,
            });
        }
        if 4 * cells > problem.max_grid {
            return Err(Error::NonConvergence(format!(
                "radial eigenvalues (m={}, μ={}, L={}) still move by {worst:e} at grid {}",
                problem.dims.m(),
                problem.mu,
                problem.l,
                2 * cells
            )));
        }
        cells *= 2;
        coarse = fine;
    }
}

pub fn radial_eigs(problem: &RadialEigenproblem, k: usize) -> Result<Vec<f64>> {
    Ok(radial_eigs_detailed(problem, k)?.values)
}

impl RadialEigenproblem {
    /// Lowest eigenvalue and eigenvector (values of `u` at the nodes) on the
    /// coarse grid.
    pub fn ground_state(&self) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let (sys, nodes) = self.assemble(self.grid)?;
        let lambda = eigen_smallest_k(&sys, 1)?[0];
        let v = sys.eigenvector(lambda);
        // u = M^{-1/2} v keeps the sign pattern of v
        Ok((lambda, v, nodes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dims(m: usize) -> Dimensions {
        Dimensions::hypersurface(m).unwrap()
    }

    #[test]
    fn m3_matches_closed_form() {
        // u = sin(κ r)/sinh(r) gives λ = 1 + κ^2 with κ = jπ/L
        let l = 10.0;
        let p = RadialEigenproblem::new(dims(3), 0.0, l, 1024).unwrap();
        let got = radial_eigs(&p, 3).unwrap();
        for (j, v) in got.iter().enumerate() {
            let exact = 1.0 + ((j + 1) as f64 * PI / l).powi(2);
            assert!((v - exact).abs() < 1e-6, "j={j} got={v} exact={exact}");
        }
    }

    #[test]
    fn m2_bottom_in_bracket_and_decreasing() {
        let mut last = f64::INFINITY;
        for &l in &[10.0, 20.0, 40.0] {
            let p = RadialEigenproblem::new(dims(2), 0.0, l, DEFAULT_GRID).unwrap();
            let lam = radial_eigs(&p, 1).unwrap()[0];
            assert!(lam > 0.25 && lam < last);
            last = lam;
        }
        assert!(last < 0.27);
    }

    #[test]
    fn ground_state_has_no_sign_change() {
        let p = RadialEigenproblem::new(dims(2), 0.0, 20.0, 512).unwrap();
        let (_, v, _) = p.ground_state().unwrap();
        let sign = v[0].signum();
        assert!(v.iter().all(|x| x * sign >= 0.0));
    }

    #[test]
    fn centrifugal_term_raises_eigenvalues() {
        let base = radial_eigs(&RadialEigenproblem::new(dims(2), 0.0, 6.0, 512).unwrap(), 1).unwrap()[0];
        let one = radial_eigs(&RadialEigenproblem::new(dims(2), 1.0, 6.0, 512).unwrap(), 1).unwrap()[0];
        let four = radial_eigs(&RadialEigenproblem::new(dims(2), 4.0, 6.0, 512).unwrap(), 1).unwrap()[0];
        assert!(base < one && one < four);
    }

    #[test]
    fn m2_mu1_matches_flat_disk_limit_for_small_l() {
        // on a tiny disk the metric is nearly flat: λ ≈ j_{1,1}^2 / L^2
        let l = 0.01;
        let p = RadialEigenproblem::new(dims(2), 1.0, l, 1024).unwrap();
        let lam = radial_eigs(&p, 1).unwrap()[0];
        let j11 = 3.831705970207512;
        assert!((lam * l * l / (j11 * j11) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn invalid_inputs() {
        assert!(RadialEigenproblem::new(dims(2), 0.0, 10.0, 8).is_err());
        assert!(RadialEigenproblem::new(dims(2), -1.0, 10.0, 64).is_err());
        assert!(RadialEigenproblem::new(dims(2), 0.0, 0.0, 64).is_err());
        let p = RadialEigenproblem::new(dims(2), 0.0, 10.0, 64).unwrap();
        assert!(matches!(radial_eigs(&p, 65), Err(Error::InvalidK { .. })));
        assert!(matches!(radial_eigs(&p, 0), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn non_convergence_is_reported() {
        let p = RadialEigenproblem::new(dims(2), 0.0, 40.0, 16)
            .unwrap()
            .with_tolerance(1e-14)
            .unwrap()
            .with_max_grid(64);
        assert!(matches!(radial_eigs(&p, 1), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn potential_has_the_mckean_floor() {
        let v = schrodinger_potential(dims(3), 0.0, 5.0);
        assert_eq!(v, 1.0);
        assert!(schrodinger_potential(dims(5), 2.0, 30.0) - 4.0 < 1e-20);
    }
}
