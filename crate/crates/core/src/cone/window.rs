//! Truncated cone spectra assembled from the radial branches, and the
//! quasimode probe of the essential spectrum.

use super::eigen::{radial_eigs, RadialEigenproblem, DEFAULT_MAX_GRID, DEFAULT_TOLERANCE};
use super::Cone;
use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::testfn::{epsilon_r, support_rule, weighted_norm_sq, Quasimode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSettings {
    /// Coarse grid of every radial solve.
    pub grid: usize,
    pub tolerance: f64,
    pub max_grid: usize,
    /// Number of distinct cross-section eigenvalues tried before giving up
    /// on completeness.
    pub max_branches: usize,
}

impl Default for WindowSettings {
    fn default() -> Self {
        WindowSettings {
            grid: 512,
            tolerance: DEFAULT_TOLERANCE,
            max_grid: DEFAULT_MAX_GRID,
            max_branches: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub value: f64,
    /// Index `j` of the cross-section eigenvalue `μ_j`.
    pub mu_index: usize,
    /// Index of the eigenvalue within its radial branch.
    pub radial_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumWindow {
    pub l: f64,
    /// The smallest eigenvalues found, repeated by multiplicity, ascending.
    pub entries: Vec<SpectrumEntry>,
    /// Number of radial branches solved.
    pub branches: usize,
    /// Whether every omitted branch provably lies above the last entry.
    pub complete: bool,
}

impl SpectrumWindow {
    /// Number of entries in `(a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        self.entries.iter().filter(|e| e.value > a && e.value <= b).count()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

/// The `k_max` smallest Dirichlet eigenvalues of the cone truncated at `L`.
///
/// Branches are solved in order of increasing `μ_j`. The bottom of a branch
/// increases with `μ`, so once a branch starts at or above the current
/// `k_max`-th value no later branch can contribute and the window is
/// complete. The bottom entry is always exact since `μ_0 = 0` comes first.
pub fn cone_spectrum_window(
    cone: &Cone,
    l: f64,
    k_max: usize,
    settings: &WindowSettings,
) -> Result<SpectrumWindow> {
    if k_max == 0 {
        return Err(Error::InvalidK { k: 0, n: settings.grid });
    }
    let dims = cone.dims();
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    let mut complete = false;
    let mut branches = 0;
    let limit = cone
        .gamma
        .branch_limit()
        .map_or(settings.max_branches, |b| b.min(settings.max_branches));
    for j in 0..limit {
        let Some((mu, mult)) = cone.gamma.eigen(j) else { break };
        let problem = RadialEigenproblem::new(dims, mu, l, settings.grid)?
            .with_tolerance(settings.tolerance)?
            .with_max_grid(settings.max_grid);
        let kth = (entries.len() >= k_max).then(|| entries[k_max - 1].value);
        let bottom = radial_eigs(&problem, 1)?[0];
        branches += 1;
        if kth.is_some_and(|v| bottom >= v) {
            complete = true;
            break;
        }
        // each radial value fills `mult` slots, and only values below the
        // current k_max-th entry can still enter (counted on the coarse grid
        // with a little slack for the discretization error)
        let mut want = k_max.div_ceil(mult);
        if let Some(t) = kth {
            let (sys, _) = problem.assemble(settings.grid)?;
            want = want.min(sys.sturm_count(t + 0.05 * (t - bottom).abs() + 1e-9) + 1);
        }
        let values = radial_eigs(&problem, want.clamp(1, settings.grid - 1))?;
        for (i, &v) in values.iter().enumerate() {
            if kth.is_some_and(|t| v >= t) {
                break;
            }
            for _ in 0..mult {
                entries.push(SpectrumEntry {
                    value: v,
                    mu_index: j,
                    radial_index: i,
                });
            }
        }
        entries.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.mu_index.cmp(&b.mu_index))
                .then(a.radial_index.cmp(&b.radial_index))
        });
        entries.truncate(k_max);
    }
    if !complete && cone.gamma.branch_limit().is_some_and(|b| branches == b) {
        complete = true;
    }
    Ok(SpectrumWindow {
        l,
        entries,
        branches,
        complete,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub r: f64,
    /// `∫|Δφ + λφ|^2 d‖C‖ / ∫|φ|^2 d‖C‖`.
    pub ratio: f64,
    /// `4 ε_R`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub lambda: f64,
    pub rows: Vec<ProbeRow>,
    pub decreasing: bool,
}

impl ProbeReport {
    pub fn holds(&self) -> bool {
        self.decreasing && self.rows.iter().all(|r| r.holds)
    }
}

/// Residual ratios of `quasimodes` on `cone`, without asserting.
pub fn probe_report(cone: &Cone, lambda: f64, quasimodes: &[Quasimode]) -> Result<ProbeReport> {
    let dims = cone.dims();
    let omega = cone.gamma.omega;
    let mut rows = Vec::with_capacity(quasimodes.len());
    for q in quasimodes {
        if q.dims != dims || q.lambda != lambda {
            return Err(Error::domain(format!(
                "quasimode (m={}, λ={}) does not match the cone (m={}) and λ = {lambda}",
                q.dims.m(),
                q.lambda,
                dims.m()
            )));
        }
        let (a, b) = q.support();
        if !(a > 0.0) {
            return Err(Error::domain("quasimode support must lie in (0, ∞)"));
        }
        let residual = omega * integrate(|t| q.weighted_residual(t).norm_sqr(), &support_rule(a, b)?)?;
        let mass = omega * weighted_norm_sq(q, (a, b), |j| j.value)?;
        if !(mass > 0.0) {
            return Err(Error::DivisionByZero(format!("quasimode at R = {} has zero mass", q.r)));
        }
        let ratio = residual / mass;
        let bound = 4.0 * epsilon_r(dims, lambda, q.r)?;
        rows.push(ProbeRow {
            r: q.r,
            ratio,
            bound,
            holds: ratio <= bound,
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    Ok(ProbeReport {
        lambda,
        rows,
        decreasing,
    })
}

/// [`probe_report`], failing if a ratio exceeds `4 ε_R` or the ratios do
/// not strictly decrease.
pub fn essential_spectrum_probe(
    cone: &Cone,
    lambda: f64,
    quasimodes: &[Quasimode],
) -> Result<ProbeReport> {
    let rep = probe_report(cone, lambda, quasimodes)?;
    if let Some(row) = rep.rows.iter().find(|r| !r.holds) {
        return Err(Error::violation(
            "probe-envelope",
            format!("R={}: ratio {:e} > {:e}", row.r, row.ratio, row.bound),
        ));
    }
    if !rep.decreasing {
        return Err(Error::violation("probe-decrease", "residual ratios do not decrease"));
    }
    Ok(rep)
}
