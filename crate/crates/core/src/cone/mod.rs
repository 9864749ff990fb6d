//! Cones over boundary submanifolds of the sphere at infinity, their radial
//! spectra, and quasimode probes of the essential spectrum.

mod eigen;
mod window;

pub use eigen::{
    radial_eigs, radial_eigs_detailed, schrodinger_potential, RadialEigenproblem, RadialEigs,
    DEFAULT_GRID, DEFAULT_MAX_GRID, DEFAULT_TOLERANCE,
};
pub use window::{
    cone_spectrum_window, essential_spectrum_probe, probe_report, ProbeReport, ProbeRow,
    SpectrumEntry, SpectrumWindow, WindowSettings,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hyperbolic::Dimensions;
use crate::numerics::{integrate_log_weighted, QuadratureRule};
use crate::radial::log_weight;

/// Which boundary submanifold `Γ^{m-1} ⊂ S^n` a cone is built on.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaKind {
    /// Latitude circle of spherical radius `rho` in the first three
    /// coordinates (`m = 2`).
    Circle { rho: f64 },
    /// Equatorial `S^{m-1}` spanned by the first `m` coordinates.
    Sphere,
    /// Spectral data only, without a parametrization.
    Custom,
}

/// The cross-section `Γ`: its volume and Laplace spectrum, and for the
/// analytic families a parametrization into the unit sphere of `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryManifold {
    pub dims: Dimensions,
    pub kind: GammaKind,
    pub omega: f64,
    /// Explicit `(μ, multiplicity)` list; used only for [`GammaKind::Custom`].
    custom_eigs: Vec<(f64, usize)>,
}

/// Latitude circle of spherical radius `rho` in `S^2`.
pub fn circle_gamma(rho: f64) -> Result<BoundaryManifold> {
    circle_gamma_in(2, rho)
}

/// Latitude circle of `S^2 ⊂ S^n` (the remaining coordinates vanish).
pub fn circle_gamma_in(n: usize, rho: f64) -> Result<BoundaryManifold> {
    if !(rho > 0.0 && rho < PI) {
        return Err(Error::domain(format!("circle radius rho = {rho} must lie in (0, π)")));
    }
    Ok(BoundaryManifold {
        dims: Dimensions::new(2, n)?,
        kind: GammaKind::Circle { rho },
        omega: 2.0 * PI * rho.sin(),
        custom_eigs: Vec::new(),
    })
}

/// Equatorial `S^{m-1} ⊂ S^n`; its cone is a totally geodesic `H^m`.
pub fn sphere_gamma(dims: Dimensions) -> BoundaryManifold {
    let m = dims.m() as f64;
    BoundaryManifold {
        dims,
        kind: GammaKind::Sphere,
        omega: 2.0 * PI.powf(m / 2.0) / gamma_half_integer(dims.m()),
        custom_eigs: Vec::new(),
    }
}

/// `Γ(m/2)` for a positive integer `m`.
fn gamma_half_integer(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        (1..m / 2).map(|j| j as f64).product()
    } else {
        // Γ(1/2) (1/2)(3/2)...((m-2)/2)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < m as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Parse `μ multiplicity` lines; blank lines and `#` comments are skipped.
pub fn parse_eigen_list(text: &str) -> Result<Vec<(f64, usize)>> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(mu), Some(mult), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!(
                "line {}: expected `mu multiplicity`, got `{line}`",
                lineno + 1
            )));
        };
        let mu: f64 = mu
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad eigenvalue `{mu}`", lineno + 1)))?;
        let mult: usize = mult
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad multiplicity `{mult}`", lineno + 1)))?;
        if !mu.is_finite() || mu < 0.0 || mult == 0 {
            return Err(Error::Parse(format!(
                "line {}: need mu >= 0 and multiplicity >= 1",
                lineno + 1
            )));
        }
        if let Some(&(prev, _)) = out.last() {
            if mu <= prev {
                return Err(Error::Parse(format!(
                    "line {}: eigenvalues must be strictly ascending",
                    lineno + 1
                )));
            }
        }
        out.push((mu, mult));
    }
    match out.first() {
        None => Err(Error::Parse("eigenvalue list is empty".into())),
        Some(&(mu0, _)) if mu0 != 0.0 => Err(Error::Parse(format!(
            "the first cross-section eigenvalue must be 0, got {mu0}"
        ))),
        _ => Ok(out),
    }
}

impl BoundaryManifold {
    /// A cross-section known only through its volume and spectrum.
    pub fn custom(dims: Dimensions, omega: f64, eigs: Vec<(f64, usize)>) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::domain(format!("cross-section volume must be positive, got {omega}")));
        }
        match eigs.first() {
            Some(&(0.0, _)) => {}
            _ => return Err(Error::domain("cross-section spectrum must start at 0")),
        }
        if eigs.windows(2).any(|w| w[1].0 <= w[0].0) || eigs.iter().any(|e| e.1 == 0) {
            return Err(Error::domain("cross-section spectrum must be strictly ascending with positive multiplicities"));
        }
        Ok(BoundaryManifold {
            dims,
            kind: GammaKind::Custom,
            omega,
            custom_eigs: eigs,
        })
    }

    /// The same manifold with its volume multiplied by `factor`.
    pub fn with_omega_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.omega *= factor;
        out
    }

    /// Number of distinct cross-section eigenvalues available, if finite.
    pub fn branch_limit(&self) -> Option<usize> {
        match self.kind {
            GammaKind::Custom => Some(self.custom_eigs.len()),
            _ => None,
        }
    }

    /// The `j`-th distinct eigenvalue `μ_j` and its multiplicity.
    pub fn eigen(&self, j: usize) -> Option<(f64, usize)> {
        match self.kind {
            GammaKind::Circle { rho } => {
                let s = rho.sin();
                let mu = (j as f64 / s).powi(2);
                Some((mu, if j == 0 { 1 } else { 2 }))
            }
            GammaKind::Sphere => {
                let m = self.dims.m();
                let jf = j as f64;
                let mu = jf * (jf + m as f64 - 2.0);
                let mult = binomial(j + m - 1, m - 1) - if j >= 2 { binomial(j + m - 3, m - 1) } else { 0 };
                Some((mu, mult))
            }
            GammaKind::Custom => self.custom_eigs.get(j).copied(),
        }
    }

    /// The first `count` distinct eigenvalues with multiplicities.
    pub fn cross_section_eigs(&self, count: usize) -> Vec<(f64, usize)> {
        (0..count).map_while(|j| self.eigen(j)).collect()
    }

    /// Dimension of the parameter domain, `m - 1`.
    pub fn param_dim(&self) -> usize {
        self.dims.m() - 1
    }

    /// `γ(params)` on the unit sphere of `R^{n+1}`.
    pub fn point(&self, params: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.dims.ambient()];
        match self.kind {
            GammaKind::Circle { rho } => {
                let (s, c) = rho.sin_cos();
                let (st, ct) = params[0].sin_cos();
                x[0] = s * ct;
                x[1] = s * st;
                x[2] = c;
            }
            GammaKind::Sphere => {
                let y = hyperspherical(params);
                x[..y.len()].copy_from_slice(&y);
            }
            GammaKind::Custom => {
                return Err(Error::Geometry("custom cross-section has no parametrization".into()))
            }
        }
        Ok(x)
    }

    /// `∂γ/∂params_j` for each parameter.
    pub fn tangents(&self, params: &[f64]) -> Result<Vec<Vec<f64>>> {
        let dim = self.dims.ambient();
        match self.kind {
            GammaKind::Circle { rho } => {
                let s = rho.sin();
                let (st, ct) = params[0].sin_cos();
                let mut v = vec![0.0; dim];
                v[0] = -s * st;
                v[1] = s * ct;
                Ok(vec![v])
            }
            GammaKind::Sphere => Ok(hyperspherical_tangents(params)
                .into_iter()
                .map(|y| {
                    let mut v = vec![0.0; dim];
                    v[..y.len()].copy_from_slice(&y);
                    v
                })
                .collect()),
            GammaKind::Custom => {
                Err(Error::Geometry("custom cross-section has no parametrization".into()))
            }
        }
    }

    /// Unit normal to `Γ` inside the sphere (the direction of growing
    /// spherical radius for a latitude circle, `e_{m+1}` for the equator).
    pub fn sphere_normal(&self, params: &[f64]) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.dims.ambient()];
        match self.kind {
            GammaKind::Circle { rho } => {
                let (s, c) = rho.sin_cos();
                let (st, ct) = params[0].sin_cos();
                v[0] = c * ct;
                v[1] = c * st;
                v[2] = -s;
            }
            GammaKind::Sphere => v[self.dims.m()] = 1.0,
            GammaKind::Custom => {
                return Err(Error::Geometry("custom cross-section has no parametrization".into()))
            }
        }
        Ok(v)
    }

    /// Parameter box: `(lower, upper)` per coordinate.
    pub fn param_domain(&self) -> Vec<(f64, f64)> {
        match self.kind {
            GammaKind::Circle { .. } => vec![(0.0, 2.0 * PI)],
            _ => {
                let d = self.param_dim();
                let mut dom = vec![(0.0, PI); d];
                dom[d - 1] = (0.0, 2.0 * PI);
                dom
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Hyperspherical coordinates of `S^{d}` from `d` angles.
fn hyperspherical(angles: &[f64]) -> Vec<f64> {
    let d = angles.len();
    let mut y = vec![0.0; d + 1];
    let mut prod = 1.0;
    for i in 0..d {
        let (s, c) = angles[i].sin_cos();
        y[i] = prod * c;
        prod *= s;
    }
    y[d] = prod;
    y
}

fn hyperspherical_tangents(angles: &[f64]) -> Vec<Vec<f64>> {
    (0..angles.len())
        .map(|j| {
            // differentiate factor j: sin -> cos in the products, cos -> -sin in slot j
            let d = angles.len();
            let mut y = vec![0.0; d + 1];
            let mut prod = 1.0;
            for i in 0..d {
                let (s, c) = angles[i].sin_cos();
                if i < j {
                    prod *= s;
                } else if i == j {
                    y[i] = -prod * s;
                    prod *= c;
                } else {
                    y[i] = prod * c;
                    prod *= s;
                }
            }
            y[d] = prod;
            y
        })
        .collect()
}

/// The cone `{τ z : z ∈ Γ, τ ∈ (0, 1)}` with vertex at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub gamma: BoundaryManifold,
}

impl Cone {
    pub fn new(gamma: BoundaryManifold) -> Self {
        Cone { gamma }
    }

    pub fn dims(&self) -> Dimensions {
        self.gamma.dims
    }

    /// `τ γ(params)` for `τ ∈ (0, 1)`.
    pub fn point(&self, tau: f64, params: &[f64]) -> Result<Vec<f64>> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::domain(format!("cone parameter τ = {tau} must lie in (0, 1)")));
        }
        Ok(self.gamma.point(params)?.into_iter().map(|c| c * tau).collect())
    }
}

/// `Mass(∂Ω_r) / Mass(Ω_r)` for `Ω_r = C ∩ B_r`, assembled from
/// `ω sinh^{m-1}(r)` and `ω ∫_0^r sinh^{m-1}` in log space.
pub fn cone_truncation_iso_ratio(cone: &Cone, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("truncation radius must be positive, got {r}")));
    }
    let dims = cone.dims();
    let ln_omega = cone.gamma.omega.ln();
    let ln_boundary = ln_omega + log_weight(dims, r);
    let rule = QuadratureRule::new(0.0, r)?
        .with_tolerances(1e-300, 1e-13)?
        .with_panels(8);
    let volume = integrate_log_weighted(
        |_| 1.0,
        |t| if t > 0.0 { log_weight(dims, t) } else { f64::NEG_INFINITY },
        &rule,
    )?;
    Ok((ln_boundary - (ln_omega + volume.ln())).exp())
}
