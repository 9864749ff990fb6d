//! Surfaces in the ball asymptotic to a cone: parametrized patches, their
//! induced metric and mass, the intrinsic Laplacian of radial functions,
//! and comparisons against the cone.
//!
//! A patch is written as `x(s, θ) = tanh(s/2) d(s, θ)` with `|d| = 1`, so the
//! hyperbolic distance from the origin is the parameter `s` itself. In these
//! coordinates the hyperbolic Gram matrix is
//! `G_ss = 1 + sinh^2 |∂_s d|^2`, `G_sj = sinh^2 ∂_s d·∂_j d`,
//! `G_ij = sinh^2 ∂_i d·∂_j d`; dividing the angular rows and columns by
//! `sinh` leaves a bounded matrix `Ĝ` with `sqrt(g) = sinh^{m-1} sqrt(det Ĝ)`.

mod checks;
mod laplace;

pub use checks::{
    divergence_ratio_check, divergence_ratio_report, rayleigh_on_graph, DivergenceReport,
    GraphRayleighReport,
};
pub use laplace::{
    frame_decomposition, intrinsic_laplacian, laplace_error_check, laplace_error_report,
    FrameDecomposition, LaplaceErrorReport, LaplaceErrorRow,
};

use std::cell::RefCell;
use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

use crate::cone::{Cone, GammaKind};
use crate::error::{Error, Result};
use crate::hyperbolic::{one_minus_t, Dimensions};
use crate::numerics::{integrate, QuadratureRule};
use crate::radial::log_sinh;

/// `ρ(θ) = Σ_j cos[j] cos(jθ) + Σ_j sin[j] sin((j+1)θ)` in the first angle.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPerturbation {
    /// Decay exponent: the offset angle is `(1-t)^{1+γ} ρ(θ)`.
    pub gamma: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPerturbation {
    pub fn new(gamma: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!("decay exponent γ = {gamma} must be positive")));
        }
        if cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(Error::domain("perturbation coefficients must be finite"));
        }
        Ok(TrigPerturbation { gamma, cos, sin })
    }

    /// `(ρ(θ), ρ'(θ))`.
    pub fn rho(&self, theta: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for (j, c) in self.cos.iter().enumerate() {
            let (s, co) = (j as f64 * theta).sin_cos();
            v += c * co;
            d -= c * j as f64 * s;
        }
        for (j, c) in self.sin.iter().enumerate() {
            let f = (j + 1) as f64;
            let (s, co) = (f * theta).sin_cos();
            v += c * s;
            d += c * f * co;
        }
        (v, d)
    }
}

/// How the surface leaves the cone.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    /// The cone itself.
    Zero,
    /// Offset angle `(1-t)^{1+γ} ρ(θ)` along the normal of `Γ` in the sphere.
    Trig(TrigPerturbation),
    /// The totally geodesic plane whose ideal boundary is the latitude
    /// circle `Γ`, a minimal graph over the cone outside a compact set.
    Cap,
}

/// A surface asymptotic to `cone`, given as a normal graph over it in the
/// sphere directions: `d = cos(a) γ + sin(a) ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCurrent {
    pub cone: Cone,
    pub perturbation: Perturbation,
}

/// Unit direction `d` with its derivatives in `s` and the angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub d: Vec<f64>,
    pub d_s: Vec<f64>,
    pub d_params: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl GraphCurrent {
    pub fn new(cone: Cone, perturbation: Perturbation) -> Result<Self> {
        match (&cone.gamma.kind, &perturbation) {
            (GammaKind::Custom, _) => {
                return Err(Error::Geometry("custom cross-sections have no parametrization".into()))
            }
            (GammaKind::Circle { rho }, Perturbation::Cap) if (rho - FRAC_PI_2).abs() < 1e-12 => {
                return Err(Error::domain("the cap over the great circle is the cone itself"))
            }
            (GammaKind::Sphere, Perturbation::Cap) => {
                return Err(Error::domain("the cap needs a latitude circle"))
            }
            _ => {}
        }
        Ok(GraphCurrent { cone, perturbation })
    }

    /// The unperturbed cone as a graph.
    pub fn cone_only(cone: Cone) -> Self {
        GraphCurrent {
            cone,
            perturbation: Perturbation::Zero,
        }
    }

    pub fn dims(&self) -> Dimensions {
        self.cone.dims()
    }

    /// Whether the surface is minimal, so that the refined error bound applies.
    pub fn is_stationary(&self) -> bool {
        !matches!(self.perturbation, Perturbation::Trig(_))
    }

    /// Smallest radius reached by the surface.
    pub fn radial_start(&self) -> f64 {
        match (&self.perturbation, &self.cone.gamma.kind) {
            (Perturbation::Cap, GammaKind::Circle { rho }) => rho.cos().abs().atanh(),
            _ => 0.0,
        }
    }

    /// Offset angle `a` with `∂_s a` and `∂_θ a`.
    pub fn offset(&self, s: f64, params: &[f64]) -> (f64, f64, Vec<f64>) {
        let zero = vec![0.0; params.len()];
        match (&self.perturbation, &self.cone.gamma.kind) {
            (Perturbation::Zero, _) => (0.0, 0.0, zero),
            (Perturbation::Trig(p), _) => {
                let gap = one_minus_t(s);
                let t = 1.0 - gap;
                let (rho, rho_d) = p.rho(params[0]);
                let env = gap.powf(1.0 + p.gamma);
                let a = env * rho;
                // d(1-t)/ds = -(1-t)(1+t)/2
                let a_s = -(1.0 + p.gamma) * 0.5 * (1.0 + t) * a;
                let mut grad = zero;
                grad[0] = env * rho_d;
                (a, a_s, grad)
            }
            (Perturbation::Cap, GammaKind::Circle { rho }) => {
                // cos Θ = cos ρ coth s; sin(Θ - ρ) in a cancellation-free form
                let (sn, c) = rho.sin_cos();
                let delta = 2.0 / (2.0 * s).exp_m1();
                let q = c * c * delta * (2.0 + delta);
                let sin_theta = (sn * sn - q).max(0.0).sqrt();
                let sin_a = -c * delta * (2.0 + delta) / (sin_theta + sn * (1.0 + delta));
                let a = sin_a.clamp(-1.0, 1.0).asin();
                let sh = s.sinh();
                let a_s = c / (sh * sh * sin_theta);
                (a, a_s, zero)
            }
            (Perturbation::Cap, _) => unreachable!("validated in GraphCurrent::new"),
        }
    }

    /// `∂_θ ν` for the sphere normal of `Γ`.
    fn normal_tangents(&self, params: &[f64]) -> Result<Vec<Vec<f64>>> {
        let gamma = &self.cone.gamma;
        match gamma.kind {
            GammaKind::Circle { rho } => {
                let cot = rho.cos() / rho.sin();
                Ok(gamma
                    .tangents(params)?
                    .into_iter()
                    .map(|v| v.into_iter().map(|x| x * cot).collect())
                    .collect())
            }
            _ => Ok(vec![vec![0.0; self.dims().ambient()]; params.len()]),
        }
    }

    pub fn frame(&self, s: f64, params: &[f64]) -> Result<Frame> {
        let gamma = &self.cone.gamma;
        if params.len() != gamma.param_dim() {
            return Err(Error::domain(format!(
                "expected {} angles, got {}",
                gamma.param_dim(),
                params.len()
            )));
        }
        let g = gamma.point(params)?;
        let gt = gamma.tangents(params)?;
        let (a, a_s, a_p) = self.offset(s, params);
        if a == 0.0 && a_s == 0.0 && a_p.iter().all(|x| *x == 0.0) {
            let dim = g.len();
            return Ok(Frame {
                d: g,
                d_s: vec![0.0; dim],
                d_params: gt,
            });
        }
        let nu = gamma.sphere_normal(params)?;
        let nut = self.normal_tangents(params)?;
        let (sa, ca) = a.sin_cos();
        let d: Vec<f64> = g.iter().zip(&nu).map(|(x, y)| ca * x + sa * y).collect();
        // derivative of d in the offset angle
        let turn: Vec<f64> = g.iter().zip(&nu).map(|(x, y)| -sa * x + ca * y).collect();
        let d_s = turn.iter().map(|v| a_s * v).collect();
        let d_params = (0..params.len())
            .map(|j| {
                (0..d.len())
                    .map(|i| ca * gt[j][i] + sa * nut[j][i] + a_p[j] * turn[i])
                    .collect()
            })
            .collect();
        Ok(Frame { d, d_s, d_params })
    }

    /// The point `tanh(s/2) d(s, θ)` of the ball.
    pub fn position(&self, s: f64, params: &[f64]) -> Result<Vec<f64>> {
        let tau = 1.0 - one_minus_t(s);
        Ok(self.frame(s, params)?.d.into_iter().map(|c| tau * c).collect())
    }
}

/// A rectangle `[s0, s1] × Π [θ_lo, θ_hi]` of a graph current.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatch {
    pub graph: GraphCurrent,
    pub s_range: (f64, f64),
    pub param_ranges: Vec<(f64, f64)>,
}

/// The cone over `s_range` (hyperbolic radii) and the given angle box.
pub fn patch_from_cone(
    cone: &Cone,
    s_range: (f64, f64),
    param_ranges: Option<Vec<(f64, f64)>>,
) -> Result<SurfacePatch> {
    patch_from_graph(&GraphCurrent::cone_only(cone.clone()), s_range, param_ranges)
}

/// A graph patch; `None` for the angles takes the full parameter domain.
pub fn patch_from_graph(
    gc: &GraphCurrent,
    s_range: (f64, f64),
    param_ranges: Option<Vec<(f64, f64)>>,
) -> Result<SurfacePatch> {
    let (s0, s1) = s_range;
    if !(s0 >= gc.radial_start() && s0 < s1 && s1.is_finite()) {
        return Err(Error::domain(format!(
            "radial range [{s0}, {s1}] must be increasing and start at or after {}",
            gc.radial_start()
        )));
    }
    let domain = gc.cone.gamma.param_domain();
    let param_ranges = param_ranges.unwrap_or_else(|| domain.clone());
    if param_ranges.len() != domain.len()
        || param_ranges
            .iter()
            .zip(&domain)
            .any(|(r, d)| !(r.0 < r.1 && r.0 >= d.0 && r.1 <= d.1))
    {
        return Err(Error::domain("angle ranges must be increasing and inside the parameter domain"));
    }
    let patch = SurfacePatch {
        graph: gc.clone(),
        s_range,
        param_ranges,
    };
    // sample the patch and confirm it stays inside the open ball
    let samples = 9;
    for i in 0..samples {
        let s = s0 + (s1 - s0) * i as f64 / (samples - 1) as f64;
        for params in patch.angle_grid(samples) {
            let x = gc.position(s, &params)?;
            if !(dot(&x, &x) < 1.0) {
                return Err(Error::Geometry(format!("patch point at s = {s} leaves the ball")));
            }
        }
    }
    Ok(patch)
}

impl SurfacePatch {
    pub fn dims(&self) -> Dimensions {
        self.graph.dims()
    }

    /// `count` cell midpoints per angle, as a
    /// tensor grid.
    pub fn angle_grid(&self, count: usize) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for &(lo, hi) in &self.param_ranges {
            let mut next = Vec::with_capacity(out.len() * count);
            for prefix in &out {
                for i in 0..count {
                    let mut p = prefix.clone();
                    p.push(lo + (hi - lo) * (i as f64 + 0.5) / count as f64);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    /// The bounded Gram matrix `Ĝ` described in the module notes.
    pub fn scaled_gram(&self, s: f64, params: &[f64]) -> Result<DMatrix<f64>> {
        let f = self.graph.frame(s, params)?;
        let sh = s.sinh();
        let m = params.len() + 1;
        let mut g = DMatrix::zeros(m, m);
        g[(0, 0)] = 1.0 + sh * sh * dot(&f.d_s, &f.d_s);
        for i in 0..params.len() {
            let v = sh * dot(&f.d_s, &f.d_params[i]);
            g[(0, i + 1)] = v;
            g[(i + 1, 0)] = v;
            for j in 0..params.len() {
                g[(i + 1, j + 1)] = dot(&f.d_params[i], &f.d_params[j]);
            }
        }
        Ok(g)
    }

    /// Gram matrix of the coordinate vectors `∂x/∂s`, `∂x/∂θ_j` under the
    /// conformal metric `4|dx|^2/(1-|x|^2)^2`, built from the ball point.
    pub fn gram(&self, s: f64, params: &[f64]) -> Result<DMatrix<f64>> {
        let f = self.graph.frame(s, params)?;
        let gap = one_minus_t(s);
        let tau = 1.0 - gap;
        let one_minus_sq = gap * (1.0 + tau);
        let lambda = 2.0 / one_minus_sq;
        let tau_s = 0.5 * one_minus_sq;
        let mut vectors: Vec<Vec<f64>> = vec![f
            .d
            .iter()
            .zip(&f.d_s)
            .map(|(d, ds)| tau_s * d + tau * ds)
            .collect()];
        for dp in &f.d_params {
            vectors.push(dp.iter().map(|v| tau * v).collect());
        }
        let m = vectors.len();
        Ok(DMatrix::from_fn(m, m, |i, j| lambda * lambda * dot(&vectors[i], &vectors[j])))
    }

    /// `det Ĝ` and `Ĝ^{-1}`; fails unless `Ĝ` is positive definite.
    pub fn metric(&self, s: f64, params: &[f64]) -> Result<(f64, DMatrix<f64>)> {
        let g = self.scaled_gram(s, params)?;
        let chol = g.clone().cholesky().ok_or_else(|| {
            Error::Geometry(format!("Gram matrix not positive definite at s = {s}, θ = {params:?}"))
        })?;
        let det = chol.l().diagonal().iter().map(|x| x * x).product::<f64>();
        if !(det > 0.0 && det.is_finite()) {
            return Err(Error::Geometry(format!("degenerate Gram matrix at s = {s}")));
        }
        Ok((det, chol.inverse()))
    }

    /// `ln sqrt(g) = (m-1) ln sinh s + ln sqrt(det Ĝ)`.
    pub fn ln_area_element(&self, s: f64, params: &[f64]) -> Result<f64> {
        let (det, _) = self.metric(s, params)?;
        Ok(self.dims().k() * log_sinh(s) + 0.5 * det.ln())
    }

    pub fn area_element(&self, s: f64, params: &[f64]) -> Result<f64> {
        Ok(self.ln_area_element(s, params)?.exp())
    }

    /// `|∇^Σ r|^2 = g^{ss}`, at most 1.
    pub fn radial_gradient_sq(&self, s: f64, params: &[f64]) -> Result<f64> {
        Ok(self.metric(s, params)?.1[(0, 0)])
    }

    /// `∫ integrand(s, θ) ds dθ` over the patch (radial range overridable).
    pub fn integrate(
        &self,
        s_range: (f64, f64),
        integrand: &dyn Fn(f64, &[f64]) -> Result<f64>,
    ) -> Result<f64> {
        let failure = RefCell::new(None);
        let record = |r: Result<f64>| match r {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        let outer = integrate(
            |s| record(self.integrate_angles(s, 0, &[], integrand)),
            &patch_rule(s_range.0, s_range.1)?,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        outer
    }

    fn integrate_angles(
        &self,
        s: f64,
        level: usize,
        prefix: &[f64],
        integrand: &dyn Fn(f64, &[f64]) -> Result<f64>,
    ) -> Result<f64> {
        if level == self.param_ranges.len() {
            return integrand(s, prefix);
        }
        let (lo, hi) = self.param_ranges[level];
        let failure = RefCell::new(None);
        let rule = patch_rule(lo, hi)?;
        let value = integrate(
            |th| {
                let mut p = prefix.to_vec();
                p.push(th);
                match self.integrate_angles(s, level + 1, &p, integrand) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            },
            &rule,
        )?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

fn patch_rule(a: f64, b: f64) -> Result<QuadratureRule> {
    Ok(QuadratureRule::new(a, b)?
        .with_tolerances(1e-300, 1e-11)?
        .with_panels(4))
}

/// `∫ f(r) d‖patch‖` by tensor-product quadrature of `f(s) sqrt(g)`.
pub fn mass_integral(patch: &SurfacePatch, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    patch.integrate(patch.s_range, &|s, p| {
        let v = f(s);
        if v == 0.0 {
            return Ok(0.0);
        }
        Ok(v * patch.area_element(s, p)?)
    })
}

/// `∫ f d‖T‖ / ∫ f d‖C‖` for `f` supported in `support`, over the full
/// angle domain.
pub fn sandwich_ratio(gc: &GraphCurrent, f: &dyn Fn(f64) -> f64, support: (f64, f64)) -> Result<f64> {
    let graph = patch_from_graph(gc, support, None)?;
    let cone = patch_from_cone(&gc.cone, support, None)?;
    let denominator = mass_integral(&cone, f)?;
    if denominator == 0.0 {
        return Err(Error::DivisionByZero("cone integral vanishes".into()));
    }
    Ok(mass_integral(&graph, f)? / denominator)
}

/// `sin^2(π(r - r0)/width)` on `[r0, r0 + width]`, a smooth bump.
pub fn annulus_bump(r0: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |r| {
        if r < r0 || r > r0 + width {
            0.0
        } else {
            (std::f64::consts::PI * (r - r0) / width).sin().powi(2)
        }
    }
}

/// One point of a sandwich sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichRow {
    pub r: f64,
    pub ratio: f64,
    /// `|ratio - 1|`.
    pub deviation: f64,
}

/// Sandwich ratios for bumps on `[R, R + width]`.
pub fn sandwich_sweep(gc: &GraphCurrent, radii: &[f64], width: f64) -> Result<Vec<SandwichRow>> {
    radii
        .iter()
        .map(|&r| {
            let ratio = sandwich_ratio(gc, &annulus_bump(r, width), (r, r + width))?;
            Ok(SandwichRow {
                r,
                ratio,
                deviation: (ratio - 1.0).abs(),
            })
        })
        .collect()
}

/// Smallest sampled `R` whose deviation is at most `epsilon`.
pub fn sandwich_threshold(rows: &[SandwichRow], epsilon: f64) -> Option<f64> {
    rows.iter().find(|row| row.deviation <= epsilon).map(|row| row.r)
}
