//! Laplace–Beltrami of radial functions on a patch, the tangential frame
//! of the radial field, and the error term against the cone formula.

use std::cell::RefCell;

use super::{dot, patch_from_cone, SurfacePatch};
use crate::error::{Error, Result};
use crate::numerics::{fd_derivative, DerivativeOrder, DerivativeStencil};
use crate::radial::{coth, log_sinh};

/// A radial function `r ↦ (f, f', f'')`.
pub type RadialJet<'a> = &'a dyn Fn(f64) -> (f64, f64, f64);

/// `Δ(f∘r)` at `(s, θ)` in divergence form,
/// `(1/sqrt(g)) Σ_i ∂_i(sqrt(g) g^{is} f'(s))`, with every `∂_i` a
/// Richardson-extrapolated central difference. Only `f'` is used.
pub fn intrinsic_laplacian(patch: &SurfacePatch, u: RadialJet, s: f64, params: &[f64]) -> Result<f64> {
    let stencil = DerivativeStencil::default();
    let reach = stencil.reach(s);
    if s - reach <= patch.graph.radial_start().max(0.0) {
        return Err(Error::domain(format!("no stencil room at s = {s}")));
    }
    let k = patch.dims().k();
    let ls0 = log_sinh(s);
    let (det0, _) = patch.metric(s, params)?;
    let failure = RefCell::new(None);
    let record = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    // sqrt(g) g^{ss} f' divided by sinh^{m-1}(s0)
    let flux_s = |x: f64| {
        record(patch.metric(x, params).map(|(det, inv)| {
            (k * (log_sinh(x) - ls0)).exp() * det.sqrt() * inv[(0, 0)] * u(x).1
        }))
    };
    let mut div = fd_derivative(flux_s, s, DerivativeOrder::First, &stencil);
    let fp = u(s).1;
    let sh = s.sinh();
    for j in 0..params.len() {
        // g^{sθ} = Ĝ^{sθ} / sinh
        let flux = |x: f64| {
            let mut p = params.to_vec();
            p[j] = x;
            record(patch.metric(s, &p).map(|(det, inv)| det.sqrt() * inv[(0, j + 1)] * fp / sh))
        };
        div += fd_derivative(flux, params[j], DerivativeOrder::First, &stencil);
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(div / det0.sqrt())
}

/// `X̃_r = φ X_r + Y_r`: the tangential part of the radial field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDecomposition {
    pub varphi: f64,
    pub y_norm_sq: f64,
}

/// `φ` and `|Y_r|^2` from the part of `sinh ∂_s d` normal to the angular
/// tangents: `|Y|^2 = q / (1 + q)`, `φ = 1/sqrt(1 + q)`, `q = sinh^2 |∂_s d^⊥|^2`.
pub fn frame_decomposition(patch: &SurfacePatch, s: f64, params: &[f64]) -> Result<FrameDecomposition> {
    let f = patch.graph.frame(s, params)?;
    let d = params.len();
    // project ∂_s d onto span{∂_θ d} by the normal equations
    let gram = nalgebra::DMatrix::from_fn(d, d, |i, j| dot(&f.d_params[i], &f.d_params[j]));
    let rhs = nalgebra::DVector::from_fn(d, |i, _| dot(&f.d_params[i], &f.d_s));
    let coef = gram
        .cholesky()
        .ok_or_else(|| Error::Geometry(format!("angular tangents degenerate at s = {s}")))?
        .solve(&rhs);
    let perp: Vec<f64> = (0..f.d_s.len())
        .map(|i| f.d_s[i] - (0..d).map(|j| coef[j] * f.d_params[j][i]).sum::<f64>())
        .collect();
    let sh = s.sinh();
    let q = sh * sh * dot(&perp, &perp);
    let varphi = 1.0 / (1.0 + q).sqrt();
    if !(varphi > 0.0) {
        return Err(Error::Geometry(format!("radial field normal to the surface at s = {s}")));
    }
    Ok(FrameDecomposition {
        varphi,
        y_norm_sq: q / (1.0 + q),
    })
}

/// Worst sample at one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceErrorRow {
    pub r: f64,
    /// `E` at the angle maximizing `|E| / (|f''| + |f'|)`.
    pub e: f64,
    /// `max |E| / (|f''| + |f'|)` over the sampled angles.
    pub ratio: f64,
    /// `(1-φ^2)|f''| + c coth(r)(1-φ^2)|f'|` at that angle.
    pub predicted: f64,
    /// FD tolerance at that angle.
    pub tolerance: f64,
    pub varphi: f64,
    pub y_norm_sq: f64,
    /// Whether `|E| <= predicted + tolerance` at every sampled angle.
    pub refined_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceErrorReport {
    pub rows: Vec<LaplaceErrorRow>,
    /// Coefficient `c = max(n - m, 1)` of the `f'` term in the prediction.
    pub coefficient: f64,
    /// Whether the refined bound is asserted (minimal surfaces only).
    pub asserted: bool,
    pub decreasing: bool,
}

impl LaplaceErrorReport {
    pub fn refined_holds(&self) -> bool {
        self.rows.iter().all(|r| r.refined_holds)
    }
}

/// `E = Δ(f∘r) - f'' - (m-1)coth(r)f'` on the patch at each radius in
/// `radii` and `angles` evenly spaced angles per coordinate.
///
/// The FD tolerance at a point is `10 (e_cone + ε_mach / h)(|f''| + |f'|)`
/// where `e_cone` is the relative error of the same stencil on the cone
/// itself, where `E` vanishes identically.
pub fn laplace_error_report(
    patch: &SurfacePatch,
    u: RadialJet,
    radii: &[f64],
    angles: usize,
) -> Result<LaplaceErrorReport> {
    let dims = patch.dims();
    let k = dims.k();
    let coefficient = (dims.n() as f64 - dims.m() as f64).max(1.0);
    let cone = patch_from_cone(&patch.graph.cone, patch.s_range, Some(patch.param_ranges.clone()))?;
    let base_step = DerivativeStencil::default().base_step;
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(radii.len());
    for &r in &radii {
        let (_, f1, f2) = u(r);
        let scale = f2.abs() + f1.abs();
        if !(scale > 0.0) {
            return Err(Error::DivisionByZero(format!("f' and f'' both vanish at r = {r}")));
        }
        let model = f2 + k * coth(r) * f1;
        let mut worst: Option<LaplaceErrorRow> = None;
        let mut all_hold = true;
        for params in patch.angle_grid(angles) {
            let e = intrinsic_laplacian(patch, u, r, &params)? - model;
            let bench = (intrinsic_laplacian(&cone, u, r, &params)? - model).abs() / scale;
            let tolerance = 10.0 * (bench + f64::EPSILON / base_step) * scale;
            let frame = frame_decomposition(patch, r, &params)?;
            let y = frame.y_norm_sq;
            let predicted = y * f2.abs() + coefficient * coth(r) * y * f1.abs();
            let holds = e.abs() <= predicted + tolerance;
            all_hold &= holds;
            let ratio = e.abs() / scale;
            if worst.as_ref().is_none_or(|w| ratio > w.ratio) {
                worst = Some(LaplaceErrorRow {
                    r,
                    e,
                    ratio,
                    predicted,
                    tolerance,
                    varphi: frame.varphi,
                    y_norm_sq: y,
                    refined_holds: true,
                });
            }
        }
        let mut row = worst.ok_or_else(|| Error::domain("no angles sampled"))?;
        row.refined_holds = all_hold;
        rows.push(row);
    }
    let decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    Ok(LaplaceErrorReport {
        rows,
        coefficient,
        asserted: patch.graph.is_stationary(),
        decreasing,
    })
}

/// [`laplace_error_report`], failing if the refined bound is violated on a
/// minimal surface.
pub fn laplace_error_check(
    patch: &SurfacePatch,
    u: RadialJet,
    radii: &[f64],
    angles: usize,
) -> Result<LaplaceErrorReport> {
    let rep = laplace_error_report(patch, u, radii, angles)?;
    if rep.asserted {
        if let Some(row) = rep.rows.iter().find(|r| !r.refined_holds) {
            return Err(Error::violation(
                "laplace-error",
                format!(
                    "r={}: |E| = {:e} exceeds {:e} + {:e}",
                    row.r,
                    row.e.abs(),
                    row.predicted,
                    row.tolerance
                ),
            ));
        }
    }
    Ok(rep)
}
