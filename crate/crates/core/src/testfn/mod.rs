//! Radial test functions, their weighted Rayleigh quotients, and the
//! quasimode residual estimates.
//!
//! Every integral here is of the form `∫ |g(t)|^2 sinh^{m-1}(t) dt`. The
//! evaluators hand out `sqrt(sinh^{m-1}(t)) * g(t)` directly, which stays
//! bounded for the families used here even where the weight itself would
//! overflow.

mod first_kind;
mod quasimode;

pub use first_kind::{ab_constants, make_first_kind, rin_check, rin_report, FirstKindFamily, RinReport};
pub use quasimode::{
    alpha, build_quasimode_sequence, derivative_norm_ratios, epsilon_r, make_quasimode,
    quasimode_residual, residual_report, sine_power_check, sweep_c_star, BoundConstants, Quasimode,
    ResidualReport, IDENTITY_TOL,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hyperbolic::Dimensions;
use crate::numerics::{integrate, QuadratureRule};
use crate::radial::log_sinh;

/// Values `(g, g', g'')` of a radial function, each multiplied by
/// `sqrt(sinh^{m-1}(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedJet {
    pub value: Complex64,
    pub first: Complex64,
    pub second: Complex64,
}

impl WeightedJet {
    pub const ZERO: WeightedJet = WeightedJet {
        value: Complex64::new(0.0, 0.0),
        first: Complex64::new(0.0, 0.0),
        second: Complex64::new(0.0, 0.0),
    };

    pub fn scale(self, c: f64) -> WeightedJet {
        WeightedJet {
            value: self.value * c,
            first: self.first * c,
            second: self.second * c,
        }
    }
}

/// A compactly supported radial function on a cone or ball.
pub trait RadialTestFunction: Sync {
    fn dims(&self) -> Dimensions;

    /// Closed support `[a, b]`; the function vanishes outside it.
    fn support(&self) -> (f64, f64);

    /// Jet multiplied by the square root of the weight; zero off the support.
    fn weighted_jet(&self, t: f64) -> WeightedJet;

    /// Plain jet `(g, g', g'')`; may overflow or underflow at large `t`.
    fn jet(&self, t: f64) -> WeightedJet {
        let half = 0.5 * self.dims().k() * log_sinh(t);
        self.weighted_jet(t).scale((-half).exp())
    }
}

/// Where a Rayleigh quotient was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayleighContext {
    Interval,
    Cone,
    Graph,
}

impl RayleighContext {
    pub fn as_str(&self) -> &'static str {
        match self {
            RayleighContext::Interval => "interval",
            RayleighContext::Cone => "cone",
            RayleighContext::Graph => "graph",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighReport {
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
    pub context: RayleighContext,
}

impl RayleighReport {
    pub fn new(numerator: f64, denominator: f64, context: RayleighContext) -> Result<Self> {
        if !(denominator > 0.0) {
            return Err(Error::DivisionByZero(format!(
                "Rayleigh quotient with L2 mass {denominator}"
            )));
        }
        Ok(RayleighReport {
            numerator,
            denominator,
            quotient: numerator / denominator,
            context,
        })
    }
}

/// Quadrature settings for oscillatory integrands over a support interval.
pub(crate) fn support_rule(a: f64, b: f64) -> Result<QuadratureRule> {
    Ok(QuadratureRule::new(a, b)?
        .with_tolerances(1e-300, 1e-12)?
        .with_panels(16))
}

/// `∫ |selector(jet)|^2 dt` over `[a, b]`, with the weight already folded in.
pub(crate) fn weighted_norm_sq(
    f: &(impl RadialTestFunction + ?Sized),
    interval: (f64, f64),
    selector: impl Fn(&WeightedJet) -> Complex64,
) -> Result<f64> {
    let rule = support_rule(interval.0, interval.1)?;
    integrate(|t| selector(&f.weighted_jet(t)).norm_sqr(), &rule)
}

/// `∫ |g'|^2 w / ∫ |g|^2 w` over `interval`, optionally scaled by the
/// cross-section volume `omega` in both integrals (cone context).
pub fn rayleigh_radial(
    f: &(impl RadialTestFunction + ?Sized),
    interval: (f64, f64),
    context: RayleighContext,
    omega: f64,
) -> Result<RayleighReport> {
    let (a, b) = interval;
    let (sa, sb) = f.support();
    if !(a < b) || sa < a || sb > b {
        return Err(Error::domain(format!(
            "support [{sa}, {sb}] is not inside the interval [{a}, {b}]"
        )));
    }
    if !(omega > 0.0) {
        return Err(Error::domain(format!("cross-section volume must be positive, got {omega}")));
    }
    // integrate over the support only; the function vanishes elsewhere
    let support = (sa.max(a), sb.min(b));
    let numerator = omega * weighted_norm_sq(f, support, |j| j.first)?;
    let denominator = omega * weighted_norm_sq(f, support, |j| j.value)?;
    RayleighReport::new(numerator, denominator, context)
}

/// The constant function 1 on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFunction {
    pub dims: Dimensions,
    pub interval: (f64, f64),
}

impl RadialTestFunction for ConstantFunction {
    fn dims(&self) -> Dimensions {
        self.dims
    }

    fn support(&self) -> (f64, f64) {
        self.interval
    }

    fn weighted_jet(&self, t: f64) -> WeightedJet {
        let (a, b) = self.interval;
        if t < a || t > b || t <= 0.0 {
            return WeightedJet::ZERO;
        }
        let root_w = (0.5 * self.dims.k() * log_sinh(t)).exp();
        WeightedJet {
            value: Complex64::new(root_w, 0.0),
            ..WeightedJet::ZERO
        }
    }
}

/// A test function multiplied by a constant.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<'a, F: ?Sized> {
    pub inner: &'a F,
    pub factor: f64,
}

impl<F: RadialTestFunction + ?Sized> RadialTestFunction for Scaled<'_, F> {
    fn dims(&self) -> Dimensions {
        self.inner.dims()
    }

    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    fn weighted_jet(&self, t: f64) -> WeightedJet {
        self.inner.weighted_jet(t).scale(self.factor)
    }
}
