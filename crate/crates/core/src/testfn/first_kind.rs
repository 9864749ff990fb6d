use std::f64::consts::PI;

use num_complex::Complex64;

use super::{rayleigh_radial, support_rule, RadialTestFunction, RayleighContext, WeightedJet};
use crate::error::{Error, Result};
use crate::hyperbolic::Dimensions;
use crate::numerics::integrate;

/// `u_R(t) = e^{-(m-1)t/2} sin((2π/R)(t - R/2))` on `[R/2, R]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstKindFamily {
    pub dims: Dimensions,
    pub r: f64,
}

pub fn make_first_kind(dims: Dimensions, r: f64) -> Result<FirstKindFamily> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("R must be positive, got {r}")));
    }
    Ok(FirstKindFamily { dims, r })
}

/// `A_R = (m-1)^2/4 + 4π^2/R^2` and `B_R = coth(R/2) - 1`.
pub fn ab_constants(dims: Dimensions, r: f64) -> (f64, f64) {
    let k = dims.k();
    let a = k * k / 4.0 + 4.0 * PI * PI / (r * r);
    // coth(R/2) - 1 = 2 / (e^R - 1)
    let b = 2.0 / r.exp_m1();
    (a, b)
}

impl FirstKindFamily {
    fn decay(&self) -> f64 {
        0.5 * self.dims.k()
    }

    fn frequency(&self) -> f64 {
        2.0 * PI / self.r
    }

    fn inside(&self, t: f64) -> bool {
        t >= 0.5 * self.r && t <= self.r
    }

    fn phase(&self, t: f64) -> (f64, f64) {
        (self.frequency() * (t - 0.5 * self.r)).sin_cos()
    }

    pub fn u(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        (-self.decay() * t).exp() * self.phase(t).0
    }

    pub fn u_prime(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        let (s, c) = self.phase(t);
        (-self.decay() * t).exp() * (-self.decay() * s + self.frequency() * c)
    }

    pub fn u_second(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        let (s, c) = self.phase(t);
        let (a, k) = (self.decay(), self.frequency());
        (-a * t).exp() * ((a * a - k * k) * s - 2.0 * a * k * c)
    }

    /// `u'' + (m-1) u' + A_R u`, which vanishes on the support.
    pub fn ode_residual(&self, t: f64) -> f64 {
        let (a_r, _) = ab_constants(self.dims, self.r);
        self.u_second(t) + self.dims.k() * self.u_prime(t) + a_r * self.u(t)
    }
}

impl RadialTestFunction for FirstKindFamily {
    fn dims(&self) -> Dimensions {
        self.dims
    }

    fn support(&self) -> (f64, f64) {
        (0.5 * self.r, self.r)
    }

    fn weighted_jet(&self, t: f64) -> WeightedJet {
        if !self.inside(t) {
            return WeightedJet::ZERO;
        }
        let (a, k) = (self.decay(), self.frequency());
        // sqrt(sinh^{m-1}(t)) e^{-at} = ((1 - e^{-2t}) / 2)^a
        let envelope = (a * (-(-2.0 * t).exp_m1() / 2.0).ln()).exp();
        let (s, c) = self.phase(t);
        WeightedJet {
            value: Complex64::new(envelope * s, 0.0),
            first: Complex64::new(envelope * (-a * s + k * c), 0.0),
            second: Complex64::new(envelope * ((a * a - k * k) * s - 2.0 * a * k * c), 0.0),
        }
    }
}

/// Both sides of `sqrt(R(φ_R)) <= B_R/2 + sqrt(A_R + B_R^2/4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RinReport {
    pub m: usize,
    pub r: f64,
    pub a_r: f64,
    pub b_r: f64,
    /// Quotient from the two weighted integrals.
    pub quotient: f64,
    /// `R(φ_R) - A_R` from the integration-by-parts identity.
    pub excess: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`, evaluated without cancellation.
    pub slack: f64,
    /// `|quotient - (A_R + excess)|`, the disagreement of the two routes.
    pub route_gap: f64,
    pub holds: bool,
}

/// Relative tolerance for agreement of the direct and identity routes.
pub const RIN_ROUTE_TOL: f64 = 1e-9;

/// Evaluate the inequality for `u_R`.
///
/// The slack is of size `B_R/2 ~ e^{-R}`, far below the rounding of the
/// quotient itself once `R > 30`. Using `(w u')' = w(u'' + (m-1)coth u')`
/// and the ODE for `u_R`, integration by parts gives
/// `R(φ_R) = A_R + (m-1)/2 ∫ u^2 w (coth-1)((m-2)coth-1) / ∫ u^2 w`,
/// whose correction term is computed to full relative accuracy.
pub fn rin_report(dims: Dimensions, r: f64) -> Result<RinReport> {
    let family = make_first_kind(dims, r)?;
    let (a_r, b_r) = ab_constants(dims, r);
    let direct = rayleigh_radial(&family, family.support(), RayleighContext::Cone, 1.0)?;

    let k = dims.k();
    let (lo, hi) = family.support();
    let rule = support_rule(lo, hi)?;
    let correction = integrate(
        |t| {
            let v = family.weighted_jet(t).value.re;
            let c1 = 2.0 / (2.0 * t).exp_m1();
            // (m-2) coth - 1 = (m-3) + (m-2)(coth - 1), kept exact near coth = 1
            v * v * c1 * ((k - 2.0) + (k - 1.0) * c1)
        },
        &rule,
    )?;
    let excess = 0.5 * k * correction / direct.denominator;

    let inner = (a_r + b_r * b_r / 4.0).sqrt();
    let lhs = (a_r + excess).sqrt();
    let slack = b_r / 2.0 + (b_r * b_r / 4.0 - excess) / (inner + lhs);
    let route_gap = (direct.quotient - (a_r + excess)).abs();
    Ok(RinReport {
        m: dims.m(),
        r,
        a_r,
        b_r,
        quotient: direct.quotient,
        excess,
        lhs,
        rhs: b_r / 2.0 + inner,
        slack,
        route_gap,
        holds: slack >= 0.0 && route_gap <= RIN_ROUTE_TOL * a_r,
    })
}

/// [`rin_report`], failing with `InvariantViolation` when the inequality
/// does not hold or the two routes disagree.
pub fn rin_check(dims: Dimensions, r: f64) -> Result<RinReport> {
    let rep = rin_report(dims, r)?;
    if rep.route_gap > RIN_ROUTE_TOL * rep.a_r {
        return Err(Error::violation(
            "rayleigh-routes",
            format!(
                "m={} R={}: direct quotient {} vs identity {}",
                rep.m,
                r,
                rep.quotient,
                rep.a_r + rep.excess
            ),
        ));
    }
    if rep.slack < 0.0 {
        return Err(Error::violation(
            "rin",
            format!("m={} R={}: slack {:e}", rep.m, r, rep.slack),
        ));
    }
    Ok(rep)
}
