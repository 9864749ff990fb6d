//! Radial weight `sinh^{m-1}`, the ball isoperimetric profile and the
//! comparison profile built from it.

use crate::error::{Error, Result};
use crate::hyperbolic::Dimensions;
use crate::numerics::{
    fd_derivative, integrate, DerivativeOrder, DerivativeStencil, QuadratureRule,
};

/// `ln sinh(t)` for `t > 0`, without overflow for large `t`.
pub fn log_sinh(t: f64) -> f64 {
    if t > 1.0 {
        t + (-(-2.0 * t).exp()).ln_1p() - std::f64::consts::LN_2
    } else {
        t.sinh().ln()
    }
}

/// `coth(t)`, via `1 + 2 / expm1(2t)` so that it stays accurate near 1.
pub fn coth(t: f64) -> f64 {
    1.0 + 2.0 / (2.0 * t).exp_m1()
}

/// `ln sinh^{m-1}(t)`.
pub fn log_weight(dims: Dimensions, t: f64) -> f64 {
    dims.k() * log_sinh(t)
}

/// `sinh^{m-1}(t)`; zero at the origin.
pub fn weight(dims: Dimensions, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    log_weight(dims, t).exp()
}

/// Below this radius `1/h_t` is replaced by its leading term `t/m`.
const SMALL_RADIUS: f64 = 1e-8;

/// `∫_0^r sinh^{m-1}(t) dt / sinh^{m-1}(r)`, integrated with the weight
/// normalized at `r` so that nothing overflows.
fn normalized_volume(dims: Dimensions, r: f64) -> Result<f64> {
    let k = dims.k();
    let top = log_sinh(r);
    // the integrand is e^{-k(r-t)} far from the origin; split off the tail
    let head = (r - 40.0 / k).max(0.0);
    let tail_rule = QuadratureRule::new(head, r)?
        .with_tolerances(1e-16 * r, 1e-14)?
        .with_panels(4);
    let integrand = |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            (k * (log_sinh(t) - top)).exp()
        }
    };
    let mut total = integrate(integrand, &tail_rule)?;
    if head > 0.0 {
        // contributes below e^{-40} relative to the tail
        let head_rule = QuadratureRule::new(0.0, head)?.with_tolerances(1e-300, 1e-6)?;
        total += integrate(integrand, &head_rule)?;
    }
    Ok(total)
}

/// `h(B_r^m) = sinh^{m-1}(r) / ∫_0^r sinh^{m-1}(t) dt`.
pub fn iso_constant(dims: Dimensions, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("iso_constant needs r > 0, got {r}")));
    }
    Ok(1.0 / normalized_volume(dims, r)?)
}

/// `(m-1) coth(r)`.
pub fn iso_lower_bound(dims: Dimensions, r: f64) -> f64 {
    dims.k() * coth(r)
}

/// `(m-1)^2 / 4`.
pub fn mckean_bound(dims: Dimensions) -> f64 {
    let k = dims.k();
    k * k / 4.0
}

/// `h(B_r^m)^2 / 4`.
pub fn cheeger_lower(dims: Dimensions, r: f64) -> Result<f64> {
    let h = iso_constant(dims, r)?;
    Ok(h * h / 4.0)
}

/// Radii `0.1 * 2^k` below 50, followed by 50.
pub fn geometric_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..)
        .map(|k| 0.1 * 2f64.powi(k))
        .take_while(|&r| r < 50.0)
        .collect();
    grid.push(50.0);
    grid
}

/// The isoperimetric profile `t ↦ h_t` of geodesic balls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoProfile {
    pub dims: Dimensions,
}

impl IsoProfile {
    pub fn new(dims: Dimensions) -> Self {
        IsoProfile { dims }
    }

    pub fn h(&self, t: f64) -> Result<f64> {
        iso_constant(self.dims, t)
    }

    /// `h_t - (m-1) coth(t)`; positive for every `t > 0`.
    pub fn excess(&self, t: f64) -> Result<f64> {
        Ok(self.h(t)? - iso_lower_bound(self.dims, t))
    }
}

/// `f(r) = ∫_0^r dt / h_t`, the solution of `f'' + (m-1) coth(r) f' = 1` with
/// `f(0) = f'(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonProfile {
    pub dims: Dimensions,
}

pub fn comparison_profile(dims: Dimensions) -> ComparisonProfile {
    ComparisonProfile { dims }
}

impl ComparisonProfile {
    /// `f'(r) = 1 / h_r`.
    pub fn f_prime(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::domain(format!("profile needs r >= 0, got {r}")));
        }
        if r < SMALL_RADIUS {
            return Ok(r / self.dims.m() as f64);
        }
        normalized_volume(self.dims, r)
    }

    /// `f''(r) = 1 - (m-1) coth(r) f'(r)`, from the defining equation.
    pub fn f_second(&self, r: f64) -> Result<f64> {
        if r < SMALL_RADIUS {
            return Ok(1.0 / self.dims.m() as f64);
        }
        Ok(1.0 - self.dims.k() * coth(r) * self.f_prime(r)?)
    }

    pub fn f(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::domain(format!("profile needs r >= 0, got {r}")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let rule = QuadratureRule::new(0.0, r)?.with_tolerances(1e-15 * r, 1e-13)?;
        let mut failure = None;
        let value = integrate(
            |t| match self.f_prime(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            &rule,
        );
        match failure {
            Some(e) => Err(e),
            None => value,
        }
    }

    /// `f''` by differencing `f'`, independent of the defining equation.
    pub fn f_second_fd(&self, r: f64) -> Result<f64> {
        let stencil = DerivativeStencil::new(1e-3 * r.min(1.0), 3)?;
        if stencil.reach(r) >= r {
            return Err(Error::domain(format!("r = {r} is too close to the origin for differencing")));
        }
        let failure = std::cell::RefCell::new(None);
        let d = fd_derivative(
            |s| match self.f_prime(s) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            r,
            DerivativeOrder::First,
            &stencil,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(d),
        }
    }

    /// `f''_fd + (m-1) coth(r) f' - 1` with the differenced `f''`.
    pub fn ode_residual(&self, r: f64) -> Result<f64> {
        Ok(self.f_second_fd(r)? + self.dims.k() * coth(r) * self.f_prime(r)? - 1.0)
    }

    /// `m coth(r) f'(r) - 1`, nonnegative for every `r > 0`.
    pub fn drift_term(&self, r: f64) -> Result<f64> {
        Ok(self.dims.m() as f64 * coth(r) * self.f_prime(r)? - 1.0)
    }
}
