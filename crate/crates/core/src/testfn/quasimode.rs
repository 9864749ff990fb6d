use std::f64::consts::PI;

use num_complex::Complex64;

use super::{support_rule, weighted_norm_sq, RadialTestFunction, WeightedJet};
use crate::error::{Error, Result};
use crate::hyperbolic::Dimensions;
use crate::numerics::integrate;
use crate::radial::{coth, log_sinh, mckean_bound};

/// `α(t) = (m-1)(m-3) / (4 sinh^2 t)`.
pub fn alpha(dims: Dimensions, t: f64) -> f64 {
    let m = dims.m() as f64;
    let s = t.sinh();
    (m - 1.0) * (m - 3.0) / (4.0 * s * s)
}

fn csch_sq(t: f64) -> f64 {
    let s = t.sinh();
    1.0 / (s * s)
}

/// `ψ(t) = sinh^{-(m-1)/2}(t) e^{iβt}` and `υ_R = ψ sin^2((2π/R)(t - R/2))`
/// on `[R/2, R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quasimode {
    pub dims: Dimensions,
    pub lambda: f64,
    pub r: f64,
    pub beta: f64,
}

pub fn make_quasimode(dims: Dimensions, lambda: f64, r: f64) -> Result<Quasimode> {
    let threshold = mckean_bound(dims);
    if !(lambda > threshold) {
        return Err(Error::domain(format!(
            "lambda = {lambda} must exceed (m-1)^2/4 = {threshold}"
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("R must be positive, got {r}")));
    }
    Ok(Quasimode {
        dims,
        lambda,
        r,
        beta: (lambda - threshold).sqrt(),
    })
}

impl Quasimode {
    fn decay(&self) -> f64 {
        0.5 * self.dims.k()
    }

    fn frequency(&self) -> f64 {
        2.0 * PI / self.r
    }

    fn inside(&self, t: f64) -> bool {
        t >= 0.5 * self.r && t <= self.r
    }

    /// Logarithmic derivative `ψ'/ψ = -a coth(t) + iβ` with `a = (m-1)/2`.
    fn log_derivative(&self, t: f64) -> Complex64 {
        Complex64::new(-self.decay() * coth(t), self.beta)
    }

    pub fn psi(&self, t: f64) -> Complex64 {
        let modulus = (-self.decay() * log_sinh(t)).exp();
        Complex64::from_polar(modulus, self.beta * t)
    }

    pub fn psi_prime(&self, t: f64) -> Complex64 {
        self.psi(t) * self.log_derivative(t)
    }

    pub fn psi_second(&self, t: f64) -> Complex64 {
        let p = self.log_derivative(t);
        self.psi(t) * (p * p + self.decay() * csch_sq(t))
    }

    /// `ψ'' + (m-1)coth ψ' + (λ + α)ψ`, divided by `ψ`.
    pub fn psi_ode_residual(&self, t: f64) -> Complex64 {
        let p = self.log_derivative(t);
        p * p + self.decay() * csch_sq(t)
            + self.dims.k() * coth(t) * p
            + (self.lambda + alpha(self.dims, t))
    }

    pub fn support(&self) -> (f64, f64) {
        (0.5 * self.r, self.r)
    }

    pub fn upsilon(&self, t: f64) -> Complex64 {
        if !self.inside(t) {
            return Complex64::new(0.0, 0.0);
        }
        let s = (self.frequency() * (t - 0.5 * self.r)).sin();
        self.psi(t) * (s * s)
    }

    /// `υ'' + (m-1)coth υ' + λυ` from the weighted jet, times `sqrt(w)`.
    pub fn weighted_residual(&self, t: f64) -> Complex64 {
        let j = self.weighted_jet(t);
        j.second + j.first * (self.dims.k() * coth(t)) + j.value * self.lambda
    }

    /// The same residual from the closed form
    /// `-αυ + 2iβk sin(2θ)ψ + 2k^2 cos(2θ)ψ`, times `sqrt(w)`.
    pub fn weighted_residual_identity(&self, t: f64) -> Complex64 {
        if !self.inside(t) {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.frequency();
        let theta = k * (t - 0.5 * self.r);
        let s = theta.sin();
        let (s2, c2) = (2.0 * theta).sin_cos();
        let phase = Complex64::from_polar(1.0, self.beta * t);
        phase
            * Complex64::new(
                -alpha(self.dims, t) * s * s + 2.0 * k * k * c2,
                2.0 * self.beta * k * s2,
            )
    }
}

impl RadialTestFunction for Quasimode {
    fn dims(&self) -> Dimensions {
        self.dims
    }

    fn support(&self) -> (f64, f64) {
        Quasimode::support(self)
    }

    fn weighted_jet(&self, t: f64) -> WeightedJet {
        if !self.inside(t) {
            return WeightedJet::ZERO;
        }
        let k = self.frequency();
        let theta = k * (t - 0.5 * self.r);
        let s = theta.sin();
        let sq = s * s;
        let (s2, c2) = (2.0 * theta).sin_cos();
        // sqrt(w) ψ = e^{iβt}
        let phase = Complex64::from_polar(1.0, self.beta * t);
        let p = self.log_derivative(t);
        let p2 = p * p + self.decay() * csch_sq(t);
        WeightedJet {
            value: phase * sq,
            first: phase * (p * sq + k * s2),
            second: phase * (p2 * sq + p * (2.0 * k * s2) + 2.0 * k * k * c2),
        }
    }
}

/// The constants of the first-kind and quasimode estimates at one `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub dims: Dimensions,
    pub a_r: f64,
    pub b_r: f64,
    pub epsilon_r: f64,
    /// Running maximum of the derivative-norm ratios; zero until a sweep
    /// has been recorded.
    pub c_star_empirical: f64,
}

impl BoundConstants {
    pub fn new(dims: Dimensions, lambda: f64, r: f64) -> Result<Self> {
        let (a_r, b_r) = super::ab_constants(dims, r);
        Ok(BoundConstants {
            dims,
            a_r,
            b_r,
            epsilon_r: epsilon_r(dims, lambda, r)?,
            c_star_empirical: 0.0,
        })
    }

    pub fn with_c_star(mut self, c_star: f64) -> Self {
        self.c_star_empirical = c_star;
        self
    }

    pub fn alpha(&self, t: f64) -> f64 {
        alpha(self.dims, t)
    }
}

/// `ε_R = 2 max{α(R/2)^2, 16β^2(2π/R)^2, 16(2π/R)^4}`.
pub fn epsilon_r(dims: Dimensions, lambda: f64, r: f64) -> Result<f64> {
    let q = make_quasimode(dims, lambda, r)?;
    let k = q.frequency();
    let a = alpha(dims, 0.5 * r);
    let terms = [a * a, 16.0 * q.beta * q.beta * k * k, 16.0 * k.powi(4)];
    Ok(2.0 * terms.iter().copied().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub m: usize,
    pub lambda: f64,
    pub r: f64,
    /// `∫ |υ'' + (m-1)coth υ' + λυ|^2 w`.
    pub lhs: f64,
    /// `∫ |υ|^2 w`.
    pub norm_sq: f64,
    pub ratio: f64,
    pub epsilon: f64,
    /// `ε_R ∫ |υ|^2 w`.
    pub rhs: f64,
    /// Largest pointwise gap between the direct and closed-form residuals.
    pub identity_deviation: f64,
    pub holds: bool,
}

/// Pointwise agreement required of the two residual routes.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Residual integral of `υ_R` against `ε_R ‖υ_R‖^2`, without asserting.
pub fn residual_report(dims: Dimensions, lambda: f64, r: f64) -> Result<ResidualReport> {
    let q = make_quasimode(dims, lambda, r)?;
    let epsilon = epsilon_r(dims, lambda, r)?;
    let (a, b) = q.support();
    let rule = support_rule(a, b)?;
    let lhs = integrate(|t| q.weighted_residual(t).norm_sqr(), &rule)?;
    let norm_sq = weighted_norm_sq(&q, (a, b), |j| j.value)?;
    let samples = 257;
    let identity_deviation = (0..samples)
        .map(|i| {
            let t = a + (b - a) * i as f64 / (samples - 1) as f64;
            (q.weighted_residual(t) - q.weighted_residual_identity(t)).norm()
        })
        .fold(0.0, f64::max);
    let rhs = epsilon * norm_sq;
    Ok(ResidualReport {
        m: dims.m(),
        lambda,
        r,
        lhs,
        norm_sq,
        ratio: lhs / norm_sq,
        epsilon,
        rhs,
        identity_deviation,
        holds: lhs <= rhs && identity_deviation <= IDENTITY_TOL,
    })
}

/// [`residual_report`], failing with `InvariantViolation` if the estimate
/// or the residual identity fails.
pub fn quasimode_residual(dims: Dimensions, lambda: f64, r: f64) -> Result<ResidualReport> {
    let rep = residual_report(dims, lambda, r)?;
    if rep.identity_deviation > IDENTITY_TOL {
        return Err(Error::violation(
            "residual-identity",
            format!("m={} λ={lambda} R={r}: deviation {:e}", rep.m, rep.identity_deviation),
        ));
    }
    if rep.lhs > rep.rhs {
        return Err(Error::violation(
            "quasimode-residual",
            format!("m={} λ={lambda} R={r}: {:e} > {:e}", rep.m, rep.lhs, rep.rhs),
        ));
    }
    Ok(rep)
}

/// `(∫|υ'|^2 w / ∫|υ|^2 w, ∫|υ''|^2 w / ∫|υ|^2 w)`.
pub fn derivative_norm_ratios(dims: Dimensions, lambda: f64, r: f64) -> Result<(f64, f64)> {
    let q = make_quasimode(dims, lambda, r)?;
    let support = q.support();
    let norm = weighted_norm_sq(&q, support, |j| j.value)?;
    let first = weighted_norm_sq(&q, support, |j| j.first)?;
    let second = weighted_norm_sq(&q, support, |j| j.second)?;
    Ok((first / norm, second / norm))
}

/// `(R, ∫|υ'|^2 w / ∫|υ|^2 w, ∫|υ''|^2 w / ∫|υ|^2 w)`.
pub type RatioRow = (f64, f64, f64);

/// Derivative-norm ratios at each `R` (all required to exceed `r0`) and
/// their overall maximum, the empirical `C_*`.
pub fn sweep_c_star(
    dims: Dimensions,
    lambda: f64,
    r0: f64,
    radii: &[f64],
) -> Result<(Vec<RatioRow>, f64)> {
    let mut rows = Vec::with_capacity(radii.len());
    let mut c_star: f64 = 0.0;
    for &r in radii {
        if !(r > r0) {
            return Err(Error::domain(format!("R = {r} must exceed R0 = {r0}")));
        }
        let (r1, r2) = derivative_norm_ratios(dims, lambda, r)?;
        c_star = c_star.max(r1).max(r2);
        rows.push((r, r1, r2));
    }
    Ok((rows, c_star))
}

/// `R_k = R0 * 2.5^k`, so that `R_{k+1} > 2 R_k` and the supports
/// `[R_k/2, R_k]` are pairwise disjoint.
pub fn build_quasimode_sequence(
    dims: Dimensions,
    lambda: f64,
    r0: f64,
    count: usize,
) -> Result<Vec<Quasimode>> {
    if count == 0 {
        return Err(Error::domain("quasimode sequence needs count >= 1"));
    }
    (0..count)
        .map(|k| make_quasimode(dims, lambda, r0 * 2.5f64.powi(k as i32)))
        .collect()
}

/// `(∫ sin^2(4π(t-R/2)/R), 4 ∫ sin^4(2π(t-R/2)/R))` over `[R/2, R]`.
pub fn sine_power_check(r: f64) -> Result<(f64, f64)> {
    let rule = support_rule(0.5 * r, r)?;
    let k = 2.0 * PI / r;
    let lhs = integrate(|t| (2.0 * k * (t - 0.5 * r)).sin().powi(2), &rule)?;
    let rhs = 4.0 * integrate(|t| (k * (t - 0.5 * r)).sin().powi(4), &rule)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fd_derivative, DerivativeOrder, DerivativeStencil};
    use crate::radial::weight;
    use crate::testfn::Scaled;

    fn dims(m: usize) -> Dimensions {
        Dimensions::hypersurface(m).unwrap()
    }

    #[test]
    fn domain_of_lambda() {
        assert!(make_quasimode(dims(2), 0.25, 10.0).is_err());
        assert!(make_quasimode(dims(3), 0.9, 10.0).is_err());
        let q = make_quasimode(dims(2), 0.25 + 1e-12, 10.0).unwrap();
        assert!(q.beta > 0.0 && q.beta < 1e-5);
    }

    #[test]
    fn alpha_vanishes_for_m3() {
        for &t in &[0.1, 1.0, 10.0] {
            assert_eq!(alpha(dims(3), t), 0.0);
        }
        assert!(alpha(dims(2), 1.0) < 0.0 && alpha(dims(5), 1.0) > 0.0);
    }

    #[test]
    fn psi_modulus_times_weight_is_one() {
        for m in 2..=8 {
            let q = make_quasimode(dims(m), mckean_bound(dims(m)) + 0.5, 10.0).unwrap();
            for i in 0..=50 {
                let t = 0.5 + 59.5 * i as f64 / 50.0;
                let lhs = (q.psi(t).norm_sqr().ln() + (m - 1) as f64 * log_sinh(t)).exp();
                assert!((lhs - 1.0).abs() < 1e-12, "m={m} t={t}");
            }
        }
        let q = make_quasimode(dims(2), 0.5, 10.0).unwrap();
        assert!((q.psi(5.0).norm_sqr() * 5f64.sinh() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psi_solves_its_equation() {
        for m in 2..=8 {
            let q = make_quasimode(dims(m), mckean_bound(dims(m)) + 1.0, 10.0).unwrap();
            for i in 1..100 {
                let t = 0.3 + 0.2 * i as f64;
                assert!(q.psi_ode_residual(t).norm() < 1e-9, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn psi_derivatives_match_finite_differences() {
        let q = make_quasimode(dims(4), 3.0, 10.0).unwrap();
        let s = DerivativeStencil::default();
        for &t in &[0.7, 2.0, 5.0] {
            let re1 = fd_derivative(|x| q.psi(x).re, t, DerivativeOrder::First, &s);
            let im1 = fd_derivative(|x| q.psi(x).im, t, DerivativeOrder::First, &s);
            let re2 = fd_derivative(|x| q.psi(x).re, t, DerivativeOrder::Second, &s);
            let im2 = fd_derivative(|x| q.psi(x).im, t, DerivativeOrder::Second, &s);
            let scale = q.psi(t).norm().max(1e-300);
            assert!((q.psi_prime(t) - Complex64::new(re1, im1)).norm() / scale < 1e-7);
            assert!((q.psi_second(t) - Complex64::new(re2, im2)).norm() / scale < 1e-5);
        }
    }

    #[test]
    fn upsilon_jet_matches_finite_differences() {
        let q = make_quasimode(dims(2), 0.5, 10.0).unwrap();
        let s = DerivativeStencil::default();
        for &t in &[5.5, 7.0, 9.3] {
            let plain = q.jet(t);
            let re = fd_derivative(|x| q.upsilon(x).re, t, DerivativeOrder::First, &s);
            let im = fd_derivative(|x| q.upsilon(x).im, t, DerivativeOrder::First, &s);
            assert!((plain.first - Complex64::new(re, im)).norm() < 1e-9);
            let re2 = fd_derivative(|x| q.upsilon(x).re, t, DerivativeOrder::Second, &s);
            let im2 = fd_derivative(|x| q.upsilon(x).im, t, DerivativeOrder::Second, &s);
            assert!((plain.second - Complex64::new(re2, im2)).norm() < 1e-6);
            assert!((plain.value - q.upsilon(t)).norm() < 1e-15);
        }
    }

    #[test]
    fn support_discipline() {
        let q = make_quasimode(dims(3), 2.0, 20.0).unwrap();
        assert_eq!(q.upsilon(9.99), Complex64::new(0.0, 0.0));
        assert_eq!(q.upsilon(20.01), Complex64::new(0.0, 0.0));
        assert_eq!(q.weighted_jet(30.0), WeightedJet::ZERO);
        assert!(q.upsilon(10.0).norm() < 1e-30);
    }

    #[test]
    fn epsilon_examples() {
        let e = epsilon_r(dims(3), 1.25, 20.0).unwrap();
        let k = PI / 10.0;
        assert!((e - 2.0 * (16.0 * 0.25 * k * k).max(16.0 * k.powi(4))).abs() < 1e-15);
        assert!((e - 0.7895684).abs() < 1e-7);
        let e2 = epsilon_r(dims(2), 0.5, 40.0).unwrap();
        assert!((e2 - 2.0 * 16.0 * 0.25 * (PI / 20.0).powi(2)).abs() < 1e-15);
        assert!((e2 - 0.1973921).abs() < 1e-7);
        assert!(epsilon_r(dims(4), 5.0, 1e6).unwrap() < 1e-8);
    }

    #[test]
    fn norm_of_upsilon_is_three_sixteenths_of_r() {
        for &(m, r) in &[(2usize, 10.0), (5, 16.0), (8, 64.0)] {
            let rep = residual_report(dims(m), mckean_bound(dims(m)) + 1.0, r).unwrap();
            assert!((rep.norm_sq - 3.0 * r / 16.0).abs() < 1e-10 * r);
        }
    }

    #[test]
    fn residual_examples() {
        let rep = quasimode_residual(dims(3), 1.25, 20.0).unwrap();
        assert!(rep.ratio <= 0.7895684);
        let mut last = f64::INFINITY;
        for &r in &[10.0, 20.0, 40.0, 80.0] {
            let ratio = quasimode_residual(dims(2), 0.5, r).unwrap().ratio;
            assert!(ratio < last, "R={r}");
            last = ratio;
        }
    }

    #[test]
    fn residual_estimate_on_sweep() {
        for m in 2..=8 {
            let base = mckean_bound(dims(m));
            for &shift in &[0.1, 1.0, 10.0] {
                for &r in &[8.0, 16.0, 32.0, 64.0] {
                    let rep = quasimode_residual(dims(m), base + shift, r).unwrap();
                    assert!(rep.identity_deviation < IDENTITY_TOL);
                    assert!(rep.holds);
                }
            }
        }
    }

    #[test]
    fn ratios_are_scale_invariant() {
        let q = make_quasimode(dims(2), 0.5, 20.0).unwrap();
        let scaled = Scaled {
            inner: &q,
            factor: 7.0,
        };
        let s = q.support();
        let a = weighted_norm_sq(&q, s, |j| j.first).unwrap() / weighted_norm_sq(&q, s, |j| j.value).unwrap();
        let b = weighted_norm_sq(&scaled, s, |j| j.first).unwrap()
            / weighted_norm_sq(&scaled, s, |j| j.value).unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn c_star_is_bounded_along_r() {
        let (rows, c_star) = sweep_c_star(dims(2), 0.5, 1.0, &[5.0, 10.0, 20.0, 40.0]).unwrap();
        assert!(rows.iter().all(|&(_, r1, r2)| r1 <= c_star && r2 <= c_star));
        // the ratios settle towards their R -> ∞ limits (λ and λ^2)
        let (_, r1, r2) = rows[3];
        assert!((r1 - 0.5).abs() < 0.1 && (r2 - 0.25).abs() < 0.1);
        assert!(sweep_c_star(dims(2), 0.5, 10.0, &[5.0]).is_err());
        let (r1, _) = derivative_norm_ratios(dims(3), 1.25, 20.0).unwrap();
        assert!(r1.is_finite() && r1 > 0.0);
    }

    #[test]
    fn sequence_has_disjoint_supports() {
        let seq = build_quasimode_sequence(dims(2), 0.5, 10.0, 3).unwrap();
        let radii: Vec<f64> = seq.iter().map(|q| q.r).collect();
        assert_eq!(radii, vec![10.0, 25.0, 62.5]);
        for w in seq.windows(2) {
            assert!(w[1].r > 2.0 * w[0].r);
            assert!(w[0].support().1 < w[1].support().0);
        }
        assert_eq!(build_quasimode_sequence(dims(2), 0.5, 10.0, 1).unwrap().len(), 1);
        assert!(build_quasimode_sequence(dims(2), 0.5, 10.0, 0).is_err());
    }

    #[test]
    fn sine_power_inequality() {
        for &r in &[4.0, 10.0, 64.0] {
            let (lhs, rhs) = sine_power_check(r).unwrap();
            assert!((lhs - r / 4.0).abs() < 1e-10 * r);
            assert!((rhs - 3.0 * r / 4.0).abs() < 1e-10 * r);
            assert!(lhs <= rhs);
        }
    }

    #[test]
    fn weighted_jet_is_root_weight_times_upsilon() {
        let q = make_quasimode(dims(3), 2.0, 8.0).unwrap();
        for &t in &[4.5, 6.0] {
            let direct = q.upsilon(t) * weight(dims(3), t).sqrt();
            assert!((q.weighted_jet(t).value - direct).norm() < 1e-14);
        }
    }
}
