//! Poincaré ball model of hyperbolic space with the base point at the origin.

use crate::error::{Error, Result};

/// Intrinsic dimension `m` of the surface and boundary-sphere dimension `n`;
/// the ambient space is `H^{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimensions {
    m: usize,
    n: usize,
}

impl Dimensions {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("intrinsic dimension m must be >= 2, got {m}")));
        }
        if m > n {
            return Err(Error::domain(format!("need m <= n, got m = {m}, n = {n}")));
        }
        Ok(Dimensions { m, n })
    }

    /// Codimension-one surfaces: `n = m`.
    pub fn hypersurface(m: usize) -> Result<Self> {
        Self::new(m, m)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `m - 1` as a float; the exponent of the radial weight.
    pub fn k(&self) -> f64 {
        (self.m - 1) as f64
    }

    /// Number of Euclidean coordinates of the ball, `n + 1`.
    pub fn ambient(&self) -> usize {
        self.n + 1
    }
}

/// A point of the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<f64>,
}

impl BallPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm_sq: f64 = coords.iter().map(|c| c * c).sum();
        if coords.is_empty() || !(norm_sq < 1.0) {
            return Err(Error::domain(format!(
                "point with |x|^2 = {norm_sq} is not inside the unit ball"
            )));
        }
        Ok(BallPoint { coords })
    }

    pub fn origin(dim: usize) -> Self {
        BallPoint {
            coords: vec![0.0; dim],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    /// Hyperbolic distance to the origin.
    pub fn radius(&self) -> f64 {
        let t = self.norm_sq().sqrt();
        2.0 * t.atanh()
    }
}

/// Euclidean polar coordinates `x = t * theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCoords {
    pub t: f64,
    pub theta: Vec<f64>,
}

impl SphericalCoords {
    pub fn new(t: f64, theta: Vec<f64>) -> Result<Self> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::domain(format!("t = {t} is outside [0, 1)")));
        }
        let norm = theta.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("direction has norm {norm}, expected 1")));
        }
        Ok(SphericalCoords { t, theta })
    }

    pub fn from_point(x: &BallPoint) -> Result<Self> {
        let t = x.norm_sq().sqrt();
        if t == 0.0 {
            return Err(Error::domain("the origin has no direction"));
        }
        let theta = x.coords().iter().map(|c| c / t).collect();
        Ok(SphericalCoords { t, theta })
    }

    pub fn to_point(&self) -> BallPoint {
        BallPoint {
            coords: self.theta.iter().map(|c| c * self.t).collect(),
        }
    }
}

/// `r = ln((1 + t) / (1 - t))`.
pub fn radius_from_euclidean(t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::domain(format!("t = {t} is outside [0, 1)")));
    }
    Ok(2.0 * t.atanh())
}

/// `t = tanh(r / 2)`.
pub fn euclidean_from_radius(r: f64) -> f64 {
    (0.5 * r).tanh()
}

/// `1 - tanh(r / 2) = 2 e^{-r} / (1 + e^{-r})`, accurate for large `r`.
pub fn one_minus_t(r: f64) -> f64 {
    let e = (-r).exp();
    2.0 * e / (1.0 + e)
}

/// Inverse of [`one_minus_t`]: `r = ln((2 - g) / g)` for `g = 1 - t`.
pub fn radius_from_gap(g: f64) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::domain(format!("gap 1 - t = {g} is outside (0, 1]")));
    }
    Ok(((2.0 - g) / g).ln())
}

/// Conformal factor `2 / (1 - t^2)` of the ball metric.
pub fn conformal_factor(t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t.abs()) {
        return Err(Error::domain(format!("t = {t} is outside the open ball")));
    }
    Ok(2.0 / ((1.0 - t) * (1.0 + t)))
}

/// Hyperbolic distance between two points of the ball.
pub fn distance(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    if x.coords.len() != y.coords.len() {
        return Err(Error::domain("points live in balls of different dimension"));
    }
    let diff_sq: f64 = x
        .coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let (nx, ny) = (x.norm_sq(), y.norm_sq());
    if !(nx < 1.0 && ny < 1.0) {
        return Err(Error::domain("distance needs points strictly inside the ball"));
    }
    let z = 2.0 * diff_sq / ((1.0 - nx) * (1.0 - ny));
    // arcosh(1 + z) = ln(1 + z + sqrt(z (z + 2)))
    Ok((z + (z * (z + 2.0)).sqrt()).ln_1p())
}
