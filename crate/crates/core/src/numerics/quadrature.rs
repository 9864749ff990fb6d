//! Composite Gauss–Legendre quadrature with global adaptive bisection.
//!
//! Each panel is integrated with an `order`-point Gauss–Legendre rule and
//! compared against the sum over its two halves. The panel with the largest
//! discrepancy is split until the summed estimate passes
//! `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ORDER: usize = 10;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 20_000;

/// Nodes and weights of the Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` starting from the Chebyshev-like guesses.
    pub fn new(order: usize) -> Self {
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    fn apply<E>(
        &self,
        f: &mut impl FnMut(f64) -> Result<f64, E>,
        a: f64,
        b: f64,
    ) -> Result<f64, E> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x)?;
        }
        Ok(acc * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared cache of rules by order.
pub fn gauss_legendre(order: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(GaussLegendre::new(order)))
        .clone()
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub interval: (f64, f64),
    pub order: usize,
    pub max_subdivisions: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Number of equal panels the interval is cut into before adapting.
    pub initial_panels: usize,
}

impl QuadratureRule {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let rule = QuadratureRule {
            interval: (a, b),
            order: DEFAULT_ORDER,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            initial_panels: 1,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_order(mut self, order: usize) -> Result<Self> {
        self.order = order;
        self.validate()?;
        Ok(self)
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    /// Same settings on a different interval.
    pub fn on(&self, a: f64, b: f64) -> Result<Self> {
        let mut rule = self.clone();
        rule.interval = (a, b);
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.interval;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::domain(format!("quadrature interval [{a}, {b}] is empty")));
        }
        if self.order < 2 {
            return Err(Error::domain("quadrature order must be at least 2"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be positive"));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        Ok(())
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // largest error first; earlier panels win ties so the order is reproducible
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Integrate `f` over `rule.interval`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, rule: &QuadratureRule) -> Result<f64> {
    try_integrate(|x| Ok(f(x)), rule)
}

/// Like [`integrate`] for integrands that can fail; the first error aborts.
pub fn try_integrate(
    mut f: impl FnMut(f64) -> Result<f64>,
    rule: &QuadratureRule,
) -> Result<f64> {
    rule.validate()?;
    let gl = gauss_legendre(rule.order);
    let (a, b) = rule.interval;
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;

    let mut eval_panel = |lo: f64, hi: f64, seq: usize| -> Result<Panel> {
        let whole = gl.apply(&mut f, lo, hi)?;
        let mid = 0.5 * (lo + hi);
        let refined = gl.apply(&mut f, lo, mid)? + gl.apply(&mut f, mid, hi)?;
        if !refined.is_finite() || !whole.is_finite() {
            return Err(Error::NonConvergence(format!(
                "non-finite integrand on [{lo}, {hi}]"
            )));
        }
        Ok(Panel {
            a: lo,
            b: hi,
            value: refined,
            error: (refined - whole).abs(),
            seq,
        })
    };

    let panels = rule.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        heap.push(eval_panel(lo, hi, seq)?);
        seq += 1;
    }

    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        let tol = rule.abs_tol.max(rule.rel_tol * total.abs());
        if err <= tol {
            // sum in interval order for a reproducible rounding pattern
            let mut parts: Vec<&Panel> = heap.iter().collect();
            parts.sort_by(|x, y| x.a.total_cmp(&y.a));
            return Ok(parts.iter().map(|p| p.value).sum());
        }
        if heap.len() >= rule.max_subdivisions {
            return Err(Error::NonConvergence(format!(
                "quadrature on [{a}, {b}] reached {} panels with error {err:e} > {tol:e}",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::NonConvergence(format!(
                "panel [{}, {}] cannot be bisected further",
                worst.a, worst.b
            )));
        }
        heap.push(eval_panel(worst.a, mid, seq)?);
        heap.push(eval_panel(mid, worst.b, seq + 1)?);
        seq += 2;
    }
}

/// A positive quantity stored as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }

    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `self / other` without leaving log space until the end.
    pub fn ratio(&self, other: &Scaled) -> f64 {
        (self.mantissa / other.mantissa) * (self.log_scale - other.log_scale).exp()
    }
}

/// Integrate `f(t) * exp(log_weight(t))`, factoring out `exp(shift)` where
/// `shift` is the largest log-weight seen on the initial node set.
///
/// Weights such as `sinh^{m-1}(t)` at large `t` overflow `f64`; the
/// mantissa stays in range as long as the weight does not vary by more than
/// the double range across the interval.
pub fn integrate_log_weighted(
    mut f: impl FnMut(f64) -> f64,
    log_weight: impl Fn(f64) -> f64,
    rule: &QuadratureRule,
) -> Result<Scaled> {
    let (a, b) = rule.interval;
    let gl = gauss_legendre(rule.order);
    let panels = rule.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut shift = f64::NEG_INFINITY;
    for i in 0..panels {
        let lo = a + width * i as f64;
        for x in &gl.nodes {
            shift = shift.max(log_weight(lo + 0.5 * width * (1.0 + x)));
        }
    }
    shift = shift.max(log_weight(b)).max(log_weight(a));
    if !shift.is_finite() {
        return Err(Error::domain("log-weight is not finite anywhere on the interval"));
    }
    let mantissa = integrate(|t| f(t) * (log_weight(t) - shift).exp(), rule)?;
    Ok(Scaled {
        mantissa,
        log_scale: shift,
    })
}
