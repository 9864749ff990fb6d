//! Central finite differences with Richardson extrapolation.

use crate::error::{Error, Result};

pub const DEFAULT_BASE_STEP: f64 = 1e-4;
pub const DEFAULT_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

impl TryFrom<u32> for DerivativeOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            1 => Ok(DerivativeOrder::First),
            2 => Ok(DerivativeOrder::Second),
            _ => Err(Error::domain(format!("derivative order must be 1 or 2, got {order}"))),
        }
    }
}

/// Step configuration. The finest step is `base_step`; level `j` from the
/// finest uses `base_step * 2^j`, each scaled by `max(1, |x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeStencil {
    pub base_step: f64,
    pub richardson_levels: usize,
}

impl Default for DerivativeStencil {
    fn default() -> Self {
        DerivativeStencil {
            base_step: DEFAULT_BASE_STEP,
            richardson_levels: DEFAULT_LEVELS,
        }
    }
}

impl DerivativeStencil {
    pub fn new(base_step: f64, richardson_levels: usize) -> Result<Self> {
        if !(base_step > 0.0 && base_step.is_finite()) {
            return Err(Error::domain(format!("base_step must be positive, got {base_step}")));
        }
        if richardson_levels < 2 {
            return Err(Error::domain("richardson_levels must be at least 2"));
        }
        Ok(DerivativeStencil {
            base_step,
            richardson_levels,
        })
    }

    /// Largest offset from `x` the stencil evaluates at.
    pub fn reach(&self, x: f64) -> f64 {
        self.base_step * x.abs().max(1.0) * 2f64.powi(self.richardson_levels as i32 - 1)
    }
}

/// Estimate `f'(x)` or `f''(x)`.
pub fn fd_derivative(
    f: impl Fn(f64) -> f64,
    x: f64,
    order: DerivativeOrder,
    stencil: &DerivativeStencil,
) -> f64 {
    let levels = stencil.richardson_levels.max(1);
    let scale = x.abs().max(1.0);
    // coarsest first, so that each Neville sweep removes the next h^2 term
    let mut table: Vec<f64> = (0..levels)
        .map(|j| {
            let h = stencil.base_step * scale * 2f64.powi((levels - 1 - j) as i32);
            central(&f, x, h, order)
        })
        .collect();
    let mut factor = 4.0;
    for _ in 1..levels {
        for j in (1..table.len()).rev() {
            table[j] = table[j] + (table[j] - table[j - 1]) / (factor - 1.0);
        }
        table.remove(0);
        factor *= 4.0;
    }
    table[0]
}

fn central(f: &impl Fn(f64) -> f64, x: f64, h: f64, order: DerivativeOrder) -> f64 {
    match order {
        DerivativeOrder::First => (f(x + h) - f(x - h)) / (2.0 * h),
        DerivativeOrder::Second => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
    }
}
