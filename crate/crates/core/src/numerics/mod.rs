//! Quadrature, tridiagonal eigenvalues and finite differences.

pub mod differentiate;
pub mod quadrature;
pub mod tridiagonal;

pub use differentiate::{fd_derivative, DerivativeOrder, DerivativeStencil};
pub use quadrature::{
    integrate, integrate_log_weighted, try_integrate, QuadratureRule, Scaled,
};
pub use tridiagonal::{eigen_below, eigen_smallest_k, TridiagonalSystem};
