//! Numerical companion for the spectrum of minimal submanifolds of
//! hyperbolic space asymptotic to a boundary manifold: radial calculus in
//! the ball model, test functions and quasimodes, cone spectra, and
//! perturbed graphs over cones.

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod error;
pub mod graphs;
pub mod hyperbolic;
pub mod numerics;
pub mod radial;
pub mod testfn;

pub use cone::{BoundaryManifold, Cone, GammaKind, SpectrumWindow};
pub use error::{Error, Result};
pub use graphs::{FrameDecomposition, GraphCurrent, LaplaceErrorReport, Perturbation, SurfacePatch};
pub use hyperbolic::{BallPoint, Dimensions, SphericalCoords};
pub use testfn::{RayleighContext, RayleighReport};
