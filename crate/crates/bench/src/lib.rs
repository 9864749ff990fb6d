//! Fixtures shared by the benchmarks.

use hyperlap::cone::{circle_gamma, sphere_gamma};
use hyperlap::graphs::{patch_from_graph, TrigPerturbation};
use hyperlap::numerics::TridiagonalSystem;
use hyperlap::{Cone, Dimensions, GraphCurrent, Perturbation, SurfacePatch};

/// The discrete Laplacian `tridiag(-1, 2, -1)` of size `n`, whose spectrum
/// `2 - 2cos(jπ/(n+1))` is clustered at both ends.
pub fn laplacian_1d(n: usize) -> TridiagonalSystem {
    TridiagonalSystem::new(vec![2.0; n], vec![-1.0; n.saturating_sub(1)]).expect("valid sizes")
}

/// Totally geodesic `H^m` as a cone over the equator.
pub fn equator_cone(m: usize) -> Cone {
    Cone::new(sphere_gamma(Dimensions::hypersurface(m).expect("m >= 2")))
}

/// The default trigonometric graph over the latitude circle `ρ = 1`.
pub fn trig_patch(s_range: (f64, f64)) -> SurfacePatch {
    let p = TrigPerturbation::new(1.0, vec![0.3, 0.2], vec![0.0, 0.1]).expect("finite coefficients");
    let gc = GraphCurrent::new(Cone::new(circle_gamma(1.0).expect("ρ in (0, π)")), Perturbation::Trig(p))
        .expect("circle cones take trig perturbations");
    patch_from_graph(&gc, s_range, None).expect("patch inside the ball")
}
