//! Isoperimetric ratios of radial domains and Rayleigh quotients on graphs.

use super::{mass_integral, patch_from_cone, patch_from_graph, GraphCurrent, SurfacePatch};
use crate::error::{Error, Result};
use crate::radial::{iso_constant, log_sinh};
use crate::testfn::{rayleigh_radial, FirstKindFamily, RayleighContext, RayleighReport};

/// Relative slack for the equality case of the isoperimetric comparison.
const ISO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    pub r_inner: f64,
    pub r_outer: f64,
    /// `Mass(∂Ω) / Mass(Ω)` for `Ω = patch ∩ {r_inner < r < r_outer}`.
    pub ratio: f64,
    /// `h(B_{r_outer})`.
    pub bound: f64,
    pub holds: bool,
}

/// Mass of the level set `{r = s}` of the patch.
fn level_mass(patch: &SurfacePatch, s: f64) -> Result<f64> {
    if s <= patch.graph.radial_start() {
        return Ok(0.0);
    }
    let k = patch.dims().k();
    let strip = SurfacePatch {
        s_range: (s, s),
        ..patch.clone()
    };
    // the induced metric on {r = s} is sinh^2 times the angular block of Ĝ
    let angular = strip.integrate_angles(s, 0, &[], &|s, p| {
        let g = patch.scaled_gram(s, p)?;
        let block = g.view((1, 1), (p.len(), p.len())).into_owned();
        Ok(block.determinant().max(0.0).sqrt())
    })?;
    Ok((k * log_sinh(s)).exp() * angular)
}

/// The isoperimetric ratio of a radial annulus, without asserting. Only
/// minimal patches (cones and the totally geodesic cap) are admitted.
pub fn divergence_ratio_report(patch: &SurfacePatch, r_inner: f64, r_outer: f64) -> Result<DivergenceReport> {
    if !patch.graph.is_stationary() {
        return Err(Error::domain("the isoperimetric comparison needs a minimal patch"));
    }
    if !(r_inner >= 0.0 && r_inner < r_outer) {
        return Err(Error::domain(format!("need 0 <= r_inner < r_outer, got {r_inner}, {r_outer}")));
    }
    let inner = r_inner.max(patch.graph.radial_start());
    if !(inner < r_outer) {
        return Err(Error::domain(format!("the patch does not reach inside B_{r_outer}")));
    }
    let full = SurfacePatch {
        s_range: (inner, r_outer),
        ..patch.clone()
    };
    let volume = mass_integral(&full, &|_| 1.0)?;
    let boundary = level_mass(patch, inner)? + level_mass(patch, r_outer)?;
    if !(volume > 0.0) {
        return Err(Error::DivisionByZero("annulus has no mass".into()));
    }
    let ratio = boundary / volume;
    let bound = iso_constant(patch.dims(), r_outer)?;
    Ok(DivergenceReport {
        r_inner,
        r_outer,
        ratio,
        bound,
        holds: ratio >= bound * (1.0 - ISO_TOL),
    })
}

/// [`divergence_ratio_report`], failing if the ratio falls below `h(B_r)`.
pub fn divergence_ratio_check(patch: &SurfacePatch, r_inner: f64, r_outer: f64) -> Result<DivergenceReport> {
    let rep = divergence_ratio_report(patch, r_inner, r_outer)?;
    if !rep.holds {
        return Err(Error::violation(
            "isoperimetric",
            format!("ratio {} below h(B_{r_outer}) = {}", rep.ratio, rep.bound),
        ));
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRayleighReport {
    pub graph: RayleighReport,
    /// The cone quotient from the one-dimensional weighted integrals.
    pub cone: RayleighReport,
    /// Largest deviation from 1 of the two sandwich ratios (`u'^2` and `u^2`).
    pub epsilon: f64,
    /// `(1 + ε) / (1 - ε)`.
    pub factor: f64,
    /// `|∇(u∘r)| <= |u'(r)|` at every sampled point.
    pub gradient_bound_holds: bool,
    pub holds: bool,
}

/// Rayleigh quotient of `u_R ∘ r` on the graph against the cone quotient.
pub fn rayleigh_on_graph(gc: &GraphCurrent, family: &FirstKindFamily) -> Result<GraphRayleighReport> {
    if family.dims != gc.dims() {
        return Err(Error::domain("family and graph dimensions differ"));
    }
    let support = (0.5 * family.r, family.r);
    let graph = patch_from_graph(gc, support, None)?;
    let cone = patch_from_cone(&gc.cone, support, None)?;
    let energy_density = |s: f64| family.u_prime(s).powi(2);
    let mass_density = |s: f64| family.u(s).powi(2);

    let numerator = graph.integrate(support, &|s, p| {
        let (det, inv) = graph.metric(s, p)?;
        Ok(energy_density(s) * inv[(0, 0)] * (gc.dims().k() * log_sinh(s) + 0.5 * det.ln()).exp())
    })?;
    let denominator = mass_integral(&graph, &mass_density)?;
    let graph_report = RayleighReport::new(numerator, denominator, RayleighContext::Graph)?;

    let ratio_energy = mass_integral(&graph, &energy_density)? / mass_integral(&cone, &energy_density)?;
    let ratio_mass = denominator / mass_integral(&cone, &mass_density)?;
    let epsilon = (ratio_energy - 1.0).abs().max((ratio_mass - 1.0).abs());
    if !(epsilon < 1.0) {
        return Err(Error::domain(format!("sandwich deviation {epsilon} is not below 1")));
    }
    let factor = (1.0 + epsilon) / (1.0 - epsilon);

    let cone_report = rayleigh_radial(family, support, RayleighContext::Cone, gc.cone.gamma.omega)?;

    let samples = 100;
    let mut gradient_bound_holds = true;
    for i in 0..samples {
        let s = support.0 + (support.1 - support.0) * (i as f64 + 0.5) / samples as f64;
        let p = &graph.angle_grid(samples)[i];
        let grad_sq = energy_density(s) * graph.radial_gradient_sq(s, p)?;
        gradient_bound_holds &= grad_sq <= energy_density(s) * (1.0 + 1e-12);
    }
    let holds = gradient_bound_holds && graph_report.quotient <= factor * cone_report.quotient * (1.0 + 1e-9);
    Ok(GraphRayleighReport {
        graph: graph_report,
        cone: cone_report,
        epsilon,
        factor,
        gradient_bound_holds,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{Perturbation, TrigPerturbation};
    use super::*;
    use crate::cone::{circle_gamma, sphere_gamma, Cone};
    use crate::hyperbolic::Dimensions;
    use crate::testfn::make_first_kind;

    #[test]
    fn full_cone_truncation_is_the_equality_case() {
        let cone = Cone::new(circle_gamma(0.6).unwrap());
        let patch = patch_from_cone(&cone, (0.0, 5.0), None).unwrap();
        for &r in &[1.0, 3.0] {
            let rep = divergence_ratio_check(&patch, 0.0, r).unwrap();
            assert!((rep.ratio / rep.bound - 1.0).abs() < 1e-9);
        }
        let rep = divergence_ratio_check(&patch, 1.5, 3.0).unwrap();
        assert!(rep.ratio > rep.bound);
    }

    #[test]
    fn totally_geodesic_plane_at_radius_one() {
        let cone = Cone::new(sphere_gamma(Dimensions::hypersurface(2).unwrap()));
        let patch = patch_from_cone(&cone, (0.0, 2.0), None).unwrap();
        let rep = divergence_ratio_check(&patch, 0.0, 1.0).unwrap();
        assert!(rep.ratio >= 2.1639534 - 1e-6);
    }

    #[test]
    fn cap_beats_the_ball() {
        let gc = GraphCurrent::new(Cone::new(circle_gamma(1.0).unwrap()), Perturbation::Cap).unwrap();
        let patch = patch_from_graph(&gc, (gc.radial_start(), 6.0), None).unwrap();
        for &r in &[1.0, 3.0, 6.0] {
            let rep = divergence_ratio_check(&patch, 0.0, r).unwrap();
            assert!(rep.ratio > rep.bound);
        }
    }

    #[test]
    fn non_minimal_patches_are_refused() {
        let p = TrigPerturbation::new(1.0, vec![0.2], vec![]).unwrap();
        let gc = GraphCurrent::new(Cone::new(circle_gamma(1.0).unwrap()), Perturbation::Trig(p)).unwrap();
        let patch = patch_from_graph(&gc, (0.5, 3.0), None).unwrap();
        assert!(divergence_ratio_report(&patch, 0.5, 2.0).is_err());
    }

    #[test]
    fn cone_quotient_is_recovered_without_perturbation() {
        let cone = Cone::new(circle_gamma(1.0).unwrap());
        let fam = make_first_kind(cone.dims(), 12.0).unwrap();
        let rep = rayleigh_on_graph(&GraphCurrent::cone_only(cone), &fam).unwrap();
        assert!((rep.graph.quotient / rep.cone.quotient - 1.0).abs() < 1e-8);
        assert!(rep.epsilon < 1e-8 && rep.holds);
    }

    #[test]
    fn perturbed_quotient_within_the_sandwich_factor() {
        let p = TrigPerturbation::new(1.0, vec![0.3, 0.2], vec![0.0, 0.1]).unwrap();
        let gc = GraphCurrent::new(Cone::new(circle_gamma(1.0).unwrap()), Perturbation::Trig(p)).unwrap();
        let fam = make_first_kind(gc.dims(), 20.0).unwrap();
        let rep = rayleigh_on_graph(&gc, &fam).unwrap();
        assert!(rep.gradient_bound_holds && rep.holds);
        assert!(rep.epsilon > 0.0 && rep.epsilon < 1e-3);
    }
}
