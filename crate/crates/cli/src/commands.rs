//! One sweep per subcommand. Sweep points run on the rayon pool; rows are
//! assembled in sweep order.

use std::fs;

use hyperlap::cone::{
    circle_gamma_in, cone_spectrum_window, cone_truncation_iso_ratio, parse_eigen_list, probe_report,
    sphere_gamma, WindowSettings,
};
use hyperlap::graphs::{
    divergence_ratio_report, laplace_error_report, patch_from_graph, sandwich_sweep, TrigPerturbation,
};
use hyperlap::radial::{
    cheeger_lower, comparison_profile, geometric_grid, iso_constant, iso_lower_bound, mckean_bound,
};
use hyperlap::testfn::{build_quasimode_sequence, derivative_norm_ratios, residual_report, rin_report};
use hyperlap::{BoundaryManifold, Cone, Dimensions, Error, GraphCurrent, Perturbation};
use rayon::prelude::*;

use crate::config::{GammaSpec, PerturbationKind, RunConfig, Subcommand, UsageError};
use crate::report::{Outcome, Report, Row};

/// Why a run stopped before every sweep point was evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Usage(UsageError),
    Compute(Error),
}

impl From<UsageError> for RunError {
    fn from(e: UsageError) -> Self {
        RunError::Usage(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Compute(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(e) => write!(f, "usage error: {e}"),
            RunError::Compute(e) => e.fmt(f),
        }
    }
}

/// The report, partial if `error` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcomes {
    pub report: Report,
    pub error: Option<RunError>,
}

/// Evaluate `points` concurrently, keeping sweep order. Rows of the points
/// before the first failing one are kept.
fn sweep<T: Sync>(
    points: &[T],
    f: impl Fn(&T) -> Result<Vec<Row>, RunError> + Sync + Send,
) -> (Vec<Row>, Option<RunError>) {
    let results: Vec<_> = points.par_iter().map(f).collect();
    let mut rows = Vec::new();
    for r in results {
        match r {
            Ok(v) => rows.extend(v),
            Err(e) => return (rows, Some(e)),
        }
    }
    (rows, None)
}

fn pairs<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

pub fn execute(cfg: &RunConfig) -> Outcomes {
    let result = match cfg.subcommand {
        Subcommand::Iso => iso(cfg),
        Subcommand::Profile => profile(cfg),
        Subcommand::Rayleigh => rayleigh(cfg),
        Subcommand::Quasimode => quasimode(cfg),
        Subcommand::Spectrum => spectrum(cfg),
        Subcommand::Probe => probe(cfg),
        Subcommand::Sandwich => sandwich(cfg),
        Subcommand::LaplaceError => laplace_error(cfg),
        Subcommand::Cheeger => cheeger(cfg),
    };
    let (rows, error) = match result {
        Ok(pair) => pair,
        Err(e) => (Vec::new(), Some(e)),
    };
    Outcomes {
        report: Report {
            subcommand: cfg.subcommand.name(),
            metadata: cfg.echo(),
            rows,
        },
        error,
    }
}

type Sweep = Result<(Vec<Row>, Option<RunError>), RunError>;

fn all_dims(cfg: &RunConfig) -> Result<Vec<Dimensions>, UsageError> {
    cfg.m.iter().map(|&m| cfg.dims(m)).collect()
}

/// Strict comparisons only where the gap is resolvable in f64.
fn strictly_above(a: f64, b: f64, r: f64) -> bool {
    if r < 15.0 {
        a > b
    } else {
        a >= b * (1.0 - 1e-13)
    }
}

fn iso(cfg: &RunConfig) -> Sweep {
    let radii = cfg.r.clone().unwrap_or_else(geometric_grid);
    let points = pairs(&all_dims(cfg)?, &radii);
    Ok(sweep(&points, |&(dims, r)| {
        let h = iso_constant(dims, r)?;
        let lower = iso_lower_bound(dims, r);
        let cone = Cone::new(sphere_gamma(dims));
        let truncation = cone_truncation_iso_ratio(&cone, r)?;
        let k = dims.k();
        Ok(vec![Row::new()
            .int("m", dims.m())
            .float("r", r)
            .float("h", h)
            .float("lower", lower)
            .float("cheeger", cheeger_lower(dims, r)?)
            .float("truncation_ratio", truncation)
            .check("iso_lower", strictly_above(h, lower, r) && strictly_above(lower, k, r))
            .check("truncation_equality", (truncation / h - 1.0).abs() <= 1e-10)])
    }))
}

fn profile(cfg: &RunConfig) -> Sweep {
    let radii = cfg.r.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0]);
    let points = pairs(&all_dims(cfg)?, &radii);
    Ok(sweep(&points, |&(dims, r)| {
        let p = comparison_profile(dims);
        let ode = p.ode_residual(r)?;
        let drift = p.drift_term(r)?;
        Ok(vec![Row::new()
            .int("m", dims.m())
            .float("r", r)
            .float("f", p.f(r)?)
            .float("f_prime", p.f_prime(r)?)
            .float("f_second", p.f_second(r)?)
            .float("f_second_fd", p.f_second_fd(r)?)
            .float("ode_residual", ode)
            .float("drift", drift)
            .check("ode", ode.abs() <= 1e-8)
            .check("drift_nonnegative", drift >= -1e-12)])
    }))
}

fn rayleigh(cfg: &RunConfig) -> Sweep {
    let radii = cfg.big_r.clone().unwrap_or_else(|| vec![4.0, 8.0, 16.0, 32.0, 64.0]);
    let points = pairs(&all_dims(cfg)?, &radii);
    Ok(sweep(&points, |&(dims, r)| {
        let rep = rin_report(dims, r)?;
        let floor = mckean_bound(dims);
        let gap = rep.quotient - floor;
        let k = 2.0 * std::f64::consts::PI / r;
        let envelope = k * k + 3.0 * rep.b_r * rep.a_r.sqrt() + 1e-6;
        Ok(vec![Row::new()
            .int("m", dims.m())
            .float("R", r)
            .float("A_R", rep.a_r)
            .float("B_R", rep.b_r)
            .float("quotient", rep.quotient)
            .float("excess", rep.excess)
            .float("lhs", rep.lhs)
            .float("rhs", rep.rhs)
            .float("slack", rep.slack)
            .float("route_gap", rep.route_gap)
            .check("rin", rep.holds)
            .check("mckean_floor", gap >= 0.0)
            .check("envelope", gap <= envelope)])
    }))
}

fn default_lambdas(dims: Dimensions, cfg: &RunConfig, offsets: &[f64]) -> Vec<f64> {
    cfg.lambda
        .clone()
        .unwrap_or_else(|| offsets.iter().map(|d| mckean_bound(dims) + d).collect())
}

fn quasimode(cfg: &RunConfig) -> Sweep {
    let radii = cfg.big_r.clone().unwrap_or_else(|| vec![8.0, 16.0, 32.0, 64.0]);
    let mut points = Vec::new();
    for dims in all_dims(cfg)? {
        for lambda in default_lambdas(dims, cfg, &[0.1, 1.0, 10.0]) {
            points.push((dims, lambda));
        }
    }
    Ok(sweep(&points, |&(dims, lambda)| {
        let mut rows = Vec::with_capacity(radii.len());
        let mut c_star: f64 = 0.0;
        let mut first = None;
        for &r in &radii {
            let rep = residual_report(dims, lambda, r)?;
            let (r1, r2) = derivative_norm_ratios(dims, lambda, r)?;
            c_star = c_star.max(r1).max(r2);
            // the ratios tend to λ-dependent limits; they stay within the first value's scale
            let base = *first.get_or_insert(r1.max(r2));
            rows.push(
                Row::new()
                    .int("m", dims.m())
                    .float("lambda", lambda)
                    .float("R", r)
                    .float("residual", rep.lhs)
                    .float("norm_sq", rep.norm_sq)
                    .float("ratio", rep.ratio)
                    .float("epsilon", rep.epsilon)
                    .float("identity_deviation", rep.identity_deviation)
                    .float("first_ratio", r1)
                    .float("second_ratio", r2)
                    .float("c_star", c_star)
                    .check("residual", rep.lhs <= rep.rhs)
                    .check("identity", rep.identity_deviation <= hyperlap::testfn::IDENTITY_TOL)
                    .check("c_star_bounded", c_star.is_finite() && r1.max(r2) <= 2.0 * base),
            );
        }
        Ok(rows)
    }))
}

fn gamma_for(cfg: &RunConfig, dims: Dimensions, default: GammaSpec) -> Result<BoundaryManifold, RunError> {
    match cfg.gamma.clone().unwrap_or(default) {
        GammaSpec::Equator => Ok(sphere_gamma(dims)),
        GammaSpec::Circle(rho) => {
            if dims.m() != 2 {
                return Err(UsageError(format!("circle cross-sections need m = 2, got m = {}", dims.m())).into());
            }
            Ok(circle_gamma_in(dims.n(), rho)?)
        }
        GammaSpec::File(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
            let eigs = parse_eigen_list(&text)?;
            Ok(BoundaryManifold::custom(dims, cfg.omega, eigs)?)
        }
    }
}

/// Relative tolerance of each link in the eigenvalue >= Cheeger >= McKean chain.
const CHAIN_TOL: f64 = 1e-8;

fn spectrum(cfg: &RunConfig) -> Sweep {
    let lengths = cfg.l.clone().unwrap_or_else(|| vec![10.0, 20.0, 40.0]);
    let mut settings = WindowSettings::default();
    if let Some(g) = cfg.grid {
        settings.grid = g;
        settings.max_grid = settings.max_grid.max(4 * g);
    }
    if let Some(t) = cfg.tol {
        settings.tolerance = t;
    }
    let mut points = Vec::new();
    for dims in all_dims(cfg)? {
        let cone = Cone::new(gamma_for(cfg, dims, GammaSpec::Equator)?);
        for &l in &lengths {
            points.push((cone.clone(), l));
        }
    }
    let k = cfg.k;
    Ok(sweep(&points, |(cone, l)| {
        let dims = cone.dims();
        let window = cone_spectrum_window(cone, *l, k, &settings)?;
        let cheeger = cheeger_lower(dims, *l)?;
        let chain = dims.k() * dims.k() * hyperlap::radial::coth(*l).powi(2) / 4.0;
        let mckean = mckean_bound(dims);
        // coth(L)^2 - 1 ~ 4e^{-2L} is below rounding for L >= 15
        let chain_holds = cheeger >= chain * (1.0 - CHAIN_TOL) && strictly_above(chain, mckean * (1.0 - CHAIN_TOL), *l);
        Ok(window
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                Row::new()
                    .int("m", dims.m())
                    .float("L", *l)
                    .int("index", i)
                    .float("value", e.value)
                    .int("mu_index", e.mu_index)
                    .int("radial_index", e.radial_index)
                    .float("cheeger_floor", cheeger)
                    .float("mckean", mckean)
                    .text("complete", window.complete.to_string())
                    .check("cheeger_bound", e.value >= cheeger * (1.0 - CHAIN_TOL))
                    .check("chain", chain_holds)
            })
            .collect())
    }))
}

fn probe(cfg: &RunConfig) -> Sweep {
    let r0 = cfg.r0.unwrap_or(10.0);
    if !(r0 > 0.0) {
        return Err(UsageError("probe needs --r0 > 0".into()).into());
    }
    let mut points = Vec::new();
    for dims in all_dims(cfg)? {
        let cone = Cone::new(gamma_for(cfg, dims, GammaSpec::Equator)?);
        for lambda in default_lambdas(dims, cfg, &[0.25, 1.0, 10.0]) {
            points.push((cone.clone(), lambda));
        }
    }
    let count = cfg.count;
    Ok(sweep(&points, |(cone, lambda)| {
        let qs = build_quasimode_sequence(cone.dims(), *lambda, r0, count)?;
        let rep = probe_report(cone, *lambda, &qs)?;
        Ok(rep
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let decrease = match i {
                    0 => Outcome::NotApplicable,
                    _ => Outcome::from_bool(row.ratio < rep.rows[i - 1].ratio),
                };
                Row::new()
                    .int("m", cone.dims().m())
                    .float("lambda", *lambda)
                    .int("k", i)
                    .float("R", row.r)
                    .float("ratio", row.ratio)
                    .float("bound", row.bound)
                    .check("envelope", row.holds)
                    .flag("decrease", decrease)
            })
            .collect())
    }))
}

fn graph_for(cfg: &RunConfig, dims: Dimensions, default: PerturbationKind) -> Result<GraphCurrent, RunError> {
    let cone = Cone::new(gamma_for(cfg, dims, GammaSpec::Circle(1.0))?);
    let perturbation = match cfg.perturbation.unwrap_or(default) {
        PerturbationKind::Zero => Perturbation::Zero,
        PerturbationKind::Cap => Perturbation::Cap,
        PerturbationKind::Trig => {
            Perturbation::Trig(TrigPerturbation::new(cfg.decay, cfg.rho_cos.clone(), cfg.rho_sin.clone())?)
        }
    };
    Ok(GraphCurrent::new(cone, perturbation)?)
}

fn sandwich(cfg: &RunConfig) -> Sweep {
    let radii = cfg.big_r.clone().unwrap_or_else(|| vec![5.0, 10.0, 20.0]);
    let graphs: Vec<_> = all_dims(cfg)?
        .into_iter()
        .map(|d| graph_for(cfg, d, PerturbationKind::Trig))
        .collect::<Result<_, _>>()?;
    let width = cfg.width;
    Ok(sweep(&graphs, |gc| {
        let rows = sandwich_sweep(gc, &radii, width)?;
        Ok(rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let monotone = match i {
                    0 => Outcome::NotApplicable,
                    _ => Outcome::from_bool(row.deviation <= rows[i - 1].deviation),
                };
                Row::new()
                    .int("m", gc.dims().m())
                    .float("R", row.r)
                    .float("ratio", row.ratio)
                    .float("deviation", row.deviation)
                    .flag("monotone", monotone)
            })
            .collect())
    }))
}

fn laplace_error(cfg: &RunConfig) -> Sweep {
    let radii = cfg.r.clone().unwrap_or_else(|| vec![6.0, 9.0, 12.0]);
    let graphs: Vec<_> = all_dims(cfg)?
        .into_iter()
        .map(|d| graph_for(cfg, d, PerturbationKind::Trig))
        .collect::<Result<_, _>>()?;
    let angles = cfg.angles;
    let r_max = radii[radii.len() - 1];
    Ok(sweep(&graphs, |gc| {
        let start = gc.radial_start().max(radii[0] - 1.0).max(0.0);
        let patch = patch_from_graph(gc, (start, r_max + 1.0), None)?;
        let profile = comparison_profile(gc.dims());
        let jet = |r: f64| {
            (
                profile.f(r).unwrap_or(f64::NAN),
                profile.f_prime(r).unwrap_or(f64::NAN),
                profile.f_second(r).unwrap_or(f64::NAN),
            )
        };
        let rep = laplace_error_report(&patch, &jet, &radii, angles)?;
        Ok(rep
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let refined = if rep.asserted {
                    Outcome::from_bool(row.refined_holds)
                } else {
                    Outcome::NotApplicable
                };
                // a decrease is only meaningful once E is resolved above the FD noise
                let decrease = match i.checked_sub(1).map(|j| &rep.rows[j]) {
                    Some(prev) if prev.e.abs() > prev.tolerance => Outcome::from_bool(row.ratio < prev.ratio),
                    _ => Outcome::NotApplicable,
                };
                Row::new()
                    .int("m", gc.dims().m())
                    .int("n", gc.dims().n())
                    .float("r", row.r)
                    .float("E", row.e)
                    .float("ratio", row.ratio)
                    .float("predicted", row.predicted)
                    .float("tolerance", row.tolerance)
                    .float("varphi", row.varphi)
                    .float("y_norm_sq", row.y_norm_sq)
                    .flag("refined", refined)
                    .flag("decrease", decrease)
            })
            .collect())
    }))
}

fn cheeger(cfg: &RunConfig) -> Sweep {
    let outer = cfg.r.clone().unwrap_or_else(|| vec![1.0, 2.0, 4.0]);
    let inner = cfg.r0.unwrap_or(0.0);
    let graphs: Vec<_> = all_dims(cfg)?
        .into_iter()
        .map(|d| {
            let cone = Cone::new(gamma_for(cfg, d, GammaSpec::Equator)?);
            match cfg.perturbation.unwrap_or(PerturbationKind::Zero) {
                PerturbationKind::Zero => Ok(GraphCurrent::cone_only(cone)),
                PerturbationKind::Cap => Ok(GraphCurrent::new(cone, Perturbation::Cap)?),
                PerturbationKind::Trig => {
                    Err(UsageError("cheeger sweeps need a minimal patch: --perturbation zero|cap".into()).into())
                }
            }
        })
        .collect::<Result<_, RunError>>()?;
    let points: Vec<_> = graphs.iter().flat_map(|g| outer.iter().map(move |&r| (g, r))).collect();
    Ok(sweep(&points, |&(gc, r)| {
        let patch = patch_from_graph(gc, (gc.radial_start(), r), None)?;
        let rep = divergence_ratio_report(&patch, inner, r)?;
        Ok(vec![Row::new()
            .int("m", gc.dims().m())
            .float("r_inner", rep.r_inner)
            .float("r_outer", rep.r_outer)
            .float("ratio", rep.ratio)
            .float("bound", rep.bound)
            .check("iso", rep.holds)])
    }))
}
