//! The check registry: each named check runs against a resolved model and
//! yields one outcome.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::manifest::{complex, expr, CheckSpec, ManifestError, Pair, Resolved};
use super::report::{CheckOutcome, Residual};
use crate::curvature::{holomorphic_log_harmonicity, negative_curvature_margin, LaplacianOptions, LeafField};
use crate::exprlang::{eval, Expr};
use crate::foliation::{differential, invert_local, second_cylinder, CylinderMap, FoliationError, FoliationModel, Provenance};
use crate::grid::{base_points, fiber_points};
use crate::holonomy::{exponential_fit, holonomy_growth_residual, periodicity_sides, HolonomyDatum, PeriodFamily};
use crate::invariants::{
    a_change_residual, admissibility_residuals, connection_coefficient, gamma_ambient, gamma_cyl, gamma_from_chart,
    graph_omega_closed_form, omega, pullback_suite, random_fiber_affine, shared_ambient_points, FiberAffineChange,
};
use crate::tolerances::{IDENTITY_TOL, INVERSION_TOL, PULLBACK_TOL, VANISH_TOL};
use crate::wirtinger::{fd_wirtinger, Dir, FdOptions, MultiIndex};

type C64 = Complex64;

/// Coefficient bound for seeded random fiber-affine changes.
const RANDOM_THETA_MODULUS: f64 = 0.3;
/// Tolerance for the finite-difference ω oracle.
const FD_ORACLE_TOL: f64 = 1e-6;
/// Tolerance for Δ log|h|², limited by the Laplacian stencil.
const LOG_HARMONIC_TOL: f64 = 1e-6;

/// Settings shared by every check in a run.
#[derive(Clone, Copy, Debug)]
pub struct RunSettings {
    pub jet_order: u8,
    /// Replaces the identity-class tolerances when set.
    pub tol: Option<f64>,
    pub seed: u64,
}

impl RunSettings {
    fn identity(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

type Residuals = BTreeMap<String, Residual>;

fn put(map: &mut Residuals, key: &str, r: Residual) {
    map.insert(key.to_string(), r);
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Runs one check. Errors inside a check become an outcome with status
/// "error"; they never abort the run.
pub fn run_check(spec: &CheckSpec, index: usize, resolved: &Resolved, settings: &RunSettings) -> CheckOutcome {
    let name = spec.name();
    let map = match resolved.map().with_jet_order(settings.jet_order) {
        Ok(m) => m,
        Err(e) => return CheckOutcome::error(name, e.to_string()),
    };
    match evaluate(spec, index, resolved, &map, settings) {
        Ok((residuals, message)) => {
            let outcome = CheckOutcome::judged(name, residuals);
            match message {
                Some(m) => outcome.with_message(m),
                None => outcome,
            }
        }
        Err(message) => CheckOutcome::error(name, message),
    }
}

fn graph_model(resolved: &Resolved) -> Result<&FoliationModel, String> {
    match resolved.model() {
        Some(m) if m.graph_function().is_some() => Ok(m),
        _ => Err(FoliationError::NotGraphModel.to_string()),
    }
}

fn parsed(index: usize, field: &str, text: &str) -> Result<Expr, String> {
    expr(&format!("checks[{index}].{field}"), text).map_err(|e: ManifestError| e.to_string())
}

fn grid_max<F>(map: &CylinderMap, f: F) -> Result<(f64, usize), String>
where
    F: Fn(C64, C64) -> Result<f64, String> + Sync,
{
    let values: Vec<Option<Result<f64, String>>> = map
        .domain()
        .grid_points()
        .par_iter()
        .map(|p| map.clear_of_singularity(p.x, p.y).then(|| f(p.x, p.y)))
        .collect();
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for v in values.into_iter().flatten() {
        worst = worst.max(v?);
        used += 1;
    }
    Ok((worst, used))
}

type Evaluated = Result<(Residuals, Option<String>), String>;

fn evaluate(spec: &CheckSpec, index: usize, resolved: &Resolved, map: &CylinderMap, s: &RunSettings) -> Evaluated {
    let mut r = Residuals::new();
    let zero = C64::new(0.0, 0.0);
    let domain = *map.domain();
    match spec {
        CheckSpec::BaseConditions => {
            let mut w: f64 = 0.0;
            let mut wy: f64 = 0.0;
            for x in domain.base_points() {
                let om = omega(map, (x, zero)).map_err(fail)?;
                w = w.max(om.value.norm());
                wy = wy.max(om.dy.norm());
            }
            put(&mut r, "max_omega", Residual::below(w, VANISH_TOL));
            put(&mut r, "max_omega_y", Residual::below(wy, VANISH_TOL));
        }
        CheckSpec::LeafwiseHolomorphy => {
            let (w, n) = grid_max(map, |x, y| omega(map, (x, y)).map(|o| o.dybar.norm()).map_err(fail))?;
            put(&mut r, "max_omega_ybar", Residual::below(w, VANISH_TOL));
            return Ok((r, Some(format!("{n} grid points"))));
        }
        CheckSpec::Tangency => {
            let (w, n) = grid_max(map, |x, y| {
                differential(map, (x, y)).map(|d| d.tangency_det().norm()).map_err(fail)
            })?;
            put(&mut r, "max_tangency_det", Residual::below(w, VANISH_TOL));
            return Ok((r, Some(format!("{n} grid points"))));
        }
        CheckSpec::Inversion => {
            let (w, n) = grid_max(map, |x, y| {
                let z = map.eval(x, y).map_err(fail)?;
                let seed = (x + C64::new(0.05, 0.0), y + C64::new(0.05, -0.05));
                let (x2, y2) = invert_local(map, z, seed).map_err(fail)?;
                Ok((x2 - x).norm().max((y2 - y).norm()) / (1.0 + x.norm().max(y.norm())))
            })?;
            put(&mut r, "max_relative_error", Residual::below(w, INVERSION_TOL));
            return Ok((r, Some(format!("{n} grid points"))));
        }
        CheckSpec::OmegaOracle { fd_step } => {
            let model = graph_model(resolved)?;
            let f = model.graph_function().expect("graph model");
            let opts = FdOptions {
                step: fd_step.unwrap_or(FdOptions::default().step),
                ..FdOptions::default()
            };
            let (jet_max, _) = grid_max(map, |x, y| {
                let om = omega(map, (x, y)).map_err(fail)?;
                Ok((om.value - graph_omega_closed_form(f, x, y).map_err(fail)?).norm())
            })?;
            let (fd_max, n) = grid_max(map, |x, y| {
                let fd = fd_omega(map, (x, y), opts)?;
                Ok((fd - graph_omega_closed_form(f, x, y).map_err(fail)?).norm())
            })?;
            put(&mut r, "jet", Residual::below(jet_max, VANISH_TOL));
            put(&mut r, "finite_difference", Residual::below(fd_max, FD_ORACLE_TOL));
            return Ok((r, Some(format!("{n} grid points, fd step {}", opts.step))));
        }
        CheckSpec::GammaIndependence { c, points } => {
            let model = graph_model(resolved)?;
            let other = second_cylinder(model, complex(*c)).map_err(fail)?.with_jet_order(s.jet_order).map_err(fail)?;
            let shared = shared_ambient_points(model, &[map, &other], *points);
            let diffs: Vec<Result<f64, String>> = shared
                .par_iter()
                .map(|(z, _)| {
                    let a = gamma_ambient(map, *z).map_err(fail)?.gamma_ambient;
                    let b = gamma_ambient(&other, *z).map_err(fail)?.gamma_ambient;
                    Ok((a[0] - b[0]).norm().max((a[1] - b[1]).norm()))
                })
                .collect();
            let worst = max_of(diffs)?;
            put(&mut r, "max_discrepancy", Residual::below(worst, s.identity(IDENTITY_TOL)));
            return Ok((r, Some(shared_note(shared.len(), *points))));
        }
        CheckSpec::ChartFormula { points } => {
            let model = graph_model(resolved)?;
            let mut worst: f64 = 0.0;
            for x in base_points(*points, domain.base_radius) {
                let chart = gamma_from_chart(model, x).map_err(fail)?;
                let cyl = gamma_cyl(map, (x, zero)).map_err(fail)?;
                worst = worst.max((chart - cyl).norm());
            }
            put(&mut r, "max_discrepancy", Residual::below(worst, s.identity(IDENTITY_TOL)));
        }
        CheckSpec::Pullback { thetas, random, points_per_theta } => {
            let mut changes = Vec::with_capacity(thetas.len() + random);
            for (k, t) in thetas.iter().enumerate() {
                let theta1 = parsed(index, &format!("thetas[{k}].theta1"), &t.theta1)?;
                let a = parsed(index, &format!("thetas[{k}].a"), &t.a)?;
                let b = parsed(index, &format!("thetas[{k}].b"), &t.b)?;
                changes.push(FiberAffineChange::new(theta1, a, b, &domain).map_err(fail)?);
            }
            let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(s.seed);
            for _ in 0..*random {
                changes.push(random_fiber_affine(&mut rng, RANDOM_THETA_MODULUS, &domain));
            }
            let summary = pullback_suite(map, &changes, *points_per_theta, &mut rng).map_err(fail)?;
            let tol = s.identity(PULLBACK_TOL);
            put(&mut r, "first_order", Residual::below(summary.max_first_order, tol));
            put(&mut r, "second_order", Residual::below(summary.max_second_order, tol));
            return Ok((r, Some(format!("{} changes, {} points", summary.changes, summary.points))));
        }
        CheckSpec::Admissibility { disk, slope, c } => {
            let (disk, slope) = match (disk, slope, c) {
                (Some(d), Some(sl), _) => (parsed(index, "disk", d)?, parsed(index, "slope", sl)?),
                (_, _, Some(c)) => {
                    let model = graph_model(resolved)?;
                    match second_cylinder(model, complex(*c)).map_err(fail)?.provenance() {
                        Provenance::SecondCylinder { disk, slope, .. } => (disk.clone(), slope.clone()),
                        _ => unreachable!("second cylinder provenance"),
                    }
                }
                _ => return Err("admissibility needs either disk and slope, or c".into()),
            };
            let mut rd: f64 = 0.0;
            let mut rs: f64 = 0.0;
            for x in domain.base_points() {
                let (a, b) = admissibility_residuals(map, &disk, &slope, x).map_err(fail)?;
                rd = rd.max(a);
                rs = rs.max(b);
            }
            let tol = s.identity(PULLBACK_TOL);
            put(&mut r, "disk", Residual::below(rd, tol));
            put(&mut r, "slope", Residual::below(rs, tol));
        }
        CheckSpec::AChange { c, points } | CheckSpec::Connection { c, points } => {
            let model = graph_model(resolved)?;
            let other = second_cylinder(model, complex(*c)).map_err(fail)?.with_jet_order(s.jet_order).map_err(fail)?;
            let shared = shared_ambient_points(model, &[map, &other], *points);
            let is_a = matches!(spec, CheckSpec::AChange { .. });
            let diffs: Vec<Result<f64, String>> = shared
                .par_iter()
                .map(|(z, _)| {
                    if is_a {
                        a_change_residual(map, &other, *z).map_err(fail)
                    } else {
                        let here = connection_coefficient(map, *z).map_err(fail)?;
                        let there = connection_coefficient(&other, *z).map_err(fail)?;
                        Ok((here - there).norm())
                    }
                })
                .collect();
            let worst = max_of(diffs)?;
            put(&mut r, "max_residual", Residual::below(worst, s.identity(IDENTITY_TOL)));
            return Ok((r, Some(shared_note(shared.len(), *points))));
        }
        CheckSpec::Periodicity { gamma, grid } => {
            let family = PeriodFamily::new(parsed(index, "gamma", gamma)?, "gamma", &domain).map_err(fail)?;
            let mut worst: f64 = 0.0;
            let mut at_origin = None;
            for x in base_points(grid.base, domain.base_radius) {
                for y in fiber_points(grid.fiber, domain.fiber_bound) {
                    if !map.clear_of_singularity(x, y) {
                        continue;
                    }
                    let sides = periodicity_sides(map, &family, (x, y)).map_err(fail)?;
                    worst = worst.max(sides.residual());
                    if x == zero && at_origin.is_none() {
                        at_origin = Some(sides);
                    }
                }
            }
            put(&mut r, "max_residual", Residual::below(worst, VANISH_TOL));
            if let Some(sides) = at_origin {
                put(&mut r, "jump_at_origin_re", Residual::info(sides.jump.re));
                put(&mut r, "jump_at_origin_im", Residual::info(sides.jump.im));
                put(&mut r, "predicted_at_origin_re", Residual::info(sides.predicted.re));
                put(&mut r, "predicted_at_origin_im", Residual::info(sides.predicted.im));
            }
        }
        CheckSpec::HolonomyGrowth { h, ys, generators } => {
            let h = parsed(index, "h", h)?;
            let generators: Vec<(C64, C64)> = generators.iter().map(|[g, m]| (complex(*g), complex(*m))).collect();
            let mut points: Vec<C64> = ys.iter().copied().map(complex).collect();
            for &(g, _) in &generators {
                points.extend(ys.iter().map(|&y| complex(y) + g));
            }
            let samples = sample_leaf(&h, &points)?;
            let datum = HolonomyDatum {
                generators,
                c: C64::new(1.0, 0.0),
                rho: zero,
                consistent: false,
            };
            let worst = holonomy_growth_residual(&samples, &datum).map_err(fail)?;
            put(&mut r, "max_residual", Residual::below(worst, s.identity(IDENTITY_TOL)));
        }
        CheckSpec::ExponentialFit { h, ys } => {
            let h = parsed(index, "h", h)?;
            let points: Vec<C64> = ys.iter().copied().map(complex).collect();
            let fit = exponential_fit(&sample_leaf(&h, &points)?).map_err(fail)?;
            put(&mut r, "fit_residual", Residual::below(fit.residual, s.identity(IDENTITY_TOL)));
            put(&mut r, "c_re", Residual::info(fit.c.re));
            put(&mut r, "c_im", Residual::info(fit.c.im));
            put(&mut r, "rho_re", Residual::info(fit.rho.re));
            put(&mut r, "rho_im", Residual::info(fit.rho.im));
        }
        CheckSpec::Curvature { phi, g, epsilon, samples } => {
            let phi = LeafField::from_expr(parsed(index, "phi", phi)?, zero);
            let g = LeafField::from_expr(parsed(index, "g", g)?, zero);
            let samples = points_of(samples);
            let m = negative_curvature_margin(&phi, &g, *epsilon, &samples, LaplacianOptions::default()).map_err(fail)?;
            put(&mut r, "margin", Residual::above(m.margin, 0.0));
        }
        CheckSpec::LogHarmonicity { field, samples, zeros, clearance } => {
            let f = LeafField::from_expr(parsed(index, "field", field)?, zero).with_zeros(points_of(zeros), *clearance);
            let worst = holomorphic_log_harmonicity(&f, &points_of(samples), LaplacianOptions::default()).map_err(fail)?;
            put(&mut r, "max_laplacian", Residual::below(worst, LOG_HARMONIC_TOL));
        }
    }
    Ok((r, None))
}

fn points_of(pairs: &[Pair]) -> Vec<C64> {
    pairs.iter().copied().map(complex).collect()
}

fn sample_leaf(h: &Expr, ys: &[C64]) -> Result<Vec<(C64, C64)>, String> {
    let x = C64::new(0.0, 0.0);
    ys.iter().map(|&y| eval(h, x, y).map(|v| (y, v)).map_err(fail)).collect()
}

fn max_of(values: Vec<Result<f64, String>>) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for v in values {
        worst = worst.max(v?);
    }
    Ok(worst)
}

fn shared_note(found: usize, requested: usize) -> String {
    if found < requested {
        format!("{found} of {requested} requested shared points available")
    } else {
        format!("{found} shared points")
    }
}

/// ω from finite-difference Wirtinger derivatives of the components.
fn fd_omega(map: &CylinderMap, at: (C64, C64), opts: FdOptions) -> Result<C64, String> {
    let component = |k: usize| move |x: C64, y: C64| eval(&map.components()[k], x, y).ok();
    let d = |k: usize, dir: Dir| {
        fd_wirtinger(component(k), at, MultiIndex::unit(dir), opts)
            .map(|e| e.value)
            .map_err(fail)
    };
    let dy = [d(0, Dir::Y)?, d(1, Dir::Y)?];
    let k = if dy[0].norm() > dy[1].norm() { 0 } else { 1 };
    Ok(C64::new(0.0, 2.0) * d(k, Dir::Xbar)? / dy[k])
}
