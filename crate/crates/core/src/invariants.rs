//! ω extraction, the forms λ_F, A_F, the tensor Γ, and their transformation
//! laws under a change of cylinder map.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprlang::{eval, eval_jet, Expr};
use crate::foliation::{
    differential, invert, invert_local, project_along_leaves, CylinderMap, Domain, FoliationError, FoliationModel,
    TransverseDisk,
};
use crate::grid::GridPoint;
use crate::linear::{antilinear_coefficients, RealLinear};
use crate::tolerances::{NONZERO_GAMMA_REL, TANGENCY_TOL, VANISH_TOL};
use crate::wirtinger::{Dir, JetError, MultiIndex, WirtingerJet};

type C64 = Complex64;

const TWO_I: C64 = C64::new(0.0, 2.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error("dF/dxbar is not tangent to the leaf at ({x}, {y}): |det| = {residual:e}")]
    TangencyViolated { x: C64, y: C64, residual: f64 },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("invalid fiber-affine change: {0}")]
    BadChange(String),
}

impl From<crate::exprlang::EvalError> for InvariantError {
    fn from(e: crate::exprlang::EvalError) -> Self {
        InvariantError::Foliation(e.into())
    }
}

/// ω and its leading partials at a cylinder point.
#[derive(Clone, Debug)]
pub struct OmegaJet {
    pub point: (C64, C64),
    pub jet: WirtingerJet,
    pub value: C64,
    pub dy: C64,
    pub dyy: C64,
    pub dybar: C64,
    pub dxbar: C64,
    /// Mismatch of ω·∂F/∂y = 2i·∂F/∂x̄ in the component not used for division.
    pub consistency: f64,
    pub tangency: f64,
    /// Component index (0 or 1) used for the division.
    pub component: usize,
}

/// ω = 2i·(∂F_k/∂x̄)/(∂F_k/∂y) with k maximizing |∂F_k/∂y|, ties to k = 2.
pub fn omega(map: &CylinderMap, at: (C64, C64)) -> Result<OmegaJet, InvariantError> {
    let dd = differential(map, at)?;
    let tangency = dd.tangency_det().norm();
    if tangency > TANGENCY_TOL {
        return Err(InvariantError::TangencyViolated {
            x: at.0,
            y: at.1,
            residual: tangency,
        });
    }
    let k = if dd.dy[0].norm() > dd.dy[1].norm() { 0 } else { 1 };
    let other = 1 - k;
    let fk = &dd.jets[k];
    let jet = fk.derivative(Dir::Xbar).div(&fk.derivative(Dir::Y))?.scale(TWO_I);
    let value = jet.value();
    let consistency = (value * dd.dy[other] - TWO_I * dd.dxbar[other]).norm();
    Ok(OmegaJet {
        point: at,
        value,
        dy: jet.d1(Dir::Y),
        dyy: jet.d(MultiIndex::new(0, 0, 2, 0)),
        dybar: jet.d1(Dir::Ybar),
        dxbar: jet.d1(Dir::Xbar),
        consistency,
        tangency,
        component: k,
        jet,
    })
}

/// Cylinder-coordinate coefficient of Γ, ∂²ω/∂y².
pub fn gamma_cyl(map: &CylinderMap, at: (C64, C64)) -> Result<C64, InvariantError> {
    Ok(omega(map, at)?.dyy)
}

/// 2i y² f_x̄ / f² for a graph model.
pub fn graph_omega_closed_form(f: &Expr, x: C64, y: C64) -> Result<C64, InvariantError> {
    let jf = eval_jet(f, (x, C64::new(0.0, 0.0)), 1)?;
    Ok(TWO_I * y * y * jf.d1(Dir::Xbar) / (jf.value() * jf.value()))
}

/// λ_F, A_F and Γ at an ambient point, built from F⁻¹.
#[derive(Clone, Debug)]
pub struct FormCoefficients {
    pub z: [C64; 2],
    pub preimage: (C64, C64),
    /// λ_F against ε: ω(F⁻¹(z)).
    pub lambda: C64,
    /// A_F against ε: −∂ω/∂y(F⁻¹(z)).
    pub a: C64,
    pub gamma_cyl: C64,
    /// Coefficients of dz̄_j ⊗ dz₂|leaf, j = 1, 2.
    pub gamma_ambient: [C64; 2],
    /// ∂F/∂y at the preimage, spanning the leaf.
    pub leaf: [C64; 2],
    inverse: RealLinear,
}

impl FormCoefficients {
    pub fn inverse_differential(&self, v: [C64; 2]) -> [C64; 2] {
        self.inverse.apply(v)
    }

    /// ε(Z) = conj(d(F⁻¹)₁(Z)).
    pub fn epsilon(&self, v: [C64; 2]) -> C64 {
        self.inverse.apply(v)[0].conj()
    }

    pub fn lambda_form(&self, v: [C64; 2]) -> C64 {
        self.lambda * self.epsilon(v)
    }

    pub fn a_form(&self, v: [C64; 2]) -> C64 {
        self.a * self.epsilon(v)
    }

    /// Γ(Z, Y) = ∂²ω/∂y² · d(F⁻¹)₂(Y) · conj(d(F⁻¹)₁(Z)).
    pub fn gamma(&self, z: [C64; 2], y: [C64; 2]) -> C64 {
        self.gamma_cyl * self.inverse.apply(y)[1] * self.epsilon(z)
    }

    /// |Γ(leaf, leaf)|, zero for a tensor that kills leafwise first slots.
    pub fn leaf_contraction(&self) -> f64 {
        self.gamma(self.leaf, self.leaf).norm()
    }
}

pub fn form_coefficients(map: &CylinderMap, z: [C64; 2], seed: (C64, C64)) -> Result<FormCoefficients, InvariantError> {
    let preimage = invert_local(map, z, seed)?;
    let om = omega(map, preimage)?;
    let dd = differential(map, preimage)?;
    let inverse = dd
        .real_linear()
        .inverse()
        .ok_or(FoliationError::SingularJacobian { z1: z[0], z2: z[1] })?;
    let mut fc = FormCoefficients {
        z,
        preimage,
        lambda: om.value,
        a: -om.dy,
        gamma_cyl: om.dyy,
        gamma_ambient: [C64::new(0.0, 0.0); 2],
        leaf: dd.dy,
        inverse,
    };
    let leaf = fc.leaf;
    let per_leaf = antilinear_coefficients(|v| fc.gamma(v, leaf));
    fc.gamma_ambient = per_leaf.map(|c| c / leaf[1]);
    Ok(fc)
}

pub fn gamma_ambient(map: &CylinderMap, z: [C64; 2]) -> Result<FormCoefficients, InvariantError> {
    form_coefficients(map, z, (z[0], z[1]))
}

pub fn a_form(map: &CylinderMap, z: [C64; 2]) -> Result<FormCoefficients, InvariantError> {
    form_coefficients(map, z, (z[0], z[1]))
}

/// θ(x, y) = (θ₁(x), a(x)·y + b(x)).
#[derive(Clone, Debug, PartialEq)]
pub struct FiberAffineChange {
    pub theta1: Expr,
    pub a: Expr,
    pub b: Expr,
}

impl FiberAffineChange {
    pub fn new(theta1: Expr, a: Expr, b: Expr, domain: &Domain) -> Result<Self, InvariantError> {
        for (name, e) in [("theta1", &theta1), ("a", &a), ("b", &b)] {
            if e.contains_y() {
                return Err(InvariantError::BadChange(format!("{name} depends on y")));
            }
        }
        let zero = C64::new(0.0, 0.0);
        for x in domain.base_points() {
            let t1 = eval_jet(&theta1, (x, zero), 1)?;
            if t1.d1(Dir::Xbar).norm() >= VANISH_TOL {
                return Err(InvariantError::BadChange(format!("theta1 not holomorphic at x = {x}")));
            }
            if eval(&a, x, zero)?.norm() < VANISH_TOL {
                return Err(InvariantError::BadChange(format!("a vanishes at x = {x}")));
            }
        }
        Ok(FiberAffineChange { theta1, a, b })
    }

    pub fn identity() -> Self {
        FiberAffineChange {
            theta1: Expr::x(),
            a: Expr::num(1.0),
            b: Expr::num(0.0),
        }
    }

    pub fn theta2(&self) -> Expr {
        self.a.clone().mul(Expr::y()).add(self.b.clone())
    }

    pub fn apply(&self, x: C64, y: C64) -> Result<(C64, C64), InvariantError> {
        Ok((eval(&self.theta1, x, y)?, eval(&self.a, x, y)? * y + eval(&self.b, x, y)?))
    }

    pub fn pull_back(&self, map: &CylinderMap) -> Result<CylinderMap, InvariantError> {
        Ok(map.compose_fiber_affine(&self.theta1, &self.a, &self.b)?)
    }
}

fn poly_in_x_xbar(coeffs: &[(u8, u8, C64)]) -> Expr {
    let mut acc: Option<Expr> = None;
    for &(p, q, c) in coeffs {
        let mut term = Expr::constant(c);
        if p > 0 {
            term = term.mul(Expr::x().pow(p as i32));
        }
        if q > 0 {
            term = term.mul(Expr::x().conj().pow(q as i32));
        }
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(term),
        });
    }
    acc.unwrap_or_else(|| Expr::num(0.0))
}

fn random_poly<R: Rng>(rng: &mut R, max_modulus: f64) -> Vec<(u8, u8, C64)> {
    let mut out = Vec::new();
    for p in 0..=3u8 {
        for q in 0..=(3 - p) {
            let r = max_modulus * rng.gen::<f64>().sqrt();
            let phase = std::f64::consts::TAU * rng.gen::<f64>();
            out.push((p, q, C64::from_polar(r, phase)));
        }
    }
    out
}

/// θ₁ = e^{iφ}x, a = 1 + P, b = Q with P, Q random polynomials in (x, x̄) of
/// degree ≤ 3 and coefficient modulus ≤ `max_modulus`. Draws are repeated
/// until |a| ≥ 0.1 on the base grid.
pub fn random_fiber_affine<R: Rng>(rng: &mut R, max_modulus: f64, domain: &Domain) -> FiberAffineChange {
    loop {
        let phase = std::f64::consts::TAU * rng.gen::<f64>();
        let theta1 = Expr::constant(C64::from_polar(1.0, phase)).mul(Expr::x());
        let a = Expr::num(1.0).add(poly_in_x_xbar(&random_poly(rng, max_modulus)));
        let b = poly_in_x_xbar(&random_poly(rng, max_modulus));
        let zero = C64::new(0.0, 0.0);
        let a_ok = domain
            .base_points()
            .iter()
            .all(|&x| eval(&a, x, zero).map(|v| v.norm() >= 0.1).unwrap_or(false));
        if a_ok {
            if let Ok(theta) = FiberAffineChange::new(theta1, a, b, domain) {
                return theta;
            }
        }
    }
}

/// Worst residuals of both pullback identities over a batch of changes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PullbackSummary {
    pub changes: usize,
    pub points: usize,
    pub max_first_order: f64,
    pub max_second_order: f64,
}

impl PullbackSummary {
    fn absorb(&mut self, first: f64, second: f64) {
        self.points += 1;
        self.max_first_order = self.max_first_order.max(first);
        self.max_second_order = self.max_second_order.max(second);
    }
}

/// Evaluates both pullback identities for each θ at `points_per_change`
/// random points (x, y) of the domain whose image θ(x, y) clears the
/// singular locus of `map`.
pub fn pullback_suite<R: Rng>(
    map: &CylinderMap,
    changes: &[FiberAffineChange],
    points_per_change: usize,
    rng: &mut R,
) -> Result<PullbackSummary, InvariantError> {
    let domain = *map.domain();
    let mut summary = PullbackSummary::default();
    for theta in changes {
        summary.changes += 1;
        let mut taken = 0;
        let mut attempts = 0;
        while taken < points_per_change {
            attempts += 1;
            if attempts > 1000 * points_per_change {
                return Err(InvariantError::BadChange("no sample point clears the singular locus".into()));
            }
            let x = C64::from_polar(
                domain.base_radius * rng.gen::<f64>().sqrt(),
                std::f64::consts::TAU * rng.gen::<f64>(),
            );
            let b = domain.fiber_bound;
            let y = C64::new(rng.gen_range(-b..=b), rng.gen_range(-b..=b));
            let image = theta.apply(x, y)?;
            if !map.clear_of_singularity(image.0, image.1) {
                continue;
            }
            let first = pullback_identity_residual(map, theta, (x, y))?;
            let second = second_deriv_invariance_residual(map, theta, (x, y))?;
            summary.absorb(first, second);
            taken += 1;
        }
    }
    Ok(summary)
}

struct Pulled {
    omega_tilde: OmegaJet,
    omega_at_theta: OmegaJet,
    theta2_y: C64,
    theta2_xbar: C64,
    theta1_x: C64,
}

fn pulled(map: &CylinderMap, theta: &FiberAffineChange, at: (C64, C64)) -> Result<Pulled, InvariantError> {
    let composed = theta.pull_back(map)?;
    let omega_tilde = omega(&composed, at)?;
    let t1 = eval_jet(&theta.theta1, at, 1)?;
    let t2 = eval_jet(&theta.theta2(), at, 1)?;
    let image = (t1.value(), t2.value());
    let omega_at_theta = omega(map, image)?;
    Ok(Pulled {
        omega_tilde,
        omega_at_theta,
        theta2_y: t2.d1(Dir::Y),
        theta2_xbar: t2.d1(Dir::Xbar),
        theta1_x: t1.d1(Dir::X),
    })
}

/// |∂θ₂/∂y·ω̃ − ω∘θ·conj(θ₁′) − 2i·∂θ₂/∂x̄| with ω̃ extracted from F∘θ.
pub fn pullback_identity_residual(map: &CylinderMap, theta: &FiberAffineChange, at: (C64, C64)) -> Result<f64, InvariantError> {
    let p = pulled(map, theta, at)?;
    Ok((p.theta2_y * p.omega_tilde.value - p.omega_at_theta.value * p.theta1_x.conj() - TWO_I * p.theta2_xbar).norm())
}

/// |∂²ω̃/∂y² − ∂²ω/∂y²∘θ · ∂θ₂/∂y · conj(θ₁′)|.
pub fn second_deriv_invariance_residual(
    map: &CylinderMap,
    theta: &FiberAffineChange,
    at: (C64, C64),
) -> Result<f64, InvariantError> {
    let p = pulled(map, theta, at)?;
    Ok((p.omega_tilde.dyy - p.omega_at_theta.dyy * p.theta2_y * p.theta1_x.conj()).norm())
}

/// Residuals of the two ∂̄-conditions on a disk function β and a slope σ:
/// r_disk = |−2i ∂β/∂x̄ − ω(x, β)|, r_slope = |∂ω/∂y(x, β)·σ + 2i ∂σ/∂x̄|.
pub fn admissibility_residuals(map: &CylinderMap, disk: &Expr, slope: &Expr, x: C64) -> Result<(f64, f64), InvariantError> {
    let zero = C64::new(0.0, 0.0);
    let beta = eval_jet(disk, (x, zero), 1)?;
    let sigma = eval_jet(slope, (x, zero), 1)?;
    let om = omega(map, (x, beta.value()))?;
    let r_disk = (-TWO_I * beta.d1(Dir::Xbar) - om.value).norm();
    let r_slope = (om.dy * sigma.value() + TWO_I * sigma.d1(Dir::Xbar)).norm();
    Ok((r_disk, r_slope))
}

fn transverse_disk_of(map: &CylinderMap) -> Result<TransverseDisk, InvariantError> {
    if !map.is_vertical() {
        return Err(FoliationError::NonVerticalLeaves.into());
    }
    let d = map.components()[1].substitute_y(&Expr::num(0.0));
    Ok(TransverseDisk::new(d, map.domain())?)
}

const REAL_BASIS: [[C64; 2]; 4] = [
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    [C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    [C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
];

/// max over a real basis of |A_{F′}(Z) − A_F(Z) + (π̃*A_F)(Z)|, π̃ the
/// projection along leaves onto F′(·, 0).
pub fn a_change_residual(map: &CylinderMap, other: &CylinderMap, z: [C64; 2]) -> Result<f64, InvariantError> {
    let disk = transverse_disk_of(other)?;
    let slope = disk.value_and_slope(z[0])?.1;
    let projected = project_along_leaves(other, &disk, z)?;
    let here = a_form(map, z)?;
    let there = a_form(map, projected)?;
    let moved = a_form(other, z)?;
    // π̃(z) = (z₁, d(z₁)) with d holomorphic.
    let d_pi = |v: [C64; 2]| [v[0], slope * v[0]];
    Ok(REAL_BASIS
        .iter()
        .map(|&v| (moved.a_form(v) - here.a_form(v) + there.a_form(d_pi(v))).norm())
        .fold(0.0, f64::max))
}

/// η_F = (i/2)·A_F + ∂̄ log h_F against ε, with h_F = d(F⁻¹)₂ on the vertical
/// field ∂/∂z₂.
pub fn connection_coefficient(map: &CylinderMap, z: [C64; 2]) -> Result<C64, InvariantError> {
    if !map.is_vertical() {
        return Err(FoliationError::NonVerticalLeaves.into());
    }
    let fc = a_form(map, z)?;
    let dd = differential(map, fc.preimage)?;
    let f2 = &dd.jets[1];
    let f2_y = f2.d1(Dir::Y);
    let f2_yy = f2.d(MultiIndex::new(0, 0, 2, 0));
    let f2_yxbar = f2.d(MultiIndex::new(0, 1, 1, 0));
    let g2_zbar1 = antilinear_coefficients(|v| fc.inverse_differential(v)[1])[0];
    let dbar_log_h = -(f2_yy * g2_zbar1 + f2_yxbar) / f2_y;
    Ok(C64::new(0.0, 0.5) * fc.a + dbar_log_h)
}

/// −2i·(∂β₂/∂y)⁻¹·∂³β₂/∂x̄∂y² at (x, 0), β₂ = w·f/(f−w) the leaf coordinate
/// in the identity foliated chart.
pub fn gamma_from_chart(model: &FoliationModel, x: C64) -> Result<C64, InvariantError> {
    let f = model.graph_function().ok_or(FoliationError::NotGraphModel)?;
    let beta2 = Expr::y().mul(f.clone()).div(f.clone().sub(Expr::y()));
    let jet = eval_jet(&beta2, (x, C64::new(0.0, 0.0)), 3)?;
    Ok(-TWO_I * jet.d(MultiIndex::new(0, 1, 2, 0)) / jet.d1(Dir::Y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HyperbolicEvidence,
    CylinderExhibited,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::HyperbolicEvidence => "hyperbolic-evidence",
            Verdict::CylinderExhibited => "cylinder-exhibited",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub row: usize,
    pub col: usize,
    pub x: C64,
    pub y: C64,
    pub omega: C64,
    pub omega_y: C64,
    pub gamma: C64,
    pub a_coefficient: C64,
    pub tangency_res: f64,
    pub holo_res: f64,
    pub consistency_res: f64,
    pub f_dbar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_res: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcludedPoint {
    pub row: usize,
    pub col: usize,
    pub x: C64,
    pub y: C64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub max_gamma: f64,
    pub max_omega: f64,
    pub max_omega_ybar: f64,
    pub max_tangency: f64,
    pub max_consistency: f64,
    pub max_f_dbar: f64,
    /// max |ω| and |∂ω/∂y| over the base points at y = 0.
    pub base_max_omega: f64,
    pub base_max_omega_y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorReport {
    pub points: Vec<PointRecord>,
    pub excluded: Vec<ExcludedPoint>,
    pub summary: ResidualSummary,
    pub gamma_threshold: f64,
    pub verdict: Verdict,
}

fn sample_point(map: &CylinderMap, f: Option<&Expr>, p: &GridPoint) -> Result<PointRecord, String> {
    if !map.clear_of_singularity(p.x, p.y) {
        return Err("inside singular clearance".into());
    }
    let om = omega(map, (p.x, p.y)).map_err(|e| e.to_string())?;
    let dd = differential(map, (p.x, p.y)).map_err(|e| e.to_string())?;
    let oracle_res = match f {
        Some(f) => Some((om.value - graph_omega_closed_form(f, p.x, p.y).map_err(|e| e.to_string())?).norm()),
        None => None,
    };
    Ok(PointRecord {
        row: p.row,
        col: p.col,
        x: p.x,
        y: p.y,
        omega: om.value,
        omega_y: om.dy,
        gamma: om.dyy,
        a_coefficient: -om.dy,
        tangency_res: om.tangency,
        holo_res: om.dybar.norm(),
        consistency_res: om.consistency,
        f_dbar: dd.dxbar[0].norm().max(dd.dxbar[1].norm()),
        oracle_res,
    })
}

/// Samples ω and Γ over the model's grid and issues a verdict.
pub fn certify(model: &FoliationModel, jet_order: u8) -> Result<TensorReport, InvariantError> {
    let map = model.cylinder_map().with_jet_order(jet_order)?;
    let f = model.graph_function();
    let grid = model.domain.grid_points();
    let results: Vec<Result<PointRecord, ExcludedPoint>> = grid
        .par_iter()
        .map(|p| {
            sample_point(&map, f, p).map_err(|reason| ExcludedPoint {
                row: p.row,
                col: p.col,
                x: p.x,
                y: p.y,
                reason,
            })
        })
        .collect();
    let mut points = Vec::with_capacity(results.len());
    let mut excluded = Vec::new();
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => excluded.push(e),
        }
    }
    let mut summary = ResidualSummary::default();
    for p in &points {
        summary.max_gamma = summary.max_gamma.max(p.gamma.norm());
        summary.max_omega = summary.max_omega.max(p.omega.norm());
        summary.max_omega_ybar = summary.max_omega_ybar.max(p.holo_res);
        summary.max_tangency = summary.max_tangency.max(p.tangency_res);
        summary.max_consistency = summary.max_consistency.max(p.consistency_res);
        summary.max_f_dbar = summary.max_f_dbar.max(p.f_dbar);
        if let Some(r) = p.oracle_res {
            summary.oracle_max = Some(summary.oracle_max.unwrap_or(0.0).max(r));
        }
    }
    let base: Vec<OmegaJet> = model
        .domain
        .base_points()
        .par_iter()
        .map(|&x| omega(&map, (x, C64::new(0.0, 0.0))))
        .collect::<Result<_, _>>()?;
    for om in &base {
        summary.base_max_omega = summary.base_max_omega.max(om.value.norm());
        summary.base_max_omega_y = summary.base_max_omega_y.max(om.dy.norm());
    }
    let d = &model.domain;
    let gamma_threshold = NONZERO_GAMMA_REL * 1f64.max(d.base_radius).max(d.fiber_bound);
    let verdict = if points.is_empty() {
        Verdict::Inconclusive
    } else if summary.max_gamma > gamma_threshold {
        Verdict::HyperbolicEvidence
    } else if summary.max_gamma < VANISH_TOL && summary.max_f_dbar < VANISH_TOL {
        Verdict::CylinderExhibited
    } else {
        Verdict::Inconclusive
    };
    Ok(TensorReport {
        points,
        excluded,
        summary,
        gamma_threshold,
        verdict,
    })
}

/// Ambient points F(x, y) for the grid points that are clear of the
/// singular locus of every map in `maps`.
pub fn shared_ambient_points(model: &FoliationModel, maps: &[&CylinderMap], count: usize) -> Vec<([C64; 2], (C64, C64))> {
    let base = model.cylinder_map();
    let mut out = Vec::new();
    for p in model.domain.grid_points() {
        if out.len() == count {
            break;
        }
        if !base.clear_of_singularity(p.x, p.y) {
            continue;
        }
        let Ok(z) = base.eval(p.x, p.y) else { continue };
        let usable = maps.iter().all(|m| {
            invert(m, z)
                .map(|(x, y)| m.clear_of_singularity(x, y))
                .unwrap_or(false)
        });
        if usable {
            out.push((z, (p.x, p.y)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;
    use crate::foliation::second_cylinder;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn graph(src: &str) -> FoliationModel {
        FoliationModel::graph(parse(src).unwrap(), Domain::default()).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn omega_on_graph() {
        let map = graph("conj(x)+2").cylinder_map();
        let om = omega(&map, (c(0.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!(close(om.value, c(0.0, 0.5), 1e-15));
        assert!(close(om.dy, c(0.0, 1.0), 1e-15));
        assert!(close(om.dyy, c(0.0, 1.0), 1e-14));
        assert_eq!(om.component, 1);
        let g = gamma_cyl(&map, (c(0.5, 0.0), c(-1.0, 0.0))).unwrap();
        assert!(close(g, c(0.0, 0.64), 1e-14));
    }

    #[test]
    fn omega_vanishes_for_holomorphic_models() {
        let map = graph("x+2").cylinder_map();
        assert_eq!(omega(&map, (c(0.3, 0.1), c(1.0, -2.0))).unwrap().value, c(0.0, 0.0));
        let prod = FoliationModel::product(Domain::default()).unwrap().cylinder_map();
        assert_eq!(omega(&prod, (c(0.3, 0.1), c(1.0, -2.0))).unwrap().value, c(0.0, 0.0));
    }

    #[test]
    fn tangency_violation_detected() {
        let map = CylinderMap::leafwise(parse("x+conj(x)*y").unwrap(), parse("y").unwrap(), Domain::default()).unwrap();
        let err = omega(&map, (c(0.2, 0.0), c(1.0, 0.0))).unwrap_err();
        assert!(matches!(err, InvariantError::TangencyViolated { .. }));
    }

    #[test]
    fn forms_at_graph_point() {
        let map = graph("conj(x)+2").cylinder_map();
        let z = [c(0.0, 0.0), c(2.0 / 3.0, 0.0)];
        let fc = a_form(&map, z).unwrap();
        assert!(close(fc.a, c(0.0, -1.0), 1e-12));
        assert!(close(fc.lambda, c(0.0, 0.5), 1e-12));
        let e_x = [c(1.0, 0.0), c(0.0, 0.0)];
        let dfx = map.jets(c(0.0, 0.0), c(1.0, 0.0), 1).unwrap();
        let fx = [dfx[0].d1(Dir::X) + dfx[0].d1(Dir::Xbar), dfx[1].d1(Dir::X) + dfx[1].d1(Dir::Xbar)];
        assert!(close(fc.gamma(fx, fc.leaf), c(0.0, 1.0), 1e-12));
        assert!(fc.leaf_contraction() < 1e-12);
        // ε is antilinear: ε(i Z) = −i ε(Z).
        let ie_x = [c(0.0, 1.0), c(0.0, 0.0)];
        assert!(close(fc.epsilon(ie_x), -c(0.0, 1.0) * fc.epsilon(e_x), 1e-14));
    }

    #[test]
    fn forms_vanish_on_transverse_disk() {
        let map = graph("conj(x)+2").cylinder_map();
        let fc = a_form(&map, [c(0.3, 0.2), c(0.0, 0.0)]).unwrap();
        assert!(fc.lambda.norm() < 1e-15 && fc.a.norm() < 1e-15);
    }

    #[test]
    fn pullback_examples() {
        let map = graph("conj(x)+2").cylinder_map();
        let d = Domain::default();
        let shear = FiberAffineChange::new(parse("x").unwrap(), parse("1").unwrap(), parse("x*conj(x)").unwrap(), &d).unwrap();
        assert!(pullback_identity_residual(&map, &shear, (c(0.0, 0.0), c(1.0, 0.0))).unwrap() < 1e-10);
        assert!(second_deriv_invariance_residual(&map, &shear, (c(0.3, 0.0), c(1.0, 0.0))).unwrap() < 1e-9);
        let id = FiberAffineChange::identity();
        assert_eq!(pullback_identity_residual(&map, &id, (c(0.2, 0.1), c(0.5, 0.5))).unwrap(), 0.0);
        assert_eq!(second_deriv_invariance_residual(&map, &id, (c(0.2, 0.1), c(0.5, 0.5))).unwrap(), 0.0);
        let scale = FiberAffineChange::new(parse("x").unwrap(), parse("2").unwrap(), parse("0").unwrap(), &d).unwrap();
        assert!(pullback_identity_residual(&map, &scale, (c(0.2, 0.1), c(0.5, 0.5))).unwrap() < 1e-10);
    }

    #[test]
    fn admissible_pair_from_second_cylinder() {
        let m = graph("conj(x)+2");
        let map = m.cylinder_map();
        let f = m.graph_function().unwrap().clone();
        let beta = parse("1").unwrap().mul(f.clone()).div(f.clone().sub(parse("1").unwrap()));
        let sigma = beta.clone().add(f.clone()).pow(2).div(f.pow(2));
        for x in m.domain.base_points() {
            let (r1, r2) = admissibility_residuals(&map, &beta, &sigma, x).unwrap();
            assert!(r1 < 1e-9 && r2 < 1e-9, "{x}: {r1} {r2}");
        }
        let prod = FoliationModel::product(Domain::default()).unwrap().cylinder_map();
        let (r1, r2) = admissibility_residuals(&prod, &parse("conj(x)").unwrap(), &parse("1").unwrap(), c(0.1, 0.2)).unwrap();
        assert!((r1 - 2.0).abs() < 1e-12 && r2 == 0.0);
    }

    #[test]
    fn change_law_and_connection() {
        let m = graph("conj(x)+2");
        let map = m.cylinder_map();
        let other = second_cylinder(&m, c(1.0, 0.0)).unwrap();
        let z = map.eval(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(a_change_residual(&map, &other, z).unwrap() < 1e-8);
        let eta = connection_coefficient(&map, z).unwrap();
        let eta2 = connection_coefficient(&other, z).unwrap();
        assert!(close(eta, eta2, 1e-8), "{eta} vs {eta2}");
        let g1 = gamma_ambient(&map, z).unwrap();
        let g2 = gamma_ambient(&other, z).unwrap();
        assert!(close(g1.gamma_ambient[0], g2.gamma_ambient[0], 1e-8));
    }

    #[test]
    fn chart_formula() {
        let m = graph("conj(x)+2");
        assert!(close(gamma_from_chart(&m, c(0.0, 0.0)).unwrap(), c(0.0, 1.0), 1e-14));
        assert!(close(gamma_from_chart(&m, c(0.5, 0.0)).unwrap(), c(0.0, 0.64), 1e-14));
        assert_eq!(gamma_from_chart(&graph("x+2"), c(0.3, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn verdicts() {
        let r = certify(&graph("conj(x)+2"), 3).unwrap();
        assert_eq!(r.verdict, Verdict::HyperbolicEvidence);
        assert!(r.summary.oracle_max.unwrap() < 1e-10);
        let r = certify(&graph("x/2+2"), 3).unwrap();
        assert_eq!(r.verdict, Verdict::CylinderExhibited);
        let r = certify(&FoliationModel::product(Domain::default()).unwrap(), 3).unwrap();
        assert_eq!(r.verdict, Verdict::CylinderExhibited);
    }
}
