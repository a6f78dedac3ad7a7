//! Foliated surface models and their cylinder maps.
//!
//! A cylinder map F: 𝔻×ℂ → X sends each fiber {x}×ℂ onto a leaf. Models
//! supply F in closed form as a pair of expressions; the built-in models have
//! vertical leaves, so F₁ = x and the leaf through a point is read off its
//! first coordinate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprlang::{assert_y_holomorphic, eval, eval_jet, EvalError, Expr, SourceSpan};
use crate::grid::{base_points, grid_points, GridPoint, GridSpec};
use crate::linear::RealLinear;
use crate::tolerances::{
    BASE_RADIUS, FIBER_BOUND, INVERSION_TOL, NEWTON_MAX_ITER, NEWTON_STEP_TOL, SINGULAR_CLEARANCE,
    TRIVIALIZATION_TOL, VANISH_TOL,
};
use crate::wirtinger::{Dir, JetError, MultiIndex, WirtingerJet, DEFAULT_ORDER, MAX_ORDER};

type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoliationError {
    #[error("validation failed: {invariant} at x = {x}, y = {y}")]
    ValidationFailed { invariant: String, x: C64, y: C64 },
    #[error("component F{component} applies conj to a y-dependent subtree at {span}")]
    NotYHolomorphic { component: usize, span: SourceSpan },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("Newton inversion did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("singular Jacobian while inverting at z = ({z1}, {z2})")]
    SingularJacobian { z1: C64, z2: C64 },
    #[error("operation requires a graph model")]
    NotGraphModel,
    #[error("operation requires vertical leaves (F1 = x)")]
    NonVerticalLeaves,
    #[error("point ({x}, {y}) lies inside the singular clearance")]
    InsideClearance { x: C64, y: C64 },
    #[error("invalid domain: {0}")]
    BadDomain(String),
    #[error("jet order {0} unsupported (need 3..={MAX_ORDER})")]
    BadJetOrder(u8),
}

impl FoliationError {
    fn invalid(invariant: impl Into<String>, x: C64, y: C64) -> Self {
        FoliationError::ValidationFailed {
            invariant: invariant.into(),
            x,
            y,
        }
    }
}

/// Base disk radius r, fiber box half-width R, singular clearance δ and the
/// validation grid size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub base_radius: f64,
    pub fiber_bound: f64,
    pub clearance: f64,
    #[serde(default)]
    pub grid: GridSpec,
}

impl Default for Domain {
    fn default() -> Self {
        Self {
            base_radius: BASE_RADIUS,
            fiber_bound: FIBER_BOUND,
            clearance: SINGULAR_CLEARANCE,
            grid: GridSpec::default(),
        }
    }
}

impl Domain {
    pub fn check(&self) -> Result<(), FoliationError> {
        if !(self.base_radius > 0.0 && self.base_radius <= 1.0) {
            return Err(FoliationError::BadDomain(format!("base radius {} not in (0, 1]", self.base_radius)));
        }
        if !(self.fiber_bound > 0.0 && self.fiber_bound.is_finite()) {
            return Err(FoliationError::BadDomain(format!("fiber bound {} must be positive", self.fiber_bound)));
        }
        if !(self.clearance > 0.0 && self.clearance < 1.0) {
            return Err(FoliationError::BadDomain(format!("clearance {} not in (0, 1)", self.clearance)));
        }
        if self.grid.is_empty() {
            return Err(FoliationError::BadDomain("empty grid".into()));
        }
        Ok(())
    }

    pub fn base_points(&self) -> Vec<C64> {
        base_points(self.grid.base, self.base_radius)
    }

    pub fn grid_points(&self) -> Vec<GridPoint> {
        grid_points(self.grid, self.base_radius, self.fiber_bound)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    /// X = (𝔻×ℙ¹) ∖ graph(f), foliated by the vertical lines.
    Graph { f: Expr },
    Product,
    ExplicitCylinder { f1: Expr, f2: Expr },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoliationModel {
    pub kind: ModelKind,
    pub domain: Domain,
}

fn jet_at(e: &Expr, x: C64, y: C64, order: u8) -> Result<WirtingerJet, FoliationError> {
    Ok(eval_jet(e, (x, y), order)?)
}

fn is_pole(err: &FoliationError) -> bool {
    matches!(
        err,
        FoliationError::Eval(EvalError {
            kind: JetError::DivisionNearPole { .. } | JetError::LogBranchNearZero { .. },
            ..
        })
    )
}

impl FoliationModel {
    pub fn graph(f: Expr, domain: Domain) -> Result<Self, FoliationError> {
        Self::new(ModelKind::Graph { f }, domain)
    }

    pub fn product(domain: Domain) -> Result<Self, FoliationError> {
        Self::new(ModelKind::Product, domain)
    }

    pub fn explicit(f1: Expr, f2: Expr, domain: Domain) -> Result<Self, FoliationError> {
        Self::new(ModelKind::ExplicitCylinder { f1, f2 }, domain)
    }

    pub fn new(kind: ModelKind, domain: Domain) -> Result<Self, FoliationError> {
        let m = FoliationModel { kind, domain };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), FoliationError> {
        self.domain.check()?;
        match &self.kind {
            ModelKind::Product => Ok(()),
            ModelKind::Graph { f } => {
                let zero = C64::new(0.0, 0.0);
                if f.contains_y() {
                    return Err(FoliationError::invalid("f must depend on x only", zero, zero));
                }
                let delta = self.domain.clearance;
                for x in self.domain.base_points() {
                    let v = eval(f, x, zero)?;
                    if v.norm() < delta {
                        return Err(FoliationError::invalid(format!("|f| = {:e} below clearance {delta}", v.norm()), x, zero));
                    }
                    if v.norm() > 1.0 / delta {
                        return Err(FoliationError::invalid(format!("|f| = {:e} above 1/clearance", v.norm()), x, zero));
                    }
                }
                Ok(())
            }
            ModelKind::ExplicitCylinder { f1, f2 } => {
                let map = CylinderMap::leafwise(f1.clone(), f2.clone(), self.domain)?;
                validate_transverse_disk(&map)
            }
        }
    }

    pub fn cylinder_map(&self) -> CylinderMap {
        let domain = self.domain;
        match &self.kind {
            ModelKind::Product => CylinderMap {
                components: [Expr::x(), Expr::y()],
                provenance: Provenance::Product,
                pole: None,
                closed_inverse: Some([Expr::x(), Expr::y()]),
                vertical: true,
                domain,
                jet_order: DEFAULT_ORDER,
            },
            ModelKind::Graph { f } => {
                let pole = Expr::y().add(f.clone());
                let f2 = f.clone().mul(Expr::y()).div(pole.clone());
                let g2 = Expr::y().mul(f.clone()).div(f.clone().sub(Expr::y()));
                CylinderMap {
                    components: [Expr::x(), f2],
                    provenance: Provenance::Graph { f: f.clone() },
                    pole: Some(pole),
                    closed_inverse: Some([Expr::x(), g2]),
                    vertical: true,
                    domain,
                    jet_order: DEFAULT_ORDER,
                }
            }
            ModelKind::ExplicitCylinder { f1, f2 } => CylinderMap {
                components: [f1.clone(), f2.clone()],
                provenance: Provenance::Explicit,
                pole: None,
                closed_inverse: None,
                vertical: *f1 == Expr::x(),
                domain,
                jet_order: DEFAULT_ORDER,
            },
        }
    }

    pub fn graph_function(&self) -> Option<&Expr> {
        match &self.kind {
            ModelKind::Graph { f } => Some(f),
            _ => None,
        }
    }
}

/// F(·,0) must be a holomorphic disk and t = ∂F/∂y(·,0) a holomorphic
/// trivialization along it.
fn validate_transverse_disk(map: &CylinderMap) -> Result<(), FoliationError> {
    let zero = C64::new(0.0, 0.0);
    let mixed = MultiIndex::new(0, 1, 1, 0);
    for x in map.domain.base_points() {
        let jets = map.jets(x, zero, 2)?;
        for jet in &jets {
            if jet.d1(Dir::Xbar).norm() >= VANISH_TOL {
                return Err(FoliationError::invalid("F(.,0) is not a holomorphic disk", x, zero));
            }
            if jet.d(mixed).norm() > TRIVIALIZATION_TOL {
                return Err(FoliationError::invalid("trivialization dF/dy(.,0) is not holomorphic", x, zero));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Product,
    Graph { f: Expr },
    Explicit,
    /// Built along the disk {(x, c)} with unit trivialization; `disk` = θ₂(x,0),
    /// `slope` = ∂θ₂/∂y.
    SecondCylinder { c: C64, disk: Expr, slope: Expr },
    /// F∘θ for a fiber-affine θ.
    Composed,
    /// Validated only leafwise (y-holomorphic immersion), not as a member of 𝒞.
    Leafwise,
}

/// A cylinder map given by two expressions in (x, y).
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderMap {
    components: [Expr; 2],
    provenance: Provenance,
    pole: Option<Expr>,
    closed_inverse: Option<[Expr; 2]>,
    vertical: bool,
    domain: Domain,
    jet_order: u8,
}

impl CylinderMap {
    /// Builds a map that is only checked leafwise: no conj(y) and
    /// ∂F/∂y ≠ 0 on the grid. Points where F hits a pole are skipped.
    pub fn leafwise(f1: Expr, f2: Expr, domain: Domain) -> Result<Self, FoliationError> {
        domain.check()?;
        for (k, e) in [&f1, &f2].into_iter().enumerate() {
            assert_y_holomorphic(e).map_err(|span| FoliationError::NotYHolomorphic { component: k + 1, span })?;
        }
        let map = CylinderMap {
            vertical: f1 == Expr::x(),
            components: [f1, f2],
            provenance: Provenance::Leafwise,
            pole: None,
            closed_inverse: None,
            domain,
            jet_order: DEFAULT_ORDER,
        };
        for p in domain.grid_points() {
            let jets = match map.jets(p.x, p.y, 1) {
                Ok(j) => j,
                Err(e) if is_pole(&e) => continue,
                Err(e) => return Err(e),
            };
            let fy = jets[0].d1(Dir::Y).norm().max(jets[1].d1(Dir::Y).norm());
            if fy < VANISH_TOL {
                return Err(FoliationError::invalid("dF/dy vanishes (not an immersion along leaves)", p.x, p.y));
            }
        }
        Ok(map)
    }

    pub fn with_jet_order(mut self, order: u8) -> Result<Self, FoliationError> {
        if !(3..=MAX_ORDER).contains(&order) {
            return Err(FoliationError::BadJetOrder(order));
        }
        self.jet_order = order;
        Ok(self)
    }

    pub fn jet_order(&self) -> u8 {
        self.jet_order
    }

    pub fn components(&self) -> &[Expr; 2] {
        &self.components
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_vertical(&self) -> bool {
        self.vertical
    }

    /// Closed-form inverse (G₁, G₂) as expressions in (x, y) = (z₁, z₂).
    pub fn closed_inverse(&self) -> Option<&[Expr; 2]> {
        self.closed_inverse.as_ref()
    }

    pub fn eval(&self, x: C64, y: C64) -> Result<[C64; 2], FoliationError> {
        Ok([eval(&self.components[0], x, y)?, eval(&self.components[1], x, y)?])
    }

    pub fn jets(&self, x: C64, y: C64, order: u8) -> Result<[WirtingerJet; 2], FoliationError> {
        Ok([
            jet_at(&self.components[0], x, y, order)?,
            jet_at(&self.components[1], x, y, order)?,
        ])
    }

    /// True when (x, y) is at least the clearance away from the singular locus.
    pub fn clear_of_singularity(&self, x: C64, y: C64) -> bool {
        match &self.pole {
            None => true,
            Some(p) => eval(p, x, y).map(|v| v.norm() >= self.domain.clearance).unwrap_or(false),
        }
    }

    pub fn require_clear(&self, x: C64, y: C64) -> Result<(), FoliationError> {
        if self.clear_of_singularity(x, y) {
            Ok(())
        } else {
            Err(FoliationError::InsideClearance { x, y })
        }
    }

    /// F∘θ with θ(x, y) = (θ₁(x), a(x)·y + b(x)).
    pub fn compose_fiber_affine(&self, theta1: &Expr, a: &Expr, b: &Expr) -> Result<CylinderMap, FoliationError> {
        let zero = C64::new(0.0, 0.0);
        for (name, e) in [("theta1", theta1), ("a", a), ("b", b)] {
            if e.contains_y() {
                return Err(FoliationError::invalid(format!("{name} must not depend on y"), zero, zero));
            }
        }
        let theta2 = a.clone().mul(Expr::y()).add(b.clone());
        let components = self.components.clone().map(|c| c.substitute(theta1, &theta2));
        let identity_base = *theta1 == Expr::x();
        let closed_inverse = match (&self.closed_inverse, identity_base) {
            (Some([g1, g2]), true) => Some([g1.clone(), g2.clone().sub(b.clone()).div(a.clone())]),
            _ => None,
        };
        Ok(CylinderMap {
            vertical: self.vertical && identity_base,
            components,
            provenance: Provenance::Composed,
            pole: self.pole.as_ref().map(|p| p.substitute(theta1, &theta2)),
            closed_inverse,
            domain: self.domain,
            jet_order: self.jet_order,
        })
    }
}

/// First-order block data of dF at a point, plus the full component jets.
#[derive(Clone, Debug)]
pub struct DiffData {
    pub point: (C64, C64),
    pub jets: [WirtingerJet; 2],
    pub dx: [C64; 2],
    pub dxbar: [C64; 2],
    pub dy: [C64; 2],
    pub dybar: [C64; 2],
}

impl DiffData {
    fn from_jets(point: (C64, C64), jets: [WirtingerJet; 2]) -> Self {
        let col = |d: Dir| [jets[0].d1(d), jets[1].d1(d)];
        DiffData {
            point,
            dx: col(Dir::X),
            dxbar: col(Dir::Xbar),
            dy: col(Dir::Y),
            dybar: col(Dir::Ybar),
            jets,
        }
    }

    /// det[∂F/∂x̄, ∂F/∂y]; zero iff ∂F/∂x̄ lies along the leaf.
    pub fn tangency_det(&self) -> C64 {
        self.dxbar[0] * self.dy[1] - self.dxbar[1] * self.dy[0]
    }

    pub fn real_linear(&self) -> RealLinear {
        RealLinear::differential(&self.jets)
    }
}

pub fn differential(map: &CylinderMap, at: (C64, C64)) -> Result<DiffData, FoliationError> {
    let jets = map.jets(at.0, at.1, map.jet_order)?;
    Ok(DiffData::from_jets(at, jets))
}

fn max_norm(v: [C64; 2]) -> f64 {
    v[0].norm().max(v[1].norm())
}

/// Local inverse of F near `seed`. A closed-form inverse, when the map has
/// one, replaces the seed; Newton on the real 4×4 Jacobian then polishes.
pub fn invert_local(map: &CylinderMap, z: [C64; 2], seed: (C64, C64)) -> Result<(C64, C64), FoliationError> {
    let singular = FoliationError::SingularJacobian { z1: z[0], z2: z[1] };
    let mut p = match &map.closed_inverse {
        Some([g1, g2]) => match (eval(g1, z[0], z[1]), eval(g2, z[0], z[1])) {
            (Ok(x), Ok(y)) => (x, y),
            _ => return Err(singular),
        },
        None => seed,
    };
    let tol = INVERSION_TOL * max_norm(z).max(1.0);
    let mut residual = f64::INFINITY;
    for iteration in 0..NEWTON_MAX_ITER {
        let jets = match map.jets(p.0, p.1, 1) {
            Ok(j) => j,
            Err(e) if is_pole(&e) => return Err(singular),
            Err(e) => return Err(e),
        };
        let r = [jets[0].value() - z[0], jets[1].value() - z[1]];
        residual = max_norm(r);
        if !residual.is_finite() {
            return Err(FoliationError::NewtonDiverged { iterations: iteration, residual });
        }
        let inverse = RealLinear::differential(&jets).inverse().ok_or(singular.clone())?;
        let step = inverse.apply(r);
        p = (p.0 - step[0], p.1 - step[1]);
        let scale = 1.0 + p.0.norm().max(p.1.norm());
        if max_norm(step) <= NEWTON_STEP_TOL * scale || (residual <= tol * 1e-3 && iteration > 0) {
            break;
        }
    }
    let v = match map.eval(p.0, p.1) {
        Ok(v) => v,
        Err(e) if is_pole(&e) => return Err(singular),
        Err(e) => return Err(e),
    };
    let final_residual = max_norm([v[0] - z[0], v[1] - z[1]]);
    if final_residual <= tol {
        Ok(p)
    } else {
        Err(FoliationError::NewtonDiverged {
            iterations: NEWTON_MAX_ITER,
            residual: final_residual.max(if residual.is_finite() { 0.0 } else { residual }),
        })
    }
}

/// Inverse seeded at (z₁, z₂), which is exact for maps with a closed inverse.
pub fn invert(map: &CylinderMap, z: [C64; 2]) -> Result<(C64, C64), FoliationError> {
    invert_local(map, z, (z[0], z[1]))
}

/// F′ = F∘θ along the transverse disk {(x, c)} of a graph model, with
/// θ(x, y) = (x, a(x)·y + b(x)), b = c·f/(f−c), a = (b+f)²/f².
pub fn second_cylinder(model: &FoliationModel, c: C64) -> Result<CylinderMap, FoliationError> {
    let f = model.graph_function().ok_or(FoliationError::NotGraphModel)?;
    let zero = C64::new(0.0, 0.0);
    if c.norm() == 0.0 {
        return Err(FoliationError::invalid("c = 0 reproduces F itself", zero, zero));
    }
    for x in model.domain.base_points() {
        let gap = eval(f, x, zero)? - c;
        if gap.norm() < model.domain.clearance {
            return Err(FoliationError::invalid(format!("f - c = {gap} vanishes"), x, zero));
        }
    }
    let b = Expr::constant(c).mul(f.clone()).div(f.clone().sub(Expr::constant(c)));
    let a = b.clone().add(f.clone()).pow(2).div(f.clone().pow(2));
    let mut map = model.cylinder_map().compose_fiber_affine(&Expr::x(), &a, &b)?;
    map.provenance = Provenance::SecondCylinder { c, disk: b, slope: a };
    validate_transverse_disk(&map)?;
    Ok(map)
}

/// Graph of a function d(x) over the base, validated holomorphic.
#[derive(Clone, Debug, PartialEq)]
pub struct TransverseDisk {
    d: Expr,
}

impl TransverseDisk {
    pub fn new(d: Expr, domain: &Domain) -> Result<Self, FoliationError> {
        let zero = C64::new(0.0, 0.0);
        if d.contains_y() {
            return Err(FoliationError::invalid("target disk must depend on x only", zero, zero));
        }
        for x in domain.base_points() {
            let jet = jet_at(&d, x, zero, 1)?;
            if jet.d1(Dir::Xbar).norm() >= VANISH_TOL {
                return Err(FoliationError::invalid("target disk is not holomorphic", x, jet.value()));
            }
        }
        Ok(TransverseDisk { d })
    }

    pub fn expr(&self) -> &Expr {
        &self.d
    }

    pub fn eval(&self, x: C64) -> Result<C64, FoliationError> {
        Ok(eval(&self.d, x, C64::new(0.0, 0.0))?)
    }

    /// (d(x), d′(x)).
    pub fn value_and_slope(&self, x: C64) -> Result<(C64, C64), FoliationError> {
        let jet = jet_at(&self.d, x, C64::new(0.0, 0.0), 1)?;
        Ok((jet.value(), jet.d1(Dir::X)))
    }
}

/// Projection along leaves onto a transverse disk.
pub fn project_along_leaves(map: &CylinderMap, disk: &TransverseDisk, z: [C64; 2]) -> Result<[C64; 2], FoliationError> {
    if map.vertical {
        return Ok([z[0], disk.eval(z[0])?]);
    }
    // Walk the leaf F({x}×ℂ) through z until it meets the disk.
    let (x, _) = invert(map, z)?;
    let mut w = C64::new(0.0, 0.0);
    for iteration in 0..NEWTON_MAX_ITER {
        let jets = map.jets(x, w, 1)?;
        let (d, slope) = disk.value_and_slope(jets[0].value())?;
        let g = jets[1].value() - d;
        let dg = jets[1].d1(Dir::Y) - slope * jets[0].d1(Dir::Y);
        if dg.norm() < VANISH_TOL {
            return Err(FoliationError::SingularJacobian { z1: z[0], z2: z[1] });
        }
        let step = g / dg;
        w -= step;
        if !w.is_finite() {
            return Err(FoliationError::NewtonDiverged { iterations: iteration, residual: g.norm() });
        }
        if step.norm() <= NEWTON_STEP_TOL * (1.0 + w.norm()) {
            break;
        }
    }
    let p = map.eval(x, w)?;
    let miss = (p[1] - disk.eval(p[0])?).norm();
    if miss > INVERSION_TOL * (1.0 + p[1].norm()) {
        return Err(FoliationError::NewtonDiverged { iterations: NEWTON_MAX_ITER, residual: miss });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn graph(src: &str) -> FoliationModel {
        FoliationModel::graph(parse(src).unwrap(), Domain::default()).unwrap()
    }

    #[test]
    fn graph_components() {
        let m = graph("conj(x)+2");
        let map = m.cylinder_map();
        assert_eq!(map.components()[1], parse("(conj(x)+2)*y/(y+(conj(x)+2))").unwrap());
        let v = map.eval(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((v[1] - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn graph_rejects_vanishing_f() {
        let d = Domain {
            base_radius: 0.5,
            ..Domain::default()
        };
        let err = FoliationModel::graph(parse("x").unwrap(), d).unwrap_err();
        assert!(matches!(err, FoliationError::ValidationFailed { x, .. } if x == c(0.0, 0.0)));
    }

    #[test]
    fn graph_differential_closed_forms() {
        let map = graph("conj(x)+2").cylinder_map();
        let dd = differential(&map, (c(0.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!((dd.dy[1] - c(4.0 / 9.0, 0.0)).norm() < 1e-15);
        assert!((dd.dxbar[1] - c(1.0 / 9.0, 0.0)).norm() < 1e-15);
        assert_eq!(dd.dybar, [c(0.0, 0.0); 2]);
        let dd0 = differential(&map, (c(0.4, 0.2), c(0.0, 0.0))).unwrap();
        assert_eq!(dd0.dxbar, [c(0.0, 0.0); 2]);
    }

    #[test]
    fn product_differential() {
        let map = FoliationModel::product(Domain::default()).unwrap().cylinder_map();
        let dd = differential(&map, (c(0.3, 0.1), c(-1.0, 2.0))).unwrap();
        assert_eq!(dd.dy, [c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(dd.dxbar, [c(0.0, 0.0); 2]);
    }

    #[test]
    fn inversion() {
        let map = graph("conj(x)+2").cylinder_map();
        let p = invert(&map, [c(0.0, 0.0), c(2.0 / 3.0, 0.0)]).unwrap();
        assert!((p.1 - c(1.0, 0.0)).norm() < 1e-12 && p.0.norm() < 1e-15);
        let err = invert(&map, [c(0.0, 0.0), c(2.0, 0.0)]).unwrap_err();
        assert!(matches!(err, FoliationError::SingularJacobian { .. } | FoliationError::NewtonDiverged { .. }));
        let prod = FoliationModel::product(Domain::default()).unwrap().cylinder_map();
        assert_eq!(invert(&prod, [c(0.2, 0.3), c(1.0, -1.0)]).unwrap(), (c(0.2, 0.3), c(1.0, -1.0)));
    }

    #[test]
    fn newton_without_closed_form() {
        let f1 = parse("x+(y*(conj(x)+2)/(y+conj(x)+2))^2/10").unwrap();
        let f2 = parse("y*(conj(x)+2)/(y+conj(x)+2)").unwrap();
        let map = FoliationModel::explicit(f1, f2, Domain::default()).unwrap().cylinder_map();
        assert!(!map.is_vertical());
        let (x, y) = (c(0.3, -0.2), c(0.7, 0.4));
        let z = map.eval(x, y).unwrap();
        let (xi, yi) = invert(&map, z).unwrap();
        assert!((xi - x).norm() < 1e-12 && (yi - y).norm() < 1e-12);
    }

    #[test]
    fn second_cylinder_coefficients() {
        let m = graph("conj(x)+2");
        let map = second_cylinder(&m, c(1.0, 0.0)).unwrap();
        let Provenance::SecondCylinder { disk, slope, .. } = map.provenance() else {
            panic!("provenance")
        };
        let zero = c(0.0, 0.0);
        assert!((eval(disk, zero, zero).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        assert!((eval(slope, zero, zero).unwrap() - c(4.0, 0.0)).norm() < 1e-15);
        let on_disk = map.eval(c(0.3, 0.2), zero).unwrap();
        assert!((on_disk[1] - c(1.0, 0.0)).norm() < 1e-14);
        let err = second_cylinder(&m, c(2.0, 0.0)).unwrap_err();
        assert!(matches!(err, FoliationError::ValidationFailed { x, .. } if x == zero));
    }

    #[test]
    fn projection() {
        let map = graph("conj(x)+2").cylinder_map();
        let d = Domain::default();
        let zero_disk = TransverseDisk::new(parse("0").unwrap(), &d).unwrap();
        assert_eq!(project_along_leaves(&map, &zero_disk, [c(0.3, 0.0), c(0.5, 0.0)]).unwrap(), [c(0.3, 0.0), c(0.0, 0.0)]);
        let quad = TransverseDisk::new(parse("x^2/4").unwrap(), &d).unwrap();
        let p = project_along_leaves(&map, &quad, [c(0.2, 0.0), c(0.9, 0.0)]).unwrap();
        assert!((p[1] - c(0.01, 0.0)).norm() < 1e-16);
        assert!(TransverseDisk::new(parse("conj(x)").unwrap(), &d).is_err());
    }

    #[test]
    fn explicit_rejects_non_holomorphic_disk() {
        let err = FoliationModel::explicit(parse("x").unwrap(), parse("y+conj(x)").unwrap(), Domain::default()).unwrap_err();
        assert!(matches!(err, FoliationError::ValidationFailed { .. }));
        let err = FoliationModel::explicit(parse("x").unwrap(), parse("conj(y)").unwrap(), Domain::default()).unwrap_err();
        assert!(matches!(err, FoliationError::NotYHolomorphic { component: 2, .. }));
        let err = FoliationModel::explicit(parse("x").unwrap(), parse("exp((1+conj(x)/2)*y)").unwrap(), Domain::default())
            .unwrap_err();
        assert!(matches!(err, FoliationError::ValidationFailed { invariant, .. } if invariant.contains("trivialization")));
    }
}
