//! Leaf periods and holonomy growth.
//!
//! When a leaf is a quotient of ℂ by periods γ(x), ω shifts by −2i ∂γ/∂x̄
//! along a period, and the second y-derivative of ω transforms by the
//! conjugate holonomy multiplier. The checks here take analytically supplied
//! periods and samples; no quotient manifold is built.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprlang::{eval, eval_jet, Expr};
use crate::foliation::{CylinderMap, Domain, FoliationError};
use crate::invariants::{omega, InvariantError};
use crate::tolerances::{PERIOD_TOL, VANISH_TOL};
use crate::wirtinger::Dir;

type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HolonomyError {
    #[error("gamma(x) is not a period of F at ({x}, {y}): |F(x, y+gamma) - F(x, y)| = {gap:e}")]
    PeriodNotAPeriod { x: C64, y: C64, gap: f64 },
    #[error("no sample pairs (y, y + gamma) available")]
    InsufficientSamples,
    #[error("sample {index} at y = {y} is too close to zero for a logarithm")]
    VanishingSample { index: usize, y: C64 },
    #[error("holonomy datum inconsistent: max |exp(rho gamma) - conj(multiplier)| = {residual:e}")]
    InconsistentDatum { residual: f64 },
    #[error("invalid period family: {0}")]
    BadFamily(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

impl From<FoliationError> for HolonomyError {
    fn from(e: FoliationError) -> Self {
        HolonomyError::Invariant(e.into())
    }
}

impl From<crate::exprlang::EvalError> for HolonomyError {
    fn from(e: crate::exprlang::EvalError) -> Self {
        HolonomyError::Invariant(e.into())
    }
}

/// A continuous family x ↦ γ(x) of leaf periods.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodFamily {
    pub gamma: Expr,
    pub tag: String,
}

impl PeriodFamily {
    pub fn new(gamma: Expr, tag: impl Into<String>, domain: &Domain) -> Result<Self, HolonomyError> {
        if gamma.contains_y() {
            return Err(HolonomyError::BadFamily("gamma must depend on x only".into()));
        }
        let zero = C64::new(0.0, 0.0);
        for x in domain.base_points() {
            if eval(&gamma, x, zero)?.norm() < VANISH_TOL {
                return Err(HolonomyError::BadFamily(format!("gamma vanishes at x = {x}")));
            }
        }
        Ok(PeriodFamily { gamma, tag: tag.into() })
    }
}

/// The jump ω(x, y+γ) − ω(x, y) and the predicted jump −2i ∂γ/∂x̄.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicitySides {
    pub jump: C64,
    pub predicted: C64,
}

impl PeriodicitySides {
    pub fn residual(&self) -> f64 {
        (self.jump - self.predicted).norm()
    }
}

pub fn periodicity_sides(map: &CylinderMap, p: &PeriodFamily, at: (C64, C64)) -> Result<PeriodicitySides, HolonomyError> {
    let (x, y) = at;
    let g = eval_jet(&p.gamma, (x, C64::new(0.0, 0.0)), 1)?;
    let shifted_y = y + g.value();
    let here = map.eval(x, y)?;
    let there = map.eval(x, shifted_y)?;
    let gap = (there[0] - here[0]).norm().max((there[1] - here[1]).norm());
    if !(gap < PERIOD_TOL) {
        return Err(HolonomyError::PeriodNotAPeriod { x, y, gap });
    }
    let w0 = omega(map, (x, y))?.value;
    let w1 = omega(map, (x, shifted_y))?.value;
    Ok(PeriodicitySides {
        jump: w1 - w0,
        predicted: -C64::new(0.0, 2.0) * g.d1(Dir::Xbar),
    })
}

/// |ω(x, y+γ(x)) − ω(x, y) + 2i ∂γ/∂x̄|, after checking F(x, y+γ) = F(x, y).
pub fn periodicity_residual(map: &CylinderMap, p: &PeriodFamily, at: (C64, C64)) -> Result<f64, HolonomyError> {
    Ok(periodicity_sides(map, p, at)?.residual())
}

/// Lattice generators γ_j with holonomy multipliers γ̃_j, and growth
/// parameters of h(y) = C·exp(ρy).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyDatum {
    /// (γ_j, γ̃_j)
    pub generators: Vec<(C64, C64)>,
    pub c: C64,
    pub rho: C64,
    #[serde(default)]
    pub consistent: bool,
}

impl HolonomyDatum {
    /// Multipliers chosen so that exp(ρ γ_j) = conj(γ̃_j).
    pub fn from_growth(c: C64, rho: C64, periods: &[C64]) -> Self {
        HolonomyDatum {
            generators: periods.iter().map(|&g| (g, (rho * g).exp().conj())).collect(),
            c,
            rho,
            consistent: true,
        }
    }

    pub fn consistency_residual(&self) -> f64 {
        self.generators
            .iter()
            .map(|&(g, m)| ((self.rho * g).exp() - m.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn check(&self) -> Result<(), HolonomyError> {
        let residual = self.consistency_residual();
        if self.consistent && !(residual < PERIOD_TOL) {
            return Err(HolonomyError::InconsistentDatum { residual });
        }
        Ok(())
    }
}

fn same_point(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm())
}

/// max |h(y+γ_j) − conj(γ̃_j)·h(y)| over sample pairs that differ by a generator.
pub fn holonomy_growth_residual(samples: &[(C64, C64)], d: &HolonomyDatum) -> Result<f64, HolonomyError> {
    let mut worst: Option<f64> = None;
    for &(gamma, multiplier) in &d.generators {
        for &(y, h) in samples {
            let target = y + gamma;
            if let Some(&(_, h_shift)) = samples.iter().find(|(y2, _)| same_point(*y2, target)) {
                let r = (h_shift - multiplier.conj() * h).norm();
                worst = Some(worst.unwrap_or(0.0).max(r));
            }
        }
    }
    worst.ok_or(HolonomyError::InsufficientSamples)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub c: C64,
    pub rho: C64,
    /// max |log h(y_k) − log C − ρ y_k| on the unwrapped branch.
    pub residual: f64,
}

/// Least-squares fit of log h ≈ log C + ρy. Logarithms are unwrapped in
/// sample order, so samples should follow a path.
pub fn exponential_fit(samples: &[(C64, C64)]) -> Result<ExponentialFit, HolonomyError> {
    if samples.len() < 3 {
        return Err(HolonomyError::InsufficientSamples);
    }
    let mut logs = Vec::with_capacity(samples.len());
    let mut prev_im: Option<f64> = None;
    for (index, &(y, h)) in samples.iter().enumerate() {
        if h.norm() < VANISH_TOL {
            return Err(HolonomyError::VanishingSample { index, y });
        }
        let mut l = h.ln();
        if let Some(p) = prev_im {
            let turns = ((p - l.im) / std::f64::consts::TAU).round();
            l.im += turns * std::f64::consts::TAU;
        }
        prev_im = Some(l.im);
        logs.push(l);
    }
    let n = C64::new(samples.len() as f64, 0.0);
    let (mut sy, mut syy, mut sl, mut syl) = (C64::default(), C64::default(), C64::default(), C64::default());
    for (&(y, _), &l) in samples.iter().zip(&logs) {
        sy += y;
        syy += y.conj() * y;
        sl += l;
        syl += y.conj() * l;
    }
    // [n  Σy; Σȳ  Σ|y|²]·[α; ρ] = [ΣL; ΣȳL]
    let det = n * syy - sy * sy.conj();
    if det.norm() < VANISH_TOL {
        return Err(HolonomyError::InsufficientSamples);
    }
    let alpha = (sl * syy - sy * syl) / det;
    let rho = (n * syl - sy.conj() * sl) / det;
    let residual = samples
        .iter()
        .zip(&logs)
        .map(|(&(y, _), &l)| (l - alpha - rho * y).norm())
        .fold(0.0, f64::max);
    Ok(ExponentialFit {
        c: alpha.exp(),
        rho,
        residual,
    })
}
