//! Leafwise curvature: dd^c of real weights and log-moduli of sections.
//!
//! Convention: dd^c u is reported as (1/4)·Δu per Euclidean area element in
//! the leaf coordinate y, with Δ the flat Laplacian.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::exprlang::{eval, eval_jet, EvalError, Expr};
use crate::tolerances::{IDENTITY_TOL, LAPLACIAN_STEP};
use crate::wirtinger::{fd_wirtinger, Dir, FdOptions, MultiIndex};

type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("stencil point {point} is within {clearance} of the declared zero {zero}")]
    StencilHitsZeroSet { point: C64, zero: C64, clearance: f64 },
    #[error("field is not leafwise holomorphic at y = {y}: |d/dybar| = {residual:e}")]
    NotHolomorphic { y: C64, residual: f64 },
    #[error("field evaluation failed at y = {y}")]
    Undefined { y: C64 },
    #[error("step must be positive, got {0}")]
    BadStep(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone)]
enum Source {
    Expr(Expr),
    Fn(Arc<dyn Fn(C64) -> Option<C64> + Send + Sync>),
}

/// A complex function of the leaf coordinate at a fixed base point, with a
/// declared zero set to keep stencils away from.
#[derive(Clone)]
pub struct LeafField {
    source: Source,
    x: C64,
    zeros: Vec<C64>,
    clearance: f64,
}

impl fmt::Debug for LeafField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match &self.source {
            Source::Expr(e) => e.to_string(),
            Source::Fn(_) => "<fn>".to_string(),
        };
        f.debug_struct("LeafField")
            .field("source", &src)
            .field("x", &self.x)
            .field("zeros", &self.zeros)
            .field("clearance", &self.clearance)
            .finish()
    }
}

impl LeafField {
    /// Expression in y (and x, fixed to `x`).
    pub fn from_expr(e: Expr, x: C64) -> Self {
        LeafField {
            source: Source::Expr(e),
            x,
            zeros: Vec::new(),
            clearance: 0.0,
        }
    }

    pub fn from_fn(f: impl Fn(C64) -> Option<C64> + Send + Sync + 'static) -> Self {
        LeafField {
            source: Source::Fn(Arc::new(f)),
            x: C64::new(0.0, 0.0),
            zeros: Vec::new(),
            clearance: 0.0,
        }
    }

    pub fn with_zeros(mut self, zeros: Vec<C64>, clearance: f64) -> Self {
        self.zeros = zeros;
        self.clearance = clearance;
        self
    }

    fn guard(&self, y: C64) -> Result<(), CurvatureError> {
        for &z in &self.zeros {
            if (y - z).norm() < self.clearance {
                return Err(CurvatureError::StencilHitsZeroSet {
                    point: y,
                    zero: z,
                    clearance: self.clearance,
                });
            }
        }
        Ok(())
    }

    pub fn value(&self, y: C64) -> Result<C64, CurvatureError> {
        self.guard(y)?;
        match &self.source {
            Source::Expr(e) => Ok(eval(e, self.x, y)?),
            Source::Fn(f) => f(y).ok_or(CurvatureError::Undefined { y }),
        }
    }

    /// |∂/∂ȳ| of the field: exact via jets for expressions, finite
    /// differences otherwise.
    pub fn holomorphy_residual(&self, y: C64) -> Result<f64, CurvatureError> {
        self.guard(y)?;
        match &self.source {
            Source::Expr(e) => Ok(eval_jet(e, (self.x, y), 1)?.d1(Dir::Ybar).norm()),
            Source::Fn(f) => {
                let g = |_: C64, w: C64| f(w);
                let est = fd_wirtinger(g, (self.x, y), MultiIndex::unit(Dir::Ybar), FdOptions::default())
                    .map_err(|_| CurvatureError::Undefined { y })?;
                Ok(est.value.norm())
            }
        }
    }
}

/// Real scalar derived from a complex leaf field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scalar {
    Re,
    ModulusSquared,
    LogModulusSquared,
}

impl Scalar {
    fn apply(self, v: C64) -> f64 {
        match self {
            Scalar::Re => v.re,
            Scalar::ModulusSquared => v.norm_sqr(),
            Scalar::LogModulusSquared => v.norm_sqr().ln(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplacianOptions {
    pub step: f64,
    pub richardson: bool,
}

impl Default for LaplacianOptions {
    fn default() -> Self {
        Self {
            step: LAPLACIAN_STEP,
            richardson: true,
        }
    }
}

fn five_point(field: &LeafField, scalar: Scalar, y: C64, h: f64) -> Result<f64, CurvatureError> {
    let u = |p: C64| field.value(p).map(|v| scalar.apply(v));
    let hr = C64::new(h, 0.0);
    let hi = C64::new(0.0, h);
    let centre = u(y)?;
    let sum = u(y + hr)? + u(y - hr)? + u(y + hi)? + u(y - hi)?;
    Ok((sum - 4.0 * centre) / (h * h))
}

/// Δu at y by the 5-point stencil, optionally with one Richardson level
/// (4·L(h/2) − L(h))/3.
pub fn leaf_laplacian(field: &LeafField, scalar: Scalar, y: C64, opts: LaplacianOptions) -> Result<f64, CurvatureError> {
    if !(opts.step > 0.0) {
        return Err(CurvatureError::BadStep(opts.step));
    }
    let coarse = five_point(field, scalar, y, opts.step)?;
    if !opts.richardson {
        return Ok(coarse);
    }
    let fine = five_point(field, scalar, y, opts.step / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// dd^c u = Δu/4.
pub fn ddc(field: &LeafField, scalar: Scalar, y: C64, opts: LaplacianOptions) -> Result<f64, CurvatureError> {
    Ok(leaf_laplacian(field, scalar, y, opts)? / 4.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureMargin {
    pub holds: bool,
    /// min over samples of −ε·g − K.
    pub margin: f64,
}

/// Checks K = dd^c φ ≤ −ε·g on the samples, with φ and g read as real parts.
pub fn negative_curvature_margin(
    phi: &LeafField,
    g: &LeafField,
    epsilon: f64,
    samples: &[C64],
    opts: LaplacianOptions,
) -> Result<CurvatureMargin, CurvatureError> {
    let mut margin = f64::INFINITY;
    for &y in samples {
        let k = ddc(phi, Scalar::Re, y, opts)?;
        let gy = g.value(y)?.re;
        margin = margin.min(-epsilon * gy - k);
    }
    Ok(CurvatureMargin {
        holds: margin > 0.0,
        margin,
    })
}

/// max |Δ log|field|²| over the samples, for a leafwise holomorphic field.
pub fn holomorphic_log_harmonicity(field: &LeafField, samples: &[C64], opts: LaplacianOptions) -> Result<f64, CurvatureError> {
    for &y in samples {
        let residual = field.holomorphy_residual(y)?;
        if residual >= IDENTITY_TOL {
            return Err(CurvatureError::NotHolomorphic { y, residual });
        }
    }
    let mut worst: f64 = 0.0;
    for &y in samples {
        worst = worst.max(leaf_laplacian(field, Scalar::LogModulusSquared, y, opts)?.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn field(src: &str) -> LeafField {
        LeafField::from_expr(parse(src).unwrap(), c(0.0, 0.0))
    }

    #[test]
    fn laplacian_examples() {
        let log_field = field("y").with_zeros(vec![c(0.0, 0.0)], 0.01);
        let v = leaf_laplacian(&log_field, Scalar::LogModulusSquared, c(1.0, 0.0), LaplacianOptions::default()).unwrap();
        assert!(v.abs() < 1e-6, "{v}");
        for y in [c(0.0, 0.0), c(1.3, -0.7), c(-2.0, 2.0)] {
            let v = leaf_laplacian(&field("y"), Scalar::ModulusSquared, y, LaplacianOptions::default()).unwrap();
            assert!((v - 4.0).abs() < 1e-6, "{v}");
        }
        let err = leaf_laplacian(&log_field, Scalar::LogModulusSquared, c(0.0005, 0.0), LaplacianOptions::default()).unwrap_err();
        assert!(matches!(err, CurvatureError::StencilHitsZeroSet { .. }));
    }

    #[test]
    fn second_order_convergence() {
        let y = c(0.4, 0.3);
        let g = field("y*conj(y)*y*conj(y)");
        // Δ|y|⁴ = 16|y|²
        let exact = 16.0 * y.norm_sqr();
        let e1 = (leaf_laplacian(&g, Scalar::Re, y, LaplacianOptions { step: 0.1, richardson: false }).unwrap() - exact).abs();
        let e2 = (leaf_laplacian(&g, Scalar::Re, y, LaplacianOptions { step: 0.05, richardson: false }).unwrap() - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn curvature_margins() {
        let samples = [c(0.0, 0.0), c(0.5, 0.5), c(-1.0, 0.2)];
        let one = field("1");
        let m = negative_curvature_margin(&field("-y*conj(y)"), &one, 0.5, &samples, LaplacianOptions::default()).unwrap();
        assert!(m.holds && (m.margin - 0.5).abs() < 1e-6);
        let m = negative_curvature_margin(&field("0"), &one, 0.2, &samples, LaplacianOptions::default()).unwrap();
        assert!(!m.holds && (m.margin + 0.2).abs() < 1e-12);
        let m = negative_curvature_margin(&field("y*conj(y)"), &one, 0.1, &samples, LaplacianOptions::default()).unwrap();
        assert!(!m.holds);
    }

    #[test]
    fn log_harmonicity() {
        let samples: Vec<C64> = (0..8)
            .flat_map(|k| [0.5, 1.0, 2.0].map(|r| C64::from_polar(r, k as f64 * 0.785)))
            .collect();
        let sq = field("y^2").with_zeros(vec![c(0.0, 0.0)], 0.1);
        assert!(holomorphic_log_harmonicity(&sq, &samples, LaplacianOptions::default()).unwrap() < 1e-5);
        let ex = field("exp((0.3+0.7*i)*y)");
        assert!(holomorphic_log_harmonicity(&ex, &samples, LaplacianOptions::default()).unwrap() < 1e-6);
        let bad = field("conj(y)");
        assert!(matches!(
            holomorphic_log_harmonicity(&bad, &samples, LaplacianOptions::default()),
            Err(CurvatureError::NotHolomorphic { .. })
        ));
        let closure = LeafField::from_fn(|y| Some(y * y + 1.0)).with_zeros(vec![c(0.0, 1.0), c(0.0, -1.0)], 0.1);
        let outer: Vec<C64> = (0..8).map(|k| C64::from_polar(2.0, k as f64 * 0.785)).collect();
        assert!(holomorphic_log_harmonicity(&closure, &outer, LaplacianOptions::default()).unwrap() < 1e-5);
    }
}
