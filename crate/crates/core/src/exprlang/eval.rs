use num_complex::Complex64;
use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, Func, SourceSpan};
use crate::tolerances::{LOG_BRANCH_GUARD, POLE_GUARD_REL};
use crate::wirtinger::{JetError, Var, WirtingerJet};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{kind} (in expression at {span})")]
pub struct EvalError {
    pub kind: JetError,
    pub span: SourceSpan,
}

fn at_span(span: SourceSpan) -> impl Fn(JetError) -> EvalError {
    move |kind| EvalError { kind, span }
}

/// Jet of the function denoted by `e` at (x, y).
pub fn eval_jet(e: &Expr, at: (Complex64, Complex64), order: u8) -> Result<WirtingerJet, EvalError> {
    let err = at_span(e.span);
    Ok(match &e.kind {
        ExprKind::X => WirtingerJet::seed(at, Var::X, order).map_err(err)?,
        ExprKind::Y => WirtingerJet::seed(at, Var::Y, order).map_err(err)?,
        ExprKind::I => WirtingerJet::constant(Complex64::i(), at, order).map_err(err)?,
        ExprKind::Num(v) => WirtingerJet::constant(Complex64::new(*v, 0.0), at, order).map_err(err)?,
        ExprKind::Neg(a) => -eval_jet(a, at, order)?,
        ExprKind::Binary(op, a, b) => {
            let l = eval_jet(a, at, order)?;
            let r = eval_jet(b, at, order)?;
            match op {
                BinOp::Add => &l + &r,
                BinOp::Sub => &l - &r,
                BinOp::Mul => &l * &r,
                BinOp::Div => l.div(&r).map_err(err)?,
            }
        }
        ExprKind::Pow(a, n) => eval_jet(a, at, order)?.powi(*n).map_err(err)?,
        ExprKind::Call(f, a) => {
            let inner = eval_jet(a, at, order)?;
            match f {
                Func::Conj => inner.conj(),
                Func::Exp => inner.exp(),
                Func::Log => inner.ln().map_err(err)?,
            }
        }
    })
}

/// Plain complex evaluation, with the same pole and branch guards as the jets.
pub fn eval(e: &Expr, x: Complex64, y: Complex64) -> Result<Complex64, EvalError> {
    let err = at_span(e.span);
    Ok(match &e.kind {
        ExprKind::X => x,
        ExprKind::Y => y,
        ExprKind::I => Complex64::i(),
        ExprKind::Num(v) => Complex64::new(*v, 0.0),
        ExprKind::Neg(a) => -eval(a, x, y)?,
        ExprKind::Binary(op, a, b) => {
            let l = eval(a, x, y)?;
            let r = eval(b, x, y)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r.norm() < POLE_GUARD_REL * (1.0 + l.norm()) {
                        return Err(err(JetError::DivisionNearPole { x, y, denominator: r }));
                    }
                    l / r
                }
            }
        }
        ExprKind::Pow(a, n) => {
            let b = eval(a, x, y)?;
            if *n < 0 && b.norm() < POLE_GUARD_REL {
                return Err(err(JetError::DivisionNearPole { x, y, denominator: b }));
            }
            b.powi(*n)
        }
        ExprKind::Call(f, a) => {
            let v = eval(a, x, y)?;
            match f {
                Func::Conj => v.conj(),
                Func::Exp => v.exp(),
                Func::Log => {
                    if v.norm() < LOG_BRANCH_GUARD {
                        return Err(err(JetError::LogBranchNearZero { x, y, argument: v }));
                    }
                    v.ln()
                }
            }
        }
    })
}

/// `Err(span)` of the first `conj(...)` whose argument mentions y.
pub fn assert_y_holomorphic(e: &Expr) -> Result<(), SourceSpan> {
    match &e.kind {
        ExprKind::Call(Func::Conj, a) if a.contains_y() => Err(e.span),
        ExprKind::X | ExprKind::Y | ExprKind::I | ExprKind::Num(_) => Ok(()),
        ExprKind::Neg(a) | ExprKind::Pow(a, _) | ExprKind::Call(_, a) => assert_y_holomorphic(a),
        ExprKind::Binary(_, a, b) => {
            assert_y_holomorphic(a)?;
            assert_y_holomorphic(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;
    use crate::wirtinger::MultiIndex;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn shifted_conj() {
        let j = eval_jet(&parse("conj(x)+2").unwrap(), (c(0.0, 0.0), c(0.0, 0.0)), 3).unwrap();
        assert_eq!(j.value(), c(2.0, 0.0));
        assert_eq!(j.d(MultiIndex::new(0, 1, 0, 0)), c(1.0, 0.0));
        assert_eq!(j.d(MultiIndex::new(1, 0, 0, 0)), c(0.0, 0.0));
    }

    #[test]
    fn mixed_partial() {
        let j = eval_jet(&parse("y^2*conj(x)").unwrap(), (c(1.0, 0.0), c(2.0, 0.0)), 3).unwrap();
        assert_eq!(j.d(MultiIndex::new(0, 1, 1, 0)), c(4.0, 0.0));
    }

    #[test]
    fn pole_guard_reports_span() {
        let e = parse("1/(y+conj(x)+2)").unwrap();
        let err = eval_jet(&e, (c(0.0, 0.0), c(-2.0 + 1e-13, 0.0)), 3).unwrap_err();
        assert!(matches!(err.kind, JetError::DivisionNearPole { .. }));
        assert_eq!(err.span, e.span);
        assert!(eval(&e, c(0.0, 0.0), c(-2.0 + 1e-13, 0.0)).is_err());
    }

    #[test]
    fn plain_and_jet_values_agree() {
        let e = parse("exp(conj(x)*y)/(1+x^2) - log(y+3)*i").unwrap();
        let (x, y) = (c(0.3, -0.1), c(0.5, 0.8));
        let j = eval_jet(&e, (x, y), 2).unwrap();
        assert!((j.value() - eval(&e, x, y).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn y_holomorphy_gate() {
        assert!(assert_y_holomorphic(&parse("conj(x)*y").unwrap()).is_ok());
        assert!(assert_y_holomorphic(&parse("conj(y)").unwrap()).is_err());
        let e = parse("2 + conj(x*y+1)").unwrap();
        assert_eq!(assert_y_holomorphic(&e), Err(SourceSpan::new(4, 15)));
    }
}
