//! The small expression language used to define f, F, θ, γ and leaf weights.
//!
//! Variables are `x` (base) and `y` (leaf coordinate); `i` is the imaginary
//! unit. Supported forms: real literals, `+ - * /`, unary `-`, `^n` with an
//! integer literal |n| ≤ 16, and the calls `conj`, `exp`, `log` (principal
//! branch).

mod ast;
mod eval;
mod parser;

pub use ast::{BinOp, Expr, ExprKind, Func, SourceSpan};
pub use eval::{assert_y_holomorphic, eval, eval_jet, EvalError};
pub use parser::{parse, ParseError};
