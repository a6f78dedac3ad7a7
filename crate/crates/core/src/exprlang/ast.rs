use std::fmt;

use num_complex::Complex64;

/// Byte range in the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn join(self, other: SourceSpan) -> SourceSpan {
        SourceSpan::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Conj,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Conj => "conj",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "conj" => Some(Func::Conj),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    X,
    Y,
    /// The imaginary unit `i`.
    I,
    /// Non-negative real literal.
    Num(f64),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Expression tree. Equality is structural and ignores spans.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (X, X) | (Y, Y) | (I, I) => true,
            (Num(a), Num(b)) => a.to_bits() == b.to_bits(),
            (Neg(a), Neg(b)) => a == b,
            (Binary(o1, l1, r1), Binary(o2, l2, r2)) => o1 == o2 && l1 == l2 && r1 == r2,
            (Pow(a, n), Pow(b, m)) => n == m && a == b,
            (Call(f, a), Call(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

// Builders used when models assemble expressions programmatically.
impl Expr {
    fn synth(kind: ExprKind) -> Expr {
        Expr {
            kind,
            span: SourceSpan::default(),
        }
    }

    pub fn x() -> Expr {
        Self::synth(ExprKind::X)
    }

    pub fn y() -> Expr {
        Self::synth(ExprKind::Y)
    }

    pub fn i() -> Expr {
        Self::synth(ExprKind::I)
    }

    pub fn num(v: f64) -> Expr {
        if v < 0.0 {
            return Self::num(-v).neg();
        }
        Self::synth(ExprKind::Num(v))
    }

    /// Literal complex constant written as `re + im*i`.
    pub fn constant(c: Complex64) -> Expr {
        match (c.re == 0.0, c.im == 0.0) {
            (_, true) => Expr::num(c.re),
            (true, false) => Expr::num(c.im).mul(Expr::i()),
            (false, false) => Expr::num(c.re).add(Expr::num(c.im).mul(Expr::i())),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Expr {
        Self::synth(ExprKind::Neg(Box::new(self)))
    }

    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Self::synth(ExprKind::Binary(op, Box::new(a), Box::new(b)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Add, self, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Sub, self, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Mul, self, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Div, self, rhs)
    }

    pub fn pow(self, n: i32) -> Expr {
        Self::synth(ExprKind::Pow(Box::new(self), n))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Self::synth(ExprKind::Call(f, Box::new(arg)))
    }

    pub fn conj(self) -> Expr {
        Self::call(Func::Conj, self)
    }

    pub fn contains_y(&self) -> bool {
        self.any(&|k| matches!(k, ExprKind::Y))
    }

    pub fn contains_x(&self) -> bool {
        self.any(&|k| matches!(k, ExprKind::X))
    }

    fn any(&self, pred: &dyn Fn(&ExprKind) -> bool) -> bool {
        if pred(&self.kind) {
            return true;
        }
        match &self.kind {
            ExprKind::X | ExprKind::Y | ExprKind::I | ExprKind::Num(_) => false,
            ExprKind::Neg(a) | ExprKind::Pow(a, _) | ExprKind::Call(_, a) => a.any(pred),
            ExprKind::Binary(_, a, b) => a.any(pred) || b.any(pred),
        }
    }

    /// Replaces every x by `x_sub` and every y by `y_sub`.
    pub fn substitute(&self, x_sub: &Expr, y_sub: &Expr) -> Expr {
        let kind = match &self.kind {
            ExprKind::X => return x_sub.clone(),
            ExprKind::Y => return y_sub.clone(),
            ExprKind::I => ExprKind::I,
            ExprKind::Num(v) => ExprKind::Num(*v),
            ExprKind::Neg(a) => ExprKind::Neg(Box::new(a.substitute(x_sub, y_sub))),
            ExprKind::Binary(op, a, b) => ExprKind::Binary(
                *op,
                Box::new(a.substitute(x_sub, y_sub)),
                Box::new(b.substitute(x_sub, y_sub)),
            ),
            ExprKind::Pow(a, n) => ExprKind::Pow(Box::new(a.substitute(x_sub, y_sub)), *n),
            ExprKind::Call(f, a) => ExprKind::Call(*f, Box::new(a.substitute(x_sub, y_sub))),
        };
        Expr { kind, span: self.span }
    }

    pub fn substitute_y(&self, y_sub: &Expr) -> Expr {
        self.substitute(&Expr::x(), y_sub)
    }

    pub fn depth(&self) -> usize {
        match &self.kind {
            ExprKind::X | ExprKind::Y | ExprKind::I | ExprKind::Num(_) => 1,
            ExprKind::Neg(a) | ExprKind::Pow(a, _) | ExprKind::Call(_, a) => 1 + a.depth(),
            ExprKind::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(op, _, _) => op.precedence(),
            ExprKind::Neg(_) => 3,
            ExprKind::Pow(_, _) => 4,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Prints with the minimal parentheses needed to reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::X => write!(f, "x"),
            ExprKind::Y => write!(f, "y"),
            ExprKind::I => write!(f, "i"),
            ExprKind::Num(v) => write!(f, "{v:?}"),
            ExprKind::Neg(a) => {
                write!(f, "-")?;
                a.write_child(f, 3)
            }
            ExprKind::Binary(op, a, b) => {
                let p = op.precedence();
                a.write_child(f, p)?;
                write!(f, "{}", op.symbol())?;
                b.write_child(f, p + 1)
            }
            ExprKind::Pow(a, n) => {
                a.write_child(f, 5)?;
                write!(f, "^{n}")
            }
            ExprKind::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
