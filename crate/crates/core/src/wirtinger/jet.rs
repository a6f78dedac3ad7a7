use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::tolerances::{LOG_BRANCH_GUARD, POLE_GUARD_REL};

/// Highest jet order supported by the layout tables.
pub const MAX_ORDER: u8 = 4;
/// Order used by the invariant pipeline: ω consumes one derivative of F and
/// Γ needs two more in y.
pub const DEFAULT_ORDER: u8 = 3;

/// One of the four formal Wirtinger directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    X,
    Xbar,
    Y,
    Ybar,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::X, Dir::Xbar, Dir::Y, Dir::Ybar];

    fn slot(self) -> usize {
        match self {
            Dir::X => 0,
            Dir::Xbar => 1,
            Dir::Y => 2,
            Dir::Ybar => 3,
        }
    }

    pub fn conj(self) -> Dir {
        match self {
            Dir::X => Dir::Xbar,
            Dir::Xbar => Dir::X,
            Dir::Y => Dir::Ybar,
            Dir::Ybar => Dir::Y,
        }
    }
}

/// A complex coordinate of the cylinder 𝔻 × ℂ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn dir(self) -> Dir {
        match self {
            Var::X => Dir::X,
            Var::Y => Dir::Y,
        }
    }

    pub fn conj_dir(self) -> Dir {
        self.dir().conj()
    }
}

/// Powers of (∂x, ∂x̄, ∂y, ∂ȳ).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub x: u8,
    pub xbar: u8,
    pub y: u8,
    pub ybar: u8,
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex::new(0, 0, 0, 0);

    pub const fn new(x: u8, xbar: u8, y: u8, ybar: u8) -> Self {
        Self { x, xbar, y, ybar }
    }

    pub fn unit(dir: Dir) -> Self {
        Self::ZERO.bump(dir, 1)
    }

    pub fn order(&self) -> u8 {
        self.x + self.xbar + self.y + self.ybar
    }

    pub fn get(&self, dir: Dir) -> u8 {
        self.as_array()[dir.slot()]
    }

    pub fn bump(mut self, dir: Dir, by: u8) -> Self {
        match dir {
            Dir::X => self.x += by,
            Dir::Xbar => self.xbar += by,
            Dir::Y => self.y += by,
            Dir::Ybar => self.ybar += by,
        }
        self
    }

    /// Swaps holomorphic and antiholomorphic powers.
    pub fn conj(&self) -> Self {
        Self::new(self.xbar, self.x, self.ybar, self.y)
    }

    pub fn as_array(&self) -> [u8; 4] {
        [self.x, self.xbar, self.y, self.ybar]
    }

    /// α! = x! x̄! y! ȳ!, the factor between Taylor coefficients and partials.
    pub fn factorial(&self) -> f64 {
        self.as_array()
            .iter()
            .map(|&k| (1..=k as u32).product::<u32>() as f64)
            .product()
    }

    fn dense_key(&self) -> usize {
        let a = self.as_array();
        let base = MAX_ORDER as usize + 1;
        ((a[0] as usize * base + a[1] as usize) * base + a[2] as usize) * base + a[3] as usize
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order() == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (name, p) in [("x", self.x), ("x̄", self.xbar), ("y", self.y), ("ȳ", self.ybar)] {
            if p == 0 {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if p == 1 {
                write!(f, "∂{name}")?;
            } else {
                write!(f, "∂{name}^{p}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum JetError {
    #[error("denominator {denominator} below pole guard at x={x}, y={y}")]
    DivisionNearPole {
        x: Complex64,
        y: Complex64,
        denominator: Complex64,
    },
    #[error("logarithm argument {argument} too close to zero at x={x}, y={y}")]
    LogBranchNearZero {
        x: Complex64,
        y: Complex64,
        argument: Complex64,
    },
    #[error("exponent {0} outside the supported range")]
    ExponentOutOfRange(i32),
    #[error("jet order {0} exceeds the maximum of {MAX_ORDER}")]
    OrderTooHigh(u8),
}

/// Monomial enumeration and product table for one truncation order.
struct Layout {
    order: u8,
    indices: Vec<MultiIndex>,
    lookup: Vec<u16>,
    products: Vec<(u16, u16, u16)>,
}

const ABSENT: u16 = u16::MAX;

impl Layout {
    fn build(order: u8) -> Layout {
        let mut indices = Vec::new();
        for total in 0..=order {
            for x in 0..=total {
                for xbar in 0..=total - x {
                    for y in 0..=total - x - xbar {
                        let ybar = total - x - xbar - y;
                        indices.push(MultiIndex::new(x, xbar, y, ybar));
                    }
                }
            }
        }
        let base = MAX_ORDER as usize + 1;
        let mut lookup = vec![ABSENT; base.pow(4)];
        for (k, m) in indices.iter().enumerate() {
            lookup[m.dense_key()] = k as u16;
        }
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if a.order() + b.order() > order {
                    continue;
                }
                let sum = MultiIndex::new(a.x + b.x, a.xbar + b.xbar, a.y + b.y, a.ybar + b.ybar);
                products.push((i as u16, j as u16, lookup[sum.dense_key()]));
            }
        }
        Layout {
            order,
            indices,
            lookup,
            products,
        }
    }

    fn get(order: u8) -> &'static Layout {
        static LAYOUTS: [OnceLock<Layout>; MAX_ORDER as usize + 1] =
            [const { OnceLock::new() }; MAX_ORDER as usize + 1];
        LAYOUTS[order as usize].get_or_init(|| Layout::build(order))
    }

    fn position(&self, m: &MultiIndex) -> Option<usize> {
        if m.order() > self.order {
            return None;
        }
        match self.lookup[m.dense_key()] {
            ABSENT => None,
            k => Some(k as usize),
        }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }
}

/// Truncated Taylor expansion of a function of (x, x̄, y, ȳ) around a point,
/// with the four directions treated as independent formal variables.
///
/// Coefficients are stored in Taylor normalization; [`WirtingerJet::deriv`]
/// multiplies by α! to return the partial derivative.
#[derive(Clone)]
pub struct WirtingerJet {
    at: [Complex64; 2],
    layout: &'static Layout,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for WirtingerJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (idx, c) in self.layout.indices.iter().zip(&self.coeffs) {
            if *c != Complex64::new(0.0, 0.0) {
                m.entry(&idx.to_string(), &(c * idx.factorial()));
            }
        }
        m.finish()
    }
}

impl PartialEq for WirtingerJet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.order == other.layout.order && self.coeffs == other.coeffs
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl WirtingerJet {
    fn check_order(order: u8) -> Result<(), JetError> {
        if order > MAX_ORDER {
            return Err(JetError::OrderTooHigh(order));
        }
        Ok(())
    }

    pub fn constant(value: Complex64, at: (Complex64, Complex64), order: u8) -> Result<Self, JetError> {
        Self::check_order(order)?;
        let layout = Layout::get(order);
        let mut coeffs = vec![zero(); layout.len()];
        coeffs[0] = value;
        Ok(Self {
            at: [at.0, at.1],
            layout,
            coeffs,
        })
    }

    /// Jet of the coordinate function `var` at `at`.
    pub fn seed(at: (Complex64, Complex64), var: Var, order: u8) -> Result<Self, JetError> {
        let value = match var {
            Var::X => at.0,
            Var::Y => at.1,
        };
        let mut jet = Self::constant(value, at, order)?;
        if order >= 1 {
            let k = jet.layout.position(&MultiIndex::unit(var.dir())).expect("first order present");
            jet.coeffs[k] = Complex64::new(1.0, 0.0);
        }
        Ok(jet)
    }

    pub fn order(&self) -> u8 {
        self.layout.order
    }

    pub fn point(&self) -> (Complex64, Complex64) {
        (self.at[0], self.at[1])
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Partial derivative ∂^α of the represented function; `None` when |α|
    /// exceeds the jet order.
    pub fn deriv(&self, index: MultiIndex) -> Option<Complex64> {
        self.layout
            .position(&index)
            .map(|k| self.coeffs[k] * index.factorial())
    }

    /// Partial derivative, treating entries beyond the order as a bug.
    pub fn d(&self, index: MultiIndex) -> Complex64 {
        self.deriv(index)
            .unwrap_or_else(|| panic!("index {index} beyond jet order {}", self.order()))
    }

    pub fn d1(&self, dir: Dir) -> Complex64 {
        self.d(MultiIndex::unit(dir))
    }

    /// All entries of total order ≥ 1.
    pub fn derivs(&self) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        self.layout
            .indices
            .iter()
            .zip(&self.coeffs)
            .skip(1)
            .map(|(m, c)| (*m, c * m.factorial()))
    }

    /// Jet of ∂f/∂dir, one order lower.
    pub fn derivative(&self, dir: Dir) -> WirtingerJet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let layout = Layout::get(self.order() - 1);
        let coeffs = layout
            .indices
            .iter()
            .map(|m| {
                let up = m.bump(dir, 1);
                let k = self.layout.position(&up).expect("shifted index present");
                self.coeffs[k] * f64::from(up.get(dir))
            })
            .collect();
        WirtingerJet {
            at: self.at,
            layout,
            coeffs,
        }
    }

    /// Drops every entry above `order`.
    pub fn truncate(&self, order: u8) -> WirtingerJet {
        assert!(order <= self.order());
        let layout = Layout::get(order);
        let coeffs = layout
            .indices
            .iter()
            .map(|m| self.coeffs[self.layout.position(m).expect("lower index present")])
            .collect();
        WirtingerJet {
            at: self.at,
            layout,
            coeffs,
        }
    }

    fn map_coeffs(&self, f: impl Fn(Complex64) -> Complex64) -> WirtingerJet {
        WirtingerJet {
            at: self.at,
            layout: self.layout,
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> WirtingerJet {
        self.map_coeffs(|c| c * s)
    }

    fn aligned<'a>(&'a self, other: &'a WirtingerJet) -> (WirtingerJet, WirtingerJet) {
        let order = self.order().min(other.order());
        let a = if self.order() == order { self.clone() } else { self.truncate(order) };
        let b = if other.order() == order { other.clone() } else { other.truncate(order) };
        (a, b)
    }

    fn zip_with(&self, other: &WirtingerJet, f: impl Fn(Complex64, Complex64) -> Complex64) -> WirtingerJet {
        if self.order() == other.order() {
            return WirtingerJet {
                at: self.at,
                layout: self.layout,
                coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
            };
        }
        let (a, b) = self.aligned(other);
        a.zip_with(&b, f)
    }

    fn product(&self, other: &WirtingerJet) -> WirtingerJet {
        if self.order() != other.order() {
            let (a, b) = self.aligned(other);
            return a.product(&b);
        }
        let mut out = vec![zero(); self.layout.len()];
        for &(i, j, k) in &self.layout.products {
            out[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        WirtingerJet {
            at: self.at,
            layout: self.layout,
            coeffs: out,
        }
    }

    /// g(f) for a scalar g given its derivatives g⁽ᵏ⁾(f₀), k = 0..=order.
    fn compose(&self, derivs_at_value: &[Complex64]) -> WirtingerJet {
        let mut delta = self.clone();
        delta.coeffs[0] = zero();
        let mut out = WirtingerJet {
            at: self.at,
            layout: self.layout,
            coeffs: vec![zero(); self.layout.len()],
        };
        out.coeffs[0] = derivs_at_value[0];
        let mut power = delta.clone();
        let mut factorial = 1.0;
        for (k, g_k) in derivs_at_value.iter().enumerate().skip(1) {
            factorial *= k as f64;
            let w = g_k / factorial;
            for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                *o += w * p;
            }
            if k < derivs_at_value.len() - 1 {
                power = power.product(&delta);
            }
        }
        out
    }

    pub fn conj(&self) -> WirtingerJet {
        let coeffs = self
            .layout
            .indices
            .iter()
            .map(|m| {
                let k = self.layout.position(&m.conj()).expect("conjugate index present");
                self.coeffs[k].conj()
            })
            .collect();
        WirtingerJet {
            at: self.at,
            layout: self.layout,
            coeffs,
        }
    }

    pub fn exp(&self) -> WirtingerJet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() as usize + 1])
    }

    /// Principal-branch logarithm.
    pub fn ln(&self) -> Result<WirtingerJet, JetError> {
        let v = self.value();
        if v.norm() < LOG_BRANCH_GUARD {
            return Err(JetError::LogBranchNearZero {
                x: self.at[0],
                y: self.at[1],
                argument: v,
            });
        }
        let mut g = vec![v.ln()];
        let mut inv_pow = Complex64::new(1.0, 0.0);
        let mut sign_fact = 1.0;
        for k in 1..=self.order() as usize {
            inv_pow /= v;
            g.push(inv_pow * sign_fact);
            sign_fact *= -(k as f64);
        }
        Ok(self.compose(&g))
    }

    fn recip_unchecked(&self) -> WirtingerJet {
        let v = self.value();
        let mut g = Vec::with_capacity(self.order() as usize + 1);
        let mut inv_pow = Complex64::new(1.0, 0.0) / v;
        let mut sign_fact = 1.0;
        for k in 0..=self.order() as usize {
            g.push(inv_pow * sign_fact);
            inv_pow /= v;
            sign_fact *= -((k + 1) as f64);
        }
        self.compose(&g)
    }

    /// self / denom, refusing denominators inside the scale-aware pole guard.
    pub fn div(&self, denom: &WirtingerJet) -> Result<WirtingerJet, JetError> {
        let d = denom.value();
        if d.norm() < POLE_GUARD_REL * (1.0 + self.value().norm()) {
            return Err(JetError::DivisionNearPole {
                x: denom.at[0],
                y: denom.at[1],
                denominator: d,
            });
        }
        Ok(self.product(&denom.recip_unchecked()))
    }

    pub fn recip(&self) -> Result<WirtingerJet, JetError> {
        let one = WirtingerJet::constant(Complex64::new(1.0, 0.0), self.point(), self.order())?;
        one.div(self)
    }

    /// Integer power by repeated squaring; negative exponents go through the
    /// guarded reciprocal.
    pub fn powi(&self, n: i32) -> Result<WirtingerJet, JetError> {
        if n.unsigned_abs() > crate::tolerances::MAX_EXPONENT {
            return Err(JetError::ExponentOutOfRange(n));
        }
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = WirtingerJet::constant(Complex64::new(1.0, 0.0), self.point(), self.order())?;
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.product(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.product(&sq);
            }
        }
        Ok(acc)
    }

    /// |∂(conj var)|: zero iff the jet is holomorphic in `var` at first order.
    pub fn holomorphy_residual(&self, var: Var) -> f64 {
        self.d1(var.conj_dir()).norm()
    }

    /// Real-linear differential applied to (v_x, v_y).
    pub fn apply_differential(&self, v: [Complex64; 2]) -> Complex64 {
        self.d1(Dir::X) * v[0]
            + self.d1(Dir::Xbar) * v[0].conj()
            + self.d1(Dir::Y) * v[1]
            + self.d1(Dir::Ybar) * v[1].conj()
    }

    pub fn max_abs_diff(&self, other: &WirtingerJet) -> f64 {
        let (a, b) = self.aligned(other);
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .zip(&a.layout.indices)
            .map(|((p, q), m)| ((p - q) * m.factorial()).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &WirtingerJet {
    type Output = WirtingerJet;
    fn add(self, rhs: &WirtingerJet) -> WirtingerJet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &WirtingerJet {
    type Output = WirtingerJet;
    fn sub(self, rhs: &WirtingerJet) -> WirtingerJet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &WirtingerJet {
    type Output = WirtingerJet;
    fn mul(self, rhs: &WirtingerJet) -> WirtingerJet {
        self.product(rhs)
    }
}

impl Neg for &WirtingerJet {
    type Output = WirtingerJet;
    fn neg(self) -> WirtingerJet {
        self.map_coeffs(|c| -c)
    }
}

impl Add for WirtingerJet {
    type Output = WirtingerJet;
    fn add(self, rhs: WirtingerJet) -> WirtingerJet {
        &self + &rhs
    }
}

impl Sub for WirtingerJet {
    type Output = WirtingerJet;
    fn sub(self, rhs: WirtingerJet) -> WirtingerJet {
        &self - &rhs
    }
}

impl Mul for WirtingerJet {
    type Output = WirtingerJet;
    fn mul(self, rhs: WirtingerJet) -> WirtingerJet {
        &self * &rhs
    }
}

impl Neg for WirtingerJet {
    type Output = WirtingerJet;
    fn neg(self) -> WirtingerJet {
        -&self
    }
}

/// The operations available to [`combine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    PowInt(i32),
    Exp,
    Log,
    Conj,
    Neg,
}

/// Dispatches a unary or binary jet operation. Binary operations panic when
/// `b` is missing.
pub fn combine(op: JetOp, a: &WirtingerJet, b: Option<&WirtingerJet>) -> Result<WirtingerJet, JetError> {
    let rhs = || b.expect("binary jet operation needs a second operand");
    Ok(match op {
        JetOp::Add => a + rhs(),
        JetOp::Sub => a - rhs(),
        JetOp::Mul => a * rhs(),
        JetOp::Div => a.div(rhs())?,
        JetOp::PowInt(n) => a.powi(n)?,
        JetOp::Exp => a.exp(),
        JetOp::Log => a.ln()?,
        JetOp::Conj => a.conj(),
        JetOp::Neg => -a,
    })
}
