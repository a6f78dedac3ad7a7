//! Central-difference estimates of Wirtinger partials.
//!
//! Each Wirtinger operator is expanded into real partials in the four real
//! directions u = Re x, v = Im x, s = Re y, t = Im y using
//! ∂ = ½(∂ᵤ − i∂ᵥ) and ∂̄ = ½(∂ᵤ + i∂ᵥ). Every real mixed partial is then a
//! tensor product of second-order accurate 1-D central stencils. This path
//! never touches jet arithmetic, so it can be used to cross-check it.

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use super::jet::MultiIndex;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FdError {
    #[error("stencil point x={x}, y={y} is outside the function's domain")]
    StencilOutsideDomain { x: Complex64, y: Complex64 },
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("derivative order {0} not supported by the stencil table")]
    OrderTooHigh(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    pub step: f64,
    /// One level of Richardson extrapolation, combining h and h/2.
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            step: crate::tolerances::FD_STEP,
            richardson: true,
        }
    }
}

impl FdOptions {
    pub fn raw(step: f64) -> Self {
        Self {
            step,
            richardson: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEstimate {
    pub value: Complex64,
    pub step: f64,
}

// (offset, weight) pairs, to be divided by h^k.
fn stencil(order: u8) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("checked by caller"),
    }
}

/// Expands ∂x^a ∂x̄^b ∂y^c ∂ȳ^d into Σ coeff · ∂ᵤ^p ∂ᵥ^q ∂ₛ^r ∂ₜ^w.
fn real_expansion(index: MultiIndex) -> HashMap<[u8; 4], Complex64> {
    let half = Complex64::new(0.5, 0.0);
    let i_half = Complex64::new(0.0, 0.5);
    // (real slot, imaginary slot, sign of the imaginary part)
    let factors = std::iter::repeat_n((0usize, 1usize, -1.0), index.x as usize)
        .chain(std::iter::repeat_n((0, 1, 1.0), index.xbar as usize))
        .chain(std::iter::repeat_n((2, 3, -1.0), index.y as usize))
        .chain(std::iter::repeat_n((2, 3, 1.0), index.ybar as usize));
    let mut terms: HashMap<[u8; 4], Complex64> = HashMap::from([([0u8; 4], Complex64::new(1.0, 0.0))]);
    for (re_slot, im_slot, sign) in factors {
        let mut next: HashMap<[u8; 4], Complex64> = HashMap::new();
        for (m, c) in &terms {
            let mut mr = *m;
            mr[re_slot] += 1;
            *next.entry(mr).or_default() += c * half;
            let mut mi = *m;
            mi[im_slot] += 1;
            *next.entry(mi).or_default() += c * i_half * sign;
        }
        terms = next;
    }
    terms.retain(|_, c| c.norm() > 0.0);
    terms
}

fn estimate_once<F>(f: &F, point: (Complex64, Complex64), index: MultiIndex, h: f64) -> Result<Complex64, FdError>
where
    F: Fn(Complex64, Complex64) -> Option<Complex64>,
{
    let mut cache: HashMap<[i32; 4], Complex64> = HashMap::new();
    let mut eval = |off: [i32; 4]| -> Result<Complex64, FdError> {
        if let Some(v) = cache.get(&off) {
            return Ok(*v);
        }
        let x = point.0 + Complex64::new(off[0] as f64 * h, off[1] as f64 * h);
        let y = point.1 + Complex64::new(off[2] as f64 * h, off[3] as f64 * h);
        let v = f(x, y).ok_or(FdError::StencilOutsideDomain { x, y })?;
        cache.insert(off, v);
        Ok(v)
    };
    let mut total = Complex64::new(0.0, 0.0);
    for (powers, coeff) in real_expansion(index) {
        let order: i32 = powers.iter().map(|&p| p as i32).sum();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(ou, wu) in stencil(powers[0]) {
            for &(ov, wv) in stencil(powers[1]) {
                for &(os, ws) in stencil(powers[2]) {
                    for &(ot, wt) in stencil(powers[3]) {
                        acc += eval([ou, ov, os, ot])? * (wu * wv * ws * wt);
                    }
                }
            }
        }
        total += coeff * acc / h.powi(order);
    }
    Ok(total)
}

/// Estimates the Wirtinger partial ∂^index of `f` at `point`.
///
/// `f` returns `None` outside its domain. The raw estimator is O(h²); with
/// Richardson enabled the estimates at h and h/2 are combined to cancel the
/// leading error term.
pub fn fd_wirtinger<F>(f: F, point: (Complex64, Complex64), index: MultiIndex, opts: FdOptions) -> Result<FdEstimate, FdError>
where
    F: Fn(Complex64, Complex64) -> Option<Complex64>,
{
    if !(opts.step > 0.0) {
        return Err(FdError::BadStep(opts.step));
    }
    if index.as_array().iter().any(|&p| p > 4) {
        return Err(FdError::OrderTooHigh(index.order()));
    }
    let coarse = estimate_once(&f, point, index, opts.step)?;
    let value = if opts.richardson {
        let fine = estimate_once(&f, point, index, opts.step / 2.0)?;
        (fine * 4.0 - coarse) / 3.0
    } else {
        coarse
    };
    Ok(FdEstimate {
        value,
        step: opts.step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn conj_x_dxbar_is_one() {
        let est = fd_wirtinger(
            |x, _| Some(x.conj()),
            (c(0.3, -0.7), c(1.0, 2.0)),
            MultiIndex::new(0, 1, 0, 0),
            FdOptions::raw(1e-4),
        )
        .unwrap();
        assert!((est.value - c(1.0, 0.0)).norm() < 1e-8);
        assert_eq!(est.step, 1e-4);
    }

    #[test]
    fn modulus_squared_mixed() {
        let est = fd_wirtinger(
            |x, _| Some(x * x.conj()),
            (c(1.0, 0.0), c(0.0, 0.0)),
            MultiIndex::new(1, 1, 0, 0),
            FdOptions::raw(1e-3),
        )
        .unwrap();
        assert!((est.value - c(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn second_order_convergence() {
        // f = exp(x + x̄²); ∂x̄ f = 2x̄ f.
        let f = |x: Complex64, _y: Complex64| Some((x + x.conj() * x.conj()).exp());
        let p = (c(0.3, 0.2), c(0.0, 0.0));
        let exact = p.0.conj() * 2.0 * (p.0 + p.0.conj() * p.0.conj()).exp();
        let idx = MultiIndex::new(0, 1, 0, 0);
        let h = 1e-2;
        let e1 = (fd_wirtinger(f, p, idx, FdOptions::raw(h)).unwrap().value - exact).norm();
        let e2 = (fd_wirtinger(f, p, idx, FdOptions::raw(h / 2.0)).unwrap().value - exact).norm();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() <= 1.0, "ratio {ratio}");
    }

    #[test]
    fn outside_domain() {
        let r = fd_wirtinger(
            |x, _| if x.re > 0.0 { Some(x) } else { None },
            (c(0.0, 0.0), c(0.0, 0.0)),
            MultiIndex::new(1, 0, 0, 0),
            FdOptions::default(),
        );
        assert!(matches!(r, Err(FdError::StencilOutsideDomain { .. })));
    }

    #[test]
    fn bad_step() {
        let r = fd_wirtinger(|x, _| Some(x), (c(0.0, 0.0), c(0.0, 0.0)), MultiIndex::new(1, 0, 0, 0), FdOptions::raw(0.0));
        assert!(matches!(r, Err(FdError::BadStep(_))));
    }

    #[test]
    fn expansion_of_laplacian_operator() {
        // 4 ∂y∂ȳ = ∂ₛ² + ∂ₜ²
        let e = real_expansion(MultiIndex::new(0, 0, 1, 1));
        assert_eq!(e.len(), 2);
        assert!((e[&[0, 0, 2, 0]] - c(0.25, 0.0)).norm() < 1e-15);
        assert!((e[&[0, 0, 0, 2]] - c(0.25, 0.0)).norm() < 1e-15);
    }
}
