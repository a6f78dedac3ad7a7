//! Real-linear maps ℂ² → ℂ², stored as 4×4 real matrices acting on
//! (Re v₁, Im v₁, Re v₂, Im v₂).

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::wirtinger::{Dir, WirtingerJet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealLinear(pub Matrix4<f64>);

fn to_real(v: [Complex64; 2]) -> Vector4<f64> {
    Vector4::new(v[0].re, v[0].im, v[1].re, v[1].im)
}

fn from_real(r: Vector4<f64>) -> [Complex64; 2] {
    [Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3])]
}

impl RealLinear {
    /// Differential of (F₁, F₂) at the jets' base point, as a map of (v_x, v_y).
    pub fn differential(jets: &[WirtingerJet; 2]) -> RealLinear {
        let mut m = Matrix4::zeros();
        for (k, jet) in jets.iter().enumerate() {
            let columns = [
                jet.d1(Dir::X) + jet.d1(Dir::Xbar),
                Complex64::i() * (jet.d1(Dir::X) - jet.d1(Dir::Xbar)),
                jet.d1(Dir::Y) + jet.d1(Dir::Ybar),
                Complex64::i() * (jet.d1(Dir::Y) - jet.d1(Dir::Ybar)),
            ];
            for (c, col) in columns.iter().enumerate() {
                m[(2 * k, c)] = col.re;
                m[(2 * k + 1, c)] = col.im;
            }
        }
        RealLinear(m)
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        from_real(self.0 * to_real(v))
    }

    pub fn inverse(&self) -> Option<RealLinear> {
        let det = self.0.determinant();
        let scale = self.0.abs().max().powi(4).max(f64::MIN_POSITIVE);
        if !det.is_finite() || det.abs() < 1e-14 * scale {
            return None;
        }
        self.0.try_inverse().map(RealLinear)
    }

    pub fn compose(&self, inner: &RealLinear) -> RealLinear {
        RealLinear(self.0 * inner.0)
    }
}

/// Coefficients c with L(Z) = Σ c_j Z̄_j for the antilinear part of a
/// real-linear functional.
pub fn antilinear_coefficients(l: impl Fn([Complex64; 2]) -> Complex64) -> [Complex64; 2] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::i();
    let e = [[one, zero], [zero, one]];
    let ie = [[i, zero], [zero, i]];
    [0, 1].map(|j| (l(e[j]) + i * l(ie[j])) * 0.5)
}

/// Coefficients of the complex-linear part, L(Z) = Σ c_j Z_j + (antilinear).
pub fn linear_coefficients(l: impl Fn([Complex64; 2]) -> Complex64) -> [Complex64; 2] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::i();
    let e = [[one, zero], [zero, one]];
    let ie = [[i, zero], [zero, i]];
    [0, 1].map(|j| (l(e[j]) - i * l(ie[j])) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_linear_and_antilinear_parts() {
        let a = Complex64::new(0.3, -1.2);
        let b = Complex64::new(2.0, 0.5);
        let l = |z: [Complex64; 2]| a * z[0] + b * z[1].conj();
        let anti = antilinear_coefficients(l);
        let lin = linear_coefficients(l);
        assert!((anti[0]).norm() < 1e-15 && (anti[1] - b).norm() < 1e-15);
        assert!((lin[0] - a).norm() < 1e-15 && lin[1].norm() < 1e-15);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = RealLinear(Matrix4::new(
            2.0, 0.1, 0.0, 0.0, //
            0.0, 1.0, 0.3, 0.0, //
            0.0, 0.0, 1.5, -0.2, //
            0.4, 0.0, 0.0, 1.0,
        ));
        let inv = m.inverse().unwrap();
        let v = [Complex64::new(0.3, 0.1), Complex64::new(-1.0, 2.0)];
        let back = inv.apply(m.apply(v));
        assert!((back[0] - v[0]).norm() < 1e-14 && (back[1] - v[1]).norm() < 1e-14);
        assert!(RealLinear(Matrix4::zeros()).inverse().is_none());
    }
}
