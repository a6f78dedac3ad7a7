//! Forward-mode Wirtinger jets and an independent finite-difference oracle.

mod fd;
mod jet;

pub use fd::{fd_wirtinger, FdError, FdEstimate, FdOptions};
pub use jet::{combine, Dir, JetError, JetOp, MultiIndex, Var, WirtingerJet, DEFAULT_ORDER, MAX_ORDER};

use num_complex::Complex64;

/// Jet of a coordinate function at `point`.
pub fn jet_seed(point: (Complex64, Complex64), var: Var, order: u8) -> Result<WirtingerJet, JetError> {
    WirtingerJet::seed(point, var, order)
}

/// |∂(conj var) jet|, the first-order antiholomorphic defect in `var`.
pub fn holomorphy_residual(jet: &WirtingerJet, var: Var) -> f64 {
    jet.holomorphy_residual(var)
}
