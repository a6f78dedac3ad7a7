//! Non-holomorphy functions of cylinder maps and the hyperbolicity tensor Γ
//! of holomorphic foliations by parabolic curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curvature;
pub mod exprlang;
pub mod foliation;
pub mod grid;
pub mod holonomy;
pub mod invariants;
pub mod linear;
pub mod tolerances;
pub mod wirtinger;
