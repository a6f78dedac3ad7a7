//! Numeric thresholds shared by the pipeline, the CLI defaults and the tests.

/// Relative pole guard: a denominator d is refused when |d| < POLE_GUARD_REL·(1 + |numerator|).
pub const POLE_GUARD_REL: f64 = 1e-12;
/// Absolute guard on logarithm arguments.
pub const LOG_BRANCH_GUARD: f64 = 1e-12;
/// Largest |n| accepted in `expr^n`.
pub const MAX_EXPONENT: u32 = 16;

/// Identities that autodiff jets reproduce exactly up to rounding.
pub const VANISH_TOL: f64 = 1e-10;
/// Identities that involve one local inversion.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Pullback identities evaluated on composed maps.
pub const PULLBACK_TOL: f64 = 1e-9;
/// Tangency precondition for ω extraction.
pub const TANGENCY_TOL: f64 = 1e-8;
/// Trivialization holomorphy check for explicit cylinders.
pub const TRIVIALIZATION_TOL: f64 = 1e-8;
/// Relative factor for the "Γ is nonzero" certificate threshold.
pub const NONZERO_GAMMA_REL: f64 = 1e-4;
/// Below this |ω| the sampled region counts as ω ≡ 0.
pub const OMEGA_VANISH_TOL: f64 = 1e-8;

/// Newton inversion controls.
pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_STEP_TOL: f64 = 1e-13;
pub const INVERSION_TOL: f64 = 1e-12;

/// Period precheck |F(x, y+γ) − F(x, y)|.
pub const PERIOD_TOL: f64 = 1e-10;

/// Default finite-difference step for Wirtinger estimates.
pub const FD_STEP: f64 = 1e-4;
/// Default step for the leaf Laplacian stencil.
pub const LAPLACIAN_STEP: f64 = 1e-3;

/// Default validation grid and domain.
pub const GRID_BASE: usize = 21;
pub const GRID_FIBER: usize = 21;
pub const BASE_RADIUS: f64 = 0.9;
pub const FIBER_BOUND: f64 = 3.0;
pub const SINGULAR_CLEARANCE: f64 = 0.1;
