//! Deterministic sample grids over the base disk and the fiber box.
//!
//! Base points follow a sunflower (golden-angle) layout that starts at the
//! origin and ends on the boundary circle; fiber points follow a Fibonacci
//! lattice over the square [−R, R]². Both are fixed functions of their sizes,
//! so grids are reproducible across runs and thread counts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const GOLDEN_FRACTION: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub base: usize,
    pub fiber: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            base: crate::tolerances::GRID_BASE,
            fiber: crate::tolerances::GRID_FIBER,
        }
    }
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.base * self.fiber
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub row: usize,
    pub col: usize,
    pub x: Complex64,
    pub y: Complex64,
}

pub fn base_points(n: usize, radius: f64) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            if n == 1 {
                return Complex64::new(0.0, 0.0);
            }
            let rho = radius * (j as f64 / (n - 1) as f64).sqrt();
            let angle = std::f64::consts::TAU * (j as f64 * GOLDEN_FRACTION).fract();
            Complex64::from_polar(rho, angle)
        })
        .collect()
}

pub fn fiber_points(m: usize, bound: f64) -> Vec<Complex64> {
    (0..m)
        .map(|k| {
            let s = if m == 1 { 0.0 } else { 2.0 * k as f64 / (m - 1) as f64 - 1.0 };
            let t = 2.0 * (k as f64 * GOLDEN_FRACTION + 0.5).fract() - 1.0;
            Complex64::new(bound * s, bound * t)
        })
        .collect()
}

/// Row-major product grid: row = base point, column = fiber point.
pub fn grid_points(spec: GridSpec, base_radius: f64, fiber_bound: f64) -> Vec<GridPoint> {
    let xs = base_points(spec.base, base_radius);
    let ys = fiber_points(spec.fiber, fiber_bound);
    let mut out = Vec::with_capacity(spec.len());
    for (row, &x) in xs.iter().enumerate() {
        for (col, &y) in ys.iter().enumerate() {
            out.push(GridPoint { row, col, x, y });
        }
    }
    out
}
