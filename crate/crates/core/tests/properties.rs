//! Property tests: jets against finite differences, algebraic laws of the
//! jet arithmetic, and the identities of ω and Γ under random data.

use folia::exprlang::{assert_y_holomorphic, eval, eval_jet, Expr};
use folia::foliation::{second_cylinder, Domain, FoliationModel};
use folia::invariants::{
    gamma_ambient, omega, pullback_identity_residual, random_fiber_affine, second_deriv_invariance_residual,
    shared_ambient_points,
};
use folia::wirtinger::{fd_wirtinger, Dir, FdOptions, MultiIndex};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C64 = Complex64;

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

fn point(radius: f64) -> impl Strategy<Value = C64> {
    (0.0f64..radius, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

/// Σ c·x^p·conj(x)^q·y^r (+ optional exponential factor), degrees ≤ 3.
fn smooth_expr(allow_conj_y: bool) -> impl Strategy<Value = Expr> {
    let term = (coeff(), 0i32..=3, 0i32..=3, 0i32..=3, 0i32..=2).prop_map(move |(c, p, q, r, s)| {
        let mut t = Expr::constant(c).mul(Expr::x().pow(p)).mul(Expr::x().conj().pow(q)).mul(Expr::y().pow(r));
        if allow_conj_y {
            t = t.mul(Expr::y().conj().pow(s));
        }
        t
    });
    (prop::collection::vec(term, 1..5), prop::option::of(coeff())).prop_map(|(terms, e)| {
        let sum = terms.into_iter().reduce(Expr::add).expect("non-empty");
        match e {
            Some(k) => sum.mul(Expr::constant(k * 0.3).mul(Expr::y()).add(Expr::x().conj()).call_exp()),
            None => sum,
        }
    })
}

trait CallExp {
    fn call_exp(self) -> Expr;
}

impl CallExp for Expr {
    fn call_exp(self) -> Expr {
        Expr::call(folia::exprlang::Func::Exp, self)
    }
}

fn indices() -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for a in 0..=2u8 {
        for b in 0..=2u8 {
            for c in 0..=2u8 {
                for d in 0..=2u8 {
                    if (1..=2).contains(&(a + b + c + d)) {
                        out.push(MultiIndex::new(a, b, c, d));
                    }
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_match_finite_differences(e in smooth_expr(true), x in point(0.8), y in point(1.5)) {
        let jet = eval_jet(&e, (x, y), 2).unwrap();
        let f = |a: C64, b: C64| eval(&e, a, b).ok();
        for idx in indices() {
            let fd = fd_wirtinger(f, (x, y), idx, FdOptions::default()).unwrap().value;
            let exact = jet.d(idx);
            prop_assert!((fd - exact).norm() <= 1e-5 * (1.0 + exact.norm()), "{idx:?}: {fd} vs {exact}");
        }
    }

    #[test]
    fn conjugation_is_an_involution(e in smooth_expr(true), x in point(0.8), y in point(1.5)) {
        let jet = eval_jet(&e, (x, y), 3).unwrap();
        prop_assert_eq!(jet.conj().conj().max_abs_diff(&jet), 0.0);
        let c = jet.conj();
        for (idx, v) in jet.derivs() {
            prop_assert_eq!(c.d(idx.conj()), v.conj());
        }
    }

    #[test]
    fn multiplication_commutes(a in smooth_expr(true), b in smooth_expr(true), x in point(0.8), y in point(1.5)) {
        let ja = eval_jet(&a, (x, y), 3).unwrap();
        let jb = eval_jet(&b, (x, y), 3).unwrap();
        let ab = &ja * &jb;
        let ba = &jb * &ja;
        let scale = 1.0 + ab.derivs().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        prop_assert!(ab.max_abs_diff(&ba) <= 1e-13 * scale);
    }

    #[test]
    fn y_holomorphic_expressions_have_zero_ybar_entries(e in smooth_expr(false), x in point(0.8), y in point(1.5)) {
        prop_assert!(assert_y_holomorphic(&e).is_ok());
        let jet = eval_jet(&e, (x, y), 4).unwrap();
        for (idx, v) in jet.derivs() {
            if idx.get(Dir::Ybar) > 0 {
                prop_assert_eq!(v, C64::new(0.0, 0.0), "{:?}", idx);
            }
        }
    }

    #[test]
    fn central_differences_are_second_order(e in smooth_expr(true), x in point(0.5), y in point(1.0)) {
        let exact = eval_jet(&e, (x, y), 3).unwrap().d1(Dir::Xbar);
        let f = |a: C64, b: C64| eval(&e, a, b).ok();
        let err = |h: f64| (fd_wirtinger(f, (x, y), MultiIndex::unit(Dir::Xbar), FdOptions::raw(h)).unwrap().value - exact).norm();
        let (e1, e2) = (err(0.005), err(0.0025));
        // Only meaningful when truncation error dominates rounding.
        prop_assume!(e2 > 1e-9);
        // Order at least two; exactly four when the h² term cancels.
        let order = (e1 / e2).log2();
        prop_assert!(order > 1.75, "observed order {order}");
    }
}

fn graph_f() -> impl Strategy<Value = Expr> {
    // f = c₀ + c₁·conj(x) + c₂·x·conj(x), with |f| ≥ 1 on the unit disk.
    (point(1.0), point(0.4), point(0.4)).prop_map(|(c0, c1, c2)| {
        Expr::constant(c0 + C64::new(2.5, 0.0))
            .add(Expr::constant(c1).mul(Expr::x().conj()))
            .add(Expr::constant(c2).mul(Expr::x()).mul(Expr::x().conj()))
    })
}

fn small_domain() -> Domain {
    Domain {
        grid: folia::grid::GridSpec { base: 7, fiber: 7 },
        ..Domain::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn omega_vanishes_on_transverse_disk(f in graph_f(), x in point(0.9)) {
        let model = FoliationModel::graph(f, small_domain()).unwrap();
        let om = omega(&model.cylinder_map(), (x, C64::new(0.0, 0.0))).unwrap();
        prop_assert!(om.value.norm() < 1e-10 && om.dy.norm() < 1e-10);
    }

    #[test]
    fn omega_is_leafwise_holomorphic(f in graph_f(), x in point(0.9), y in point(3.0)) {
        let model = FoliationModel::graph(f, small_domain()).unwrap();
        let map = model.cylinder_map();
        prop_assume!(map.clear_of_singularity(x, y));
        prop_assert!(omega(&map, (x, y)).unwrap().dybar.norm() < 1e-10);
    }

    #[test]
    fn pullback_identities_hold(f in graph_f(), seed in any::<u64>()) {
        let model = FoliationModel::graph(f, small_domain()).unwrap();
        let map = model.cylinder_map();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = random_fiber_affine(&mut rng, 0.3, &model.domain);
        let x = C64::new(0.2, -0.1);
        for y in [C64::new(0.5, 0.5), C64::new(-1.0, 0.3)] {
            let image = theta.apply(x, y).unwrap();
            prop_assume!(map.clear_of_singularity(image.0, image.1));
            prop_assert!(pullback_identity_residual(&map, &theta, (x, y)).unwrap() < 1e-9);
            prop_assert!(second_deriv_invariance_residual(&map, &theta, (x, y)).unwrap() < 1e-9);
        }
    }

    #[test]
    fn gamma_does_not_depend_on_the_cylinder(f in graph_f(), c in (0.3f64..1.2, -0.5f64..0.5)) {
        let model = FoliationModel::graph(f, small_domain()).unwrap();
        let c = C64::new(c.0, c.1);
        let other = match second_cylinder(&model, c) {
            Ok(m) => m,
            Err(_) => return Err(TestCaseError::reject("c too close to f")),
        };
        let map = model.cylinder_map();
        for (z, _) in shared_ambient_points(&model, &[&map, &other], 8) {
            let a = gamma_ambient(&map, z).unwrap().gamma_ambient;
            let b = gamma_ambient(&other, z).unwrap().gamma_ambient;
            let scale = 1.0 + a[0].norm().max(a[1].norm());
            prop_assert!((a[0] - b[0]).norm().max((a[1] - b[1]).norm()) < 1e-8 * scale);
        }
    }
}
