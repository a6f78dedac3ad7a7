mod common;

use folia::exprlang::{parse, BinOp, Expr, ExprKind, Func};
use proptest::prelude::*;

#[test]
fn case_table() {
    let failures: Vec<String> = common::PARSER_CASES.iter().filter_map(|c| common::run_case(c).err()).collect();
    assert!(common::PARSER_CASES.len() >= 30);
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn negative_exponent_folds() {
    assert!(common::is_pow("y^-1^3", -1));
    assert!(common::is_pow("y^2^3", 8));
}

#[test]
fn root_operator_of_mixed_chain() {
    let e = parse("x+y*2-i/y").unwrap();
    assert!(matches!(e.kind, ExprKind::Binary(BinOp::Sub, _, _)));
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::x()),
        Just(Expr::y()),
        Just(Expr::i()),
        (0u32..1000, -3i32..4).prop_map(|(m, e)| Expr::num(m as f64 * 10f64.powi(e))),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(8, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(b)),
            (inner.clone(), -16i32..=16).prop_map(|(a, n)| a.pow(n)),
            (inner, 0usize..3).prop_map(|(a, k)| Expr::call([Func::Conj, Func::Exp, Func::Log][k], a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_is_identity(e in tree()) {
        prop_assume!(e.depth() <= 8);
        let printed = e.to_string();
        let back = parse(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(back, e, "{}", printed);
    }
}
