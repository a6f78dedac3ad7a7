#![allow(dead_code)]

use folia::exprlang::{assert_y_holomorphic, parse, ExprKind, ParseError};

pub enum Case {
    /// Both sources parse to the same tree.
    Same(&'static str, &'static str),
    /// Parses, and printing then reparsing gives the same tree.
    RoundTrip(&'static str),
    /// Parses and prints exactly as given.
    Prints(&'static str, &'static str),
    /// Fails with an error whose span starts at the offset.
    ErrorAt(&'static str, usize),
    NonIntegerExponent(&'static str),
    ExponentOutOfRange(&'static str),
    /// y-holomorphy gate verdict.
    Gate(&'static str, bool),
}

pub const PARSER_CASES: &[Case] = &[
    Case::Same("1+2*x", "1+(2*x)"),
    Case::Same("x*y+i", "(x*y)+i"),
    Case::Same("x-y-1", "(x-y)-1"),
    Case::Same("x/y/2", "(x/y)/2"),
    Case::Same("-y^2", "-(y^2)"),
    Case::Same("2*-x", "2*(-x)"),
    Case::Same("y^2^3", "y^8"),
    Case::Same("--x", "-(-x)"),
    Case::Same("conj(x)+2", "(conj(x))+(2)"),
    Case::Same("exp(i*y)*2", "(exp(i*y))*2"),
    Case::Same("  x *\ty ", "x*y"),
    Case::Same("1.5e-3*x", "0.0015*x"),
    Case::Prints("x^-1", "x^-1"),
    Case::Prints("(-x)^2", "(-x)^2"),
    Case::Prints("x-(y-1)", "x-(y-1.0)"),
    Case::Prints("x/(y*2)", "x/(y*2.0)"),
    Case::RoundTrip("2*i*y^2/(conj(x)+2)^2"),
    Case::RoundTrip("-(x+y)"),
    Case::RoundTrip("(x-y)-(x-y)"),
    Case::RoundTrip("x/(y/2)"),
    Case::RoundTrip("log(1+x)-exp(-y)"),
    Case::RoundTrip("y*(conj(x)+2)/(y+conj(x)+2)"),
    Case::RoundTrip("1e-300*x"),
    Case::RoundTrip("x^-3*-y"),
    Case::ErrorAt("x*(y", 4),
    Case::ErrorAt("x $ y", 2),
    Case::ErrorAt("2*(x", 4),
    Case::ErrorAt("sin(x)", 0),
    Case::ErrorAt("x y", 2),
    Case::ErrorAt("", 0),
    Case::ErrorAt("x+", 2),
    Case::ErrorAt(")", 0),
    Case::ErrorAt("conj x", 5),
    Case::NonIntegerExponent("y^x"),
    Case::NonIntegerExponent("y^1.5"),
    Case::ExponentOutOfRange("y^17"),
    Case::ExponentOutOfRange("y^2^5"),
    Case::Gate("conj(y)", false),
    Case::Gate("exp(conj(x*y))", false),
    Case::Gate("y*conj(x)", true),
    Case::Gate("log(y+2)", true),
    Case::Gate("y^2+conj(x)^3", true),
];

fn describe(e: &ParseError) -> String {
    format!("{e} (span {}..{})", e.span().start, e.span().end)
}

pub fn run_case(case: &Case) -> Result<(), String> {
    match case {
        Case::Same(a, b) => {
            let (ta, tb) = (parse(a).map_err(|e| describe(&e))?, parse(b).map_err(|e| describe(&e))?);
            (ta == tb).then_some(()).ok_or_else(|| format!("{a:?} and {b:?} differ: {ta} vs {tb}"))
        }
        Case::RoundTrip(src) => {
            let t = parse(src).map_err(|e| describe(&e))?;
            let printed = t.to_string();
            let back = parse(&printed).map_err(|e| format!("reparse of {printed:?}: {}", describe(&e)))?;
            (back == t).then_some(()).ok_or_else(|| format!("{src:?} printed as {printed:?} reparses differently"))
        }
        Case::Prints(src, want) => {
            let got = parse(src).map_err(|e| describe(&e))?.to_string();
            (got == *want).then_some(()).ok_or_else(|| format!("{src:?} printed as {got:?}, want {want:?}"))
        }
        Case::ErrorAt(src, at) => match parse(src) {
            Ok(t) => Err(format!("{src:?} parsed as {t}")),
            Err(e) if e.span().start == *at => Ok(()),
            Err(e) => Err(format!("{src:?}: {}, want start {at}", describe(&e))),
        },
        Case::NonIntegerExponent(src) => match parse(src) {
            Err(ParseError::NonIntegerExponent { .. }) => Ok(()),
            other => Err(format!("{src:?}: {other:?}")),
        },
        Case::ExponentOutOfRange(src) => match parse(src) {
            Err(ParseError::ExponentOutOfRange { .. }) => Ok(()),
            other => Err(format!("{src:?}: {other:?}")),
        },
        Case::Gate(src, holomorphic) => {
            let t = parse(src).map_err(|e| describe(&e))?;
            let verdict = assert_y_holomorphic(&t).is_ok();
            (verdict == *holomorphic)
                .then_some(())
                .ok_or_else(|| format!("{src:?}: gate said {verdict}"))
        }
    }
}

pub fn is_pow(src: &str, n: i32) -> bool {
    matches!(parse(src).map(|e| e.kind), Ok(ExprKind::Pow(_, m)) if m == n)
}
