//! Browser bindings: leaf heatmaps of ω and Γ for a graph model, a grid
//! certificate, and an expression checker.

use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use folia::exprlang::{assert_y_holomorphic, parse};
use folia::foliation::{Domain, FoliationModel};
use folia::grid::GridSpec;
use folia::invariants::{certify, omega};

/// Which quantity a heatmap shows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Omega,
    Gamma,
}

fn graph_model(f: &str, grid: GridSpec) -> Result<FoliationModel, String> {
    let f = parse(f).map_err(|e| e.to_string())?;
    let domain = Domain {
        grid,
        ..Domain::default()
    };
    FoliationModel::graph(f, domain).map_err(|e| e.to_string())
}

/// Interleaved [re, im] samples of ω or Γ on an n×n grid over the fiber box
/// [−bound, bound]² at base point x, row-major from the top-left corner.
/// Points at or near the pole are NaN.
pub fn leaf_field(f: &str, x: Complex64, bound: f64, n: usize, quantity: Quantity) -> Result<Vec<f64>, String> {
    if n == 0 || n > 512 {
        return Err(format!("resolution {n} outside 1..=512"));
    }
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(format!("bound {bound} must be positive"));
    }
    let model = graph_model(f, GridSpec::default())?;
    if x.norm() > model.domain.base_radius {
        return Err(format!("|x| = {} lies outside the base disk", x.norm()));
    }
    let map = model.cylinder_map();
    let step = if n == 1 { 0.0 } else { 2.0 * bound / (n - 1) as f64 };
    let mut out = Vec::with_capacity(2 * n * n);
    for row in 0..n {
        for col in 0..n {
            let y = Complex64::new(-bound + col as f64 * step, bound - row as f64 * step);
            let v = if map.clear_of_singularity(x, y) {
                omega(&map, (x, y)).ok().map(|o| match quantity {
                    Quantity::Omega => o.value,
                    Quantity::Gamma => o.dyy,
                })
            } else {
                None
            };
            let v = v.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            out.push(v.re);
            out.push(v.im);
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CertificateView {
    verdict: String,
    max_gamma: f64,
    gamma_threshold: f64,
    max_f_dbar: f64,
    evaluated: usize,
    excluded: usize,
}

/// Certificate of the graph model over an n×n grid, as JSON.
pub fn certificate_json(f: &str, n: usize) -> Result<String, String> {
    if n == 0 || n > 64 {
        return Err(format!("grid size {n} outside 1..=64"));
    }
    let model = graph_model(f, GridSpec { base: n, fiber: n })?;
    let t = certify(&model, 3).map_err(|e| e.to_string())?;
    let view = CertificateView {
        verdict: t.verdict.to_string(),
        max_gamma: t.summary.max_gamma,
        gamma_threshold: t.gamma_threshold,
        max_f_dbar: t.summary.max_f_dbar,
        evaluated: t.points.len(),
        excluded: t.excluded.len(),
    };
    Ok(serde_json::to_string(&view).expect("certificate view serializes"))
}

#[derive(Serialize)]
struct ExprView {
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    printed: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y_holomorphic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    span: Option<[usize; 2]>,
}

/// Parse report for an expression, as JSON.
pub fn expression_json(src: &str) -> String {
    let view = match parse(src) {
        Ok(e) => {
            let gate = assert_y_holomorphic(&e);
            ExprView {
                ok: true,
                printed: Some(e.to_string()),
                y_holomorphic: Some(gate.is_ok()),
                error: None,
                span: gate.err().map(|s| [s.start, s.end]),
            }
        }
        Err(e) => {
            let s = e.span();
            ExprView {
                ok: false,
                printed: None,
                y_holomorphic: None,
                error: Some(e.to_string()),
                span: Some([s.start, s.end]),
            }
        }
    };
    serde_json::to_string(&view).expect("expression view serializes")
}

fn quantity(name: &str) -> Result<Quantity, JsValue> {
    match name {
        "omega" => Ok(Quantity::Omega),
        "gamma" => Ok(Quantity::Gamma),
        other => Err(JsValue::from_str(&format!("unknown quantity {other}"))),
    }
}

#[wasm_bindgen(js_name = leafField)]
pub fn leaf_field_js(f: &str, x_re: f64, x_im: f64, bound: f64, n: usize, which: &str) -> Result<Vec<f64>, JsValue> {
    leaf_field(f, Complex64::new(x_re, x_im), bound, n, quantity(which)?).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = certifyGraph)]
pub fn certify_graph_js(f: &str, n: usize) -> Result<String, JsValue> {
    certificate_json(f, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = checkExpression)]
pub fn check_expression_js(src: &str) -> String {
    expression_json(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_heatmap_matches_closed_form() {
        // Γ = 4i/f² on every leaf, constant in y.
        let v = leaf_field("conj(x)+2", Complex64::new(0.0, 0.0), 3.0, 5, Quantity::Gamma).unwrap();
        assert_eq!(v.len(), 50);
        for pair in v.chunks(2) {
            if pair[0].is_nan() {
                continue;
            }
            assert!((pair[0]).abs() < 1e-10 && (pair[1] - 1.0).abs() < 1e-10, "{pair:?}");
        }
    }

    #[test]
    fn pole_samples_are_nan() {
        // y = −2 is the pole at x = 0; it sits on the 5×5 grid over [−2, 2]².
        let v = leaf_field("conj(x)+2", Complex64::new(0.0, 0.0), 2.0, 5, Quantity::Omega).unwrap();
        let idx = 2 * (2 * 5);
        assert!(v[idx].is_nan());
    }

    #[test]
    fn certificate_verdicts() {
        assert!(certificate_json("conj(x)+2", 7).unwrap().contains("hyperbolic-evidence"));
        assert!(certificate_json("x/2+2", 7).unwrap().contains("cylinder-exhibited"));
        assert!(certificate_json("conj(", 7).is_err());
    }

    #[test]
    fn expression_reports() {
        let ok = expression_json("y*exp(conj(x))");
        assert!(ok.contains("\"y_holomorphic\":true"));
        let gated = expression_json("conj(y)");
        assert!(gated.contains("\"y_holomorphic\":false"));
        let bad = expression_json("2*(x");
        assert!(bad.contains("\"ok\":false") && bad.contains("\"span\":[4,4]"));
    }
}
