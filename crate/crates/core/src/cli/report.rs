use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::invariants::{ExcludedPoint, PointRecord, ResidualSummary, Verdict};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_HEADER: &str = "x_re,x_im,y_re,y_im,omega_re,omega_im,gamma_re,gamma_im,tangency_res,holo_res";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// A measured quantity and the bound it is judged against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// "below": pass iff value < bound; "above": pass iff value > bound;
    /// "info": never fails.
    pub rule: Rule,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Below,
    Above,
    Info,
}

impl Residual {
    pub fn below(value: f64, bound: f64) -> Self {
        Residual {
            value,
            bound: Some(bound),
            rule: Rule::Below,
            pass: value < bound,
        }
    }

    pub fn above(value: f64, bound: f64) -> Self {
        Residual {
            value,
            bound: Some(bound),
            rule: Rule::Above,
            pass: value > bound,
        }
    }

    pub fn info(value: f64) -> Self {
        Residual {
            value,
            bound: None,
            rule: Rule::Info,
            pass: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub status: Status,
    /// Keyed by residual name; BTreeMap keeps the order stable.
    pub residuals: BTreeMap<String, Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl CheckOutcome {
    pub fn judged(name: &str, residuals: BTreeMap<String, Residual>) -> Self {
        let pass = residuals.values().all(|r| r.pass);
        CheckOutcome {
            name: name.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            residuals,
            message: None,
        }
    }

    pub fn error(name: &str, message: String) -> Self {
        CheckOutcome {
            name: name.to_string(),
            status: Status::Error,
            residuals: BTreeMap::new(),
            message: Some(message),
        }
    }

    pub fn with_message(mut self, message: impl Into<String>) -> Self {
        self.message = Some(message.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub gamma_threshold: f64,
    pub summary: ResidualSummary,
    pub evaluated_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub manifest_sha256: String,
    pub command: String,
    pub model: String,
    pub seed: u64,
    pub dd_c_convention: String,
    pub checks: Vec<CheckOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    pub excluded: Vec<ExcludedPoint>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(command: &str, model: &str, manifest_bytes: &[u8], seed: u64) -> Self {
        RunReport {
            tool: TOOL.into(),
            version: VERSION.into(),
            manifest_sha256: digest(manifest_bytes),
            command: command.into(),
            model: model.into(),
            seed,
            dd_c_convention: "ddc u = (1/4) * laplacian(u) per Euclidean leaf area".into(),
            checks: Vec::new(),
            certificate: None,
            excluded: Vec::new(),
            passed: false,
        }
    }

    pub fn finish(&mut self) {
        self.passed = self.checks.iter().all(|c| c.status == Status::Pass);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One CSV row per evaluated point, row-major, shortest round-trip floats.
pub fn grid_csv(points: &[PointRecord]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        let fields = [
            p.x.re,
            p.x.im,
            p.y.re,
            p.y.im,
            p.omega.re,
            p.omega.im,
            p.gamma.re,
            p.gamma.im,
            p.tangency_res,
            p.holo_res,
        ];
        for (i, v) in fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:?}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn csv_uses_round_trip_formatting() {
        let p = PointRecord {
            row: 0,
            col: 0,
            x: Complex64::new(0.1, 0.0),
            y: Complex64::new(-3.0, 1e-300),
            omega: Complex64::new(0.0, 0.5),
            omega_y: Complex64::new(0.0, 1.0),
            gamma: Complex64::new(0.0, 1.0),
            a_coefficient: Complex64::new(0.0, -1.0),
            tangency_res: 0.0,
            holo_res: 0.0,
            consistency_res: 0.0,
            f_dbar: 0.0,
            oracle_res: None,
        };
        let csv = grid_csv(&[p]);
        let row = csv.lines().nth(1).unwrap();
        assert_eq!(row, "0.1,0.0,-3.0,1e-300,0.0,0.5,0.0,1.0,0.0,0.0");
        for field in row.split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v:?}"), field);
        }
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(digest(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
