//! Manifest schema. Expressions are strings in the expression language;
//! complex numbers are `[re, im]` pairs.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprlang::{parse, Expr, ParseError};
use crate::foliation::{CylinderMap, Domain, FoliationError, FoliationModel};
use crate::grid::GridSpec;

pub type Pair = [f64; 2];

pub fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest is not valid JSON for the schema (line {line}, column {column}): {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("expression at {field}: {source} in \"{text}\"")]
    Expr {
        field: String,
        text: String,
        #[source]
        source: ParseError,
    },
    #[error("model rejected: {0}")]
    Model(#[from] FoliationError),
    #[error("{0}")]
    Invalid(String),
}

impl From<serde_json::Error> for ManifestError {
    fn from(e: serde_json::Error) -> Self {
        ManifestError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub fn expr(field: &str, text: &str) -> Result<Expr, ManifestError> {
    parse(text).map_err(|source| ManifestError::Expr {
        field: field.to_string(),
        text: text.to_string(),
        source,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(default = "default_radius")]
    pub base_radius: f64,
    #[serde(default = "default_bound")]
    pub fiber_bound: f64,
    #[serde(default = "default_clearance")]
    pub clearance: f64,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

fn default_radius() -> f64 {
    crate::tolerances::BASE_RADIUS
}

fn default_bound() -> f64 {
    crate::tolerances::FIBER_BOUND
}

fn default_clearance() -> f64 {
    crate::tolerances::SINGULAR_CLEARANCE
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec {
            base_radius: default_radius(),
            fiber_bound: default_bound(),
            clearance: default_clearance(),
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Graph {
        f: String,
        #[serde(default)]
        domain: DomainSpec,
    },
    Product {
        #[serde(default)]
        domain: DomainSpec,
    },
    Explicit {
        f1: String,
        f2: String,
        #[serde(default)]
        domain: DomainSpec,
    },
    /// A y-holomorphic immersion that is not required to have a holomorphic
    /// transverse disk and trivialization (e.g. a leaf-periodic family).
    Leafwise {
        f1: String,
        f2: String,
        #[serde(default)]
        domain: DomainSpec,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Graph { .. } => "graph",
            ModelSpec::Product { .. } => "product",
            ModelSpec::Explicit { .. } => "explicit",
            ModelSpec::Leafwise { .. } => "leafwise",
        }
    }

    fn domain_spec(&self) -> &DomainSpec {
        match self {
            ModelSpec::Graph { domain, .. }
            | ModelSpec::Product { domain }
            | ModelSpec::Explicit { domain, .. }
            | ModelSpec::Leafwise { domain, .. } => domain,
        }
    }

    pub fn domain(&self, grid_override: Option<GridSpec>) -> Domain {
        let d = self.domain_spec();
        Domain {
            base_radius: d.base_radius,
            fiber_bound: d.fiber_bound,
            clearance: d.clearance,
            grid: grid_override.or(d.grid).unwrap_or_default(),
        }
    }
}

/// A resolved model: a foliation model when the map belongs to the class
/// of cylinders, or a bare leafwise map otherwise.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Resolved {
    Model(FoliationModel),
    Leafwise(CylinderMap),
}

impl Resolved {
    pub fn map(&self) -> CylinderMap {
        match self {
            Resolved::Model(m) => m.cylinder_map(),
            Resolved::Leafwise(map) => map.clone(),
        }
    }

    pub fn model(&self) -> Option<&FoliationModel> {
        match self {
            Resolved::Model(m) => Some(m),
            Resolved::Leafwise(_) => None,
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Resolved::Model(m) => m.domain,
            Resolved::Leafwise(map) => *map.domain(),
        }
    }
}

pub fn resolve(spec: &ModelSpec, grid_override: Option<GridSpec>) -> Result<Resolved, ManifestError> {
    let domain = spec.domain(grid_override);
    Ok(match spec {
        ModelSpec::Graph { f, .. } => Resolved::Model(FoliationModel::graph(expr("model.f", f)?, domain)?),
        ModelSpec::Product { .. } => Resolved::Model(FoliationModel::product(domain)?),
        ModelSpec::Explicit { f1, f2, .. } => {
            Resolved::Model(FoliationModel::explicit(expr("model.f1", f1)?, expr("model.f2", f2)?, domain)?)
        }
        ModelSpec::Leafwise { f1, f2, .. } => {
            Resolved::Leafwise(CylinderMap::leafwise(expr("model.f1", f1)?, expr("model.f2", f2)?, domain)?)
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSpec {
    #[serde(default = "default_theta1")]
    pub theta1: String,
    pub a: String,
    pub b: String,
}

fn default_theta1() -> String {
    "x".into()
}

fn default_points() -> usize {
    50
}

fn default_chart_points() -> usize {
    20
}

fn default_per_theta() -> usize {
    5
}

fn default_c() -> Pair {
    [1.0, 0.0]
}

fn default_period_grid() -> GridSpec {
    GridSpec { base: 5, fiber: 5 }
}

/// The fixed registry of named checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// |ω| and |∂ω/∂y| vanish on the transverse disk y = 0.
    BaseConditions,
    /// ∂ω/∂ȳ vanishes over the grid.
    LeafwiseHolomorphy,
    /// ∂F/∂x̄ is tangent to the leaves over the grid.
    Tangency,
    /// F⁻¹∘F is the identity over the grid.
    Inversion,
    /// Graph models: ω against 2i y² f_x̄/f², by jets and by finite differences.
    OmegaOracle {
        #[serde(default)]
        fd_step: Option<f64>,
    },
    /// Graph models: ambient Γ agrees for F and the second cylinder through c.
    GammaIndependence {
        #[serde(default = "default_c")]
        c: Pair,
        #[serde(default = "default_points")]
        points: usize,
    },
    /// Graph models: chart formula against ∂²ω/∂y² at y = 0.
    ChartFormula {
        #[serde(default = "default_chart_points")]
        points: usize,
    },
    /// Both pullback identities for listed and/or seeded random θ.
    Pullback {
        #[serde(default)]
        thetas: Vec<ThetaSpec>,
        #[serde(default)]
        random: usize,
        #[serde(default = "default_per_theta")]
        points_per_theta: usize,
    },
    /// The two ∂̄-conditions on a disk function and a slope function, either
    /// given or taken from the second cylinder through c.
    Admissibility {
        #[serde(default)]
        disk: Option<String>,
        #[serde(default)]
        slope: Option<String>,
        #[serde(default)]
        c: Option<Pair>,
    },
    /// Graph models: A_{F′} = A_F − π̃*A_F.
    AChange {
        #[serde(default = "default_c")]
        c: Pair,
        #[serde(default = "default_points")]
        points: usize,
    },
    /// Graph models: the connection coefficient agrees for F and F′.
    Connection {
        #[serde(default = "default_c")]
        c: Pair,
        #[serde(default = "default_points")]
        points: usize,
    },
    /// ω(x, y+γ) − ω(x, y) = −2i ∂γ/∂x̄ on a small grid.
    Periodicity {
        gamma: String,
        #[serde(default = "default_period_grid")]
        grid: GridSpec,
    },
    /// h(y+γ_j) = conj(γ̃_j)·h(y) on samples of an expression h(y).
    HolonomyGrowth {
        h: String,
        ys: Vec<Pair>,
        /// Pairs [γ_j, γ̃_j].
        generators: Vec<[Pair; 2]>,
    },
    /// h(y) = C·exp(ρy) fit on samples of an expression h(y).
    ExponentialFit { h: String, ys: Vec<Pair> },
    /// dd^c φ ≤ −ε·g on samples.
    Curvature {
        phi: String,
        #[serde(default = "default_g")]
        g: String,
        epsilon: f64,
        samples: Vec<Pair>,
    },
    /// Δ log|h|² = 0 for a leafwise holomorphic h.
    LogHarmonicity {
        field: String,
        samples: Vec<Pair>,
        #[serde(default)]
        zeros: Vec<Pair>,
        #[serde(default)]
        clearance: f64,
    },
}

fn default_g() -> String {
    "1".into()
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::BaseConditions => "base_conditions",
            CheckSpec::LeafwiseHolomorphy => "leafwise_holomorphy",
            CheckSpec::Tangency => "tangency",
            CheckSpec::Inversion => "inversion",
            CheckSpec::OmegaOracle { .. } => "omega_oracle",
            CheckSpec::GammaIndependence { .. } => "gamma_independence",
            CheckSpec::ChartFormula { .. } => "chart_formula",
            CheckSpec::Pullback { .. } => "pullback",
            CheckSpec::Admissibility { .. } => "admissibility",
            CheckSpec::AChange { .. } => "a_change",
            CheckSpec::Connection { .. } => "connection",
            CheckSpec::Periodicity { .. } => "periodicity",
            CheckSpec::HolonomyGrowth { .. } => "holonomy_growth",
            CheckSpec::ExponentialFit { .. } => "exponential_fit",
            CheckSpec::Curvature { .. } => "curvature",
            CheckSpec::LogHarmonicity { .. } => "log_harmonicity",
        }
    }

    /// Parses every expression the check references.
    pub fn validate(&self, index: usize) -> Result<(), ManifestError> {
        let at = |field: &str| format!("checks[{index}].{field}");
        match self {
            CheckSpec::Pullback { thetas, .. } => {
                for (k, t) in thetas.iter().enumerate() {
                    expr(&at(&format!("thetas[{k}].theta1")), &t.theta1)?;
                    expr(&at(&format!("thetas[{k}].a")), &t.a)?;
                    expr(&at(&format!("thetas[{k}].b")), &t.b)?;
                }
            }
            CheckSpec::Admissibility { disk, slope, c } => {
                match (disk, slope, c) {
                    (Some(d), Some(s), None) => {
                        expr(&at("disk"), d)?;
                        expr(&at("slope"), s)?;
                    }
                    (None, None, Some(_)) => {}
                    _ => {
                        return Err(ManifestError::Invalid(format!(
                            "checks[{index}]: admissibility needs either disk and slope, or c"
                        )))
                    }
                }
            }
            CheckSpec::Periodicity { gamma, .. } => {
                expr(&at("gamma"), gamma)?;
            }
            CheckSpec::HolonomyGrowth { h, .. } | CheckSpec::ExponentialFit { h, .. } => {
                expr(&at("h"), h)?;
            }
            CheckSpec::Curvature { phi, g, .. } => {
                expr(&at("phi"), phi)?;
                expr(&at("g"), g)?;
            }
            CheckSpec::LogHarmonicity { field, .. } => {
                expr(&at("field"), field)?;
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub model: ModelSpec,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Manifest, ManifestError> {
        let m: Manifest = serde_json::from_str(text)?;
        for (i, c) in m.checks.iter().enumerate() {
            c.validate(i)?;
        }
        Ok(m)
    }
}
