//! The run-spec file: a TOML document naming a model, an optional
//! B-field, a sample and the suites to run.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::deformations::BTransformation;
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::geometry::{Chart, Point, TensorField};
use crate::models::{FlatModel, Model, TangentBundleModel};
use crate::parastructure::{ParaHermitianStructure, Sign};
use crate::sampling::{uniform_points, Region};

pub const SUITES: [&str; 11] = [
    "validate",
    "classify",
    "adapted",
    "courant_plus",
    "courant_minus",
    "d_bracket_axioms",
    "jacobi_defect_witness",
    "section_condition",
    "maurer_cartan",
    "fluxes",
    "twisted",
];

/// Default tolerance of each suite.
pub fn default_tolerance(suite: &str) -> f64 {
    match suite {
        "validate" => 1e-10,
        "fluxes" => 1e-10,
        _ => 1e-9,
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_order")]
    pub jet_order: usize,
    #[serde(default)]
    pub suites: Vec<String>,
    pub model: ModelSpec,
    pub b_field: Option<BFieldSpec>,
    #[serde(default)]
    pub sample: SampleSpec,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

fn default_order() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Flat {
        #[serde(default = "default_n")]
        n: usize,
    },
    TangentBundle {
        /// `"sphere"` or `"euclidean"`; otherwise `coords` and `g` are required.
        preset: Option<String>,
        #[serde(default)]
        coords: Vec<String>,
        velocities: Option<Vec<String>>,
        #[serde(default)]
        g: Vec<String>,
        /// Coordinate index where `g` degenerates; sampling keeps
        /// `|sin x^i| > 0.05`.
        pole_guard: Option<usize>,
    },
    Explicit {
        coords: Vec<String>,
        /// Whether the first half of the coordinates span `T₊`.
        #[serde(default)]
        split: bool,
        eta: Vec<String>,
        k: Vec<String>,
    },
}

fn default_n() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BFieldSpec {
    #[serde(default = "default_side")]
    pub side: String,
    /// Either all `dim²` components, or the `n²` block on the transformed
    /// side when the chart is split.
    pub components: Vec<String>,
}

fn default_side() -> String {
    "plus".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_count")]
    pub count: usize,
    pub seed: Option<u64>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    /// Random field triples per bracket suite.
    #[serde(default = "default_fields")]
    pub fields: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            mode: default_mode(),
            count: default_count(),
            seed: None,
            lower: None,
            upper: None,
            points: Vec::new(),
            fields: default_fields(),
        }
    }
}

fn default_mode() -> String {
    "uniform".into()
}

fn default_count() -> usize {
    10
}

fn default_fields() -> usize {
    5
}

fn spec_error(location: impl Into<String>, message: impl ToString) -> Error {
    Error::SpecParse {
        location: location.into(),
        message: message.to_string(),
    }
}

/// Parses a spec from TOML text. Syntax errors are located by line and
/// column, semantic errors by key path.
pub fn parse_spec(text: &str) -> Result<RunSpec> {
    let spec: RunSpec = toml::from_str(text).map_err(|e| {
        let location = e
            .span()
            .map(|s| {
                let before = &text[..s.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let col = s.start - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                format!("line {line}, column {col}")
            })
            .unwrap_or_else(|| "document".into());
        spec_error(location, e.message())
    })?;
    spec.check()?;
    Ok(spec)
}

impl RunSpec {
    fn check(&self) -> Result<()> {
        for (i, s) in self.suites.iter().enumerate() {
            if !SUITES.contains(&s.as_str()) {
                return Err(spec_error(format!("suites[{i}]"), format!("unknown suite `{s}`")));
            }
        }
        for (k, v) in &self.tolerances {
            if !SUITES.contains(&k.as_str()) {
                return Err(spec_error(format!("tolerances.{k}"), "not a suite name"));
            }
            if !(*v > 0.0) {
                return Err(spec_error(format!("tolerances.{k}"), "tolerance must be > 0"));
            }
        }
        if self.sample.count == 0 {
            return Err(spec_error("sample.count", "count must be >= 1"));
        }
        if self.sample.fields == 0 {
            return Err(spec_error("sample.fields", "count must be >= 1"));
        }
        if !matches!(self.sample.mode.as_str(), "uniform" | "points") {
            return Err(spec_error("sample.mode", "expected `uniform` or `points`"));
        }
        if self.sample.mode == "points" && self.sample.points.is_empty() {
            return Err(spec_error("sample.points", "point list must not be empty"));
        }
        if let ModelSpec::Flat { n } = self.model {
            if n == 0 {
                return Err(spec_error("model.n", "n must be >= 1"));
            }
        }
        if let Some(b) = &self.b_field {
            if !matches!(b.side.as_str(), "plus" | "minus") {
                return Err(spec_error("b_field.side", "expected `plus` or `minus`"));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, suite: &str) -> f64 {
        self.tolerances.get(suite).copied().unwrap_or_else(|| default_tolerance(suite))
    }

    pub fn sample_seed(&self) -> u64 {
        self.sample.seed.unwrap_or(self.seed)
    }
}

fn parse_components(chart: &Chart, sources: &[String], key: &str, expected: usize) -> Result<Vec<Expr>> {
    if sources.len() != expected {
        return Err(spec_error(key, format!("expected {expected} components, found {}", sources.len())));
    }
    sources
        .iter()
        .enumerate()
        .map(|(i, s)| parse_expr(s, chart.coord_names()).map_err(|e| spec_error(format!("{key}[{i}]"), e)))
        .collect()
}

fn located(key: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        e @ Error::SpecParse { .. } => e,
        e => spec_error(key, e),
    }
}

/// Builds the model named by the spec.
pub fn build_model(spec: &ModelSpec) -> Result<Model> {
    match spec {
        ModelSpec::Flat { n } => Ok(Model::Flat(FlatModel::new(*n).map_err(located("model"))?)),
        ModelSpec::TangentBundle {
            preset,
            coords,
            velocities,
            g,
            pole_guard,
        } => {
            let m = match preset.as_deref() {
                Some("sphere") => TangentBundleModel::sphere(),
                Some("euclidean") => TangentBundleModel::euclidean(coords.len().max(2)),
                Some(other) => return Err(spec_error("model.preset", format!("unknown preset `{other}`"))),
                None => {
                    if coords.is_empty() {
                        return Err(spec_error("model.coords", "base coordinates are required"));
                    }
                    let n = coords.len();
                    if g.len() != n * n {
                        return Err(spec_error("model.g", format!("expected {} components, found {}", n * n, g.len())));
                    }
                    let refs: Vec<&str> = g.iter().map(String::as_str).collect();
                    TangentBundleModel::new(coords.clone(), velocities.clone(), &refs)
                }
            }
            .map_err(located("model"))?;
            let m = match pole_guard {
                Some(i) if *i >= m.n() => return Err(spec_error("model.pole_guard", "index out of range")),
                Some(i) => m.with_pole_guard(*i),
                None => m,
            };
            Ok(Model::TangentBundle(m))
        }
        ModelSpec::Explicit { coords, split, eta, k } => {
            let mut chart = Chart::new(coords.clone()).map_err(located("model.coords"))?;
            if *split {
                if coords.len() % 2 != 0 {
                    return Err(spec_error("model.split", "a split chart needs an even dimension"));
                }
                chart = chart.with_split();
            }
            let dim = chart.dim();
            let eta = TensorField::from_exprs(dim, 0, 2, parse_components(&chart, eta, "model.eta", dim * dim)?)?;
            let k = TensorField::from_exprs(dim, 1, 1, parse_components(&chart, k, "model.k", dim * dim)?)?;
            let structure = ParaHermitianStructure::new(chart, eta, k).map_err(located("model"))?;
            Ok(Model::Explicit {
                structure,
                region: Region::cube(dim, 1.0),
            })
        }
    }
}

/// Draws or reads the sample points.
pub fn build_sample(spec: &RunSpec, model: &Model) -> Result<Vec<Point>> {
    let dim = model.structure().dim();
    let s = &spec.sample;
    if s.mode == "points" {
        return s
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if p.len() != dim {
                    return Err(spec_error(
                        format!("sample.points[{i}]"),
                        format!("expected {dim} coordinates, found {}", p.len()),
                    ));
                }
                Point::new(p.clone()).map_err(located("sample.points"))
            })
            .collect();
    }
    let seed = spec.sample_seed();
    let bounds = match (&s.lower, &s.upper) {
        (None, None) => None,
        (Some(lo), Some(hi)) => {
            if lo.len() != dim || hi.len() != dim {
                return Err(spec_error("sample.lower", format!("bounds must have {dim} entries")));
            }
            Some(Region::new(lo.clone(), hi.clone()).map_err(located("sample.lower"))?)
        }
        _ => return Err(spec_error("sample", "`lower` and `upper` must be given together")),
    };
    match (model, bounds) {
        (m, None) => m.sample(s.count, seed).map_err(located("sample")),
        (Model::TangentBundle(tm), Some(r)) => tm.clone().with_region(r)?.sample(s.count, seed).map_err(located("sample")),
        (_, Some(r)) => uniform_points(&r, s.count, seed, |_| true).map_err(located("sample")),
    }
}

/// The B-transformation named by the spec, if any.
pub fn build_b_field(spec: &BFieldSpec, structure: &ParaHermitianStructure, sample: &[Point]) -> Result<BTransformation> {
    let chart = structure.chart();
    let dim = chart.dim();
    let side = if spec.side == "minus" { Sign::Minus } else { Sign::Plus };
    let comps = if spec.components.len() == dim * dim {
        parse_components(chart, &spec.components, "b_field.components", dim * dim)?
    } else {
        let n = chart.require_split().map_err(|_| {
            spec_error(
                "b_field.components",
                format!("expected {} components (a block form needs a split chart)", dim * dim),
            )
        })?;
        let block = parse_components(chart, &spec.components, "b_field.components", n * n)?;
        let offset = if side == Sign::Plus { 0 } else { n };
        let mut full = vec![Expr::zero(); dim * dim];
        for i in 0..n {
            for j in 0..n {
                full[(offset + i) * dim + offset + j] = block[i * n + j].clone();
            }
        }
        full
    };
    let b = TensorField::from_exprs(dim, 0, 2, comps)?;
    match side {
        Sign::Plus => BTransformation::b_transform(structure, b, sample),
        Sign::Minus => BTransformation::b_minus_transform(structure, b, sample),
    }
}
