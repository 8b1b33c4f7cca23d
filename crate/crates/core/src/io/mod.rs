//! File formats: `.form`, `.points`, `.span`, `.system` and JSON run
//! reports. Every writer is deterministic: object keys are sorted,
//! rationals and integers are strings and reals carry 17 significant
//! digits.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::forms::{format_rational, parse_rational, FormError, HomogeneousForm, ProjectivePoint};
use crate::geometry::ProjectiveLine;
use crate::newton::{KantorovichCertificate, NewtonError, PolySystem, RealPoly};
use crate::span::{PointSet, SpanConfig, SpanState, SpanStep, StepKind};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Form(#[from] FormError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl From<NewtonError> for IoError {
    fn from(e: NewtonError) -> Self {
        IoError::Invalid(e.to_string())
    }
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// Reals are written with 17 significant digits, which round-trips every
/// `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn reals_json(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::String(format_real(x))).collect())
}

/// A real literal: decimal or `p/q`.
pub fn parse_real(input: &str) -> Result<f64, IoError> {
    let s = input.trim();
    if let Ok(x) = s.parse::<f64>() {
        if x.is_finite() {
            return Ok(x);
        }
    }
    if let Some((p, q)) = s.split_once('/') {
        if let (Ok(p), Ok(q)) = (p.trim().parse::<f64>(), q.trim().parse::<f64>()) {
            if q != 0.0 && (p / q).is_finite() {
                return Ok(p / q);
            }
        }
    }
    Err(IoError::Invalid(format!("cannot parse real number from {input:?}")))
}

/// Comma- or whitespace-separated reals, optionally in `(a:b:…)` form.
pub fn parse_reals(input: &str) -> Result<Vec<f64>, IoError> {
    let trimmed = input.trim();
    let inner = trimmed
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .unwrap_or(trimmed);
    let values = inner
        .split(|c: char| c == ',' || c == ':' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(parse_real)
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(IoError::Invalid(format!("no numbers in {input:?}")));
    }
    Ok(values)
}

/// Every `(…)` literal in `input`.
pub fn parse_point_list(input: &str) -> Result<Vec<ProjectivePoint>, IoError> {
    let mut out = Vec::new();
    let mut rest = input;
    while let Some(start) = rest.find('(') {
        let end = rest[start..]
            .find(')')
            .ok_or_else(|| IoError::Invalid(format!("unterminated point literal in {input:?}")))?;
        out.push(rest[start..start + end + 1].parse()?);
        rest = &rest[start + end + 1..];
    }
    if !rest.trim().trim_matches(|c: char| c == ',' || c.is_whitespace()).is_empty() {
        return Err(IoError::Invalid(format!("malformed point list {input:?}")));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialEntry {
    pub coefficient: String,
    pub exponents: Vec<u32>,
}

/// `.form`: a homogeneous form in `n + 2` variables, `n` being the
/// dimension of the hypersurface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFile {
    pub n: usize,
    #[serde(default = "default_degree")]
    pub degree: u32,
    pub monomials: Vec<MonomialEntry>,
}

fn default_degree() -> u32 {
    3
}

impl FormFile {
    pub fn to_form(&self) -> Result<HomogeneousForm, IoError> {
        let num_vars = self.n + 2;
        let mut terms = Vec::with_capacity(self.monomials.len());
        for (i, m) in self.monomials.iter().enumerate() {
            if m.exponents.len() != num_vars {
                return Err(IoError::Invalid(format!(
                    "monomial {i} ({:?}) has {} exponents, expected {num_vars} for n = {}",
                    m.exponents,
                    m.exponents.len(),
                    self.n
                )));
            }
            let total: u32 = m.exponents.iter().sum();
            if total != self.degree {
                return Err(IoError::Invalid(format!(
                    "monomial {i} ({} * {:?}) has degree {total}, expected {}",
                    m.coefficient, m.exponents, self.degree
                )));
            }
            terms.push((m.exponents.clone(), parse_rational(&m.coefficient)?));
        }
        Ok(HomogeneousForm::new(num_vars, self.degree, terms)?)
    }

    pub fn from_form(f: &HomogeneousForm) -> Result<Self, IoError> {
        if f.num_vars() < 2 {
            return Err(IoError::Invalid("forms need at least two variables".into()));
        }
        Ok(Self {
            n: f.num_vars() - 2,
            degree: f.degree(),
            monomials: f
                .terms()
                .map(|(m, c)| MonomialEntry {
                    coefficient: format_rational(c),
                    exponents: m.clone(),
                })
                .collect(),
        })
    }
}

pub fn parse_form(text: &str) -> Result<HomogeneousForm, IoError> {
    let file: FormFile = serde_json::from_str(text)?;
    file.to_form()
}

pub fn parse_form_file(path: &Path) -> Result<HomogeneousForm, IoError> {
    parse_form(&read_file(path)?)
}

pub fn write_form(f: &HomogeneousForm) -> Result<String, IoError> {
    to_json_text(&serde_json::to_value(FormFile::from_form(f)?)?)
}

fn point_json(p: &ProjectivePoint) -> Value {
    Value::Array(p.coords().iter().map(|c| Value::String(c.to_string())).collect())
}

fn point_from_json(v: &Value) -> Result<ProjectivePoint, IoError> {
    let coords = v
        .as_array()
        .ok_or_else(|| IoError::Invalid(format!("point must be an array, got {v}")))?
        .iter()
        .map(|c| {
            c.as_str()
                .and_then(|s| s.parse::<BigInt>().ok())
                .ok_or_else(|| IoError::Invalid(format!("bad coordinate {c}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let p = ProjectivePoint::new(coords.clone())?;
    if p.coords() != coords.as_slice() {
        return Err(IoError::Invalid(format!("point {v} is not in canonical form")));
    }
    Ok(p)
}

pub fn points_json<'a>(points: impl IntoIterator<Item = &'a ProjectivePoint>) -> Value {
    Value::Array(points.into_iter().map(point_json).collect())
}

/// `.points`: an array of coordinate-string arrays.
pub fn write_points(points: &[ProjectivePoint]) -> Result<String, IoError> {
    to_json_text(&points_json(points))
}

pub fn parse_points(text: &str) -> Result<Vec<ProjectivePoint>, IoError> {
    let v: Value = serde_json::from_str(text)?;
    v.as_array()
        .ok_or_else(|| IoError::Invalid("points file must be a JSON array".into()))?
        .iter()
        .map(point_from_json)
        .collect()
}

fn config_json(config: &SpanConfig) -> Value {
    json!({
        "max_generations": config.max_generations,
        "residual_height_cap": config.residual_height_cap.to_string(),
        "direction_height": config.direction_height,
    })
}

fn step_json(step: &SpanStep) -> Value {
    let [a, b] = step.line.basis();
    json!({
        "generation": step.generation,
        "kind": match step.kind {
            StepKind::Secant => "secant",
            StepKind::Tangent => "tangent",
        },
        "p": point_json(&step.p),
        "q": point_json(&step.q),
        "line": [point_json(a), point_json(b)],
        "residual": point_json(&step.residual),
    })
}

/// `.span`: configuration, the points added in each generation, all
/// members, and one provenance record per generated point.
pub fn span_json(state: &SpanState) -> Value {
    let mut layers = Vec::new();
    let mut previous = PointSet::new();
    for g in &state.generations {
        layers.push(points_json(g.difference(&previous)));
        previous = g.clone();
    }
    json!({
        "config": config_json(&state.config),
        "fixed_point": state.fixed_point,
        "capped_residuals": state.capped_residuals,
        "generations": layers,
        "members": points_json(state.points()),
        "provenance": state.provenance.values().map(step_json).collect::<Vec<_>>(),
    })
}

pub fn write_span(state: &SpanState) -> Result<String, IoError> {
    to_json_text(&span_json(state))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, IoError> {
    v.get(key)
        .ok_or_else(|| IoError::Invalid(format!("missing field {key:?}")))
}

fn usize_field(v: &Value, key: &str) -> Result<usize, IoError> {
    field(v, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| IoError::Invalid(format!("field {key:?} must be a non-negative integer")))
}

pub fn parse_span(text: &str) -> Result<SpanState, IoError> {
    let v: Value = serde_json::from_str(text)?;
    let c = field(&v, "config")?;
    let config = SpanConfig {
        max_generations: usize_field(c, "max_generations")?,
        residual_height_cap: field(c, "residual_height_cap")?
            .as_str()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| IoError::Invalid("bad residual_height_cap".into()))?,
        direction_height: usize_field(c, "direction_height")? as u64,
    };
    let mut generations = Vec::new();
    let mut current = PointSet::new();
    for layer in field(&v, "generations")?
        .as_array()
        .ok_or_else(|| IoError::Invalid("generations must be an array".into()))?
    {
        for p in layer
            .as_array()
            .ok_or_else(|| IoError::Invalid("generation must be an array".into()))?
        {
            current.insert(point_from_json(p)?);
        }
        generations.push(current.clone());
    }
    if generations.is_empty() {
        generations.push(PointSet::new());
    }
    let members: BTreeSet<ProjectivePoint> = field(&v, "members")?
        .as_array()
        .ok_or_else(|| IoError::Invalid("members must be an array".into()))?
        .iter()
        .map(point_from_json)
        .collect::<Result<_, _>>()?;
    if &members != generations.last().expect("nonempty") {
        return Err(IoError::Invalid("members disagree with generations".into()));
    }
    let mut provenance = BTreeMap::new();
    for s in field(&v, "provenance")?
        .as_array()
        .ok_or_else(|| IoError::Invalid("provenance must be an array".into()))?
    {
        let kind = match field(s, "kind")?.as_str() {
            Some("secant") => StepKind::Secant,
            Some("tangent") => StepKind::Tangent,
            other => return Err(IoError::Invalid(format!("unknown step kind {other:?}"))),
        };
        let line_points = field(s, "line")?
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| IoError::Invalid("line must have two points".into()))?;
        let a = point_from_json(&line_points[0])?;
        let b = point_from_json(&line_points[1])?;
        let line = ProjectiveLine::through(&a, &b).map_err(|e| IoError::Invalid(e.to_string()))?;
        if line.basis() != &[a, b] {
            return Err(IoError::Invalid("line basis is not canonical".into()));
        }
        let step = SpanStep {
            generation: usize_field(s, "generation")?,
            kind,
            p: point_from_json(field(s, "p")?)?,
            q: point_from_json(field(s, "q")?)?,
            line,
            residual: point_from_json(field(s, "residual")?)?,
        };
        provenance.insert(step.residual.clone(), step);
    }
    Ok(SpanState {
        config,
        generations,
        provenance,
        fixed_point: field(&v, "fixed_point")?
            .as_bool()
            .ok_or_else(|| IoError::Invalid("fixed_point must be a boolean".into()))?,
        capped_residuals: usize_field(&v, "capped_residuals")?,
    })
}

/// `.system`: `{"n": unknowns, "equations": [[{coefficient, exponents}]]}`
/// with real coefficients written as decimal or `p/q` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    pub equations: Vec<Vec<MonomialEntry>>,
}

pub fn parse_system(text: &str) -> Result<PolySystem, IoError> {
    let file: SystemFile = serde_json::from_str(text)?;
    let polys = file
        .equations
        .iter()
        .map(|eq| {
            let terms = eq
                .iter()
                .map(|m| Ok((m.exponents.clone(), parse_real(&m.coefficient)?)))
                .collect::<Result<Vec<_>, IoError>>()?;
            Ok(RealPoly::new(file.n, terms)?)
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(PolySystem::new(polys)?)
}

pub fn write_system(system: &PolySystem) -> Result<String, IoError> {
    let file = SystemFile {
        n: system.num_vars(),
        equations: system
            .polys()
            .iter()
            .map(|p| {
                p.terms()
                    .iter()
                    .map(|(m, c)| MonomialEntry {
                        coefficient: format_real(*c),
                        exponents: m.clone(),
                    })
                    .collect()
            })
            .collect(),
    };
    to_json_text(&serde_json::to_value(file)?)
}

pub fn certificate_json(cert: &KantorovichCertificate) -> Value {
    json!({
        "alpha": format_real(cert.alpha),
        "beta": format_real(cert.beta),
        "gamma": format_real(cert.gamma),
        "h": format_real(cert.h),
        "r": format_real(cert.r),
        "radius": format_real(cert.radius),
        "accepted": cert.accepted,
        "rejection": cert.rejection,
        "root": cert.root.as_deref().map(reals_json),
        "residual_norm": cert.residual_norm.map(format_real),
        "iterations": cert.iterations,
    })
}

/// Report produced by one CLI invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub command: String,
    /// Every cap and threshold that influenced the run.
    pub config: Value,
    pub results: Value,
    pub truncation: Value,
}

impl RunReport {
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "truncation": self.truncation,
        })
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_json_text(v: &Value) -> Result<String, IoError> {
    // serde_json's map is ordered by key.
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn report_text(report: &RunReport) -> Result<String, IoError> {
    to_json_text(&report.to_json())
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<(), IoError> {
    write_file(path, &report_text(report)?)
}
