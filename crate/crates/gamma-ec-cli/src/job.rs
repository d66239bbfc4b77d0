//! Job files: one JSON object per run, `"schema": 1`, unknown fields rejected.

use gamma_ec::algebraic::{AlgebraicFunction, BivariatePolynomial, ImplicitBranch, PolydiskDomain};
use gamma_ec::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub const SCHEMA: u64 = 1;
pub const TOL_RANGE: (f64, f64) = (1e-14, 1e-2);

/// Input problems; the CLI exits with status 2 on these.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ValidationError> {
    Err(ValidationError(msg.into()))
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub root: Option<f64>,
    pub trace: Option<f64>,
}

pub fn check_tol(name: &str, v: f64) -> Result<f64, ValidationError> {
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&v) {
        return invalid(format!("{name} tolerance {v:e} outside [1e-14, 1e-2]"));
    }
    Ok(v)
}

/// A complex number as `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Complex([f64; 2]),
}

impl Num {
    pub fn value(self) -> Complex64 {
        match self {
            Num::Real(x) => Complex64::new(x, 0.0),
            Num::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// `coefficients[i][j]` multiplies `X^i Y^j`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub coefficients: Vec<Vec<Num>>,
}

impl PolynomialSpec {
    pub fn build(&self) -> Result<BivariatePolynomial, ValidationError> {
        let rows = self.coefficients.iter().map(|r| r.iter().map(|c| c.value()).collect()).collect();
        BivariatePolynomial::new(rows).map_err(|e| ValidationError(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImplicitSpec {
    pub coefficients: Vec<Vec<Num>>,
    #[serde(default)]
    pub var: usize,
    pub base_point: Num,
    pub base_value: Num,
}

/// An expression string, or an implicit branch of `p(X, Y) = 0`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Expr(String),
    Implicit(ImplicitSpec),
}

impl FunctionSpec {
    pub fn build(&self, arity: usize) -> Result<AlgebraicFunction, ValidationError> {
        let built = match self {
            FunctionSpec::Expr(src) => AlgebraicFunction::parse(src, arity),
            FunctionSpec::Implicit(spec) => {
                let poly = PolynomialSpec {
                    coefficients: spec.coefficients.clone(),
                }
                .build()?;
                ImplicitBranch::new(poly, spec.var, spec.base_point.value(), spec.base_value.value())
                    .and_then(|b| AlgebraicFunction::implicit(b, arity))
            }
        };
        built.map_err(|e| ValidationError(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub c: Vec<f64>,
    pub epsilon: f64,
    pub theta: f64,
    pub eta: f64,
}

impl DomainSpec {
    pub fn build(&self) -> Result<PolydiskDomain, ValidationError> {
        PolydiskDomain::new(self.c.clone(), self.epsilon, self.theta, self.eta).map_err(|e| ValidationError(e.to_string()))
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solve1d {
    /// Checked by `parse` before deserialization.
    #[serde(rename = "schema")]
    _schema: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Right-hand side `A`; exclusive with `plane_curve`.
    pub a: Option<FunctionSpec>,
    /// `p(X, Y)` with solutions of `p(z, Gamma(z)) = 0` sought.
    pub plane_curve: Option<PolynomialSpec>,
    pub ball: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
    /// Certify only the zero attached to this search point.
    pub xi: Option<Num>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveNd {
    /// Checked by `parse` before deserialization.
    #[serde(rename = "schema")]
    _schema: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub functions: Vec<String>,
    pub domain: Option<DomainSpec>,
    #[serde(default = "three")]
    pub count: usize,
    pub max_modulus: Option<f64>,
    pub samples_per_factor: Option<usize>,
}

fn three() -> usize {
    3
}

fn five() -> usize {
    5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveExp {
    /// Checked by `parse` before deserialization.
    #[serde(rename = "schema")]
    _schema: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub a: FunctionSpec,
    #[serde(default = "five")]
    pub count: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceModulus {
    /// Checked by `parse` before deserialization.
    #[serde(rename = "schema")]
    _schema: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub r: f64,
    pub x_end: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceArgument {
    /// Checked by `parse` before deserialization.
    #[serde(rename = "schema")]
    _schema: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub theta: f64,
    /// Point near the curve where tracing starts.
    pub start: Num,
    pub x_end: f64,
}

/// Either a box counted by the argument principle, or zero counts of an
/// enumerated family in balls of the given radii.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountZeros {
    /// Checked by `parse` before deserialization.
    #[serde(rename = "schema")]
    _schema: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub a: FunctionSpec,
    pub lower_left: Option<Num>,
    pub upper_right: Option<Num>,
    pub radii: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub epsilon: f64,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicPoints {
    /// Checked by `parse` before deserialization.
    #[serde(rename = "schema")]
    _schema: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub period: usize,
    #[serde(default = "one_usize")]
    pub count: usize,
}

fn thousand() -> usize {
    1000
}

fn fifty() -> f64 {
    50.0
}

fn two_three() -> Vec<u32> {
    vec![2, 3]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyIdentities {
    /// Checked by `parse` before deserialization.
    #[serde(rename = "schema")]
    _schema: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "thousand")]
    pub points: usize,
    #[serde(default = "fifty")]
    pub radius: f64,
    /// Orders of the multiplication formula to check.
    #[serde(default = "two_three")]
    pub multiplication: Vec<u32>,
}

/// Parses a job, checking the schema version before the field layout so
/// that a version mismatch gets its own message.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, ValidationError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ValidationError(format!("job is not valid JSON: {e}")))?;
    match value.get("schema").and_then(|s| s.as_u64()) {
        Some(SCHEMA) => {}
        Some(v) => return invalid(format!("unsupported schema version {v}, expected {SCHEMA}")),
        None => return invalid("job needs an integer \"schema\" field"),
    }
    serde_json::from_value(value).map_err(|e| ValidationError(format!("invalid job: {e}")))
}
