//! The report document and its CSV projection.

use std::path::Path;

use poincare_korn::constants::{BoundCase, BoundInputs, ConstantEstimate};
use poincare_korn::verify::{FlatCounterexample, InjectivityReport};
use poincare_korn::BoundReport;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Format;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Keys ignored by [`compare_documents`].
pub const VOLATILE_KEYS: [&str; 2] = ["runtime_seconds", "timing"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    pub command: String,
    pub scenarios: Vec<ScenarioReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub geometry: GeometrySummary,
    pub scalar_degree: usize,
    pub vector_degree: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cases: Vec<CaseResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_check: Option<FlatCheck>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub kind: String,
    pub dim: usize,
    pub measure: f64,
    pub diameter: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_measure: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portion_measure: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portion_flat: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// Explicit bounds without the certification chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub bound_case: BoundCase,
    pub degree: usize,
    pub inputs: BoundInputs,
    pub constants: Vec<ConstantEstimate>,
    pub paper_norm_estimate: f64,
    pub paper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<BoundReport>,
}

impl CaseResult {
    pub fn error(case: &str, err: impl std::fmt::Display) -> Self {
        Self {
            case: case.to_string(),
            status: Status::Error,
            error: Some(err.to_string()),
            bounds: None,
            report: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatCheck {
    pub hull_dim: usize,
    pub flat: bool,
    pub hull_eigenvalues: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<FlatCounterexample>,
    pub affine_injectivity: InjectivityReport,
    pub rigid_injectivity: InjectivityReport,
    /// Flat portions must produce a valid counterexample and a
    /// non-injective affine trace; non-flat ones an injective one.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub case: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub degree: Option<usize>,
    pub q: Option<f64>,
    pub norm_t: Option<f64>,
    pub paper_norm_estimate: Option<f64>,
    /// `norm_t / paper_norm_estimate`.
    pub ratio: Option<f64>,
    pub sup_ratio: Option<f64>,
    pub composed_bound: Option<f64>,
    pub paper_bound: Option<f64>,
}

/// Flat CSV record; one per case or sweep row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scenario: String,
    pub parameter: Option<String>,
    pub value: Option<f64>,
    pub case: String,
    pub status: String,
    pub degree: Option<usize>,
    pub q: Option<f64>,
    pub norm_t: Option<f64>,
    pub norm_t_minus_p: Option<f64>,
    pub paper_norm_estimate: Option<f64>,
    pub ratio: Option<f64>,
    pub random_max: Option<f64>,
    pub sup_ratio: Option<f64>,
    pub refined_bound: Option<f64>,
    pub composed_bound: Option<f64>,
    pub paper_bound: Option<f64>,
    pub error: Option<String>,
}

impl Document {
    pub fn new(command: &str, scenarios: Vec<ScenarioReport>, sweep: Vec<SweepRow>) -> Self {
        let passed = scenarios.iter().all(|s| s.passed) && sweep.iter().all(|r| r.status == Status::Pass);
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            scenarios,
            sweep,
            passed,
            timing: None,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Report(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::new();
        for sc in &self.scenarios {
            for c in &sc.cases {
                let mut row = CsvRow {
                    scenario: sc.name.clone(),
                    case: c.case.clone(),
                    status: c.status.as_str().to_string(),
                    error: c.error.clone(),
                    ..Default::default()
                };
                if let Some(b) = &c.bounds {
                    row.degree = Some(b.degree);
                    row.q = b.inputs.q;
                    row.paper_norm_estimate = Some(b.paper_norm_estimate);
                    row.paper_bound = Some(b.paper_bound);
                }
                if let Some(r) = &c.report {
                    row.degree = Some(r.degree);
                    row.q = r.inputs.q;
                    row.norm_t = Some(r.norm_t);
                    row.norm_t_minus_p = Some(r.norm_t_minus_p);
                    row.paper_norm_estimate = Some(r.paper_norm_estimate);
                    row.random_max = Some(r.random_max);
                    row.sup_ratio = Some(r.sup_ratio);
                    row.refined_bound = Some(r.refined_bound);
                    row.composed_bound = Some(r.composed_bound);
                    row.paper_bound = Some(r.paper_bound);
                }
                rows.push(row);
            }
        }
        let scenario = self.scenarios.first().map(|s| s.name.clone()).unwrap_or_default();
        for r in &self.sweep {
            rows.push(CsvRow {
                scenario: scenario.clone(),
                parameter: Some(r.parameter.clone()),
                value: Some(r.value),
                case: r.case.clone(),
                status: r.status.as_str().to_string(),
                degree: r.degree,
                q: r.q,
                norm_t: r.norm_t,
                paper_norm_estimate: r.paper_norm_estimate,
                ratio: r.ratio,
                sup_ratio: r.sup_ratio,
                composed_bound: r.composed_bound,
                paper_bound: r.paper_bound,
                error: r.error.clone(),
                ..Default::default()
            });
        }
        rows
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.csv_rows() {
            w.serialize(row).map_err(|e| CliError::Report(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Report(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<(), CliError> {
        std::fs::write(path, self.render(format)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

fn strip_volatile(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for key in VOLATILE_KEYS {
                map.remove(key);
            }
            map.values_mut().for_each(strip_volatile);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_volatile),
        _ => {}
    }
}

/// Compares two JSON reports with timing fields removed. Returns the JSON
/// pointers of the first differing values, at most `limit` of them.
pub fn compare_documents(stored: &str, fresh: &str, limit: usize) -> Result<Vec<String>, CliError> {
    let parse = |s: &str| serde_json::from_str::<Value>(s).map_err(|e| CliError::Report(e.to_string()));
    let mut a = parse(stored)?;
    let mut b = parse(fresh)?;
    strip_volatile(&mut a);
    strip_volatile(&mut b);
    let mut diffs = Vec::new();
    diff_values(&a, &b, String::new(), &mut diffs, limit);
    Ok(diffs)
}

fn diff_values(a: &Value, b: &Value, path: String, out: &mut Vec<String>, limit: usize) {
    if out.len() >= limit {
        return;
    }
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, va) in x {
                match y.get(k) {
                    Some(vb) => diff_values(va, vb, format!("{path}/{k}"), out, limit),
                    None => out.push(format!("{path}/{k}: missing")),
                }
            }
            for k in y.keys().filter(|k| !x.contains_key(*k)) {
                out.push(format!("{path}/{k}: unexpected"));
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (va, vb)) in x.iter().zip(y).enumerate() {
                diff_values(va, vb, format!("{path}/{i}"), out, limit);
            }
        }
        _ if a == b => {}
        _ => out.push(format!("{path}: {a} != {b}")),
    }
    out.truncate(limit);
}
