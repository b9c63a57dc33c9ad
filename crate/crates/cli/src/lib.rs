//! Scenario files in, deformation reports out.

pub mod config;
pub mod pipeline;
pub mod render;
pub mod report;

use serde_json::Value;
use thiserror::Error;

pub use config::{load_config, parse_config, ScenarioConfig};
pub use pipeline::{run, run_with};
pub use render::{render, Format};
pub use report::RunReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] conifold::Error),
    #[error("verification failed: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use conifold::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Mismatch(_) => 6,
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::Mesh(_) => 2,
                E::InconsistentTopology(_) => 3,
                E::CutoffInsufficient { .. } => 4,
                E::ExceptionalRate { .. } => 5,
                E::InternalInconsistency(_) => 6,
                E::StabilityViolation(_) => 7,
                E::Convergence { .. } => 8,
            },
        }
    }
}

/// Recomputes a machine report from its own scenario echo and recorded
/// spectra, and lists every section that comes out different.
pub fn verify(report_text: &str) -> Result<Vec<String>, CliError> {
    let report: RunReport =
        serde_json::from_str(report_text).map_err(|e| CliError::Config(format!("cannot parse report: {e}")))?;
    report.scenario.validate()?;
    let topology = report.scenario.topology()?;
    topology.check()?;
    let spectra = pipeline::recorded_spectra(&report)?;
    let fresh = run_with(&report.scenario, &topology, &spectra, Vec::new())?;
    let fresh = serde_json::to_value(&fresh).expect("report serializes");
    let recorded = serde_json::to_value(&report).expect("report serializes");
    Ok(["ends", "stability", "topology", "fredholm", "moduli", "cross_check"]
        .into_iter()
        .filter(|k| !close(&fresh[*k], &recorded[*k]))
        .map(str::to_string)
        .collect())
}

/// Structural equality with numbers compared to a relative `1e-9`; rounding
/// to 12 digits on output may move recomputed values by one unit in the
/// last place.
fn close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => match (x.as_i64(), y.as_i64()) {
            (Some(i), Some(j)) => i == j,
            _ => {
                let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
                (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0)
            }
        },
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, p)| y.get(k).is_some_and(|q| close(p, q)))
        }
        _ => a == b,
    }
}
