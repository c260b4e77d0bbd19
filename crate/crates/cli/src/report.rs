//! Report documents and their JSON emission.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use sepkit::classify::{ClassReport, Qubit};
use sepkit::distill::PairPlan;
use sepkit::family::GhzWeights;
use sepkit::witness::{RhoTildeCertificate, SeparableEnsemble};

use crate::input::InputInfo;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Common envelope of every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub tool_version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Report<T> {
    pub fn new(command: &str, tol: Option<f64>, body: T) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            tol,
            body,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepolarizeBody {
    pub input: InputInfo,
    pub weights: GhzWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyBody {
    pub input: InputInfo,
    pub weights: GhzWeights,
    pub classification: ClassReport,
    /// Whether the dense partial-transpose check agrees on every partition;
    /// absent above [`crate::commands::NUMERIC_CHECK_MAX_QUBITS`] qubits.
    pub numeric_check: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub m: u64,
    /// Largest entrywise deviation between the closed-form and dense filtered states.
    pub max_deviation: f64,
    pub probability_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillBody {
    pub input: InputInfo,
    pub weights: GhzWeights,
    pub pair: (Qubit, Qubit),
    pub requested_m: Option<u64>,
    pub plan: PairPlan,
    pub oracle: Option<OracleCheck>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    /// `max |sum_i p_i |e_i><e_i| - rho_hat|`
    pub reconstruction_residual: f64,
    /// `max |depolarize(rho_hat) - w|` over the weights.
    pub depolarize_residual: f64,
    pub ensemble: SeparableEnsemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBody {
    pub input: InputInfo,
    pub weights: GhzWeights,
    pub rho_tilde: RhoTildeCertificate,
    pub ensemble: Option<EnsembleReport>,
    pub ensemble_refused: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBody {
    pub n_qubits: usize,
    pub numerator: u64,
    pub denominator: u64,
    pub rational: String,
    pub decimal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestBody {
    pub seed: u64,
    pub n_qubits: usize,
    pub samples: usize,
    pub pt_disagreements: usize,
    pub max_amplify_deviation: Option<f64>,
    pub max_ensemble_residual: Option<f64>,
    pub passed: bool,
}

/// Rounds `x` to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if digits >= 17 || !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x, digits)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_value(i, digits)),
        Value::Object(map) => map.values_mut().for_each(|i| round_value(i, digits)),
        _ => {}
    }
}

/// Pretty JSON, newline-terminated, with floats rounded to `digits`
/// significant digits (17 keeps them exact).
pub fn to_json<T: Serialize>(report: &T, digits: usize) -> String {
    let mut v = serde_json::to_value(report).expect("reports serialize");
    round_value(&mut v, digits);
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}
