//! State files: either family weights or a dense density matrix.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sepkit::family::{depolarize, GhzWeights};
use sepkit::DensityMatrix;

use crate::CliError;

/// A weight given as a JSON number or as an exact rational string like `"1/5"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Real {
    Number(f64),
    Text(String),
}

impl Real {
    fn resolve(&self, field: &str, notes: &mut Vec<String>) -> Result<f64, CliError> {
        match self {
            Real::Number(x) => Ok(*x),
            Real::Text(s) => {
                let x = parse_rational(s)
                    .ok_or_else(|| CliError::input(format!("{field}: cannot parse {s:?}")))?;
                notes.push(format!(
                    "{field} given as {s}, parsed to the nearest double"
                ));
                Ok(x)
            }
        }
    }
}

fn parse_rational(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            (d != 0.0).then(|| n / d)
        }
        None => s.parse().ok(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsSpec {
    lambda0_plus: Real,
    lambda0_minus: Real,
    lambdas: Vec<Real>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixSpec {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    n_qubits: usize,
    weights: Option<WeightsSpec>,
    matrix: Option<MatrixSpec>,
}

/// How the weights of a state file were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputInfo {
    pub depolarized: bool,
    pub phase_flipped: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedState {
    pub weights: GhzWeights,
    pub info: InputInfo,
}

pub fn load(path: &Path, tol: f64) -> Result<LoadedState, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, tol)
}

pub fn parse(text: &str, tol: f64) -> Result<LoadedState, CliError> {
    let file: StateFile = serde_json::from_str(text)
        .map_err(|e| CliError::input(format!("malformed state file: {e}")))?;
    match (file.weights, file.matrix) {
        (Some(w), None) => from_weights(file.n_qubits, &w),
        (None, Some(m)) => from_matrix(file.n_qubits, &m, tol),
        _ => Err(CliError::input(
            "state file needs exactly one of \"weights\" and \"matrix\"",
        )),
    }
}

fn from_weights(n_qubits: usize, spec: &WeightsSpec) -> Result<LoadedState, CliError> {
    let mut notes = Vec::new();
    let plus = spec.lambda0_plus.resolve("lambda0_plus", &mut notes)?;
    let minus = spec.lambda0_minus.resolve("lambda0_minus", &mut notes)?;
    let lambdas = spec
        .lambdas
        .iter()
        .enumerate()
        .map(|(j, l)| l.resolve(&format!("lambdas[{j}]"), &mut notes))
        .collect::<Result<Vec<_>, _>>()?;
    let (weights, phase_flipped) = GhzWeights::canonicalize(n_qubits, plus, minus, lambdas)?;
    if phase_flipped {
        notes.push("lambda0_plus < lambda0_minus: swapped by a local phase change".into());
    }
    Ok(LoadedState {
        weights,
        info: InputInfo {
            depolarized: false,
            phase_flipped,
            notes,
        },
    })
}

fn from_matrix(n_qubits: usize, spec: &MatrixSpec, tol: f64) -> Result<LoadedState, CliError> {
    let rho = DensityMatrix::from_rows(&spec.re, &spec.im)?;
    if rho.n_qubits() != n_qubits {
        return Err(CliError::input(format!(
            "matrix is {0}x{0}, expected 2^{n_qubits}",
            rho.dim()
        )));
    }
    rho.validate_state(tol)?;
    let d = depolarize(&rho)?;
    let mut notes = vec![
        "the input was depolarized; the classification is a sufficient condition for the \
         original state (its class is at most the reported one)"
            .to_string(),
    ];
    if d.phase_flipped {
        notes.push("lambda0 labels swapped by a local phase change".into());
    }
    Ok(LoadedState {
        weights: d.weights,
        info: InputInfo {
            depolarized: true,
            phase_flipped: d.phase_flipped,
            notes,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/5"), Some(0.2));
        assert_eq!(parse_rational(" 3 / 4 "), Some(0.75));
        assert_eq!(parse_rational("0.5"), Some(0.5));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn weights_with_rationals_are_noted() {
        let s = parse(
            r#"{"n_qubits": 3, "weights": {"lambda0_plus": "2/5", "lambda0_minus": 0,
                "lambdas": [0.2, 0.05, 0.05]}}"#,
            1e-9,
        )
        .unwrap();
        assert_eq!(s.weights.lambda0_plus(), 0.4);
        assert_eq!(s.info.notes.len(), 1);
        assert!(!s.info.depolarized);
    }

    #[test]
    fn exactly_one_representation() {
        assert!(parse(r#"{"n_qubits": 3}"#, 1e-9).is_err());
        let both = r#"{"n_qubits": 2, "weights": {"lambda0_plus": 1, "lambda0_minus": 0, "lambdas": [0]},
                       "matrix": {"re": [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}}"#;
        assert!(parse(both, 1e-9).is_err());
    }

    #[test]
    fn matrix_validation() {
        let bell = r#"{"n_qubits": 2, "matrix": {"re": [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]]}}"#;
        let s = parse(bell, 1e-9).unwrap();
        assert!(s.info.depolarized);
        assert_eq!(s.weights.lambda0_plus(), 1.0);
        let flipped = r#"{"n_qubits": 2, "matrix": {"re": [[0.5, 0, 0, -0.5], [0, 0, 0, 0], [0, 0, 0, 0], [-0.5, 0, 0, 0.5]]}}"#;
        let s = parse(flipped, 1e-9).unwrap();
        assert!(s.info.phase_flipped);
        let bad_trace = r#"{"n_qubits": 2, "matrix": {"re": [[0.5, 0, 0, 0], [0, 0.6, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}}"#;
        assert!(parse(bad_trace, 1e-9).is_err());
        let not_hermitian = r#"{"n_qubits": 2, "matrix": {"re": [[0.5, 0.1, 0, 0], [0, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}}"#;
        assert!(parse(not_hermitian, 1e-9).is_err());
        let wrong_n = r#"{"n_qubits": 3, "matrix": {"re": [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]]}}"#;
        assert!(parse(wrong_n, 1e-9).is_err());
    }
}
