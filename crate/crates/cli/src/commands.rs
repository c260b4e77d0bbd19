use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sepkit::classify::{
    classify, fully_separable, pt_positive_analytic, pt_positive_numeric, Qubit,
};
use sepkit::distill::{
    amplify, dense_filter_oracle, plan_pair_distillation, plan_pair_distillation_with_m, PairPlan,
    MAX_ORACLE_COPIES,
};
use sepkit::family::{depolarize, family_density, random_weights, GhzWeights};
use sepkit::tensor::{parse_qubit_label, qubit_label};
use sepkit::witness::{
    build_rho_hat, certify_rho_tilde, fully_separable_ensemble, verify_ensemble,
};
use sepkit::Partition;

use crate::input::LoadedState;
use crate::report::{
    round_sig, to_json, ClassifyBody, DepolarizeBody, DistillBody, EnsembleReport, OracleCheck,
    Report, SelftestBody, ThresholdBody, WitnessBody,
};
use crate::CliError;

/// Largest state size for which `classify` cross-checks every partition densely.
pub const NUMERIC_CHECK_MAX_QUBITS: usize = 6;

/// Self-test acceptance bounds.
const SELFTEST_ORACLE_TOL: f64 = 1e-10;
const SELFTEST_ENSEMBLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// The report is valid but the requested result does not exist.
    NotApplicable,
    SelftestFailed,
}

/// A finished command: the report, its text form and the exit status.
pub struct Output {
    json: serde_json::Value,
    pub text: String,
    pub status: Status,
    pub diagnostic: Option<String>,
}

impl Output {
    fn new<T: Serialize>(report: &T, text: String) -> Self {
        Self {
            json: serde_json::to_value(report).expect("reports serialize"),
            text,
            status: Status::Success,
            diagnostic: None,
        }
    }

    fn not_applicable(mut self, why: String) -> Self {
        self.status = Status::NotApplicable;
        self.diagnostic = Some(why);
        self
    }

    pub fn to_json(&self, digits: usize) -> String {
        to_json(&self.json, digits)
    }
}

struct Fmt(usize);

impl Fmt {
    fn f(&self, x: f64) -> String {
        let x = round_sig(x, self.0);
        if x != 0.0 && x.abs() < 1e-4 {
            format!("{x:e}")
        } else {
            format!("{x}")
        }
    }

    fn weights(&self, w: &GhzWeights) -> String {
        let lambdas: Vec<String> = w.lambdas().iter().map(|&l| self.f(l)).collect();
        format!(
            "lambda0+ = {}, lambda0- = {}, lambda_j = [{}]",
            self.f(w.lambda0_plus()),
            self.f(w.lambda0_minus()),
            lambdas.join(", ")
        )
    }
}

fn input_lines(out: &mut String, s: &LoadedState, fmt: &Fmt) {
    let _ = writeln!(out, "qubits: {}", s.weights.n_qubits());
    let _ = writeln!(out, "weights: {}", fmt.weights(&s.weights));
    if s.info.depolarized {
        let _ = writeln!(
            out,
            "depolarized: true (phase flipped: {})",
            s.info.phase_flipped
        );
    }
    for n in &s.info.notes {
        let _ = writeln!(out, "note: {n}");
    }
}

fn join_qubits(qs: &[Qubit]) -> String {
    qs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn depolarize_cmd(s: &LoadedState, tol: f64, digits: usize) -> Output {
    let body = DepolarizeBody {
        input: s.info.clone(),
        weights: s.weights.clone(),
    };
    let mut text = String::new();
    input_lines(&mut text, s, &Fmt(digits));
    Output::new(&Report::new("depolarize", Some(tol), body), text)
}

pub fn classify_cmd(s: &LoadedState, tol: f64, digits: usize) -> Result<Output, CliError> {
    let w = &s.weights;
    let report = classify(w);
    let numeric_check = if w.n_qubits() <= NUMERIC_CHECK_MAX_QUBITS {
        let mut agrees = true;
        for s in Partition::bipartitions(w.n_qubits())? {
            agrees &= pt_positive_analytic(w, &s)? == pt_positive_numeric(w, &s, tol)?;
        }
        Some(agrees)
    } else {
        None
    };

    let mut text = String::new();
    input_lines(&mut text, s, &Fmt(digits));
    if let Some(c) = report.class3 {
        let _ = writeln!(text, "class: {c}");
    }
    for p in &report.pt_positive {
        let sign = if p.positive { "positive" } else { "negative" };
        let _ = writeln!(
            text,
            "partial transpose {{{}}}: {sign}",
            join_qubits(&p.set)
        );
    }
    let _ = writeln!(text, "fully separable: {}", report.fully_separable);
    let extension = if report.ghz_distillable_extension {
        " (pairwise extension)"
    } else {
        ""
    };
    let _ = writeln!(
        text,
        "GHZ distillable: {}{extension}",
        report.ghz_distillable
    );
    let pairs: Vec<String> = report
        .distillable_pairs
        .iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect();
    let _ = writeln!(
        text,
        "distillable pairs: {}",
        if pairs.is_empty() {
            "none".into()
        } else {
            pairs.join(" ")
        }
    );
    if let Some((a, b)) = report.activation_hint {
        let _ = writeln!(
            text,
            "activation: shared maximally entangled ({a},{b}) pairs"
        );
    }
    if let Some(ok) = numeric_check {
        let _ = writeln!(
            text,
            "numeric check: {}",
            if ok { "agrees" } else { "DISAGREES" }
        );
    }

    let body = ClassifyBody {
        input: s.info.clone(),
        weights: w.clone(),
        classification: report,
        numeric_check,
    };
    Ok(Output::new(&Report::new("classify", Some(tol), body), text))
}

/// Parses `"A,C"` into two distinct qubit indices below `n_qubits`.
pub fn parse_pair(spec: &str, n_qubits: usize) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [a, b] = parts[..] else {
        return Err(CliError::input(format!(
            "--pair expects two labels like A,C, got {spec:?}"
        )));
    };
    let parse = |l: &str| {
        parse_qubit_label(l)
            .filter(|&q| q < n_qubits)
            .ok_or_else(|| CliError::input(format!("unknown qubit {l:?} for {n_qubits} qubits")))
    };
    let (i, k) = (parse(a)?, parse(b)?);
    if i == k {
        return Err(CliError::input(format!(
            "--pair needs two different qubits, got {spec:?}"
        )));
    }
    Ok((i, k))
}

fn require_three(w: &GhzWeights, command: &str) -> Result<(), CliError> {
    if w.n_qubits() != 3 {
        return Err(CliError::input(format!(
            "{command} is implemented for three qubits, the input has {}",
            w.n_qubits()
        )));
    }
    Ok(())
}

pub fn distill_cmd(
    s: &LoadedState,
    pair: &str,
    m: Option<u64>,
    oracle: bool,
    tol: f64,
    digits: usize,
) -> Result<Output, CliError> {
    let w = &s.weights;
    require_three(w, "distill")?;
    let (i, k) = parse_pair(pair, 3)?;
    if m == Some(0) {
        return Err(CliError::input("--m must be at least 1"));
    }
    let plan = match m {
        Some(m) => plan_pair_distillation_with_m(w, i, k, m)?,
        None => plan_pair_distillation(w, i, k)?,
    };

    let mut notes = Vec::new();
    let mut check = None;
    if oracle {
        match &plan {
            PairPlan::Distillable(o) if o.m_used as usize <= MAX_ORACLE_COPIES => {
                // the planner works in the frame where the pair is (B, C)
                let mut perm = [0usize; 3];
                perm[o.projected_qubit.0] = 0;
                perm[i] = 1;
                perm[k] = 2;
                let relabeled = w.permute_qubits(&perm)?;
                let (dense, p) = dense_filter_oracle(&relabeled, o.m_used as usize)?;
                check = Some(OracleCheck {
                    m: o.m_used,
                    max_deviation: dense.max_abs_diff(&family_density(&o.filtered_weights))?,
                    probability_deviation: (p - o.filter_success_probability).abs(),
                });
            }
            PairPlan::Distillable(o) => notes.push(format!(
                "oracle skipped: m = {} exceeds the dense limit of {MAX_ORACLE_COPIES} copies",
                o.m_used
            )),
            _ => notes.push("oracle skipped: nothing to filter".into()),
        }
    }

    let fmt = Fmt(digits);
    let mut text = String::new();
    input_lines(&mut text, s, &fmt);
    let _ = writeln!(text, "pair: ({},{})", qubit_label(i), qubit_label(k));
    let why = match &plan {
        PairPlan::Distillable(o) => {
            let _ = writeln!(text, "measured qubit: {}", o.projected_qubit);
            let _ = writeln!(text, "copies: {}", o.m_used);
            let _ = writeln!(
                text,
                "filtered weights (pair as B,C): {}",
                fmt.weights(&o.filtered_weights)
            );
            let _ = writeln!(
                text,
                "filter success probability: {}",
                fmt.f(o.filter_success_probability)
            );
            let _ = writeln!(
                text,
                "projection success probability: {}",
                fmt.f(o.projection_success_probability)
            );
            let _ = writeln!(text, "pair fidelity: {}", fmt.f(o.pair_fidelity));
            let _ = writeln!(text, "purifiable: {}", o.purifiable);
            None
        }
        PairPlan::NotDistillable => Some(format!(
            "pair ({},{}) is not distillable: a partial transpose separating it is positive",
            qubit_label(i),
            qubit_label(k)
        )),
        PairPlan::SearchCapReached => {
            Some("the pair is distillable, but needs more copies than the search cap".into())
        }
    };
    if let Some(why) = &why {
        let _ = writeln!(text, "result: {why}");
    }
    if let Some(c) = &check {
        let _ = writeln!(
            text,
            "oracle (m = {}): max deviation {}, probability deviation {}",
            c.m,
            fmt.f(c.max_deviation),
            fmt.f(c.probability_deviation)
        );
    }
    for n in &notes {
        let _ = writeln!(text, "note: {n}");
    }

    let body = DistillBody {
        input: s.info.clone(),
        weights: w.clone(),
        pair: (Qubit(i), Qubit(k)),
        requested_m: m,
        plan,
        oracle: check,
        notes,
    };
    let out = Output::new(&Report::new("distill", Some(tol), body), text);
    Ok(match why {
        Some(why) => out.not_applicable(why),
        None => out,
    })
}

pub fn witness_cmd(
    s: &LoadedState,
    ensemble_out: Option<&Path>,
    tol: f64,
    digits: usize,
) -> Result<Output, CliError> {
    let w = &s.weights;
    require_three(w, "witness")?;
    let certificate = certify_rho_tilde(w)?;
    let (ensemble, refused) = if fully_separable(w) {
        let e = fully_separable_ensemble(w)?;
        let hat = build_rho_hat(w)?.to_density()?;
        let report = EnsembleReport {
            reconstruction_residual: verify_ensemble(&e, &hat)?,
            depolarize_residual: depolarize(&hat)?.weights.max_abs_diff(w),
            ensemble: e,
        };
        (Some(report), None)
    } else {
        let class = classify(w).class3.unwrap_or(0);
        (
            None,
            Some(format!(
                "no separable ensemble: the state is in class {class}, not fully separable"
            )),
        )
    };

    if let (Some(path), Some(e)) = (ensemble_out, &ensemble) {
        fs::write(path, to_json(&e.ensemble, digits))
            .map_err(|err| CliError::input(format!("cannot write {}: {err}", path.display())))?;
    }

    let fmt = Fmt(digits);
    let mut text = String::new();
    input_lines(&mut text, s, &fmt);
    let _ = writeln!(
        text,
        "rho_tilde invariance residual: {}",
        fmt.f(certificate.invariance_residual)
    );
    let _ = writeln!(
        text,
        "rho_tilde min eigenvalue: {}",
        fmt.f(certificate.min_eigenvalue)
    );
    let _ = writeln!(
        text,
        "rho_tilde positive: {}",
        certificate.positive_analytic
    );
    match (&ensemble, &refused) {
        (Some(e), _) => {
            let _ = writeln!(text, "ensemble terms: {}", e.ensemble.terms.len());
            let _ = writeln!(
                text,
                "reconstruction residual: {}",
                fmt.f(e.reconstruction_residual)
            );
            let _ = writeln!(
                text,
                "depolarize residual: {}",
                fmt.f(e.depolarize_residual)
            );
        }
        (None, Some(why)) => {
            let _ = writeln!(text, "ensemble: refused ({why})");
        }
        (None, None) => {}
    }

    let body = WitnessBody {
        input: s.info.clone(),
        weights: w.clone(),
        rho_tilde: certificate,
        ensemble,
        ensemble_refused: refused.clone(),
    };
    let out = Output::new(&Report::new("witness", Some(tol), body), text);
    Ok(match refused {
        Some(why) => out.not_applicable(why),
        None => out,
    })
}

pub fn threshold_cmd(n: usize, digits: usize) -> Result<Output, CliError> {
    if !(3..=sepkit::family::MAX_QUBITS).contains(&n) {
        return Err(CliError::input(format!(
            "--n must be between 3 and {}, got {n}",
            sepkit::family::MAX_QUBITS
        )));
    }
    let denominator = 1 + (1u64 << (n - 1));
    let decimal = 1.0 / denominator as f64;
    let rational = format!("1/{denominator}");
    let text = format!("{rational} = {}\n", Fmt(digits).f(decimal));
    let body = ThresholdBody {
        n_qubits: n,
        numerator: 1,
        denominator,
        rational,
        decimal,
    };
    Ok(Output::new(&Report::new("threshold", None, body), text))
}

pub fn selftest_cmd(seed: u64, n: usize, samples: usize, tol: f64) -> Result<Output, CliError> {
    if !(3..=5).contains(&n) {
        return Err(CliError::input(format!(
            "selftest supports 3 to 5 qubits, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let partitions = Partition::bipartitions(n)?;
    let mut disagreements = 0;
    let mut amplify_dev: Option<f64> = None;
    let mut ensemble_res: Option<f64> = None;
    for _ in 0..samples {
        let w = random_weights(n, &mut rng)?;
        for s in &partitions {
            if pt_positive_analytic(&w, s)? != pt_positive_numeric(&w, s, tol)? {
                disagreements += 1;
            }
        }
        if n == 3 {
            let (f, p) = amplify(&w, 2)?;
            let (dense, q) = dense_filter_oracle(&w, 2)?;
            let dev = dense.max_abs_diff(&family_density(&f))?.max((p - q).abs());
            amplify_dev = Some(amplify_dev.map_or(dev, |d| d.max(dev)));
            if fully_separable(&w) {
                let e = fully_separable_ensemble(&w)?;
                let r = verify_ensemble(&e, &build_rho_hat(&w)?.to_density()?)?;
                ensemble_res = Some(ensemble_res.map_or(r, |d| d.max(r)));
            }
        }
    }
    let passed = disagreements == 0
        && amplify_dev.is_none_or(|d| d <= SELFTEST_ORACLE_TOL)
        && ensemble_res.is_none_or(|d| d <= SELFTEST_ENSEMBLE_TOL);
    let body = SelftestBody {
        seed,
        n_qubits: n,
        samples,
        pt_disagreements: disagreements,
        max_amplify_deviation: amplify_dev,
        max_ensemble_residual: ensemble_res,
        passed,
    };
    let text = format!(
        "seed {seed}, {samples} samples on {n} qubits: {disagreements} partial-transpose disagreements, {}\n",
        if passed { "passed" } else { "FAILED" }
    );
    let mut out = Output::new(&Report::new("selftest", Some(tol), body), text);
    if !passed {
        out.status = Status::SelftestFailed;
        out.diagnostic = Some("self-test failed".into());
    }
    Ok(out)
}
