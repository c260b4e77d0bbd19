//! Pair distillation for three-qubit family states.
//!
//! Projecting qubit `A` onto `|+>` leaves `B` and `C` in a state whose overlap
//! with `|Phi^+>` is `lambda0_plus + lambda_2`; it exceeds 1/2 iff
//! `delta/2 > lambda_1 + lambda_3`. When that fails but `delta/2` still exceeds
//! both `lambda_1` and `lambda_3`, `m` copies are first filtered with
//! `P = |0...0><0...0| + |10...0><1...1|` at every party. Only computational
//! strings repeated identically across all copies survive, so each surviving
//! matrix element of the first copy is raised to the `m`-th power:
//! `delta/2 -> (delta/2)^m` and `lambda_k -> lambda_k^m` (before normalization).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::{pair_distillable, Qubit};
use crate::error::{Error, Result};
use crate::family::{family_density, GhzWeights};
use crate::tensor::{
    apply_local, partial_trace, permute_qubits, permute_qubits_by_swaps, project_qubit,
    DensityMatrix, Ket, Kron,
};

/// Largest number of copies the dense oracle will build (`3m` qubits).
pub const MAX_ORACLE_COPIES: usize = 4;

/// Upper bound of the copy-number search in [`minimal_m`].
pub const MINIMAL_M_CAP: u64 = 1_000_000;

fn require_three(w: &GhzWeights) -> Result<()> {
    if w.n_qubits() != 3 {
        return Err(Error::WrongQubitCount {
            expected: 3,
            actual: w.n_qubits(),
        });
    }
    Ok(())
}

/// One party's share of the filter, acting on its `m` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOperator {
    m: usize,
    matrix: DMatrix<Complex64>,
}

impl FilterOperator {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > 20 {
            return Err(Error::OutOfRange(format!(
                "filter copies {m} outside 1..=20"
            )));
        }
        let dim = 1usize << m;
        let mut matrix = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        // |0...0><0...0|
        matrix[(0, 0)] = Complex64::new(1.0, 0.0);
        // |10...0><1...1|
        matrix[(1 << (m - 1), dim - 1)] += Complex64::new(1.0, 0.0);
        Ok(Self { m, matrix })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

/// Overlap `<Phi^+|rho|Phi^+>` of a two-qubit operator.
pub fn bell_fidelity(rho: &DensityMatrix) -> Result<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    rho.expectation(&Ket::from_real(&[h, 0.0, 0.0, h])?)
}

/// Closed form for projecting `A` onto `|+>`: fidelity `lambda0_plus + lambda_2`
/// of the remaining pair with `|Phi^+>`, outcome probability 1/2.
pub fn pair_fidelity_after_projection(w: &GhzWeights) -> Result<(f64, f64)> {
    require_three(w)?;
    Ok((w.lambda0_plus() + w.lambda(2), 0.5))
}

/// Dense route for the same measurement: the normalized `BC` state and the
/// outcome probability.
pub fn project_pair_dense(w: &GhzWeights) -> Result<(DensityMatrix, f64)> {
    require_three(w)?;
    project_qubit(&family_density(w), 0, &Ket::plus())
}

/// Weights of the first trio after a successful `m`-copy filter, normalized,
/// together with the filter's success probability
/// `2 [((lambda0_plus + lambda0_minus)/2)^m + sum_k lambda_k^m]`.
pub fn amplify(w: &GhzWeights, m: usize) -> Result<(GhzWeights, f64)> {
    require_three(w)?;
    if m == 0 {
        return Err(Error::OutOfRange("copy count must be at least 1".into()));
    }
    let exp = i32::try_from(m).map_err(|_| Error::OutOfRange(format!("copy count {m}")))?;
    let block = (w.lambda0_plus() + w.lambda0_minus()) / 2.0;
    let half_delta = w.delta() / 2.0;
    let probability =
        2.0 * (block.powi(exp) + w.lambdas().iter().map(|l| l.powi(exp)).sum::<f64>());

    // rescale by the largest base so large m does not underflow the normalized weights
    let scale = w.lambdas().iter().copied().fold(block, f64::max);
    let pow = |x: f64| (x / scale).powi(exp);
    let block_m = pow(block);
    let coherence_m = pow(half_delta);
    let lambdas_m: Vec<f64> = w.lambdas().iter().map(|&l| pow(l)).collect();
    let trace = 2.0 * (block_m + lambdas_m.iter().sum::<f64>());
    if trace.is_nan() || trace <= 0.0 {
        return Err(Error::DegenerateOutcome(probability));
    }
    let weights = GhzWeights::new(
        3,
        (block_m + coherence_m) / trace,
        (block_m - coherence_m) / trace,
        lambdas_m.iter().map(|l| l / trace).collect(),
    )?;
    Ok((weights, probability))
}

/// How [`dense_filter_oracle_via`] reorders qubits from trio-major to party-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationRoute {
    IndexMap,
    AdjacentSwaps,
}

/// Explicit construction of the filtered state: `rho^{(x) m}` in trio-major
/// order, reordered party-major, conjugated by `P` on each party's block,
/// reduced to the first trio and normalized. Returns the state and the
/// success probability.
pub fn dense_filter_oracle(w: &GhzWeights, m: usize) -> Result<(DensityMatrix, f64)> {
    dense_filter_oracle_via(w, m, PermutationRoute::IndexMap)
}

pub fn dense_filter_oracle_via(
    w: &GhzWeights,
    m: usize,
    route: PermutationRoute,
) -> Result<(DensityMatrix, f64)> {
    require_three(w)?;
    if m == 0 {
        return Err(Error::OutOfRange("copy count must be at least 1".into()));
    }
    if m > MAX_ORACLE_COPIES {
        return Err(Error::OracleCapExceeded {
            max: MAX_ORACLE_COPIES,
            requested: m,
        });
    }
    let single = family_density(w);
    let mut copies = single.clone();
    for _ in 1..m {
        copies = copies.kron(&single);
    }
    // trio t, party p: position 3t + p -> p m + t
    let perm: Vec<usize> = (0..3 * m).map(|q| (q % 3) * m + q / 3).collect();
    let mut state = match route {
        PermutationRoute::IndexMap => permute_qubits(&copies, &perm)?,
        PermutationRoute::AdjacentSwaps => permute_qubits_by_swaps(&copies, &perm)?,
    };
    drop(copies);
    let filter = FilterOperator::new(m)?;
    for party in 0..3 {
        let targets: Vec<usize> = (party * m..(party + 1) * m).collect();
        state = apply_local(&state, filter.matrix(), &targets)?;
    }
    let reduced = partial_trace(&state, &[0, m, 2 * m])?;
    let probability = reduced.trace().re;
    if probability <= 0.0 {
        return Err(Error::DegenerateOutcome(probability));
    }
    Ok((reduced.scaled(1.0 / probability), probability))
}

/// Outcome of the copy-number search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "m", rename_all = "snake_case")]
pub enum MinimalM {
    Found(u64),
    /// `delta/2 <= max(lambda_1, lambda_3)`: no number of copies helps.
    NotDistillable,
    /// Distillable, but more than [`MINIMAL_M_CAP`] copies are needed.
    CapReached,
}

/// `(delta/2)^m > lambda_1^m + lambda_3^m`, evaluated directly while the powers
/// stay normal and in the log domain afterwards.
fn filtered_pair_wins(half_delta: f64, l1: f64, l3: f64, m: u64) -> bool {
    if let Ok(exp) = i32::try_from(m) {
        let lhs = half_delta.powi(exp);
        if lhs > 1e-280 {
            return lhs > l1.powi(exp) + l3.powi(exp);
        }
    }
    let mf = m as f64;
    let lhs = mf * half_delta.ln();
    let a = mf * l1.ln();
    let b = mf * l3.ln();
    let hi = a.max(b);
    let rhs = if hi == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        hi + ((a - hi).exp() + (b - hi).exp()).ln()
    };
    lhs > rhs
}

/// Smallest number of copies after which projecting `A` onto `|+>` leaves a
/// `BC` pair with fidelity above 1/2.
pub fn minimal_m(w: &GhzWeights) -> Result<MinimalM> {
    require_three(w)?;
    let half_delta = w.delta() / 2.0;
    let (l1, l3) = (w.lambda(1), w.lambda(3));
    if half_delta <= l1.max(l3) {
        return Ok(MinimalM::NotDistillable);
    }
    Ok((1..=MINIMAL_M_CAP)
        .find(|&m| filtered_pair_wins(half_delta, l1, l3, m))
        .map_or(MinimalM::CapReached, MinimalM::Found))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillOutcome {
    pub pair: (Qubit, Qubit),
    pub projected_qubit: Qubit,
    pub m_used: u64,
    /// Normalized first-trio weights after filtering, in the frame where the
    /// projected qubit is `A` and the pair is `(B, C)`.
    pub filtered_weights: GhzWeights,
    pub filter_success_probability: f64,
    pub projection_success_probability: f64,
    pub pair_fidelity: f64,
    pub purifiable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum PairPlan {
    Distillable(DistillOutcome),
    NotDistillable,
    /// The pair is distillable but needs more than [`MINIMAL_M_CAP`] copies.
    SearchCapReached,
}

/// Permutation sending the projected qubit to `A` and the pair to `(B, C)`.
fn relabel(w: &GhzWeights, i: usize, k: usize) -> Result<(GhzWeights, usize)> {
    require_three(w)?;
    if i >= 3 || k >= 3 || i == k {
        return Err(Error::OutOfRange(format!("invalid qubit pair ({i}, {k})")));
    }
    let third = 3 - i - k;
    let mut perm = [0usize; 3];
    perm[third] = 0;
    perm[i] = 1;
    perm[k] = 2;
    Ok((w.permute_qubits(&perm)?, third))
}

fn outcome(
    relabeled: &GhzWeights,
    i: usize,
    k: usize,
    third: usize,
    m: u64,
) -> Result<DistillOutcome> {
    let m_usize = usize::try_from(m).map_err(|_| Error::OutOfRange(format!("copy count {m}")))?;
    let (filtered, filter_p) = amplify(relabeled, m_usize)?;
    let (fidelity, projection_p) = pair_fidelity_after_projection(&filtered)?;
    Ok(DistillOutcome {
        pair: (Qubit(i), Qubit(k)),
        projected_qubit: Qubit(third),
        m_used: m,
        filtered_weights: filtered,
        filter_success_probability: filter_p,
        projection_success_probability: projection_p,
        pair_fidelity: fidelity,
        purifiable: fidelity > 0.5,
    })
}

/// Plans the distillation of a maximally entangled pair between qubits `i` and
/// `k` with the smallest sufficient number of copies; the third qubit is the
/// one measured.
pub fn plan_pair_distillation(w: &GhzWeights, i: usize, k: usize) -> Result<PairPlan> {
    let (relabeled, third) = relabel(w, i, k)?;
    if !pair_distillable(w, i, k)? {
        return Ok(PairPlan::NotDistillable);
    }
    match minimal_m(&relabeled)? {
        MinimalM::Found(m) => Ok(PairPlan::Distillable(outcome(&relabeled, i, k, third, m)?)),
        MinimalM::CapReached => Ok(PairPlan::SearchCapReached),
        MinimalM::NotDistillable => Ok(PairPlan::NotDistillable),
    }
}

/// As [`plan_pair_distillation`] with a caller-chosen copy count; the outcome
/// may then have `purifiable = false`.
pub fn plan_pair_distillation_with_m(
    w: &GhzWeights,
    i: usize,
    k: usize,
    m: u64,
) -> Result<PairPlan> {
    let (relabeled, third) = relabel(w, i, k)?;
    if !pair_distillable(w, i, k)? {
        return Ok(PairPlan::NotDistillable);
    }
    Ok(PairPlan::Distillable(outcome(&relabeled, i, k, third, m)?))
}
