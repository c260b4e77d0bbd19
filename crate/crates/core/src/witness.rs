//! Explicit operators certifying the separability of three-qubit family states.
//!
//! Biseparability with respect to `A` is certified by
//! `rho_tilde = rho + delta/2 (|Psi_2^+><Psi_2^+| - |Psi_2^-><Psi_2^-|)`, which is
//! invariant under the partial transpose on `A` and positive iff
//! `delta <= 2 lambda_2`. Full separability is certified by `rho_hat`, the family
//! state with `lambda_k^{+-} = lambda_k +- delta/2`, written as an explicit mixture
//! of product states. Both operators depolarize back to the original weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{ghz_ket, pair_count, GhzWeights, Sign};
use crate::tensor::{min_eigenvalue, partial_transpose, DensityMatrix, Ket, Kron, Partition};

/// Coefficients within `WEIGHT_CLAMP` of zero are rounding noise and clamp to zero.
pub const WEIGHT_CLAMP: f64 = 1e-12;

/// Ensemble weights below this are rejected as malformed.
pub const MIN_ENSEMBLE_WEIGHT: f64 = -1e-14;

fn require_three(w: &GhzWeights) -> Result<()> {
    if w.n_qubits() != 3 {
        return Err(Error::WrongQubitCount {
            expected: 3,
            actual: w.n_qubits(),
        });
    }
    Ok(())
}

pub fn build_rho_tilde(w: &GhzWeights) -> Result<DensityMatrix> {
    require_three(w)?;
    let rho = crate::family::family_density(w);
    let shift = ghz_ket(3, 2, Sign::Plus)?
        .projector()
        .sub(&ghz_ket(3, 2, Sign::Minus)?.projector())?;
    rho.add(&shift.scaled(w.delta() / 2.0))
}

/// Checkable properties of `rho_tilde`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoTildeCertificate {
    /// `max |rho_tilde^{T_A} - rho_tilde|`
    pub invariance_residual: f64,
    pub min_eigenvalue: f64,
    /// The closed-form positivity condition `delta <= 2 lambda_2`.
    pub positive_analytic: bool,
}

pub fn certify_rho_tilde(w: &GhzWeights) -> Result<RhoTildeCertificate> {
    let tilde = build_rho_tilde(w)?;
    let pt = partial_transpose(&tilde, &Partition::singleton(3, 0)?)?;
    Ok(RhoTildeCertificate {
        invariance_residual: pt.max_abs_diff(&tilde)?,
        min_eigenvalue: min_eigenvalue(&tilde)?,
        positive_analytic: w.delta() <= 2.0 * w.lambda(2),
    })
}

/// Weights of `rho_hat`; `lambda_hat_plus[k - 1]` is the weight of `|Psi_k^+>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoHatWeights {
    pub base: GhzWeights,
    pub lambda_hat_plus: Vec<f64>,
    pub lambda_hat_minus: Vec<f64>,
}

impl RhoHatWeights {
    /// `sum_sigma lambda_0^sigma P_0^sigma + sum_k (lambda_hat_k^+ P_k^+ + lambda_hat_k^- P_k^-)`
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let n = self.base.n_qubits();
        let mut acc = ghz_ket(n, 0, Sign::Plus)?
            .projector()
            .scaled(self.base.lambda0_plus());
        acc = acc.add(
            &ghz_ket(n, 0, Sign::Minus)?
                .projector()
                .scaled(self.base.lambda0_minus()),
        )?;
        for k in 1..pair_count(n) {
            let p = ghz_ket(n, k, Sign::Plus)?.projector();
            let m = ghz_ket(n, k, Sign::Minus)?.projector();
            acc = acc.add(&p.scaled(self.lambda_hat_plus[k - 1]))?;
            acc = acc.add(&m.scaled(self.lambda_hat_minus[k - 1]))?;
        }
        Ok(acc)
    }
}

/// Requires every single-qubit partial transpose to be positive
/// (`delta <= 2 lambda_k` for all `k`); otherwise the offending `k` is reported.
pub fn build_rho_hat(w: &GhzWeights) -> Result<RhoHatWeights> {
    require_three(w)?;
    let half = w.delta() / 2.0;
    let mut plus = Vec::with_capacity(3);
    let mut minus = Vec::with_capacity(3);
    for (i, &l) in w.lambdas().iter().enumerate() {
        let low = l - half;
        if low < -WEIGHT_CLAMP {
            return Err(Error::NegativeCoefficient {
                index: i + 1,
                value: low,
            });
        }
        plus.push(l + half);
        minus.push(low.max(0.0));
    }
    Ok(RhoHatWeights {
        base: w.clone(),
        lambda_hat_plus: plus,
        lambda_hat_minus: minus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTerm {
    pub weight: f64,
    /// One single-qubit ket per qubit, qubit `A` first.
    pub factors: Vec<Ket>,
}

/// A mixture of full product states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableEnsemble {
    pub n_qubits: usize,
    pub terms: Vec<EnsembleTerm>,
}

impl SeparableEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    fn check(&self) -> Result<()> {
        for (i, t) in self.terms.iter().enumerate() {
            if t.factors.len() != self.n_qubits {
                return Err(Error::MalformedEnsemble(format!(
                    "term {i} has {} factors for {} qubits",
                    t.factors.len(),
                    self.n_qubits
                )));
            }
            if !t.weight.is_finite() || t.weight < MIN_ENSEMBLE_WEIGHT {
                return Err(Error::MalformedEnsemble(format!(
                    "term {i} has weight {}",
                    t.weight
                )));
            }
            for (q, f) in t.factors.iter().enumerate() {
                if f.dim() != 2 {
                    return Err(Error::MalformedEnsemble(format!(
                        "term {i} factor {q} has dimension {}",
                        f.dim()
                    )));
                }
                if !f.is_normalized() {
                    return Err(Error::MalformedEnsemble(format!(
                        "term {i} factor {q} has squared norm {}",
                        f.norm_sqr()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `sum_i w_i |a_i><a_i| (x) |b_i><b_i| (x) ...`
    pub fn reconstruct(&self) -> Result<DensityMatrix> {
        self.check()?;
        let mut acc = DensityMatrix::zeros(self.n_qubits);
        for t in &self.terms {
            let product = t
                .factors
                .iter()
                .skip(1)
                .fold(t.factors[0].clone(), |k, f| k.kron(f));
            acc = acc.add(&product.projector().scaled(t.weight))?;
        }
        Ok(acc)
    }
}

fn bit_ket(bit: usize) -> Ket {
    if bit == 0 {
        Ket::zero()
    } else {
        Ket::one()
    }
}

/// The four product states `|+++>, |+-->, |-+->, |--+>` (indexed by `k`), whose
/// projectors sum to `sum_k |Psi_k^+><Psi_k^+|`.
pub fn phi_states() -> [Vec<Ket>; 4] {
    let pm = |minus: bool| if minus { Ket::minus() } else { Ket::plus() };
    [0usize, 1, 2, 3].map(|k| {
        let (a, b) = (k >> 1 & 1 == 1, k & 1 == 1);
        vec![pm(a), pm(b), pm(a ^ b)]
    })
}

/// Product-state decomposition of `rho_hat`:
///
/// `rho_hat = sum_k c_k (|k,0><k,0| + |3-k,1><3-k,1|) + delta sum_k |phi_k><phi_k|`
/// with `c_k = (lambda_hat_k^+ + lambda_hat_k^- - delta) / 2`. Terms whose
/// weight is within [`WEIGHT_CLAMP`] of zero are omitted.
pub fn fully_separable_ensemble(w: &GhzWeights) -> Result<SeparableEnsemble> {
    let hat = build_rho_hat(w)?;
    let delta = w.delta();
    let mut terms = Vec::new();
    for k in 0..4usize {
        let c = if k == 0 {
            (w.lambda0_plus() + w.lambda0_minus() - delta) / 2.0
        } else {
            (hat.lambda_hat_plus[k - 1] + hat.lambda_hat_minus[k - 1] - delta) / 2.0
        };
        let c = if c.abs() <= WEIGHT_CLAMP { 0.0 } else { c };
        if c < 0.0 {
            return Err(Error::NegativeCoefficient { index: k, value: c });
        }
        if c == 0.0 {
            continue;
        }
        let partner = 3 - k;
        terms.push(EnsembleTerm {
            weight: c,
            factors: vec![bit_ket(k >> 1 & 1), bit_ket(k & 1), Ket::zero()],
        });
        terms.push(EnsembleTerm {
            weight: c,
            factors: vec![bit_ket(partner >> 1 & 1), bit_ket(partner & 1), Ket::one()],
        });
    }
    if delta > 0.0 {
        for factors in phi_states() {
            terms.push(EnsembleTerm {
                weight: delta,
                factors,
            });
        }
    }
    Ok(SeparableEnsemble { n_qubits: 3, terms })
}

/// Largest entrywise deviation between the ensemble mixture and `target`.
pub fn verify_ensemble(e: &SeparableEnsemble, target: &DensityMatrix) -> Result<f64> {
    if target.n_qubits() != e.n_qubits {
        return Err(Error::WrongQubitCount {
            expected: e.n_qubits,
            actual: target.n_qubits(),
        });
    }
    e.reconstruct()?.max_abs_diff(target)
}
