//! Separability class and distillability predicates for GHZ-diagonal states.
//!
//! Within the family, the partial transpose over a set `S` only moves the
//! `|0...0><1...1|` coherence `delta/2` into the 2x2 block spanned by the two
//! components of one basis pair `j(S)`, whose diagonal is `lambda_{j(S)}`.
//! Hence `rho^{T_S} >= 0` iff `delta <= 2 lambda_{j(S)}`, where `j(S)` is the
//! `(n-1)`-bit label of `S` (or of its complement, whichever omits the last qubit).

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::family::{family_density, GhzWeights};
use crate::tensor::{is_ppt, parse_qubit_label, qubit_label, Partition};

/// Relative slack (in units of the compared magnitudes) absorbing rounding in
/// `delta <= 2 lambda`; boundary states count as positive.
pub const BOUNDARY_REL_SLACK: f64 = 4.0 * f64::EPSILON;

/// A qubit index, serialized by its report label (`"A"`, `"B"`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qubit(pub usize);

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&qubit_label(self.0))
    }
}

impl Serialize for Qubit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&qubit_label(self.0))
    }
}

impl<'de> Deserialize<'de> for Qubit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_qubit_label(&s)
            .map(Qubit)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid qubit label {s:?}")))
    }
}

/// Index `j(S)` of the weight `lambda_j` controlling positivity of `rho^{T_S}`.
pub fn lambda_index(s: &Partition) -> usize {
    let n = s.n_qubits();
    let side = if s.contains(n - 1) {
        s.complement()
    } else {
        *s
    };
    side.qubits()
        .into_iter()
        .fold(0usize, |acc, k| acc | 1 << (n - 2 - k))
}

fn check_partition(w: &GhzWeights, s: &Partition) -> Result<()> {
    if s.n_qubits() != w.n_qubits() {
        return Err(Error::InvalidPartition {
            n_qubits: w.n_qubits(),
            mask: s.mask(),
        });
    }
    Ok(())
}

fn check_qubit(w: &GhzWeights, k: usize) -> Result<()> {
    if k >= w.n_qubits() {
        return Err(Error::QubitOutOfRange {
            n_qubits: w.n_qubits(),
            index: k,
        });
    }
    Ok(())
}

fn delta_within(delta: f64, bound: f64) -> bool {
    delta <= bound + BOUNDARY_REL_SLACK * delta.max(bound)
}

/// `rho^{T_S} >= 0` from the closed-form condition `delta <= 2 lambda_{j(S)}`.
pub fn pt_positive_analytic(w: &GhzWeights, s: &Partition) -> Result<bool> {
    check_partition(w, s)?;
    Ok(delta_within(w.delta(), 2.0 * w.lambda(lambda_index(s))))
}

/// `rho^{T_S} >= 0` decided by the eigenvalue oracle on the dense state.
pub fn pt_positive_numeric(w: &GhzWeights, s: &Partition, tol: f64) -> Result<bool> {
    check_partition(w, s)?;
    is_ppt(&family_density(w), s, tol)
}

/// Separable with respect to qubit `k` versus the rest; equivalent to a positive
/// partial transpose on `{k}` within the family.
pub fn separable_wrt(w: &GhzWeights, k: usize) -> Result<bool> {
    check_qubit(w, k)?;
    pt_positive_analytic(w, &Partition::singleton(w.n_qubits(), k)?)
}

fn bipartitions(w: &GhzWeights) -> Vec<Partition> {
    Partition::bipartitions(w.n_qubits()).expect("weights have at least two qubits")
}

/// Fully separable iff every bipartition has a positive partial transpose.
pub fn fully_separable(w: &GhzWeights) -> bool {
    bipartitions(w)
        .iter()
        .all(|s| pt_positive_analytic(w, s).expect("partition built for w"))
}

/// A maximally entangled pair between qubits `i` and `k` can be distilled iff
/// every bipartition separating them has a negative partial transpose.
pub fn pair_distillable(w: &GhzWeights, i: usize, k: usize) -> Result<bool> {
    check_qubit(w, i)?;
    check_qubit(w, k)?;
    if i == k {
        return Err(Error::OutOfRange(format!(
            "pair ({i}, {k}) repeats a qubit"
        )));
    }
    let n = w.n_qubits();
    let others: Vec<usize> = (0..n).filter(|&q| q != i && q != k).collect();
    for extra in 0..(1u64 << others.len()) {
        let mut mask = 1u64 << i;
        for (t, &q) in others.iter().enumerate() {
            if extra >> t & 1 == 1 {
                mask |= 1 << q;
            }
        }
        if pt_positive_analytic(w, &Partition::new(n, mask)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// No bipartition has a positive partial transpose. For three qubits this is
/// GHZ distillability; for more qubits it is the pairwise-distillation
/// extension (see [`ClassReport::ghz_distillable_extension`]).
pub fn ghz_distillable(w: &GhzWeights) -> bool {
    bipartitions(w)
        .iter()
        .all(|s| !pt_positive_analytic(w, s).expect("partition built for w"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPositivity {
    pub set: Vec<Qubit>,
    pub positive: bool,
}

/// Separability and distillability summary of a family state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub n_qubits: usize,
    /// One entry per bipartition, singletons first.
    pub pt_positive: Vec<PartitionPositivity>,
    /// Three-qubit class label: 1 (fully inseparable), 2, 3 or 5 (fully separable).
    pub class3: Option<u8>,
    /// Qubits the state is separable from (positive single-qubit partial transpose).
    pub biseparable_qubits: Vec<Qubit>,
    pub fully_separable: bool,
    pub ghz_distillable: bool,
    /// Set when `ghz_distillable` relies on the more-than-three-qubit extension.
    pub ghz_distillable_extension: bool,
    pub distillable_pairs: Vec<(Qubit, Qubit)>,
    /// For three-qubit class 3: the pair whose shared maximally entangled
    /// states activate the remaining entanglement.
    pub activation_hint: Option<(Qubit, Qubit)>,
}

impl ClassReport {
    pub fn is_pt_positive(&self, s: &Partition) -> Option<bool> {
        let canon: Vec<Qubit> = s.canonical().qubits().into_iter().map(Qubit).collect();
        self.pt_positive
            .iter()
            .find(|p| p.set == canon)
            .map(|p| p.positive)
    }
}

/// Full report for any qubit count.
pub fn classify(w: &GhzWeights) -> ClassReport {
    let n = w.n_qubits();
    let parts = bipartitions(w);
    let pt_positive: Vec<PartitionPositivity> = parts
        .iter()
        .map(|s| PartitionPositivity {
            set: s.qubits().into_iter().map(Qubit).collect(),
            positive: pt_positive_analytic(w, s).expect("partition built for w"),
        })
        .collect();
    let biseparable_qubits: Vec<Qubit> = (0..n)
        .filter(|&k| separable_wrt(w, k).expect("qubit in range"))
        .map(Qubit)
        .collect();
    let fully_separable = pt_positive.iter().all(|p| p.positive);
    let ghz_distillable = pt_positive.iter().all(|p| !p.positive);
    let mut distillable_pairs = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            if pair_distillable(w, i, k).expect("distinct qubits in range") {
                distillable_pairs.push((Qubit(i), Qubit(k)));
            }
        }
    }
    let (class3, activation_hint) = if n == 3 {
        let class = match biseparable_qubits.len() {
            0 => 1,
            1 => 2,
            2 => 3,
            _ => 5,
        };
        let hint = (class == 3).then(|| (biseparable_qubits[0], biseparable_qubits[1]));
        (Some(class), hint)
    } else {
        (None, None)
    };
    ClassReport {
        n_qubits: n,
        pt_positive,
        class3,
        biseparable_qubits,
        fully_separable,
        ghz_distillable,
        ghz_distillable_extension: n != 3,
        distillable_pairs,
        activation_hint,
    }
}

/// Three-qubit classification.
pub fn classify3(w: &GhzWeights) -> Result<ClassReport> {
    if w.n_qubits() != 3 {
        return Err(Error::WrongQubitCount {
            expected: 3,
            actual: w.n_qubits(),
        });
    }
    Ok(classify(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::werner_like;
    use crate::tensor::DEFAULT_PPT_TOL;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    fn single(k: usize) -> Partition {
        Partition::singleton(3, k).unwrap()
    }

    /// delta = 0.4 with only lambda_1 large enough: PT positive on B alone.
    fn class2_example() -> GhzWeights {
        GhzWeights::new(3, 0.4, 0.0, vec![0.2, 0.05, 0.05]).unwrap()
    }

    #[test]
    fn lambda_index_for_three_qubits() {
        assert_eq!(lambda_index(&single(A)), 2);
        assert_eq!(lambda_index(&single(B)), 1);
        assert_eq!(lambda_index(&single(C)), 3);
        let ab = Partition::from_qubits(3, &[A, B]).unwrap();
        assert_eq!(lambda_index(&ab), 3);
        // N = 4: {A_4} is governed by the last weight
        let d = Partition::singleton(4, 3).unwrap();
        assert_eq!(lambda_index(&d), 7);
    }

    #[test]
    fn analytic_examples() {
        let w = class2_example();
        assert!(!pt_positive_analytic(&w, &single(A)).unwrap());
        assert!(pt_positive_analytic(&w, &single(B)).unwrap());
        assert!(!pt_positive_analytic(&w, &single(C)).unwrap());
        for k in [A, B, C] {
            assert_eq!(
                pt_positive_analytic(&w, &single(k)).unwrap(),
                pt_positive_numeric(&w, &single(k), DEFAULT_PPT_TOL).unwrap()
            );
        }

        let boundary = werner_like(3, 0.2).unwrap();
        let mixed = GhzWeights::uniform(3).unwrap();
        for k in [A, B, C] {
            assert!(pt_positive_analytic(&boundary, &single(k)).unwrap());
            assert!(pt_positive_numeric(&boundary, &single(k), DEFAULT_PPT_TOL).unwrap());
            assert!(pt_positive_analytic(&mixed, &single(k)).unwrap());
        }
    }

    #[test]
    fn pure_ghz_has_no_positive_transpose() {
        let w = GhzWeights::pure_ghz(3).unwrap();
        for k in [A, B, C] {
            assert!(!pt_positive_numeric(&w, &single(k), DEFAULT_PPT_TOL).unwrap());
            assert!(!pt_positive_analytic(&w, &single(k)).unwrap());
        }
        assert!(ghz_distillable(&w));
        assert!(!fully_separable(&w));
    }

    #[test]
    fn foreign_partition_is_rejected() {
        let w = werner_like(3, 0.5).unwrap();
        let s = Partition::singleton(4, 0).unwrap();
        assert!(pt_positive_analytic(&w, &s).is_err());
    }

    #[test]
    fn class_two_example() {
        let r = classify3(&class2_example()).unwrap();
        assert_eq!(r.class3, Some(2));
        assert_eq!(r.biseparable_qubits, vec![Qubit(B)]);
        assert_eq!(r.distillable_pairs, vec![(Qubit(A), Qubit(C))]);
        assert!(!r.ghz_distillable);
        assert!(!r.fully_separable);
        assert_eq!(r.activation_hint, None);
    }

    #[test]
    fn class_three_reports_activation_pair() {
        // lambda_2 (A) and lambda_1 (B) cover delta, lambda_3 (C) does not
        let w = GhzWeights::new(3, 0.3, 0.0, vec![0.15, 0.15, 0.05]).unwrap();
        let r = classify3(&w).unwrap();
        assert_eq!(r.class3, Some(3));
        assert_eq!(r.activation_hint, Some((Qubit(A), Qubit(B))));
        assert!(r.distillable_pairs.is_empty());
    }

    #[test]
    fn werner_threshold_three_qubits() {
        let r = classify3(&werner_like(3, 0.21).unwrap()).unwrap();
        assert_eq!(r.class3, Some(1));
        assert!(r.ghz_distillable);
        assert_eq!(r.distillable_pairs.len(), 3);

        let r = classify3(&werner_like(3, 0.19).unwrap()).unwrap();
        assert_eq!(r.class3, Some(5));
        assert!(r.fully_separable);
        assert!(r.distillable_pairs.is_empty());
    }

    #[test]
    fn fully_separable_examples() {
        assert!(fully_separable(&werner_like(4, 1.0 / 9.0).unwrap()));
        assert!(!fully_separable(&werner_like(4, 1.0 / 9.0 + 1e-6).unwrap()));
        assert!(!fully_separable(&GhzWeights::pure_ghz(4).unwrap()));
        assert!(fully_separable(&GhzWeights::uniform(4).unwrap()));
    }

    #[test]
    fn pair_distillability() {
        let w = class2_example();
        for (i, k) in [(A, B), (A, C), (B, C)] {
            let expect = !separable_wrt(&w, i).unwrap() && !separable_wrt(&w, k).unwrap();
            assert_eq!(pair_distillable(&w, i, k).unwrap(), expect);
        }
        let w4 = werner_like(4, 0.2).unwrap();
        for i in 0..4 {
            for k in i + 1..4 {
                assert!(pair_distillable(&w4, i, k).unwrap());
            }
        }
        let sep = GhzWeights::uniform(3).unwrap();
        assert!(!pair_distillable(&sep, A, C).unwrap());
        assert!(pair_distillable(&sep, A, A).is_err());
    }

    #[test]
    fn wrong_qubit_count() {
        assert!(matches!(
            classify3(&werner_like(4, 0.3).unwrap()),
            Err(Error::WrongQubitCount { .. })
        ));
    }

    #[test]
    fn report_round_trips_through_json_labels() {
        let r = classify3(&class2_example()).unwrap();
        assert_eq!(r.is_pt_positive(&single(B)), Some(true));
        assert_eq!(
            r.is_pt_positive(&Partition::from_qubits(3, &[A, C]).unwrap()),
            Some(true)
        );
    }
}
