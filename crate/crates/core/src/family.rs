//! The GHZ basis and the GHZ-diagonal state family.
//!
//! For `n` qubits the basis kets are
//! `|Psi_j^{+-}> = (|j>|0> +- |2^(n-1) - j - 1>|1>) / sqrt(2)`, `j = 0 .. 2^(n-1)`,
//! where `|j>` is the computational state of the first `n - 1` qubits. The
//! family mixes `|Psi_0^+>` and `|Psi_0^->` with independent weights and every
//! other pair `|Psi_j^{+-}>` with a shared weight `lambda_j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{bit_position, DensityMatrix, Ket};

/// Tolerance on `lambda0_plus + lambda0_minus + 2 sum(lambdas) = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Negative weights down to this value are treated as rounding noise and clamped to zero.
pub const NEGATIVE_WEIGHT_CLAMP: f64 = 1e-12;

/// Hermiticity and trace tolerance for dense inputs to [`depolarize`].
pub const STATE_TOL: f64 = 1e-9;

/// Largest register for which weight vectors (`2^(n-1) - 1` entries) are accepted.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Number of GHZ basis pairs (values of `j`) for `n` qubits.
pub fn pair_count(n_qubits: usize) -> usize {
    1usize << (n_qubits - 1)
}

fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if !(2..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::OutOfRange(format!(
            "qubit count {n_qubits} outside 2..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Computational indices `(2j, 2^n - 2j - 1)` of the two components of `|Psi_j^{+-}>`.
pub fn ghz_components(n_qubits: usize, j: usize) -> (usize, usize) {
    (2 * j, (1usize << n_qubits) - 2 * j - 1)
}

pub fn ghz_ket(n_qubits: usize, j: usize, sign: Sign) -> Result<Ket> {
    check_qubit_count(n_qubits)?;
    if j >= pair_count(n_qubits) {
        return Err(Error::GhzIndexOutOfRange { n_qubits, index: j });
    }
    let (lo, hi) = ghz_components(n_qubits, j);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    amps[lo] = Complex64::new(h, 0.0);
    amps[hi] = Complex64::new(sign.factor() * h, 0.0);
    Ket::new(amps)
}

/// Parameters of a GHZ-diagonal state.
///
/// `lambdas[j - 1]` holds the weight shared by `|Psi_j^+>` and `|Psi_j^->`.
/// The labelling is canonical: `lambda0_plus >= lambda0_minus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzWeights {
    n_qubits: usize,
    lambda0_plus: f64,
    lambda0_minus: f64,
    lambdas: Vec<f64>,
}

fn clamp_weight(name: &str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidWeights(format!("{name} is not finite")));
    }
    if value < -NEGATIVE_WEIGHT_CLAMP {
        return Err(Error::InvalidWeights(format!(
            "{name} = {value} is negative"
        )));
    }
    Ok(value.max(0.0))
}

impl GhzWeights {
    /// Validated, canonically labelled weights.
    pub fn new(
        n_qubits: usize,
        lambda0_plus: f64,
        lambda0_minus: f64,
        lambdas: Vec<f64>,
    ) -> Result<Self> {
        let (w, flipped) = Self::canonicalize(n_qubits, lambda0_plus, lambda0_minus, lambdas)?;
        if flipped {
            return Err(Error::InvalidWeights(
                "lambda0_plus < lambda0_minus (non-canonical labelling)".into(),
            ));
        }
        Ok(w)
    }

    /// Validates the weights and swaps `lambda0_plus`/`lambda0_minus` if needed.
    /// The flag reports whether the swap happened, which corresponds to
    /// redefining the phase of the local `|1>` of one qubit.
    pub fn canonicalize(
        n_qubits: usize,
        lambda0_plus: f64,
        lambda0_minus: f64,
        lambdas: Vec<f64>,
    ) -> Result<(Self, bool)> {
        check_qubit_count(n_qubits)?;
        let expected = pair_count(n_qubits) - 1;
        if lambdas.len() != expected {
            return Err(Error::InvalidWeights(format!(
                "expected {expected} lambdas for {n_qubits} qubits, got {}",
                lambdas.len()
            )));
        }
        let mut p = clamp_weight("lambda0_plus", lambda0_plus)?;
        let mut m = clamp_weight("lambda0_minus", lambda0_minus)?;
        let lambdas = lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| clamp_weight(&format!("lambda_{}", i + 1), l))
            .collect::<Result<Vec<_>>>()?;
        let total = p + m + 2.0 * lambdas.iter().sum::<f64>();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let flipped = p < m;
        if flipped {
            std::mem::swap(&mut p, &mut m);
        }
        Ok((
            Self {
                n_qubits,
                lambda0_plus: p,
                lambda0_minus: m,
                lambdas,
            },
            flipped,
        ))
    }

    /// All basis states equally weighted: the maximally mixed state.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let u = 1.0 / (1u64 << n_qubits) as f64;
        Self::new(n_qubits, u, u, vec![u; pair_count(n_qubits) - 1])
    }

    /// The pure GHZ state `|Psi_0^+>`.
    pub fn pure_ghz(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        Self::new(n_qubits, 1.0, 0.0, vec![0.0; pair_count(n_qubits) - 1])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn lambda0_plus(&self) -> f64 {
        self.lambda0_plus
    }

    pub fn lambda0_minus(&self) -> f64 {
        self.lambda0_minus
    }

    /// `lambda_j` for `j >= 1`.
    pub fn lambda(&self, j: usize) -> f64 {
        assert!(
            j >= 1 && j <= self.lambdas.len(),
            "lambda index {j} out of range 1..={}",
            self.lambdas.len()
        );
        self.lambdas[j - 1]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `lambda0_plus - lambda0_minus`, non-negative by construction.
    pub fn delta(&self) -> f64 {
        self.lambda0_plus - self.lambda0_minus
    }

    /// Weight of `|Psi_j^sign>` (so `lambda_j` for both signs when `j >= 1`).
    pub fn coefficient(&self, j: usize, sign: Sign) -> f64 {
        match (j, sign) {
            (0, Sign::Plus) => self.lambda0_plus,
            (0, Sign::Minus) => self.lambda0_minus,
            _ => self.lambda(j),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.lambdas
            .iter()
            .zip(&other.lambdas)
            .map(|(a, b)| (a - b).abs())
            .fold(
                (self.lambda0_plus - other.lambda0_plus)
                    .abs()
                    .max((self.lambda0_minus - other.lambda0_minus).abs()),
                f64::max,
            )
    }

    /// Weights of the same state with its qubits relabelled: input qubit `k`
    /// moves to position `perm[k]`.
    ///
    /// The pair `{x, complement(x)}` of computational strings supporting
    /// `|Psi_j^{+-}>` is carried to `{perm(x), complement(perm(x))}`; the
    /// `j = 0` pair and its coherence are fixed by every relabelling.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: perm.len(),
            });
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::OutOfRange(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let full = (1usize << n) - 1;
        let mut lambdas = vec![0.0; self.lambdas.len()];
        for (idx, &l) in self.lambdas.iter().enumerate() {
            let x = 2 * (idx + 1);
            let mut y = (0..n).fold(0usize, |acc, k| {
                acc | ((x >> bit_position(n, k)) & 1) << bit_position(n, perm[k])
            });
            if y & 1 == 1 {
                y = full & !y;
            }
            lambdas[(y >> 1) - 1] = l;
        }
        Ok(Self {
            n_qubits: n,
            lambda0_plus: self.lambda0_plus,
            lambda0_minus: self.lambda0_minus,
            lambdas,
        })
    }
}

/// Dense matrix of the family state: diagonal `(lambda_j^+ + lambda_j^-)/2` on
/// both components of each pair and a single coherence `delta/2` between
/// `|0...0>` and `|1...1>`.
pub fn family_density(w: &GhzWeights) -> DensityMatrix {
    let n = w.n_qubits();
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let g = (w.lambda0_plus + w.lambda0_minus) / 2.0;
    m[(0, 0)] = Complex64::new(g, 0.0);
    m[(dim - 1, dim - 1)] = Complex64::new(g, 0.0);
    let coherence = Complex64::new(w.delta() / 2.0, 0.0);
    m[(0, dim - 1)] = coherence;
    m[(dim - 1, 0)] = coherence;
    for j in 1..pair_count(n) {
        let (lo, hi) = ghz_components(n, j);
        let l = Complex64::new(w.lambda(j), 0.0);
        m[(lo, lo)] = l;
        m[(hi, hi)] = l;
    }
    DensityMatrix::from_matrix(m).expect("power-of-two dimension")
}

/// Result of projecting a state onto the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Depolarized {
    pub weights: GhzWeights,
    /// `lambda0_plus` and `lambda0_minus` were swapped to make `delta >= 0`.
    pub phase_flipped: bool,
}

/// Projects `rho` onto the GHZ-diagonal family, keeping
/// `<Psi_0^{+-}|rho|Psi_0^{+-}>` and the pair sums
/// `<Psi_j^+|rho|Psi_j^+> + <Psi_j^-|rho|Psi_j^->`.
pub fn depolarize(rho: &DensityMatrix) -> Result<Depolarized> {
    let n = rho.n_qubits();
    check_qubit_count(n)?;
    rho.validate_state(STATE_TOL)?;
    let trace = rho.trace().re;
    let dim = rho.dim();
    let d = |i: usize| rho.get(i, i).re;
    let coherence = rho.get(0, dim - 1).re;
    let g0 = (d(0) + d(dim - 1)) / 2.0;
    let plus = (g0 + coherence) / trace;
    let minus = (g0 - coherence) / trace;
    let lambdas = (1..pair_count(n))
        .map(|j| {
            let (lo, hi) = ghz_components(n, j);
            (d(lo) + d(hi)) / 2.0 / trace
        })
        .collect();
    let (weights, phase_flipped) = GhzWeights::canonicalize(n, plus, minus, lambdas)?;
    Ok(Depolarized {
        weights,
        phase_flipped,
    })
}

/// `rho(x) = x |Psi_0^+><Psi_0^+| + (1 - x) I / 2^n` in closed form.
pub fn werner_like(n_qubits: usize, x: f64) -> Result<GhzWeights> {
    check_qubit_count(n_qubits)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!(
            "mixing parameter {x} outside [0, 1]"
        )));
    }
    let noise = (1.0 - x) / (1u64 << n_qubits) as f64;
    Ok(GhzWeights {
        n_qubits,
        lambda0_plus: x + noise,
        lambda0_minus: noise,
        lambdas: vec![noise; pair_count(n_qubits) - 1],
    })
}

/// Dense `rho(x)` built from the GHZ projector and the identity.
pub fn werner_like_dense(n_qubits: usize, x: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!(
            "mixing parameter {x} outside [0, 1]"
        )));
    }
    let ghz = ghz_ket(n_qubits, 0, Sign::Plus)?.projector();
    ghz.scaled(x)
        .add(&DensityMatrix::maximally_mixed(n_qubits).scaled(1.0 - x))
}

/// Weights drawn uniformly from the probability simplex over
/// `(lambda0_plus, lambda0_minus, 2 lambda_1, ..., 2 lambda_last)`, then
/// canonicalized.
pub fn random_weights<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<GhzWeights> {
    check_qubit_count(n_qubits)?;
    let parts = pair_count(n_qubits) + 1;
    let draws: Vec<f64> = (0..parts).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    let lambdas = draws[2..].iter().map(|v| v / total / 2.0).collect();
    let (w, _) = GhzWeights::canonicalize(n_qubits, draws[0] / total, draws[1] / total, lambdas)?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ghz_kets_match_definition() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k = ghz_ket(3, 0, Sign::Plus).unwrap();
        let mut v = [0.0; 8];
        v[0] = h;
        v[7] = h;
        assert_eq!(k, Ket::from_real(&v).unwrap());

        // j = 1: |01>|0> - |10>|1>
        let k = ghz_ket(3, 1, Sign::Minus).unwrap();
        let mut v = [0.0; 8];
        v[0b010] = h;
        v[0b101] = -h;
        assert_eq!(k, Ket::from_real(&v).unwrap());
    }

    #[test]
    fn ghz_basis_is_orthonormal() {
        for n in [3, 4] {
            let mut kets = Vec::new();
            for j in 0..pair_count(n) {
                for s in [Sign::Plus, Sign::Minus] {
                    kets.push(ghz_ket(n, j, s).unwrap());
                }
            }
            assert_eq!(kets.len(), 1 << n);
            for (a, ka) in kets.iter().enumerate() {
                for (b, kb) in kets.iter().enumerate() {
                    let ip = ka.inner(kb).unwrap();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - c(expect)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn ghz_index_out_of_range() {
        assert!(matches!(
            ghz_ket(3, 4, Sign::Plus),
            Err(Error::GhzIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn weight_validation() {
        assert!(GhzWeights::new(3, 0.5, 0.5, vec![0.0; 2]).is_err());
        assert!(GhzWeights::new(3, 0.5, 0.6, vec![-0.05, 0.0, 0.0]).is_err());
        assert!(GhzWeights::new(3, 0.5, 0.4, vec![0.0, 0.0, 0.0]).is_err());
        assert!(GhzWeights::new(3, 0.1, 0.3, vec![0.1, 0.1, 0.1]).is_err());
        let (w, flipped) = GhzWeights::canonicalize(3, 0.1, 0.3, vec![0.1, 0.1, 0.1]).unwrap();
        assert!(flipped);
        assert_eq!(w.lambda0_plus(), 0.3);
        assert!((w.delta() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn family_density_examples() {
        let pure = family_density(&GhzWeights::pure_ghz(3).unwrap());
        assert!(
            pure.max_abs_diff(&ghz_ket(3, 0, Sign::Plus).unwrap().projector())
                .unwrap()
                < 1e-15
        );

        let mixed = family_density(&GhzWeights::uniform(3).unwrap());
        assert!(
            mixed
                .max_abs_diff(&DensityMatrix::maximally_mixed(3))
                .unwrap()
                < 1e-15
        );

        let w = GhzWeights::new(3, 0.4, 0.0, vec![0.2, 0.05, 0.05]).unwrap();
        let rho = family_density(&w);
        assert_eq!(rho.get(0, 7), c(0.2));
        assert_eq!(rho.get(7, 0), c(0.2));
        assert!((rho.trace() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn family_density_matches_sum_of_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3, 4] {
            let w = random_weights(n, &mut rng).unwrap();
            let mut expect = DensityMatrix::zeros(n);
            for j in 0..pair_count(n) {
                for s in [Sign::Plus, Sign::Minus] {
                    let p = ghz_ket(n, j, s).unwrap().projector();
                    expect = expect.add(&p.scaled(w.coefficient(j, s))).unwrap();
                }
            }
            assert!(family_density(&w).max_abs_diff(&expect).unwrap() < 1e-15);
        }
    }

    #[test]
    fn depolarize_examples() {
        let ghz = ghz_ket(3, 0, Sign::Plus).unwrap().projector();
        let d = depolarize(&ghz).unwrap();
        assert!(d.weights.max_abs_diff(&GhzWeights::pure_ghz(3).unwrap()) < 1e-15);
        assert!(!d.phase_flipped);

        let zero = Ket::basis(8, 0).unwrap().projector();
        let d = depolarize(&zero).unwrap();
        assert_eq!(d.weights.lambda0_plus(), 0.5);
        assert_eq!(d.weights.lambda0_minus(), 0.5);
        assert!(d.weights.lambdas().iter().all(|&l| l == 0.0));
    }

    #[test]
    fn depolarize_flags_negative_delta() {
        let minus = ghz_ket(3, 0, Sign::Minus).unwrap().projector();
        let d = depolarize(&minus).unwrap();
        assert!(d.phase_flipped);
        assert!((d.weights.lambda0_plus() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn depolarize_rejects_bad_trace() {
        let rho = DensityMatrix::identity(3);
        assert!(matches!(depolarize(&rho), Err(Error::InvalidTrace(_))));
    }

    #[test]
    fn werner_like_examples() {
        let w = werner_like(3, 0.0).unwrap();
        assert!(w.max_abs_diff(&GhzWeights::uniform(3).unwrap()) < 1e-16);

        let w = werner_like(3, 0.2).unwrap();
        assert!((w.lambda0_plus() - 0.3).abs() < 1e-15);
        assert!((w.lambda0_minus() - 0.1).abs() < 1e-15);
        assert!(w.lambdas().iter().all(|&l| (l - 0.1).abs() < 1e-15));
        assert!((w.delta() - 0.2).abs() < 1e-15);

        let w = werner_like(3, 1.0).unwrap();
        assert_eq!(w, GhzWeights::pure_ghz(3).unwrap());

        assert!(werner_like(3, 1.5).is_err());
        assert!(werner_like(3, -0.1).is_err());
    }

    #[test]
    fn werner_like_matches_dense_route() {
        for n in 2..=6 {
            for x in [0.0, 0.1, 1.0 / 3.0, 0.2, 0.77, 1.0] {
                let dense = depolarize(&werner_like_dense(n, x).unwrap()).unwrap();
                let closed = werner_like(n, x).unwrap();
                assert!(dense.weights.max_abs_diff(&closed) < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn permuting_weights_matches_dense_permutation() {
        use crate::tensor::permute_qubits;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [3, 4] {
            let w = random_weights(n, &mut rng).unwrap();
            let perms: &[&[usize]] = if n == 3 {
                &[&[1, 0, 2], &[2, 1, 0], &[1, 2, 0], &[0, 2, 1]]
            } else {
                &[&[3, 0, 1, 2], &[1, 0, 3, 2], &[0, 1, 3, 2]]
            };
            for perm in perms {
                let dense = permute_qubits(&family_density(&w), perm).unwrap();
                let expect = w.permute_qubits(perm).unwrap();
                assert!(
                    family_density(&expect).max_abs_diff(&dense).unwrap() < 1e-15,
                    "perm {perm:?}"
                );
            }
        }
    }

    #[test]
    fn random_weights_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=6 {
            for _ in 0..50 {
                let w = random_weights(n, &mut rng).unwrap();
                assert!(w.delta() >= 0.0);
                let total =
                    w.lambda0_plus() + w.lambda0_minus() + 2.0 * w.lambdas().iter().sum::<f64>();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
