//! Dense complex linear algebra on multiqubit operators.
//!
//! Every operator acting on `n` qubits is a `2^n x 2^n` matrix. Qubit `0`
//! (written `A` in reports) is the most significant bit of the row and column
//! index, so the computational state `|q0 q1 ... q(n-1)>` sits at index
//! `q0 * 2^(n-1) + ... + q(n-1)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Maximum entrywise deviation from Hermiticity accepted by spectral routines,
/// relative to the largest entry (floored at 1).
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default positivity tolerance on the minimum eigenvalue of a trace-one operator.
///
/// [`is_ppt`] divides it by the matrix dimension, i.e. it is measured in units of
/// the mean eigenvalue of the state.
pub const DEFAULT_PPT_TOL: f64 = 1e-9;

/// Outcomes with probability below this floor are reported as degenerate.
pub const DEGENERATE_PROBABILITY: f64 = 1e-14;

/// Tolerance on the squared norm of a ket that is required to be normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn log2_exact(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Bit position (counted from the least significant bit) of `qubit` in an
/// `n_qubits` register index.
#[inline]
pub fn bit_position(n_qubits: usize, qubit: usize) -> usize {
    n_qubits - 1 - qubit
}

/// A pure state vector (not necessarily normalized).
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: DVector<Complex64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        log2_exact(amplitudes.len())?;
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis ket `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        log2_exact(dim)?;
        if index >= dim {
            return Err(Error::OutOfRange(format!(
                "basis index {index} >= dimension {dim}"
            )));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub fn zero() -> Self {
        Self::basis(2, 0).expect("dimension 2")
    }

    pub fn one() -> Self {
        Self::basis(2, 1).expect("dimension 2")
    }

    /// `(|0> + |1>)/sqrt(2)`
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(&[h, h]).expect("dimension 2")
    }

    /// `(|0> - |1>)/sqrt(2)`
    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(&[h, -h]).expect("dimension 2")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORMALIZATION_TOL
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Ket) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// The outer product `|self><self|`.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits(),
            data: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Serialized as a list of `[re, im]` amplitude pairs.
impl Serialize for Ket {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.amplitudes.iter().map(|a| [a.re, a.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ket {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        Ket::new(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Dense operator on `n_qubits` qubits.
///
/// Used for states as well as for the unnormalized or indefinite operators
/// that appear in the witness constructions; state-level requirements are
/// checked by [`DensityMatrix::validate_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch {
                expected: data.nrows(),
                actual: data.ncols(),
            });
        }
        let n_qubits = log2_exact(data.nrows())?;
        Ok(Self { n_qubits, data })
    }

    /// Row-major real and imaginary parts; `im` may be empty for a real matrix.
    pub fn from_rows(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let dim = re.len();
        let ragged = |rows: &[Vec<f64>]| rows.iter().find(|r| r.len() != dim).map(|r| r.len());
        if let Some(actual) = ragged(re).or_else(|| ragged(im)) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual,
            });
        }
        if !im.is_empty() && im.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: im.len(),
            });
        }
        let data = DMatrix::from_fn(dim, dim, |r, c| {
            Complex64::new(re[r][c], im.get(r).map_or(0.0, |row| row[c]))
        });
        Self::from_matrix(data)
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            data: DMatrix::from_element(dim, dim, ZERO),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            data: DMatrix::identity(dim, dim),
        }
    }

    /// `I / 2^n`
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let mut m = Self::identity(n_qubits);
        let dim = m.dim() as f64;
        m.data.unscale_mut(dim);
        m
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[(row, col)] = value;
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            data: self.data.scale(factor),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            data: &self.data - &other.data,
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    /// Largest entrywise modulus difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |h_ij - conj(h_ji)|`
    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (self.data[(i, j)] - self.data[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Checks Hermiticity and unit trace, both at absolute tolerance `tol`.
    pub fn validate_state(&self, tol: f64) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidTrace(tr.re));
        }
        Ok(())
    }

    /// `<k| self |k>` (real part).
    pub fn expectation(&self, ket: &Ket) -> Result<f64> {
        if ket.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: ket.dim(),
            });
        }
        let v = ket.amplitudes();
        Ok(v.dotc(&(&self.data * v)).re)
    }

    /// The full (global) transpose.
    pub fn transpose(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            data: self.data.transpose(),
        }
    }
}

/// Tensor product with the left operand supplying the high-order bits.
pub trait Kron {
    fn kron(&self, other: &Self) -> Self;
}

impl Kron for Ket {
    fn kron(&self, other: &Self) -> Self {
        Ket {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }
}

impl Kron for DensityMatrix {
    fn kron(&self, other: &Self) -> Self {
        DensityMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            data: self.data.kronecker(&other.data),
        }
    }
}

/// Free-function form of [`Kron::kron`].
pub fn kron<T: Kron>(a: &T, b: &T) -> T {
    a.kron(b)
}

/// A nonempty proper subset of the qubits: one side of a bipartition.
///
/// Bit `k` of `mask` is set when qubit `k` belongs to the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n_qubits: usize,
    mask: u64,
}

impl Partition {
    pub fn new(n_qubits: usize, mask: u64) -> Result<Self> {
        let invalid = Error::InvalidPartition { n_qubits, mask };
        if !(2..=63).contains(&n_qubits) {
            return Err(invalid);
        }
        let full = (1u64 << n_qubits) - 1;
        if mask == 0 || mask & !full != 0 || mask == full {
            return Err(invalid);
        }
        Ok(Self { n_qubits, mask })
    }

    pub fn from_qubits(n_qubits: usize, qubits: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &q in qubits {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { n_qubits, index: q });
            }
            mask |= 1 << q;
        }
        Self::new(n_qubits, mask)
    }

    pub fn singleton(n_qubits: usize, qubit: usize) -> Result<Self> {
        Self::from_qubits(n_qubits, &[qubit])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, qubit: usize) -> bool {
        qubit < self.n_qubits && self.mask & (1 << qubit) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn qubits(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.contains(q)).collect()
    }

    pub fn complement(&self) -> Self {
        let full = (1u64 << self.n_qubits) - 1;
        Self {
            n_qubits: self.n_qubits,
            mask: full & !self.mask,
        }
    }

    /// Mask over matrix-index bits selecting the qubits of this set.
    pub fn index_mask(&self) -> usize {
        self.qubits()
            .into_iter()
            .fold(0usize, |m, q| m | 1 << bit_position(self.n_qubits, q))
    }

    /// Canonical member of `{self, complement}`: the smaller set, ties going to
    /// the set containing qubit 0.
    pub fn canonical(&self) -> Self {
        let c = self.complement();
        match self.len().cmp(&c.len()) {
            std::cmp::Ordering::Less => *self,
            std::cmp::Ordering::Greater => c,
            std::cmp::Ordering::Equal => {
                if self.contains(0) {
                    *self
                } else {
                    c
                }
            }
        }
    }

    /// One representative per bipartition (`2^(n-1) - 1` of them), ordered by
    /// size and then lexicographically by qubit list. Singletons come first.
    pub fn bipartitions(n_qubits: usize) -> Result<Vec<Self>> {
        if !(2..=63).contains(&n_qubits) {
            return Err(Error::OutOfRange(format!(
                "bipartitions need 2..=63 qubits, got {n_qubits}"
            )));
        }
        let full = (1u64 << n_qubits) - 1;
        let mut out: Vec<Self> = (1..full)
            .map(|mask| Self { n_qubits, mask })
            .filter(|p| p.canonical() == *p)
            .collect();
        out.sort_by_key(|p| (p.len(), p.qubits()));
        Ok(out)
    }
}

/// Report label of a qubit: `A`, `B`, ... for the first 26, `Q26`, ... beyond.
pub fn qubit_label(qubit: usize) -> String {
    if qubit < 26 {
        char::from(b'A' + qubit as u8).to_string()
    } else {
        format!("Q{qubit}")
    }
}

/// Inverse of [`qubit_label`]; also accepts 1-based `A1`, `A2`, ... names.
pub fn parse_qubit_label(label: &str) -> Option<usize> {
    let label = label.trim();
    let bytes = label.as_bytes();
    if bytes.len() == 1 && bytes[0].is_ascii_uppercase() {
        return Some((bytes[0] - b'A') as usize);
    }
    if let Some(rest) = label.strip_prefix('Q') {
        return rest.parse().ok();
    }
    if let Some(rest) = label.strip_prefix('A') {
        return rest
            .parse::<usize>()
            .ok()
            .filter(|&k| k >= 1)
            .map(|k| k - 1);
    }
    None
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.qubits().into_iter().map(qubit_label).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// Transposes the indices of the qubits in `s`: the entry at row
/// `(i_S, i_R)`, column `(j_S, j_R)` moves to row `(j_S, i_R)`, column `(i_S, j_R)`.
pub fn partial_transpose(rho: &DensityMatrix, s: &Partition) -> Result<DensityMatrix> {
    if s.n_qubits() != rho.n_qubits() {
        return Err(Error::InvalidPartition {
            n_qubits: rho.n_qubits(),
            mask: s.mask(),
        });
    }
    let m = s.index_mask();
    let dim = rho.dim();
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for j in 0..dim {
        for i in 0..dim {
            let row = (i & !m) | (j & m);
            let col = (j & !m) | (i & m);
            out[(row, col)] = rho.data[(i, j)];
        }
    }
    Ok(DensityMatrix {
        n_qubits: rho.n_qubits,
        data: out,
    })
}

fn check_hermitian(h: &DensityMatrix) -> Result<()> {
    let dev = h.hermiticity_deviation();
    if dev > HERMITIAN_TOL * h.max_abs_entry().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn eigenvalues(h: &DensityMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let sym = (&h.data + h.data.adjoint()).unscale(2.0);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    Ok(values)
}

pub fn min_eigenvalue(h: &DensityMatrix) -> Result<f64> {
    Ok(eigenvalues(h)?[0])
}

/// Positive-partial-transpose test: the minimum eigenvalue of `rho^{T_S}` is
/// at least `-tol / dim`.
pub fn is_ppt(rho: &DensityMatrix, s: &Partition, tol: f64) -> Result<bool> {
    let pt = partial_transpose(rho, s)?;
    Ok(min_eigenvalue(&pt)? >= -tol / rho.dim() as f64)
}

/// Scatters the bits of `value` into the index positions listed in
/// `positions` (most significant first).
#[inline]
fn scatter(value: usize, positions: &[usize]) -> usize {
    let len = positions.len();
    positions.iter().enumerate().fold(0usize, |acc, (t, &pos)| {
        acc | ((value >> (len - 1 - t)) & 1) << pos
    })
}

/// Gathers the index bits at `positions` into a compact value (first position
/// becomes the most significant bit).
#[inline]
fn gather(index: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .fold(0usize, |acc, &pos| (acc << 1) | ((index >> pos) & 1))
}

fn check_qubits(n_qubits: usize, qubits: &[usize]) -> Result<()> {
    let mut seen = 0u64;
    for &q in qubits {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange { n_qubits, index: q });
        }
        if seen & (1 << q) != 0 {
            return Err(Error::OutOfRange(format!("qubit {q} listed twice")));
        }
        seen |= 1 << q;
    }
    Ok(())
}

/// Reduced operator on `keep` (kept in the listed order) after tracing out
/// every other qubit.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    check_qubits(n, keep)?;
    let kept_pos: Vec<usize> = keep.iter().map(|&q| bit_position(n, q)).collect();
    let traced_pos: Vec<usize> = (0..n)
        .filter(|q| !keep.contains(q))
        .map(|q| bit_position(n, q))
        .collect();
    let kd = 1usize << keep.len();
    let td = 1usize << traced_pos.len();
    let mut out = DMatrix::from_element(kd, kd, ZERO);
    for t in 0..td {
        let base = scatter(t, &traced_pos);
        for j in 0..kd {
            let col = base | scatter(j, &kept_pos);
            for i in 0..kd {
                let row = base | scatter(i, &kept_pos);
                out[(i, j)] += rho.data[(row, col)];
            }
        }
    }
    Ok(DensityMatrix {
        n_qubits: keep.len(),
        data: out,
    })
}

/// Measures qubit `k` and keeps the outcome `phi`. Returns the normalized state
/// of the remaining qubits and the outcome probability.
pub fn project_qubit(rho: &DensityMatrix, k: usize, phi: &Ket) -> Result<(DensityMatrix, f64)> {
    let n = rho.n_qubits();
    if k >= n {
        return Err(Error::QubitOutOfRange {
            n_qubits: n,
            index: k,
        });
    }
    if phi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: phi.dim(),
        });
    }
    if !phi.is_normalized() {
        return Err(Error::NotNormalized(phi.norm_sqr()));
    }
    let pos = bit_position(n, k);
    let rest: Vec<usize> = (0..n)
        .filter(|&q| q != k)
        .map(|q| bit_position(n, q))
        .collect();
    let rd = 1usize << (n - 1);
    let a = phi.amplitudes();
    let mut out = DMatrix::from_element(rd, rd, ZERO);
    for j in 0..rd {
        let cj = scatter(j, &rest);
        for i in 0..rd {
            let ci = scatter(i, &rest);
            let mut acc = ZERO;
            for (x, ax) in a.iter().enumerate() {
                for (y, ay) in a.iter().enumerate() {
                    acc += ax.conj() * rho.data[(ci | x << pos, cj | y << pos)] * ay;
                }
            }
            out[(i, j)] = acc;
        }
    }
    let probability = out.trace().re;
    if probability < DEGENERATE_PROBABILITY {
        return Err(Error::DegenerateOutcome(probability));
    }
    out.unscale_mut(probability);
    Ok((
        DensityMatrix {
            n_qubits: n - 1,
            data: out,
        },
        probability,
    ))
}

fn check_permutation(n_qubits: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != n_qubits {
        return Err(Error::DimensionMismatch {
            expected: n_qubits,
            actual: perm.len(),
        });
    }
    check_qubits(n_qubits, perm)
}

/// Reorders qubits: input qubit `k` ends up at position `perm[k]`.
pub fn permute_qubits(rho: &DensityMatrix, perm: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    check_permutation(n, perm)?;
    let map = |i: usize| -> usize {
        (0..n).fold(0usize, |acc, k| {
            let bit = (i >> bit_position(n, k)) & 1;
            acc | bit << bit_position(n, perm[k])
        })
    };
    let dim = rho.dim();
    let targets: Vec<usize> = (0..dim).map(map).collect();
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for j in 0..dim {
        for i in 0..dim {
            out[(targets[i], targets[j])] = rho.data[(i, j)];
        }
    }
    Ok(DensityMatrix {
        n_qubits: n,
        data: out,
    })
}

/// Same contract as [`permute_qubits`], realized as a sequence of adjacent
/// qubit swaps (bubble sort of the destination labels).
pub fn permute_qubits_by_swaps(rho: &DensityMatrix, perm: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    check_permutation(n, perm)?;
    // dest[p] = destination of the qubit currently sitting at position p
    let mut dest = perm.to_vec();
    let mut data = rho.data.clone();
    let dim = rho.dim();
    loop {
        let mut swapped = false;
        for p in 0..n.saturating_sub(1) {
            if dest[p] > dest[p + 1] {
                let hi = bit_position(n, p);
                let lo = bit_position(n, p + 1);
                let swap_bits = |i: usize| -> usize {
                    let a = (i >> hi) & 1;
                    let b = (i >> lo) & 1;
                    if a == b {
                        i
                    } else {
                        i ^ (1 << hi) ^ (1 << lo)
                    }
                };
                let mut next = DMatrix::from_element(dim, dim, ZERO);
                for j in 0..dim {
                    let sj = swap_bits(j);
                    for i in 0..dim {
                        next[(swap_bits(i), sj)] = data[(i, j)];
                    }
                }
                data = next;
                dest.swap(p, p + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(DensityMatrix { n_qubits: n, data })
}

/// Conjugates `rho` by the local operator `op` acting on `targets` (the first
/// target is the most significant bit of `op`'s index): returns
/// `O rho O^dagger`. Zero entries of `op` are skipped.
pub fn apply_local(
    rho: &DensityMatrix,
    op: &DMatrix<Complex64>,
    targets: &[usize],
) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    check_qubits(n, targets)?;
    let od = 1usize << targets.len();
    if op.nrows() != od || op.ncols() != od {
        return Err(Error::DimensionMismatch {
            expected: od,
            actual: op.nrows(),
        });
    }
    let pos: Vec<usize> = targets.iter().map(|&q| bit_position(n, q)).collect();
    let tmask = scatter(od - 1, &pos);
    let dim = rho.dim();
    let nonzero: Vec<(usize, usize, Complex64)> = (0..od)
        .flat_map(|a| (0..od).map(move |b| (a, b)))
        .map(|(a, b)| (a, b, op[(a, b)]))
        .filter(|&(_, _, v)| v != ZERO)
        .collect();

    // rows: X = O rho
    let mut left = DMatrix::from_element(dim, dim, ZERO);
    for r in 0..dim {
        let sub = gather(r, &pos);
        let rest = r & !tmask;
        for &(a, b, v) in &nonzero {
            if b != sub {
                continue;
            }
            let r2 = rest | scatter(a, &pos);
            for c in 0..dim {
                left[(r2, c)] += v * rho.data[(r, c)];
            }
        }
    }
    // columns: Y = X O^dagger
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for c in 0..dim {
        let sub = gather(c, &pos);
        let rest = c & !tmask;
        for &(a, b, v) in &nonzero {
            if b != sub {
                continue;
            }
            let c2 = rest | scatter(a, &pos);
            let vc = v.conj();
            for r in 0..dim {
                out[(r, c2)] += left[(r, c)] * vc;
            }
        }
    }
    Ok(DensityMatrix {
        n_qubits: n,
        data: out,
    })
}

/// Random mixed state `G G^dagger / tr(G G^dagger)` with i.i.d. complex Gaussian `G`
/// of the given rank.
pub fn random_state<R: Rng + ?Sized>(n_qubits: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1usize << n_qubits;
    let rank = rank.clamp(1, dim);
    let g = DMatrix::from_fn(dim, rank, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut data = &g * g.adjoint();
    let tr = data.trace().re;
    data.unscale_mut(tr);
    DensityMatrix { n_qubits, data }
}
