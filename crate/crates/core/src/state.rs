//! Dense statevectors and density operators over labeled registers.
//!
//! Index convention: subsystem 0 is the most significant digit of the
//! amplitude index, so `|a⟩ ⊗ |b⟩` has amplitude `a_i b_j` at `i * dim_b + j`
//! and `|10⟩` means subsystem 0 is in `|1⟩`. Every module uses this order.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::entropy::{hermitian_eigenvalues, spectrum_entropy};
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use crate::C64;

/// Default cap on the number of qubits (log2 of the total dimension) a dense
/// object may have.
pub const DEFAULT_DENSE_LIMIT: usize = 26;

const NORM_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

pub(crate) fn qubit_count(dim: usize) -> usize {
    (usize::BITS - dim.saturating_sub(1).leading_zeros()) as usize
}

fn check_dense(dims: &[usize], limit: usize) -> Result<usize> {
    let mut total: usize = 1;
    for &d in dims {
        if d == 0 {
            return Err(Error::param("dims", "subsystem dimension must be positive"));
        }
        total = total.checked_mul(d).ok_or(Error::DenseLimit { qubits: usize::MAX, limit })?;
    }
    let qubits = qubit_count(total);
    if qubits > limit {
        return Err(Error::DenseLimit { qubits, limit });
    }
    Ok(total)
}

/// An ordered set of subsystem positions, stored ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SubsystemSet(Vec<usize>);

impl SubsystemSet {
    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSubsystem(w[0]));
        }
        Ok(SubsystemSet(v))
    }

    pub fn empty() -> Self {
        SubsystemSet(Vec::new())
    }

    pub fn range(range: std::ops::Range<usize>) -> Self {
        SubsystemSet(range.collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn check(&self, count: usize) -> Result<()> {
        match self.0.last() {
            Some(&index) if index >= count => Err(Error::SubsystemOutOfRange { index, count }),
            _ => Ok(()),
        }
    }

    /// Positions in `0..count` not in the set.
    pub fn complement(&self, count: usize) -> SubsystemSet {
        SubsystemSet((0..count).filter(|i| !self.contains(*i)).collect())
    }
}

/// Maps every full index to `(row, col)` where the row enumerates the digits
/// of `rows` and the column the digits of the remaining subsystems.
struct Split {
    row_dim: usize,
    col_dim: usize,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
}

impl Split {
    fn new(dims: &[usize], rows: &SubsystemSet) -> Split {
        let total: usize = dims.iter().product();
        let row_dim: usize = rows.indices().iter().map(|&i| dims[i]).product();
        let col_dim = total / row_dim;
        let mut row_of = vec![0usize; total];
        let mut col_of = vec![0usize; total];
        let mut digits = vec![0usize; dims.len()];
        for idx in 0..total {
            let (mut r, mut c) = (0usize, 0usize);
            for (pos, &d) in dims.iter().enumerate() {
                if rows.contains(pos) {
                    r = r * d + digits[pos];
                } else {
                    c = c * d + digits[pos];
                }
            }
            row_of[idx] = r;
            col_of[idx] = c;
            // increment little digit last
            for pos in (0..dims.len()).rev() {
                digits[pos] += 1;
                if digits[pos] < dims[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
        Split { row_dim, col_dim, row_of, col_of }
    }

    fn matrix(&self, amps: &DVector<C64>) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.row_dim, self.col_dim);
        for (idx, a) in amps.iter().enumerate() {
            m[(self.row_of[idx], self.col_of[idx])] = *a;
        }
        m
    }
}

/// A normalized pure state on a register of subsystems with given dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: DVector<C64>,
}

impl PureState {
    /// Validates length and norm (within `1e-10`), then renormalizes exactly.
    pub fn new(dims: Vec<usize>, amplitudes: DVector<C64>) -> Result<Self> {
        Self::with_limit(dims, amplitudes, DEFAULT_DENSE_LIMIT)
    }

    pub fn with_limit(dims: Vec<usize>, amplitudes: DVector<C64>, limit: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Empty("subsystem dimensions"));
        }
        let total = check_dense(&dims, limit)?;
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch { expected: total, found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState { dims, amplitudes: amplitudes / C64::new(norm, 0.0) })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn from_unnormalized(dims: Vec<usize>, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(dims, amplitudes / C64::new(norm, 0.0))
    }

    /// A register of qubits.
    pub fn qubits(num: usize, amplitudes: Vec<C64>) -> Result<Self> {
        Self::new(vec![2; num], DVector::from_vec(amplitudes))
    }

    /// Single computational basis state.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = check_dense(&dims, DEFAULT_DENSE_LIMIT)?;
        if index >= total {
            return Err(Error::DimensionMismatch { expected: total, found: index });
        }
        let mut amps = DVector::zeros(total);
        amps[index] = C64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Apply `u` to the joint space of `targets` (ordered ascending, first
    /// target most significant).
    pub fn apply_unitary(&self, u: &DMatrix<C64>, targets: &SubsystemSet) -> Result<PureState> {
        targets.check(self.num_subsystems())?;
        if targets.is_empty() {
            return Err(Error::Empty("unitary targets"));
        }
        let joint: usize = targets.indices().iter().map(|&i| self.dims[i]).product();
        if u.nrows() != joint || u.ncols() != joint {
            return Err(Error::DimensionMismatch { expected: joint, found: u.nrows() });
        }
        check_unitary(u)?;
        let split = Split::new(&self.dims, targets);
        let m = split.matrix(&self.amplitudes);
        let out = u * m;
        let mut amps = DVector::zeros(self.dim());
        for idx in 0..self.dim() {
            amps[idx] = out[(split.row_of[idx], split.col_of[idx])];
        }
        Ok(PureState { dims: self.dims.clone(), amplitudes: amps })
    }

    /// `ρ_keep = Tr_rest |ψ⟩⟨ψ|`.
    pub fn partial_trace(&self, keep: &SubsystemSet) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::Empty("kept subsystems"));
        }
        keep.check(self.num_subsystems())?;
        let split = Split::new(&self.dims, keep);
        let m = split.matrix(&self.amplitudes);
        let rho = &m * m.adjoint();
        let dims = keep.indices().iter().map(|&i| self.dims[i]).collect();
        Ok(DensityOperator::from_raw(dims, rho))
    }

    /// Entropy of the reduced state on `part`, computed on whichever side of
    /// the bipartition is smaller. An empty or full `part` has zero entropy.
    pub fn subsystem_entropy(&self, part: &SubsystemSet) -> Result<f64> {
        part.check(self.num_subsystems())?;
        let rest = part.complement(self.num_subsystems());
        if part.is_empty() || rest.is_empty() {
            return Ok(0.0);
        }
        let dim_of = |s: &SubsystemSet| -> usize { s.indices().iter().map(|&i| self.dims[i]).product() };
        let side = if dim_of(part) <= dim_of(&rest) { part } else { &rest };
        let split = Split::new(&self.dims, side);
        let m = split.matrix(&self.amplitudes);
        let rho = &m * m.adjoint();
        spectrum_entropy(&hermitian_eigenvalues(&rho))
    }

    /// Amplitudes as a matrix whose rows enumerate `rows` and whose columns
    /// enumerate the remaining subsystems, both in ascending position order.
    pub fn bipartite_matrix(&self, rows: &SubsystemSet) -> Result<DMatrix<C64>> {
        rows.check(self.num_subsystems())?;
        Ok(Split::new(&self.dims, rows).matrix(&self.amplitudes))
    }

    /// Inverse of [`PureState::bipartite_matrix`].
    pub fn from_bipartite_matrix(dims: Vec<usize>, rows: &SubsystemSet, matrix: &DMatrix<C64>) -> Result<Self> {
        let total = check_dense(&dims, DEFAULT_DENSE_LIMIT)?;
        rows.check(dims.len())?;
        let split = Split::new(&dims, rows);
        if matrix.nrows() != split.row_dim || matrix.ncols() != split.col_dim {
            return Err(Error::DimensionMismatch { expected: split.row_dim * split.col_dim, found: matrix.len() });
        }
        let amps = DVector::from_fn(total, |idx, _| matrix[(split.row_of[idx], split.col_of[idx])]);
        PureState::new(dims, amps)
    }
}

/// Kronecker product of the parts, with subsystem labels concatenated.
pub fn tensor_product(parts: &[PureState]) -> Result<PureState> {
    let (first, rest) = parts.split_first().ok_or(Error::Empty("tensor product factors"))?;
    let mut dims = first.dims.clone();
    let mut amps = first.amplitudes.clone();
    for p in rest {
        dims.extend_from_slice(&p.dims);
        check_dense(&dims, DEFAULT_DENSE_LIMIT)?;
        amps = amps.kronecker(&p.amplitudes);
    }
    PureState::new(dims, amps)
}

/// `⟨a|b⟩`.
pub fn overlap(a: &PureState, b: &PureState) -> Result<C64> {
    if a.dims != b.dims {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// Haar-random pure state on `num_qubits` qubits: a vector of i.i.d. complex
/// normals, normalized. Deterministic per seed.
pub fn haar_random_state(num_qubits: usize, seed: u64) -> Result<PureState> {
    haar_random_state_with_limit(num_qubits, seed, DEFAULT_DENSE_LIMIT)
}

pub fn haar_random_state_with_limit(num_qubits: usize, seed: u64, limit: usize) -> Result<PureState> {
    if num_qubits == 0 {
        return Err(Error::param("num_qubits", "must be at least 1"));
    }
    let dims = vec![2; num_qubits];
    let total = check_dense(&dims, limit)?;
    let mut rng = rng_from_seed(seed);
    let amps = DVector::from_fn(total, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    PureState::from_unnormalized(dims, amps)
}

pub(crate) fn unitary_deviation(u: &DMatrix<C64>) -> f64 {
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn check_unitary(u: &DMatrix<C64>) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), found: u.ncols() });
    }
    let dev = unitary_deviation(u);
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

/// A density operator over a register; Hermitian with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity and trace (within `1e-10`) and positivity
    /// (eigenvalues ≥ `-1e-10`).
    pub fn from_matrix(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        let total = check_dense(&dims, DEFAULT_DENSE_LIMIT)?;
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::DimensionMismatch { expected: total, found: matrix.nrows() });
        }
        let herm = (&matrix - matrix.adjoint()).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        if herm > 1e-10 {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("trace is {tr}")));
        }
        let rho = Self::from_raw(dims, matrix);
        if let Some(&min) = rho.eigenvalues().last() {
            if min < crate::entropy::EIGENVALUE_FLOOR {
                return Err(Error::NegativeEigenvalue(min));
            }
        }
        Ok(rho)
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = &state.amplitudes;
        Self::from_raw(state.dims.clone(), v * v.adjoint())
    }

    /// Hermitize and rescale to unit trace without validation.
    pub(crate) fn from_raw(dims: Vec<usize>, matrix: DMatrix<C64>) -> Self {
        let mut m = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let tr = m.trace().re;
        if tr > 0.0 {
            m /= C64::new(tr, 0.0);
        }
        DensityOperator { dims, matrix: m }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Eigenvalues sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn partial_trace(&self, keep: &SubsystemSet) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::Empty("kept subsystems"));
        }
        keep.check(self.dims.len())?;
        let split = Split::new(&self.dims, keep);
        let mut out = DMatrix::zeros(split.row_dim, split.row_dim);
        let total = self.dim();
        for i in 0..total {
            for j in 0..total {
                if split.col_of[i] == split.col_of[j] {
                    out[(split.row_of[i], split.row_of[j])] += self.matrix[(i, j)];
                }
            }
        }
        let dims = keep.indices().iter().map(|&i| self.dims[i]).collect();
        Ok(DensityOperator::from_raw(dims, out))
    }
}

/// Partial trace of either a pure state or a density operator.
pub trait PartialTrace {
    fn partial_trace(&self, keep: &SubsystemSet) -> Result<DensityOperator>;
}

impl PartialTrace for PureState {
    fn partial_trace(&self, keep: &SubsystemSet) -> Result<DensityOperator> {
        PureState::partial_trace(self, keep)
    }
}

impl PartialTrace for DensityOperator {
    fn partial_trace(&self, keep: &SubsystemSet) -> Result<DensityOperator> {
        DensityOperator::partial_trace(self, keep)
    }
}

/// Free-function form used by code that is generic over the input kind.
pub fn partial_trace<T: PartialTrace>(state: &T, keep: &SubsystemSet) -> Result<DensityOperator> {
    state.partial_trace(keep)
}
