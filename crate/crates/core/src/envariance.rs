//! Repeatability, envariance and probabilities from symmetry.
//!
//! Nothing here uses `p = |ψ|²` as an input. Equal Schmidt coefficients are
//! shown to be equiprobable by exhibiting, for every pair of branches, a swap
//! on the system that a unitary on the environment undoes. Unequal
//! commensurate weights are first fine-grained into equal ones by a
//! controlled copy from the environment into an ancilla, and outcome
//! probabilities are then counts of equiprobable fine branches.

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{check_unitary, tensor_product, PureState, SubsystemSet};
use crate::C64;

const CONSTRAINT_TOL: f64 = 1e-10;
const FIDELITY_TOL: f64 = 1e-9;
const SCHMIDT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepeatabilityVerdict {
    /// `⟨e_u|e_v⟩ = 1`: the environment learned nothing.
    UnsuccessfulCopy,
    /// `⟨u|v⟩ = 0`: any record, including a perfect one, is allowed.
    OrthogonalOk,
    /// `⟨u|v⟩ ≠ ⟨u|v⟩⟨e_u|e_v⟩`: impossible for a unitary copy.
    Violation,
}

/// Classify a pair of overlaps against `⟨u|v⟩ = ⟨u|v⟩⟨e_u|e_v⟩`.
pub fn repeatability_constraint(uv: C64, euv: C64) -> RepeatabilityVerdict {
    if (uv * (C64::new(1.0, 0.0) - euv)).norm() > CONSTRAINT_TOL {
        RepeatabilityVerdict::Violation
    } else if (euv - C64::new(1.0, 0.0)).norm() <= CONSTRAINT_TOL {
        RepeatabilityVerdict::UnsuccessfulCopy
    } else {
        RepeatabilityVerdict::OrthogonalOk
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopyOutcome {
    /// Both system states survive and leave distinguishable records.
    Record,
    /// Both system states survive and the records are identical.
    RecordFree,
    /// At least one input state of the system was disturbed.
    SystemPerturbed,
    Violation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopyReport {
    pub uv: C64,
    pub fidelity_u: f64,
    pub fidelity_v: f64,
    pub system_unperturbed: bool,
    /// `⟨e_u|e_v⟩`, only defined when the system is unperturbed.
    pub euv: Option<C64>,
    pub verdict: Option<RepeatabilityVerdict>,
    pub outcome: CopyOutcome,
}

impl CopyReport {
    /// A faithful repeatable record of two non-orthogonal states; unitarity
    /// forbids this.
    pub fn is_forbidden_copy(&self) -> bool {
        self.system_unperturbed && self.uv.norm() > 1e-6 && self.euv.is_some_and(|e| e.norm() < 1.0 - 1e-6)
    }
}

fn single(state: &PureState, what: &'static str) -> Result<()> {
    if state.num_subsystems() != 1 {
        return Err(Error::param(what, "expected a single-subsystem ket"));
    }
    Ok(())
}

/// Run `copier` on `|u⟩|e0⟩` and `|v⟩|e0⟩`, check the system is left alone and
/// extract the overlap of the records.
pub fn verify_copy_map(u: &PureState, v: &PureState, copier: &DMatrix<C64>, e0: &PureState) -> Result<CopyReport> {
    single(u, "u")?;
    single(v, "v")?;
    single(e0, "e0")?;
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    let joint = u.dim() * e0.dim();
    if copier.nrows() != joint {
        return Err(Error::DimensionMismatch { expected: joint, found: copier.nrows() });
    }
    check_unitary(copier)?;
    let both = SubsystemSet::range(0..2);
    let system = SubsystemSet::new([0])?;
    let run = |s: &PureState| -> Result<(PureState, f64)> {
        let out = tensor_product(&[s.clone(), e0.clone()])?.apply_unitary(copier, &both)?;
        let rho = out.partial_trace(&system)?;
        let a = s.amplitudes();
        let fid = (a.adjoint() * rho.matrix() * a)[(0, 0)].re;
        Ok((out, fid))
    };
    let (out_u, fidelity_u) = run(u)?;
    let (out_v, fidelity_v) = run(v)?;
    let uv = u.amplitudes().dotc(v.amplitudes());
    let system_unperturbed = fidelity_u >= 1.0 - FIDELITY_TOL && fidelity_v >= 1.0 - FIDELITY_TOL;
    if !system_unperturbed {
        return Ok(CopyReport {
            uv,
            fidelity_u,
            fidelity_v,
            system_unperturbed,
            euv: None,
            verdict: None,
            outcome: CopyOutcome::SystemPerturbed,
        });
    }
    // |e_s⟩ = (⟨s| ⊗ 1)|out_s⟩
    let record = |s: &PureState, out: &PureState| -> Result<DVector<C64>> {
        Ok(out.bipartite_matrix(&system)?.transpose() * s.amplitudes().conjugate())
    };
    let e_u = record(u, &out_u)?;
    let e_v = record(v, &out_v)?;
    let euv = e_u.dotc(&e_v);
    let verdict = repeatability_constraint(uv, euv);
    let outcome = match verdict {
        RepeatabilityVerdict::Violation => CopyOutcome::Violation,
        RepeatabilityVerdict::UnsuccessfulCopy => CopyOutcome::RecordFree,
        RepeatabilityVerdict::OrthogonalOk => CopyOutcome::Record,
    };
    Ok(CopyReport { uv, fidelity_u, fidelity_v, system_unperturbed, euv: Some(euv), verdict: Some(verdict), outcome })
}

/// `|Ψ⟩ = Σ_k c_k |a_k⟩|b_k⟩` across a bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtForm {
    /// Nonzero coefficients, descending.
    pub coefficients: Vec<f64>,
    /// Kets on the cut subsystems, in ascending subsystem order.
    pub left_basis: Vec<DVector<C64>>,
    /// Kets on the complement, in ascending subsystem order.
    pub right_basis: Vec<DVector<C64>>,
    pub cut: SubsystemSet,
    pub dims: Vec<usize>,
}

impl SchmidtForm {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self) -> Result<PureState> {
        let rows = self.left_basis.first().map_or(0, |v| v.len());
        let cols = self.right_basis.first().map_or(0, |v| v.len());
        let mut m = DMatrix::<C64>::zeros(rows, cols);
        for ((c, a), b) in self.coefficients.iter().zip(&self.left_basis).zip(&self.right_basis) {
            m += a * b.transpose() * C64::new(*c, 0.0);
        }
        PureState::from_bipartite_matrix(self.dims.clone(), &self.cut, &m)
    }
}

/// Schmidt decomposition by SVD of the amplitude matrix.
pub fn schmidt(state: &PureState, cut: &SubsystemSet) -> Result<SchmidtForm> {
    if cut.is_empty() || cut.len() >= state.num_subsystems() {
        return Err(Error::param("cut", "must be a proper nonempty subset of the subsystems"));
    }
    let m = state.bipartite_matrix(cut)?;
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut form = SchmidtForm {
        coefficients: Vec::new(),
        left_basis: Vec::new(),
        right_basis: Vec::new(),
        cut: cut.clone(),
        dims: state.dims().to_vec(),
    };
    for k in order {
        let c = svd.singular_values[k];
        if c <= SCHMIDT_TOL {
            continue;
        }
        form.coefficients.push(c);
        form.left_basis.push(u.column(k).into_owned());
        form.right_basis.push(v_t.row(k).transpose());
    }
    let err = (form.reconstruct()?.amplitudes() - state.amplitudes()).norm();
    if err > 1e-9 {
        return Err(Error::param("state", format!("Schmidt reconstruction error {err:.3e}")));
    }
    Ok(form)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvarianceReport {
    pub envariant: bool,
    /// Unitary on the complement of the cut that undoes `u_s`.
    pub witness: Option<DMatrix<C64>>,
    /// `‖(1⊗u_e)(u_s⊗1)|Ψ⟩ − e^{iα}|Ψ⟩‖` for the best phase, when a witness exists.
    pub residual: Option<f64>,
}

/// Look for `u_e` with `(u_s ⊗ u_e)|Ψ⟩ = e^{iα}|Ψ⟩`.
///
/// Candidates are the Schmidt-structured unitaries: `u_s` must map the
/// Schmidt support onto itself with a matrix `T_lk = ⟨a_l|u_s|a_k⟩` that only
/// mixes branches of equal coefficient (diagonal phases, permutations and
/// rotations inside degenerate blocks). Then `u_e = Σ_l |b_l⟩⟨β_l|` with
/// `|β_l⟩ = Σ_k T_lk |b_k⟩`, extended by the identity off the support. Any
/// `u_s` outside this class changes `ρ_S` and cannot be envariant.
pub fn is_envariant(state: &PureState, u_s: &DMatrix<C64>, cut: &SubsystemSet) -> Result<EnvarianceReport> {
    envariance_in(state, &schmidt(state, cut)?, u_s)
}

fn envariance_in(state: &PureState, form: &SchmidtForm, u_s: &DMatrix<C64>) -> Result<EnvarianceReport> {
    let cut = &form.cut;
    let cut_dim = form.left_basis[0].len();
    let env_dim = form.right_basis[0].len();
    if u_s.nrows() != cut_dim || u_s.ncols() != cut_dim {
        return Err(Error::DimensionMismatch { expected: cut_dim, found: u_s.nrows() });
    }
    check_unitary(u_s)?;
    let r = form.rank();
    let no = EnvarianceReport { envariant: false, witness: None, residual: None };

    let mut t = DMatrix::<C64>::zeros(r, r);
    for k in 0..r {
        let image = u_s * &form.left_basis[k];
        let mut rest = image.clone();
        for l in 0..r {
            let amp = form.left_basis[l].dotc(&image);
            t[(l, k)] = amp;
            rest -= &form.left_basis[l] * amp;
        }
        if rest.norm() > FIDELITY_TOL {
            return Ok(no);
        }
    }
    for l in 0..r {
        for k in 0..r {
            if t[(l, k)].norm() * (form.coefficients[l] - form.coefficients[k]).abs() > FIDELITY_TOL {
                return Ok(no);
            }
        }
    }

    let mut witness = DMatrix::<C64>::identity(env_dim, env_dim);
    for b in &form.right_basis {
        witness -= b * b.adjoint();
    }
    for l in 0..r {
        let mut beta = DVector::<C64>::zeros(env_dim);
        for k in 0..r {
            beta += &form.right_basis[k] * t[(l, k)];
        }
        witness += &form.right_basis[l] * beta.adjoint();
    }

    let complement = cut.complement(state.num_subsystems());
    let restored = state.apply_unitary(u_s, cut)?.apply_unitary(&witness, &complement)?;
    let phase = state.amplitudes().dotc(restored.amplitudes());
    let aligned = if phase.norm() > 0.0 { phase / phase.norm() } else { C64::new(1.0, 0.0) };
    let residual = (restored.amplitudes() - state.amplitudes() * aligned).norm();
    if residual > FIDELITY_TOL {
        return Ok(no);
    }
    Ok(EnvarianceReport { envariant: true, witness: Some(witness), residual: Some(residual) })
}

/// Swap `|a⟩ ↔ |b⟩`, identity on their orthogonal complement.
pub fn swap_unitary(a: &DVector<C64>, b: &DVector<C64>) -> DMatrix<C64> {
    let dim = a.len();
    DMatrix::<C64>::identity(dim, dim) - a * a.adjoint() - b * b.adjoint() + a * b.adjoint() + b * a.adjoint()
}

/// Uniform probabilities over the Schmidt branches, established by checking
/// that neighbouring branches are envariantly swappable. Adjacent swaps
/// generate every permutation, so all branches share one probability and
/// normalization fixes it at `1/n`.
pub fn equiprobability(state: &PureState, cut: &SubsystemSet) -> Result<Vec<f64>> {
    let form = schmidt(state, cut)?;
    let (max, min) = (form.coefficients[0], form.coefficients[form.rank() - 1]);
    if max - min > SCHMIDT_TOL {
        return Err(Error::NotEquiprobable);
    }
    let r = form.rank();
    for k in 1..r {
        let swap = swap_unitary(&form.left_basis[k - 1], &form.left_basis[k]);
        if !envariance_in(state, &form, &swap)?.envariant {
            return Err(Error::NotEquiprobable);
        }
    }
    Ok(vec![1.0 / r as f64; r])
}

/// Integer weights `m_k / M` for finegraining, with `Σ m_k = M`. Numerators
/// need not be coprime with the denominator; `(2, 2)/4` and `(1, 1)/2` are
/// different finegrainings of the same probabilities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalAmplitudeSpec {
    numerators: Vec<u64>,
    denominator: u64,
}

impl RationalAmplitudeSpec {
    pub fn new(numerators: Vec<u64>) -> Result<Self> {
        if numerators.is_empty() {
            return Err(Error::Empty("numerators"));
        }
        if numerators.contains(&0) {
            return Err(Error::param("numerators", "must be positive"));
        }
        let denominator = numerators.iter().sum();
        Ok(RationalAmplitudeSpec { numerators, denominator })
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn n_branches(&self) -> usize {
        self.numerators.len()
    }

    /// `sqrt(m_k / M)`.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.numerators.iter().map(|&m| (m as f64 / self.denominator as f64).sqrt()).collect()
    }

    /// Labels `(k, r)` of the fine branches, `r < m_k`.
    pub fn fine_branches(&self) -> Vec<(usize, u64)> {
        self.numerators.iter().enumerate().flat_map(|(k, &m)| (0..m).map(move |r| (k, r))).collect()
    }

    /// Outcome probabilities as counts of equiprobable fine branches.
    pub fn counted_probabilities(&self) -> Vec<Ratio<u64>> {
        let fine = self.fine_branches();
        let total = fine.len() as u64;
        (0..self.n_branches())
            .map(|k| Ratio::new(fine.iter().filter(|(b, _)| *b == k).count() as u64, total))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finegrained {
    /// State on `[S, E, C]` after the controlled copy `E → C`.
    pub state: PureState,
    pub probabilities: Vec<Ratio<u64>>,
    /// Coefficients of the `(SC)|E` Schmidt form; all `1/sqrt(M)`.
    pub schmidt_coefficients: Vec<f64>,
}

/// Canonical fine-grainable kets: system `|k⟩` in dimension `n`, and the
/// environment record of branch `k` the uniform superposition of its own
/// block of `m_k` basis states in dimension `M`.
pub fn canonical_kets(spec: &RationalAmplitudeSpec) -> (Vec<DVector<C64>>, Vec<DVector<C64>>) {
    let n = spec.n_branches();
    let big_m = spec.denominator() as usize;
    let mut offset = 0usize;
    let mut system = Vec::with_capacity(n);
    let mut env = Vec::with_capacity(n);
    for (k, &m) in spec.numerators().iter().enumerate() {
        let mut s = DVector::zeros(n);
        s[k] = C64::new(1.0, 0.0);
        system.push(s);
        let mut e = DVector::zeros(big_m);
        let amp = C64::new(1.0 / (m as f64).sqrt(), 0.0);
        for j in offset..offset + m as usize {
            e[j] = amp;
        }
        env.push(e);
        offset += m as usize;
    }
    (system, env)
}

/// Extend `Σ_k sqrt(m_k/M) |s_k⟩|e_k⟩` with an ancilla and split every branch
/// into `m_k` equal-coefficient fine branches.
///
/// Each `|e_k⟩` must be a uniform superposition of `m_k` computational basis
/// states of the environment, with disjoint supports. The environment then
/// acts on the ancilla as a generalized controlled-not, `|j⟩|0'⟩ → |j⟩|r'⟩`
/// where `r` is the position of `j` inside its branch's support. The system is
/// never touched.
pub fn finegrain(
    spec: &RationalAmplitudeSpec,
    system_kets: &[DVector<C64>],
    env_kets: &[DVector<C64>],
) -> Result<Finegrained> {
    let n = spec.n_branches();
    if system_kets.len() != n || env_kets.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: system_kets.len().min(env_kets.len()) });
    }
    let ds = system_kets[0].len();
    let de = env_kets[0].len();
    if system_kets.iter().any(|s| s.len() != ds) || env_kets.iter().any(|e| e.len() != de) {
        return Err(Error::param("kets", "kets of one party must share a dimension"));
    }
    for k in 0..n {
        for l in 0..n {
            let target = if k == l { 1.0 } else { 0.0 };
            if (system_kets[k].dotc(&system_kets[l]) - C64::new(target, 0.0)).norm() > SCHMIDT_TOL {
                return Err(Error::param("system_kets", "must be orthonormal"));
            }
        }
    }
    let big_m = spec.denominator();
    if (de as u64) < big_m {
        return Err(Error::NotFineGrainable(format!("environment dimension {de} is below M = {big_m}")));
    }

    // support of every record and the position of each basis state within it
    let mut position = vec![None::<usize>; de];
    for (k, (e, &m)) in env_kets.iter().zip(spec.numerators()).enumerate() {
        let support: Vec<usize> = (0..de).filter(|&j| e[j].norm() > 1e-12).collect();
        if support.len() as u64 != m {
            return Err(Error::NotFineGrainable(format!(
                "record of branch {k} spans {} basis states, needs {m}",
                support.len()
            )));
        }
        for (r, &j) in support.iter().enumerate() {
            if (e[j].norm_sqr() - 1.0 / m as f64).abs() > SCHMIDT_TOL {
                return Err(Error::NotFineGrainable(format!("record of branch {k} is not uniform")));
            }
            if position[j].is_some() {
                return Err(Error::NotFineGrainable(format!("records overlap on basis state {j}")));
            }
            position[j] = Some(r);
        }
    }

    let dc = *spec.numerators().iter().max().expect("nonempty") as usize;
    let dims = vec![ds, de, dc];
    let total = ds * de * dc;
    let mut amps = DVector::<C64>::zeros(total);
    let mut ancilla = DVector::<C64>::zeros(dc);
    ancilla[0] = C64::new(1.0, 0.0);
    for ((s, e), a) in system_kets.iter().zip(env_kets).zip(spec.amplitudes()) {
        amps += s.kronecker(e).kronecker(&ancilla) * C64::new(a, 0.0);
    }
    let before = PureState::new(dims, amps)?;

    let mut copy = DMatrix::<C64>::zeros(de * dc, de * dc);
    for j in 0..de {
        let shift = position[j].unwrap_or(0);
        for c in 0..dc {
            copy[(j * dc + (c + shift) % dc, j * dc + c)] = C64::new(1.0, 0.0);
        }
    }
    let after = before.apply_unitary(&copy, &SubsystemSet::new([1, 2])?)?;

    let sc = SubsystemSet::new([0, 2])?;
    let form = schmidt(&after, &sc)?;
    let expected = 1.0 / (big_m as f64).sqrt();
    if form.rank() as u64 != big_m || form.coefficients.iter().any(|c| (c - expected).abs() > SCHMIDT_TOL) {
        return Err(Error::NotFineGrainable(format!(
            "extension has {} Schmidt coefficients instead of {big_m} equal ones",
            form.rank()
        )));
    }
    let fine = equiprobability(&after, &sc)?;
    debug_assert_eq!(fine.len() as u64, big_m);
    Ok(Finegrained { state: after, probabilities: spec.counted_probabilities(), schmidt_coefficients: form.coefficients })
}

/// Best rational approximation of `x ∈ [0, 1]` within `tol` by continued
/// fraction convergents with denominator at most `max_den`.
pub fn continued_fraction_approx(x: f64, max_den: u64, tol: f64) -> Option<Ratio<u64>> {
    let (mut h_prev, mut h) = (0u64, 1u64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > u64::MAX as f64 / 2.0 {
            return None;
        }
        let a = a as u64;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > max_den {
            return None;
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
        if (x - h as f64 / k as f64).abs() <= tol {
            return Some(Ratio::new(h, k));
        }
        let frac = rest - a as f64;
        if frac <= 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornResult {
    pub probabilities: Vec<f64>,
    #[serde(serialize_with = "ser_ratios")]
    pub rationals: Vec<Ratio<u64>>,
    /// Common denominator used for finegraining.
    pub denominator: u64,
    /// All `|ψ_k|²` were recognized as rationals with a denominator that fits.
    pub exact: bool,
    /// The finegraining was executed on a dense statevector.
    pub executed_densely: bool,
}

fn ser_ratios<S: serde::Serializer>(r: &[Ratio<u64>], ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(r.iter().map(|x| format!("{}/{}", x.numer(), x.denom())))
}

/// Largest dense extension `n · M · max m_k` that is executed rather than counted.
const DENSE_FINEGRAIN_LIMIT: u64 = 1 << 10;

/// Probabilities of the branches of `Σ ψ_k |k⟩|ε_k⟩` by finegraining.
///
/// Branch weights are approximated by integers `m_k / M` with `M ≤
/// max_denominator`: exactly when every weight is a rational the continued
/// fraction recognizes and their common denominator fits, otherwise by
/// largest-remainder rounding at `M = max_denominator` (L∞ error below
/// `1/max_denominator`). Branches with `m_k = 0` get probability zero.
pub fn born_via_envariance(amplitudes: &[C64], max_denominator: u64) -> Result<BornResult> {
    let n = amplitudes.len();
    if n == 0 {
        return Err(Error::Empty("amplitudes"));
    }
    if max_denominator < n as u64 {
        return Err(Error::param("max_denominator", format!("{max_denominator} is below the branch count {n}")));
    }
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    let weights: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr() / (norm * norm)).collect();

    let recognized: Option<Vec<Ratio<u64>>> =
        weights.iter().map(|&w| continued_fraction_approx(w, max_denominator, 1e-12)).collect();
    let exact_counts = recognized.and_then(|ratios| {
        let mut lcm = 1u64;
        for r in &ratios {
            lcm = lcm / gcd(lcm, *r.denom()) * r.denom();
            if lcm > max_denominator {
                return None;
            }
        }
        let counts: Vec<u64> = ratios.iter().map(|r| r.numer() * (lcm / r.denom())).collect();
        (counts.iter().sum::<u64>() == lcm).then_some((counts, lcm))
    });
    let exact = exact_counts.is_some();
    let (counts, big_m) = exact_counts.unwrap_or_else(|| largest_remainder(&weights, max_denominator));

    let live: Vec<usize> = (0..n).filter(|&k| counts[k] > 0).collect();
    let spec = RationalAmplitudeSpec::new(live.iter().map(|&k| counts[k]).collect())?;
    let max_m = spec.numerators().iter().copied().max().unwrap_or(1);
    let executed_densely = live.len() as u64 * big_m * max_m <= DENSE_FINEGRAIN_LIMIT;
    let live_probs = if executed_densely {
        let (sys, env) = canonical_kets(&spec);
        finegrain(&spec, &sys, &env)?.probabilities
    } else {
        spec.counted_probabilities()
    };
    let mut rationals = vec![Ratio::new(0, 1); n];
    for (p, &k) in live_probs.into_iter().zip(&live) {
        rationals[k] = p;
    }
    let probabilities = rationals.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect();
    Ok(BornResult { probabilities, rationals, denominator: big_m, exact, executed_densely })
}

fn largest_remainder(weights: &[f64], total: u64) -> (Vec<u64>, u64) {
    let scaled: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|s| s.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (scaled[b] - scaled[b].floor()).total_cmp(&(scaled[a] - scaled[a].floor())).then(a.cmp(&b)));
    for &k in order.iter().take(total.saturating_sub(assigned) as usize) {
        counts[k] += 1;
    }
    (counts, total)
}
