//! Mutual information between the system and environment fragments.
//!
//! The reduced state of any part of a branch state is computed from two
//! `n × n` matrices: the Gram matrix `G_kk' = ⟨K_k|K_k'⟩` of the kept branch
//! vectors and `A_kk' = ψ_k ψ_k'* ⟨D_k'|D_k⟩` built from the discarded ones.
//! `ρ_kept = V A V†` with `V†V = G`, so its nonzero spectrum is the spectrum
//! of `G^½ A G^½`.

mod pip;
mod shannon;

pub use pip::{haar_pip, pip_curve, redundancy, redundancy_from_curve, PipCurve, PipPoint, RedundancyResult};
pub use shannon::{
    redundancy_ridge, shannon_mi_observable, shannon_mi_observable_sampled, system_shannon_entropy,
    MeasurementScheme, RidgeOptions, RidgeRow, OUTCOME_ENUMERATION_LIMIT,
};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::branch::BranchState;
use crate::entropy::{clip_spectrum, hermitian_eigenvalues, spectrum_entropy};
use crate::error::{Error, Result};
use crate::state::{PureState, SubsystemSet};
use crate::C64;

/// A fragment of an `n_env`-qubit environment, indexed `0..n_env`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FragmentSpec {
    #[serde(serialize_with = "ser_indices")]
    indices: SubsystemSet,
    n_env: usize,
}

fn ser_indices<S: serde::Serializer>(s: &SubsystemSet, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(s.indices())
}

impl FragmentSpec {
    pub fn new<I: IntoIterator<Item = usize>>(indices: I, n_env: usize) -> Result<Self> {
        let indices = SubsystemSet::new(indices)?;
        indices.check(n_env)?;
        Ok(FragmentSpec { indices, n_env })
    }

    pub fn empty(n_env: usize) -> Self {
        FragmentSpec { indices: SubsystemSet::empty(), n_env }
    }

    pub fn full(n_env: usize) -> Self {
        FragmentSpec { indices: SubsystemSet::range(0..n_env), n_env }
    }

    pub fn indices(&self) -> &SubsystemSet {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn n_env(&self) -> usize {
        self.n_env
    }

    /// `f = |F| / N`.
    pub fn fraction(&self) -> f64 {
        if self.n_env == 0 {
            0.0
        } else {
            self.len() as f64 / self.n_env as f64
        }
    }

    /// `E \ F`.
    pub fn complement(&self) -> FragmentSpec {
        FragmentSpec { indices: self.indices.complement(self.n_env), n_env: self.n_env }
    }

    fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n_env];
        for &j in self.indices.indices() {
            m[j] = true;
        }
        m
    }

    fn check_against(&self, state: &BranchState) -> Result<()> {
        if self.n_env != state.n_env() {
            return Err(Error::DimensionMismatch { expected: state.n_env(), found: self.n_env });
        }
        Ok(())
    }
}

/// Per-qubit branch overlaps `⟨e_k^(j)|e_k'^(j)⟩`, cached for repeated
/// fragment queries.
pub(crate) struct OverlapTable {
    n: usize,
    n_env: usize,
    table: Vec<C64>,
}

impl OverlapTable {
    pub(crate) fn new(state: &BranchState) -> Self {
        let (n, n_env) = (state.n_branches(), state.n_env());
        let mut table = Vec::with_capacity(n * n * n_env);
        for k in 0..n {
            for k2 in 0..n {
                for j in 0..n_env {
                    table.push(state.qubit_overlap(k, k2, j));
                }
            }
        }
        OverlapTable { n, n_env, table }
    }

    #[inline]
    fn get(&self, k: usize, k2: usize, j: usize) -> C64 {
        self.table[(k * self.n + k2) * self.n_env + j]
    }

    /// `(Π_{j∈F} ⟨e_k|e_k'⟩, Π_{j∉F} ⟨e_k|e_k'⟩)`.
    pub(crate) fn split_products(&self, k: usize, k2: usize, in_fragment: &[bool]) -> (C64, C64) {
        let one = C64::new(1.0, 0.0);
        let (mut inside, mut outside) = (one, one);
        for (j, &inf) in in_fragment.iter().enumerate() {
            if inf {
                inside *= self.get(k, k2, j);
            } else {
                outside *= self.get(k, k2, j);
            }
        }
        (inside, outside)
    }
}

/// Evaluates the three entropies of `I(S:F)` for many fragments of one state.
pub(crate) struct BranchEntropies<'a> {
    state: &'a BranchState,
    table: OverlapTable,
}

impl<'a> BranchEntropies<'a> {
    pub(crate) fn new(state: &'a BranchState) -> Self {
        BranchEntropies { state, table: OverlapTable::new(state) }
    }

    pub(crate) fn spectrum(&self, keep_system: bool, in_fragment: &[bool]) -> Result<Vec<f64>> {
        let st = self.state;
        let n = st.n_branches();
        let psi = st.amplitudes();
        let ptr = st.pointers();
        let mut gram = DMatrix::<C64>::zeros(n, n);
        let mut weights = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            for k2 in 0..n {
                let same_pointer = ptr[k] == ptr[k2];
                // ⟨K_k|K_k'⟩ and ⟨D_k|D_k'⟩
                let (mut kept, mut disc) = self.table.split_products(k, k2, in_fragment);
                if keep_system {
                    if !same_pointer {
                        kept = C64::new(0.0, 0.0);
                    }
                } else if !same_pointer {
                    disc = C64::new(0.0, 0.0);
                }
                gram[(k, k2)] = kept;
                // ⟨D_k'|D_k⟩ = conj ⟨D_k|D_k'⟩
                weights[(k, k2)] = psi[k] * psi[k2].conj() * disc.conj();
            }
        }
        let root = psd_sqrt(&gram)?;
        let m = &root * weights * &root;
        clip_spectrum(hermitian_eigenvalues(&m))
    }

    pub(crate) fn entropy(&self, keep_system: bool, in_fragment: &[bool]) -> Result<f64> {
        spectrum_entropy(&self.spectrum(keep_system, in_fragment)?)
    }

    pub(crate) fn mutual_information(&self, in_fragment: &[bool]) -> Result<f64> {
        let none = vec![false; in_fragment.len()];
        let h_s = self.entropy(true, &none)?;
        self.mutual_information_with(h_s, in_fragment)
    }

    pub(crate) fn mutual_information_with(&self, h_s: f64, in_fragment: &[bool]) -> Result<f64> {
        if !in_fragment.iter().any(|&b| b) {
            return Ok(0.0);
        }
        let h_f = self.entropy(false, in_fragment)?;
        let h_sf = self.entropy(true, in_fragment)?;
        Ok(h_s + h_f - h_sf)
    }
}

fn psd_sqrt(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut d = DMatrix::<C64>::zeros(m.nrows(), m.ncols());
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l < crate::entropy::EIGENVALUE_FLOOR {
            return Err(Error::NegativeEigenvalue(l));
        }
        d[(i, i)] = C64::new(l.max(0.0).sqrt(), 0.0);
    }
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Nonzero spectrum (descending, unit sum) of `ρ_SF` when `keep_system`,
/// otherwise of `ρ_F`. An empty fragment with `keep_system` gives `ρ_S`.
pub fn reduced_spectrum(state: &BranchState, keep_system: bool, fragment: &FragmentSpec) -> Result<Vec<f64>> {
    fragment.check_against(state)?;
    BranchEntropies::new(state).spectrum(keep_system, &fragment.mask())
}

/// `I(S:F) = H_S + H_F - H_SF` in bits.
pub fn mutual_information(state: &BranchState, fragment: &FragmentSpec) -> Result<f64> {
    fragment.check_against(state)?;
    BranchEntropies::new(state).mutual_information(&fragment.mask())
}

/// `I(A:B)` for disjoint parts of a dense pure state.
pub fn dense_mutual_information(state: &PureState, a: &SubsystemSet, b: &SubsystemSet) -> Result<f64> {
    if let Some(&i) = a.indices().iter().find(|&&i| b.contains(i)) {
        return Err(Error::DuplicateSubsystem(i));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let joint = SubsystemSet::new(a.indices().iter().chain(b.indices()).copied())?;
    Ok(state.subsystem_entropy(a)? + state.subsystem_entropy(b)? - state.subsystem_entropy(&joint)?)
}

/// Dense-path `I(S:F)` for a branch state, with the system at position 0 and
/// environment qubit `j` at position `j + 1`.
pub fn dense_branch_mutual_information(dense: &PureState, fragment: &FragmentSpec) -> Result<f64> {
    let f = SubsystemSet::new(fragment.indices().indices().iter().map(|j| j + 1))?;
    dense_mutual_information(dense, &SubsystemSet::new([0])?, &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::{ising_evolve, sample_couplings, CouplingSet};
    use crate::entropy::von_neumann_entropy;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn plus() -> [C64; 2] {
        [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]
    }

    fn ghz(n: usize) -> BranchState {
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let one = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let a = C64::new(FRAC_1_SQRT_2, 0.0);
        BranchState::new(2, vec![0, 1], vec![a, a], vec![vec![zero; n], vec![one; n]]).unwrap()
    }

    #[test]
    fn system_spectrum_of_ghz() {
        let s = ghz(4);
        let spec = reduced_spectrum(&s, true, &FragmentSpec::empty(4)).unwrap();
        assert_abs_diff_eq!(spec[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(spec[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn whole_register_is_pure() {
        let s = ising_evolve(&sample_couplings(9, 1).unwrap().at_action(0.8).unwrap(), plus()).unwrap();
        let spec = reduced_spectrum(&s, true, &FragmentSpec::full(9)).unwrap();
        assert_abs_diff_eq!(spec[0], 1.0, epsilon = 1e-12);
        assert!(spec[1..].iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn spectrum_matches_dense_partial_trace() {
        let s = ising_evolve(&sample_couplings(8, 21).unwrap().at_action(0.6).unwrap(), plus()).unwrap();
        let dense = s.to_dense().unwrap();
        let frag = FragmentSpec::new([1, 4, 6], 8).unwrap();
        for keep_system in [true, false] {
            let ours = reduced_spectrum(&s, keep_system, &frag).unwrap();
            let mut keep: Vec<usize> = frag.indices().indices().iter().map(|j| j + 1).collect();
            if keep_system {
                keep.insert(0, 0);
            }
            let rho = dense.partial_trace(&SubsystemSet::new(keep).unwrap()).unwrap();
            let theirs = rho.eigenvalues();
            for (i, x) in ours.iter().enumerate() {
                assert_abs_diff_eq!(*x, theirs[i], epsilon = 1e-10);
            }
            assert!(theirs[ours.len()..].iter().all(|x| x.abs() < 1e-10));
            assert_abs_diff_eq!(
                spectrum_entropy(&ours).unwrap(),
                von_neumann_entropy(&rho).unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn mutual_information_examples() {
        let s = ising_evolve(&sample_couplings(6, 2).unwrap().at_action(1.0).unwrap(), plus()).unwrap();
        assert_eq!(mutual_information(&s, &FragmentSpec::empty(6)).unwrap(), 0.0);
        let h_s = s.system_entropy().unwrap();
        assert_abs_diff_eq!(mutual_information(&s, &FragmentSpec::full(6)).unwrap(), 2.0 * h_s, epsilon = 1e-9);

        let perfect = ising_evolve(&CouplingSet::new(vec![1.0], FRAC_PI_4).unwrap(), plus()).unwrap();
        assert_abs_diff_eq!(mutual_information(&perfect, &FragmentSpec::full(1)).unwrap(), 2.0, epsilon = 1e-12);
        let dense = perfect.to_dense().unwrap();
        assert_abs_diff_eq!(
            dense_branch_mutual_information(&dense, &FragmentSpec::full(1)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fragment_validation() {
        assert!(FragmentSpec::new([3], 3).is_err());
        assert!(FragmentSpec::new([1, 1], 3).is_err());
        let f = FragmentSpec::new([0, 2], 4).unwrap();
        assert_eq!(f.fraction(), 0.5);
        assert_eq!(f.complement().indices().indices(), &[1, 3]);
        let s = ghz(3);
        assert!(mutual_information(&s, &f).is_err());
    }

    #[test]
    fn non_pointer_amplitudes_and_complex_kets() {
        // three branches on a qutrit, complex kets, unequal weights
        let k = |a: f64, b: f64| [C64::new(a.cos(), 0.0), C64::from_polar(a.sin(), b)];
        let env = vec![
            vec![k(0.1, 0.3), k(0.9, 1.0), k(0.4, -0.2)],
            vec![k(0.7, 0.0), k(0.2, 2.0), k(1.1, 0.5)],
            vec![k(1.3, 1.5), k(0.5, 0.1), k(0.0, 0.0)],
        ];
        let amps = vec![C64::new(0.6, 0.0), C64::from_polar(0.64, 0.7), C64::from_polar(0.48, -1.2)];
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps = amps.into_iter().map(|a| a / norm).collect();
        let s = BranchState::new(3, vec![2, 0, 1], amps, env).unwrap();
        let dense = s.to_dense().unwrap();
        for idx in [vec![], vec![0], vec![1, 2], vec![0, 1, 2]] {
            let f = FragmentSpec::new(idx, 3).unwrap();
            assert_abs_diff_eq!(
                mutual_information(&s, &f).unwrap(),
                dense_branch_mutual_information(&dense, &f).unwrap(),
                epsilon = 1e-10
            );
        }
    }
}
