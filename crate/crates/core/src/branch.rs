//! Branching states `Σ_k ψ_k |s_k⟩ ⊗_j |e_k^(j)⟩` and the Ising spin bath that
//! produces them.
//!
//! Branches store one ket per environment qubit instead of the full record
//! `|ε_k⟩`. Every reduced quantity downstream is a function of the pairwise
//! per-qubit overlaps `⟨e_k^(j)|e_k'^(j)⟩`, so a state with `n` branches on `N`
//! qubits costs `O(n² N)` rather than `O(2^N)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::entropy::{hermitian_eigenvalues, spectrum_entropy};
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, split_seed, STREAM_COUPLINGS};
use crate::state::{qubit_count, tensor_product, PureState, SubsystemSet, DEFAULT_DENSE_LIMIT};
use crate::C64;

/// Single-qubit ket `(⟨0|e⟩, ⟨1|e⟩)`.
pub type Qubit = [C64; 2];

const KET_TOL: f64 = 1e-10;

pub(crate) fn qubit_overlap(a: &Qubit, b: &Qubit) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

fn normalize_qubit(q: &Qubit) -> Result<Qubit> {
    let n = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
    if (n - 1.0).abs() > KET_TOL {
        return Err(Error::NotNormalized(n));
    }
    Ok([q[0] / n, q[1] / n])
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    system_dim: usize,
    pointers: Vec<usize>,
    amplitudes: Vec<C64>,
    env: Vec<Vec<Qubit>>,
}

impl BranchState {
    /// `pointers[k]` is the computational-basis label of branch `k`'s system
    /// ket; labels must be distinct, which makes the pointer states
    /// orthonormal. `env[k][j]` is branch `k`'s ket for environment qubit `j`.
    /// Amplitudes and kets must be normalized within `1e-10` and are then
    /// renormalized exactly.
    pub fn new(system_dim: usize, pointers: Vec<usize>, amplitudes: Vec<C64>, env: Vec<Vec<Qubit>>) -> Result<Self> {
        let n = amplitudes.len();
        if n == 0 {
            return Err(Error::Empty("branches"));
        }
        if pointers.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: pointers.len() });
        }
        if env.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: env.len() });
        }
        let n_env = env[0].len();
        if let Some(row) = env.iter().find(|row| row.len() != n_env) {
            return Err(Error::DimensionMismatch { expected: n_env, found: row.len() });
        }
        for (k, &p) in pointers.iter().enumerate() {
            if p >= system_dim {
                return Err(Error::param("pointers", format!("label {p} exceeds system dimension {system_dim}")));
            }
            if pointers[..k].contains(&p) {
                return Err(Error::param("pointers", format!("label {p} used by two branches")));
            }
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > KET_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        let env = env
            .iter()
            .map(|row| row.iter().map(normalize_qubit).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(BranchState { system_dim, pointers, amplitudes, env })
    }

    pub fn n_branches(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_env(&self) -> usize {
        self.env[0].len()
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn pointers(&self) -> &[usize] {
        &self.pointers
    }

    pub fn env_ket(&self, branch: usize, qubit: usize) -> &Qubit {
        &self.env[branch][qubit]
    }

    /// `⟨e_k^(j)|e_k'^(j)⟩`.
    pub fn qubit_overlap(&self, k: usize, k2: usize, qubit: usize) -> C64 {
        qubit_overlap(&self.env[k][qubit], &self.env[k2][qubit])
    }

    fn check_branch(&self, k: usize) -> Result<()> {
        if k >= self.n_branches() {
            return Err(Error::BranchOutOfRange { index: k, count: self.n_branches() });
        }
        Ok(())
    }

    /// `Π_{j ∈ subset} ⟨e_k^(j)|e_k'^(j)⟩` over environment qubits.
    pub fn decoherence_factor(&self, subset: &SubsystemSet, pair: (usize, usize)) -> Result<C64> {
        let (k, k2) = pair;
        self.check_branch(k)?;
        self.check_branch(k2)?;
        if k == k2 {
            return Err(Error::SameBranch(k));
        }
        subset.check(self.n_env())?;
        Ok(subset
            .indices()
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, &j| acc * self.qubit_overlap(k, k2, j)))
    }

    /// `⟨ε_k|ε_k'⟩` over the whole environment, including `k == k'`.
    pub(crate) fn record_overlap(&self, k: usize, k2: usize) -> C64 {
        (0..self.n_env()).fold(C64::new(1.0, 0.0), |acc, j| acc * self.qubit_overlap(k, k2, j))
    }

    /// `⟨Ψ|Ψ⟩` from the branch Gram matrix.
    pub fn gram_norm_sqr(&self) -> f64 {
        let n = self.n_branches();
        let mut total = C64::new(0.0, 0.0);
        for k in 0..n {
            for k2 in 0..n {
                if self.pointers[k] == self.pointers[k2] {
                    total += self.amplitudes[k].conj() * self.amplitudes[k2] * self.record_overlap(k, k2);
                }
            }
        }
        total.re
    }

    /// `ρ_S` in the computational basis of the system.
    pub fn system_density(&self) -> DMatrix<C64> {
        let mut rho = DMatrix::zeros(self.system_dim, self.system_dim);
        let n = self.n_branches();
        for k in 0..n {
            for k2 in 0..n {
                let v = self.amplitudes[k] * self.amplitudes[k2].conj() * self.record_overlap(k2, k);
                rho[(self.pointers[k], self.pointers[k2])] += v;
            }
        }
        rho
    }

    /// Von Neumann entropy of `ρ_S` in bits.
    pub fn system_entropy(&self) -> Result<f64> {
        spectrum_entropy(&hermitian_eigenvalues(&self.system_density()))
    }

    /// Literal expansion into a dense state on `[system, e_1, …, e_N]`.
    pub fn to_dense(&self) -> Result<PureState> {
        self.to_dense_with_limit(DEFAULT_DENSE_LIMIT)
    }

    pub fn to_dense_with_limit(&self, limit: usize) -> Result<PureState> {
        let qubits = qubit_count(self.system_dim) + self.n_env();
        if qubits > limit {
            return Err(Error::DenseLimit { qubits, limit });
        }
        let mut dims = vec![self.system_dim];
        dims.extend(std::iter::repeat(2).take(self.n_env()));
        let total: usize = dims.iter().product();
        let mut amps = DVector::<C64>::zeros(total);
        for k in 0..self.n_branches() {
            let mut factors = Vec::with_capacity(self.n_env() + 1);
            factors.push(PureState::basis(vec![self.system_dim], self.pointers[k])?);
            for q in &self.env[k] {
                factors.push(PureState::qubits(1, q.to_vec())?);
            }
            let branch = tensor_product(&factors)?;
            amps += branch.amplitudes() * self.amplitudes[k];
        }
        PureState::with_limit(dims, amps, limit)
    }
}

/// Ising couplings `g_k ∈ (0, 1]` and an evolution time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSet {
    g: Vec<f64>,
    t: f64,
}

impl CouplingSet {
    pub fn new(g: Vec<f64>, t: f64) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::Empty("couplings"));
        }
        if let Some(bad) = g.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::param("g", format!("coupling {bad} outside (0, 1]")));
        }
        if !t.is_finite() || t < 0.0 {
            return Err(Error::param("t", format!("time {t} must be finite and non-negative")));
        }
        Ok(CouplingSet { g, t })
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n_env(&self) -> usize {
        self.g.len()
    }

    pub fn mean_g(&self) -> f64 {
        self.g.iter().sum::<f64>() / self.g.len() as f64
    }

    /// `a = ⟨g_k t⟩`.
    pub fn action(&self) -> f64 {
        self.t * self.mean_g()
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        CouplingSet::new(self.g.clone(), t)
    }

    /// Sets `t = a / ⟨g⟩`.
    pub fn at_action(&self, action: f64) -> Result<Self> {
        if !action.is_finite() || action < 0.0 {
            return Err(Error::param("action", format!("{action} must be finite and non-negative")));
        }
        self.at_time(action / self.mean_g())
    }
}

/// Draw `n_env` couplings uniformly from `(0, 1]`; `t` starts at zero.
pub fn sample_couplings(n_env: usize, seed: u64) -> Result<CouplingSet> {
    if n_env == 0 {
        return Err(Error::param("n_env", "must be at least 1"));
    }
    let mut rng = rng_from_seed(split_seed(seed, STREAM_COUPLINGS, 0));
    let g = (0..n_env).map(|_| 1.0 - rng.random::<f64>()).collect();
    CouplingSet::new(g, 0.0)
}

/// Evolve `initial ⊗ |0…0⟩` under `H = Σ_k g_k σ_z^S ⊗ σ_y^(k)` for time `t`.
///
/// The σ_z eigenstates label the branches: branch `|0⟩` (eigenvalue +1) puts
/// qubit `k` in `exp(-i g_k t σ_y)|0⟩ = (cos g_k t, sin g_k t)` and branch `|1⟩`
/// in `(cos g_k t, -sin g_k t)`. Branches with zero amplitude are dropped.
pub fn ising_evolve(couplings: &CouplingSet, initial_system: [C64; 2]) -> Result<BranchState> {
    let norm = (initial_system[0].norm_sqr() + initial_system[1].norm_sqr()).sqrt();
    if (norm - 1.0).abs() > KET_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let (mut pointers, mut amps, mut env) = (Vec::new(), Vec::new(), Vec::new());
    for (label, sign) in [(0usize, 1.0f64), (1, -1.0)] {
        let amp = initial_system[label];
        if amp.norm_sqr() < 1e-30 {
            continue;
        }
        let kets = couplings
            .g
            .iter()
            .map(|g| {
                let theta = g * couplings.t;
                [C64::new(theta.cos(), 0.0), C64::new(sign * theta.sin(), 0.0)]
            })
            .collect();
        pointers.push(label);
        amps.push(amp);
        env.push(kets);
    }
    BranchState::new(2, pointers, amps, env)
}

/// `σ(μ) = cos μ σ_z + sin μ σ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observable {
    pub mu: f64,
}

impl Observable {
    pub fn new(mu: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&mu) {
            return Err(Error::param("mu", format!("{mu} outside [0, π/2]")));
        }
        Ok(Observable { mu })
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let (s, c) = self.mu.sin_cos();
        DMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-c, 0.0)])
    }

    /// Eigenvectors for eigenvalues `+1` and `-1`.
    pub fn eigenstates(&self) -> [Qubit; 2] {
        let (s, c) = (self.mu / 2.0).sin_cos();
        [
            [C64::new(c, 0.0), C64::new(s, 0.0)],
            [C64::new(-s, 0.0), C64::new(c, 0.0)],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveTrajectory {
    pub mu: f64,
    pub times: Vec<f64>,
    pub entropies: Vec<f64>,
    /// Sum of `H_S(t)` over the time grid; the ranking key.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveResult {
    pub trajectories: Vec<SieveTrajectory>,
    /// Indices into the candidate grid, least entropy first. Ties keep grid order.
    pub ranking: Vec<usize>,
}

/// Rank the `+1` eigenstates of `σ(μ)` by the entropy they produce.
pub fn predictability_sieve(couplings: &CouplingSet, mu_grid: &[f64], t_grid: &[f64]) -> Result<SieveResult> {
    if mu_grid.is_empty() {
        return Err(Error::Empty("mu grid"));
    }
    if t_grid.is_empty() {
        return Err(Error::Empty("time grid"));
    }
    let mut trajectories = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        let initial = Observable::new(mu)?.eigenstates()[0];
        let mut entropies = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let state = ising_evolve(&couplings.at_time(t)?, initial)?;
            entropies.push(state.system_entropy()?);
        }
        let total = entropies.iter().sum();
        trajectories.push(SieveTrajectory { mu, times: t_grid.to_vec(), entropies, total });
    }
    let mut ranking: Vec<usize> = (0..mu_grid.len()).collect();
    ranking.sort_by(|&a, &b| trajectories[a].total.total_cmp(&trajectories[b].total));
    Ok(SieveResult { trajectories, ranking })
}
