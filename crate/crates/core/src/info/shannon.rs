//! Shannon information about `σ(μ)` available from local measurements on a
//! fragment, and the redundancy ridge built from it.
//!
//! With product-basis outcomes `j` on the fragment and eigenbasis outcomes `i`
//! of `σ(μ)` on the system,
//!
//! `p(i, j) = Σ_kk' ψ_k ψ_k'* ⟨i|s_k⟩⟨s_k'|i⟩ W_kk'(j) R_kk'`
//!
//! where `W_kk'(j) = Π_{q∈F} ⟨j_q|e_k⟩⟨e_k'|j_q⟩` and `R_kk'` is the overlap of
//! the unmeasured remainder. Summing over `i` kills the cross terms, so the
//! outcome marginal `p(j) = Σ_k |ψ_k|² Π_q |⟨j_q|e_k⟩|²` is a mixture of
//! product distributions and can be sampled exactly.

use nalgebra::Matrix2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::pip::{map_indexed, mask_of, mean_std, random_fragment};
use super::FragmentSpec;
use crate::branch::{ising_evolve, BranchState, CouplingSet, Observable, Qubit};
use crate::entropy::{binary_entropy, shannon_entropy};
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, split_seed, STREAM_BASES, STREAM_OUTCOMES};
use crate::C64;

/// Largest fragment for which outcomes are enumerated exhaustively.
pub const OUTCOME_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "scheme")]
pub enum MeasurementScheme {
    /// Each qubit is measured in the Helstrom basis that best discriminates
    /// its two branch kets, weighted by the branch probabilities.
    PerQubitOptimal,
    /// Each qubit `j` is measured in a basis drawn from the Haar measure on
    /// `U(2)`, keyed by `(seed, j)`, so a qubit keeps its basis across
    /// fragments.
    RandomBases { seed: u64 },
}

fn helstrom_basis(p0: f64, e0: &Qubit, p1: f64, e1: &Qubit) -> [Qubit; 2] {
    let proj = |e: &Qubit| Matrix2::new(e[0] * e[0].conj(), e[0] * e[1].conj(), e[1] * e[0].conj(), e[1] * e[1].conj());
    let gamma = proj(e0) * C64::new(p0, 0.0) - proj(e1) * C64::new(p1, 0.0);
    if gamma.norm() < 1e-14 {
        return computational_basis();
    }
    let eig = gamma.symmetric_eigen();
    let col = |c: usize| [eig.eigenvectors[(0, c)], eig.eigenvectors[(1, c)]];
    [col(0), col(1)]
}

fn computational_basis() -> [Qubit; 2] {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    [[o, z], [z, o]]
}

fn random_basis(seed: u64, qubit: usize) -> [Qubit; 2] {
    let mut rng = rng_from_seed(split_seed(seed, STREAM_BASES, qubit as u64));
    let mut draw = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    };
    let (a, b) = (draw(), draw());
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let v = [a / n, b / n];
    [v, [-v[1].conj(), v[0].conj()]]
}

/// Per-state, per-observable tables shared by every fragment query.
struct ShannonSetup {
    n: usize,
    n_env: usize,
    weights: Vec<f64>,
    /// `coeff[i][k*n + k']` = ψ_k ψ_k'* ⟨i|s_k⟩⟨s_k'|i⟩
    coeff: [Vec<C64>; 2],
    /// `amp[(q*2 + b)*n + k]` = ⟨b_q|e_k^(q)⟩
    amp: Vec<C64>,
    /// `overlap[(k*n + k')*n_env + q]` = ⟨e_k'^(q)|e_k^(q)⟩
    overlap: Vec<C64>,
    h_s: f64,
}

impl ShannonSetup {
    fn new(state: &BranchState, mu: f64, scheme: MeasurementScheme) -> Result<Self> {
        if state.system_dim() != 2 {
            return Err(Error::param("system", "σ(μ) needs a qubit system"));
        }
        let eig = Observable::new(mu)?.eigenstates();
        let n = state.n_branches();
        let n_env = state.n_env();
        let psi = state.amplitudes();
        let ptr = state.pointers();
        let weights: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
        let mut coeff = [vec![C64::new(0.0, 0.0); n * n], vec![C64::new(0.0, 0.0); n * n]];
        for (i, c) in coeff.iter_mut().enumerate() {
            for k in 0..n {
                for k2 in 0..n {
                    c[k * n + k2] = psi[k] * psi[k2].conj() * eig[i][ptr[k]].conj() * eig[i][ptr[k2]];
                }
            }
        }
        let mut amp = vec![C64::new(0.0, 0.0); n_env * 2 * n];
        for q in 0..n_env {
            let basis = match scheme {
                MeasurementScheme::PerQubitOptimal if n == 2 => {
                    helstrom_basis(weights[0], state.env_ket(0, q), weights[1], state.env_ket(1, q))
                }
                MeasurementScheme::PerQubitOptimal => computational_basis(),
                MeasurementScheme::RandomBases { seed } => random_basis(seed, q),
            };
            for (b, bv) in basis.iter().enumerate() {
                for k in 0..n {
                    let e = state.env_ket(k, q);
                    amp[(q * 2 + b) * n + k] = bv[0].conj() * e[0] + bv[1].conj() * e[1];
                }
            }
        }
        let mut overlap = Vec::with_capacity(n * n * n_env);
        for k in 0..n {
            for k2 in 0..n {
                for q in 0..n_env {
                    overlap.push(state.qubit_overlap(k2, k, q));
                }
            }
        }
        let h_s = system_shannon_entropy(state, mu)?;
        Ok(ShannonSetup { n, n_env, weights, coeff, amp, overlap, h_s })
    }

    /// `c^i_kk' R_kk'` for both system outcomes.
    fn folded_coefficients(&self, in_fragment: &[bool]) -> [Vec<C64>; 2] {
        let n = self.n;
        let mut out = self.coeff.clone();
        for p in 0..n * n {
            let mut r = C64::new(1.0, 0.0);
            for (q, &inf) in in_fragment.iter().enumerate() {
                if !inf {
                    r *= self.overlap[p * self.n_env + q];
                }
            }
            out[0][p] *= r;
            out[1][p] *= r;
        }
        out
    }

    fn joint(&self, coeff: &[Vec<C64>; 2], w: &[C64]) -> [f64; 2] {
        let mut p = [0.0; 2];
        for (i, c) in coeff.iter().enumerate() {
            p[i] = c.iter().zip(w).map(|(a, b)| a * b).sum::<C64>().re.max(0.0);
        }
        p
    }

    fn exact(&self, fragment: &[usize], in_fragment: &[bool]) -> Result<f64> {
        let n = self.n;
        let coeff = self.folded_coefficients(in_fragment);
        let mut h_joint = 0.0;
        let mut h_out = 0.0;
        let mut w = vec![C64::new(1.0, 0.0); n * n];
        self.enumerate(fragment, 0, &mut w, &coeff, &mut h_joint, &mut h_out);
        Ok((self.h_s + h_out - h_joint).max(0.0))
    }

    fn enumerate(
        &self,
        fragment: &[usize],
        depth: usize,
        w: &mut Vec<C64>,
        coeff: &[Vec<C64>; 2],
        h_joint: &mut f64,
        h_out: &mut f64,
    ) {
        if depth == fragment.len() {
            let p = self.joint(coeff, w);
            let pj = p[0] + p[1];
            for x in p {
                if x > 0.0 {
                    *h_joint -= x * x.log2();
                }
            }
            if pj > 0.0 {
                *h_out -= pj * pj.log2();
            }
            return;
        }
        let n = self.n;
        let q = fragment[depth];
        let saved = w.clone();
        for b in 0..2 {
            let a = &self.amp[(q * 2 + b) * n..(q * 2 + b + 1) * n];
            for k in 0..n {
                for k2 in 0..n {
                    w[k * n + k2] = saved[k * n + k2] * a[k] * a[k2].conj();
                }
            }
            self.enumerate(fragment, depth + 1, w, coeff, h_joint, h_out);
        }
        *w = saved;
    }

    fn sampled(&self, fragment: &[usize], in_fragment: &[bool], n_outcomes: usize, seed: u64) -> f64 {
        let n = self.n;
        let coeff = self.folded_coefficients(in_fragment);
        let mut conditional = 0.0;
        let mut w = vec![C64::new(0.0, 0.0); n * n];
        for r in 0..n_outcomes {
            let mut rng = rng_from_seed(split_seed(seed, STREAM_OUTCOMES, r as u64));
            let mut u: f64 = rng.random();
            let mut branch = n - 1;
            for (k, &wk) in self.weights.iter().enumerate() {
                if u < wk {
                    branch = k;
                    break;
                }
                u -= wk;
            }
            w.iter_mut().for_each(|x| *x = C64::new(1.0, 0.0));
            for &q in fragment {
                let a0 = self.amp[(q * 2) * n + branch];
                let b = usize::from(rng.random::<f64>() >= a0.norm_sqr());
                let a = &self.amp[(q * 2 + b) * n..(q * 2 + b + 1) * n];
                for k in 0..n {
                    for k2 in 0..n {
                        w[k * n + k2] *= a[k] * a[k2].conj();
                    }
                }
            }
            let p = self.joint(&coeff, &w);
            let pj = p[0] + p[1];
            if pj > 0.0 {
                conditional += binary_entropy(p[0] / pj);
            }
        }
        (self.h_s - conditional / n_outcomes as f64).clamp(0.0, self.h_s)
    }
}

/// Shannon entropy of the `σ(μ)` outcome distribution on `ρ_S`.
pub fn system_shannon_entropy(state: &BranchState, mu: f64) -> Result<f64> {
    if state.system_dim() != 2 {
        return Err(Error::param("system", "σ(μ) needs a qubit system"));
    }
    let rho = state.system_density();
    let p: Vec<f64> = Observable::new(mu)?
        .eigenstates()
        .iter()
        .map(|v| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    acc += v[a].conj() * rho[(a, b)] * v[b];
                }
            }
            acc.re
        })
        .collect();
    shannon_entropy(&p)
}

/// Exact Shannon mutual information between `σ(μ)` outcomes on the system and
/// product-basis outcomes on the fragment, by enumerating all `2^m` outcomes.
pub fn shannon_mi_observable(
    state: &BranchState,
    mu: f64,
    fragment: &FragmentSpec,
    scheme: MeasurementScheme,
) -> Result<f64> {
    fragment.check_against(state)?;
    if fragment.len() > OUTCOME_ENUMERATION_LIMIT {
        return Err(Error::OutcomeLimit { size: fragment.len(), limit: OUTCOME_ENUMERATION_LIMIT });
    }
    if fragment.is_empty() {
        return Ok(0.0);
    }
    let setup = ShannonSetup::new(state, mu, scheme)?;
    setup.exact(fragment.indices().indices(), &fragment.mask())
}

/// Monte Carlo estimate of the same quantity for fragments of any size:
/// `I = H(S) - E_j[H(S | j)]` with `j` drawn exactly from its marginal.
/// Standard error is at most `0.5 / sqrt(n_outcomes)` bits.
pub fn shannon_mi_observable_sampled(
    state: &BranchState,
    mu: f64,
    fragment: &FragmentSpec,
    scheme: MeasurementScheme,
    n_outcomes: usize,
    seed: u64,
) -> Result<f64> {
    fragment.check_against(state)?;
    if n_outcomes == 0 {
        return Err(Error::param("n_outcomes", "must be at least 1"));
    }
    if fragment.is_empty() {
        return Ok(0.0);
    }
    let setup = ShannonSetup::new(state, mu, scheme)?;
    Ok(setup.sampled(fragment.indices().indices(), &fragment.mask(), n_outcomes, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RidgeOptions {
    pub delta: f64,
    pub n_fragment_samples: usize,
    /// Outcome samples for fragments above `exact_limit`.
    pub n_outcome_samples: usize,
    pub exact_limit: usize,
    pub scheme: MeasurementScheme,
}

impl Default for RidgeOptions {
    fn default() -> Self {
        RidgeOptions {
            delta: 0.1,
            n_fragment_samples: 16,
            n_outcome_samples: 2000,
            exact_limit: 10,
            scheme: MeasurementScheme::PerQubitOptimal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RidgeRow {
    pub mu: f64,
    pub action: f64,
    /// `N / m_δ`, or 0 when no fragment supplies `(1-δ)` of `H_S(μ)`.
    pub r_delta: f64,
    /// `m_δ / N`, NaN when unreachable.
    pub f_delta: f64,
    /// Shannon entropy of `σ(μ)` on the decohered system.
    pub h_s_shannon: f64,
    /// Shannon information in the whole environment.
    pub full_information: f64,
    /// False when `ρ_S` is still pure (no decoherence, no redundancy possible).
    pub decohered: bool,
}

/// Shannon-based `R_δ(μ, a)` over the grids, rows ordered action-major.
///
/// `f_δ` is the smallest fragment size whose mean Shannon information about
/// `σ(μ)` reaches `(1-δ)` of `H_S(μ)`, the Shannon entropy of `σ(μ)` on `ρ_S`.
/// The couplings' `g` is reused for every action, with `t = a / ⟨g⟩`.
pub fn redundancy_ridge(
    couplings: &CouplingSet,
    action_grid: &[f64],
    mu_grid: &[f64],
    options: &RidgeOptions,
    seed: u64,
) -> Result<Vec<RidgeRow>> {
    if action_grid.is_empty() {
        return Err(Error::Empty("action grid"));
    }
    if mu_grid.is_empty() {
        return Err(Error::Empty("mu grid"));
    }
    if !(options.delta > 0.0 && options.delta < 1.0) {
        return Err(Error::param("delta", format!("{} outside (0, 1)", options.delta)));
    }
    if options.n_fragment_samples == 0 || options.n_outcome_samples == 0 {
        return Err(Error::param("n_samples", "must be at least 1"));
    }
    let exact_limit = options.exact_limit.min(OUTCOME_ENUMERATION_LIMIT);
    let plus = [C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2];
    let cells = action_grid.len() * mu_grid.len();
    map_indexed(cells, |cell| {
        let action = action_grid[cell / mu_grid.len()];
        let mu = mu_grid[cell % mu_grid.len()];
        let state = ising_evolve(&couplings.at_action(action)?, plus)?;
        let n = state.n_env();
        let setup = ShannonSetup::new(&state, mu, options.scheme)?;
        let cell_seed = split_seed(seed, STREAM_OUTCOMES, cell as u64);
        let info = |frag: &[usize], tag: u64| -> Result<f64> {
            let mask = mask_of(n, frag);
            if frag.len() <= exact_limit {
                setup.exact(frag, &mask)
            } else {
                Ok(setup.sampled(frag, &mask, options.n_outcome_samples, split_seed(cell_seed, tag, 0)))
            }
        };
        let all: Vec<usize> = (0..n).collect();
        let full_information = info(&all, u64::MAX)?;
        let decohered = state.system_entropy()? > 1e-6;
        let h_s = setup.h_s;
        let unreachable = RidgeRow {
            mu,
            action,
            r_delta: 0.0,
            f_delta: f64::NAN,
            h_s_shannon: h_s,
            full_information,
            decohered,
        };
        let target = (1.0 - options.delta) * h_s;
        if !decohered || h_s <= 1e-6 || full_information < target {
            return Ok(unreachable);
        }
        // the full-environment value reaches the target, so some m <= n does
        let mut m_delta = n;
        for m in 1..n {
            let values = (0..options.n_fragment_samples)
                .map(|r| info(&random_fragment(cell_seed, n, m, r), (m * options.n_fragment_samples + r) as u64))
                .collect::<Result<Vec<_>>>()?;
            if mean_std(&values).0 >= target {
                m_delta = m;
                break;
            }
        }
        Ok(RidgeRow {
            mu,
            action,
            r_delta: n as f64 / m_delta as f64,
            f_delta: m_delta as f64 / n as f64,
            h_s_shannon: h_s,
            full_information,
            decohered,
        })
    })
}
