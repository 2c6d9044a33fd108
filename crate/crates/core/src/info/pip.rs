//! Partial-information plots and redundancy.

use rand::seq::index::sample;
use serde::Serialize;

use super::BranchEntropies;
use crate::branch::BranchState;
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, split_seed, STREAM_FRAGMENTS, STREAM_HAAR};
use crate::state::{haar_random_state, SubsystemSet, DEFAULT_DENSE_LIMIT};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipPoint {
    pub m: usize,
    pub f: f64,
    pub i_mean: f64,
    pub i_stddev: f64,
}

/// Sampled `I(S:F)` against fragment size, with the plateau level `H_S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipCurve {
    pub points: Vec<PipPoint>,
    pub plateau: f64,
    pub n_env: usize,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedundancyResult {
    pub delta: f64,
    /// Fragment size (possibly fractional) supplying `(1-δ) H_S`.
    pub m_delta: f64,
    pub f_delta: f64,
    pub r_delta: f64,
    pub interpolated: bool,
    pub h_s: f64,
}

/// Uniform random `m`-subset of `0..n` for sample `counter` at size `m`.
pub(crate) fn random_fragment(seed: u64, n: usize, m: usize, counter: usize) -> Vec<usize> {
    let size_seed = split_seed(seed, STREAM_FRAGMENTS, m as u64);
    let mut rng = rng_from_seed(split_seed(size_seed, STREAM_FRAGMENTS, counter as u64));
    let mut v = sample(&mut rng, n, m).into_vec();
    v.sort_unstable();
    v
}

pub(crate) fn mask_of(n: usize, indices: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &j in indices {
        mask[j] = true;
    }
    mask
}

/// Mean and sample standard deviation, summed in index order.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Evaluate `f(i)` for `i in 0..count`, possibly in parallel, returning
/// results in index order.
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Average `I(S:F)` over `n_samples` uniformly random fragments of each size
/// `m = 0..=N`.
pub fn pip_curve(state: &BranchState, n_samples: usize, seed: u64) -> Result<PipCurve> {
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be at least 1"));
    }
    let n = state.n_env();
    let eval = BranchEntropies::new(state);
    let h_s = eval.entropy(true, &vec![false; n])?;
    let per_sample = map_indexed((n + 1) * n_samples, |idx| {
        let (m, r) = (idx / n_samples, idx % n_samples);
        let frag = random_fragment(seed, n, m, r);
        eval.mutual_information_with(h_s, &mask_of(n, &frag))
    })?;
    let points = per_sample
        .chunks(n_samples)
        .enumerate()
        .map(|(m, vals)| {
            let (i_mean, i_stddev) = mean_std(vals);
            PipPoint { m, f: m as f64 / n as f64, i_mean, i_stddev }
        })
        .collect();
    Ok(PipCurve { points, plateau: h_s, n_env: n, n_samples, seed })
}

/// Locate `f_δ` on a sampled curve.
///
/// `f_δ` is the smallest fraction whose mean information reaches
/// `(1-δ) H_S`, interpolated linearly between the two bracketing fragment
/// sizes. Interpolation never goes below one qubit, so the result is at least
/// `1/N`.
pub fn redundancy_from_curve(curve: &PipCurve, delta: f64) -> Result<RedundancyResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("{delta} outside (0, 1)")));
    }
    let h_s = curve.plateau;
    if h_s <= 1e-6 {
        return Err(Error::NoClassicalInformation(h_s));
    }
    let n = curve.n_env;
    let target = (1.0 - delta) * h_s;
    let i_at = |m: usize| curve.points[m].i_mean;
    let hit = (1..=n).find(|&m| i_at(m) >= target).unwrap_or(n);
    let (m_delta, interpolated) = if hit == 1 {
        (1.0, false)
    } else {
        let (lo, hi) = (i_at(hit - 1), i_at(hit));
        let m = (hit - 1) as f64 + (target - lo) / (hi - lo);
        (m, m != hit as f64)
    };
    let f_delta = m_delta / n as f64;
    Ok(RedundancyResult { delta, m_delta, f_delta, r_delta: 1.0 / f_delta, interpolated, h_s })
}

/// `R_δ = 1/f_δ` from a freshly sampled partial-information plot.
pub fn redundancy(state: &BranchState, delta: f64, n_samples: usize, seed: u64) -> Result<RedundancyResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("{delta} outside (0, 1)")));
    }
    let h_s = state.system_entropy()?;
    if h_s <= 1e-6 {
        return Err(Error::NoClassicalInformation(h_s));
    }
    redundancy_from_curve(&pip_curve(state, n_samples, seed)?, delta)
}

/// Partial-information plot averaged over Haar-random states of
/// `n_system + n_env` qubits (dense path). The plateau is the mean `H_S`.
pub fn haar_pip(
    n_system_qubits: usize,
    n_env_qubits: usize,
    n_states: usize,
    n_fragment_samples: usize,
    seed: u64,
) -> Result<PipCurve> {
    if n_system_qubits == 0 || n_env_qubits == 0 {
        return Err(Error::param("n_qubits", "system and environment need at least one qubit each"));
    }
    if n_states == 0 || n_fragment_samples == 0 {
        return Err(Error::param("n_samples", "must be at least 1"));
    }
    let total = n_system_qubits + n_env_qubits;
    if total > DEFAULT_DENSE_LIMIT {
        return Err(Error::DenseLimit { qubits: total, limit: DEFAULT_DENSE_LIMIT });
    }
    let system = SubsystemSet::range(0..n_system_qubits);
    // per state: (H_S, I for each (m, sample))
    let per_state = map_indexed(n_states, |s| {
        let state = haar_random_state(total, split_seed(seed, STREAM_HAAR, s as u64))?;
        let h_s = state.subsystem_entropy(&system)?;
        let state_seed = split_seed(seed, STREAM_FRAGMENTS, s as u64);
        let mut values = Vec::with_capacity((n_env_qubits + 1) * n_fragment_samples);
        for m in 0..=n_env_qubits {
            for r in 0..n_fragment_samples {
                let frag = random_fragment(state_seed, n_env_qubits, m, r);
                if m == 0 {
                    values.push(0.0);
                    continue;
                }
                let f = SubsystemSet::new(frag.iter().map(|j| j + n_system_qubits))?;
                let sf = SubsystemSet::new(system.indices().iter().chain(f.indices()).copied())?;
                values.push(h_s + state.subsystem_entropy(&f)? - state.subsystem_entropy(&sf)?);
            }
        }
        Ok((h_s, values))
    })?;
    let plateau = per_state.iter().map(|(h, _)| h).sum::<f64>() / n_states as f64;
    let points = (0..=n_env_qubits)
        .map(|m| {
            let vals: Vec<f64> = per_state
                .iter()
                .flat_map(|(_, v)| v[m * n_fragment_samples..(m + 1) * n_fragment_samples].iter().copied())
                .collect();
            let (i_mean, i_stddev) = mean_std(&vals);
            PipPoint { m, f: m as f64 / n_env_qubits as f64, i_mean, i_stddev }
        })
        .collect();
    Ok(PipCurve { points, plateau, n_env: n_env_qubits, n_samples: n_states * n_fragment_samples, seed })
}
