//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a JSON string so the page can plot it without any
//! generated glue types. Errors come back as JS strings.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use qdarwin::branch::{ising_evolve, predictability_sieve, sample_couplings};
use qdarwin::envariance::born_via_envariance;
use qdarwin::info::pip_curve;
use qdarwin::qbm::{qbm_mutual_information, InfoUnit, QbmParams};
use qdarwin::C64;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn text<E: ToString>(e: E) -> String {
    e.to_string()
}

/// Ising PIP for `|+⟩` and `n_env` spins at action `a`, with the analytic
/// QBM curve for the same `H_S` alongside.
pub fn pip(n_env: usize, action: f64, n_samples: usize, seed: u64) -> Result<String, String> {
    let couplings = sample_couplings(n_env, seed).and_then(|c| c.at_action(action)).map_err(text)?;
    let plus = [C64::new(FRAC_1_SQRT_2, 0.0); 2];
    let state = ising_evolve(&couplings, plus).map_err(text)?;
    let curve = pip_curve(&state, n_samples, seed).map_err(text)?;
    let inner: Vec<f64> = curve.points.iter().map(|p| p.f).filter(|f| *f > 0.0 && *f < 1.0).collect();
    let qbm = if curve.plateau > 1e-12 && !inner.is_empty() {
        let params = QbmParams::new(curve.plateau, InfoUnit::Bits, 1.0, 0.5).map_err(text)?;
        let c = qbm_mutual_information(&params, &inner).map_err(text)?;
        c.points.iter().map(|p| json!([p.f, p.value])).collect()
    } else {
        Vec::new()
    };
    Ok(json!({
        "h_s": curve.plateau,
        "points": curve.points.iter().map(|p| json!([p.f, p.i_mean, p.i_stddev])).collect::<Vec<_>>(),
        "qbm": qbm,
    })
    .to_string())
}

/// Entropy production for initial `σ(μ)` eigenstates, `n_mu` angles on
/// `[0, π/2]` and `n_t` actions on `[0, a_max]`.
pub fn sieve(n_env: usize, a_max: f64, n_t: usize, n_mu: usize, seed: u64) -> Result<String, String> {
    if n_t < 2 || n_mu < 2 {
        return Err("need at least two times and two angles".into());
    }
    let couplings = sample_couplings(n_env, seed).map_err(text)?;
    let mu: Vec<f64> = (0..n_mu).map(|i| FRAC_PI_2 * i as f64 / (n_mu - 1) as f64).collect();
    let actions: Vec<f64> = (0..n_t).map(|i| a_max * i as f64 / (n_t - 1) as f64).collect();
    let times: Vec<f64> = actions.iter().map(|a| a / couplings.mean_g()).collect();
    let result = predictability_sieve(&couplings, &mu, &times).map_err(text)?;
    Ok(json!({
        "actions": actions,
        "curves": result.trajectories.iter().map(|t| json!({"mu": t.mu, "h_s": t.entropies})).collect::<Vec<_>>(),
        "ranking": result.ranking.iter().map(|&i| mu[i]).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Branch probabilities by finegraining, from comma-separated real amplitudes
/// (normalized here).
pub fn born(amplitudes: &str, max_denominator: u64) -> Result<String, String> {
    let raw: Vec<f64> = amplitudes
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("not a number: `{}`", s.trim())))
        .collect::<Result<_, _>>()?;
    let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err("amplitudes must not all be zero".into());
    }
    let amps: Vec<C64> = raw.iter().map(|a| C64::new(a / norm, 0.0)).collect();
    let r = born_via_envariance(&amps, max_denominator).map_err(text)?;
    Ok(json!({
        "weights": amps.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>(),
        "probabilities": r.probabilities,
        "rationals": r.rationals.iter().map(|q| format!("{}/{}", q.numer(), q.denom())).collect::<Vec<_>>(),
        "denominator": r.denominator,
        "exact": r.exact,
    })
    .to_string())
}

#[wasm_bindgen(js_name = pipCurve)]
pub fn pip_js(n_env: u32, action: f64, n_samples: u32, seed: u32) -> Result<String, JsValue> {
    pip(n_env as usize, action, n_samples as usize, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = sieve)]
pub fn sieve_js(n_env: u32, a_max: f64, n_t: u32, n_mu: u32, seed: u32) -> Result<String, JsValue> {
    sieve(n_env as usize, a_max, n_t as usize, n_mu as usize, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = born)]
pub fn born_js(amplitudes: &str, max_denominator: u32) -> Result<String, JsValue> {
    born(amplitudes, max_denominator.into()).map_err(|e| JsValue::from_str(&e))
}
