//! Closed-form reference curves for quantum Brownian motion.
//!
//! For an underdamped oscillator monitored by a bath of oscillators the
//! mutual information with a fraction `f` of the bath is approximately
//! `H_S + ½ ln(f/(1−f))` nats, and redundancy of an initially squeezed state
//! reaches `s^{2δ}`. These are approximations quoted for comparison with
//! simulated curves; nothing here simulates an oscillator.
//!
//! The formula is unit-covariant: in bits it reads `H_S + ½ lg(f/(1−f))`,
//! since `ln x / ln 2 = lg x` and `H_S` converts by the same factor.

use serde::Serialize;

use crate::error::{Error, Result};

/// Metadata tag carried by every curve from this module.
pub const ANALYTIC_TAG: &str = "analytic-approximation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoUnit {
    Bits,
    Nats,
}

impl InfoUnit {
    fn log(self, x: f64) -> f64 {
        match self {
            InfoUnit::Bits => x.log2(),
            InfoUnit::Nats => x.ln(),
        }
    }

    /// Factor converting a value in this unit to bits.
    pub fn to_bits(self) -> f64 {
        match self {
            InfoUnit::Bits => 1.0,
            InfoUnit::Nats => std::f64::consts::LOG2_E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QbmParams {
    h_s: f64,
    unit: InfoUnit,
    s: f64,
    delta: f64,
}

impl QbmParams {
    /// `delta` may be 1: the formula is used there as a plain power.
    pub fn new(h_s: f64, unit: InfoUnit, s: f64, delta: f64) -> Result<Self> {
        if !(h_s.is_finite() && h_s >= 0.0) {
            return Err(Error::param("h_s", format!("must be finite and non-negative, got {h_s}")));
        }
        if !(s.is_finite() && s >= 1.0) {
            return Err(Error::param("s", format!("squeeze factor must be at least 1, got {s}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::param("delta", format!("must lie in (0, 1], got {delta}")));
        }
        Ok(QbmParams { h_s, unit, s, delta })
    }

    pub fn h_s(&self) -> f64 {
        self.h_s
    }

    pub fn unit(&self) -> InfoUnit {
        self.unit
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QbmPoint {
    pub f: f64,
    /// Formula value before clamping.
    pub raw: f64,
    /// Value clamped to `[0, 2 H_S]`.
    pub value: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QbmCurve {
    pub tag: &'static str,
    pub unit: InfoUnit,
    pub h_s: f64,
    pub points: Vec<QbmPoint>,
}

pub fn qbm_mutual_information(params: &QbmParams, f_grid: &[f64]) -> Result<QbmCurve> {
    let mut points = Vec::with_capacity(f_grid.len());
    for &f in f_grid {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::param("f", format!("fraction must lie strictly inside (0, 1), got {f}")));
        }
        let raw = params.h_s + 0.5 * params.unit.log(f / (1.0 - f));
        let value = raw.clamp(0.0, 2.0 * params.h_s);
        points.push(QbmPoint { f, raw, value, clamped: value != raw });
    }
    Ok(QbmCurve { tag: ANALYTIC_TAG, unit: params.unit, h_s: params.h_s, points })
}

/// `R_δ ≈ s^{2δ}`.
pub fn qbm_redundancy(params: &QbmParams) -> f64 {
    params.s.powf(2.0 * params.delta)
}
