//! Error metrics: scaled-correlation 1−R² (the evolution objective), RMSE
//! and normalized RMSE (reporting), and prediction scaling to the observed
//! response's mean and standard deviation.
//!
//! All statistics use the population convention (divide by n).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The per-model objective vector used during evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityVector {
    /// Expressional complexity of the tree (≥ 1).
    pub complexity: u64,
    /// Scaled-correlation error in [0, 1]; lower is better.
    pub error: f64,
    /// Generations this individual has survived.
    pub age: u32,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divide by n).
pub(crate) fn pop_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Pearson correlation; NaN when either side has zero variance or any
/// value is non-finite.
pub(crate) fn pearson(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    cov / (vx.sqrt() * vy.sqrt())
}

/// Median with the even-count convention: arithmetic mean of the two
/// central order statistics. Callers must pass finite, nonempty input.
pub(crate) fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn check_paired(pred: &[f64], obs: &[f64], min_len: usize) -> Result<()> {
    if pred.len() != obs.len() {
        return Err(Error::input(format!(
            "prediction/observation length mismatch: {} vs {}",
            pred.len(),
            obs.len()
        )));
    }
    if pred.len() < min_len {
        return Err(Error::input(format!(
            "need at least {min_len} points, got {}",
            pred.len()
        )));
    }
    Ok(())
}

/// The evolution objective 1 − R², with R the Pearson correlation between
/// prediction and observation. Predictions containing non-finite values, or
/// with zero variance, score exactly 1 (worst). The result is clamped to
/// [0, 1] against floating-point drift.
pub fn scaled_correlation_error(pred: &[f64], obs: &[f64]) -> Result<f64> {
    check_paired(pred, obs, 2)?;
    if pred.iter().any(|v| !v.is_finite()) {
        return Ok(1.0);
    }
    let r = pearson(pred, obs);
    if !r.is_finite() {
        return Ok(1.0);
    }
    Ok((1.0 - r * r).clamp(0.0, 1.0))
}

/// Affinely maps `pred` onto the observed response's mean and standard
/// deviation, flipping sign so the result correlates non-negatively with
/// `obs`. Zero-variance predictions are an error; the caller falls back to
/// reporting the constant mean of `obs`.
pub fn scale_to_observed(pred: &[f64], obs: &[f64]) -> Result<Vec<f64>> {
    check_paired(pred, obs, 2)?;
    if pred.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("cannot scale non-finite predictions"));
    }
    let sp = pop_std(pred);
    if sp == 0.0 {
        return Err(Error::input("cannot scale a constant prediction"));
    }
    let (mp, mo) = (mean(pred), mean(obs));
    let r = pearson(pred, obs);
    let sign = if r < 0.0 { -1.0 } else { 1.0 };
    let slope = sign * pop_std(obs) / sp;
    Ok(pred.iter().map(|p| (p - mp) * slope + mo).collect())
}

/// The affine coefficients used by [`scale_to_observed`], as
/// `(intercept, slope)` of `scaled = intercept + slope * pred`.
pub fn scaling_coefficients(pred: &[f64], obs: &[f64]) -> Result<(f64, f64)> {
    check_paired(pred, obs, 2)?;
    if pred.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("cannot scale non-finite predictions"));
    }
    let sp = pop_std(pred);
    if sp == 0.0 {
        return Err(Error::input("cannot scale a constant prediction"));
    }
    let r = pearson(pred, obs);
    let sign = if r < 0.0 { -1.0 } else { 1.0 };
    let slope = sign * pop_std(obs) / sp;
    Ok((mean(obs) - slope * mean(pred), slope))
}

/// Root mean squared error `√(Σ(obsᵢ − predᵢ)²/n)`.
pub fn rmse(pred: &[f64], obs: &[f64]) -> Result<f64> {
    check_paired(pred, obs, 1)?;
    let sq = pred
        .iter()
        .zip(obs)
        .map(|(p, o)| (o - p) * (o - p))
        .sum::<f64>();
    Ok((sq / pred.len() as f64).sqrt())
}

/// RMSE divided by the observed range `max(obs) − min(obs)`.
pub fn normalized_rmse(pred: &[f64], obs: &[f64]) -> Result<f64> {
    let e = rmse(pred, obs)?;
    let lo = obs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = obs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo).is_finite() || hi - lo == 0.0 {
        return Err(Error::input(
            "normalized RMSE undefined for a constant observed response",
        ));
    }
    Ok(e / (hi - lo))
}
