//! Weighted least-squares estimation of the group rate `α`.
//!
//! The conformal Doppler model `c ΔΛ/Λref = dr/dt + α r` is linear in `α`, so
//! with residuals `y_i = c ΔΛ_i/Λref - (dr/dt)_i` and weights
//! `w_i = 1 / (c σ_i)²` the estimate is closed form:
//!
//! ```text
//! α̂ = Σ w r y / Σ w r²,    σ(α̂) = (Σ w r²)^(-1/2)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tracking::{residual_velocity, TrackingRecord};

/// Default `|z|` above which a non-zero rate is declared.
pub const DEFAULT_Z_THRESHOLD: f64 = 5.0;

/// Nominal fractional sigma used when every record is noise-free.
pub const NOISELESS_SIGMA_FRAC: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha_hat: f64,
    pub alpha_stderr: f64,
    pub chi2: f64,
    pub dof: usize,
    pub z_score_alpha_zero: f64,
    pub n_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricDecision {
    MinkowskiConsistent,
    ConformalDetected,
}

impl MetricDecision {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MinkowskiConsistent => "MinkowskiConsistent",
            Self::ConformalDetected => "ConformalDetected",
        }
    }
}

impl std::fmt::Display for MetricDecision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Effective per-record sigmas. All-zero input is noise-free data and gets the
/// nominal [`NOISELESS_SIGMA_FRAC`]; a mix of zero and non-zero is an error.
fn effective_sigmas(records: &[TrackingRecord]) -> Result<Vec<f64>> {
    if records.iter().all(|r| r.sigma_frac == 0.0) {
        return Ok(vec![NOISELESS_SIGMA_FRAC; records.len()]);
    }
    records
        .iter()
        .enumerate()
        .map(|(index, r)| {
            if r.sigma_frac.is_finite() && r.sigma_frac > 0.0 {
                Ok(r.sigma_frac)
            } else {
                Err(Error::ZeroSigma { index })
            }
        })
        .collect()
}

fn check_design(records: &[TrackingRecord]) -> Result<()> {
    if records.len() < 2 {
        return Err(Error::DegenerateDesign(format!(
            "need at least 2 records, got {}",
            records.len()
        )));
    }
    let first = records[0].range_true;
    if records.iter().all(|r| r.range_true == first) {
        return Err(Error::DegenerateDesign("all ranges are equal".into()));
    }
    Ok(())
}

/// Closed-form weighted fit of `y = α r`.
pub fn fit_alpha(records: &[TrackingRecord], c: f64) -> Result<FitResult> {
    check_design(records)?;
    let sigmas = effective_sigmas(records)?;
    let ys: Vec<f64> = records
        .iter()
        .map(|r| residual_velocity(r.doppler_frac_meas, r.range_rate_true, c))
        .collect();
    Ok(fit_residuals(records, &sigmas, &ys, c))
}

fn fit_residuals(records: &[TrackingRecord], sigmas: &[f64], ys: &[f64], c: f64) -> FitResult {
    let mut swrr = 0.0;
    let mut swry = 0.0;
    for ((rec, &sigma), &y) in records.iter().zip(sigmas).zip(ys) {
        let w = (c * sigma).powi(-2);
        swrr += w * rec.range_true * rec.range_true;
        swry += w * rec.range_true * y;
    }
    let alpha_hat = swry / swrr;
    let alpha_stderr = swrr.sqrt().recip();
    let chi2 = records
        .iter()
        .zip(sigmas)
        .zip(ys)
        .map(|((rec, &sigma), &y)| ((y - alpha_hat * rec.range_true) / (c * sigma)).powi(2))
        .sum();
    FitResult {
        alpha_hat,
        alpha_stderr,
        chi2,
        dof: records.len() - 1,
        z_score_alpha_zero: alpha_hat / alpha_stderr,
        n_used: records.len(),
    }
}

/// Bootstrap standard deviation of `α̂` over `n_resamples` resamples drawn
/// with replacement. Resample `k` draws from ChaCha20 stream `k` of `seed`.
/// Resamples whose ranges are all equal are skipped.
pub fn bootstrap_alpha(
    records: &[TrackingRecord],
    c: f64,
    n_resamples: usize,
    seed: u64,
) -> Result<f64> {
    if n_resamples < 100 {
        return Err(Error::InvalidInput(format!(
            "bootstrap needs at least 100 resamples, got {n_resamples}"
        )));
    }
    check_design(records)?;
    let sigmas = effective_sigmas(records)?;
    let ys: Vec<f64> = records
        .iter()
        .map(|r| residual_velocity(r.doppler_frac_meas, r.range_rate_true, c))
        .collect();

    let n = records.len();
    let mut estimates = Vec::with_capacity(n_resamples);
    let mut picked_recs = Vec::with_capacity(n);
    let mut picked_sigmas = Vec::with_capacity(n);
    let mut picked_ys = Vec::with_capacity(n);
    for k in 0..n_resamples {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        picked_recs.clear();
        picked_sigmas.clear();
        picked_ys.clear();
        for _ in 0..n {
            let i = rng.random_range(0..n);
            picked_recs.push(records[i]);
            picked_sigmas.push(sigmas[i]);
            picked_ys.push(ys[i]);
        }
        if check_design(&picked_recs).is_err() {
            continue;
        }
        estimates.push(fit_residuals(&picked_recs, &picked_sigmas, &picked_ys, c).alpha_hat);
    }
    if estimates.len() < 2 {
        return Err(Error::DegenerateDesign(
            "fewer than two usable bootstrap resamples".into(),
        ));
    }
    let m = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let var = estimates.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(var.sqrt())
}

pub fn decide_metric(fit: &FitResult, z_threshold: f64) -> MetricDecision {
    if fit.z_score_alpha_zero.abs() > z_threshold {
        MetricDecision::ConformalDetected
    } else {
        MetricDecision::MinkowskiConsistent
    }
}
