//! Seeded two-way Doppler and ranging simulation of a radially coasting probe.
//!
//! Observables follow the one-way conformal Doppler model `v + α r`; with
//! `alpha_true = 0` they reduce to the usual Minkowski relation. The noise on
//! epoch `i` comes from a ChaCha20 stream selected by `(seed, i)`, so records
//! depend only on the config and never on evaluation order.

mod csv;

pub use self::csv::{read_csv, write_csv, CSV_HEADER};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::conformal::GroupParameter;
use crate::error::{Error, Result};
use crate::extended::DoubleDouble;
use crate::wave::doppler_fraction_conformal;

/// Identifier of the noise generator, recorded in run manifests.
pub const RNG_ALGORITHM: &str =
    "chacha20/seed_from_u64(seed)/stream=epoch_index; rand_distr-0.5 ziggurat StandardNormal; draws: doppler, range";

/// Relative resolution of a fractional Doppler observable. Residuals smaller
/// than this fraction of the full Doppler velocity are indistinguishable from
/// decimal round-off and read as zero.
pub const DOPPLER_RESOLUTION: f64 = 1e-28;

fn default_c() -> f64 {
    crate::SPEED_OF_LIGHT
}

fn default_sigma_frac() -> f64 {
    crate::DOPPLER_ACCURACY
}

/// Everything a simulation depends on. SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_c")]
    pub c: f64,
    pub alpha_true: f64,
    pub r0: f64,
    pub v_radial: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub n_obs: usize,
    #[serde(default = "default_sigma_frac")]
    pub sigma_frac: f64,
    #[serde(default)]
    pub sigma_range: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    /// Probe coasting outward at 12 km/s from 20 AU to 70 AU, tracked at
    /// `n_obs` uniform epochs with 1e-12 fractional Doppler noise.
    pub fn pioneer_like(alpha_true: f64, n_obs: usize, seed: u64) -> Self {
        let v_radial = 12_000.0;
        let r0 = 20.0 * crate::ASTRONOMICAL_UNIT;
        let span = 50.0 * crate::ASTRONOMICAL_UNIT / v_radial;
        Self {
            c: crate::SPEED_OF_LIGHT,
            alpha_true,
            r0,
            v_radial,
            t_start: 0.0,
            t_end: span,
            n_obs,
            sigma_frac: crate::DOPPLER_ACCURACY,
            sigma_range: 1.0,
            seed,
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.sigma_frac = 0.0;
        self.sigma_range = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| {
            Err(Error::ConfigInvalid {
                key: key.into(),
                reason,
            })
        };
        let finite = [
            ("c", self.c),
            ("alpha_true", self.alpha_true),
            ("r0", self.r0),
            ("v_radial", self.v_radial),
            ("t_start", self.t_start),
            ("t_end", self.t_end),
            ("sigma_frac", self.sigma_frac),
            ("sigma_range", self.sigma_range),
        ];
        for (key, value) in finite {
            if !value.is_finite() {
                return bad(key, format!("must be finite, got {value}"));
            }
        }
        if self.c <= 0.0 {
            return bad("c", format!("must be > 0, got {}", self.c));
        }
        if self.n_obs < 2 {
            return bad("n_obs", format!("must be >= 2, got {}", self.n_obs));
        }
        if self.t_end <= self.t_start {
            return bad(
                "t_end",
                format!("must exceed t_start ({} <= {})", self.t_end, self.t_start),
            );
        }
        if self.sigma_frac < 0.0 {
            return bad(
                "sigma_frac",
                format!("must be >= 0, got {}", self.sigma_frac),
            );
        }
        if self.sigma_range < 0.0 {
            return bad(
                "sigma_range",
                format!("must be >= 0, got {}", self.sigma_range),
            );
        }
        if self.r0 <= 0.0 {
            return bad("r0", format!("must be > 0, got {}", self.r0));
        }
        let r_end = self.r0 + self.v_radial * (self.t_end - self.t_start);
        if r_end <= 0.0 {
            return bad("v_radial", format!("range reaches {r_end} m before t_end"));
        }
        Ok(())
    }

    fn group_parameter(&self) -> Result<GroupParameter> {
        GroupParameter::from_alpha(self.alpha_true, self.c)
    }

    /// Epoch of observation `index` on the uniform grid.
    pub fn epoch(&self, index: usize) -> f64 {
        if index + 1 >= self.n_obs {
            return self.t_end;
        }
        let frac = index as f64 / (self.n_obs - 1) as f64;
        self.t_start + (self.t_end - self.t_start) * frac
    }
}

/// One epoch of simulated observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingRecord {
    pub epoch: f64,
    pub range_true: f64,
    pub range_rate_true: f64,
    pub range_meas: f64,
    pub doppler_frac_meas: DoubleDouble,
    pub sigma_frac: f64,
}

/// Observed-minus-expected Doppler velocity at one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyResidual {
    pub epoch: f64,
    pub residual_velocity: f64,
    pub residual_rate: f64,
}

/// Constant-rate radial coast: `(r0 + v (epoch - t_start), v)`.
pub fn make_trajectory(cfg: &SimConfig, epoch: f64) -> Result<(f64, f64)> {
    if !(cfg.t_start <= epoch && epoch <= cfg.t_end) {
        return Err(Error::EpochOutOfRange {
            epoch,
            start: cfg.t_start,
            end: cfg.t_end,
        });
    }
    Ok((cfg.r0 + cfg.v_radial * (epoch - cfg.t_start), cfg.v_radial))
}

fn epoch_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Produces `n_obs` records at uniform epochs. Bit-identical for equal configs.
pub fn simulate(cfg: &SimConfig) -> Result<Vec<TrackingRecord>> {
    cfg.validate()?;
    let p = cfg.group_parameter()?;
    (0..cfg.n_obs)
        .map(|i| {
            let epoch = cfg.epoch(i);
            let (range, rate) = make_trajectory(cfg, epoch)?;
            let mut rng = epoch_rng(cfg.seed, i);
            let z_doppler: f64 = rng.sample(StandardNormal);
            let z_range: f64 = rng.sample(StandardNormal);
            let mut frac = doppler_fraction_conformal(&p, range, rate);
            if cfg.sigma_frac > 0.0 {
                frac = frac.add_f64(cfg.sigma_frac * z_doppler);
            }
            Ok(TrackingRecord {
                epoch,
                range_true: range,
                range_rate_true: rate,
                range_meas: range + cfg.sigma_range * z_range,
                doppler_frac_meas: frac,
                sigma_frac: cfg.sigma_frac,
            })
        })
        .collect()
}

/// `c ΔΛ/Λref - expected_velocity`, formed by differencing fractional shifts
/// in double-double before scaling by `c`.
pub fn residual_velocity(frac_meas: DoubleDouble, expected_velocity: f64, c: f64) -> f64 {
    let expected = DoubleDouble::from_f64(expected_velocity).div_f64(c);
    let y = (frac_meas - expected).mul_f64(c).to_f64();
    if y.abs() <= DOPPLER_RESOLUTION * (frac_meas.hi() * c).abs() {
        0.0
    } else {
        y
    }
}

/// The Minkowski expectation: the Doppler velocity equals the range rate.
pub fn minkowski_expectation(record: &TrackingRecord) -> f64 {
    record.range_rate_true
}

/// Residuals of the records against an expected Doppler velocity model.
pub fn anomaly_residuals<F>(
    records: &[TrackingRecord],
    c: f64,
    expected: F,
) -> Result<Vec<AnomalyResidual>>
where
    F: Fn(&TrackingRecord) -> f64,
{
    records
        .iter()
        .enumerate()
        .map(|(index, rec)| {
            if rec.range_true == 0.0 {
                return Err(Error::ZeroRange { index });
            }
            let residual_velocity = residual_velocity(rec.doppler_frac_meas, expected(rec), c);
            Ok(AnomalyResidual {
                epoch: rec.epoch,
                residual_velocity,
                residual_rate: residual_velocity / rec.range_true,
            })
        })
        .collect()
}

/// Side-by-side comparison of an anomalous drift rate and a Hubble rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignComparison {
    pub anomaly_rate: f64,
    pub hubble_rate: f64,
    /// `|anomaly| / |hubble|`; zero when the anomaly is zero.
    pub magnitude_ratio: f64,
    pub opposite_sign: bool,
    pub caveat: String,
}

/// Notes that the sign of a drift depends on which time variable the
/// wavelength shifts are referred to.
pub const TIME_VARIABLE_CAVEAT: &str = "sign depends on whether the uplink and downlink wavelength shifts are referred to the Minkowski time t or the conformal time t'; this simulation uses the one-way model and does not resolve the two-way bookkeeping";

pub fn sign_comparison_report(anomaly_rate: f64, hubble_rate: f64) -> SignComparison {
    let magnitude_ratio = if anomaly_rate == 0.0 {
        0.0
    } else {
        anomaly_rate.abs() / hubble_rate.abs()
    };
    SignComparison {
        anomaly_rate,
        hubble_rate,
        magnitude_ratio,
        opposite_sign: anomaly_rate * hubble_rate < 0.0,
        caveat: TIME_VARIABLE_CAVEAT.into(),
    }
}
