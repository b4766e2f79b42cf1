//! Inbound null rays, wavelength mapping, and the Doppler / Hubble relations.
//!
//! Primed quantities belong to the conformal description, unprimed ones to the
//! Minkowski description. Emission happens on the past light cone, so times are
//! negative and the receiver sits at the common origin. Wavelengths are taken
//! to be the radial displacement `|dr|` of a wave crest.
//!
//! All Doppler quantities are carried as velocities `c ΔΛ / Λref`.

use serde::{Deserialize, Serialize};

use crate::conformal::{transform_finite, transform_inverse_finite, Event, GroupParameter};
use crate::error::{Error, Result};
use crate::extended::DoubleDouble;

/// A source event on the past light cone, in both descriptions (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionEvent {
    pub r_in: f64,
    pub t_in: f64,
    pub primed_r_in: f64,
    pub primed_t_in: f64,
}

impl EmissionEvent {
    /// Pairs a Minkowski emission event with its image under the finite map.
    pub fn from_unprimed(p: &GroupParameter, r_in: f64, t_in: f64) -> Result<Self> {
        let c = p.c();
        let e = Event::from_time(r_in, t_in, c)?;
        let ep = transform_finite(p, &e)?;
        Self::checked(r_in, t_in, ep.r(), ep.time(c))
    }

    /// Pairs a conformal emission event with its preimage under the finite map.
    pub fn from_primed(p: &GroupParameter, primed_r_in: f64, primed_t_in: f64) -> Result<Self> {
        let c = p.c();
        let ep = Event::from_time(primed_r_in, primed_t_in, c)?;
        let e = transform_inverse_finite(p, &ep)?;
        Self::checked(e.r(), e.time(c), primed_r_in, primed_t_in)
    }

    fn checked(r_in: f64, t_in: f64, primed_r_in: f64, primed_t_in: f64) -> Result<Self> {
        for t in [t_in, primed_t_in] {
            if t >= 0.0 {
                return Err(Error::NotPastCone { t });
            }
        }
        Ok(Self {
            r_in,
            t_in,
            primed_r_in,
            primed_t_in,
        })
    }
}

/// Wavelength of a crest seen in both descriptions at one point of the ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSample {
    pub lambda_unprimed: f64,
    pub lambda_primed: f64,
    pub r_prime: f64,
    pub t_prime: f64,
}

impl WaveSample {
    pub fn at(p: &GroupParameter, lambda_primed: f64, r_prime: f64, t_prime: f64) -> Result<Self> {
        Ok(Self {
            lambda_unprimed: wavelength_map(p, lambda_primed, r_prime, t_prime)?,
            lambda_primed,
            r_prime,
            t_prime,
        })
    }
}

/// Received wavelength against a laboratory reference at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerObservable {
    lambda_ref: f64,
    lambda_obs: f64,
}

impl DopplerObservable {
    pub fn new(lambda_ref: f64, lambda_obs: f64) -> Result<Self> {
        if !(lambda_ref.is_finite() && lambda_ref > 0.0) || !lambda_obs.is_finite() {
            return Err(Error::InvalidInput(format!(
                "wavelengths must be finite with a positive reference (ref {lambda_ref}, obs {lambda_obs})"
            )));
        }
        Ok(Self {
            lambda_ref,
            lambda_obs,
        })
    }

    pub fn lambda_ref(&self) -> f64 {
        self.lambda_ref
    }

    pub fn lambda_obs(&self) -> f64 {
        self.lambda_obs
    }

    /// `ΔΛ / Λref`.
    pub fn frac_shift(&self) -> f64 {
        (self.lambda_obs - self.lambda_ref) / self.lambda_ref
    }
}

/// Inputs of the Hubble relation `c ΔΛ/Λref = V + H₀ R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubbleInputs {
    pub velocity: f64,
    pub distance: f64,
    pub h0: f64,
    pub alpha: f64,
}

/// Maps a point `(r', t')` of an inbound null ray to `(r, t)`.
///
/// Solves `r = (1 + α|t|) r'`, `t = t' - α (r²/c² + t²)/2` with two fixed-point
/// passes seeded at `(r', t')`, which is exact to first order in `α`. Fails with
/// [`Error::NotConverged`] when the remaining residual exceeds `(α T)² T`, with
/// `T = |t'| + r'/c` the light-travel scale of the point.
pub fn inbound_ray_coords(p: &GroupParameter, r_prime: f64, t_prime: f64) -> Result<(f64, f64)> {
    if t_prime >= 0.0 || t_prime.is_nan() {
        return Err(Error::NotPastCone { t: t_prime });
    }
    let (alpha, c) = (p.alpha(), p.c());
    let c2 = c * c;
    let (mut r, mut t) = (r_prime, t_prime);
    for _ in 0..2 {
        t = t_prime - 0.5 * alpha * (r * r / c2 + t * t);
        r = (1.0 + alpha * t.abs()) * r_prime;
    }

    let travel = t_prime.abs() + r_prime / c;
    let kappa = alpha.abs() * travel;
    let res_t = t - (t_prime - 0.5 * alpha * (r * r / c2 + t * t));
    let res_r = r - (1.0 + alpha * t.abs()) * r_prime;
    let residual = res_t.abs().max(res_r.abs() / c) / travel;
    let bound = (kappa * kappa).max(16.0 * f64::EPSILON);
    if residual.is_nan() || residual > bound {
        return Err(Error::NotConverged { residual, bound });
    }
    Ok((r, t))
}

/// `dr = dr'(1 - α t') - α r' dt'`, `dt = dt'(1 - α t') - α r' dr'/c²`.
///
/// The unprimed `t` appearing in the time relation is replaced by `t'`, which
/// agrees to the first order the relations are valid at.
pub fn inbound_ray_differentials(
    p: &GroupParameter,
    r_prime: f64,
    t_prime: f64,
    dr_prime: f64,
    dt_prime: f64,
) -> (f64, f64) {
    let (alpha, c) = (p.alpha(), p.c());
    let shrink = 1.0 - alpha * t_prime;
    (
        dr_prime * shrink - alpha * r_prime * dt_prime,
        dt_prime * shrink - alpha * r_prime * dr_prime / (c * c),
    )
}

/// `λ = λ' (1 + α (|t'| + r'/c))` for a crest at `(r', t')` on the past cone.
pub fn wavelength_map(
    p: &GroupParameter,
    lambda_primed: f64,
    r_prime: f64,
    t_prime: f64,
) -> Result<f64> {
    if t_prime > 0.0 || (t_prime == 0.0 && r_prime > 0.0) {
        return Err(Error::NotPastCone { t: t_prime });
    }
    Ok(lambda_primed * (1.0 + p.alpha() * (t_prime.abs() + r_prime / p.c())))
}

/// Source velocity in the conformal description, `c ΔΛ / Λref = dr'/dt'`.
pub fn doppler_velocity(obs: &DopplerObservable, c: f64) -> f64 {
    c * obs.frac_shift()
}

/// Doppler velocity predicted for a source at range `r` with radial rate `v`:
/// `dr/dt + α r`. The `O(α v²/c²)` correction is not included.
pub fn doppler_model_conformal(p: &GroupParameter, r: f64, v: f64) -> f64 {
    v + p.alpha() * r
}

/// Fractional shift `(v + α r) / c` carried in double-double precision.
pub fn doppler_fraction_conformal(p: &GroupParameter, r: f64, v: f64) -> DoubleDouble {
    DoubleDouble::sum(v, p.alpha() * r).div_f64(p.c())
}

/// `V + H₀ R`.
pub fn hubble_prediction(h: &HubbleInputs) -> f64 {
    h.velocity + h.h0 * h.distance
}

/// Hubble rate after removing the kinematic conformal part, `H₀ - α`.
pub fn hubble_alpha_correction(h0: f64, alpha: f64) -> f64 {
    h0 - alpha
}
