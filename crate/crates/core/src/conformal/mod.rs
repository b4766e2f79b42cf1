//! Finite special conformal transformations generated by `C4`.
//!
//! Events are radial light-cone coordinates `(r, x⁴)` with `x⁴ = c t`. The
//! group element `exp(β₄ C4)` acts as
//!
//! ```text
//! r  -> γ r
//! x⁴ -> γ (x⁴ - β₄ s²),      s² = (x⁴)² - r²,
//! γ  = 1 / (1 - 2 β₄ x⁴ + β₄² s²)
//! ```
//!
//! In null coordinates `u = x⁴ + r`, `v = x⁴ - r` the denominator factors as
//! `(1 - β₄ u)(1 - β₄ v)`, and each factor is the Möbius flow `u -> u / (1 - β₄ u)`.
//! An event is admissible for a given `β₄` when both factors are positive: the
//! flow from the identity to `β₄` then never touches the singular surface.

mod flow;
mod hill;

pub use flow::{flow_oracle, FlowOptions};
pub use hill::{hill_differentials, hill_transform, hill_velocity};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which the conformal denominator counts as zero.
pub const SINGULAR_EPS: f64 = 1e-12;

/// Tolerance on the Euclidean norm of a direction vector.
pub const DIRECTION_NORM_TOL: f64 = 1e-12;

/// A point on an observer's light-cone coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    r: f64,
    x4: f64,
    direction: Option<[f64; 3]>,
}

impl Event {
    /// Radial distance `r ≥ 0` and time coordinate `x⁴ = c t`, both in metres.
    pub fn new(r: f64, x4: f64) -> Result<Self> {
        if !r.is_finite() || !x4.is_finite() {
            return Err(Error::InvalidInput(format!(
                "event coordinates must be finite (r = {r}, x4 = {x4})"
            )));
        }
        if r < 0.0 {
            return Err(Error::InvalidInput(format!("radius must be >= 0, got {r}")));
        }
        Ok(Self {
            r,
            x4,
            direction: None,
        })
    }

    /// Builds an event from a radius and a time in seconds.
    pub fn from_time(r: f64, t: f64, c: f64) -> Result<Self> {
        Self::new(r, c * t)
    }

    /// Attaches a spatial unit direction. The transformations never touch it.
    pub fn with_direction(mut self, direction: [f64; 3]) -> Result<Self> {
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > DIRECTION_NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "direction must be a unit vector, norm is {norm}"
            )));
        }
        self.direction = Some(direction);
        Ok(self)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn x4(&self) -> f64 {
        self.x4
    }

    pub fn direction(&self) -> Option<[f64; 3]> {
        self.direction
    }

    /// Time coordinate in seconds.
    pub fn time(&self, c: f64) -> f64 {
        self.x4 / c
    }

    /// Signed `s² = (x⁴)² - r²`, evaluated in factored form.
    pub fn interval_squared(&self) -> f64 {
        (self.x4 - self.r) * (self.x4 + self.r)
    }

    /// `r + |x⁴|`, the natural length scale of the event.
    pub fn scale(&self) -> f64 {
        self.r + self.x4.abs()
    }

    fn with_coords(&self, r: f64, x4: f64) -> Self {
        Self {
            r,
            x4,
            direction: self.direction,
        }
    }
}

/// Group parameter of `exp(β₄ C4)`.
///
/// Whichever of `β₄` (1/m) or `α = 2 c β₄` (1/s) the caller supplies is kept
/// verbatim; the other is derived once at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupParameter {
    beta4: f64,
    alpha: f64,
    c: f64,
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "speed of light must be > 0, got {c}"
        )))
    }
}

impl GroupParameter {
    pub fn from_beta4(beta4: f64, c: f64) -> Result<Self> {
        check_c(c)?;
        if !beta4.is_finite() {
            return Err(Error::InvalidInput(format!(
                "beta4 must be finite, got {beta4}"
            )));
        }
        Ok(Self {
            beta4,
            alpha: 2.0 * c * beta4,
            c,
        })
    }

    pub fn from_alpha(alpha: f64, c: f64) -> Result<Self> {
        check_c(c)?;
        if !alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "alpha must be finite, got {alpha}"
            )));
        }
        Ok(Self {
            beta4: alpha / (2.0 * c),
            alpha,
            c,
        })
    }

    /// Parameter in geometric units with `c` set to the SI speed of light.
    pub fn geometric(beta4: f64) -> Result<Self> {
        Self::from_beta4(beta4, crate::SPEED_OF_LIGHT)
    }

    pub fn identity(c: f64) -> Result<Self> {
        Self::from_beta4(0.0, c)
    }

    /// β₄ in 1/m.
    pub fn beta4(&self) -> f64 {
        self.beta4
    }

    /// α = 2 c β₄ in 1/s.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Group inverse.
    pub fn negated(&self) -> Self {
        Self {
            beta4: -self.beta4,
            alpha: -self.alpha,
            c: self.c,
        }
    }

    /// Group product. Parameters of a one-parameter group add.
    pub fn compose(&self, other: &Self) -> Self {
        let beta4 = self.beta4 + other.beta4;
        Self {
            beta4,
            alpha: 2.0 * self.c * beta4,
            c: self.c,
        }
    }
}

/// The conformal factor γ at an event.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ConformalFactor(f64);

impl ConformalFactor {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Coefficients of the differential map `dr' = γ²(A dr + B dx⁴)`, `dx⁴' = γ²(B dr + A dx⁴)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentialCoeffs {
    pub a: f64,
    pub b: f64,
    pub gamma2: f64,
}

/// A radial line element `(dr, dx⁴)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    pub dr: f64,
    pub dx4: f64,
}

impl Displacement {
    pub fn new(dr: f64, dx4: f64) -> Self {
        Self { dr, dx4 }
    }

    /// Minkowski line element `|dr² - (dx⁴)²|`, evaluated in factored form so
    /// that null displacements give exactly zero.
    pub fn line_element(&self) -> f64 {
        ((self.dr - self.dx4) * (self.dr + self.dx4)).abs()
    }
}

fn denominator(beta: f64, e: &Event) -> f64 {
    1.0 - 2.0 * beta * e.x4 + beta * beta * e.interval_squared()
}

/// Conformal factor `γ = 1 / (1 - 2β₄x⁴ + β₄² s²)`.
///
/// Fails with [`Error::SingularTransform`] within [`SINGULAR_EPS`] (relative to
/// `1 + |2β₄x⁴| + |β₄² s²|`) of the singular surface, and with
/// [`Error::DomainCrossing`] when the event lies beyond it.
pub fn gamma(p: &GroupParameter, e: &Event) -> Result<ConformalFactor> {
    let beta = p.beta4;
    let s2 = e.interval_squared();
    let d = denominator(beta, e);
    let scale = 1.0 + (2.0 * beta * e.x4).abs() + (beta * beta * s2).abs();
    if d.abs() < SINGULAR_EPS * scale {
        return Err(Error::SingularTransform { denominator: d });
    }
    // d > 0 with both null factors negative means the flow passed through two
    // singularities on the way here.
    let outgoing = 1.0 - beta * (e.x4 + e.r);
    if d < 0.0 || outgoing < 0.0 {
        return Err(Error::DomainCrossing { denominator: d });
    }
    Ok(ConformalFactor(1.0 / d))
}

/// Finite transformation `(r, x⁴) -> (γ r, γ (x⁴ - β₄ s²))`.
pub fn transform_finite(p: &GroupParameter, e: &Event) -> Result<Event> {
    let g = gamma(p, e)?.0;
    let s2 = e.interval_squared();
    Ok(e.with_coords(g * e.r, g * (e.x4 - p.beta4 * s2)))
}

/// Inverse transformation: the finite map with the parameter negated.
pub fn transform_inverse_finite(p: &GroupParameter, e_primed: &Event) -> Result<Event> {
    transform_finite(&p.negated(), e_primed)
}

/// `A`, `B` and `γ²` at an event. `γ²` is infinite on the singular surface.
pub fn differential_coeffs(p: &GroupParameter, e: &Event) -> DifferentialCoeffs {
    let beta = p.beta4;
    let (r, x4) = (e.r, e.x4);
    let a = 1.0 - 2.0 * beta * x4 + beta * beta * (r * r + x4 * x4);
    let b = 2.0 * beta * r * (1.0 - beta * x4);
    let d = denominator(beta, e);
    DifferentialCoeffs {
        a,
        b,
        gamma2: 1.0 / (d * d),
    }
}

/// Pushes a displacement at `e` through the differential of the finite map.
pub fn differential_map(p: &GroupParameter, e: &Event, d: Displacement) -> Result<Displacement> {
    let g = gamma(p, e)?.0;
    let g2 = g * g;
    let DifferentialCoeffs { a, b, .. } = differential_coeffs(p, e);
    Ok(Displacement {
        dr: g2 * (a * d.dr + b * d.dx4),
        dx4: g2 * (b * d.dr + a * d.dx4),
    })
}

/// Maps a world-line slope `dr/dx⁴` at `e` to `dr'/dx⁴'`. `±1` are fixed points.
pub fn slope_transform(p: &GroupParameter, e: &Event, slope: f64) -> Result<f64> {
    let DifferentialCoeffs { a, b, .. } = differential_coeffs(p, e);
    let den = b * slope + a;
    if den.abs() < SINGULAR_EPS * (a.abs() + (b * slope).abs()) {
        return Err(Error::SlopeSingular {
            magnitude: den.abs(),
        });
    }
    Ok((a * slope + b) / den)
}

/// `s² / r`, invariant under every element of the group.
pub fn invariant_ratio(e: &Event) -> Result<f64> {
    if e.r == 0.0 {
        return Err(Error::ZeroRadius);
    }
    Ok(e.interval_squared() / e.r)
}

/// Factor `γ²` by which squared line elements rescale at `e`.
pub fn interval_scale(p: &GroupParameter, e: &Event) -> Result<f64> {
    let g = gamma(p, e)?.0;
    Ok(g * g)
}

/// Factor `γ` by which the finite `s²` of `e` rescales.
pub fn finite_interval_scale(p: &GroupParameter, e: &Event) -> Result<f64> {
    gamma(p, e).map(ConformalFactor::value)
}
