//! Fixed-step RK4 integration of the `C4` vector field.
//!
//! Integrates `dr/dτ = 2 x⁴ r`, `dx⁴/dτ = r² + (x⁴)²` from `τ = 0` to `τ = β₄`.
//! Shares no code with the closed-form transformation and serves as its oracle.

use super::{Event, GroupParameter};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Number of RK4 steps over `[0, β₄]`.
    pub steps: usize,
    /// Divergence is declared once the state norm exceeds
    /// `divergence_factor * (1 + initial norm)`.
    pub divergence_factor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            steps: 100_000,
            divergence_factor: 1e6,
        }
    }
}

fn field([r, x4]: [f64; 2]) -> [f64; 2] {
    [2.0 * x4 * r, r * r + x4 * x4]
}

fn axpy(y: [f64; 2], h: f64, k: [f64; 2]) -> [f64; 2] {
    [y[0] + h * k[0], y[1] + h * k[1]]
}

fn rk4_step(y: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = field(y);
    let k2 = field(axpy(y, 0.5 * h, k1));
    let k3 = field(axpy(y, 0.5 * h, k2));
    let k4 = field(axpy(y, h, k3));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Applies `exp(β₄ C4)` to `e` by numerical integration of the generator.
pub fn flow_oracle(p: &GroupParameter, e: &Event, opts: &FlowOptions) -> Result<Event> {
    if opts.steps == 0 {
        return Err(Error::InvalidInput("flow needs at least one step".into()));
    }
    let mut y = [e.r(), e.x4()];
    let bound = opts.divergence_factor * (1.0 + y[0].hypot(y[1]));
    let h = p.beta4() / opts.steps as f64;
    if h == 0.0 {
        return Ok(*e);
    }
    for step in 1..=opts.steps {
        y = rk4_step(y, h);
        let norm = y[0].hypot(y[1]);
        if !norm.is_finite() || norm > bound || y[0] < 0.0 {
            return Err(Error::StepDivergence { step, norm });
        }
    }
    Ok(e.with_coords(y[0], y[1]))
}
