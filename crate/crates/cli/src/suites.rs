//! Randomized property suites over admissible events.
//!
//! Events are drawn in geometric units with magnitudes spread over six
//! decades, and group parameters are scaled so that `|β₄|·(|x⁴| + r)` stays
//! below a per-suite reach. Every error is measured against the natural scale
//! of the quantity compared, so results do not depend on the event magnitude.

use std::fmt;

use confdop_core::conformal::{
    differential_map, flow_oracle, hill_transform, interval_scale, invariant_ratio,
    transform_finite, Displacement, Event, FlowOptions, GroupParameter,
};
use confdop_core::SPEED_OF_LIGHT;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

pub const GROUP_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-9;
pub const METRIC_TOL: f64 = 1e-12;
pub const INVARIANT_TOL: f64 = 1e-12;
pub const MIN_HILL_ORDER: f64 = 1.9;

/// Upper bound of `|β₄|·(|x⁴| + r)` for the oracle comparison.
pub const ORACLE_REACH: f64 = 0.3;

const MAX_DRAWS_PER_CASE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Group,
    Oracle,
    Hill,
    Metric,
    Invariant,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Self::Group => "group",
            Self::Oracle => "oracle",
            Self::Hill => "hill",
            Self::Metric => "metric",
            Self::Invariant => "invariant",
        }
    }

    pub fn default_cases(self) -> usize {
        match self {
            Self::Oracle => 100,
            Self::Hill => HILL_GRID_R.len() * HILL_GRID_T.len(),
            _ => 10_000,
        }
    }

    /// Pass threshold: a relative tolerance, or the minimum order for `hill`.
    pub fn default_threshold(self) -> f64 {
        match self {
            Self::Group => GROUP_TOL,
            Self::Oracle => ORACLE_TOL,
            Self::Hill => MIN_HILL_ORDER,
            Self::Metric => METRIC_TOL,
            Self::Invariant => INVARIANT_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    pub threshold: f64,
    /// Largest relative error, or the smallest empirical order for `hill`.
    pub worst: f64,
    pub worst_case: String,
    /// Hill only: max deviation at each α of the halving ladder.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub deviations: Vec<(f64, f64)>,
    pub passed: bool,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        if self.suite == Suite::Hill {
            writeln!(
                f,
                "suite hill: {} alpha values, event grid of {} points",
                self.deviations.len(),
                self.cases
            )?;
            for (alpha, dev) in &self.deviations {
                writeln!(f, "  alpha {alpha:.6e}  max deviation {dev:.6e}")?;
            }
            write!(
                f,
                "{verdict}: min empirical order {:.4} (need >= {}) at {}",
                self.worst, self.threshold, self.worst_case
            )
        } else {
            write!(
                f,
                "suite {}: {} cases, seed {}\n{verdict}: worst relative error {:.3e} (tol {:e}) at {}",
                self.suite.name(),
                self.cases,
                self.seed,
                self.worst,
                self.threshold,
                self.worst_case
            )
        }
    }
}

struct Worst {
    err: f64,
    case: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            err: 0.0,
            case: "none".into(),
        }
    }

    fn update(&mut self, err: f64, case: impl FnOnce() -> String) {
        // The first NaN sticks so that it surfaces as a failure.
        if self.err.is_nan() {
            return;
        }
        if err.is_nan() || err > self.err {
            self.err = err;
            self.case = case();
        }
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Event with magnitude in `[1e-3, 1e3]` and `r >= r_min`.
fn sample_event(rng: &mut ChaCha20Rng, r_min: f64) -> Event {
    loop {
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let r = scale * rng.random_range(0.0..1.0);
        let x4 = scale * rng.random_range(-1.0..1.0);
        if r >= r_min && r + x4.abs() > 0.0 {
            return Event::new(r, x4).expect("finite non-negative radius");
        }
    }
}

/// `β₄` with `|β₄|·scale <= reach`.
fn sample_beta(rng: &mut ChaCha20Rng, scale: f64, reach: f64) -> GroupParameter {
    let beta = rng.random_range(-reach..=reach) / scale;
    GroupParameter::geometric(beta).expect("finite beta")
}

fn describe(p: &GroupParameter, e: &Event) -> String {
    format!("beta4={:e}, r={:e}, x4={:e}", p.beta4(), e.r(), e.x4())
}

fn event_gap(a: &Event, b: &Event) -> f64 {
    (a.r() - b.r()).abs().max((a.x4() - b.x4()).abs()) / b.scale()
}

fn finish(suite: Suite, seed: u64, cases: usize, threshold: f64, worst: Worst) -> SuiteReport {
    SuiteReport {
        suite,
        seed,
        cases,
        threshold,
        worst: worst.err,
        passed: worst.err <= threshold,
        worst_case: worst.case,
        deviations: Vec::new(),
    }
}

/// `T(β₁)∘T(β₂)` against `T(β₁ + β₂)`.
pub fn group_law(cases: usize, seed: u64, tol: f64) -> SuiteReport {
    let mut rng = rng(seed);
    let mut worst = Worst::new();
    for _ in 0..cases {
        for _ in 0..MAX_DRAWS_PER_CASE {
            let e = sample_event(&mut rng, 0.0);
            let p1 = sample_beta(&mut rng, e.scale(), 0.2);
            let p2 = sample_beta(&mut rng, e.scale(), 0.2);
            let stepped = transform_finite(&p2, &e).and_then(|m| transform_finite(&p1, &m));
            let direct = transform_finite(&p1.compose(&p2), &e);
            if let (Ok(stepped), Ok(direct)) = (stepped, direct) {
                worst.update(event_gap(&stepped, &direct), || {
                    format!(
                        "beta1={:e}, beta2={:e}, r={:e}, x4={:e}",
                        p1.beta4(),
                        p2.beta4(),
                        e.r(),
                        e.x4()
                    )
                });
                break;
            }
        }
    }
    finish(Suite::Group, seed, cases, tol, worst)
}

/// Closed form against RK4 integration of the generator.
pub fn oracle(cases: usize, seed: u64, tol: f64) -> SuiteReport {
    let mut rng = rng(seed);
    let mut worst = Worst::new();
    let opts = FlowOptions::default();
    for _ in 0..cases {
        let e = sample_event(&mut rng, 0.0);
        let p = sample_beta(&mut rng, e.scale(), ORACLE_REACH);
        let err = match (transform_finite(&p, &e), flow_oracle(&p, &e, &opts)) {
            (Ok(exact), Ok(flowed)) => event_gap(&flowed, &exact),
            _ => f64::NAN,
        };
        worst.update(err, || describe(&p, &e));
    }
    finish(Suite::Oracle, seed, cases, tol, worst)
}

/// `ds'²` from the differential map against `γ² ds²`. One case in four is a
/// null displacement, which must map to null.
pub fn metric(cases: usize, seed: u64, tol: f64) -> SuiteReport {
    let mut rng = rng(seed);
    let mut worst = Worst::new();
    for i in 0..cases {
        let e = sample_event(&mut rng, 0.0);
        let p = sample_beta(&mut rng, e.scale(), ORACLE_REACH);
        let size = e.scale() * 10f64.powf(rng.random_range(-6.0..0.0));
        let d = if i % 4 == 0 {
            let dx4 = size * rng.random_range(-1.0..1.0);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            Displacement::new(sign * dx4, dx4)
        } else {
            Displacement::new(
                size * rng.random_range(-1.0..1.0),
                size * rng.random_range(-1.0..1.0),
            )
        };
        let err = match (differential_map(&p, &e, d), interval_scale(&p, &e)) {
            (Ok(dp), Ok(g2)) => {
                let signed = |d: &Displacement| (d.dx4 - d.dr) * (d.dx4 + d.dr);
                let scale = g2 * (d.dr * d.dr + d.dx4 * d.dx4);
                if scale == 0.0 {
                    0.0
                } else {
                    (signed(&dp) - g2 * signed(&d)).abs() / scale
                }
            }
            _ => f64::NAN,
        };
        worst.update(err, || {
            format!("{}, dr={:e}, dx4={:e}", describe(&p, &e), d.dr, d.dx4)
        });
    }
    finish(Suite::Metric, seed, cases, tol, worst)
}

/// `s²/r` before and after the map, relative to `(r² + x⁴²)/r`.
pub fn invariant(cases: usize, seed: u64, tol: f64) -> SuiteReport {
    let mut rng = rng(seed);
    let mut worst = Worst::new();
    for _ in 0..cases {
        let e = sample_event(&mut rng, 1e-6);
        let p = sample_beta(&mut rng, e.scale(), ORACLE_REACH);
        let err = match transform_finite(&p, &e).and_then(|m| invariant_ratio(&m)) {
            Ok(after) => {
                let before = invariant_ratio(&e).expect("r > 0");
                let scale = (e.r() * e.r() + e.x4() * e.x4()) / e.r();
                (after - before).abs() / scale
            }
            Err(_) => f64::NAN,
        };
        worst.update(err, || describe(&p, &e));
    }
    finish(Suite::Invariant, seed, cases, tol, worst)
}

/// Radii of the Hill grid, in light-seconds.
pub const HILL_GRID_R: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
/// Times of the Hill grid, in seconds.
pub const HILL_GRID_T: [f64; 5] = [-2.0, -0.7, 0.0, 0.4, 1.5];
/// Largest α of the halving ladder, in 1/s.
pub const HILL_ALPHA0: f64 = 0.02;
pub const HILL_HALVINGS: usize = 3;

/// Max over the grid of the first-order map's deviation from the finite map,
/// relative to `r + c|t|`.
pub fn hill_deviation(alpha: f64) -> f64 {
    let c = SPEED_OF_LIGHT;
    let p = GroupParameter::from_alpha(alpha, c).expect("finite alpha");
    let mut worst: f64 = 0.0;
    for r in HILL_GRID_R.map(|r| r * c) {
        for t in HILL_GRID_T {
            let e = Event::from_time(r, t, c).expect("valid grid event");
            let exact = match transform_finite(&p, &e) {
                Ok(x) => x,
                Err(_) => return f64::NAN,
            };
            let (hr, ht) = hill_transform(&p, r, t);
            let gap = (exact.r() - hr).abs().max((exact.x4() - c * ht).abs());
            worst = worst.max(gap / e.scale());
        }
    }
    worst
}

/// Empirical convergence order of the first-order map over α-halvings.
pub fn hill(min_order: f64) -> SuiteReport {
    let alphas: Vec<f64> = (0..=HILL_HALVINGS)
        .map(|k| HILL_ALPHA0 / f64::powi(2.0, k as i32))
        .collect();
    let deviations: Vec<(f64, f64)> = alphas.iter().map(|&a| (a, hill_deviation(a))).collect();
    let mut worst = f64::INFINITY;
    let mut worst_case = String::new();
    for w in deviations.windows(2) {
        let order = (w[0].1 / w[1].1).log2();
        if order.is_nan() || order < worst {
            worst = order;
            worst_case = format!("alpha {:e} -> {:e}", w[0].0, w[1].0);
        }
    }
    SuiteReport {
        suite: Suite::Hill,
        seed: 0,
        cases: HILL_GRID_R.len() * HILL_GRID_T.len(),
        threshold: min_order,
        worst,
        worst_case,
        deviations,
        passed: worst >= min_order,
    }
}

pub fn run(suite: Suite, cases: usize, seed: u64, threshold: f64) -> SuiteReport {
    match suite {
        Suite::Group => group_law(cases, seed, threshold),
        Suite::Oracle => oracle(cases, seed, threshold),
        Suite::Hill => hill(threshold),
        Suite::Metric => metric(cases, seed, threshold),
        Suite::Invariant => invariant(cases, seed, threshold),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_at_default_thresholds() {
        for suite in [Suite::Group, Suite::Metric, Suite::Invariant] {
            let rep = run(suite, 500, 1, suite.default_threshold());
            assert!(rep.passed, "{rep}");
        }
        assert!(oracle(5, 1, ORACLE_TOL).passed);
        assert!(hill(MIN_HILL_ORDER).passed);
    }

    #[test]
    fn impossible_tolerance_fails_and_names_a_case() {
        let rep = group_law(200, 3, 0.0);
        assert!(!rep.passed);
        assert!(rep.worst_case.contains("beta1="), "{}", rep.worst_case);
    }

    #[test]
    fn nan_errors_are_reported_as_failures() {
        let mut w = Worst::new();
        w.update(1e-3, || "a".into());
        w.update(f64::NAN, || "b".into());
        w.update(1.0, || "c".into());
        assert!(w.err.is_nan());
        assert_eq!(w.case, "b");
    }

    #[test]
    fn same_seed_same_report() {
        let a = group_law(100, 9, GROUP_TOL);
        let b = group_law(100, 9, GROUP_TOL);
        assert_eq!(a.worst.to_bits(), b.worst.to_bits());
        assert_eq!(a.worst_case, b.worst_case);
    }
}
