//! First-order (in `α`) expansion of the finite transformation, in SI units.

use super::GroupParameter;

/// `r' = (1 + α t) r`, `t' = t + α (r²/c² + t²) / 2`.
pub fn hill_transform(p: &GroupParameter, r: f64, t: f64) -> (f64, f64) {
    let (alpha, c) = (p.alpha(), p.c());
    let r_prime = (1.0 + alpha * t) * r;
    let t_prime = t + 0.5 * alpha * (r * r / (c * c) + t * t);
    (r_prime, t_prime)
}

/// `dr' = dr (1 + α t) + α r dt`, `dt' = dt (1 + α t) + α r dr / c²`.
pub fn hill_differentials(p: &GroupParameter, r: f64, t: f64, dr: f64, dt: f64) -> (f64, f64) {
    let (alpha, c) = (p.alpha(), p.c());
    let stretch = 1.0 + alpha * t;
    (
        dr * stretch + alpha * r * dt,
        dt * stretch + alpha * r * dr / (c * c),
    )
}

/// `v' = v + α r (1 - v²/c²)`. Leaves `v = ±c` fixed.
pub fn hill_velocity(p: &GroupParameter, r: f64, v: f64) -> f64 {
    let c = p.c();
    let beta = v / c;
    v + p.alpha() * r * (1.0 - beta) * (1.0 + beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{transform_finite, Event};
    use crate::SPEED_OF_LIGHT as C;

    fn alpha(a: f64) -> GroupParameter {
        GroupParameter::from_alpha(a, C).unwrap()
    }

    #[test]
    fn zero_alpha_is_identity() {
        let p = alpha(0.0);
        assert_eq!(hill_transform(&p, 3.0e8, -4.0), (3.0e8, -4.0));
        assert_eq!(hill_differentials(&p, 3.0e8, -4.0, 1.0, 2.0), (1.0, 2.0));
        assert_eq!(hill_velocity(&p, 3.0e8, 1234.5), 1234.5);
    }

    #[test]
    fn formula_at_time_zero() {
        let a = 1e-3;
        let (r1, t1) = hill_transform(&alpha(a), 1.0, 0.0);
        assert_eq!(r1, 1.0);
        let expected = a * (1.0 / (C * C)) / 2.0;
        assert!((t1 - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn light_speed_is_preserved() {
        let p = alpha(0.37);
        assert_eq!(hill_velocity(&p, 5.0e9, C), C);
        assert_eq!(hill_velocity(&p, 5.0e9, -C), -C);
    }

    #[test]
    fn matches_finite_transform_to_first_order() {
        // Error against the closed form shrinks by ~4 per halving of α.
        let (r, t) = (0.5 * C, 0.8);
        let gap = |a: f64| {
            let p = alpha(a);
            let e = Event::from_time(r, t, C).unwrap();
            let f = transform_finite(&p, &e).unwrap();
            let (hr, ht) = hill_transform(&p, r, t);
            ((f.r() - hr) / r).abs().max((f.time(C) - ht).abs() / t)
        };
        let ratio = gap(0.02) / gap(0.01);
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn differentials_match_the_finite_jacobian_to_first_order() {
        let (r, t) = (0.3 * C, -1.2);
        let a = 1e-4;
        let p = alpha(a);
        let e = Event::from_time(r, t, C).unwrap();
        let d = crate::conformal::differential_map(
            &p,
            &e,
            crate::conformal::Displacement::new(0.25 * C, C),
        )
        .unwrap();
        let (dr, dt) = hill_differentials(&p, r, t, 0.25 * C, 1.0);
        assert!((d.dr - dr).abs() / (0.25 * C) < 10.0 * a * a);
        assert!((d.dx4 / C - dt).abs() < 10.0 * a * a);
    }
}
