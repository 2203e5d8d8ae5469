//! Quadratic upper bounds for single cosine terms `cos(slope·x + phase_rest)`.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

/// `a·(x − b)² + c_off`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSurrogate {
    pub a: f64,
    pub b: f64,
    pub c_off: f64,
}

impl QuadraticSurrogate {
    pub fn value(&self, x: f64) -> f64 {
        self.a * (x - self.b).powi(2) + self.c_off
    }

    pub fn derivative(&self, x: f64) -> f64 {
        2.0 * self.a * (x - self.b)
    }
}

/// `cos(slope·x + phase_rest)` as a function of one coordinate `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineTerm {
    pub slope: f64,
    pub phase_rest: f64,
}

impl CosineTerm {
    pub fn argument(&self, x: f64) -> f64 {
        self.slope * x + self.phase_rest
    }

    pub fn value(&self, x: f64) -> f64 {
        self.argument(x).cos()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -self.slope * self.argument(x).sin()
    }
}

/// Majorizer of a cosine term in an antenna position.
///
/// Away from stationary points the vertex is the cosine minimizer reached by
/// moving downhill from `x0`. At a stationary point the quadratic has the
/// cosine's curvature sign: convex at a trough, concave at a crest.
pub fn position_surrogate(term: CosineTerm, x0: f64) -> QuadraticSurrogate {
    build(term, x0, |u| u.ceil() - 1.0)
}

/// Majorizer of a cosine term in an antenna frequency offset.
///
/// `range_order` is the ordering of Bob's range against the sampled point's
/// range; it selects which side of the current period the trough index is
/// counted from. Both choices give the same trough whenever `x0` is not a
/// stationary point.
pub fn frequency_surrogate(term: CosineTerm, f0: f64, range_order: Ordering) -> QuadraticSurrogate {
    match range_order {
        Ordering::Less => build(term, f0, |u| -(-u).floor() - 1.0),
        _ => build(term, f0, f64::floor),
    }
}

/// `kappa(u)` picks the period index so the trough sits at `κ + 1/2` cycles.
fn build(term: CosineTerm, x0: f64, kappa: impl Fn(f64) -> f64) -> QuadraticSurrogate {
    let y0 = term.value(x0);
    if term.slope == 0.0 {
        return QuadraticSurrogate { a: 0.0, b: x0, c_off: y0 };
    }
    let dy = term.derivative(x0);
    if dy.abs() <= 1e-12 * term.slope.abs() {
        return QuadraticSurrogate { a: -0.5 * term.slope * term.slope * y0, b: x0, c_off: y0 };
    }
    let theta0 = term.argument(x0);
    let u = theta0 / TAU;
    let delta = TAU * (kappa(u) + 0.5 - u);
    // rounding can leave δ a hair outside (−π, π); sin δ/δ stays positive either way
    let delta = delta.clamp(-PI, PI);
    let a = term.slope * term.slope * delta.sin() / (2.0 * delta);
    let b = x0 + delta / term.slope;
    // value matching at x0: c = y0 − a (x0 − b)²
    let c_off = y0 - a * (delta / term.slope).powi(2);
    QuadraticSurrogate { a, b, c_off }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_tangent(t: CosineTerm, s: &QuadraticSurrogate, x0: f64) {
        assert!((s.value(x0) - t.value(x0)).abs() < 1e-9);
        assert!((s.derivative(x0) - t.derivative(x0)).abs() < 1e-9 * t.slope.abs().max(1.0));
    }

    #[test]
    fn trough_gives_convex_quadratic() {
        let slope = 3.0;
        let t = CosineTerm { slope, phase_rest: PI };
        let s = position_surrogate(t, 0.0);
        assert!((s.a - slope * slope / 2.0).abs() < 1e-12);
        assert_eq!(s.b, 0.0);
        assert!((s.c_off + 1.0).abs() < 1e-15);
    }

    #[test]
    fn crest_gives_concave_quadratic() {
        let slope = 3.0;
        let t = CosineTerm { slope, phase_rest: 0.0 };
        let s = position_surrogate(t, 0.0);
        assert!((s.a + slope * slope / 2.0).abs() < 1e-12);
        assert_eq!(s.b, 0.0);
        assert_eq!(s.c_off, 1.0);
    }

    #[test]
    fn quarter_period_vertex_and_majorization() {
        let t = CosineTerm { slope: TAU, phase_rest: 0.0 };
        let x0 = 0.25;
        let s = position_surrogate(t, x0);
        assert!((s.b - 0.5).abs() < 1e-12, "{}", s.b);
        check_tangent(t, &s, x0);
        let (lo, hi) = (s.b - 1.0, x0 + 1.0);
        let n = ((hi - lo) / 1e-4) as usize;
        for i in 0..=n {
            let x = lo + i as f64 * 1e-4;
            assert!(s.value(x) >= t.value(x) - 1e-9, "x = {x}");
        }
    }

    #[test]
    fn frequency_form_on_unit_delay() {
        let t = CosineTerm { slope: TAU, phase_rest: 0.0 };
        let f0 = 0.75;
        for order in [Ordering::Less, Ordering::Greater, Ordering::Equal] {
            let s = frequency_surrogate(t, f0, order);
            assert!((s.b - 0.5).abs() < 1e-12);
            check_tangent(t, &s, f0);
        }
    }

    #[test]
    fn constant_term() {
        let t = CosineTerm { slope: 0.0, phase_rest: 0.4 };
        let s = frequency_surrogate(t, 7.0, Ordering::Less);
        assert_eq!(s, QuadraticSurrogate { a: 0.0, b: 7.0, c_off: 0.4f64.cos() });
    }

    #[test]
    fn degenerate_frequency_trough() {
        let tau = 2.5e-6;
        let t = CosineTerm { slope: TAU * tau, phase_rest: PI };
        let s = frequency_surrogate(t, 0.0, Ordering::Greater);
        assert!((s.a - 2.0 * PI * PI * tau * tau).abs() < 1e-12 * s.a);
        assert!((s.c_off + 1.0).abs() < 1e-15);
    }
}
