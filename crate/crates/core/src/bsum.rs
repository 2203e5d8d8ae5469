//! Cyclic coordinate BSUM over antenna positions and frequency offsets.
//!
//! Each coordinate update builds one quadratic majorizer per (sample point,
//! other antenna) cosine term, minimizes their sum over the feasible interval
//! of that coordinate, and keeps the move only when the exact correlation
//! objective does not go up.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ArrayLayout, SamplePointSet};
use crate::scenario::{PolarCoordinate, ScenarioConfig, SPEED_OF_LIGHT};
use crate::surrogate::{frequency_surrogate, position_surrogate, CosineTerm, QuadraticSurrogate};

/// Termination rule shared by both coordinate blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Absolute objective decrease `ς` below which the run stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Number of iterations the decrease is measured over.
    pub window: usize,
}

impl StopRule {
    pub fn perfect_csi(num_antennas: usize) -> Self {
        Self { tolerance: 1e-6, max_iterations: 20_000, window: num_antennas.max(1) }
    }

    pub fn imperfect_csi(num_antennas: usize) -> Self {
        Self { tolerance: 1e-6, max_iterations: 100_000, window: num_antennas.max(1) }
    }

    /// Default rule for a scenario: the longer budget when uncertainty is present.
    pub fn for_config(config: &ScenarioConfig) -> Self {
        if config.uncertainty.is_some() {
            Self::imperfect_csi(config.num_antennas)
        } else {
            Self::perfect_csi(config.num_antennas)
        }
    }
}

/// Box constraints on the layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutBounds {
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub carrier_hz: f64,
    pub delta_f_hz: f64,
}

impl From<&ScenarioConfig> for LayoutBounds {
    fn from(c: &ScenarioConfig) -> Self {
        Self { d_min_m: c.d_min_m, d_max_m: c.d_max_m, carrier_hz: c.carrier_hz, delta_f_hz: c.delta_f_hz }
    }
}

/// Counters describing what happened during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BsumStats {
    pub accepted: usize,
    pub rejected: usize,
    pub concave_steps: usize,
    pub no_information: usize,
    pub empty_intervals: usize,
}

/// Mutable state of one BSUM run.
#[derive(Debug, Clone)]
pub struct BsumState {
    pub layout: ArrayLayout,
    pub bob: PolarCoordinate,
    pub warden_points: SamplePointSet,
    pub bounds: LayoutBounds,
    /// Coordinate updates performed so far.
    pub iteration: usize,
    /// Objective before the first update followed by one value per update.
    pub objective_trace: Vec<f64>,
    pub stats: BsumStats,
}

impl BsumState {
    pub fn new(
        layout: ArrayLayout,
        bob: PolarCoordinate,
        warden_points: SamplePointSet,
        bounds: LayoutBounds,
    ) -> Self {
        let geometry = Geometry::new(&bob, &warden_points);
        let v = geometry.objective(&layout, bounds.carrier_hz);
        Self {
            layout,
            bob,
            warden_points,
            bounds,
            iteration: 0,
            objective_trace: vec![v],
            stats: BsumStats::default(),
        }
    }

    pub fn from_config(config: &ScenarioConfig, layout: ArrayLayout, points: SamplePointSet) -> Self {
        Self::new(layout, config.bob, points, config.into())
    }

    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace starts with the initial value")
    }
}

/// Result of minimizing a sum of one-dimensional quadratics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Aggregate {
    /// `Σ a b / Σ a` with `Σ a > 0`: the unconstrained minimizer.
    Minimizer(f64),
    /// The same ratio when the summed curvature is not positive; the sum is
    /// concave and the value is not a minimizer.
    Concave(f64),
    /// Every curvature is zero.
    NoInformation,
}

/// Weighted mean of the vertices, weights being the curvatures.
pub fn aggregate_optimal_coordinate(surrogates: &[QuadraticSurrogate]) -> Aggregate {
    let (mut num, mut den, mut abs) = (0.0, 0.0, 0.0);
    for s in surrogates.iter().filter(|s| s.a != 0.0) {
        num += s.a * s.b;
        den += s.a;
        abs += s.a.abs();
    }
    if abs == 0.0 {
        Aggregate::NoInformation
    } else if den > 1e-12 * abs {
        Aggregate::Minimizer(num / den)
    } else {
        Aggregate::Concave(num / den)
    }
}

/// Feasible interval of antenna `m` (0-based, `m ≥ 1`) with its neighbors fixed.
pub fn position_interval(m: usize, layout: &ArrayLayout, d_min: f64, d_max: f64) -> Option<(f64, f64)> {
    let x = &layout.positions_m;
    let count = x.len();
    assert!(m >= 1 && m < count, "antenna index {m} is not movable");
    let lo = x[m - 1] + d_min;
    let mut hi = d_max - (count - 1 - m) as f64 * d_min;
    if m + 1 < count {
        hi = hi.min(x[m + 1] - d_min);
    }
    (lo <= hi).then_some((lo, hi))
}

/// Clamps a candidate for antenna `m` (0-based, `m ≥ 1`) into its feasible
/// interval. `None` when the interval is empty.
pub fn project_position(x: f64, m: usize, layout: &ArrayLayout, d_min: f64, d_max: f64) -> Option<f64> {
    position_interval(m, layout, d_min, d_max).map(|(lo, hi)| x.clamp(lo, hi))
}

pub fn project_frequency(f: f64, carrier_hz: f64, delta_f_hz: f64) -> f64 {
    f.clamp(carrier_hz, carrier_hz + delta_f_hz)
}

/// Relative geometry of the sample points against Bob.
struct Geometry {
    /// `sinθ_p − sinθ_b`.
    sin_diff: Vec<f64>,
    /// `r_b − r_p`.
    range_diff: Vec<f64>,
}

impl Geometry {
    fn new(bob: &PolarCoordinate, points: &SamplePointSet) -> Self {
        let sb = bob.angle_rad.sin();
        Self {
            sin_diff: points.points.iter().map(|p| p.angle_rad.sin() - sb).collect(),
            range_diff: points.points.iter().map(|p| bob.range_m - p.range_m).collect(),
        }
    }

    /// Phase of antenna `m` towards point `p`, in cycles, with the common
    /// carrier term dropped.
    fn cycles(&self, p: usize, x: f64, f: f64, offset: f64) -> f64 {
        (f * x * self.sin_diff[p] + offset * self.range_diff[p]) / SPEED_OF_LIGHT
    }

    fn objective(&self, layout: &ArrayLayout, carrier: f64) -> f64 {
        (0..self.sin_diff.len())
            .map(|p| {
                layout
                    .positions_m
                    .iter()
                    .zip(&layout.frequencies_hz)
                    .map(|(&x, &f)| {
                        let c = self.cycles(p, x, f, f - carrier);
                        Complex64::from_polar(1.0, TAU * (c - c.round()))
                    })
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum()
    }
}

#[derive(Clone, Copy)]
enum Block {
    Positions,
    Frequencies,
}

/// Runs position BSUM over antennas `2..M` in cyclic order.
pub fn bsum_positions(state: BsumState, stop: &StopRule) -> BsumState {
    run(state, stop, Block::Positions)
}

/// Runs frequency BSUM over all antennas in cyclic order.
pub fn bsum_frequencies(state: BsumState, stop: &StopRule) -> BsumState {
    run(state, stop, Block::Frequencies)
}

fn run(mut state: BsumState, stop: &StopRule, block: Block) -> BsumState {
    let geometry = Geometry::new(&state.bob, &state.warden_points);
    let count = state.layout.len();
    let cycle: Vec<usize> = match block {
        Block::Positions => (1..count).collect(),
        Block::Frequencies => (0..count).collect(),
    };
    if cycle.is_empty() {
        return state;
    }
    let start = state.objective_trace.len() - 1;
    let window = stop.window.max(1);
    let mut terms = Vec::with_capacity(state.warden_points.len() * count);
    for step in 0..stop.max_iterations {
        let m = cycle[step % cycle.len()];
        let value = match block {
            Block::Positions => update_position(&mut state, &geometry, m, &mut terms),
            Block::Frequencies => update_frequency(&mut state, &geometry, m, &mut terms),
        };
        state.objective_trace.push(value);
        state.iteration += 1;
        let n = state.objective_trace.len() - 1 - start;
        if n >= window {
            let t = &state.objective_trace;
            if t[t.len() - 1 - window] - t[t.len() - 1] <= stop.tolerance {
                break;
            }
        }
    }
    state
}

/// Picks the next coordinate from the surrogate sum, or `None` to stay put.
fn next_coordinate(
    terms: &[QuadraticSurrogate],
    current: f64,
    (lo, hi): (f64, f64),
    stats: &mut BsumStats,
) -> Option<f64> {
    let summed = |x: f64| terms.iter().map(|s| s.value(x)).sum::<f64>();
    match aggregate_optimal_coordinate(terms) {
        Aggregate::Minimizer(x) => Some(x.clamp(lo, hi)),
        Aggregate::Concave(_) => {
            stats.concave_steps += 1;
            let best = if summed(lo) <= summed(hi) { lo } else { hi };
            (summed(best) <= summed(current)).then_some(best)
        }
        Aggregate::NoInformation => {
            stats.no_information += 1;
            None
        }
    }
}

/// Evaluates the exact objective with the candidate in place and keeps it
/// only if the objective does not increase.
fn accept(state: &mut BsumState, geometry: &Geometry, candidate: ArrayLayout) -> f64 {
    let current = state.objective();
    let v = geometry.objective(&candidate, state.bounds.carrier_hz);
    if v <= current {
        state.layout = candidate;
        state.stats.accepted += 1;
        v
    } else {
        state.stats.rejected += 1;
        current
    }
}

fn update_position(
    state: &mut BsumState,
    geometry: &Geometry,
    m: usize,
    terms: &mut Vec<QuadraticSurrogate>,
) -> f64 {
    let b = state.bounds;
    let Some(interval) = position_interval(m, &state.layout, b.d_min_m, b.d_max_m) else {
        state.stats.empty_intervals += 1;
        return state.objective();
    };
    let x = &state.layout.positions_m;
    let f = &state.layout.frequencies_hz;
    let xm = x[m];
    let om = f[m] - b.carrier_hz;
    terms.clear();
    for p in 0..geometry.sin_diff.len() {
        let slope = TAU * f[m] * geometry.sin_diff[p] / SPEED_OF_LIGHT;
        for n in (0..x.len()).filter(|&n| n != m) {
            let on = f[n] - b.carrier_hz;
            let c = (-f[n] * x[n] * geometry.sin_diff[p] + (om - on) * geometry.range_diff[p]) / SPEED_OF_LIGHT;
            let term = CosineTerm { slope, phase_rest: TAU * (c - c.round()) };
            terms.push(position_surrogate(term, xm));
        }
    }
    match next_coordinate(terms, xm, interval, &mut state.stats) {
        Some(next) => {
            let mut candidate = state.layout.clone();
            candidate.positions_m[m] = next;
            accept(state, geometry, candidate)
        }
        None => state.objective(),
    }
}

fn update_frequency(
    state: &mut BsumState,
    geometry: &Geometry,
    m: usize,
    terms: &mut Vec<QuadraticSurrogate>,
) -> f64 {
    let b = state.bounds;
    let x = &state.layout.positions_m;
    let f = &state.layout.frequencies_hz;
    let om = f[m] - b.carrier_hz;
    terms.clear();
    for p in 0..geometry.sin_diff.len() {
        let (s, d) = (geometry.sin_diff[p], geometry.range_diff[p]);
        let tau_m = (x[m] * s + d) / SPEED_OF_LIGHT;
        let order = d.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        for n in (0..x.len()).filter(|&n| n != m) {
            let on = f[n] - b.carrier_hz;
            let tau_n = (x[n] * s + d) / SPEED_OF_LIGHT;
            let c = b.carrier_hz * (x[m] - x[n]) * s / SPEED_OF_LIGHT - tau_n * on;
            let term = CosineTerm { slope: TAU * tau_m, phase_rest: TAU * (c - c.round()) };
            terms.push(frequency_surrogate(term, om, order));
        }
    }
    match next_coordinate(terms, om, (0.0, b.delta_f_hz), &mut state.stats) {
        Some(next) => {
            let mut candidate = state.layout.clone();
            candidate.frequencies_hz[m] = project_frequency(b.carrier_hz + next, b.carrier_hz, b.delta_f_hz);
            accept(state, geometry, candidate)
        }
        None => state.objective(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::correlation_objective;
    use crate::scenario::presets;

    fn qs(a: f64, b: f64) -> QuadraticSurrogate {
        QuadraticSurrogate { a, b, c_off: 0.0 }
    }

    #[test]
    fn weighted_mean() {
        assert_eq!(aggregate_optimal_coordinate(&[qs(2.0, 5.0)]), Aggregate::Minimizer(5.0));
        assert_eq!(aggregate_optimal_coordinate(&[qs(1.0, 1.0), qs(1.0, 3.0)]), Aggregate::Minimizer(2.0));
        assert_eq!(aggregate_optimal_coordinate(&[qs(1.0, 0.0), qs(3.0, 4.0)]), Aggregate::Minimizer(3.0));
        assert_eq!(aggregate_optimal_coordinate(&[qs(0.0, 1.0)]), Aggregate::NoInformation);
        assert!(matches!(aggregate_optimal_coordinate(&[qs(-1.0, 1.0)]), Aggregate::Concave(_)));
    }

    #[test]
    fn position_projection_branches() {
        let layout = ArrayLayout { positions_m: vec![0.0, 1.0, 2.0, 3.0], frequencies_hz: vec![1.0; 4] };
        assert_eq!(project_position(0.2, 1, &layout, 0.5, 3.0), Some(0.5));
        assert_eq!(project_position(1.2, 1, &layout, 0.5, 3.0), Some(1.2));
        assert_eq!(project_position(2.9, 3, &layout, 0.5, 3.0), Some(2.9));
        assert_eq!(project_position(3.5, 3, &layout, 0.5, 3.0), Some(3.0));
        // right neighbour caps interior antennas
        assert_eq!(project_position(1.9, 1, &layout, 0.5, 10.0), Some(1.5));
        let tight = ArrayLayout { positions_m: vec![0.0, 0.5, 0.8], frequencies_hz: vec![1.0; 3] };
        assert_eq!(project_position(1.0, 1, &tight, 0.5, 10.0), None);
    }

    #[test]
    fn frequency_projection_branches() {
        assert_eq!(project_frequency(9.0, 10.0, 2.0), 10.0);
        assert_eq!(project_frequency(11.0, 10.0, 2.0), 11.0);
        assert_eq!(project_frequency(13.0, 10.0, 2.0), 12.0);
    }

    #[test]
    fn internal_objective_matches_channel_objective() {
        let cfg = presets::high_correlation(8);
        let layout = ArrayLayout::linear_ramp(&cfg);
        let pts = SamplePointSet { points: cfg.willies.clone() };
        let s = BsumState::from_config(&cfg, layout.clone(), pts.clone());
        let direct = correlation_objective(&layout, &cfg.bob, &pts);
        assert!((s.objective() - direct).abs() < 1e-9 * direct.max(1.0));
    }

    #[test]
    fn zero_band_keeps_frequencies() {
        let mut cfg = presets::low_correlation(6);
        cfg.delta_f_hz = 0.0;
        let layout = ArrayLayout::phased_array(&cfg);
        let pts = SamplePointSet { points: cfg.willies.clone() };
        let s = bsum_frequencies(BsumState::from_config(&cfg, layout.clone(), pts), &StopRule::perfect_csi(6));
        assert_eq!(s.layout, layout);
        assert!(s.objective_trace.iter().all(|&v| v == s.objective_trace[0]));
    }

    #[test]
    fn coincident_points_give_no_moves() {
        let cfg = presets::low_correlation(5);
        let layout = ArrayLayout::linear_ramp(&cfg);
        let pts = SamplePointSet { points: vec![cfg.bob; 2] };
        let s = bsum_positions(BsumState::from_config(&cfg, layout.clone(), pts.clone()), &StopRule::perfect_csi(5));
        assert_eq!(s.layout, layout);
        let s = bsum_frequencies(BsumState::from_config(&cfg, layout.clone(), pts), &StopRule::perfect_csi(5));
        assert_eq!(s.layout, layout);
    }

    #[test]
    fn traces_are_monotone_and_deterministic() {
        let cfg = presets::high_correlation(8);
        let pts = SamplePointSet { points: cfg.willies.clone() };
        let go = || {
            let s = BsumState::from_config(&cfg, ArrayLayout::linear_ramp(&cfg), pts.clone());
            let s = bsum_positions(s, &StopRule::perfect_csi(8));
            bsum_frequencies(s, &StopRule::perfect_csi(8))
        };
        let a = go();
        let b = go();
        assert_eq!(a.objective_trace, b.objective_trace);
        assert!(a.objective_trace.windows(2).all(|w| w[1] <= w[0]));
        a.layout.check_feasible(&cfg).unwrap();
        assert!(a.objective() < a.objective_trace[0]);
    }
}
