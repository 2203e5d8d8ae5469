//! Two-stage alternating optimization: layout first (BSUM on the channel
//! correlation), then the beamformer on the optimized layout.

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::beamforming::{
    nullspace_beamformer, randomize, solve_sdr, solve_socp_exact, Beamformer, BeamformingProblem,
    DEFAULT_RANDOMIZATION_SAMPLES,
};
use crate::bsum::{bsum_frequencies, bsum_positions, BsumState, BsumStats, StopRule};
use crate::channel::{channel_vector, correlation_objective, warden_sample_sets, ArrayLayout, ChannelVector, LinkLoss, SamplePointSet};
use crate::covertness::{covert_power_threshold, dep_lower_bound, kl_divergence, DetectionStats};
use crate::error::{Error, Result};
use crate::scenario::{load_scenario, path_loss_amplitude, render_scenario, LinkKind, ScenarioConfig};

/// Which variables a run may optimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    /// Half-wavelength array on the carrier; beamformer only.
    Pa,
    /// Half-wavelength array with free frequencies.
    Fda,
    /// Free positions and frequencies.
    Mfda,
    /// MFDA layout with the zero-leakage beamformer.
    PerfectCovert,
    /// Closed-form array-gain ceiling without covertness constraints.
    UpperBound,
}

impl Strategy {
    pub const ALL: [Strategy; 5] =
        [Strategy::Pa, Strategy::Fda, Strategy::Mfda, Strategy::PerfectCovert, Strategy::UpperBound];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Pa => "PA",
            Strategy::Fda => "FDA",
            Strategy::Mfda => "MFDA",
            Strategy::PerfectCovert => "PERFECT_COVERT",
            Strategy::UpperBound => "UPPER_BOUND",
        }
    }

    fn moves_positions(self) -> bool {
        matches!(self, Strategy::Mfda | Strategy::PerfectCovert)
    }

    fn moves_frequencies(self) -> bool {
        matches!(self, Strategy::Fda | Strategy::Mfda | Strategy::PerfectCovert)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("strategies", format!("unknown strategy {s:?}")))
    }
}

/// Beamforming subproblem solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamSolver {
    #[default]
    Socp,
    /// Semidefinite relaxation plus Gaussian randomization.
    Sdr,
}

/// Starting layout of stage 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialLayout {
    /// Half-wavelength positions with the linear frequency ramp.
    #[default]
    Default,
    /// Seeded random feasible positions, linear frequency ramp.
    RandomPositions(u64),
    Given(ArrayLayout),
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Defaults to [`StopRule::for_config`].
    pub position_stop: Option<StopRule>,
    pub frequency_stop: Option<StopRule>,
    /// Outer-loop and stage-1 alternation tolerance `ς` on rate and objective.
    pub tolerance: f64,
    pub max_outer: usize,
    pub max_alternations: usize,
    pub solver: BeamSolver,
    pub randomization_samples: usize,
    pub seed: u64,
    pub initial: InitialLayout,
    /// Layouts from runs over smaller feasible sets; each is tried both as a
    /// stage-1 start and unchanged, and the best rate wins.
    pub warm_starts: Vec<ArrayLayout>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            position_stop: None,
            frequency_stop: None,
            tolerance: 1e-6,
            max_outer: 5,
            max_alternations: 50,
            solver: BeamSolver::Socp,
            randomization_samples: DEFAULT_RANDOMIZATION_SAMPLES,
            seed: 0,
            initial: InitialLayout::Default,
            warm_starts: Vec::new(),
        }
    }
}

/// Stage-1 objective traces, concatenated over alternation passes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stage1Traces {
    pub position: Vec<f64>,
    pub frequency: Vec<f64>,
    pub alternations: usize,
    pub position_stats: BsumStats,
    pub frequency_stats: BsumStats,
    pub final_objective: f64,
}

/// Received power against the allowed threshold at one sampled warden point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintEntry {
    pub warden: usize,
    pub r_m: f64,
    pub theta_deg: f64,
    pub received_w: f64,
    pub threshold_w: f64,
    pub noise_w: f64,
    pub kl: f64,
    pub dep_lower_bound: f64,
    /// `(received − threshold)/noise`; nonpositive when the constraint holds.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDiagnostics {
    pub entries: Vec<ConstraintEntry>,
    pub power_w: f64,
    pub p_max_w: f64,
    pub max_margin: f64,
    /// Human-readable description of every violated check.
    pub violations: Vec<String>,
    /// False for strategies that ignore covertness (the upper bound).
    pub enforced: bool,
}

impl ConstraintDiagnostics {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub solver: String,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdr_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdr_rank1: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdr_gap: Option<f64>,
}

/// Outcome of one strategy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub strategy: Strategy,
    /// The scenario document the run used.
    pub scenario: serde_json::Value,
    pub final_layout: ArrayLayout,
    pub final_beamformer: Beamformer,
    pub covert_rate_bits: f64,
    pub stage1: Stage1Traces,
    pub outer_iterations: usize,
    pub constraint_report: ConstraintDiagnostics,
    pub solver: SolverDiagnostics,
    pub seed: u64,
    /// Which start produced the reported result.
    pub start: String,
}

impl OptimizationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Scenario the report was produced from.
    pub fn config(&self) -> Result<ScenarioConfig> {
        load_scenario(&self.scenario.to_string())
    }
}

/// `log₂(1 + |h w|²/σ²)`.
pub fn covert_rate(h_bob: &ChannelVector, w: &Beamformer, noise_w: f64) -> f64 {
    (h_bob.apply(w).norm_sqr() / noise_w).ln_1p() / std::f64::consts::LN_2
}

/// `log₂(1 + Lfs²(r_b)·P·M/σ²)`.
pub fn upper_bound_rate(config: &ScenarioConfig) -> f64 {
    let lfs = path_loss_amplitude(config.bob.range_m, &config.loss, LinkKind::Legitimate)
        .expect("validated bob range");
    let snr = lfs * lfs * config.p_max_w * config.num_antennas as f64 / config.noise_bob_w;
    snr.ln_1p() / std::f64::consts::LN_2
}

/// Every warden sample point with the index of the warden it belongs to.
pub fn constraint_points(config: &ScenarioConfig) -> Result<(SamplePointSet, Vec<usize>)> {
    let mut points = Vec::new();
    let mut owners = Vec::new();
    for (k, set) in warden_sample_sets(config)?.into_iter().enumerate() {
        owners.extend(std::iter::repeat(k).take(set.len()));
        points.extend(set.points);
    }
    Ok((SamplePointSet { points }, owners))
}

fn start_layout(config: &ScenarioConfig, strategy: Strategy, initial: &InitialLayout) -> ArrayLayout {
    use rand::SeedableRng;
    let pa = ArrayLayout::phased_array(config);
    match strategy {
        Strategy::Pa | Strategy::UpperBound => pa,
        Strategy::Fda => ArrayLayout::linear_ramp(config),
        Strategy::Mfda | Strategy::PerfectCovert => match initial {
            InitialLayout::Default => ArrayLayout::linear_ramp(config),
            InitialLayout::RandomPositions(seed) => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                ArrayLayout::random_positions(config, &mut rng)
            }
            InitialLayout::Given(l) => l.clone(),
        },
    }
}

/// Stage 1: alternate position and frequency BSUM over the variables the
/// strategy frees, until a full pass lowers the objective by at most `ς`.
pub fn run_stage1(
    config: &ScenarioConfig,
    strategy: Strategy,
    start: ArrayLayout,
    points: &SamplePointSet,
    options: &RunOptions,
) -> (ArrayLayout, Stage1Traces) {
    let default_stop = StopRule::for_config(config);
    let pstop = options.position_stop.unwrap_or(default_stop);
    let fstop = options.frequency_stop.unwrap_or(default_stop);
    let mut traces = Stage1Traces::default();
    let mut layout = start;
    let mut value = correlation_objective(&layout, &config.bob, points);
    if !strategy.moves_positions() && !strategy.moves_frequencies() {
        traces.final_objective = value;
        return (layout, traces);
    }
    for pass in 0..options.max_alternations.max(1) {
        let before = value;
        if strategy.moves_positions() {
            let s = bsum_positions(BsumState::from_config(config, layout, points.clone()), &pstop);
            append(&mut traces.position, &s.objective_trace);
            add_stats(&mut traces.position_stats, &s.stats);
            value = s.objective();
            layout = s.layout;
        }
        if strategy.moves_frequencies() {
            let s = bsum_frequencies(BsumState::from_config(config, layout, points.clone()), &fstop);
            append(&mut traces.frequency, &s.objective_trace);
            add_stats(&mut traces.frequency_stats, &s.stats);
            value = s.objective();
            layout = s.layout;
        }
        traces.alternations = pass + 1;
        if !(strategy.moves_positions() && strategy.moves_frequencies()) || before - value <= options.tolerance {
            break;
        }
    }
    traces.final_objective = value;
    (layout, traces)
}

fn append(dst: &mut Vec<f64>, src: &[f64]) {
    // consecutive passes share their boundary value
    let skip = usize::from(!dst.is_empty());
    dst.extend_from_slice(&src[skip.min(src.len())..]);
}

fn add_stats(dst: &mut BsumStats, src: &BsumStats) {
    dst.accepted += src.accepted;
    dst.rejected += src.rejected;
    dst.concave_steps += src.concave_steps;
    dst.no_information += src.no_information;
    dst.empty_intervals += src.empty_intervals;
}

struct Stage2 {
    beamformer: Beamformer,
    rate: f64,
    diagnostics: SolverDiagnostics,
}

fn run_stage2(
    config: &ScenarioConfig,
    strategy: Strategy,
    layout: &ArrayLayout,
    points: &SamplePointSet,
    owners: &[usize],
    options: &RunOptions,
) -> Result<Stage2> {
    let problem = BeamformingProblem::for_layout(config, layout, points, owners)?;
    let (beamformer, diagnostics) = match strategy {
        Strategy::PerfectCovert => (
            nullspace_beamformer(&problem.h_bob, &problem.warden_channels, config.p_max_w)?,
            SolverDiagnostics { solver: "nullspace".into(), ..Default::default() },
        ),
        Strategy::UpperBound => {
            let free = BeamformingProblem {
                thresholds_w: vec![f64::INFINITY; problem.thresholds_w.len()],
                ..problem.clone()
            };
            (solve_socp_exact(&free)?, SolverDiagnostics { solver: "mrt".into(), ..Default::default() })
        }
        _ => match options.solver {
            BeamSolver::Socp => {
                (solve_socp_exact(&problem)?, SolverDiagnostics { solver: "socp".into(), ..Default::default() })
            }
            BeamSolver::Sdr => {
                let sol = solve_sdr(&problem)?;
                let w = randomize(&sol, &problem, options.randomization_samples, options.seed);
                (
                    w,
                    SolverDiagnostics {
                        solver: "sdr".into(),
                        iterations: sol.iterations,
                        sdr_value: Some(sol.value),
                        sdr_rank1: Some(sol.rank1),
                        sdr_gap: Some(sol.gap),
                    },
                )
            }
        },
    };
    let rate = covert_rate(&problem.h_bob, &beamformer, config.noise_bob_w);
    Ok(Stage2 { beamformer, rate, diagnostics })
}

struct Candidate {
    layout: ArrayLayout,
    traces: Stage1Traces,
    stage2: Stage2,
    label: String,
}

/// Runs one strategy end to end.
pub fn run_two_stage_ao(config: &ScenarioConfig, strategy: Strategy, options: &RunOptions) -> Result<OptimizationReport> {
    config.validate()?;
    let (points, owners) = constraint_points(config)?;
    let pa = ArrayLayout::phased_array(config);

    let mut starts = vec![("initial".to_string(), start_layout(config, strategy, &options.initial))];
    if strategy != Strategy::Pa && strategy != Strategy::UpperBound {
        for (i, ws) in options.warm_starts.iter().enumerate() {
            let mut ws = ws.clone();
            if !strategy.moves_positions() {
                ws.positions_m = pa.positions_m.clone();
            }
            if ws.check_feasible(config).is_err() {
                warn!("skipping infeasible warm start {i} for {strategy}");
                continue;
            }
            starts.push((format!("warm_start_{i}"), ws));
        }
    }

    let mut best: Option<Candidate> = None;
    for (label, start) in starts {
        let (layout, traces) = run_stage1(config, strategy, start.clone(), &points, options);
        let mut tries = vec![(label.clone(), layout, traces)];
        if label != "initial" {
            tries.push((format!("{label}_unchanged"), start.clone(), Stage1Traces::default()));
        }
        for (label, layout, traces) in tries {
            let stage2 = match run_stage2(config, strategy, &layout, &points, &owners, options) {
                Ok(s) => s,
                Err(e) if best.is_some() || label != "initial" => {
                    warn!("{strategy} start {label} failed: {e}");
                    continue;
                }
                Err(e) => return Err(e),
            };
            debug!("{strategy} start {label}: rate {}", stage2.rate);
            if best.as_ref().map_or(true, |b| stage2.rate > b.stage2.rate) {
                best = Some(Candidate { layout, traces, stage2, label });
            }
        }
    }
    let mut best = best.ok_or_else(|| Error::Domain(format!("{strategy}: no start produced a result")))?;

    // outer loop: re-run both stages from the current layout
    let mut outer = 1;
    while outer < options.max_outer && strategy != Strategy::Pa && strategy != Strategy::UpperBound {
        let (layout, traces) = run_stage1(config, strategy, best.layout.clone(), &points, options);
        outer += 1;
        let stage2 = run_stage2(config, strategy, &layout, &points, &owners, options)?;
        let change = stage2.rate - best.stage2.rate;
        if change > options.tolerance {
            best = Candidate { layout, traces, stage2, label: best.label };
        } else {
            break;
        }
    }

    let scenario: serde_json::Value =
        serde_json::from_str(&render_scenario(config)).expect("rendered scenario is valid JSON");
    let mut report = OptimizationReport {
        strategy,
        scenario,
        final_layout: best.layout,
        final_beamformer: best.stage2.beamformer,
        covert_rate_bits: best.stage2.rate,
        stage1: best.traces,
        outer_iterations: outer,
        constraint_report: ConstraintDiagnostics {
            entries: Vec::new(),
            power_w: 0.0,
            p_max_w: config.p_max_w,
            max_margin: 0.0,
            violations: Vec::new(),
            enforced: true,
        },
        solver: best.stage2.diagnostics,
        seed: options.seed,
        start: best.label,
    };
    report.constraint_report = verify_report(&report, config)?;
    Ok(report)
}

/// Recomputes every covert constraint from the layout and beamformer alone.
pub fn verify_report(report: &OptimizationReport, config: &ScenarioConfig) -> Result<ConstraintDiagnostics> {
    let layout = &report.final_layout;
    let w = &report.final_beamformer;
    let enforced = report.strategy != Strategy::UpperBound;
    let mut violations = Vec::new();
    if let Err(e) = layout.check_feasible(config) {
        violations.push(e.to_string());
    }
    if w.weights.len() != config.num_antennas {
        violations.push(format!("beamformer has {} weights for {} antennas", w.weights.len(), config.num_antennas));
        return Ok(ConstraintDiagnostics {
            entries: Vec::new(),
            power_w: w.power(),
            p_max_w: config.p_max_w,
            max_margin: f64::INFINITY,
            violations,
            enforced,
        });
    }
    let power = w.power();
    if power > config.p_max_w * (1.0 + 1e-9) {
        violations.push(format!("transmit power {power:e} W exceeds {:e} W", config.p_max_w));
    }
    let (points, owners) = constraint_points(config)?;
    let loss = LinkLoss { model: &config.loss, kind: LinkKind::Warden };
    let budget = 2.0 * config.epsilon * config.epsilon;
    let mut entries = Vec::with_capacity(points.len());
    let mut max_margin = f64::NEG_INFINITY;
    for (p, &k) in points.points.iter().zip(&owners) {
        let h = channel_vector(layout, p, 0.0, Some(loss))?;
        let received = h.apply(w).norm_sqr();
        let noise = config.noise_willie_w[k];
        let threshold = covert_power_threshold(noise, config.epsilon)?;
        let stats = DetectionStats::new(noise, received);
        let kl = kl_divergence(&stats)?;
        let dep = dep_lower_bound(&stats)?;
        let margin = (received - threshold) / noise;
        max_margin = max_margin.max(margin);
        if enforced {
            let excess = received - threshold;
            let allowed = if threshold > 0.0 { 1e-9 * threshold } else { 1e-10 * noise };
            if excess > allowed {
                violations.push(format!(
                    "warden {k} at ({:.3} m, {:.4} deg): received {received:e} W above threshold {threshold:e} W",
                    p.range_m,
                    p.angle_rad.to_degrees()
                ));
            }
            if kl > budget + 1e-10 {
                violations.push(format!("warden {k}: KL {kl:e} above 2ε² = {budget:e}"));
            }
            if dep < 1.0 - config.epsilon * (1.0 + 1e-6) {
                violations.push(format!("warden {k}: detection error bound {dep} below 1 − ε"));
            }
        }
        entries.push(ConstraintEntry {
            warden: k,
            r_m: p.range_m,
            theta_deg: p.angle_rad.to_degrees(),
            received_w: received,
            threshold_w: threshold,
            noise_w: noise,
            kl,
            dep_lower_bound: dep,
            margin,
        });
    }
    Ok(ConstraintDiagnostics { entries, power_w: power, p_max_w: config.p_max_w, max_margin, violations, enforced })
}

/// Runs PA, FDA, PERFECT_COVERT and MFDA in nesting order with warm starts so
/// that MFDA ≥ FDA ≥ PA and MFDA ≥ PERFECT_COVERT hold by construction.
/// PERFECT_COVERT failures (too many wardens for the null space) are returned
/// as errors in its slot without stopping the others.
pub fn run_nested(
    config: &ScenarioConfig,
    strategies: &[Strategy],
    options: &RunOptions,
) -> Vec<(Strategy, Result<OptimizationReport>)> {
    let want = |s: Strategy| strategies.contains(&s);
    let mut out = Vec::new();
    let mut ws_fda = options.warm_starts.clone();
    let mut ws_mfda = options.warm_starts.clone();
    let pa = run_two_stage_ao(config, Strategy::Pa, options);
    if let Ok(r) = &pa {
        ws_fda.push(r.final_layout.clone());
        ws_mfda.push(r.final_layout.clone());
    }
    let fda = if want(Strategy::Fda) || want(Strategy::Mfda) {
        let o = RunOptions { warm_starts: ws_fda, ..options.clone() };
        let r = run_two_stage_ao(config, Strategy::Fda, &o);
        if let Ok(r) = &r {
            ws_mfda.push(r.final_layout.clone());
        }
        Some(r)
    } else {
        None
    };
    let pc = if want(Strategy::PerfectCovert) {
        let r = run_two_stage_ao(config, Strategy::PerfectCovert, options);
        if let Ok(r) = &r {
            ws_mfda.push(r.final_layout.clone());
        }
        Some(r)
    } else {
        None
    };
    let mfda = want(Strategy::Mfda).then(|| {
        let o = RunOptions { warm_starts: ws_mfda, ..options.clone() };
        run_two_stage_ao(config, Strategy::Mfda, &o)
    });
    for s in strategies {
        let r = match s {
            Strategy::Pa => clone_result(&pa),
            Strategy::Fda => clone_result(fda.as_ref().expect("requested")),
            Strategy::PerfectCovert => clone_result(pc.as_ref().expect("requested")),
            Strategy::Mfda => clone_result(mfda.as_ref().expect("requested")),
            Strategy::UpperBound => run_two_stage_ao(config, Strategy::UpperBound, options),
        };
        out.push((*s, r));
    }
    out
}

fn clone_result(r: &Result<OptimizationReport>) -> Result<OptimizationReport> {
    match r {
        Ok(v) => Ok(v.clone()),
        Err(e) => Err(Error::Domain(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets;

    #[test]
    fn rate_basics() {
        let h = ChannelVector { entries: vec![num_complex::Complex64::new(1.0, 0.0)], scaled: true };
        assert_eq!(covert_rate(&h, &Beamformer::zeros(1), 1.0), 0.0);
        let w = Beamformer { weights: vec![num_complex::Complex64::new(0.0, 2.0)] };
        assert!((covert_rate(&h, &w, 4.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn upper_bound_values() {
        assert!((upper_bound_rate(&presets::low_correlation(10)) - 9.967).abs() < 1e-3);
        assert!((upper_bound_rate(&presets::low_correlation(20)) - 10.966).abs() < 1e-3);
        let mut c = presets::low_correlation(10);
        c.p_max_w = 0.0;
        assert_eq!(upper_bound_rate(&c), 0.0);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
            let j = serde_json::to_string(&s).unwrap();
            assert_eq!(j, format!("\"{}\"", s.name()));
        }
        assert!("PHASED".parse::<Strategy>().is_err());
    }

    #[test]
    fn upper_bound_report_matches_closed_form() {
        let cfg = presets::low_correlation(6);
        let r = run_two_stage_ao(&cfg, Strategy::UpperBound, &RunOptions::default()).unwrap();
        assert!((r.covert_rate_bits - upper_bound_rate(&cfg)).abs() < 1e-9);
        assert!(!r.constraint_report.enforced);
    }

    #[test]
    fn report_round_trips_and_verifies() {
        let cfg = presets::low_correlation(6);
        let r = run_two_stage_ao(&cfg, Strategy::Mfda, &RunOptions::default()).unwrap();
        assert!(r.constraint_report.ok(), "{:?}", r.constraint_report.violations);
        let back = OptimizationReport::from_json(&r.to_json()).unwrap();
        let cfg2 = back.config().unwrap();
        let d = verify_report(&back, &cfg2).unwrap();
        assert!(d.ok(), "{:?}", d.violations);
        assert!((back.covert_rate_bits - r.covert_rate_bits).abs() == 0.0);
    }

    #[test]
    fn second_outer_pass_is_a_fixed_point() {
        let cfg = presets::high_correlation(6);
        let opts = RunOptions { max_outer: 100, ..RunOptions::default() };
        let r = run_two_stage_ao(&cfg, Strategy::Mfda, &opts).unwrap();
        assert!(r.outer_iterations < opts.max_outer);
        let (points, owners) = constraint_points(&cfg).unwrap();
        let (layout, _) = run_stage1(&cfg, Strategy::Mfda, r.final_layout.clone(), &points, &opts);
        let again = run_stage2(&cfg, Strategy::Mfda, &layout, &points, &owners, &opts).unwrap();
        assert!(again.rate - r.covert_rate_bits <= opts.tolerance, "{} vs {}", again.rate, r.covert_rate_bits);
    }
}
