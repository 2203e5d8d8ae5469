//! Batch experiments: convergence traces, rate sweeps and beampatterns
//! written as CSV files plus a JSON manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::Beamformer;
use crate::bsum::{bsum_frequencies, bsum_positions, BsumState, StopRule};
use crate::channel::{channel_vector, ArrayLayout};
use crate::error::{Error, Result};
use crate::orchestrator::{
    constraint_points, run_nested, BeamSolver, OptimizationReport, RunOptions, Strategy,
};
use crate::scenario::{load_scenario, path_loss_amplitude, render_scenario, LinkKind, PathLossModel, PolarCoordinate, ScenarioConfig};

/// Evenly spaced samples `lo, …, hi` (`n ≥ 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpan {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpan {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("invalid grid span {lo}..{hi} with {n} points")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

/// Amplitude applied to the array response on the grid.
#[derive(Debug, Clone, Copy)]
pub enum PatternScale<'a> {
    /// One fixed amplitude everywhere; shows array gain only.
    Reference(f64),
    /// Distance-dependent path loss of the given link kind.
    PathLoss(&'a PathLossModel, LinkKind),
}

/// Received power over a range × angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Beampattern {
    pub ranges_m: Vec<f64>,
    pub angles_rad: Vec<f64>,
    /// `power[i][j]` at `(ranges_m[i], angles_rad[j])`.
    pub power: Vec<Vec<f64>>,
}

impl Beampattern {
    /// Grid indices of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut v = f64::NEG_INFINITY;
        for (i, row) in self.power.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p > v {
                    v = p;
                    best = (i, j);
                }
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        let (i, j) = self.argmax();
        self.power[i][j]
    }

    /// Grid cell nearest to `p`.
    pub fn nearest_cell(&self, p: &PolarCoordinate) -> (usize, usize) {
        let near = |v: &[f64], x: f64| {
            (0..v.len()).min_by(|&a, &b| (v[a] - x).abs().total_cmp(&(v[b] - x).abs())).unwrap_or(0)
        };
        (near(&self.ranges_m, p.range_m), near(&self.angles_rad, p.angle_rad))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r_m,theta_deg,power\n");
        for (i, r) in self.ranges_m.iter().enumerate() {
            for (j, a) in self.angles_rad.iter().enumerate() {
                let _ = writeln!(s, "{r:?},{:?},{:?}", a.to_degrees(), self.power[i][j]);
            }
        }
        s
    }
}

/// `|h(r, θ) w|²` over the grid; angles in radians.
pub fn beampattern_grid(
    layout: &ArrayLayout,
    w: &Beamformer,
    range_span: GridSpan,
    angle_span: GridSpan,
    scale: PatternScale<'_>,
) -> Result<Beampattern> {
    let ranges_m = range_span.values();
    let angles_rad = angle_span.values();
    let mut power = Vec::with_capacity(ranges_m.len());
    for &r in &ranges_m {
        let amp = match scale {
            PatternScale::Reference(a) => a,
            PatternScale::PathLoss(model, kind) => path_loss_amplitude(r, model, kind)?,
        };
        let mut row = Vec::with_capacity(angles_rad.len());
        for &a in &angles_rad {
            let p = PolarCoordinate { range_m: r, angle_rad: a };
            let h = channel_vector(layout, &p, 0.0, None)?;
            let y: Complex64 = h.apply(w) * amp;
            row.push(y.norm_sqr());
        }
        power.push(row);
    }
    Ok(Beampattern { ranges_m, angles_rad, power })
}

/// Reference amplitude used for normalized beampatterns: the legitimate-link
/// path loss at Bob's range.
pub fn reference_amplitude(config: &ScenarioConfig) -> f64 {
    path_loss_amplitude(config.bob.range_m, &config.loss, LinkKind::Legitimate).expect("validated bob range")
}

/// Kind of batch experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Trace,
    RateVsM,
    RateVsBudget,
    Beampattern,
    ImperfectSweep,
}

/// Scenario quantity swept by `rate_vs_budget`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    PMaxDbm,
    Epsilon,
    DMaxWavelengths,
    DeltaFHz,
}

/// Coordinate block recorded by `trace` experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceBlock {
    #[default]
    Positions,
    Frequencies,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_lo_m: f64,
    pub r_hi_m: f64,
    pub n_r: usize,
    pub theta_lo_deg: f64,
    pub theta_hi_deg: f64,
    pub n_theta: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_lo_m: 800.0, r_hi_m: 1200.0, n_r: 201, theta_lo_deg: 0.0, theta_hi_deg: 60.0, n_theta: 201 }
    }
}

impl GridSpec {
    pub fn spans(&self) -> Result<(GridSpan, GridSpan)> {
        Ok((
            GridSpan::new(self.r_lo_m, self.r_hi_m, self.n_r)?,
            GridSpan::new(self.theta_lo_deg.to_radians(), self.theta_hi_deg.to_radians(), self.n_theta)?,
        ))
    }
}

fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::Pa, Strategy::Fda, Strategy::Mfda]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Scenario file, relative to the experiment file's directory.
    pub scenario: PathBuf,
    pub kind: ExperimentKind,
    /// Antenna counts, budget levels or samples per axis, depending on `kind`.
    #[serde(default)]
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub budget: Option<Budget>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Beampatterns with true path loss instead of the fixed reference.
    #[serde(default)]
    pub raw_power: bool,
    #[serde(default)]
    pub solver: BeamSolver,
    #[serde(default)]
    pub trace_block: TraceBlock,
    /// Overrides the default BSUM iteration budget.
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let needs_sweep = matches!(
            self.kind,
            ExperimentKind::RateVsM | ExperimentKind::RateVsBudget | ExperimentKind::ImperfectSweep
        );
        if needs_sweep && self.sweep.is_empty() {
            return Err(Error::config("sweep", "this experiment needs at least one sweep value"));
        }
        if self.kind == ExperimentKind::RateVsBudget && self.budget.is_none() {
            return Err(Error::config("budget", "rate_vs_budget needs the swept quantity"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        if self.strategies.is_empty() {
            return Err(Error::config("strategies", "at least one strategy is required"));
        }
        for (i, v) in self.sweep.iter().enumerate() {
            let integral = matches!(self.kind, ExperimentKind::RateVsM | ExperimentKind::ImperfectSweep);
            if !v.is_finite() || (integral && (v.fract() != 0.0 || *v < 1.0)) {
                return Err(Error::config(format!("sweep[{i}]"), format!("invalid sweep value {v}")));
            }
        }
        Ok(())
    }
}

/// Execution settings not stored in the experiment file.
#[derive(Debug, Clone, Default)]
pub struct RunSettings {
    pub output_dir: Option<PathBuf>,
    /// Replaces the experiment's seed list with a single seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: ExperimentKind,
    pub spec: ExperimentSpec,
    pub scenario: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub files: Vec<String>,
    /// `(sweep point, message)` for every failed point.
    pub errors: Vec<(String, String)>,
}

/// One row of `rates.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub strategy: Strategy,
    pub m: usize,
    pub rate_bits: f64,
    pub max_constraint_margin: f64,
    pub sweep_value: Option<f64>,
}

struct Outputs {
    files: Vec<(String, String)>,
    errors: Vec<(String, String)>,
}

impl Outputs {
    fn new() -> Self {
        Self { files: Vec::new(), errors: Vec::new() }
    }

    fn report(&mut self, name: String, r: &OptimizationReport) {
        self.files.push((format!("reports/{name}.json"), r.to_json()));
    }
}

fn map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

fn options_for(spec: &ExperimentSpec, config: &ScenarioConfig, seed: u64) -> RunOptions {
    let mut o = RunOptions { solver: spec.solver, seed, ..RunOptions::default() };
    if let Some(n) = spec.max_iterations {
        let mut stop = StopRule::for_config(config);
        stop.max_iterations = n;
        o.position_stop = Some(stop);
        o.frequency_stop = Some(stop);
    }
    o
}

fn rates_csv(rows: &[RateRow], with_sweep: bool) -> String {
    let mut s = String::from("strategy,M,rate_bits,max_constraint_margin");
    s.push_str(if with_sweep { ",sweep_value\n" } else { "\n" });
    for r in rows {
        let _ = write!(s, "{},{},{:?},{:?}", r.strategy, r.m, r.rate_bits, r.max_constraint_margin);
        if with_sweep {
            let _ = write!(s, ",{:?}", r.sweep_value.unwrap_or(f64::NAN));
        }
        s.push('\n');
    }
    s
}

fn row(r: &OptimizationReport, m: usize, sweep_value: Option<f64>) -> RateRow {
    RateRow {
        strategy: r.strategy,
        m,
        rate_bits: r.covert_rate_bits,
        max_constraint_margin: r.constraint_report.max_margin,
        sweep_value,
    }
}

/// Seeded stage-1 trace from a random feasible start.
pub fn seeded_trace(config: &ScenarioConfig, block: TraceBlock, seed: u64, stop: &StopRule) -> Result<Vec<f64>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (points, _) = constraint_points(config)?;
    let layout = match block {
        TraceBlock::Positions => ArrayLayout::random_positions(config, &mut rng),
        TraceBlock::Frequencies => {
            let mut l = ArrayLayout::random(config, &mut rng);
            l.positions_m = ArrayLayout::phased_array(config).positions_m;
            l
        }
    };
    let state = BsumState::from_config(config, layout, points);
    let state = match block {
        TraceBlock::Positions => bsum_positions(state, stop),
        TraceBlock::Frequencies => bsum_frequencies(state, stop),
    };
    Ok(state.objective_trace)
}

fn with_budget(config: &ScenarioConfig, budget: Budget, v: f64) -> Result<ScenarioConfig> {
    let mut c = config.clone();
    match budget {
        Budget::PMaxDbm => c.p_max_w = crate::scenario::dbm_to_watts(v),
        Budget::Epsilon => c.epsilon = v,
        Budget::DMaxWavelengths => c.d_max_m = v * c.wavelength_m(),
        Budget::DeltaFHz => c.delta_f_hz = v,
    }
    c.validate()?;
    Ok(c)
}

fn with_samples(config: &ScenarioConfig, l: usize) -> Result<ScenarioConfig> {
    let mut c = config.clone();
    let u = c
        .uncertainty
        .as_mut()
        .ok_or_else(|| Error::config("uncertainty", "imperfect_sweep needs an uncertainty block"))?;
    // the sample spacing stays fixed, so the half-widths grow with L
    let old = u.samples_per_axis.max(1);
    let spacing = |half: f64| if old > 1 { 2.0 * half / (old - 1) as f64 } else { 0.0 };
    let half = (l.saturating_sub(1)) as f64 / 2.0;
    u.delta_r_m = u.delta_r_m.iter().map(|&d| spacing(d) * half).collect();
    u.delta_theta_rad = u.delta_theta_rad.iter().map(|&d| spacing(d) * half).collect();
    u.samples_per_axis = l;
    c.validate()?;
    Ok(c)
}

/// Runs `spec` against `config` and returns `(file name, contents)` pairs
/// plus per-point errors. Nothing is written.
fn execute(spec: &ExperimentSpec, config: &ScenarioConfig, seeds: &[u64]) -> Result<Outputs> {
    let mut out = Outputs::new();
    match spec.kind {
        ExperimentKind::Trace => {
            let mut stop = StopRule::for_config(config);
            if let Some(n) = spec.max_iterations {
                stop.max_iterations = n;
            }
            let traces = map(seeds.to_vec(), |s| (s, seeded_trace(config, spec.trace_block, s, &stop)));
            let mut csv = String::from("seed,iteration,objective\n");
            for (seed, t) in traces {
                match t {
                    Ok(t) => {
                        for (i, v) in t.iter().enumerate() {
                            let _ = writeln!(csv, "{seed},{i},{v:?}");
                        }
                    }
                    Err(e) => out.errors.push((format!("seed {seed}"), e.to_string())),
                }
            }
            out.files.push(("trace.csv".into(), csv));
        }
        ExperimentKind::RateVsM => {
            let ms: Vec<usize> = spec.sweep.iter().map(|&v| v as usize).collect();
            let jobs: Vec<(usize, u64)> = ms.iter().flat_map(|&m| seeds.iter().map(move |&s| (m, s))).collect();
            let results = map(jobs, |(m, seed)| {
                let r = config.with_antennas(m).map(|c| {
                    let opts = options_for(spec, &c, seed);
                    run_nested(&c, &spec.strategies, &opts)
                });
                (m, seed, r)
            });
            let mut rows = Vec::new();
            for (m, seed, r) in results {
                match r {
                    Ok(list) => {
                        for (s, r) in list {
                            match r {
                                Ok(r) => {
                                    rows.push(row(&r, m, None));
                                    out.report(format!("{s}_M{m}_seed{seed}"), &r);
                                }
                                Err(e) => out.errors.push((format!("{s} M={m} seed={seed}"), e.to_string())),
                            }
                        }
                    }
                    Err(e) => out.errors.push((format!("M={m}"), e.to_string())),
                }
            }
            out.files.push(("rates.csv".into(), rates_csv(&rows, false)));
        }
        ExperimentKind::RateVsBudget => {
            let budget = spec.budget.expect("validated");
            let mut levels = spec.sweep.clone();
            levels.sort_by(f64::total_cmp);
            let results = map(seeds.to_vec(), |seed| {
                // ascending budgets, each warm-started from the previous level
                let mut rows = Vec::new();
                let mut reports = Vec::new();
                let mut errors = Vec::new();
                let mut warm: Vec<ArrayLayout> = Vec::new();
                for &v in &levels {
                    let c = match with_budget(config, budget, v) {
                        Ok(c) => c,
                        Err(e) => {
                            errors.push((format!("{budget:?}={v}"), e.to_string()));
                            continue;
                        }
                    };
                    let opts = RunOptions { warm_starts: warm.clone(), ..options_for(spec, &c, seed) };
                    let mut next_warm = Vec::new();
                    for (s, r) in run_nested(&c, &spec.strategies, &opts) {
                        match r {
                            Ok(r) => {
                                rows.push(row(&r, c.num_antennas, Some(v)));
                                if s == Strategy::Mfda || s == Strategy::Fda {
                                    next_warm.push(r.final_layout.clone());
                                }
                                reports.push((format!("{s}_{budget:?}_{v}_seed{seed}"), r));
                            }
                            Err(e) => errors.push((format!("{s} {budget:?}={v} seed={seed}"), e.to_string())),
                        }
                    }
                    warm = next_warm;
                }
                (rows, reports, errors)
            });
            let mut rows = Vec::new();
            for (r, reports, errors) in results {
                rows.extend(r);
                for (name, rep) in reports {
                    out.report(name, &rep);
                }
                out.errors.extend(errors);
            }
            out.files.push(("rates.csv".into(), rates_csv(&rows, true)));
        }
        ExperimentKind::ImperfectSweep => {
            let mut ls: Vec<usize> = spec.sweep.iter().map(|&v| v as usize).collect();
            // largest grid first; its layouts remain feasible warm starts for
            // every smaller grid with the same sample spacing
            ls.sort_unstable_by(|a, b| b.cmp(a));
            let results = map(seeds.to_vec(), |seed| {
                let mut rows = Vec::new();
                let mut reports = Vec::new();
                let mut errors = Vec::new();
                let mut warm: Vec<ArrayLayout> = Vec::new();
                for &l in &ls {
                    let c = match with_samples(config, l) {
                        Ok(c) => c,
                        Err(e) => {
                            errors.push((format!("L={l}"), e.to_string()));
                            continue;
                        }
                    };
                    let opts = RunOptions { warm_starts: warm.clone(), ..options_for(spec, &c, seed) };
                    let mut next_warm = Vec::new();
                    for (s, r) in run_nested(&c, &spec.strategies, &opts) {
                        match r {
                            Ok(r) => {
                                rows.push(row(&r, c.num_antennas, Some(l as f64)));
                                if s == Strategy::Mfda {
                                    next_warm.push(r.final_layout.clone());
                                }
                                reports.push((format!("{s}_L{l}_seed{seed}"), r));
                            }
                            Err(e) => errors.push((format!("{s} L={l} seed={seed}"), e.to_string())),
                        }
                    }
                    warm = next_warm;
                }
                (rows, reports, errors)
            });
            let mut rows = Vec::new();
            for (r, reports, errors) in results {
                rows.extend(r);
                for (name, rep) in reports {
                    out.report(name, &rep);
                }
                out.errors.extend(errors);
            }
            rows.sort_by(|a, b| {
                a.sweep_value.unwrap_or(0.0).total_cmp(&b.sweep_value.unwrap_or(0.0))
            });
            out.files.push(("rates.csv".into(), rates_csv(&rows, true)));
        }
        ExperimentKind::Beampattern => {
            let grid = spec.grid.clone().unwrap_or_default();
            let (rs, ts) = grid.spans()?;
            let seed = seeds[0];
            let opts = options_for(spec, config, seed);
            for (s, r) in run_nested(config, &spec.strategies, &opts) {
                match r {
                    Ok(r) => {
                        let scale = if spec.raw_power {
                            PatternScale::PathLoss(&config.loss, LinkKind::Warden)
                        } else {
                            PatternScale::Reference(reference_amplitude(config))
                        };
                        let bp = beampattern_grid(&r.final_layout, &r.final_beamformer, rs, ts, scale)?;
                        let name = if spec.strategies.len() == 1 {
                            "beampattern.csv".to_string()
                        } else {
                            format!("beampattern_{s}.csv")
                        };
                        out.files.push((name, bp.to_csv()));
                        out.report(format!("{s}_seed{seed}"), &r);
                    }
                    Err(e) => out.errors.push((s.to_string(), e.to_string())),
                }
            }
        }
    }
    Ok(out)
}

/// Loads the scenario named by `spec` (relative to `base_dir`), runs it and
/// writes the products. Returns the manifest.
pub fn run_experiment(spec: &ExperimentSpec, base_dir: &Path, settings: &RunSettings) -> Result<Manifest> {
    spec.validate()?;
    let scenario_path = base_dir.join(&spec.scenario);
    let text = fs::read_to_string(&scenario_path)?;
    let config = load_scenario(&text)?;
    let out_dir = settings
        .output_dir
        .clone()
        .or_else(|| spec.output_dir.as_ref().map(|d| base_dir.join(d)))
        .unwrap_or_else(|| base_dir.join("out"));
    let seeds = settings.seed.map(|s| vec![s]).unwrap_or_else(|| spec.seeds.clone());
    info!("running {:?} from {}", spec.kind, scenario_path.display());
    let outputs = execute(spec, &config, &seeds)?;
    fs::create_dir_all(out_dir.join("reports"))?;
    let mut files = Vec::new();
    for (name, contents) in &outputs.files {
        fs::write(out_dir.join(name), contents)?;
        files.push(name.clone());
    }
    let manifest = Manifest {
        kind: spec.kind,
        spec: spec.clone(),
        scenario: serde_json::from_str(&render_scenario(&config))?,
        seeds,
        version: env!("CARGO_PKG_VERSION").to_string(),
        files,
        errors: outputs.errors,
    };
    fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Normalized beampattern of a finished report.
pub fn report_beampattern(report: &OptimizationReport, grid: &GridSpec, raw_power: bool) -> Result<Beampattern> {
    let config = report.config()?;
    let (rs, ts) = grid.spans()?;
    let scale = if raw_power {
        PatternScale::PathLoss(&config.loss, LinkKind::Warden)
    } else {
        PatternScale::Reference(reference_amplitude(&config))
    };
    beampattern_grid(&report.final_layout, &report.final_beamformer, rs, ts, scale)
}

/// Expected grid value at a warden cell when the covert constraint is tight:
/// the threshold rescaled from the warden's path loss to the reference loss.
pub fn warden_cell_limit(config: &ScenarioConfig, warden: usize, threshold_w: f64) -> Result<f64> {
    let w = config.willies[warden];
    let lw = path_loss_amplitude(w.range_m, &config.loss, LinkKind::Warden)?;
    let r = reference_amplitude(config);
    Ok(threshold_w * r * r / (lw * lw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets;

    #[test]
    fn single_antenna_pattern_is_flat() {
        let layout = ArrayLayout { positions_m: vec![0.0], frequencies_hz: vec![10e9] };
        let w = Beamformer { weights: vec![Complex64::new(0.3, 0.4)] };
        let bp = beampattern_grid(
            &layout,
            &w,
            GridSpan::new(800.0, 1200.0, 5).unwrap(),
            GridSpan::new(0.0, 1.0, 4).unwrap(),
            PatternScale::Reference(2.0),
        )
        .unwrap();
        for row in &bp.power {
            for &p in row {
                assert!((p - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_has_header_and_all_cells() {
        let cfg = presets::low_correlation(4);
        let layout = ArrayLayout::phased_array(&cfg);
        let w = Beamformer { weights: vec![Complex64::new(0.05, 0.0); 4] };
        let bp = beampattern_grid(
            &layout,
            &w,
            GridSpan::new(900.0, 1100.0, 3).unwrap(),
            GridSpan::new(0.0, 0.5, 2).unwrap(),
            PatternScale::Reference(1.0),
        )
        .unwrap();
        let csv = bp.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r_m,theta_deg,power");
        assert_eq!(lines.len(), 1 + 6);
    }

    #[test]
    fn spec_requires_sweep() {
        let err = ExperimentSpec::from_json(r#"{"scenario": "s.json", "kind": "rate_vs_m"}"#).unwrap_err();
        assert!(err.to_string().contains("sweep"), "{err}");
        let err = ExperimentSpec::from_json(r#"{"scenario": "s.json", "kind": "plot"}"#).unwrap_err();
        assert!(err.to_string().contains("kind"), "{err}");
    }

    #[test]
    fn sample_sweep_keeps_spacing() {
        let cfg = presets::imperfect_csi(4, 5);
        let c = with_samples(&cfg, 3).unwrap();
        let u = c.uncertainty.unwrap();
        assert!((u.delta_r_m[0] - 10.0).abs() < 1e-12);
        assert!((u.delta_theta_rad[1].to_degrees() - 1.0).abs() < 1e-12);
    }
}
