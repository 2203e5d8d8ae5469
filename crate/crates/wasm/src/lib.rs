//! Browser bindings: beampatterns, BSUM traces and covert rates for the
//! bundled scenario presets.

use mfda_core::bsum::StopRule;
use mfda_core::experiment::{report_beampattern, seeded_trace, GridSpec, TraceBlock};
use mfda_core::orchestrator::{run_nested, run_two_stage_ao, upper_bound_rate};
use mfda_core::scenario::{load_scenario, presets, render_scenario};
use mfda_core::{RunOptions, ScenarioConfig, Strategy};
use wasm_bindgen::prelude::*;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn scenario(json: &str) -> Result<ScenarioConfig, JsError> {
    load_scenario(json).map_err(js)
}

/// Scenario document for `"low"`, `"high"` or `"imperfect"` with `m` antennas.
#[wasm_bindgen]
pub fn preset(name: &str, m: usize) -> Result<String, JsError> {
    let cfg = match name {
        "low" => presets::low_correlation(m),
        "high" => presets::high_correlation(m),
        "imperfect" => presets::imperfect_csi(m, 3),
        _ => return Err(JsError::new(&format!("unknown preset {name:?}"))),
    };
    cfg.validate().map_err(js)?;
    Ok(render_scenario(&cfg))
}

/// Optimizes `strategy` on the scenario and returns the normalized
/// beampattern row-major over `n_r` ranges by `n_theta` angles, followed by
/// the grid bounds `[r_lo, r_hi, theta_lo_deg, theta_hi_deg]`.
#[wasm_bindgen]
pub fn beampattern(scenario_json: &str, strategy: &str, n_r: usize, n_theta: usize) -> Result<Vec<f64>, JsError> {
    let cfg = scenario(scenario_json)?;
    let s: Strategy = strategy.parse().map_err(js)?;
    let report = run_two_stage_ao(&cfg, s, &RunOptions::default()).map_err(js)?;
    let grid = GridSpec { n_r, n_theta, ..GridSpec::default() };
    let bp = report_beampattern(&report, &grid, false).map_err(js)?;
    let mut out: Vec<f64> = bp.power.into_iter().flatten().collect();
    out.extend([grid.r_lo_m, grid.r_hi_m, grid.theta_lo_deg, grid.theta_hi_deg]);
    Ok(out)
}

/// Objective after each BSUM coordinate update from a seeded random start.
/// `block` is `"positions"` or `"frequencies"`.
#[wasm_bindgen]
pub fn bsum_trace(scenario_json: &str, block: &str, seed: u64, max_iterations: usize) -> Result<Vec<f64>, JsError> {
    let cfg = scenario(scenario_json)?;
    let block = match block {
        "positions" => TraceBlock::Positions,
        "frequencies" => TraceBlock::Frequencies,
        _ => return Err(JsError::new(&format!("unknown block {block:?}"))),
    };
    let stop = StopRule { max_iterations, ..StopRule::perfect_csi(cfg.num_antennas) };
    seeded_trace(&cfg, block, seed, &stop).map_err(js)
}

/// Covert rates in bits for PA, FDA, MFDA (warm-started in that order) and
/// the unconstrained bound.
#[wasm_bindgen]
pub fn rates(scenario_json: &str) -> Result<Vec<f64>, JsError> {
    let cfg = scenario(scenario_json)?;
    let order = [Strategy::Pa, Strategy::Fda, Strategy::Mfda];
    let runs = run_nested(&cfg, &order, &RunOptions::default());
    let mut out = Vec::with_capacity(4);
    for s in order {
        let (_, r) = runs.iter().find(|(k, _)| *k == s).expect("requested strategy");
        out.push(r.as_ref().map_err(js)?.covert_rate_bits);
    }
    out.push(upper_bound_rate(&cfg));
    Ok(out)
}
