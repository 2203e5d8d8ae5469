use std::fs;
use std::path::{Path, PathBuf};

use mfda_core::experiment::{run_experiment, ExperimentSpec, RunSettings};
use mfda_core::scenario::{load_scenario, presets};
use mfda_core::ScenarioConfig;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn assert_same(a: &ScenarioConfig, b: &ScenarioConfig) {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
    assert_eq!(a.num_antennas, b.num_antennas);
    for (x, y) in [
        (a.carrier_hz, b.carrier_hz),
        (a.delta_f_hz, b.delta_f_hz),
        (a.d_min_m, b.d_min_m),
        (a.d_max_m, b.d_max_m),
        (a.p_max_w, b.p_max_w),
        (a.noise_bob_w, b.noise_bob_w),
        (a.epsilon, b.epsilon),
        (a.bob.range_m, b.bob.range_m),
        (a.bob.angle_rad, b.bob.angle_rad),
    ] {
        assert!(close(x, y), "{x} vs {y}");
    }
    assert_eq!(a.willies.len(), b.willies.len());
    for (p, q) in a.willies.iter().zip(&b.willies) {
        assert!(close(p.range_m, q.range_m) && close(p.angle_rad, q.angle_rad));
    }
    assert_eq!(a.uncertainty.is_some(), b.uncertainty.is_some());
}

#[test]
fn bundled_scenarios_match_presets() {
    let dir = repo().join("scenarios");
    let load = |n: &str| load_scenario(&fs::read_to_string(dir.join(n)).unwrap()).unwrap();
    assert_same(&load("low_correlation.json"), &presets::low_correlation(10));
    assert_same(&load("high_correlation.json"), &presets::high_correlation(10));
    assert_same(&load("imperfect_csi.json"), &presets::imperfect_csi(10, 3));
}

#[test]
fn bundled_specs_parse() {
    let dir = repo().join("experiments");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let spec = ExperimentSpec::from_json(&fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(dir.join(&spec.scenario).exists(), "{}", path.display());
        n += 1;
    }
    assert!(n >= 5);
}

fn write_spec(dir: &Path, body: &str) -> ExperimentSpec {
    fs::copy(repo().join("scenarios/high_correlation.json"), dir.join("scenario.json")).unwrap();
    ExperimentSpec::from_json(body).unwrap()
}

#[test]
fn trace_experiment_writes_monotone_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        r#"{"scenario": "scenario.json", "kind": "trace", "seeds": [1, 2], "max_iterations": 200}"#,
    );
    let out = tmp.path().join("out");
    let settings = RunSettings { output_dir: Some(out.clone()), seed: None };
    let manifest = run_experiment(&spec, tmp.path(), &settings).unwrap();
    assert!(manifest.errors.is_empty());
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("seed,iteration,objective"));
    let rows: Vec<(u64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    for seed in [1, 2] {
        let t: Vec<f64> = rows.iter().filter(|r| r.0 == seed).map(|r| r.1).collect();
        assert!(t.len() > 1 && t.len() <= 201);
        assert!(t.windows(2).all(|w| w[1] <= w[0]));
    }
    assert!(out.join("manifest.json").exists());
}

#[test]
fn rate_sweep_orders_strategies() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        r#"{"scenario": "scenario.json", "kind": "rate_vs_m", "sweep": [4, 6], "strategies": ["PA", "FDA", "MFDA"]}"#,
    );
    let out = tmp.path().join("out");
    let manifest = run_experiment(&spec, tmp.path(), &RunSettings { output_dir: Some(out.clone()), seed: None }).unwrap();
    assert!(manifest.errors.is_empty(), "{:?}", manifest.errors);
    let csv = fs::read_to_string(out.join("rates.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (cs, cm, cr) = (col("strategy"), col("M"), col("rate_bits"));
    for m in ["4", "6"] {
        let rate = |s: &str| -> f64 {
            csv.lines()
                .skip(1)
                .map(|l| l.split(',').collect::<Vec<_>>())
                .find(|f| f[cs] == s && f[cm] == m)
                .map(|f| f[cr].parse().unwrap())
                .unwrap()
        };
        assert!(rate("MFDA") >= rate("FDA") && rate("FDA") >= rate("PA"));
    }
    assert_eq!(fs::read_dir(out.join("reports")).unwrap().count(), 6);
}

#[test]
fn unknown_spec_field_is_named() {
    let err = ExperimentSpec::from_json(r#"{"scenario": "s.json", "kind": "trace", "seeds": [1], "sedes": 3}"#)
        .unwrap_err()
        .to_string();
    assert!(err.contains("sedes"), "{err}");
}
