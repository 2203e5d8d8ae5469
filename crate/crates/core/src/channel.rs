//! Steering vectors, array layouts and the channel-correlation objective.

use std::f64::consts::TAU;

use log::warn;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::Beamformer;
use crate::error::{Error, Result};
use crate::scenario::{path_loss_amplitude, LinkKind, PathLossModel, PolarCoordinate, ScenarioConfig, SPEED_OF_LIGHT};

/// Relative slack used when checking layout constraints that were produced by
/// clamping (`x + d - x` is not exactly `d` in floating point).
const LAYOUT_SLACK: f64 = 1e-9;

/// Antenna position vector (meters) and antenna frequency vector (hertz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub positions_m: Vec<f64>,
    pub frequencies_hz: Vec<f64>,
}

impl ArrayLayout {
    pub fn len(&self) -> usize {
        self.positions_m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions_m.is_empty()
    }

    /// Half-wavelength uniform array on the carrier: the phased-array layout.
    pub fn phased_array(config: &ScenarioConfig) -> Self {
        let spacing = (0.5 * config.wavelength_m()).max(config.d_min_m);
        let m = config.num_antennas;
        Self {
            positions_m: (0..m).map(|i| i as f64 * spacing).collect(),
            frequencies_hz: vec![config.carrier_hz; m],
        }
    }

    /// Phased-array positions with the frequencies spread linearly over
    /// `[f_C, f_C + ΔF]`.
    pub fn linear_ramp(config: &ScenarioConfig) -> Self {
        let mut layout = Self::phased_array(config);
        layout.frequencies_hz = ramp_frequencies(config);
        layout
    }

    /// Random feasible positions (uniform gaps above `D_min`) with the linear
    /// frequency ramp.
    pub fn random_positions<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Self {
        let m = config.num_antennas;
        let slack = (config.d_max_m - (m - 1) as f64 * config.d_min_m).max(0.0);
        let mut cuts: Vec<f64> = (0..m - 1).map(|_| rng.gen::<f64>() * slack).collect();
        cuts.sort_by(f64::total_cmp);
        let mut positions = Vec::with_capacity(m);
        positions.push(0.0);
        let mut prev_cut = 0.0;
        for (i, cut) in cuts.into_iter().enumerate() {
            let extra = cut - prev_cut;
            prev_cut = cut;
            positions.push(positions[i] + config.d_min_m + extra);
        }
        Self { positions_m: positions, frequencies_hz: ramp_frequencies(config) }
    }

    /// Random positions as [`Self::random_positions`] and frequencies drawn
    /// uniformly from the allowed band.
    pub fn random<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Self {
        let mut layout = Self::random_positions(config, rng);
        for f in &mut layout.frequencies_hz {
            *f = config.carrier_hz + rng.gen::<f64>() * config.delta_f_hz;
        }
        layout
    }

    /// Checks the position and frequency constraints of `config`.
    pub fn check_feasible(&self, config: &ScenarioConfig) -> Result<()> {
        let m = config.num_antennas;
        if self.positions_m.len() != m || self.frequencies_hz.len() != m {
            return Err(Error::InfeasibleLayout(format!(
                "expected {m} antennas, got {} positions and {} frequencies",
                self.positions_m.len(),
                self.frequencies_hz.len()
            )));
        }
        let tol = LAYOUT_SLACK * config.d_min_m;
        if self.positions_m[0] != 0.0 {
            return Err(Error::InfeasibleLayout("first antenna must sit at 0".into()));
        }
        for (i, w) in self.positions_m.windows(2).enumerate() {
            if w[1] - w[0] < config.d_min_m - tol {
                return Err(Error::InfeasibleLayout(format!(
                    "antennas {} and {} are {} m apart, below D_min = {} m",
                    i + 1,
                    i + 2,
                    w[1] - w[0],
                    config.d_min_m
                )));
            }
        }
        if self.positions_m[m - 1] > config.d_max_m + tol {
            return Err(Error::InfeasibleLayout(format!(
                "last antenna at {} m exceeds D_max = {} m",
                self.positions_m[m - 1],
                config.d_max_m
            )));
        }
        let ftol = 1e-6;
        for (i, &f) in self.frequencies_hz.iter().enumerate() {
            if f < config.carrier_hz - ftol || f > config.carrier_hz + config.delta_f_hz + ftol {
                return Err(Error::InfeasibleLayout(format!(
                    "antenna {} frequency {f} Hz outside [f_C, f_C + ΔF]",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

fn ramp_frequencies(config: &ScenarioConfig) -> Vec<f64> {
    let m = config.num_antennas;
    (0..m)
        .map(|i| config.carrier_hz + i as f64 * config.delta_f_hz / (m - 1) as f64)
        .collect()
}

/// Complex channel from the array to one receiver point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<Complex64>,
    /// Whether the path-loss amplitude has been applied.
    pub scaled: bool,
}

impl ChannelVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `<self, other> = Σ self_m · conj(other_m)`.
    pub fn inner(&self, other: &ChannelVector) -> Complex64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a * b.conj()).sum()
    }

    /// Received amplitude `h · w`.
    pub fn apply(&self, w: &Beamformer) -> Complex64 {
        self.entries.iter().zip(&w.weights).map(|(h, w)| h * w).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|h| h.norm_sqr()).sum()
    }
}

/// A list of receiver points, e.g. the sampled uncertainty region of a warden.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SamplePointSet {
    pub points: Vec<PolarCoordinate>,
}

impl SamplePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Optional path loss applied by [`channel_vector`].
#[derive(Debug, Clone, Copy)]
pub struct LinkLoss<'a> {
    pub model: &'a PathLossModel,
    pub kind: LinkKind,
}

/// `h_m = exp(−j2π f_m (t − (r − x_m sinθ)/c))`, times `Lfs(r)` when a loss is supplied.
pub fn channel_vector(
    layout: &ArrayLayout,
    point: &PolarCoordinate,
    t: f64,
    loss: Option<LinkLoss<'_>>,
) -> Result<ChannelVector> {
    let amp = match loss {
        Some(l) => path_loss_amplitude(point.range_m, l.model, l.kind)?,
        None => 1.0,
    };
    let sin_t = point.angle_rad.sin();
    let entries = layout
        .positions_m
        .iter()
        .zip(&layout.frequencies_hz)
        .map(|(&x, &f)| {
            let delay = (point.range_m - x * sin_t) / SPEED_OF_LIGHT;
            // whole cycles carry no phase; dropping them keeps the argument small
            let frac = frac_product(f, t) - frac_product(f, delay);
            Complex64::from_polar(amp, -TAU * frac)
        })
        .collect();
    Ok(ChannelVector { entries, scaled: loss.is_some() })
}

/// Fractional part of `a·b` in `[-½, ½]`, accurate even when the product is huge.
fn frac_product(a: f64, b: f64) -> f64 {
    let p = a * b;
    let err = a.mul_add(b, -p);
    let whole = p.round();
    (p - whole) + err
}

/// `Σ_p |<h_ab, h_p>|²` over loss-free steering vectors at time `t`.
pub fn correlation_objective_at(
    layout: &ArrayLayout,
    bob: &PolarCoordinate,
    points: &SamplePointSet,
    t: f64,
) -> f64 {
    let hb = channel_vector(layout, bob, t, None).expect("loss-free channel");
    points
        .points
        .iter()
        .map(|p| {
            let hw = channel_vector(layout, p, t, None).expect("loss-free channel");
            hb.inner(&hw).norm_sqr()
        })
        .sum()
}

/// Sum of squared channel correlations between Bob and every point of the set.
pub fn correlation_objective(
    layout: &ArrayLayout,
    bob: &PolarCoordinate,
    points: &SamplePointSet,
) -> f64 {
    correlation_objective_at(layout, bob, points, 0.0)
}

/// Realizes the time-varying beamformer: `w_m(t) = w_m(0) · exp(+j2π f_m t)`.
pub fn time_rotated_beamformer(w: &Beamformer, layout: &ArrayLayout, t: f64) -> Beamformer {
    let weights = w
        .weights
        .iter()
        .zip(&layout.frequencies_hz)
        .map(|(wm, &f)| {
            wm * Complex64::from_polar(1.0, TAU * frac_product(f, t))
        })
        .collect();
    Beamformer { weights }
}

/// The L×L grid of sampled coordinates around warden `warden_index`,
/// nominal point in the center.
pub fn build_uncertainty_grid(config: &ScenarioConfig, warden_index: usize) -> Result<SamplePointSet> {
    let nominal = *config
        .willies
        .get(warden_index)
        .ok_or_else(|| Error::Domain(format!("no warden with index {warden_index}")))?;
    let u = config
        .uncertainty
        .as_ref()
        .ok_or_else(|| Error::config("uncertainty", "scenario has no uncertainty block"))?;
    let l = u.samples_per_axis;
    if l == 0 {
        return Err(Error::config("uncertainty.samples", "must be >= 1"));
    }
    let dr = u.delta_r_m[warden_index];
    let dt = u.delta_theta_rad[warden_index];
    if l == 1 {
        if dr > 0.0 || dt > 0.0 {
            warn!("one sample per axis: uncertainty grid of warden {warden_index} degenerates");
        }
        return Ok(SamplePointSet { points: vec![nominal] });
    }
    let axis = |center: f64, half: f64| -> Vec<f64> {
        (0..l)
            .map(|i| center - half + i as f64 * 2.0 * half / (l - 1) as f64)
            .collect()
    };
    let ranges = axis(nominal.range_m, dr);
    let angles = axis(nominal.angle_rad, dt);
    let mut points = Vec::with_capacity(l * l);
    for &r in &ranges {
        for &a in &angles {
            points.push(PolarCoordinate { range_m: r, angle_rad: a });
        }
    }
    Ok(SamplePointSet { points })
}

/// Per-warden sample sets: the L² grid when the scenario is uncertain,
/// otherwise the nominal coordinate.
pub fn warden_sample_sets(config: &ScenarioConfig) -> Result<Vec<SamplePointSet>> {
    (0..config.num_wardens())
        .map(|k| {
            if config.uncertainty.is_some() {
                build_uncertainty_grid(config, k)
            } else {
                Ok(SamplePointSet { points: vec![config.willies[k]] })
            }
        })
        .collect()
}

/// All warden sample points in one set.
pub fn all_warden_points(config: &ScenarioConfig) -> Result<SamplePointSet> {
    let points = warden_sample_sets(config)?
        .into_iter()
        .flat_map(|s| s.points)
        .collect();
    Ok(SamplePointSet { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_element(config: &ScenarioConfig, spacing: f64) -> ArrayLayout {
        ArrayLayout {
            positions_m: vec![0.0, spacing],
            frequencies_hz: vec![config.carrier_hz; 2],
        }
    }

    #[test]
    fn single_antenna_magnitude_is_path_loss() {
        let cfg = presets::low_correlation(2);
        let layout = ArrayLayout { positions_m: vec![0.0], frequencies_hz: vec![cfg.carrier_hz] };
        let loss = LinkLoss { model: &cfg.loss, kind: LinkKind::Legitimate };
        let h = channel_vector(&layout, &cfg.bob, 0.0, Some(loss)).unwrap();
        let lfs = path_loss_amplitude(cfg.bob.range_m, &cfg.loss, LinkKind::Legitimate).unwrap();
        assert_eq!(h.len(), 1);
        assert_relative_eq!(h.entries[0].norm(), lfs, max_relative = 1e-12);
        assert!(h.scaled);
    }

    #[test]
    fn in_phase_at_one_wavelength_broadside() {
        let cfg = presets::low_correlation(4);
        let layout = ArrayLayout::phased_array(&cfg);
        let p = PolarCoordinate { range_m: cfg.wavelength_m(), angle_rad: 0.0 };
        let h = channel_vector(&layout, &p, 0.0, None).unwrap();
        for e in &h.entries {
            assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-9, "{e}");
        }
    }

    #[test]
    fn half_wavelength_pair_at_thirty_degrees() {
        let cfg = presets::low_correlation(2);
        let layout = two_element(&cfg, cfg.wavelength_m() / 2.0);
        let p = PolarCoordinate::from_degrees(1000.0, 30.0).unwrap();
        let h = channel_vector(&layout, &p, 0.0, None).unwrap();
        // the element further along the axis is closer, so its phase lags by π/2
        let dphi = (h.entries[0] * h.entries[1].conj()).arg();
        assert!((dphi - std::f64::consts::FRAC_PI_2).abs() < 1e-9, "{dphi}");
    }

    #[test]
    fn unscaled_entries_have_unit_modulus() {
        let cfg = presets::high_correlation(12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layout = ArrayLayout::random(&cfg, &mut rng);
        for w in &cfg.willies {
            let h = channel_vector(&layout, w, 0.37, None).unwrap();
            assert!(h.entries.iter().all(|e| (e.norm() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn identical_points_give_m_squared() {
        let cfg = presets::low_correlation(6);
        let layout = ArrayLayout::phased_array(&cfg);
        let pts = SamplePointSet { points: vec![cfg.bob; 3] };
        let v = correlation_objective(&layout, &cfg.bob, &pts);
        assert_relative_eq!(v, 3.0 * 36.0, max_relative = 1e-12);
    }

    #[test]
    fn engineered_cancellation_gives_zero() {
        // Two antennas half a wavelength apart: a warden at the angle with
        // sinθ_w − sinθ_b = 1 sees the second element shifted by exactly π.
        let cfg = presets::low_correlation(2);
        let layout = two_element(&cfg, cfg.wavelength_m() / 2.0);
        let bob = PolarCoordinate::from_degrees(1000.0, -30.0).unwrap();
        let w = PolarCoordinate::from_degrees(1000.0, 30.0).unwrap();
        let v = correlation_objective(&layout, &bob, &SamplePointSet { points: vec![w] });
        assert!(v < 1e-12, "{v}");
    }

    #[test]
    fn objective_does_not_depend_on_time() {
        let cfg = presets::high_correlation(8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let layout = ArrayLayout::random(&cfg, &mut rng);
        let pts = SamplePointSet { points: cfg.willies.clone() };
        let v0 = correlation_objective_at(&layout, &cfg.bob, &pts, 0.0);
        for t in [1e-6, 3.7] {
            let v = correlation_objective_at(&layout, &cfg.bob, &pts, t);
            assert!((v - v0).abs() <= 1e-9 * v0.max(1.0), "{v} vs {v0}");
        }
    }

    #[test]
    fn rotated_beamformer_preserves_magnitudes() {
        let cfg = presets::low_correlation(5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let layout = ArrayLayout::random(&cfg, &mut rng);
        let w = Beamformer {
            weights: (0..5).map(|i| Complex64::new(0.3 * i as f64, 1.0 - 0.1 * i as f64)).collect(),
        };
        assert_eq!(time_rotated_beamformer(&w, &layout, 0.0), w);
        for t in [2.5e-7, 1.3, 42.0] {
            let wt = time_rotated_beamformer(&w, &layout, t);
            for p in std::iter::once(&cfg.bob).chain(&cfg.willies) {
                let a0 = channel_vector(&layout, p, 0.0, None).unwrap().apply(&w).norm();
                let at = channel_vector(&layout, p, t, None).unwrap().apply(&wt).norm();
                assert!((a0 - at).abs() < 1e-10 * a0.max(1.0), "{a0} vs {at}");
            }
        }
    }

    #[test]
    fn grid_degenerates_to_nominal() {
        let cfg = presets::imperfect_csi(4, 1);
        let g = build_uncertainty_grid(&cfg, 1).unwrap();
        assert_eq!(g.points, vec![cfg.willies[1]]);
    }

    #[test]
    fn three_point_grid() {
        let mut cfg = presets::imperfect_csi(4, 3);
        cfg.willies[0] = PolarCoordinate::from_degrees(1100.0, 10.0).unwrap();
        let g = build_uncertainty_grid(&cfg, 0).unwrap();
        assert_eq!(g.len(), 9);
        let mut ranges: Vec<f64> = g.points.iter().map(|p| p.range_m).collect();
        ranges.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(ranges.len(), 3);
        for (r, e) in [1090.0, 1100.0, 1110.0].iter().zip(g.points.iter().step_by(3)) {
            assert_relative_eq!(e.range_m, *r, max_relative = 1e-12);
        }
        for (a, e) in [9.0, 10.0, 11.0].iter().zip(&g.points[..3]) {
            assert_relative_eq!(e.angle_deg(), *a, max_relative = 1e-12);
        }
        assert_eq!(g.points[4], cfg.willies[0]);
    }

    #[test]
    fn random_layouts_are_feasible() {
        let cfg = presets::low_correlation(16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            ArrayLayout::random(&cfg, &mut rng).check_feasible(&cfg).unwrap();
        }
        ArrayLayout::phased_array(&cfg).check_feasible(&cfg).unwrap();
        ArrayLayout::linear_ramp(&cfg).check_feasible(&cfg).unwrap();
    }
}
