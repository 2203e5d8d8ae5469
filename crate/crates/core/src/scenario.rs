//! Scenario configuration, physical units and the path-loss model.
//!
//! Everything inside [`ScenarioConfig`] is SI (watts, meters, hertz, radians).
//! dBm, degrees and wavelength-denominated distances only exist in the JSON
//! document handled by [`load_scenario`] and [`render_scenario`].

use std::f64::consts::FRAC_PI_2;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watts_to_dbm(p_w: f64) -> f64 {
    10.0 * p_w.log10() + 30.0
}

/// A receiver location relative to the first antenna of the array.
///
/// Angles follow the broadside convention: 0 is perpendicular to the array
/// axis, positive angles lean towards increasing antenna positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarCoordinate {
    pub range_m: f64,
    pub angle_rad: f64,
}

impl PolarCoordinate {
    pub fn new(range_m: f64, angle_rad: f64) -> Result<Self> {
        let p = Self { range_m, angle_rad };
        p.validate("coordinate")?;
        Ok(p)
    }

    pub fn from_degrees(range_m: f64, angle_deg: f64) -> Result<Self> {
        Self::new(range_m, angle_deg.to_radians())
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle_rad.to_degrees()
    }

    pub(crate) fn validate(&self, path: &str) -> Result<()> {
        if !(self.range_m.is_finite() && self.range_m > 0.0) {
            return Err(Error::config(
                format!("{path}.r_m"),
                format!("range must be positive, got {}", self.range_m),
            ));
        }
        if !(self.angle_rad.abs() < FRAC_PI_2) {
            return Err(Error::config(
                format!("{path}.theta_deg"),
                format!(
                    "angle must lie strictly inside (-90, 90) degrees, got {}",
                    self.angle_rad.to_degrees()
                ),
            ));
        }
        Ok(())
    }
}

/// Which path-loss exponent applies to a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    /// Alice to Bob.
    Legitimate,
    /// Alice to a warden.
    Warden,
}

/// Log-distance path loss. `c_db` is the power gain at `ref_distance_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    pub c_db: f64,
    pub ref_distance_m: f64,
    pub alpha_ab: f64,
    pub alpha_aw: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            c_db: -30.0,
            ref_distance_m: 1.0,
            alpha_ab: 2.0,
            alpha_aw: 3.0,
        }
    }
}

impl PathLossModel {
    pub fn exponent(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::Legitimate => self.alpha_ab,
            LinkKind::Warden => self.alpha_aw,
        }
    }

    /// Power-domain gain `C·(r/R)^(−α)`.
    pub fn power_gain(&self, r_m: f64, kind: LinkKind) -> Result<f64> {
        Ok(path_loss_amplitude(r_m, self, kind)?.powi(2))
    }

    fn validate(&self) -> Result<()> {
        if !(self.ref_distance_m > 0.0) {
            return Err(Error::config("path_loss.ref_m", "reference distance must be positive"));
        }
        if !(self.alpha_ab > 0.0) {
            return Err(Error::config("path_loss.alpha_ab", "exponent must be positive"));
        }
        if !(self.alpha_aw > 0.0) {
            return Err(Error::config("path_loss.alpha_aw", "exponent must be positive"));
        }
        if !self.c_db.is_finite() {
            return Err(Error::config("path_loss.c_db", "must be finite"));
        }
        Ok(())
    }
}

/// Channel amplitude factor `sqrt(10^(C/10) · (r/R)^(−α))`.
pub fn path_loss_amplitude(r_m: f64, model: &PathLossModel, kind: LinkKind) -> Result<f64> {
    if !(r_m > 0.0) {
        return Err(Error::Domain(format!("path loss needs a positive range, got {r_m}")));
    }
    let alpha = model.exponent(kind);
    Ok(10f64.powf(model.c_db / 20.0) * (r_m / model.ref_distance_m).powf(-alpha / 2.0))
}

/// Discretized uncertainty region around each warden.
#[derive(Debug, Clone, PartialEq)]
pub struct Uncertainty {
    /// Half-width of the range interval, one per warden.
    pub delta_r_m: Vec<f64>,
    /// Half-width of the angle interval, one per warden.
    pub delta_theta_rad: Vec<f64>,
    /// Samples per axis (odd, so the nominal point is on the grid).
    pub samples_per_axis: usize,
}

/// A validated experiment description in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_antennas: usize,
    pub carrier_hz: f64,
    pub delta_f_hz: f64,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub p_max_w: f64,
    pub noise_bob_w: f64,
    pub noise_willie_w: Vec<f64>,
    pub epsilon: f64,
    pub bob: PolarCoordinate,
    pub willies: Vec<PolarCoordinate>,
    pub loss: PathLossModel,
    pub uncertainty: Option<Uncertainty>,
}

impl ScenarioConfig {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn num_wardens(&self) -> usize {
        self.willies.len()
    }

    /// Same scenario with a different number of antennas.
    pub fn with_antennas(&self, m: usize) -> Result<Self> {
        let mut c = self.clone();
        c.num_antennas = m;
        c.validate()?;
        Ok(c)
    }

    /// Checks every invariant; the error names the offending document field.
    pub fn validate(&self) -> Result<()> {
        let m = self.num_antennas;
        if m < 2 {
            return Err(Error::config("antennas", format!("need at least 2 antennas, got {m}")));
        }
        positive("carrier_hz", self.carrier_hz)?;
        if !(self.delta_f_hz >= 0.0 && self.delta_f_hz.is_finite()) {
            return Err(Error::config("delta_f_hz", "must be a finite value >= 0"));
        }
        if self.delta_f_hz > 0.1 * self.carrier_hz {
            warn!(
                "frequency increment range {} Hz is not small against the carrier {} Hz",
                self.delta_f_hz, self.carrier_hz
            );
        }
        positive("d_min_wavelengths", self.d_min_m)?;
        let needed = (m - 1) as f64 * self.d_min_m;
        if !(self.d_max_m >= needed * (1.0 - 1e-12)) {
            return Err(Error::config(
                "d_max_wavelengths",
                format!(
                    "movable region {} m cannot hold {m} antennas at {} m spacing",
                    self.d_max_m, self.d_min_m
                ),
            ));
        }
        positive("p_max_dbm", self.p_max_w)?;
        positive("noise_bob_dbm", self.noise_bob_w)?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("epsilon", "must be a finite value >= 0"));
        }
        self.bob.validate("bob")?;
        if self.willies.is_empty() {
            return Err(Error::config("willies", "at least one warden is required"));
        }
        if self.noise_willie_w.len() != self.willies.len() {
            return Err(Error::config("willies", "one noise level per warden is required"));
        }
        for (k, (w, n)) in self.willies.iter().zip(&self.noise_willie_w).enumerate() {
            w.validate(&format!("willies[{k}]"))?;
            positive(&format!("willies[{k}].noise_dbm"), *n)?;
        }
        self.loss.validate()?;
        if let Some(u) = &self.uncertainty {
            let k = self.willies.len();
            if u.samples_per_axis == 0 || u.samples_per_axis % 2 == 0 {
                return Err(Error::config(
                    "uncertainty.samples",
                    format!("must be odd and >= 1, got {}", u.samples_per_axis),
                ));
            }
            if u.delta_r_m.len() != k || u.delta_theta_rad.len() != k {
                return Err(Error::config("uncertainty", "one half-width per warden is required"));
            }
            for (i, (&dr, &dt)) in u.delta_r_m.iter().zip(&u.delta_theta_rad).enumerate() {
                if !(dr >= 0.0) {
                    return Err(Error::config(format!("uncertainty.delta_r_m[{i}]"), "must be >= 0"));
                }
                if !(dt >= 0.0) {
                    return Err(Error::config(
                        format!("uncertainty.delta_theta_deg[{i}]"),
                        "must be >= 0",
                    ));
                }
                if dr >= self.willies[i].range_m {
                    return Err(Error::config(
                        format!("uncertainty.delta_r_m[{i}]"),
                        "range interval reaches the array",
                    ));
                }
                if (self.willies[i].angle_rad.abs() + dt) >= FRAC_PI_2 {
                    return Err(Error::config(
                        format!("uncertainty.delta_theta_deg[{i}]"),
                        "angle interval leaves (-90, 90) degrees",
                    ));
                }
            }
        }
        Ok(())
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be a finite positive value, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// JSON document

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    antennas: usize,
    carrier_hz: f64,
    delta_f_hz: f64,
    d_min_wavelengths: f64,
    d_max_wavelengths: f64,
    p_max_dbm: f64,
    noise_bob_dbm: f64,
    epsilon: f64,
    bob: PointDoc,
    willies: Vec<WillieDoc>,
    path_loss: PathLossDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uncertainty: Option<UncertaintyDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    r_m: f64,
    theta_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WillieDoc {
    r_m: f64,
    theta_deg: f64,
    noise_dbm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathLossDoc {
    c_db: f64,
    ref_m: f64,
    alpha_ab: f64,
    alpha_aw: f64,
}

/// A scalar applies to every warden; a list gives one value per warden.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PerWarden {
    All(f64),
    Each(Vec<f64>),
}

impl PerWarden {
    fn expand(&self, k: usize) -> Vec<f64> {
        match self {
            PerWarden::All(v) => vec![*v; k],
            PerWarden::Each(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UncertaintyDoc {
    delta_r_m: PerWarden,
    delta_theta_deg: PerWarden,
    samples: usize,
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })?;
    let lambda = SPEED_OF_LIGHT / doc.carrier_hz;
    let k = doc.willies.len();
    let willies = doc
        .willies
        .iter()
        .map(|w| PolarCoordinate { range_m: w.r_m, angle_rad: w.theta_deg.to_radians() })
        .collect();
    let config = ScenarioConfig {
        num_antennas: doc.antennas,
        carrier_hz: doc.carrier_hz,
        delta_f_hz: doc.delta_f_hz,
        d_min_m: doc.d_min_wavelengths * lambda,
        d_max_m: doc.d_max_wavelengths * lambda,
        p_max_w: dbm_to_watts(doc.p_max_dbm),
        noise_bob_w: dbm_to_watts(doc.noise_bob_dbm),
        noise_willie_w: doc.willies.iter().map(|w| dbm_to_watts(w.noise_dbm)).collect(),
        epsilon: doc.epsilon,
        bob: PolarCoordinate { range_m: doc.bob.r_m, angle_rad: doc.bob.theta_deg.to_radians() },
        willies,
        loss: PathLossModel {
            c_db: doc.path_loss.c_db,
            ref_distance_m: doc.path_loss.ref_m,
            alpha_ab: doc.path_loss.alpha_ab,
            alpha_aw: doc.path_loss.alpha_aw,
        },
        uncertainty: doc.uncertainty.map(|u| Uncertainty {
            delta_r_m: u.delta_r_m.expand(k),
            delta_theta_rad: u
                .delta_theta_deg
                .expand(k)
                .into_iter()
                .map(f64::to_radians)
                .collect(),
            samples_per_axis: u.samples,
        }),
    };
    config.validate()?;
    if let Some(u) = &config.uncertainty {
        if u.samples_per_axis == 1 && u.delta_r_m.iter().any(|&d| d > 0.0) {
            warn!("uncertainty grid with one sample per axis degenerates to the nominal wardens");
        }
    }
    Ok(config)
}

/// Renders a config back into the document format.
pub fn render_scenario(config: &ScenarioConfig) -> String {
    let lambda = config.wavelength_m();
    let doc = ScenarioDoc {
        antennas: config.num_antennas,
        carrier_hz: config.carrier_hz,
        delta_f_hz: config.delta_f_hz,
        d_min_wavelengths: config.d_min_m / lambda,
        d_max_wavelengths: config.d_max_m / lambda,
        p_max_dbm: watts_to_dbm(config.p_max_w),
        noise_bob_dbm: watts_to_dbm(config.noise_bob_w),
        epsilon: config.epsilon,
        bob: PointDoc { r_m: config.bob.range_m, theta_deg: config.bob.angle_deg() },
        willies: config
            .willies
            .iter()
            .zip(&config.noise_willie_w)
            .map(|(w, n)| WillieDoc {
                r_m: w.range_m,
                theta_deg: w.angle_deg(),
                noise_dbm: watts_to_dbm(*n),
            })
            .collect(),
        path_loss: PathLossDoc {
            c_db: config.loss.c_db,
            ref_m: config.loss.ref_distance_m,
            alpha_ab: config.loss.alpha_ab,
            alpha_aw: config.loss.alpha_aw,
        },
        uncertainty: config.uncertainty.as_ref().map(|u| UncertaintyDoc {
            delta_r_m: PerWarden::Each(u.delta_r_m.clone()),
            delta_theta_deg: PerWarden::Each(
                u.delta_theta_rad.iter().map(|t| t.to_degrees()).collect(),
            ),
            samples: u.samples_per_axis,
        }),
    };
    serde_json::to_string_pretty(&doc).expect("scenario document serializes")
}

/// Built-in scenarios with the reference simulation parameters.
pub mod presets {
    use super::*;

    /// Covertness budget used by the bundled scenarios.
    pub const DEFAULT_EPSILON: f64 = 0.1;

    fn base(m: usize, willies: &[(f64, f64)]) -> ScenarioConfig {
        let carrier = 10e9;
        let lambda = SPEED_OF_LIGHT / carrier;
        ScenarioConfig {
            num_antennas: m,
            carrier_hz: carrier,
            delta_f_hz: 10e6,
            d_min_m: 0.5 * lambda,
            d_max_m: 30.0 * lambda,
            p_max_w: dbm_to_watts(10.0),
            noise_bob_w: dbm_to_watts(-100.0),
            noise_willie_w: vec![dbm_to_watts(-100.0); willies.len()],
            epsilon: DEFAULT_EPSILON,
            bob: PolarCoordinate { range_m: 1000.0, angle_rad: 30f64.to_radians() },
            willies: willies
                .iter()
                .map(|&(r, t)| PolarCoordinate { range_m: r, angle_rad: t.to_radians() })
                .collect(),
            loss: PathLossModel::default(),
            uncertainty: None,
        }
    }

    /// Four wardens well separated from Bob in angle.
    pub fn low_correlation(m: usize) -> ScenarioConfig {
        base(m, &[(1050.0, 10.0), (950.0, 20.0), (1100.0, 40.0), (900.0, 50.0)])
    }

    /// Four wardens clustered around Bob.
    pub fn high_correlation(m: usize) -> ScenarioConfig {
        base(m, &[(1010.0, 26.0), (990.0, 28.0), (1020.0, 32.0), (980.0, 34.0)])
    }

    /// Three wardens with a sampled uncertainty region of `samples` points per
    /// axis spaced 10 m and 1 degree apart.
    pub fn imperfect_csi(m: usize, samples: usize) -> ScenarioConfig {
        let mut c = base(m, &[(1100.0, 10.0), (850.0, 20.0), (1150.0, 40.0)]);
        let half = (samples.saturating_sub(1)) as f64 / 2.0;
        c.uncertainty = Some(Uncertainty {
            delta_r_m: vec![10.0 * half; 3],
            delta_theta_rad: vec![(1.0 * half).to_radians(); 3],
            samples_per_axis: samples,
        });
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dbm_conversion() {
        assert_eq!(dbm_to_watts(0.0), 1.0e-3);
        assert_relative_eq!(dbm_to_watts(10.0), 1.0e-2, max_relative = 1e-14);
        assert_relative_eq!(dbm_to_watts(-100.0), 1.0e-13, max_relative = 1e-14);
    }

    #[test]
    fn path_loss_reference_values() {
        let m = PathLossModel::default();
        let a = path_loss_amplitude(1.0, &m, LinkKind::Legitimate).unwrap();
        assert_relative_eq!(a, 3.1623e-2, max_relative = 1e-4);
        let a = path_loss_amplitude(1000.0, &m, LinkKind::Legitimate).unwrap();
        assert_relative_eq!(a, 3.1623e-5, max_relative = 1e-4);
        assert_relative_eq!(a * a, 1.0e-9, max_relative = 1e-12);
        let a = path_loss_amplitude(900.0, &m, LinkKind::Warden).unwrap();
        assert_relative_eq!(a, 1.1712e-6, max_relative = 1e-4);
        assert_relative_eq!(a * a, 1.3717e-12, max_relative = 1e-4);
    }

    #[test]
    fn path_loss_rejects_nonpositive_range() {
        let m = PathLossModel::default();
        assert!(path_loss_amplitude(0.0, &m, LinkKind::Warden).is_err());
        assert!(path_loss_amplitude(-3.0, &m, LinkKind::Warden).is_err());
    }

    #[test]
    fn presets_are_valid() {
        presets::low_correlation(10).validate().unwrap();
        presets::high_correlation(20).validate().unwrap();
        presets::imperfect_csi(10, 5).validate().unwrap();
    }

    #[test]
    fn infeasible_region_is_rejected() {
        let mut c = presets::low_correlation(10);
        c.d_max_m = 8.0 * c.d_min_m;
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("d_max_wavelengths"), "{err}");
    }

    #[test]
    fn even_grid_is_rejected() {
        let mut c = presets::imperfect_csi(10, 3);
        c.uncertainty.as_mut().unwrap().samples_per_axis = 4;
        assert!(c.validate().is_err());
    }

    #[test]
    fn missing_field_reports_path() {
        let text = render_scenario(&presets::low_correlation(4));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["willies"][2].as_object_mut().unwrap().remove("noise_dbm");
        let err = load_scenario(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("willies[2]"), "{err}");
        assert!(err.contains("noise_dbm"), "{err}");
    }

    #[test]
    fn malformed_number_reports_path() {
        let text = render_scenario(&presets::low_correlation(4));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["path_loss"]["alpha_aw"] = serde_json::Value::String("three".into());
        let err = load_scenario(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("path_loss.alpha_aw"), "{err}");
    }

    #[test]
    fn scalar_uncertainty_expands_per_warden() {
        let text = render_scenario(&presets::imperfect_csi(4, 3));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["uncertainty"]["delta_r_m"] = serde_json::json!(20.0);
        v["uncertainty"]["delta_theta_deg"] = serde_json::json!([1.0, 2.0, 3.0]);
        let c = load_scenario(&v.to_string()).unwrap();
        let u = c.uncertainty.unwrap();
        assert_eq!(u.delta_r_m, vec![20.0; 3]);
        assert_relative_eq!(u.delta_theta_rad[2], 3f64.to_radians());
    }
}
