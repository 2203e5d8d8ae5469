//! KL-divergence covertness metric and the derived received-power thresholds.

use crate::error::{Error, Result};

/// Received-power statistics at one warden under the two hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionStats {
    /// Noise-only power `σ²`.
    pub lambda0_w: f64,
    /// Signal-plus-noise power `|h w|² + σ²`.
    pub lambda1_w: f64,
}

impl DetectionStats {
    pub fn new(noise_w: f64, received_w: f64) -> Self {
        Self { lambda0_w: noise_w, lambda1_w: noise_w + received_w }
    }

    fn check(&self) -> Result<()> {
        if !(self.lambda0_w > 0.0 && self.lambda1_w > 0.0) {
            return Err(Error::Domain(format!(
                "detection powers must be positive, got λ0 = {}, λ1 = {}",
                self.lambda0_w, self.lambda1_w
            )));
        }
        Ok(())
    }
}

/// `y(x) = ln x + 1/x − 1`.
pub fn y_function(x: f64) -> f64 {
    x.ln() + 1.0 / x - 1.0
}

/// `y(1 + u)` evaluated without cancellation for small `u`.
fn y_shifted(u: f64) -> f64 {
    u.ln_1p() - u / (1.0 + u)
}

/// `D(p0 ‖ p1) = ln(λ1/λ0) + λ0/λ1 − 1`.
pub fn kl_divergence(stats: &DetectionStats) -> Result<f64> {
    stats.check()?;
    let u = (stats.lambda1_w - stats.lambda0_w) / stats.lambda0_w;
    Ok(y_shifted(u).max(0.0))
}

/// Pinsker lower bound on the warden's detection error probability.
pub fn dep_lower_bound(stats: &DetectionStats) -> Result<f64> {
    let d = kl_divergence(stats)?;
    Ok((1.0 - (d / 2.0).sqrt()).max(0.0))
}

/// Unique `x ≥ 1` with `y(x) = target`.
pub fn y_inverse(target: f64) -> Result<f64> {
    Ok(1.0 + y_inverse_shifted(target)?)
}

/// Solves `y(1 + u) = target` for `u ≥ 0`.
fn y_inverse_shifted(target: f64) -> Result<f64> {
    if !(target >= 0.0) || !target.is_finite() {
        return Err(Error::Domain(format!("y inverse needs a finite target >= 0, got {target}")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while y_shifted(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    // y(1+u) ≈ u²/2 near zero
    let mut u = (2.0 * target).sqrt().min(hi);
    for _ in 0..200 {
        let g = y_shifted(u) - target;
        if g > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        // y'(1+u) = u / (1+u)²
        let d = u / ((1.0 + u) * (1.0 + u));
        let mut next = if d > 0.0 { u - g / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-15 * (1.0 + u) || hi - lo <= 1e-16 * (1.0 + hi) {
            return Ok(next);
        }
        u = next;
    }
    Ok(u)
}

/// Largest received power `|h w|²` at a warden with noise `noise_w` that keeps
/// `D ≤ 2ε²`.
pub fn covert_power_threshold(noise_w: f64, epsilon: f64) -> Result<f64> {
    if !(noise_w > 0.0) {
        return Err(Error::Domain(format!("noise power must be positive, got {noise_w}")));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::Domain(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(noise_w * y_inverse_shifted(2.0 * epsilon * epsilon)?)
}
