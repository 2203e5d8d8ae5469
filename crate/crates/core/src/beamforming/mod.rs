//! Transmit beamformer design under per-point covert power thresholds.
//!
//! Three solvers are provided: [`solve_socp_exact`] (the default, exact
//! because the problem is convex after fixing Bob's phase), [`solve_sdr`]
//! with [`randomize`], and the zero-leakage [`nullspace_beamformer`].

mod nullspace;
mod sdp;
mod socp;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{channel_vector, ArrayLayout, ChannelVector, LinkLoss, SamplePointSet};
use crate::covertness::covert_power_threshold;
use crate::error::Result;
use crate::scenario::{LinkKind, ScenarioConfig};

pub use nullspace::nullspace_beamformer;
pub use sdp::{solve_sdr, SdrSolution};
pub use socp::solve_socp_exact;

/// Default number of Gaussian randomization draws.
pub const DEFAULT_RANDOMIZATION_SAMPLES: usize = 1000;

/// Transmit weights at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beamformer {
    pub weights: Vec<Complex64>,
}

impl Beamformer {
    pub fn zeros(m: usize) -> Self {
        Self { weights: vec![Complex64::new(0.0, 0.0); m] }
    }

    pub fn power(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { weights: self.weights.iter().map(|w| w * factor).collect() }
    }

    pub(crate) fn from_vector(v: &DVector<Complex64>) -> Self {
        Self { weights: v.iter().copied().collect() }
    }
}

/// Maximize `|h_bob w|²` subject to `‖w‖² ≤ P` and `|g_i w|² ≤ t_i`.
///
/// A threshold of `f64::INFINITY` disables its constraint.
#[derive(Debug, Clone)]
pub struct BeamformingProblem {
    pub h_bob: ChannelVector,
    pub warden_channels: Vec<ChannelVector>,
    pub thresholds_w: Vec<f64>,
    pub p_max_w: f64,
}

/// Relative slack tolerated when checking constraints.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

impl BeamformingProblem {
    /// Builds the problem for `layout`, one constraint per sample point;
    /// `owners[i]` is the warden whose noise level applies to point `i`.
    pub fn for_layout(
        config: &ScenarioConfig,
        layout: &ArrayLayout,
        points: &SamplePointSet,
        owners: &[usize],
    ) -> Result<Self> {
        let bob_loss = LinkLoss { model: &config.loss, kind: LinkKind::Legitimate };
        let warden_loss = LinkLoss { model: &config.loss, kind: LinkKind::Warden };
        let h_bob = channel_vector(layout, &config.bob, 0.0, Some(bob_loss))?;
        let mut warden_channels = Vec::with_capacity(points.len());
        let mut thresholds_w = Vec::with_capacity(points.len());
        for (p, &k) in points.points.iter().zip(owners) {
            warden_channels.push(channel_vector(layout, p, 0.0, Some(warden_loss))?);
            thresholds_w.push(covert_power_threshold(config.noise_willie_w[k], config.epsilon)?);
        }
        Ok(Self { h_bob, warden_channels, thresholds_w, p_max_w: config.p_max_w })
    }

    pub fn num_antennas(&self) -> usize {
        self.h_bob.len()
    }

    pub fn objective(&self, w: &Beamformer) -> f64 {
        self.h_bob.apply(w).norm_sqr()
    }

    /// Largest ratio of used to allowed resource over all constraints
    /// (power first). Values ≤ 1 are feasible.
    pub fn load(&self, w: &Beamformer) -> f64 {
        let mut worst = w.power() / self.p_max_w;
        for (g, &t) in self.warden_channels.iter().zip(&self.thresholds_w) {
            let leak = g.apply(w).norm_sqr();
            let scale = if t.is_finite() { t } else { continue };
            let ratio = if scale > 0.0 {
                leak / scale
            } else {
                // zero thresholds are compared against the largest possible leakage
                leak / (1e-18 * self.p_max_w * g.norm_sqr()).max(f64::MIN_POSITIVE)
            };
            worst = worst.max(ratio);
        }
        worst
    }

    pub fn is_feasible(&self, w: &Beamformer) -> bool {
        self.load(w) <= 1.0 + FEASIBILITY_SLACK
    }

    /// Scales `w` down (never up) so that every constraint holds.
    pub(crate) fn make_feasible(&self, w: Beamformer) -> Beamformer {
        let load = self.load(&w);
        if load > 1.0 {
            w.scaled((1.0 / load).sqrt() * (1.0 - 1e-12))
        } else {
            w
        }
    }

    /// Binding-ratio scale factor: the largest `α` with `α w` feasible,
    /// ignoring constraints with zero threshold.
    fn binding_scale(&self, w: &Beamformer) -> f64 {
        let mut ratio = w.power() / self.p_max_w;
        for (g, &t) in self.warden_channels.iter().zip(&self.thresholds_w) {
            if t.is_finite() && t > 0.0 {
                ratio = ratio.max(g.apply(w).norm_sqr() / t);
            }
        }
        if ratio > 0.0 {
            (1.0 / ratio).sqrt()
        } else {
            0.0
        }
    }

    /// Orthonormal basis (columns) of the subspace where every
    /// zero-threshold channel sees nothing.
    pub(crate) fn free_subspace(&self) -> DMatrix<Complex64> {
        let m = self.num_antennas();
        let zero: Vec<&ChannelVector> = self
            .warden_channels
            .iter()
            .zip(&self.thresholds_w)
            .filter(|(_, &t)| t == 0.0)
            .map(|(g, _)| g)
            .collect();
        if zero.is_empty() {
            return DMatrix::identity(m, m);
        }
        // eigenvectors of Σ g† g with (numerically) zero eigenvalue
        let mut gram = DMatrix::<Complex64>::zeros(m, m);
        for g in zero {
            let n = g.norm_sqr().sqrt();
            let row = DVector::from_iterator(m, g.entries.iter().map(|e| e / n));
            gram += row.conjugate() * row.transpose();
        }
        let eig = gram.symmetric_eigen();
        let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] <= 1e-10 * top).collect();
        DMatrix::from_fn(m, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
    }
}

/// `h` as a column vector `h†` of length M.
pub(crate) fn adjoint_column(h: &ChannelVector) -> DVector<Complex64> {
    DVector::from_iterator(h.len(), h.entries.iter().map(|e| e.conj()))
}

/// Recovers a feasible beamformer from an SDR covariance.
pub fn randomize(
    sol: &SdrSolution,
    problem: &BeamformingProblem,
    n_samples: usize,
    seed: u64,
) -> Beamformer {
    let q = problem.free_subspace();
    let eig = sol.w_matrix.clone().symmetric_eigen();
    let m = problem.num_antennas();
    let project = |v: DVector<Complex64>| {
        let v = &q * (q.adjoint() * v);
        Beamformer::from_vector(&v)
    };
    if sol.rank1 {
        let i = eig.eigenvalues.imax();
        let v = project(eig.eigenvectors.column(i).into_owned());
        let w = v.scaled(problem.binding_scale(&v));
        return problem.make_feasible(w);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let mut best = Beamformer::zeros(m);
    let mut best_value = 0.0;
    for _ in 0..n_samples {
        let xi = DVector::from_fn(m, |i, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * (roots[i] * std::f64::consts::FRAC_1_SQRT_2)
        });
        let v = project(&eig.eigenvectors * xi);
        let w = problem.make_feasible(v.scaled(problem.binding_scale(&v)));
        let value = problem.objective(&w);
        if value > best_value {
            best_value = value;
            best = w;
        }
    }
    best
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::Rng;

    /// Random instance with channels of magnitude ~1 and thresholds between
    /// 1e-3 and 1 times the unconstrained leakage.
    pub fn random_problem(rng: &mut ChaCha8Rng, m: usize, k: usize) -> BeamformingProblem {
        let vec = |rng: &mut ChaCha8Rng| ChannelVector {
            entries: (0..m).map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * 6.283)).collect(),
            scaled: true,
        };
        let h_bob = vec(rng);
        let warden_channels: Vec<_> = (0..k).map(|_| vec(rng)).collect();
        let thresholds_w = (0..k).map(|_| 10f64.powf(-3.0 * rng.gen::<f64>()) * m as f64).collect();
        BeamformingProblem { h_bob, warden_channels, thresholds_w, p_max_w: 1.0 }
    }
}
