//! Semidefinite relaxation of the beamforming problem.
//!
//! The relaxation `max tr(H W)` over `W ⪰ 0` is solved through its dual
//! `min Σ y_k` s.t. `Z(y) = Σ y_k F_k − H ⪰ 0`, `y ≥ 0`, with a log-barrier
//! method. The dual has only `K + 1` variables; the primal covariance is read
//! off the central path as `W = Z⁻¹ / t`.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use super::{adjoint_column, BeamformingProblem};
use crate::error::{Error, Result};

/// Optimal relaxed covariance.
#[derive(Debug, Clone)]
pub struct SdrSolution {
    /// `W ⪰ 0`, M×M, feasible for every constraint.
    pub w_matrix: DMatrix<Complex64>,
    /// Dual objective: an upper bound on `tr(H_bob W)` over the relaxation,
    /// within `gap` of the optimum.
    pub value: f64,
    /// `λ₂(W)/λ₁(W) ≤ 1e-6`.
    pub rank1: bool,
    /// Total Newton steps.
    pub iterations: usize,
    /// Relative duality gap at exit.
    pub gap: f64,
}

const GAP_TOL: f64 = 1e-10;
const MU: f64 = 10.0;
const MAX_NEWTON: usize = 2000;

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

struct Dual<'a> {
    /// Bob's normalized channel as a column `ĥ†`.
    e: &'a CVec,
    /// Constraint columns `ĝ_i†`, thresholds normalized to 1.
    a: &'a [CVec],
}

impl Dual<'_> {
    fn z(&self, y: &[f64]) -> CMat {
        let n = self.e.len();
        let mut z = CMat::identity(n, n) * c(y[0]) - self.e * self.e.adjoint();
        for (ai, &yi) in self.a.iter().zip(&y[1..]) {
            z += ai * ai.adjoint() * c(yi);
        }
        z
    }

    /// `Z⁻¹` and `log det Z`, or `None` outside the domain.
    fn inverse(&self, y: &[f64]) -> Option<(CMat, f64)> {
        if y.iter().any(|&v| !(v > 0.0)) {
            return None;
        }
        let chol = Cholesky::new(self.z(y))?;
        // complex square roots never fail, so definiteness is checked on the factor
        if chol.l_dirty().diagonal().iter().any(|d| !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re) {
            return None;
        }
        let logdet = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.re.ln()).sum();
        Some((chol.inverse(), logdet))
    }

    fn value(&self, y: &[f64], t: f64) -> Option<f64> {
        let (_, logdet) = self.inverse(y)?;
        Some(t * y.iter().sum::<f64>() - logdet - y.iter().map(|v| v.ln()).sum::<f64>())
    }

    /// Gradient and Hessian of the barrier at an interior `y`.
    fn derivatives(&self, y: &[f64], zinv: &CMat, t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let j = y.len();
        let za: Vec<CVec> = self.a.iter().map(|ai| zinv * ai).collect();
        let mut grad = DVector::from_fn(j, |k, _| t - 1.0 / y[k]);
        let mut hess = DMatrix::from_fn(j, j, |r, k| if r == k { 1.0 / (y[k] * y[k]) } else { 0.0 });
        grad[0] -= zinv.trace().re;
        hess[(0, 0)] += zinv.iter().map(|v| v.norm_sqr()).sum::<f64>();
        for i in 0..self.a.len() {
            grad[i + 1] -= self.a[i].dotc(&za[i]).re;
            let h0 = za[i].norm_squared();
            hess[(0, i + 1)] += h0;
            hess[(i + 1, 0)] += h0;
            for k in 0..self.a.len() {
                hess[(i + 1, k + 1)] += self.a[i].dotc(&za[k]).norm_sqr();
            }
        }
        (grad, hess)
    }
}

/// Solves the relaxation `max tr(H W)` s.t. `tr W ≤ P`, `tr(G_i W) ≤ t_i`, `W ⪰ 0`.
pub fn solve_sdr(problem: &BeamformingProblem) -> Result<SdrSolution> {
    let m = problem.num_antennas();
    let q = problem.free_subspace();
    let n = q.ncols();
    let empty = || SdrSolution {
        w_matrix: DMatrix::zeros(m, m),
        value: 0.0,
        rank1: true,
        iterations: 0,
        gap: 0.0,
    };
    if n == 0 {
        return Ok(empty());
    }
    let reduce = |h: &[Complex64]| -> CVec {
        let col = adjoint_column(&crate::channel::ChannelVector { entries: h.to_vec(), scaled: true });
        q.adjoint() * col
    };
    let e_raw = reduce(&problem.h_bob.entries);
    let scale = e_raw.norm_squared();
    if scale == 0.0 {
        return Ok(empty());
    }
    let e = &e_raw / c(scale.sqrt());
    let p = problem.p_max_w;
    let a: Vec<CVec> = problem
        .warden_channels
        .iter()
        .zip(&problem.thresholds_w)
        .filter(|(_, &t)| t > 0.0 && t.is_finite())
        .map(|(g, &t)| reduce(&g.entries) * c((p / t).sqrt()))
        .collect();
    let dual = Dual { e: &e, a: &a };

    // y₀ > ‖ê‖² = 1 keeps Z positive definite
    let mut y = vec![1.0; a.len() + 1];
    y[0] = 2.0;
    let nu = (n + y.len()) as f64;
    let mut t = 1.0;
    let mut iterations = 0;
    loop {
        loop {
            let (zinv, _) = dual.inverse(&y).expect("iterate stays interior");
            let (grad, hess) = dual.derivatives(&y, &zinv, t);
            let step_dir = match Cholesky::new(hess.clone()) {
                Some(ch) => ch.solve(&(-&grad)),
                None => hess.lu().solve(&(-&grad)).ok_or_else(|| Error::Solver {
                    solver: "sdr",
                    status: format!("singular Newton system at t = {t:.3e}"),
                })?,
            };
            let dec = -grad.dot(&step_dir);
            iterations += 1;
            if dec / 2.0 <= 1e-12 {
                break;
            }
            if iterations > MAX_NEWTON {
                return Err(Error::Solver {
                    solver: "sdr",
                    status: format!("Newton budget exhausted with gap bound {:.3e}", nu / t),
                });
            }
            let f0 = dual.value(&y, t).expect("iterate stays interior");
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-14 {
                let cand: Vec<f64> = y.iter().zip(step_dir.iter()).map(|(a, d)| a + step * d).collect();
                if let Some(f1) = dual.value(&cand, t) {
                    if f1 <= f0 - 0.25 * step * dec {
                        moved = f0 - f1 > 1e-15 * f0.abs().max(1.0);
                        y = cand;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let bound: f64 = y.iter().sum();
        if nu / t <= GAP_TOL * bound {
            break;
        }
        t *= MU;
    }
    let (zinv, _) = dual.inverse(&y).expect("iterate stays interior");
    let x = zinv * c(1.0 / t);
    // centering is inexact; shrink onto the feasible set
    let load = a.iter().map(|ai| ai.dotc(&(&x * ai)).re).fold(x.trace().re, f64::max);
    let x = if load > 1.0 { x * c(1.0 / load) } else { x };
    let w_matrix = &q * &x * q.adjoint() * c(p);
    let w_matrix = (&w_matrix + w_matrix.adjoint()) * c(0.5);
    let bound: f64 = y.iter().sum();
    let value = bound * scale * p;
    let eig = w_matrix.clone().symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let rank1 = ev.len() < 2 || ev[1] <= 1e-6 * ev[0];
    Ok(SdrSolution { w_matrix, value, rank1, iterations, gap: nu / t / bound })
}
