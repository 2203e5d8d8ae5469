//! Exact beamformer via a second-order cone program.
//!
//! Rotating `w` so that `h_bob w` is real and nonnegative does not change any
//! constraint, so maximizing `|h_bob w|` equals maximizing `Re(h_bob w)`,
//! which is linear, over a product of second-order cones.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
    SupportedConeT::SecondOrderConeT,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Beamformer, BeamformingProblem};
use crate::error::{Error, Result};

/// Column-major dense to CSC.
fn to_csc(rows: usize, cols: usize, dense: &[f64]) -> CscMatrix<f64> {
    let mut colptr = Vec::with_capacity(cols + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for c in 0..cols {
        for r in 0..rows {
            let v = dense[c * rows + r];
            if v != 0.0 {
                rowval.push(r);
                nzval.push(v);
            }
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(rows, cols, colptr, rowval, nzval)
}

/// Globally optimal beamformer for `problem`.
pub fn solve_socp_exact(problem: &BeamformingProblem) -> Result<Beamformer> {
    let m = problem.num_antennas();
    let q = problem.free_subspace();
    let n = q.ncols();
    if n == 0 || problem.h_bob.norm_sqr() == 0.0 {
        return Ok(Beamformer::zeros(m));
    }
    // w = √P · Q v; channels are taken into the reduced coordinates
    let row = |h: &[Complex64]| -> DVector<Complex64> {
        let h = DMatrix::from_row_slice(1, m, h);
        (h * &q).transpose().column(0).into_owned()
    };
    let hb = row(&problem.h_bob.entries);
    let hb_norm = hb.norm();
    if hb_norm <= 1e-14 * problem.h_bob.norm_sqr().sqrt() {
        return Ok(Beamformer::zeros(m));
    }
    let sqrt_p = problem.p_max_w.sqrt();
    let mut constraints: Vec<DVector<Complex64>> = Vec::new();
    for (g, &t) in problem.warden_channels.iter().zip(&problem.thresholds_w) {
        if t > 0.0 && t.is_finite() {
            constraints.push(row(&g.entries) * Complex64::new(sqrt_p / t.sqrt(), 0.0));
        }
    }

    // variables z = [Re v; Im v]; maximize Re(ĥ v) = Σ Re ĥ Re v − Im ĥ Im v
    let nv = 2 * n;
    let mut obj = vec![0.0; nv];
    for i in 0..n {
        obj[i] = -hb[i].re / hb_norm;
        obj[n + i] = hb[i].im / hb_norm;
    }
    let rows = (nv + 1) + 3 * constraints.len();
    let mut a = vec![0.0; rows * nv];
    let mut b = vec![0.0; rows];
    let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(1 + constraints.len());
    // ‖v‖ ≤ 1
    b[0] = 1.0;
    for i in 0..nv {
        a[i * rows + 1 + i] = -1.0;
    }
    cones.push(SecondOrderConeT(nv + 1));
    // |ĝ v| ≤ 1
    for (k, g) in constraints.iter().enumerate() {
        let r0 = nv + 1 + 3 * k;
        b[r0] = 1.0;
        for i in 0..n {
            let (gr, gi) = (g[i].re, g[i].im);
            a[i * rows + r0 + 1] = -gr;
            a[(n + i) * rows + r0 + 1] = gi;
            a[i * rows + r0 + 2] = -gi;
            a[(n + i) * rows + r0 + 2] = -gr;
        }
        cones.push(SecondOrderConeT(3));
    }
    let a = to_csc(rows, nv, &a);
    let p = CscMatrix::<f64>::zeros((nv, nv));
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_feas(1e-10)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .max_iter(200)
        .build()
        .expect("static solver settings");
    let mut solver = DefaultSolver::new(&p, &obj, &a, &b, &cones, settings).map_err(|e| Error::Solver {
        solver: "socp",
        status: format!("{e:?}"),
    })?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        status => {
            return Err(Error::Solver {
                solver: "socp",
                status: format!(
                    "{status:?} after {} iterations (primal residual {:.2e}, dual residual {:.2e})",
                    solver.info.iterations, solver.info.res_primal, solver.info.res_dual
                ),
            })
        }
    }
    let x = &solver.solution.x;
    let v = DVector::from_fn(n, |i, _| Complex64::new(x[i], x[n + i]) * sqrt_p);
    let w = Beamformer::from_vector(&(&q * v));
    Ok(problem.make_feasible(w))
}
