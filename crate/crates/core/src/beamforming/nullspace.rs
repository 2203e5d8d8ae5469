//! Zero-leakage beamformer: Bob's matched filter projected onto the null
//! space of the stacked warden channels.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{adjoint_column, Beamformer};
use crate::channel::ChannelVector;
use crate::error::{Error, Result};

/// Smallest accepted `σ_min/σ_max` of the row-normalized warden matrix.
const RANK_TOL: f64 = 1e-10;

/// `w = √P · Π h† / ‖Π h†‖` with `Π` the projector onto `null(H_aw)`.
pub fn nullspace_beamformer(
    h_bob: &ChannelVector,
    warden_channels: &[ChannelVector],
    p_max: f64,
) -> Result<Beamformer> {
    let m = h_bob.len();
    let k = warden_channels.len();
    let hb = adjoint_column(h_bob);
    if k == 0 {
        let n = hb.norm();
        if n == 0.0 {
            return Err(Error::ZeroCovertRate);
        }
        return Ok(Beamformer::from_vector(&(hb * Complex64::new(p_max.sqrt() / n, 0.0))));
    }
    let h = DMatrix::from_fn(k, m, |r, c| {
        let g = &warden_channels[r];
        g.entries[c] / g.norm_sqr().sqrt()
    });
    let svd = h.svd(false, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if ratio <= RANK_TOL || k > m {
        return Err(Error::RankDeficient { ratio });
    }
    if k == m {
        return Err(Error::ZeroCovertRate);
    }
    // rows of V† span the row space; null(H) is its orthogonal complement
    let v = svd.v_t.expect("requested").adjoint();
    let projected = &hb - &v * (v.adjoint() * &hb);
    let norm = projected.norm();
    if norm <= 1e-10 * hb.norm() {
        return Err(Error::ZeroCovertRate);
    }
    Ok(Beamformer::from_vector(&(projected * Complex64::new(p_max.sqrt() / norm, 0.0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cv(v: &[(f64, f64)]) -> ChannelVector {
        ChannelVector { entries: v.iter().map(|&(r, i)| Complex64::new(r, i)).collect(), scaled: true }
    }

    #[test]
    fn orthogonal_warden_leaves_matched_filter() {
        let h = cv(&[(1.0, 0.0), (1.0, 0.0)]);
        let g = cv(&[(1.0, 0.0), (-1.0, 0.0)]);
        let w = nullspace_beamformer(&h, &[g.clone()], 4.0).unwrap();
        assert!((w.weights[0] - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!((w.weights[1] - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!(g.apply(&w).norm() < 1e-12);
    }

    #[test]
    fn parallel_warden_gives_zero_rate() {
        let h = cv(&[(1.0, 0.0), (0.0, 1.0)]);
        let g = cv(&[(2.0, 0.0), (0.0, 2.0)]);
        assert!(matches!(nullspace_beamformer(&h, &[g], 1.0), Err(Error::ZeroCovertRate)));
    }

    #[test]
    fn duplicated_wardens_are_rank_deficient() {
        let h = cv(&[(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        let g = cv(&[(0.3, 0.1), (0.2, -0.5), (1.0, 0.0)]);
        assert!(matches!(
            nullspace_beamformer(&h, &[g.clone(), g], 1.0),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn random_channels_are_nulled() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut rand_cv = || {
            ChannelVector {
                entries: (0..4).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect(),
                scaled: true,
            }
        };
        let h = rand_cv();
        let gs = vec![rand_cv(), rand_cv()];
        let w = nullspace_beamformer(&h, &gs, 0.01).unwrap();
        let wn = w.power().sqrt();
        for g in &gs {
            assert!(g.apply(&w).norm() / wn <= 1e-10);
        }
        assert!((w.power() - 0.01).abs() <= 1e-12);
    }
}
