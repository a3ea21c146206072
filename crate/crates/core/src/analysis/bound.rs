use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::tensor::Tensor3;
use crate::transform::LinearTransform;

use super::projection::project_s;

/// `c0 (kappa^2 + rho^2) lambda r (n1 + n2) / (n1 n2) log^2(kappa (n1 + n2) N3)`.
///
/// The value is not clipped; callers that read it as a sampling rate should
/// clamp it to `[0, 1]`.
pub fn sampling_bound(t: &LinearTransform, lambda: f64, r: usize, n1: usize, n2: usize, c0: f64) -> f64 {
    let (kappa, rho) = (t.kappa(), t.rho());
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let log = (kappa * (n1f + n2f) * t.big_n3() as f64).ln();
    c0 * (kappa * kappa + rho * rho) * lambda * r as f64 * (n1f + n2f) / (n1f * n2f) * log * log
}

/// Worst case of `||P_S(T(e_ijk))||_F^2` against its incoherence bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMargin {
    pub max_lhs: f64,
    pub bound: f64,
    pub argmax: [usize; 3],
}

impl BoundMargin {
    pub fn holds(&self) -> bool {
        self.max_lhs <= self.bound + 1e-10
    }
}

/// Exhaustively projects `T(e_ijk)` for every original-domain basis tensor and
/// compares against `nu r (n1 + n2) / (n1 n2) ||T||_{1->2}^2`.
pub fn appendix_d_margin(u: &Tensor3, v: &Tensor3, t: &LinearTransform, nu: f64) -> Result<BoundMargin> {
    let [n1, r, big] = u.dims();
    let n2 = v.dims()[0];
    if big != t.big_n3() || v.dims()[2] != big || v.dims()[1] != r {
        return Err(Error::shape("appendix_d_bound_check", &u.dims(), &v.dims()));
    }
    let m = t.matrix();
    let bound = nu * r as f64 * (n1 + n2) as f64 / (n1 * n2) as f64 * t.one_to_two().powi(2);
    let mut best = BoundMargin {
        max_lhs: 0.0,
        bound,
        argmax: [0, 0, 0],
    };
    let mut basis = Tensor3::zeros([n1, n2, big])?;
    for k in 0..t.n3() {
        for j in 0..n2 {
            for i in 0..n1 {
                for l in 0..big {
                    basis[(i, j, l)] = m[(l, k)];
                }
                let lhs = project_s(&basis, u, v)?.fro_norm().powi(2);
                if lhs > best.max_lhs {
                    best.max_lhs = lhs;
                    best.argmax = [i, j, k];
                }
                for l in 0..big {
                    basis[(i, j, l)] = ZERO;
                }
            }
        }
    }
    Ok(best)
}

/// True iff the bound holds (within `1e-10`) at every basis index.
pub fn appendix_d_bound_check(u: &Tensor3, v: &Tensor3, t: &LinearTransform, nu: f64) -> Result<bool> {
    Ok(appendix_d_margin(u, v, t, nu)?.holds())
}
