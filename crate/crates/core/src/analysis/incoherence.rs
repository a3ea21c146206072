use crate::error::{Error, Result};
use crate::tensor::Tensor3;
use crate::transform::LinearTransform;
use crate::tsvd::t_svd;

/// Smallest incoherence parameters satisfied by the singular tensors of a
/// transform-domain tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct IncoherenceReport {
    pub mu: f64,
    pub nu: f64,
    pub lambda: f64,
    pub r: usize,
    /// Per-condition parameters: column and row energy (`mu`), then column
    /// and row energy weighted by the transform columns (`nu`).
    pub mu_u: f64,
    pub mu_v: f64,
    pub nu_u: f64,
    pub nu_v: f64,
    /// The four raw maxima: `max_i ||U^H * xi_i||_F^2`,
    /// `max_j ||V^H * xi_j||_F^2`, `max_ik ||U^H * xi_i * T(zeta_k)||_F^2`,
    /// `max_jk ||V^H * xi_j * T(zeta_k)||_F^2`.
    pub per_basis_max: [f64; 4],
}

/// `energy[i][l] = ||F_l(i, :)||^2` for a skinny factor `F` (`n x r x N3`).
pub(crate) fn row_energies(f: &Tensor3) -> Vec<Vec<f64>> {
    let [n, r, big] = f.dims();
    (0..n)
        .map(|i| {
            (0..big)
                .map(|l| (0..r).map(|c| f[(i, c, l)].norm_sqr()).sum())
                .collect()
        })
        .collect()
}

/// Largest `sum_l |T(l,k)|^2 energy[i][l]` over `i` and `k`.
fn weighted_max(energy: &[Vec<f64>], t: &LinearTransform) -> f64 {
    let m = t.matrix();
    let mut best = 0.0f64;
    for k in 0..t.n3() {
        let w: Vec<f64> = (0..t.big_n3()).map(|l| m[(l, k)].norm_sqr()).collect();
        for row in energy {
            best = best.max(row.iter().zip(&w).map(|(e, w)| e * w).sum());
        }
    }
    best
}

/// Computes `mu`, `nu` for the rank-`r` singular tensors of `tx = T(X)`.
pub fn incoherence(tx: &Tensor3, r: usize, t: &LinearTransform) -> Result<IncoherenceReport> {
    let [n1, n2, big] = tx.dims();
    if r == 0 {
        return Err(Error::param("incoherence needs a positive rank"));
    }
    if big != t.big_n3() {
        return Err(Error::shape("incoherence", &tx.dims(), &[t.big_n3(), t.n3()]));
    }
    let f = t_svd(tx)?;
    let (u, v) = f.skinny(r)?;
    let eu = row_energies(&u);
    let ev = row_energies(&v);

    let max_sum = |e: &[Vec<f64>]| e.iter().map(|row| row.iter().sum::<f64>()).fold(0.0, f64::max);
    let col_max = max_sum(&eu);
    let row_max = max_sum(&ev);
    let col_t_max = weighted_max(&eu, t);
    let row_t_max = weighted_max(&ev, t);

    let (rf, bf) = (r as f64, big as f64);
    let t12 = t.one_to_two().powi(2);
    let mu_u = col_max * n1 as f64 / (rf * bf);
    let mu_v = row_max * n2 as f64 / (rf * bf);
    let nu_u = col_t_max * n1 as f64 / (rf * t12);
    let nu_v = row_t_max * n2 as f64 / (rf * t12);
    let mu = mu_u.max(mu_v);
    let nu = nu_u.max(nu_v);
    Ok(IncoherenceReport {
        mu,
        nu,
        lambda: mu.max(nu),
        r,
        mu_u,
        mu_v,
        nu_u,
        nu_v,
        per_basis_max: [col_max, row_max, col_t_max, row_t_max],
    })
}
