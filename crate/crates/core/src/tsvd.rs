//! Slice-wise SVD of a tensor and the rank and norms derived from it.

use faer::{Mat, MatRef};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, ZERO};
use crate::tensor::Tensor3;

/// Default relative threshold for counting a tube as nonzero.
pub const DEFAULT_RANK_EPS: f64 = 1e-8;

/// Thin SVD of every frontal slice: `A(:,:,k) = U_k diag(S_k) V_k^H`.
///
/// `u` is `n1 x s x n3`, `v` is `n2 x s x n3` with `s = min(n1, n2)`, and the
/// singular values are stored slice-major, non-increasing within a slice.
#[derive(Debug, Clone)]
pub struct TSvdFactors {
    pub u: Tensor3,
    pub s: Vec<f64>,
    pub v: Tensor3,
}

struct SliceSvd {
    u: Vec<c64>,
    s: Vec<f64>,
    v: Vec<c64>,
}

/// Identity-extended orthonormal columns, used for exactly-zero slices.
fn canonical_columns(n: usize, s: usize) -> Vec<c64> {
    let mut out = vec![ZERO; n * s];
    for i in 0..s {
        out[i * n + i] = linalg::ONE;
    }
    out
}

fn slice_svd(m: MatRef<'_, c64>, k: usize) -> Result<SliceSvd> {
    let (n1, n2) = (m.nrows(), m.ncols());
    let s = n1.min(n2);
    let is_zero = (0..n2).all(|j| (0..n1).all(|i| m[(i, j)] == ZERO));
    if is_zero {
        return Ok(SliceSvd {
            u: canonical_columns(n1, s),
            s: vec![0.0; s],
            v: canonical_columns(n2, s),
        });
    }
    let svd = m.thin_svd().map_err(|_| Error::Svd { slice: k })?;
    let sv: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    if sv.iter().any(|x| !x.is_finite()) {
        return Err(Error::Svd { slice: k });
    }
    Ok(SliceSvd {
        u: linalg::to_vec(svd.U()),
        s: sv,
        v: linalg::to_vec(svd.V()),
    })
}

/// Computes the t-SVD by an SVD of each frontal slice.
pub fn t_svd(a: &Tensor3) -> Result<TSvdFactors> {
    let [n1, n2, n3] = a.dims();
    let s = n1.min(n2);
    let slices: Vec<SliceSvd> = (0..n3)
        .into_par_iter()
        .map(|k| slice_svd(a.slice(k), k))
        .collect::<Result<_>>()?;
    let mut u = Vec::with_capacity(n1 * s * n3);
    let mut v = Vec::with_capacity(n2 * s * n3);
    let mut sv = Vec::with_capacity(s * n3);
    for sl in slices {
        u.extend(sl.u);
        v.extend(sl.v);
        sv.extend(sl.s);
    }
    Ok(TSvdFactors {
        u: Tensor3::raw([n1, s, n3], u),
        s: sv,
        v: Tensor3::raw([n2, s, n3], v),
    })
}

/// Singular values of every frontal slice, slice-major.
pub fn singular_values(a: &Tensor3) -> Result<Vec<f64>> {
    let [_, _, n3] = a.dims();
    let per: Vec<Vec<f64>> = (0..n3)
        .into_par_iter()
        .map(|k| {
            let sl = a.slice(k);
            let sv = sl.singular_values().map_err(|_| Error::Svd { slice: k })?;
            if sv.iter().any(|x| !x.is_finite()) {
                return Err(Error::Svd { slice: k });
            }
            Ok(sv)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Largest singular value over all slices; the operator norm of `B -> A * B`.
pub fn spectral_norm(a: &Tensor3) -> Result<f64> {
    Ok(singular_values(a)?.into_iter().fold(0.0, f64::max))
}

/// Sum of all singular values over all slices.
pub fn nuclear_norm(a: &Tensor3) -> Result<f64> {
    Ok(singular_values(a)?.into_iter().sum())
}

impl TSvdFactors {
    /// Number of singular values per slice, `min(n1, n2)`.
    pub fn width(&self) -> usize {
        self.u.dims()[1]
    }

    pub fn n_slices(&self) -> usize {
        self.u.dims()[2]
    }

    pub fn singular_values(&self, k: usize) -> &[f64] {
        let s = self.width();
        &self.s[k * s..(k + 1) * s]
    }

    pub fn max_singular_value(&self) -> f64 {
        self.s.iter().copied().fold(0.0, f64::max)
    }

    /// l2 norm of each tube `S(i,i,:)`.
    pub fn tube_norms(&self) -> Vec<f64> {
        let s = self.width();
        (0..s)
            .map(|i| {
                (0..self.n_slices())
                    .map(|k| self.s[k * s + i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// Number of tubes whose norm exceeds `eps_rank` times the largest
    /// singular value over all slices.
    pub fn tubal_rank(&self, eps_rank: f64) -> usize {
        let smax = self.max_singular_value();
        if smax == 0.0 {
            return 0;
        }
        self.tube_norms()
            .into_iter()
            .filter(|&t| t > eps_rank * smax)
            .count()
    }

    /// `S` as a diagonal `s x s x n3` tensor.
    pub fn s_tensor(&self) -> Tensor3 {
        let s = self.width();
        let n3 = self.n_slices();
        let mut t = Tensor3::raw([s, s, n3], vec![ZERO; s * s * n3]);
        for k in 0..n3 {
            for i in 0..s {
                t[(i, i, k)] = c64::new(self.s[k * s + i], 0.0);
            }
        }
        t
    }

    /// Rebuilds `sum_i U_k(:,i) f(k, i, S_k(i)) V_k(:,i)^H` per slice; columns
    /// with a zero weight are skipped.
    pub fn reconstruct_with<F>(&self, f: F) -> Tensor3
    where
        F: Fn(usize, usize, f64) -> f64 + Sync,
    {
        let [n1, s, n3] = self.u.dims();
        let n2 = self.v.dims()[0];
        let mut out = vec![ZERO; n1 * n2 * n3];
        linalg::for_each_slice(&mut out, n1 * n2, |k, chunk| {
            let sv = self.singular_values(k);
            let keep: Vec<(usize, f64)> = (0..s)
                .map(|i| (i, f(k, i, sv[i])))
                .filter(|&(_, w)| w != 0.0)
                .collect();
            if keep.is_empty() {
                return;
            }
            let uk = self.u.slice(k);
            let vk = self.v.slice(k);
            let us = Mat::<c64>::from_fn(n1, keep.len(), |r, c| uk[(r, keep[c].0)] * keep[c].1);
            let vs = Mat::<c64>::from_fn(n2, keep.len(), |r, c| vk[(r, keep[c].0)]);
            linalg::gemm(linalg::view_mut(chunk, n1, n2), us.as_ref(), vs.as_ref().adjoint());
        });
        Tensor3::raw([n1, n2, n3], out)
    }

    pub fn reconstruct(&self) -> Tensor3 {
        self.reconstruct_with(|_, _, s| s)
    }

    /// Skinny factors `U_r` (`n1 x r x n3`) and `V_r` (`n2 x r x n3`).
    pub fn skinny(&self, r: usize) -> Result<(Tensor3, Tensor3)> {
        let [n1, s, n3] = self.u.dims();
        let n2 = self.v.dims()[0];
        if r == 0 || r > s {
            return Err(Error::param(format!("skinny rank {r} outside 1..={s}")));
        }
        let take = |t: &Tensor3, n: usize| {
            let mut data = Vec::with_capacity(n * r * n3);
            for k in 0..n3 {
                data.extend_from_slice(&t.data()[k * n * s..k * n * s + n * r]);
            }
            Tensor3::raw([n, r, n3], data)
        };
        Ok((take(&self.u, n1), take(&self.v, n2)))
    }
}
