//! Thin helpers over faer for the column-major frontal-slice buffers used by
//! [`Tensor3`](crate::Tensor3) and the transform matrices.

use faer::linalg::matmul::matmul;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatMut, MatRef, Par};
use rayon::prelude::*;

pub use faer::c64;

pub(crate) const ZERO: c64 = c64::new(0.0, 0.0);
pub(crate) const ONE: c64 = c64::new(1.0, 0.0);

pub(crate) fn view(data: &[c64], nrows: usize, ncols: usize) -> MatRef<'_, c64> {
    MatRef::from_column_major_slice(data, nrows, ncols)
}

pub(crate) fn view_mut(data: &mut [c64], nrows: usize, ncols: usize) -> MatMut<'_, c64> {
    MatMut::from_column_major_slice_mut(data, nrows, ncols)
}

/// `dst = lhs * rhs`, always sequential so that results do not depend on the
/// thread count.
pub(crate) fn gemm<L, R>(dst: MatMut<'_, c64>, lhs: MatRef<'_, L>, rhs: MatRef<'_, R>)
where
    L: Conjugate<Canonical = c64>,
    R: Conjugate<Canonical = c64>,
{
    matmul(dst, Accum::Replace, lhs, rhs, ONE, Par::Seq);
}

pub(crate) fn product<L, R>(lhs: MatRef<'_, L>, rhs: MatRef<'_, R>) -> Mat<c64>
where
    L: Conjugate<Canonical = c64>,
    R: Conjugate<Canonical = c64>,
{
    let mut out = Mat::zeros(lhs.nrows(), rhs.ncols());
    gemm(out.as_mut(), lhs, rhs);
    out
}

/// Runs `f(k, chunk)` over consecutive `chunk_len` pieces of `out`, possibly in
/// parallel. Each chunk is written by exactly one call, so the result is the
/// same for any thread count.
pub(crate) fn for_each_slice<F>(out: &mut [c64], chunk_len: usize, f: F)
where
    F: Fn(usize, &mut [c64]) + Sync + Send,
{
    if chunk_len == 0 {
        return;
    }
    out.par_chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(k, chunk)| f(k, chunk));
}

/// Largest entry magnitude of a matrix.
pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Frobenius norm of `a - b`.
pub fn fro_dist(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    acc.sqrt()
}

pub(crate) fn to_vec(m: MatRef<'_, c64>) -> Vec<c64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out.push(m[(i, j)]);
        }
    }
    out
}
