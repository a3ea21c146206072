//! Reference implementations used as oracles. None of these touch faer or the
//! library's slice helpers: everything is written out as plain loops over
//! `(i, j, k)` indices.

#![allow(dead_code)]

use tnn_core::c64;
use tnn_core::rng::{complex_gaussian, seeded, Rng};
use tnn_core::Tensor3;

pub const ZERO: c64 = c64::new(0.0, 0.0);

pub fn random_tensor(rng: &mut Rng, dims: [usize; 3]) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| complex_gaussian(rng)).unwrap()
}

pub fn random_dims(rng: &mut Rng, max: [usize; 3]) -> [usize; 3] {
    use rand::Rng as _;
    [
        rng.random_range(1..=max[0]),
        rng.random_range(1..=max[1]),
        rng.random_range(1..=max[2]),
    ]
}

pub fn rng(seed: u64) -> Rng {
    seeded(seed)
}

/// Row-major copy of frontal slice `k`.
pub fn slice_rows(a: &Tensor3, k: usize) -> Vec<Vec<c64>> {
    let [n1, n2, _] = a.dims();
    (0..n1).map(|i| (0..n2).map(|j| a[(i, j, k)]).collect()).collect()
}

pub fn naive_t_product(a: &Tensor3, b: &Tensor3) -> Tensor3 {
    let [n1, n2, n3] = a.dims();
    let [m2, n4, m3] = b.dims();
    assert_eq!((n2, n3), (m2, m3));
    let mut out = Tensor3::zeros([n1, n4, n3]).unwrap();
    for k in 0..n3 {
        for i in 0..n1 {
            for j in 0..n4 {
                let mut acc = ZERO;
                for l in 0..n2 {
                    acc += a[(i, l, k)] * b[(l, j, k)];
                }
                out[(i, j, k)] = acc;
            }
        }
    }
    out
}

pub fn naive_conj_transpose(a: &Tensor3) -> Tensor3 {
    let [n1, n2, n3] = a.dims();
    Tensor3::from_fn([n2, n1, n3], |i, j, k| a[(j, i, k)].conj()).unwrap()
}

/// `out(i, j, l) = sum_k m[l][k] a(i, j, k)` for a row-major `m`.
pub fn naive_mode3(a: &Tensor3, m: &[Vec<c64>]) -> Tensor3 {
    let [n1, n2, n3] = a.dims();
    let big = m.len();
    Tensor3::from_fn([n1, n2, big], |i, j, l| {
        (0..n3).fold(ZERO, |acc, k| acc + m[l][k] * a[(i, j, k)])
    })
    .unwrap()
}

pub fn naive_fro(a: &Tensor3) -> f64 {
    let [n1, n2, n3] = a.dims();
    let mut acc = 0.0;
    for k in 0..n3 {
        for j in 0..n2 {
            for i in 0..n1 {
                acc += a[(i, j, k)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

pub fn naive_inner(a: &Tensor3, b: &Tensor3) -> c64 {
    let [n1, n2, n3] = a.dims();
    let mut acc = ZERO;
    for k in 0..n3 {
        for j in 0..n2 {
            for i in 0..n1 {
                acc += a[(i, j, k)].conj() * b[(i, j, k)];
            }
        }
    }
    acc
}

/// Thin SVD of a row-major matrix by one-sided (Hestenes) Jacobi rotations.
/// Returns `(U columns, sigma, V columns)` with sigma sorted non-increasing.
pub struct JacobiSvd {
    pub u: Vec<Vec<c64>>,
    pub s: Vec<f64>,
    pub v: Vec<Vec<c64>>,
}

pub fn jacobi_svd(a: &[Vec<c64>]) -> JacobiSvd {
    let m = a.len();
    let n = a[0].len();
    if m < n {
        let ah: Vec<Vec<c64>> = (0..n).map(|j| (0..m).map(|i| a[i][j].conj()).collect()).collect();
        let t = jacobi_svd(&ah);
        return JacobiSvd { u: t.v, s: t.s, v: t.u };
    }
    let mut cols: Vec<Vec<c64>> = (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect();
    let mut v: Vec<Vec<c64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { c64::new(1.0, 0.0) } else { ZERO }).collect())
        .collect();
    let dot = |x: &[c64], y: &[c64]| x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a.conj() * b);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]).re;
                let beta = dot(&cols[q], &cols[q]).re;
                let gamma = dot(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for vecs in [&mut cols, &mut v] {
                    for r in 0..vecs[p].len() {
                        let xp = vecs[p][r];
                        let xq = vecs[q][r] * phase.conj();
                        vecs[p][r] = xp * c - xq * s;
                        vecs[q][r] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).re.sqrt()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let u = order
        .iter()
        .map(|&j| {
            let s = norms[j];
            cols[j].iter().map(|z| if s > 0.0 { z / s } else { ZERO }).collect()
        })
        .collect();
    JacobiSvd {
        u,
        s: order.iter().map(|&j| norms[j]).collect(),
        v: order.iter().map(|&j| v[j].clone()).collect(),
    }
}

/// All singular values, slice by slice.
pub fn oracle_singular_values(a: &Tensor3) -> Vec<Vec<f64>> {
    (0..a.dims()[2]).map(|k| jacobi_svd(&slice_rows(a, k)).s).collect()
}

/// Largest singular value of a row-major matrix by power iteration on `A^H A`.
pub fn power_iteration(a: &[Vec<c64>], iters: usize) -> f64 {
    let m = a.len();
    let n = a[0].len();
    let mut x: Vec<c64> = (0..n).map(|j| c64::new(1.0 + j as f64 * 0.37, 0.5 - j as f64 * 0.11)).collect();
    let mut sigma = 0.0;
    for _ in 0..iters {
        let y: Vec<c64> = (0..m).map(|i| (0..n).fold(ZERO, |acc, j| acc + a[i][j] * x[j])).collect();
        let z: Vec<c64> = (0..n).map(|j| (0..m).fold(ZERO, |acc, i| acc + a[i][j].conj() * y[i])).collect();
        let norm = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        x = z.iter().map(|v| v / norm).collect();
        if (next - sigma).abs() <= 1e-15 * next {
            sigma = next;
            break;
        }
        sigma = next;
    }
    sigma
}

/// Per-slice matrix soft thresholding built from the Jacobi SVD.
pub fn oracle_svt(a: &Tensor3, tau: f64) -> Tensor3 {
    let [n1, n2, n3] = a.dims();
    let mut out = Tensor3::zeros([n1, n2, n3]).unwrap();
    for k in 0..n3 {
        let f = jacobi_svd(&slice_rows(a, k));
        for (c, &s) in f.s.iter().enumerate() {
            let w = (s - tau).max(0.0);
            if w == 0.0 {
                continue;
            }
            for i in 0..n1 {
                for j in 0..n2 {
                    out[(i, j, k)] += f.u[c][i] * f.v[c][j].conj() * w;
                }
            }
        }
    }
    out
}

pub fn max_diff(a: &Tensor3, b: &Tensor3) -> f64 {
    assert_eq!(a.dims(), b.dims());
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `n x r x big` tensor with Gaussian entries.
pub fn seeded_tensor(seed: u64, dims: [usize; 3]) -> Tensor3 {
    random_tensor(&mut rng(seed), dims)
}
