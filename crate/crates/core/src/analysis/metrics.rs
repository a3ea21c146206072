//! PSNR, SSIM and relative error between a reference and a reconstruction.
//!
//! SSIM uses the usual Gaussian window (11 x 11, sigma 1.5) with stabilising
//! constants `(0.01 L)^2` and `(0.03 L)^2`, evaluated on the real parts of each
//! frontal slice over the valid window positions. Slices smaller than the
//! window use the largest odd window that fits.

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub psnr: f64,
    pub ssim: f64,
    pub mpsnr: f64,
    pub mssim: f64,
    pub rel_error: f64,
}

fn same_dims(a: &Tensor3, b: &Tensor3, op: &'static str) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::shape(op, &a.dims(), &b.dims()));
    }
    Ok(())
}

fn psnr_of(sq_err: f64, count: usize, peak: f64) -> f64 {
    if sq_err == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (peak * peak * count as f64 / sq_err).log10()
}

/// `10 log10(peak^2 N / ||ref - test||_F^2)`; `+inf` for identical inputs.
pub fn psnr(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<f64> {
    same_dims(reference, test, "psnr")?;
    let err = (reference - test).fro_norm().powi(2);
    Ok(psnr_of(err, reference.len(), peak))
}

/// Mean of the per-slice PSNR values.
pub fn mpsnr(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<f64> {
    same_dims(reference, test, "mpsnr")?;
    let [n1, n2, n3] = reference.dims();
    let len = n1 * n2;
    let total: f64 = (0..n3)
        .map(|k| {
            let err: f64 = reference.data()[k * len..(k + 1) * len]
                .iter()
                .zip(&test.data()[k * len..(k + 1) * len])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            psnr_of(err, len, peak)
        })
        .sum();
    Ok(total / n3 as f64)
}

/// `||test - ref||_F / ||ref||_F`.
pub fn rel_error(reference: &Tensor3, test: &Tensor3) -> Result<f64> {
    same_dims(reference, test, "rel_error")?;
    let denom = reference.fro_norm();
    if denom == 0.0 {
        return Err(Error::param("relative error against a zero reference"));
    }
    Ok((test - reference).fro_norm() / denom)
}

fn gaussian_window(size: usize) -> Vec<f64> {
    let c = (size / 2) as f64;
    let g: Vec<f64> = (0..size)
        .map(|x| (-((x as f64 - c).powi(2)) / (2.0 * SIGMA * SIGMA)).exp())
        .collect();
    let mut w = Vec::with_capacity(size * size);
    for a in &g {
        for b in &g {
            w.push(a * b);
        }
    }
    let sum: f64 = w.iter().sum();
    w.iter().map(|x| x / sum).collect()
}

/// Sum and count of the SSIM map of slice `k`.
fn slice_ssim(reference: &Tensor3, test: &Tensor3, k: usize, peak: f64) -> (f64, usize) {
    let [n1, n2, _] = reference.dims();
    let mut size = WINDOW.min(n1).min(n2);
    if size % 2 == 0 {
        size -= 1;
    }
    let w = gaussian_window(size);
    let c1 = (K1 * peak).powi(2);
    let c2 = (K2 * peak).powi(2);
    let x = |i: usize, j: usize| reference[(i, j, k)].re;
    let y = |i: usize, j: usize| test[(i, j, k)].re;
    let mut sum = 0.0;
    let mut count = 0;
    for i0 in 0..=(n1 - size) {
        for j0 in 0..=(n2 - size) {
            let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for a in 0..size {
                for b in 0..size {
                    let wt = w[a * size + b];
                    let (xv, yv) = (x(i0 + a, j0 + b), y(i0 + a, j0 + b));
                    mx += wt * xv;
                    my += wt * yv;
                    sxx += wt * xv * xv;
                    syy += wt * yv * yv;
                    sxy += wt * xv * yv;
                }
            }
            let vx = sxx - mx * mx;
            let vy = syy - my * my;
            let cov = sxy - mx * my;
            sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    (sum, count)
}

/// SSIM averaged over every window position of every slice.
pub fn ssim(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<f64> {
    same_dims(reference, test, "ssim")?;
    let (sum, count) = (0..reference.dims()[2])
        .map(|k| slice_ssim(reference, test, k, peak))
        .fold((0.0, 0), |(s, c), (a, b)| (s + a, c + b));
    Ok(sum / count as f64)
}

/// Mean of the per-slice SSIM values.
pub fn mssim(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<f64> {
    same_dims(reference, test, "mssim")?;
    let n3 = reference.dims()[2];
    let total: f64 = (0..n3)
        .map(|k| {
            let (s, c) = slice_ssim(reference, test, k, peak);
            s / c as f64
        })
        .sum();
    Ok(total / n3 as f64)
}

pub fn metrics(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<MetricsReport> {
    if !(peak > 0.0) {
        return Err(Error::param(format!("peak {peak} must be positive")));
    }
    Ok(MetricsReport {
        psnr: psnr(reference, test, peak)?,
        ssim: ssim(reference, test, peak)?,
        mpsnr: mpsnr(reference, test, peak)?,
        mssim: mssim(reference, test, peak)?,
        rel_error: rel_error(reference, test)?,
    })
}
