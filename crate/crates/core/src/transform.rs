//! Linear maps `T: C^n3 -> C^N3` applied along the third mode, with the
//! conditioning statistics that enter the sampling-rate bound.

use std::f64::consts::PI;

use faer::{Mat, MatRef};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{self, c64};
use crate::rng;
use crate::tensor::Tensor3;

/// Relative singular-value floor below which a matrix counts as rank deficient
/// when forming a pseudo-inverse.
pub const PINV_RANK_TOL: f64 = 1e-12;
/// Relative floor on `sigma_min` for a transform to count as injective.
pub const INJECTIVITY_TOL: f64 = 1e-10;

/// Square base matrices from which slim transforms take their leading columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    Dft,
    Dct,
    Dwht,
    RandomUnitary { seed: u64 },
}

/// An injective transform together with its pseudo-inverse and diagnostics.
#[derive(Debug, Clone)]
pub struct LinearTransform {
    name: String,
    matrix: Mat<c64>,
    pinv: Mat<c64>,
    sigma_max: f64,
    sigma_min: f64,
    kappa: f64,
    rho: f64,
    one_to_two: f64,
}

/// Moore-Penrose pseudo-inverse of a full-column-rank matrix, `V S^-1 U^H`.
pub fn pseudo_inverse(m: MatRef<'_, c64>) -> Result<Mat<c64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::param("pseudo-inverse of an empty matrix"));
    }
    let svd = m.thin_svd().map_err(|_| Error::Svd { slice: 0 })?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    if m.nrows() < m.ncols() || !(smin > PINV_RANK_TOL * smax) {
        return Err(Error::Singular {
            sigma_min: if m.nrows() < m.ncols() { 0.0 } else { smin },
            sigma_max: smax,
        });
    }
    let v = svd.V();
    let scaled = Mat::<c64>::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] / s[j]);
    Ok(linalg::product(scaled.as_ref(), svd.U().adjoint()))
}

fn largest_column_norm(m: MatRef<'_, c64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Haar-distributed unitary `n x n` matrix from a seeded Gaussian via QR with
/// the phases of `R`'s diagonal folded back into `Q`.
fn haar_unitary(n: usize, rng: &mut rng::Rng) -> Mat<c64> {
    let g = Mat::<c64>::from_fn(n, n, |_, _| rng::complex_gaussian(rng));
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    Mat::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        q[(i, j)] * phase
    })
}

impl LinearTransform {
    /// Wraps an explicit `N3 x n3` matrix, computing its pseudo-inverse and
    /// diagnostics. Fails if the matrix is not injective.
    pub fn from_matrix(name: impl Into<String>, matrix: Mat<c64>) -> Result<Self> {
        let (big, n3) = (matrix.nrows(), matrix.ncols());
        if n3 == 0 || big < n3 {
            return Err(Error::param(format!(
                "transform must be N3 x n3 with N3 >= n3 >= 1, got {big} x {n3}"
            )));
        }
        if let Some(z) = matrix.col_iter().flat_map(|c| c.iter()).find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite transform entry {z}")));
        }
        let sv = matrix
            .singular_values()
            .map_err(|_| Error::Svd { slice: 0 })?;
        let sigma_max = sv.iter().copied().fold(0.0, f64::max);
        let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if !(sigma_min > INJECTIVITY_TOL * sigma_max) {
            return Err(Error::Singular {
                sigma_min,
                sigma_max,
            });
        }
        let pinv = pseudo_inverse(matrix.as_ref())?;
        let t_inf = linalg::max_abs(matrix.as_ref());
        let p_inf = linalg::max_abs(pinv.as_ref());
        let rho = big as f64 * t_inf.powi(2).max(p_inf.powi(2));
        let one_to_two = largest_column_norm(matrix.as_ref());
        Ok(Self {
            name: name.into(),
            matrix,
            pinv,
            sigma_max,
            sigma_min,
            kappa: sigma_max / sigma_min,
            rho,
            one_to_two,
        })
    }

    /// Unitary DFT scaled by `1/sqrt(n3)`.
    pub fn dft(n3: usize) -> Result<Self> {
        Self::from_matrix("dft", base_matrix(BaseKind::Dft, n3)?)
    }

    /// Orthonormal DCT-II.
    pub fn dct(n3: usize) -> Result<Self> {
        Self::from_matrix("dct", base_matrix(BaseKind::Dct, n3)?)
    }

    /// Orthonormal Walsh-Hadamard in natural order; `n3` must be a power of two.
    pub fn dwht(n3: usize) -> Result<Self> {
        Self::from_matrix("dwht", base_matrix(BaseKind::Dwht, n3)?)
    }

    /// The first `n3` columns of an `N3 x N3` base matrix.
    pub fn slim_columns(kind: BaseKind, big: usize, n3: usize) -> Result<Self> {
        if n3 == 0 || big < n3 {
            return Err(Error::param(format!("slim transform needs N3 >= n3 >= 1, got N3={big}, n3={n3}")));
        }
        let base = base_matrix(kind, big)?;
        let m = Mat::from_fn(big, n3, |i, j| base[(i, j)]);
        let label = match kind {
            BaseKind::Dft => "dft",
            BaseKind::Dct => "dct",
            BaseKind::Dwht => "dwht",
            BaseKind::RandomUnitary { .. } => "rut",
        };
        let name = if big == n3 { label.to_string() } else { format!("{label}-slim{big}") };
        Self::from_matrix(name, m)
    }

    /// First `n3` columns of a seeded Haar unitary `N3 x N3` matrix.
    pub fn random_unitary(n3: usize, big: usize, seed: u64) -> Result<Self> {
        Self::slim_columns(BaseKind::RandomUnitary { seed }, big, n3)
    }

    /// `U Sigma V^H` with Haar `U` (`N3 x N3`), `V` (`n3 x n3`) and singular
    /// values drawn uniformly from `[smin, smax]`, placed in the top `n3 x n3`
    /// block of `Sigma`.
    pub fn random_conditioned(n3: usize, big: usize, seed: u64, smin: f64, smax: f64) -> Result<Self> {
        Ok(Self::random_conditioned_with_spectrum(n3, big, seed, smin, smax)?.0)
    }

    /// Like [`random_conditioned`](Self::random_conditioned) but also returns
    /// the drawn singular values.
    pub fn random_conditioned_with_spectrum(
        n3: usize,
        big: usize,
        seed: u64,
        smin: f64,
        smax: f64,
    ) -> Result<(Self, Vec<f64>)> {
        if !(smin > 0.0 && smin <= smax && smax.is_finite()) {
            return Err(Error::param(format!("singular value interval [{smin}, {smax}] is invalid")));
        }
        if n3 == 0 || big < n3 {
            return Err(Error::param(format!("need N3 >= n3 >= 1, got N3={big}, n3={n3}")));
        }
        let mut rng = rng::seeded(seed);
        let u = haar_unitary(big, &mut rng);
        let v = haar_unitary(n3, &mut rng);
        let sigma: Vec<f64> = (0..n3)
            .map(|_| if smin == smax { smin } else { rng.random_range(smin..=smax) })
            .collect();
        let us = Mat::<c64>::from_fn(big, n3, |i, j| u[(i, j)] * sigma[j]);
        let m = linalg::product(us.as_ref(), v.as_ref().adjoint());
        Ok((Self::from_matrix("cond", m)?, sigma))
    }

    /// Vertical stack `[self; other]`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut out = self.concat_rows(other.matrix.as_ref())?;
        out.name = format!("{}+{}", self.name, other.name);
        Ok(out)
    }

    /// Appends raw rows below the matrix (zero extra rows is allowed).
    pub fn concat_rows(&self, extra: MatRef<'_, c64>) -> Result<Self> {
        let n3 = self.n3();
        if extra.ncols() != n3 {
            return Err(Error::shape(
                "concat_transforms",
                &[self.big_n3(), n3],
                &[extra.nrows(), extra.ncols()],
            ));
        }
        let top = self.big_n3();
        let m = Mat::from_fn(top + extra.nrows(), n3, |i, j| {
            if i < top {
                self.matrix[(i, j)]
            } else {
                extra[(i - top, j)]
            }
        });
        Self::from_matrix(self.name.clone(), m)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn pinv(&self) -> MatRef<'_, c64> {
        self.pinv.as_ref()
    }

    /// Input length `n3`.
    pub fn n3(&self) -> usize {
        self.matrix.ncols()
    }

    /// Output length `N3`.
    pub fn big_n3(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// Condition number `sigma_max / sigma_min`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `N3 * max(||T||_inf^2, ||T^+||_inf^2)` with entrywise max magnitudes.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Largest column l2 norm, `||T||_{1->2}`.
    pub fn one_to_two(&self) -> f64 {
        self.one_to_two
    }

    /// True when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.matrix.col_iter().all(|c| c.iter().all(|z| z.im == 0.0))
    }

    /// `T(A) = A x_3 T`.
    pub fn apply(&self, a: &Tensor3) -> Result<Tensor3> {
        a.mode3_product(self.matrix.as_ref())
    }

    /// `T^+(B) = B x_3 T^+`.
    pub fn pinv_apply(&self, b: &Tensor3) -> Result<Tensor3> {
        b.mode3_product(self.pinv.as_ref())
    }
}

/// Square `n x n` base matrix of the given kind.
pub fn base_matrix(kind: BaseKind, n: usize) -> Result<Mat<c64>> {
    if n == 0 {
        return Err(Error::param("transform size must be at least 1"));
    }
    let nf = n as f64;
    let m = match kind {
        BaseKind::Dft => {
            let scale = 1.0 / nf.sqrt();
            Mat::from_fn(n, n, |r, c| {
                // Reduce the exponent modulo n before taking the angle.
                let e = ((r * c) % n) as f64;
                c64::from_polar(scale, -2.0 * PI * e / nf)
            })
        }
        BaseKind::Dct => Mat::from_fn(n, n, |r, c| {
            let alpha = if r == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            c64::new(alpha * (PI * (2 * c + 1) as f64 * r as f64 / (2.0 * nf)).cos(), 0.0)
        }),
        BaseKind::Dwht => {
            if !n.is_power_of_two() {
                return Err(Error::param(format!("Walsh-Hadamard size {n} is not a power of two")));
            }
            let scale = 1.0 / nf.sqrt();
            Mat::from_fn(n, n, |r, c| {
                let sign = if (r & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                c64::new(sign * scale, 0.0)
            })
        }
        BaseKind::RandomUnitary { seed } => haar_unitary(n, &mut rng::seeded(seed)),
    };
    Ok(m)
}
