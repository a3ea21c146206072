//! Dense third-order complex tensors and the slice-wise algebra built on them.
//!
//! Entry `(i, j, k)` lives at `(k * n2 + j) * n1 + i`: each frontal slice is a
//! contiguous column-major `n1 x n2` matrix and slices follow one another.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Sub};

use faer::MatRef;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, ZERO};

/// Relative tolerance on imaginary parts for tensors flagged as real.
pub const REAL_HINT_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<c64>,
    real_hint: bool,
}

impl fmt::Debug for Tensor3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor3")
            .field("dims", &self.dims)
            .field("real_hint", &self.real_hint)
            .field("fro_norm", &self.fro_norm())
            .finish()
    }
}

fn check_dims(dims: [usize; 3]) -> Result<usize> {
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::shape("tensor", &dims, &[1, 1, 1]));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::param(format!("tensor dims {dims:?} overflow")))
}

impl Tensor3 {
    /// Builds a tensor from data in slice-major, column-within-slice order.
    pub fn new(dims: [usize; 3], data: Vec<c64>) -> Result<Self> {
        let len = check_dims(dims)?;
        if data.len() != len {
            return Err(Error::InvalidData(format!(
                "dims {dims:?} need {len} entries, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite entry at flat index {pos}"
            )));
        }
        Ok(Self {
            dims,
            data,
            real_hint: false,
        })
    }

    pub fn from_real(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        let t = Self::new(dims, data.into_iter().map(|x| c64::new(x, 0.0)).collect())?;
        Ok(Self {
            real_hint: true,
            ..t
        })
    }

    pub fn zeros(dims: [usize; 3]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self::raw(dims, vec![ZERO; len]))
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> c64) -> Result<Self> {
        let len = check_dims(dims)?;
        let [n1, n2, n3] = dims;
        let mut data = Vec::with_capacity(len);
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    data.push(f(i, j, k));
                }
            }
        }
        Self::new(dims, data)
    }

    /// Internal constructor for results of operations on valid tensors.
    pub(crate) fn raw(dims: [usize; 3], data: Vec<c64>) -> Self {
        debug_assert_eq!(data.len(), dims.iter().product::<usize>());
        Self {
            dims,
            data,
            real_hint: false,
        }
    }

    /// Identity tensor: every frontal slice is `I_n`.
    pub fn identity(n: usize, n3: usize) -> Result<Self> {
        let mut t = Self::zeros([n, n, n3])?;
        for k in 0..n3 {
            for i in 0..n {
                t[(i, i, k)] = linalg::ONE;
            }
        }
        Ok(t)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[c64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [c64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<c64> {
        self.data
    }

    pub fn real_hint(&self) -> bool {
        self.real_hint
    }

    /// Marks the tensor as semantically real. Fails if some imaginary part
    /// exceeds `1e-12 * (||A||_F + 1)`.
    pub fn with_real_hint(mut self, hint: bool) -> Result<Self> {
        if hint {
            let residue = self.imag_residue();
            let limit = REAL_HINT_TOL * (self.fro_norm() + 1.0);
            if residue > limit {
                return Err(Error::InvalidData(format!(
                    "real hint requested but imaginary residue {residue:e} exceeds {limit:e}"
                )));
            }
        }
        self.real_hint = hint;
        Ok(self)
    }

    /// Largest imaginary-part magnitude.
    pub fn imag_residue(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Drops imaginary parts and sets the real hint.
    pub fn real_part(&self) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|z| c64::new(z.re, 0.0)).collect(),
            real_hint: true,
        }
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        let [n1, n2, _] = self.dims;
        (k * n2 + j) * n1 + i
    }

    pub fn slice_len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    /// Frontal slice `k` as an `n1 x n2` matrix view.
    pub fn slice(&self, k: usize) -> MatRef<'_, c64> {
        let len = self.slice_len();
        linalg::view(&self.data[k * len..(k + 1) * len], self.dims[0], self.dims[1])
    }

    pub fn slice_mut(&mut self, k: usize) -> faer::MatMut<'_, c64> {
        let len = self.slice_len();
        let [n1, n2, _] = self.dims;
        linalg::view_mut(&mut self.data[k * len..(k + 1) * len], n1, n2)
    }

    /// Tube `A(i, j, :)`.
    pub fn tube(&self, i: usize, j: usize) -> Vec<c64> {
        (0..self.dims[2]).map(|k| self[(i, j, k)]).collect()
    }

    pub fn map(&self, f: impl Fn(c64) -> c64) -> Self {
        Self::raw(self.dims, self.data.iter().map(|&z| f(z)).collect())
    }

    /// Maps every entry together with its flat layout index.
    pub fn map_indexed(&self, f: impl Fn(usize, c64) -> c64) -> Self {
        Self::raw(
            self.dims,
            self.data.iter().enumerate().map(|(idx, &z)| f(idx, z)).collect(),
        )
    }

    pub fn scale(&self, s: c64) -> Self {
        self.map(|z| z * s)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, op: &'static str, f: impl Fn(c64, c64) -> c64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::shape(op, &self.dims, &other.dims));
        }
        Ok(Self::raw(
            self.dims,
            self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: c64, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::shape("axpy", &self.dims, &other.dims));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// Natural t-product: `C(:,:,k) = A(:,:,k) * B(:,:,k)`.
    pub fn t_product(&self, other: &Self) -> Result<Self> {
        let [n1, n2, n3] = self.dims;
        let [m1, l, m3] = other.dims;
        if n2 != m1 || n3 != m3 {
            return Err(Error::shape("t_product", &self.dims, &other.dims));
        }
        let mut out = vec![ZERO; n1 * l * n3];
        linalg::for_each_slice(&mut out, n1 * l, |k, chunk| {
            linalg::gemm(linalg::view_mut(chunk, n1, l), self.slice(k), other.slice(k));
        });
        Ok(Self::raw([n1, l, n3], out))
    }

    fn transposed(&self, conj: bool) -> Self {
        let [n1, n2, n3] = self.dims;
        let mut out = vec![ZERO; self.len()];
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    let z = self.data[(k * n2 + j) * n1 + i];
                    out[(k * n1 + i) * n2 + j] = if conj { z.conj() } else { z };
                }
            }
        }
        Self {
            dims: [n2, n1, n3],
            data: out,
            real_hint: self.real_hint,
        }
    }

    /// Slice-wise transpose.
    pub fn t_transpose(&self) -> Self {
        self.transposed(false)
    }

    /// Slice-wise conjugate transpose.
    pub fn t_conj_transpose(&self) -> Self {
        self.transposed(true)
    }

    /// Whether `U * U^H` and `U^H * U` are both within `tol` (Frobenius) of the
    /// identity tensor.
    pub fn is_unitary(&self, tol: f64) -> Result<bool> {
        let [n1, n2, n3] = self.dims;
        if n1 != n2 {
            return Err(Error::shape("is_unitary", &self.dims, &[n1, n1, n3]));
        }
        let id = Self::identity(n1, n3)?;
        let uh = self.t_conj_transpose();
        let left = self.t_product(&uh)?.try_sub(&id)?.fro_norm();
        let right = uh.t_product(self)?.try_sub(&id)?.fro_norm();
        Ok(left <= tol && right <= tol)
    }

    /// `<A, B> = sum conj(a_ijk) * b_ijk`.
    pub fn inner_product(&self, other: &Self) -> Result<c64> {
        if self.dims != other.dims {
            return Err(Error::shape("inner_product", &self.dims, &other.dims));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b))
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn inf_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest l2 norm over the horizontal slices `A(i,:,:)` and the lateral
    /// slices `A(:,j,:)`.
    pub fn inf2_norm(&self) -> f64 {
        let [n1, n2, n3] = self.dims;
        let mut rows = vec![0.0f64; n1];
        let mut cols = vec![0.0f64; n2];
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    let e = self.data[(k * n2 + j) * n1 + i].norm_sqr();
                    rows[i] += e;
                    cols[j] += e;
                }
            }
        }
        rows.iter().chain(&cols).fold(0.0f64, |m, &e| m.max(e)).sqrt()
    }

    /// Largest entry-wise difference magnitude; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dims, other.dims, "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Mode-3 product: `out(i,j,l) = sum_k t(l,k) * A(i,j,k)`.
    pub fn mode3_product(&self, t: MatRef<'_, c64>) -> Result<Self> {
        let [n1, n2, n3] = self.dims;
        if t.ncols() != n3 {
            return Err(Error::shape("mode3_product", &self.dims, &[t.nrows(), t.ncols()]));
        }
        let big = t.nrows();
        if big == 0 {
            return Err(Error::shape("mode3_product", &self.dims, &[t.nrows(), t.ncols()]));
        }
        // Viewed as an (n1*n2) x n3 matrix whose columns are the slices.
        let mut out = vec![ZERO; n1 * n2 * big];
        linalg::gemm(
            linalg::view_mut(&mut out, n1 * n2, big),
            linalg::view(&self.data, n1 * n2, n3),
            t.transpose(),
        );
        Ok(Self::raw([n1, n2, big], out))
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = c64;

    fn index(&self, (i, j, k): (usize, usize, usize)) -> &c64 {
        let [n1, n2, n3] = self.dims;
        assert!(i < n1 && j < n2 && k < n3, "index ({i},{j},{k}) out of {:?}", self.dims);
        &self.data[self.offset(i, j, k)]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut c64 {
        let [n1, n2, n3] = self.dims;
        assert!(i < n1 && j < n2 && k < n3, "index ({i},{j},{k}) out of {:?}", self.dims);
        let off = self.offset(i, j, k);
        &mut self.data[off]
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;

    /// Panics on shape mismatch; use [`Tensor3::try_add`] for a checked version.
    fn add(self, rhs: &Tensor3) -> Tensor3 {
        self.try_add(rhs).expect("tensor add")
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;

    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        self.try_sub(rhs).expect("tensor sub")
    }
}
