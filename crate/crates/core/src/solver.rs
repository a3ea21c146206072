//! ADMM for `min ||T(X)||_*  s.t.  X agrees with M on the observed set`.
//!
//! The splitting introduces `Y = T(X)` in the transform domain together with a
//! multiplier `Z`; each sweep updates `Y` by singular value thresholding, then
//! `X` by a pseudo-inverse pullback that re-imposes the observed entries, then
//! `Z`, and finally grows the penalty geometrically.

use crate::error::{Error, Result};
use crate::linalg::{c64, ZERO};
use crate::transform::LinearTransform;
use crate::tensor::Tensor3;
use crate::tsvd::{self, t_svd};

/// Observed index set, sorted lexicographically by `(i, j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMask {
    dims: [usize; 3],
    observed: Vec<[usize; 3]>,
    // Dense membership flags in tensor layout order.
    flags: Vec<bool>,
}

impl SamplingMask {
    /// Builds a mask from arbitrary indices; duplicates are merged.
    pub fn from_indices(dims: [usize; 3], mut indices: Vec<[usize; 3]>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::shape("mask", &dims, &[1, 1, 1]));
        }
        if let Some(bad) = indices.iter().find(|ix| (0..3).any(|a| ix[a] >= dims[a])) {
            return Err(Error::param(format!("mask index {bad:?} outside {dims:?}")));
        }
        indices.sort_unstable();
        indices.dedup();
        let [n1, n2, _] = dims;
        let mut flags = vec![false; dims.iter().product()];
        for &[i, j, k] in &indices {
            flags[(k * n2 + j) * n1 + i] = true;
        }
        Ok(Self {
            dims,
            observed: indices,
            flags,
        })
    }

    /// Builds a mask from dense layout-order flags.
    pub fn from_flags(dims: [usize; 3], flags: Vec<bool>) -> Result<Self> {
        if flags.len() != dims.iter().product::<usize>() {
            return Err(Error::param("mask flag count does not match dims"));
        }
        let [n1, n2, n3] = dims;
        let mut observed = Vec::new();
        for i in 0..n1 {
            for j in 0..n2 {
                for k in 0..n3 {
                    if flags[(k * n2 + j) * n1 + i] {
                        observed.push([i, j, k]);
                    }
                }
            }
        }
        Ok(Self {
            dims,
            observed,
            flags,
        })
    }

    pub fn full(dims: [usize; 3]) -> Result<Self> {
        Self::from_flags(dims, vec![true; dims.iter().product()])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn observed(&self) -> &[[usize; 3]] {
        &self.observed
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    /// `|observed| / (n1 n2 n3)`.
    pub fn rate(&self) -> f64 {
        self.observed.len() as f64 / self.flags.len() as f64
    }

    pub fn contains(&self, i: usize, j: usize, k: usize) -> bool {
        let [n1, n2, _] = self.dims;
        self.flags[(k * n2 + j) * n1 + i]
    }

    /// Membership flags in tensor layout order.
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Keeps observed entries, zeroes the rest.
    pub fn sample(&self, a: &Tensor3) -> Result<Tensor3> {
        if a.dims() != self.dims {
            return Err(Error::shape("sample", &a.dims(), &self.dims));
        }
        Ok(a.map_indexed(|idx, z| if self.flags[idx] { z } else { ZERO }))
    }

    /// Whether `a` and `b` agree bit-for-bit on every observed entry.
    pub fn agrees(&self, a: &Tensor3, b: &Tensor3) -> bool {
        a.dims() == self.dims
            && b.dims() == self.dims
            && self.flags.iter().zip(a.data().iter().zip(b.data())).all(|(&f, (x, y))| {
                !f || (x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
            })
    }
}

/// Penalty schedule and stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha0: f64,
    pub alpha_max: f64,
    pub rho_growth: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Record `(residual, objective)` every iteration; costs one extra set of
    /// slice SVDs per iteration.
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::random_data()
    }
}

impl SolverConfig {
    /// Settings for synthetic low-rank tensors.
    pub fn random_data() -> Self {
        Self {
            alpha0: 1e-2,
            alpha_max: 1e6,
            rho_growth: 1.02,
            tol: 1e-10,
            max_iters: 3000,
            record_history: false,
        }
    }

    /// Settings for image/video inpainting.
    pub fn visual_data() -> Self {
        Self {
            rho_growth: 1.2,
            tol: 1e-3,
            ..Self::random_data()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha0 > 0.0
            && self.alpha_max >= self.alpha0
            && self.rho_growth >= 1.0
            && self.tol > 0.0
            && self.max_iters >= 1
            && [self.alpha0, self.alpha_max, self.rho_growth, self.tol]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid solver config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub final_residual: f64,
    /// `||T(X)||_*` at exit.
    pub objective: f64,
    pub converged: bool,
    pub history: Option<Vec<(f64, f64)>>,
    /// Imaginary residue dropped when the output was cast to real.
    pub imag_residue: Option<f64>,
}

/// Singular value thresholding `U (S - tau)_+ V^H`, the proximal operator of
/// `tau ||.||_*`.
pub fn svt(a: &Tensor3, tau: f64) -> Result<Tensor3> {
    if !(tau >= 0.0) {
        return Err(Error::param(format!("threshold {tau} must be non-negative")));
    }
    if tau == 0.0 {
        return Ok(a.clone());
    }
    let f = t_svd(a)?;
    Ok(f.reconstruct_with(|_, _, s| (s - tau).max(0.0)))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("penalty {alpha} must be positive")))
    }
}

fn y_step(tx: &Tensor3, z: &Tensor3, alpha: f64) -> Result<Tensor3> {
    let mut arg = tx.clone();
    arg.axpy(c64::new(1.0 / alpha, 0.0), z)?;
    svt(&arg, 1.0 / alpha)
}

/// `Y = svt(T(X) + Z / alpha, 1 / alpha)`.
pub fn y_update(x: &Tensor3, z: &Tensor3, alpha: f64, t: &LinearTransform) -> Result<Tensor3> {
    check_alpha(alpha)?;
    y_step(&t.apply(x)?, z, alpha)
}

/// `X = S_{Omega^c}(T^+(Y - Z / alpha)) + S_Omega(M)`.
pub fn x_update(
    y: &Tensor3,
    z: &Tensor3,
    alpha: f64,
    mask: &SamplingMask,
    m: &Tensor3,
    t: &LinearTransform,
) -> Result<Tensor3> {
    check_alpha(alpha)?;
    if m.dims() != mask.dims() {
        return Err(Error::shape("x_update", &m.dims(), &mask.dims()));
    }
    let mut arg = y.clone();
    arg.axpy(c64::new(-1.0 / alpha, 0.0), z)?;
    let mut x = t.pinv_apply(&arg)?;
    if x.dims() != m.dims() {
        return Err(Error::shape("x_update", &x.dims(), &m.dims()));
    }
    for ((xv, &mv), &f) in x.data_mut().iter_mut().zip(m.data()).zip(mask.flags()) {
        if f {
            *xv = mv;
        }
    }
    Ok(x)
}

/// `Z + alpha (T(X) - Y)`.
pub fn z_update(z: &Tensor3, alpha: f64, x: &Tensor3, y: &Tensor3, t: &LinearTransform) -> Result<Tensor3> {
    check_alpha(alpha)?;
    z_step(z, alpha, &t.apply(x)?, y)
}

fn z_step(z: &Tensor3, alpha: f64, tx: &Tensor3, y: &Tensor3) -> Result<Tensor3> {
    let mut out = z.clone();
    out.axpy(c64::new(alpha, 0.0), &tx.try_sub(y)?)?;
    Ok(out)
}

/// `min(rho_growth * alpha, alpha_max)`.
pub fn penalty_update(alpha: f64, cfg: &SolverConfig) -> f64 {
    (cfg.rho_growth * alpha).min(cfg.alpha_max)
}

/// Runs the ADMM completion; see [`admm_complete_observed`].
pub fn admm_complete(
    m: &Tensor3,
    mask: &SamplingMask,
    t: &LinearTransform,
    cfg: &SolverConfig,
) -> Result<(Tensor3, SolverReport)> {
    admm_complete_observed(m, mask, t, cfg, |_, _| {})
}

/// Runs the ADMM completion, calling `observer(t, &X^t)` after every `X`
/// update. Reaching `max_iters` is reported through `converged = false`
/// rather than as an error.
pub fn admm_complete_observed(
    m: &Tensor3,
    mask: &SamplingMask,
    t: &LinearTransform,
    cfg: &SolverConfig,
    mut observer: impl FnMut(usize, &Tensor3),
) -> Result<(Tensor3, SolverReport)> {
    cfg.validate()?;
    if mask.dims() != m.dims() {
        return Err(Error::shape("admm_complete", &m.dims(), &mask.dims()));
    }
    if mask.is_empty() {
        return Err(Error::param("sampling mask is empty"));
    }
    if t.n3() != m.dims()[2] {
        return Err(Error::shape("admm_complete", &m.dims(), &[t.big_n3(), t.n3()]));
    }

    let mut x = mask.sample(m)?;
    let mut tx = t.apply(&x)?;
    let mut y = tx.clone();
    let mut z = Tensor3::zeros(y.dims())?;
    let mut alpha = cfg.alpha0;
    let mut history = cfg.record_history.then(Vec::new);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let y_next = y_step(&tx, &z, alpha)?;
        let x_next = x_update(&y_next, &z, alpha, mask, m, t)?;
        let tx_next = t.apply(&x_next)?;
        z = z_step(&z, alpha, &tx_next, &y_next)?;
        alpha = penalty_update(alpha, cfg);
        iterations += 1;
        observer(iterations, &x_next);

        // The feasibility gap keeps the loop from stopping while Y sits at
        // zero under a large early threshold and X has not started to move.
        residual = x_next
            .max_abs_diff(&x)
            .max(y_next.max_abs_diff(&y))
            .max(tx_next.max_abs_diff(&tx))
            .max(tx_next.max_abs_diff(&y_next));
        x = x_next;
        y = y_next;
        tx = tx_next;
        if let Some(h) = history.as_mut() {
            h.push((residual, tsvd::nuclear_norm(&tx)?));
        }
        if residual <= cfg.tol {
            converged = true;
            break;
        }
    }

    let objective = tsvd::nuclear_norm(&tx)?;
    let mut imag_residue = None;
    if m.real_hint() && t.is_real() {
        imag_residue = Some(x.imag_residue());
        x = x.real_part();
    }
    Ok((
        x,
        SolverReport {
            iterations,
            final_residual: residual,
            objective,
            converged,
            history,
            imag_residue,
        },
    ))
}
