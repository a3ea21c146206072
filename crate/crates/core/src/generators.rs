//! Random tensors with a prescribed tubal rank in one or two transform
//! domains, plus Bernoulli sampling masks. Bijective single transforms use
//! one exact projection sweep; everything else is refined by Gauss-Newton
//! steps on the tail residual, with step halving and a projection sweep as
//! fallback. A result is accepted only if each target rank is met exactly.

use faer::Mat;
use rand::Rng as _;

use crate::analysis::project_s_perp;
use crate::error::{Error, Result};
use crate::linalg::c64;
use crate::rng;
use crate::solver::SamplingMask;
use crate::tensor::Tensor3;
use crate::transform::LinearTransform;
use crate::tsvd::{t_svd, TSvdFactors};

/// Iterations without relative improvement after which a run is restarted.
const STAGNATION_WINDOW: usize = 50;
const STAGNATION_GAIN: f64 = 1e-3;
const MAX_RESTARTS: usize = 3;
/// Conjugate-gradient budget per Gauss-Newton step; starts low and doubles
/// while full steps make slow progress.
const CG_MIN_ITERS: usize = 200;
const CG_MAX_ITERS: usize = 1600;
const CG_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub max_iters: usize,
    /// Target for the `(r+1)`-th tube norm relative to the largest singular
    /// value.
    pub rank_tol: f64,
    pub seed: u64,
    /// Draw a real initial tensor and return a real-hinted result when the
    /// iteration keeps it real.
    pub real: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            rank_tol: 1e-8,
            seed: 0,
            real: false,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.rank_tol > 0.0) {
            return Err(Error::param(format!("invalid generator config {self:?}")));
        }
        Ok(())
    }
}

/// How a generator run ended.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorStats {
    /// Refinement steps performed in the successful attempt.
    pub iterations: usize,
    /// Final tail ratio per transform (see `rank_tol`).
    pub ratios: Vec<f64>,
    pub restarts: usize,
}

fn check_rank(r: usize, dims: [usize; 3]) -> Result<()> {
    let s = dims[0].min(dims[1]);
    if r == 0 || r > s {
        return Err(Error::param(format!("target rank {r} outside 1..={s}")));
    }
    Ok(())
}

/// `(r+1)`-th tube norm over the largest singular value; zero when `r` covers
/// every tube. Never below the `(r+1)`-th over first tube-norm ratio, so a
/// value under `rank_tol` also gives tubal rank `r` at threshold `rank_tol`.
fn tail_ratio(f: &TSvdFactors, r: usize) -> f64 {
    let tubes = f.tube_norms();
    let smax = f.max_singular_value();
    if r >= tubes.len() || smax == 0.0 {
        return 0.0;
    }
    tubes[r] / smax
}

/// Whether the `r`-th tube is still above the rank threshold, so the result
/// has rank exactly `r` rather than collapsing below it.
fn full_rank(f: &TSvdFactors, r: usize, tol: f64) -> bool {
    f.tube_norms()[r - 1] > tol * f.max_singular_value()
}

fn keep_top(f: &TSvdFactors, r: usize) -> Tensor3 {
    f.reconstruct_with(|_, i, s| if i < r { s } else { 0.0 })
}

/// Nearest tensor of tubal rank at most `r` in Frobenius norm: zero every
/// tube past the `r` largest and rebuild.
pub fn truncated_t_svd_project(a: &Tensor3, r: usize) -> Result<Tensor3> {
    check_rank(r, a.dims())?;
    if r == a.dims()[0].min(a.dims()[1]) {
        return Ok(a.clone());
    }
    Ok(keep_top(&t_svd(a)?, r))
}

fn random_tensor(dims: [usize; 3], seed: u64, real: bool) -> Result<Tensor3> {
    let mut rng = rng::seeded(seed);
    Tensor3::from_fn(dims, |_, _, _| {
        if real {
            c64::new(rng::real_gaussian(&mut rng), 0.0)
        } else {
            rng::complex_gaussian(&mut rng)
        }
    })
}

fn finish_real(m: Tensor3, real: bool) -> Tensor3 {
    if real {
        let limit = crate::tensor::REAL_HINT_TOL * (m.fro_norm() + 1.0);
        if m.imag_residue() <= limit {
            return m.real_part();
        }
    }
    m
}

/// Tracks whether a ratio sequence has stopped improving.
struct Stagnation {
    checkpoint: f64,
    since: usize,
}

impl Stagnation {
    fn new() -> Self {
        Self {
            checkpoint: f64::INFINITY,
            since: 0,
        }
    }

    fn stalled(&mut self, ratio: f64) -> bool {
        if ratio < self.checkpoint * (1.0 - STAGNATION_GAIN) {
            self.checkpoint = ratio;
            self.since = 0;
            return false;
        }
        self.since += 1;
        self.since >= STAGNATION_WINDOW
    }
}

enum Attempt {
    Done(Tensor3, GeneratorStats),
    Failed { iterations: usize, ratios: Vec<f64> },
}

fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    if attempt == 0 {
        seed
    } else {
        rng::derive_seed(seed, &[attempt as u64])
    }
}

/// Generates `M` with `rank(T(M)) = r` and `||T(M)||_F = 1`.
pub fn gen_single(t: &LinearTransform, dims: [usize; 3], r: usize, cfg: &GeneratorConfig) -> Result<Tensor3> {
    Ok(gen_single_with_stats(t, dims, r, cfg)?.0)
}

pub fn gen_single_with_stats(
    t: &LinearTransform,
    dims: [usize; 3],
    r: usize,
    cfg: &GeneratorConfig,
) -> Result<(Tensor3, GeneratorStats)> {
    generate(&[Target::new(t, r, dims, "gen_single")?], Norm::Transformed, dims, cfg)
}

/// Generates `M` with `rank(T1(M)) = r1`, `rank(T2(M)) = r2` and
/// `||M||_F = 1`.
pub fn gen_double(
    t1: &LinearTransform,
    r1: usize,
    t2: &LinearTransform,
    r2: usize,
    dims: [usize; 3],
    cfg: &GeneratorConfig,
) -> Result<Tensor3> {
    Ok(gen_double_with_stats(t1, r1, t2, r2, dims, cfg)?.0)
}

pub fn gen_double_with_stats(
    t1: &LinearTransform,
    r1: usize,
    t2: &LinearTransform,
    r2: usize,
    dims: [usize; 3],
    cfg: &GeneratorConfig,
) -> Result<(Tensor3, GeneratorStats)> {
    let targets = [
        Target::new(t1, r1, dims, "gen_double")?,
        Target::new(t2, r2, dims, "gen_double")?,
    ];
    generate(&targets, Norm::Original, dims, cfg)
}

struct Target<'a> {
    t: &'a LinearTransform,
    adjoint: Mat<c64>,
    r: usize,
}

impl<'a> Target<'a> {
    fn new(t: &'a LinearTransform, r: usize, dims: [usize; 3], op: &'static str) -> Result<Self> {
        check_rank(r, dims)?;
        if t.n3() != dims[2] {
            return Err(Error::shape(op, &dims, &[t.big_n3(), t.n3()]));
        }
        Ok(Self {
            t,
            adjoint: t.matrix().adjoint().to_owned(),
            r,
        })
    }

    fn adjoint_apply(&self, x: &Tensor3) -> Result<Tensor3> {
        x.mode3_product(self.adjoint.as_ref())
    }

    /// Least-squares pullback of the rank-`r` truncation.
    fn sweep(&self, f: &TSvdFactors) -> Result<Tensor3> {
        self.t.pinv_apply(&keep_top(f, self.r))
    }
}

/// Which norm is fixed to one: `||T(M)||_F` for a single transform, `||M||_F`
/// for two.
#[derive(Clone, Copy)]
enum Norm {
    Transformed,
    Original,
}

fn generate(
    targets: &[Target<'_>],
    norm: Norm,
    dims: [usize; 3],
    cfg: &GeneratorConfig,
) -> Result<(Tensor3, GeneratorStats)> {
    cfg.validate()?;
    let mut last = (0, vec![f64::INFINITY; targets.len()]);
    for attempt in 0..=MAX_RESTARTS {
        let m0 = random_tensor(dims, attempt_seed(cfg.seed, attempt), cfg.real)?;
        match run_attempt(targets, norm, cfg, m0)? {
            Attempt::Done(m, mut stats) => {
                stats.restarts = attempt;
                return Ok((finish_real(m, cfg.real), stats));
            }
            Attempt::Failed { iterations, ratios } => last = (iterations, ratios),
        }
    }
    Err(Error::NoConvergence {
        iterations: last.0,
        ratios: last.1,
        tol: cfg.rank_tol,
    })
}

fn normalize(m: Tensor3, targets: &[Target<'_>], norm: Norm) -> Result<Tensor3> {
    let n = match norm {
        Norm::Transformed => targets[0].t.apply(&m)?.fro_norm(),
        Norm::Original => m.fro_norm(),
    };
    Ok(if n == 0.0 { m } else { m.scale(c64::new(1.0 / n, 0.0)) })
}

fn factorize(targets: &[Target<'_>], m: &Tensor3) -> Result<(Vec<TSvdFactors>, Vec<f64>)> {
    let factors = targets
        .iter()
        .map(|g| t_svd(&g.t.apply(m)?))
        .collect::<Result<Vec<_>>>()?;
    let ratios = factors.iter().zip(targets).map(|(f, g)| tail_ratio(f, g.r)).collect();
    Ok((factors, ratios))
}

fn worst(ratios: &[f64]) -> f64 {
    ratios.iter().copied().fold(0.0, f64::max)
}

fn run_attempt(targets: &[Target<'_>], norm: Norm, cfg: &GeneratorConfig, m0: Tensor3) -> Result<Attempt> {
    // A single bijective transform is handled exactly by one projection
    // sweep; otherwise the sweep is only a fallback for the Gauss-Newton step.
    let exact_sweep = targets.len() == 1 && targets[0].t.big_n3() == targets[0].t.n3();
    let mut m = normalize(m0, targets, norm)?;
    let (mut factors, mut ratios) = factorize(targets, &m)?;
    let mut stag = Stagnation::new();
    let mut iterations = 0;
    let mut cg_budget = CG_MIN_ITERS;
    loop {
        if ratios.iter().all(|&r| r <= cfg.rank_tol) {
            if !factors.iter().zip(targets).all(|(f, g)| full_rank(f, g.r, cfg.rank_tol)) {
                return Ok(Attempt::Failed { iterations, ratios });
            }
            return Ok(Attempt::Done(
                m,
                GeneratorStats {
                    iterations,
                    ratios,
                    restarts: 0,
                },
            ));
        }
        if iterations >= cfg.max_iters || stag.stalled(worst(&ratios)) {
            return Ok(Attempt::Failed { iterations, ratios });
        }
        iterations += 1;

        if !exact_sweep {
            let step = gauss_newton_step(targets, &factors, &m, cg_budget)?;
            let mut accepted = false;
            for h in 0..4 {
                let candidate = normalize(&m + &step.scale(c64::new(0.5f64.powi(h), 0.0)), targets, norm)?;
                let (f, r) = factorize(targets, &candidate)?;
                if worst(&r) < worst(&ratios) {
                    // A full step with slow progress means the linear solve
                    // was too inexact; a shortened one points at curvature.
                    if h == 0 && worst(&r) > 0.5 * worst(&ratios) {
                        cg_budget = (2 * cg_budget).min(CG_MAX_ITERS);
                    }
                    (m, factors, ratios) = (candidate, f, r);
                    accepted = true;
                    break;
                }
            }
            if accepted {
                continue;
            }
        }
        // Plain alternating projection sweep, one transform after another.
        m = normalize(targets[0].sweep(&factors[0])?, targets, norm)?;
        for g in &targets[1..] {
            m = normalize(g.sweep(&t_svd(&g.t.apply(&m)?)?)?, targets, norm)?;
        }
        (factors, ratios) = factorize(targets, &m)?;
    }
}

/// Gauss-Newton correction for the tail residuals `N_i(T_i(M))`, where `N_i`
/// projects each frontal slice onto the complement of its top-`r_i` singular
/// subspaces. Solves `sum_i T_i^H N_i T_i dM = -sum_i T_i^H N_i T_i(M)` by
/// conjugate gradients.
fn gauss_newton_step(
    targets: &[Target<'_>],
    factors: &[TSvdFactors],
    m: &Tensor3,
    max_iters: usize,
) -> Result<Tensor3> {
    let bases = factors
        .iter()
        .zip(targets)
        .map(|(f, g)| f.skinny(g.r))
        .collect::<Result<Vec<_>>>()?;
    let normal = |d: &Tensor3| -> Result<Tensor3> {
        let mut out = Tensor3::zeros(d.dims())?;
        for (g, (u, v)) in targets.iter().zip(&bases) {
            out.axpy(c64::new(1.0, 0.0), &g.adjoint_apply(&project_s_perp(&g.t.apply(d)?, u, v)?)?)?;
        }
        Ok(out)
    };
    let b = normal(m)?.scale(c64::new(-1.0, 0.0));
    let mut d = Tensor3::zeros(m.dims())?;
    let mut res = b.clone();
    let mut p = res.clone();
    let mut rs = res.fro_norm().powi(2);
    let stop = rs * CG_REL_TOL * CG_REL_TOL;
    for _ in 0..max_iters {
        if rs <= stop || rs == 0.0 {
            break;
        }
        let ap = normal(&p)?;
        let curv = p.inner_product(&ap)?.re;
        if !(curv > 0.0) {
            break;
        }
        let alpha = rs / curv;
        d.axpy(c64::new(alpha, 0.0), &p)?;
        res.axpy(c64::new(-alpha, 0.0), &ap)?;
        let next = res.fro_norm().powi(2);
        p = p.scale(c64::new(next / rs, 0.0));
        p.axpy(c64::new(1.0, 0.0), &res)?;
        rs = next;
    }
    Ok(d)
}

/// Includes each index independently with probability `p`.
pub fn bernoulli_mask(dims: [usize; 3], p: f64, seed: u64) -> Result<SamplingMask> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param(format!("sampling rate {p} outside (0, 1]")));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::shape("bernoulli_mask", &dims, &[1, 1, 1]));
    }
    let mut rng = rng::seeded(seed);
    let flags = (0..dims.iter().product::<usize>())
        .map(|_| rng.random::<f64>() < p)
        .collect();
    SamplingMask::from_flags(dims, flags)
}
