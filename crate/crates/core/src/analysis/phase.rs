use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::{bernoulli_mask, gen_double, gen_single, GeneratorConfig};
use crate::rng::derive_seed;
use crate::solver::{admm_complete_observed, SamplingMask, SolverConfig, SolverReport};
use crate::tensor::Tensor3;
use crate::transform::LinearTransform;

use super::metrics::rel_error;

/// A trial succeeds when `||X - M||_F / ||M||_F` is at most this.
pub const SUCCESS_THRESHOLD: f64 = 1e-3;

const GEN_TAG: u64 = 0x67656e;
const MASK_TAG: u64 = 0x6d736b;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankTarget {
    Single(usize),
    Double(usize, usize),
}

impl RankTarget {
    fn parts(self) -> [u64; 2] {
        match self {
            RankTarget::Single(r) => [r as u64, 0],
            RankTarget::Double(r1, r2) => [r1 as u64, r2 as u64],
        }
    }
}

/// Transform(s) used to draw the ground truth.
#[derive(Debug, Clone)]
pub enum GenModel {
    Single(LinearTransform),
    Double(LinearTransform, LinearTransform),
}

#[derive(Debug, Clone)]
pub struct PhaseSetup {
    pub dims: [usize; 3],
    pub gen: GenModel,
    /// Transform handed to the solver.
    pub solve: LinearTransform,
}

impl PhaseSetup {
    /// Generates and solves with the same transform.
    pub fn single(dims: [usize; 3], t: LinearTransform) -> Self {
        PhaseSetup {
            dims,
            gen: GenModel::Single(t.clone()),
            solve: t,
        }
    }

    fn check(&self, target: RankTarget) -> Result<()> {
        let ok = matches!(
            (&self.gen, target),
            (GenModel::Single(_), RankTarget::Single(_)) | (GenModel::Double(..), RankTarget::Double(..))
        );
        if !ok {
            return Err(Error::param(format!("rank target {target:?} does not fit the generator model")));
        }
        Ok(())
    }

    fn generate(&self, target: RankTarget, cfg: &GeneratorConfig) -> Result<Tensor3> {
        match (&self.gen, target) {
            (GenModel::Single(t), RankTarget::Single(r)) => gen_single(t, self.dims, r, cfg),
            (GenModel::Double(t1, t2), RankTarget::Double(r1, r2)) => gen_double(t1, r1, t2, r2, self.dims, cfg),
            _ => Err(Error::param("rank target does not fit the generator model")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCell {
    pub ranks: RankTarget,
    pub p: f64,
    pub trials: usize,
    pub successes: usize,
    /// Trials whose ground truth could not be generated; counted as failures.
    pub generator_failures: usize,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub rel_error: f64,
    pub report: SolverReport,
}

impl TrialOutcome {
    pub fn success(&self) -> bool {
        self.rel_error <= SUCCESS_THRESHOLD
    }
}

/// Solves one completion problem and scores it against the ground truth.
pub fn run_trial(m: &Tensor3, mask: &SamplingMask, t: &LinearTransform, cfg: &SolverConfig) -> Result<TrialOutcome> {
    run_trial_observed(m, mask, t, cfg, |_, _| {})
}

pub fn run_trial_observed(
    m: &Tensor3,
    mask: &SamplingMask,
    t: &LinearTransform,
    cfg: &SolverConfig,
    observer: impl FnMut(usize, &Tensor3),
) -> Result<TrialOutcome> {
    let (x, report) = admm_complete_observed(m, mask, t, cfg, observer)?;
    Ok(TrialOutcome {
        rel_error: rel_error(m, &x)?,
        report,
    })
}

/// Seeds used for trial `trial` of cell `(ranks, p)`: `(generator, mask)`.
pub fn trial_seeds(master: u64, ranks: RankTarget, p: f64, trial: usize) -> (u64, u64) {
    let [a, b] = ranks.parts();
    let base = [a, b, p.to_bits(), trial as u64];
    let with = |tag| {
        let mut parts = base.to_vec();
        parts.push(tag);
        derive_seed(master, &parts)
    };
    (with(GEN_TAG), with(MASK_TAG))
}

enum Trial {
    Scored(bool),
    GenFailed,
}

fn one_trial(
    setup: &PhaseSetup,
    ranks: RankTarget,
    p: f64,
    trial: usize,
    seed: u64,
    solver: &SolverConfig,
    gen: &GeneratorConfig,
) -> Result<Trial> {
    let (gen_seed, mask_seed) = trial_seeds(seed, ranks, p, trial);
    let gcfg = GeneratorConfig {
        seed: gen_seed,
        ..gen.clone()
    };
    let m = match setup.generate(ranks, &gcfg) {
        Ok(m) => m,
        Err(Error::NoConvergence { .. }) => return Ok(Trial::GenFailed),
        Err(e) => return Err(e),
    };
    let mask = bernoulli_mask(setup.dims, p, mask_seed)?;
    if mask.is_empty() {
        return Ok(Trial::Scored(false));
    }
    Ok(Trial::Scored(run_trial(&m, &mask, &setup.solve, solver)?.success()))
}

/// Success counts for every `(rank, rate)` cell, ordered rank-major.
pub fn phase_experiment(
    setup: &PhaseSetup,
    ranks: &[RankTarget],
    rates: &[f64],
    trials: usize,
    seed: u64,
    solver: &SolverConfig,
    gen: &GeneratorConfig,
) -> Result<Vec<PhaseCell>> {
    solver.validate()?;
    let [n1, n2, _] = setup.dims;
    for &target in ranks {
        setup.check(target)?;
        let [a, b] = target.parts();
        if a == 0 || a as usize > n1.min(n2) || b as usize > n1.min(n2) {
            return Err(Error::param(format!("rank {target:?} outside 1..={}", n1.min(n2))));
        }
    }
    if let Some(p) = rates.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::param(format!("sampling rate {p} outside (0, 1]")));
    }

    let jobs: Vec<(usize, usize, usize)> = (0..ranks.len())
        .flat_map(|a| (0..rates.len()).flat_map(move |b| (0..trials).map(move |t| (a, b, t))))
        .collect();
    let results: Vec<Trial> = jobs
        .par_iter()
        .map(|&(a, b, t)| one_trial(setup, ranks[a], rates[b], t, seed, solver, gen))
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(ranks.len() * rates.len());
    for (a, &target) in ranks.iter().enumerate() {
        for (b, &p) in rates.iter().enumerate() {
            let start = (a * rates.len() + b) * trials;
            let mut cell = PhaseCell {
                ranks: target,
                p,
                trials,
                successes: 0,
                generator_failures: 0,
            };
            for r in &results[start..start + trials] {
                match r {
                    Trial::Scored(true) => cell.successes += 1,
                    Trial::Scored(false) => {}
                    Trial::GenFailed => cell.generator_failures += 1,
                }
            }
            cells.push(cell);
        }
    }
    Ok(cells)
}
