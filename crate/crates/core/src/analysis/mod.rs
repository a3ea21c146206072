//! Diagnostics around a completion problem: incoherence of the singular
//! tensors, the tangent-space projector, the sampling-rate bound, phase
//! diagrams and reconstruction quality metrics.

mod bound;
mod incoherence;
mod metrics;
mod phase;
mod projection;

pub use bound::{appendix_d_bound_check, appendix_d_margin, sampling_bound, BoundMargin};
pub use incoherence::{incoherence, IncoherenceReport};
pub use metrics::{metrics, mpsnr, mssim, psnr, rel_error, ssim, MetricsReport};
pub use phase::{
    phase_experiment, run_trial, run_trial_observed, trial_seeds, GenModel, PhaseCell, PhaseSetup, RankTarget,
    TrialOutcome, SUCCESS_THRESHOLD,
};
pub use projection::{project_s, project_s_perp};
