//! Desk-scale diffusion/flow laboratory with self-guided sampling.
//!
//! The crate pairs exact Gaussian-mixture oracles with a small trainable
//! score/velocity network, a composable guidance engine (classifier-free,
//! self-guidance, and its previous-step variant), reverse-time samplers,
//! and a metric suite including an independent Fokker-Planck solver.

pub mod analytic;
pub mod error;
pub mod eval;
pub mod field;
pub mod guidance;
pub mod matrix;
pub mod nn;
pub mod plot;
pub mod sampler;
pub mod schedule;
pub mod swirl;

pub use analytic::{DensityGrid, GridSpec, MixtureComponent, MixtureDensity};
pub use error::{Result, SgError};
pub use eval::{MetricReport, SwirlStats};
pub use field::{AnalyticScoreField, AnalyticVelocityField, Condition, ScoreField};
pub use guidance::{GuidanceStack, ShiftSchedule, StepCache};
pub use matrix::Matrix;
pub use nn::ScoreNet;
pub use sampler::{run_chain, SampleRun, SamplerConfig, SamplerKind};
pub use schedule::{rf_interpolant, NoiseSchedule, ScheduleKind, T_EPS};
pub use swirl::SwirlSpec;
