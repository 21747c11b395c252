//! Bayesian random-intercept regression for longitudinal clinical-trial panels.
//!
//! The crate covers the full analysis pipeline for a long-format outcome panel
//! (patients observed at a fixed visit schedule across multiple sites and
//! treatment arms):
//!
//! * [`data`] — panel ingestion, validation, and baseline summaries
//! * [`design`] — covariate encoding into fixed-effect design matrices
//! * [`model`] — the hierarchical model, priors, and log-posterior
//! * [`mcmc`] — Gibbs sampling with conjugate updates and slice steps
//! * [`diagnostics`] — posterior summaries, ESS, Geweke, split R-hat, KDE
//! * [`selection`] — credible-interval-driven backward covariate elimination
//! * [`analysis`] — prior-sensitivity, group-mean posteriors, contrasts
//! * [`synthetic`] — generative simulator and calibration (SBC) harness
//! * [`export`] — deterministic JSON/CSV report serialization
//!
//! All randomness flows from explicit 64-bit seeds; identical inputs produce
//! bit-identical traces and reports regardless of how many worker threads run
//! the chains.

pub mod analysis;
pub mod data;
pub mod design;
pub mod diagnostics;
pub mod export;
pub mod mcmc;
pub mod model;
pub mod rng;
pub mod selection;
pub mod synthetic;

pub use data::{Arm, BaselineSummary, ObservationRecord, PanelDataset, Sex};
pub use design::{CovariateSpec, DesignMatrix};
pub use diagnostics::{ParameterSummary, PosteriorSummary};
pub use mcmc::{InitStrategy, SamplerConfig, TraceStore};
pub use model::{ModelDefinition, ParameterPoint, Prior, PriorConfig};
