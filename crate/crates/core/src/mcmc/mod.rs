//! Gibbs sampler for the hierarchical random-intercept model.
//!
//! One sweep updates, in fixed order, β → γ → μ_β → τ_β → σ_score → σ_γ.
//! β, γ, μ_β, and τ_β have exact conjugate full conditionals; the two
//! Uniform-prior scale parameters are drawn by stepping-out slice sampling on
//! log σ ([`slice`]). Under a fixed-precision prior regime the τ_β and σ
//! updates are skipped and the fixed values are held.
//!
//! Chains are independent units of work: chain `c` draws from a ChaCha stream
//! derived from `(seed, c)`, so a run is bit-reproducible and the assembled
//! [`TraceStore`] does not depend on how many worker threads executed the
//! chains.

pub mod slice;
pub mod updates;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelDefinition, ModelError, ParameterPoint, Prior};
use crate::rng::stream_rng;
use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};

pub use updates::{SamplerWorkspace, SigmaKind};

/// How the initial parameter state is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitStrategy {
    /// Draw the initial state from the priors (τ_β clamped to a sane range).
    PriorDraw,
    /// Least-squares-based initialization (default).
    DataDriven,
}

/// Run configuration for one multi-chain fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplerConfig {
    /// Number of chains, ≥ 1.
    pub chains: usize,
    /// Retained post-burn-in draws per chain, ≥ 100.
    pub iterations: usize,
    /// Discarded initial sweeps.
    pub burn_in: usize,
    /// Keep-every stride, ≥ 1.
    pub thin: usize,
    /// Root seed; chain c uses the stream derived from (seed, c).
    pub seed: u64,
    pub init: InitStrategy,
    /// Retain per-patient intercept draws in the trace.
    pub keep_gamma: bool,
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> SamplerConfig {
        SamplerConfig {
            chains: 4,
            iterations: 10_000,
            burn_in: 2_000,
            thin: 1,
            seed,
            init: InitStrategy::DataDriven,
            keep_gamma: true,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.chains < 1 {
            return Err(SamplerError::InvalidConfig("chains must be >= 1".into()));
        }
        if self.iterations < 100 {
            return Err(SamplerError::InvalidConfig(format!(
                "iterations must be >= 100, got {}",
                self.iterations
            )));
        }
        if self.thin < 1 {
            return Err(SamplerError::InvalidConfig("thin must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which conditional updates a sweep performs. All enabled by default; the
/// calibration harness disables single updates as negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateMask {
    pub beta: bool,
    pub gamma: bool,
    pub mu_beta: bool,
    pub tau_beta: bool,
    pub sigma_score: bool,
    pub sigma_gamma: bool,
}

impl Default for UpdateMask {
    fn default() -> Self {
        UpdateMask {
            beta: true,
            gamma: true,
            mu_beta: true,
            tau_beta: true,
            sigma_score: true,
            sigma_gamma: true,
        }
    }
}

/// Sampler failure modes.
#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("conditional precision matrix is numerically singular (condition {condition:.3e})")]
    SingularSystem { condition: f64 },
    #[error("degenerate sum of squares for {which}: all residuals identical")]
    DegenerateSS { which: &'static str },
    #[error("sweep {sweep}: {source}")]
    AtSweep {
        sweep: usize,
        #[source]
        source: Box<SamplerError>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Retained draws of a single chain, parameter-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub chain_id: usize,
    draws: Vec<Vec<f64>>,
}

impl ChainTrace {
    pub fn retained(&self) -> usize {
        self.draws.first().map_or(0, Vec::len)
    }

    pub fn param(&self, index: usize) -> &[f64] {
        &self.draws[index]
    }
}

/// Multi-chain trace with aligned parameter names.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStore {
    names: Vec<String>,
    chains: Vec<ChainTrace>,
}

impl TraceStore {
    /// Assembles chains, checking name uniqueness and equal retained lengths.
    pub fn assemble(names: Vec<String>, chains: Vec<ChainTrace>) -> Result<TraceStore, SamplerError> {
        for (i, a) in names.iter().enumerate() {
            if names[i + 1..].contains(a) {
                return Err(SamplerError::InvalidConfig(format!(
                    "duplicate parameter name `{a}`"
                )));
            }
        }
        let retained = chains.first().map_or(0, ChainTrace::retained);
        for chain in &chains {
            if chain.retained() != retained || chain.draws.len() != names.len() {
                return Err(SamplerError::InvalidConfig(
                    "chains disagree on retained length or parameter count".into(),
                ));
            }
        }
        Ok(TraceStore { names, chains })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn chain_count(&self) -> usize {
        self.chains.len()
    }

    pub fn chains(&self) -> &[ChainTrace] {
        &self.chains
    }

    /// Retained draws per chain.
    pub fn retained_per_chain(&self) -> usize {
        self.chains.first().map_or(0, ChainTrace::retained)
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Per-chain draw slices for one parameter.
    pub fn per_chain(&self, name: &str) -> Option<Vec<&[f64]>> {
        let idx = self.param_index(name)?;
        Some(self.chains.iter().map(|c| c.param(idx)).collect())
    }

    /// All draws of one parameter pooled across chains, in chain order.
    pub fn pooled(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.param_index(name)?;
        let mut out = Vec::with_capacity(self.retained_per_chain() * self.chains.len());
        for chain in &self.chains {
            out.extend_from_slice(chain.param(idx));
        }
        Some(out)
    }

    /// Builds a trace directly from per-chain, per-parameter draws (used by
    /// derived quantities such as group means).
    pub fn from_draws(
        names: Vec<String>,
        per_chain_draws: Vec<Vec<Vec<f64>>>,
    ) -> Result<TraceStore, SamplerError> {
        let chains = per_chain_draws
            .into_iter()
            .enumerate()
            .map(|(i, draws)| ChainTrace {
                chain_id: i + 1,
                draws,
            })
            .collect();
        TraceStore::assemble(names, chains)
    }
}

/// Parameter names of a trace for a model under a config.
pub fn trace_names(model: &ModelDefinition, keep_gamma: bool) -> Vec<String> {
    let mut names = model.design.columns.clone();
    names.push("mu_beta".into());
    names.push("sigma_gamma".into());
    names.push("sigma_score".into());
    names.push("tau_beta".into());
    if keep_gamma {
        for i in 1..=model.p() {
            names.push(format!("gamma_{i}"));
        }
    }
    names
}

fn clamp_tau(tau: f64) -> f64 {
    tau.clamp(1e-8, 1e8)
}

/// Initial state for a chain.
fn initial_state<R: Rng>(
    model: &ModelDefinition,
    ws: &SamplerWorkspace,
    init: InitStrategy,
    rng: &mut R,
) -> ParameterPoint {
    let k = model.k();
    let p = model.p();
    let (sigma_gamma_upper, sigma_score_upper) = match &model.prior {
        Prior::Hierarchical(c) => (c.sigma_gamma_upper, c.sigma_score_upper),
        Prior::FixedPrecision(f) => {
            // Fixed regime: scales are pinned by the preset regardless of init.
            let sigma_score = 1.0 / f.tau_score.sqrt();
            let sigma_gamma = 1.0 / f.tau_gamma.sqrt();
            let beta = ws.ridge_beta().iter().copied().collect::<Vec<f64>>();
            let mu_beta = beta.iter().sum::<f64>() / k.max(1) as f64;
            return ParameterPoint {
                beta,
                gamma: vec![0.0; p],
                mu_beta,
                sigma_gamma,
                sigma_score,
                tau_beta: f.tau_beta,
            };
        }
    };

    match init {
        InitStrategy::PriorDraw => {
            let config = match &model.prior {
                Prior::Hierarchical(c) => *c,
                Prior::FixedPrecision(_) => unreachable!("handled above"),
            };
            let tau_beta = clamp_tau(
                GammaDist::new(config.tau_beta_shape, 1.0 / config.tau_beta_rate)
                    .expect("validated prior")
                    .sample(rng),
            );
            let mu_sd = (1.0 / config.mu_beta_precision).sqrt();
            let mu_beta =
                config.mu_beta_mean + mu_sd * rng.sample::<f64, _>(StandardNormal);
            let sigma_beta = (1.0 / tau_beta).sqrt();
            let beta = (0..k)
                .map(|_| mu_beta + sigma_beta * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let sigma_gamma = rng.random::<f64>() * sigma_gamma_upper;
            let sigma_score = rng.random::<f64>() * sigma_score_upper;
            let gamma = (0..p)
                .map(|_| sigma_gamma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            ParameterPoint {
                beta,
                gamma,
                mu_beta,
                sigma_gamma: sigma_gamma.max(1e-6),
                sigma_score: sigma_score.max(1e-6),
                tau_beta,
            }
        }
        InitStrategy::DataDriven => {
            let beta: Vec<f64> = ws.ridge_beta().iter().copied().collect();
            let n = model.n();
            let mut resid = vec![0.0; n];
            for row in 0..n {
                let mut eta = 0.0;
                for (col, b) in beta.iter().enumerate() {
                    eta += model.design.values[(row, col)] * b;
                }
                resid[row] = model.response[row] - eta;
            }
            let sigma_score = if n > 0 {
                let mean = resid.iter().sum::<f64>() / n as f64;
                (resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
            } else {
                1.0
            };
            let sigma_score = sigma_score.clamp(1e-3, 0.999 * sigma_score_upper);

            let mut patient_sum = vec![0.0; p];
            let mut patient_n = vec![0usize; p];
            for row in 0..n {
                let pat = model.design.patient_of_row[row];
                patient_sum[pat] += resid[row];
                patient_n[pat] += 1;
            }
            let means: Vec<f64> = (0..p)
                .filter(|&i| patient_n[i] > 0)
                .map(|i| patient_sum[i] / patient_n[i] as f64)
                .collect();
            let sigma_gamma = if means.len() > 1 {
                let m = means.iter().sum::<f64>() / means.len() as f64;
                (means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / means.len() as f64).sqrt()
            } else {
                1.0
            };
            let sigma_gamma = sigma_gamma.clamp(1e-3, 0.999 * sigma_gamma_upper);

            let mu_beta = if k > 0 {
                beta.iter().sum::<f64>() / k as f64
            } else {
                0.0
            };
            let var_beta = if k > 0 {
                beta.iter().map(|b| (b - mu_beta).powi(2)).sum::<f64>() / k as f64
            } else {
                1.0
            };
            ParameterPoint {
                beta,
                gamma: vec![0.0; p],
                mu_beta,
                sigma_gamma,
                sigma_score,
                tau_beta: clamp_tau(1.0 / (var_beta + 1e-6)),
            }
        }
    }
}

/// Runs a single chain; deterministic given `(config.seed, chain_id)`.
pub fn run_chain(
    model: &ModelDefinition,
    config: &SamplerConfig,
    chain_id: usize,
) -> Result<ChainTrace, SamplerError> {
    run_chain_masked(model, config, chain_id, UpdateMask::default())
}

/// [`run_chain`] with selected conditional updates disabled.
pub fn run_chain_masked(
    model: &ModelDefinition,
    config: &SamplerConfig,
    chain_id: usize,
    mask: UpdateMask,
) -> Result<ChainTrace, SamplerError> {
    config.validate()?;
    let ws = SamplerWorkspace::new(model)?;
    let mut rng = stream_rng(config.seed, chain_id as u64);
    let mut state = initial_state(model, &ws, config.init, &mut rng);

    let fixed_regime = matches!(model.prior, Prior::FixedPrecision(_));
    let total_sweeps = config.burn_in + config.iterations * config.thin;
    let k = model.k();
    let p = model.p();
    let recorded_params = k + 4 + if config.keep_gamma { p } else { 0 };
    let mut draws: Vec<Vec<f64>> = vec![Vec::with_capacity(config.iterations); recorded_params];

    for sweep in 0..total_sweeps {
        let step = |e: SamplerError| SamplerError::AtSweep {
            sweep,
            source: Box::new(e),
        };
        if mask.beta {
            updates::update_beta(&ws, &mut state, &mut rng).map_err(step)?;
        }
        if mask.gamma {
            updates::update_gamma(&ws, &mut state, &mut rng);
        }
        if mask.mu_beta {
            updates::update_mu_beta(&ws, &mut state, &mut rng);
        }
        if !fixed_regime {
            if mask.tau_beta {
                updates::update_tau_beta(&ws, &mut state, &mut rng);
            }
            if mask.sigma_score {
                updates::update_sigma(&ws, &mut state, SigmaKind::Score, &mut rng).map_err(step)?;
            }
            if mask.sigma_gamma {
                updates::update_sigma(&ws, &mut state, SigmaKind::Gamma, &mut rng).map_err(step)?;
            }
        }

        let past_burn_in = sweep >= config.burn_in;
        let keep = past_burn_in && (sweep - config.burn_in + 1) % config.thin == 0;
        if keep {
            for (idx, b) in state.beta.iter().enumerate() {
                draws[idx].push(*b);
            }
            draws[k].push(state.mu_beta);
            draws[k + 1].push(state.sigma_gamma);
            draws[k + 2].push(state.sigma_score);
            draws[k + 3].push(state.tau_beta);
            if config.keep_gamma {
                for (idx, g) in state.gamma.iter().enumerate() {
                    draws[k + 4 + idx].push(*g);
                }
            }
        }
    }

    Ok(ChainTrace { chain_id, draws })
}

/// Runs all chains (concurrently when more than one) and assembles the trace.
pub fn run_chains(model: &ModelDefinition, config: &SamplerConfig) -> Result<TraceStore, SamplerError> {
    run_chains_masked(model, config, UpdateMask::default())
}

/// [`run_chains`] with an update mask.
pub fn run_chains_masked(
    model: &ModelDefinition,
    config: &SamplerConfig,
    mask: UpdateMask,
) -> Result<TraceStore, SamplerError> {
    let workers = std::thread::available_parallelism()
        .map(std::num::NonZeroUsize::get)
        .unwrap_or(1)
        .min(config.chains);
    run_chains_with_workers(model, config, mask, workers)
}

/// Runs chains on a bounded worker pool. The result is identical for any
/// worker count; exposed so the determinism contract can be tested directly.
pub fn run_chains_with_workers(
    model: &ModelDefinition,
    config: &SamplerConfig,
    mask: UpdateMask,
    workers: usize,
) -> Result<TraceStore, SamplerError> {
    config.validate()?;
    let names = trace_names(model, config.keep_gamma);
    let chains = config.chains;
    let workers = workers.clamp(1, chains);

    let mut results: Vec<Option<Result<ChainTrace, SamplerError>>> = (0..chains).map(|_| None).collect();
    if workers == 1 {
        for (slot, result) in results.iter_mut().enumerate() {
            *result = Some(run_chain_masked(model, config, slot + 1, mask));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let outputs = std::sync::Mutex::new((0..chains).map(|_| None).collect::<Vec<_>>());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if idx >= chains {
                        break;
                    }
                    let trace = run_chain_masked(model, config, idx + 1, mask);
                    outputs.lock().unwrap()[idx] = Some(trace);
                });
            }
        });
        results = outputs.into_inner().unwrap();
    }

    let mut chain_traces = Vec::with_capacity(chains);
    for result in results {
        chain_traces.push(result.expect("every chain slot filled")?);
    }
    TraceStore::assemble(names, chain_traces)
}
