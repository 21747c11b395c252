//! Backward covariate elimination driven by credible-interval significance.
//!
//! Each step fits the current model, summarizes it, and collects the
//! covariates whose 95% interval includes zero. If none remain the loop
//! stops; otherwise exactly one covariate is removed — the one whose interval
//! is most centered on zero (smallest |median|/SD, ties broken by reverse
//! spec order) — and the model is refit. The intercept is never eligible, and
//! a main effect is never removed while an interaction naming it as a parent
//! is retained.
//!
//! Every refit derives its seed from the root seed and the step index, so a
//! selection run is reproducible bit for bit.

use serde::Serialize;
use thiserror::Error;

use crate::data::{DataError, PanelDataset};
use crate::design::{encode_design, CovariateSpec};
use crate::diagnostics::{kde_on_grid, silverman_bandwidth, summarize, DiagnosticsError, PosteriorSummary};
use crate::mcmc::{run_chains, SamplerConfig, SamplerError, TraceStore};
use crate::model::{ModelDefinition, ModelError, Prior};
use crate::rng::split_seed;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error("trace is missing parameter `{0}`")]
    MissingParameter(String),
}

/// One fit of the elimination loop.
#[derive(Debug, Clone)]
pub struct SelectionStep {
    /// Columns present in this step's model.
    pub columns: Vec<String>,
    /// Summaries of this step's fit (fixed effects and scale parameters).
    pub summary: PosteriorSummary,
    /// Covariate removed after examining this fit; `None` terminates the loop.
    pub removed: Option<String>,
    /// Overlap of this step's σ_score density with the previous step's.
    pub sigma_overlap: Option<f64>,
}

/// Full elimination history plus the final model artifacts.
pub struct SelectionHistory {
    pub steps: Vec<SelectionStep>,
    pub final_spec: CovariateSpec,
    pub final_model: ModelDefinition,
    pub final_trace: TraceStore,
}

/// Compact serializable record of a selection run.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SelectionStepRecord {
    pub columns: Vec<String>,
    pub removed: Option<String>,
    pub sigma_overlap: Option<f64>,
}

impl SelectionHistory {
    pub fn records(&self) -> Vec<SelectionStepRecord> {
        self.steps
            .iter()
            .map(|s| SelectionStepRecord {
                columns: s.columns.clone(),
                removed: s.removed.clone(),
                sigma_overlap: s.sigma_overlap,
            })
            .collect()
    }
}

fn fit_spec(
    data: &PanelDataset,
    spec: &CovariateSpec,
    prior: Prior,
    config: &SamplerConfig,
) -> Result<(ModelDefinition, TraceStore), SelectionError> {
    let design = encode_design(data, spec)?;
    let response = data.records().iter().map(|r| r.score as f64).collect();
    let model = ModelDefinition::new(design, prior, response)?;
    let trace = run_chains(&model, config)?;
    Ok((model, trace))
}

/// Names blocked from removal: the intercept and every parent of a retained
/// interaction.
fn blocked_names(spec: &CovariateSpec) -> Vec<String> {
    let mut blocked = vec!["intercept".to_string()];
    for name in spec.names() {
        if let Some((a, b)) = CovariateSpec::interaction_parents(&name) {
            blocked.push(a.to_string());
            blocked.push(b.to_string());
        }
    }
    blocked
}

/// Runs backward elimination from `full_spec`.
///
/// Step fits use `config` with per-step seeds derived from `(config.seed,
/// step index)`; chains inside a step still parallelize.
pub fn backward_select(
    data: &PanelDataset,
    full_spec: &CovariateSpec,
    prior: Prior,
    config: &SamplerConfig,
) -> Result<SelectionHistory, SelectionError> {
    let mut spec = full_spec.clone();
    let mut steps: Vec<SelectionStep> = Vec::new();
    let mut previous_sigma: Option<Vec<f64>> = None;

    loop {
        let step_index = steps.len();
        let mut step_config = *config;
        step_config.seed = split_seed(config.seed, step_index as u64);
        step_config.keep_gamma = false;

        let (model, trace) = fit_spec(data, &spec, prior, &step_config)?;
        let summary = summarize(&trace)?;
        let sigma_draws = trace
            .pooled("sigma_score")
            .ok_or_else(|| SelectionError::MissingParameter("sigma_score".into()))?;
        let sigma_overlap = match &previous_sigma {
            Some(prev) => Some(density_overlap(prev, &sigma_draws)?),
            None => None,
        };

        let blocked = blocked_names(&spec);
        let mut candidate: Option<(f64, usize, String)> = None;
        for (idx, name) in spec.names().iter().enumerate() {
            if blocked.contains(name) {
                continue;
            }
            let s = summary
                .get(name)
                .ok_or_else(|| SelectionError::MissingParameter(name.clone()))?;
            if s.significant {
                continue;
            }
            let ratio = s.median.abs() / s.sd.max(f64::MIN_POSITIVE);
            let better = match &candidate {
                None => true,
                // Reverse spec order breaks ties: a later column wins.
                Some((best, best_idx, _)) => ratio < *best || (ratio == *best && idx > *best_idx),
            };
            if better {
                candidate = Some((ratio, idx, name.clone()));
            }
        }

        match candidate {
            Some((_, _, name)) => {
                steps.push(SelectionStep {
                    columns: spec.names(),
                    summary,
                    removed: Some(name.clone()),
                    sigma_overlap,
                });
                spec = spec.without(&name);
            }
            None => {
                steps.push(SelectionStep {
                    columns: spec.names(),
                    summary,
                    removed: None,
                    sigma_overlap,
                });
                return Ok(SelectionHistory {
                    steps,
                    final_spec: spec,
                    final_model: model,
                    final_trace: trace,
                });
            }
        }
        previous_sigma = Some(sigma_draws);
    }
}

fn density_overlap(a: &[f64], b: &[f64]) -> Result<f64, DiagnosticsError> {
    let ha = silverman_bandwidth(a);
    let hb = silverman_bandwidth(b);
    let lo = a
        .iter()
        .chain(b.iter())
        .cloned()
        .fold(f64::INFINITY, f64::min)
        - 3.0 * ha.max(hb);
    let hi = a
        .iter()
        .chain(b.iter())
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        + 3.0 * ha.max(hb);
    let grid = 512;
    let curve_a = kde_on_grid(a, lo, hi, grid)?;
    let curve_b = kde_on_grid(b, lo, hi, grid)?;
    let min_curve: Vec<f64> = curve_a
        .density
        .iter()
        .zip(curve_b.density.iter())
        .map(|(x, y)| x.min(*y))
        .collect();
    let mut area = 0.0;
    for i in 1..grid {
        area += 0.5 * (min_curve[i] + min_curve[i - 1]) * (curve_a.grid[i] - curve_a.grid[i - 1]);
    }
    Ok(area.clamp(0.0, 1.0))
}

/// Which scale parameter a density comparison targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaName {
    Score,
    Gamma,
}

impl SigmaName {
    fn as_str(self) -> &'static str {
        match self {
            SigmaName::Score => "sigma_score",
            SigmaName::Gamma => "sigma_gamma",
        }
    }
}

/// Overlap coefficient ∫ min(f_full, f_reduced) of the posterior densities of
/// one scale parameter across two fits; values near 1 validate a removal.
pub fn compare_sigma_densities(
    full_trace: &TraceStore,
    reduced_trace: &TraceStore,
    which: SigmaName,
) -> Result<f64, SelectionError> {
    let name = which.as_str();
    let a = full_trace
        .pooled(name)
        .ok_or_else(|| SelectionError::MissingParameter(name.into()))?;
    let b = reduced_trace
        .pooled(name)
        .ok_or_else(|| SelectionError::MissingParameter(name.into()))?;
    Ok(density_overlap(&a, &b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcmc::{InitStrategy, TraceStore};
    use crate::rng::stream_rng;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn draws(seed: u64, n: usize, mean: f64, sd: f64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        (0..n)
            .map(|_| mean + sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    fn trace_of(name: &str, xs: Vec<f64>) -> TraceStore {
        TraceStore::from_draws(vec![name.into()], vec![vec![xs]]).unwrap()
    }

    #[test]
    fn overlap_of_identical_traces_is_one() {
        let xs = draws(1, 4000, 10.0, 2.0);
        let t = trace_of("sigma_score", xs);
        let overlap = compare_sigma_densities(&t, &t, SigmaName::Score).unwrap();
        assert!((overlap - 1.0).abs() <= 0.02, "overlap {overlap}");
    }

    #[test]
    fn overlap_of_separated_normals_is_tiny() {
        // N(0,1) vs N(5,1): analytic overlap 2*Phi(-2.5) = 0.0124.
        let a = trace_of("sigma_score", draws(2, 20000, 0.0, 1.0));
        let b = trace_of("sigma_score", draws(3, 20000, 5.0, 1.0));
        let overlap = compare_sigma_densities(&a, &b, SigmaName::Score).unwrap();
        assert!(overlap < 0.02, "overlap {overlap}");
    }

    #[test]
    fn missing_sigma_is_reported() {
        let t = trace_of("something_else", draws(4, 500, 0.0, 1.0));
        assert!(matches!(
            compare_sigma_densities(&t, &t, SigmaName::Gamma),
            Err(SelectionError::MissingParameter(_))
        ));
    }

    fn quick_config(seed: u64) -> SamplerConfig {
        SamplerConfig {
            chains: 2,
            iterations: 600,
            burn_in: 300,
            thin: 1,
            seed,
            init: InitStrategy::DataDriven,
            keep_gamma: false,
        }
    }

    #[test]
    fn strong_signal_panel_keeps_all_covariates() {
        // All true coefficients far from zero: selection should terminate at
        // step one with the full model.
        let truth = crate::model::ParameterPoint {
            beta: vec![40.0, -8.0, -1.5],
            gamma: Vec::new(),
            mu_beta: 0.0,
            sigma_gamma: 2.0,
            sigma_score: 3.0,
            tau_beta: 1.0,
        };
        let spec = CovariateSpec::from_names(&["intercept", "treatment", "week"]).unwrap();
        let layout = crate::synthetic::Layout {
            patients: 40,
            schedule: vec![0, 2, 8, 16],
            arm_counts: [14, 13, 13],
            sites: 5,
            dropout: 0.0,
        };
        let sim = crate::synthetic::simulate_panel(&truth, &spec, &layout, 404).unwrap();
        let history = backward_select(
            &sim.panel,
            &spec,
            Prior::Hierarchical(crate::model::default_prior()),
            &quick_config(11),
        )
        .unwrap();
        assert_eq!(history.steps.len(), 1);
        assert!(history.steps[0].removed.is_none());
        assert_eq!(history.final_spec.names(), spec.names());
    }

    #[test]
    fn noise_covariate_is_eliminated_first() {
        // One pure-noise covariate (age, true coefficient 0) among strong
        // signals: it should be the first removal in at least 90% of seeded
        // replications.
        let spec =
            CovariateSpec::from_names(&["intercept", "treatment", "week", "age"]).unwrap();
        let layout = crate::synthetic::Layout {
            patients: 36,
            schedule: vec![0, 2, 8, 16],
            arm_counts: [12, 12, 12],
            sites: 5,
            dropout: 0.0,
        };
        let truth = crate::model::ParameterPoint {
            beta: vec![40.0, -8.0, -1.5, 0.0],
            gamma: Vec::new(),
            mu_beta: 0.0,
            sigma_gamma: 2.0,
            sigma_score: 3.0,
            tau_beta: 1.0,
        };
        let mut first_removed_noise = 0;
        for rep in 0..20 {
            let sim =
                crate::synthetic::simulate_panel(&truth, &spec, &layout, 9000 + rep).unwrap();
            let history = backward_select(
                &sim.panel,
                &spec,
                Prior::Hierarchical(crate::model::default_prior()),
                &quick_config(500 + rep),
            )
            .unwrap();
            if history.steps[0].removed.as_deref() == Some("age") {
                first_removed_noise += 1;
            }
            // Invariants on every run: one removal per non-final step, K
            // strictly decreasing, halt within K-1 removals.
            let k0 = history.steps[0].columns.len();
            for (i, step) in history.steps.iter().enumerate() {
                assert_eq!(step.columns.len(), k0 - i);
                if i + 1 < history.steps.len() {
                    assert!(step.removed.is_some());
                }
            }
            assert!(history.steps.len() <= k0);
        }
        assert!(
            first_removed_noise >= 18,
            "noise covariate removed first in only {first_removed_noise}/20 runs"
        );
    }

    #[test]
    fn selection_is_reproducible_and_respects_hierarchy() {
        let spec = CovariateSpec::from_names(&[
            "intercept",
            "treatment",
            "week",
            "treatment:week",
        ])
        .unwrap();
        let layout = crate::synthetic::Layout {
            patients: 30,
            schedule: vec![0, 4, 12],
            arm_counts: [10, 10, 10],
            sites: 3,
            dropout: 0.0,
        };
        // treatment itself is null but the interaction is real: hierarchy must
        // keep `treatment` while `treatment:week` survives.
        let truth = crate::model::ParameterPoint {
            beta: vec![40.0, 0.0, -1.0, -0.8],
            gamma: Vec::new(),
            mu_beta: 0.0,
            sigma_gamma: 1.5,
            sigma_score: 2.5,
            tau_beta: 1.0,
        };
        let sim = crate::synthetic::simulate_panel(&truth, &spec, &layout, 77).unwrap();
        let prior = Prior::Hierarchical(crate::model::default_prior());
        let run1 = backward_select(&sim.panel, &spec, prior, &quick_config(33)).unwrap();
        let run2 = backward_select(&sim.panel, &spec, prior, &quick_config(33)).unwrap();
        assert_eq!(run1.records(), run2.records());

        for step in &run1.steps {
            if let Some(removed) = &step.removed {
                // A removed main effect must not parent any retained interaction.
                for col in &step.columns {
                    if let Some((a, b)) = CovariateSpec::interaction_parents(col) {
                        if col != removed {
                            assert_ne!(a, removed);
                            assert_ne!(b, removed);
                        }
                    }
                }
            }
        }
    }
}
