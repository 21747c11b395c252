//! Downstream posterior analyses: prior sensitivity, group-mean posteriors,
//! and pairwise treatment contrasts.
//!
//! Group means marginalize over each arm's observed covariate rows: for each
//! retained draw the model-implied mean of arm `a` is the average of
//! x'β + γ_patient over the arm's rows, so the posterior reflects the arm as
//! enrolled rather than a reference patient. Contrasts pair draws by
//! iteration index within each chain, preserving the joint posterior.

use serde::Serialize;
use thiserror::Error;

use crate::data::{Arm, DataError, PanelDataset};
use crate::design::{encode_design, CovariateSpec};
use crate::diagnostics::{summarize, DiagnosticsError, PosteriorSummary};
use crate::mcmc::{run_chains, SamplerConfig, SamplerError, TraceStore};
use crate::model::{sensitivity_presets, ModelDefinition, ModelError, Prior};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("trace/spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("need at least 2 groups, got {0}")]
    NeedTwoGroups(usize),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

/// Stability of one parameter's posterior median across the three presets.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityEntry {
    pub parameter: String,
    /// Medians under VeryWeak, Weak, Moderate.
    pub medians: [f64; 3],
    /// max |m_a − m_b| / max(|m_a|, |m_b|, 1e-6) over preset pairs.
    pub max_relative_change: f64,
    pub exceeds_5_percent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub presets: [String; 3],
    pub entries: Vec<SensitivityEntry>,
}

impl SensitivityReport {
    pub fn get(&self, parameter: &str) -> Option<&SensitivityEntry> {
        self.entries.iter().find(|e| e.parameter == parameter)
    }
}

const RELATIVE_CHANGE_EPS: f64 = 1e-6;

fn max_relative_change(medians: &[f64; 3]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            let denom = medians[i].abs().max(medians[j].abs()).max(RELATIVE_CHANGE_EPS);
            worst = worst.max((medians[i] - medians[j]).abs() / denom);
        }
    }
    worst
}

/// Fits the model under the three fixed-precision presets (same data, same
/// seed) and reports per-parameter median stability.
pub fn sensitivity_analysis(
    data: &PanelDataset,
    spec: &CovariateSpec,
    config: &SamplerConfig,
) -> Result<SensitivityReport, AnalysisError> {
    let presets = sensitivity_presets();
    let design = encode_design(data, spec)?;
    let response: Vec<f64> = data.records().iter().map(|r| r.score as f64).collect();

    let mut summaries: Vec<PosteriorSummary> = Vec::with_capacity(3);
    for preset in presets {
        let model = ModelDefinition::new(
            design.clone(),
            Prior::FixedPrecision(preset),
            response.clone(),
        )?;
        let mut preset_config = *config;
        preset_config.keep_gamma = false;
        let trace = run_chains(&model, &preset_config)?;
        summaries.push(summarize(&trace)?);
    }

    // Report the fixed-effect coefficients plus mu_beta; scale parameters are
    // pinned by the presets themselves.
    let mut names = spec.names();
    names.push("mu_beta".into());
    let entries = names
        .into_iter()
        .map(|name| {
            let medians = [
                summaries[0].get(&name).expect("traced parameter").median,
                summaries[1].get(&name).expect("traced parameter").median,
                summaries[2].get(&name).expect("traced parameter").median,
            ];
            let change = max_relative_change(&medians);
            SensitivityEntry {
                parameter: name,
                medians,
                max_relative_change: change,
                exceeds_5_percent: change > 0.05,
            }
        })
        .collect();

    Ok(SensitivityReport {
        presets: [
            presets[0].name.to_string(),
            presets[1].name.to_string(),
            presets[2].name.to_string(),
        ],
        entries,
    })
}

/// Posterior draws and summaries of per-arm model-implied mean outcomes.
pub struct GroupMeanPosteriors {
    pub arms: Vec<Arm>,
    /// Derived trace; one parameter per arm, named by the arm token.
    pub trace: TraceStore,
    pub summary: PosteriorSummary,
}

/// Computes per-arm posterior mean outcomes from a fitted trace.
///
/// The trace must contain every design column of `spec` plus the per-patient
/// intercepts (`keep_gamma = true` when fitting), and must align with the
/// dataset that produced it.
pub fn group_mean_posteriors(
    trace: &TraceStore,
    data: &PanelDataset,
    spec: &CovariateSpec,
) -> Result<GroupMeanPosteriors, AnalysisError> {
    let design = encode_design(data, spec)?;
    let k = design.ncols();
    let p = design.patients;

    let beta_indices: Vec<usize> = design
        .columns
        .iter()
        .map(|name| {
            trace
                .param_index(name)
                .ok_or_else(|| AnalysisError::SpecMismatch(format!("missing coefficient `{name}`")))
        })
        .collect::<Result<_, _>>()?;
    let gamma_indices: Vec<usize> = (1..=p)
        .map(|i| {
            trace.param_index(&format!("gamma_{i}")).ok_or_else(|| {
                AnalysisError::SpecMismatch(format!(
                    "missing gamma_{i}: fit with keep_gamma enabled"
                ))
            })
        })
        .collect::<Result<_, _>>()?;

    let arms = data.arms_present();
    // Per arm: column sums of the design over the arm's rows, patient row
    // counts, and the row count.
    let mut arm_stats = Vec::with_capacity(arms.len());
    for arm in &arms {
        let rows = data.arm_rows(*arm);
        let mut col_sums = vec![0.0; k];
        let mut patient_rows = vec![0.0; p];
        for &row in &rows {
            for (col, sum) in col_sums.iter_mut().enumerate() {
                *sum += design.values[(row, col)];
            }
            patient_rows[design.patient_of_row[row]] += 1.0;
        }
        arm_stats.push((col_sums, patient_rows, rows.len() as f64));
    }

    let retained = trace.retained_per_chain();
    let mut per_chain_draws: Vec<Vec<Vec<f64>>> = Vec::with_capacity(trace.chain_count());
    for chain in trace.chains() {
        let mut arm_series: Vec<Vec<f64>> = vec![Vec::with_capacity(retained); arms.len()];
        for iter in 0..retained {
            for (arm_idx, (col_sums, patient_rows, n_rows)) in arm_stats.iter().enumerate() {
                let mut total = 0.0;
                for (col, idx) in beta_indices.iter().enumerate() {
                    total += col_sums[col] * chain.param(*idx)[iter];
                }
                for (pat, weight) in patient_rows.iter().enumerate() {
                    if *weight > 0.0 {
                        total += weight * chain.param(gamma_indices[pat])[iter];
                    }
                }
                arm_series[arm_idx].push(total / n_rows);
            }
        }
        per_chain_draws.push(arm_series);
    }

    let names = arms.iter().map(|a| a.token().to_string()).collect();
    let derived = TraceStore::from_draws(names, per_chain_draws)
        .map_err(AnalysisError::Sampler)?;
    let summary = summarize(&derived)?;
    Ok(GroupMeanPosteriors {
        arms,
        trace: derived,
        summary,
    })
}

/// One pairwise arm-mean contrast (`first` − `second`).
#[derive(Debug, Clone, Serialize)]
pub struct Contrast {
    pub first: String,
    pub second: String,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    /// P(first < second) over paired draws.
    pub prob_first_less: f64,
    /// P(second < first) over the same pairs.
    pub prob_second_less: f64,
    pub prob_ties: f64,
    pub contains_zero: bool,
}

/// Contrast of two named groups from their paired posterior draws.
pub fn contrast_between(
    groups: &GroupMeanPosteriors,
    first: Arm,
    second: Arm,
) -> Result<Contrast, AnalysisError> {
    let a = groups
        .trace
        .pooled(first.token())
        .ok_or_else(|| AnalysisError::SpecMismatch(format!("group {first} absent")))?;
    let b = groups
        .trace
        .pooled(second.token())
        .ok_or_else(|| AnalysisError::SpecMismatch(format!("group {second} absent")))?;
    let diffs: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();

    let mut sorted = diffs.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite draws"));
    let median = crate::diagnostics::quantile_sorted(&sorted, 0.5);
    let lower = crate::diagnostics::quantile_sorted(&sorted, 0.025);
    let upper = crate::diagnostics::quantile_sorted(&sorted, 0.975);
    let n = diffs.len() as f64;
    let less = diffs.iter().filter(|d| **d < 0.0).count() as f64 / n;
    let greater = diffs.iter().filter(|d| **d > 0.0).count() as f64 / n;

    Ok(Contrast {
        first: first.token().to_string(),
        second: second.token().to_string(),
        median,
        lower,
        upper,
        prob_first_less: less,
        prob_second_less: greater,
        prob_ties: 1.0 - less - greater,
        contains_zero: !(lower > 0.0 || upper < 0.0),
    })
}

/// All higher-dose minus lower-dose contrasts in canonical arm order.
pub fn pairwise_contrasts(groups: &GroupMeanPosteriors) -> Result<Vec<Contrast>, AnalysisError> {
    if groups.arms.len() < 2 {
        return Err(AnalysisError::NeedTwoGroups(groups.arms.len()));
    }
    let mut out = Vec::new();
    for j in 0..groups.arms.len() {
        for i in j + 1..groups.arms.len() {
            out.push(contrast_between(groups, groups.arms[i], groups.arms[j])?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{PanelDataset, CSV_HEADER};
    use crate::mcmc::TraceStore;

    fn two_arm_panel() -> PanelDataset {
        let csv = format!(
            "{CSV_HEADER}\n\
             p1,0,1,Placebo,50,F,30\np1,2,1,Placebo,50,F,28\n\
             p2,0,2,5000U,60,M,40\np2,2,2,5000U,60,M,36\n"
        );
        PanelDataset::parse_csv(&csv).unwrap()
    }

    /// Trace with constant intercept draws and zero elsewhere.
    fn intercept_only_trace(c: f64, patients: usize, draws: usize) -> TraceStore {
        let mut names = vec![
            "intercept".to_string(),
            "mu_beta".to_string(),
            "sigma_gamma".to_string(),
            "sigma_score".to_string(),
            "tau_beta".to_string(),
        ];
        for i in 1..=patients {
            names.push(format!("gamma_{i}"));
        }
        let mut series = vec![vec![c; draws]];
        series.push(vec![0.0; draws]); // mu_beta
        series.push(vec![1.0; draws]);
        series.push(vec![1.0; draws]);
        series.push(vec![1.0; draws]);
        for _ in 0..patients {
            series.push(vec![0.0; draws]);
        }
        TraceStore::from_draws(names, vec![series]).unwrap()
    }

    #[test]
    fn intercept_only_group_means_equal_intercept() {
        let data = two_arm_panel();
        let spec = CovariateSpec::from_names(&["intercept"]).unwrap();
        let trace = intercept_only_trace(7.5, 2, 200);
        let groups = group_mean_posteriors(&trace, &data, &spec).unwrap();
        assert_eq!(groups.arms, vec![Arm::Placebo, Arm::U5000]);
        for arm in &groups.arms {
            let s = groups.summary.get(arm.token()).unwrap();
            assert_eq!(s.median, 7.5);
            assert_eq!(s.sd, 0.0);
        }
    }

    #[test]
    fn single_arm_dataset_yields_one_group() {
        let csv = format!(
            "{CSV_HEADER}\np1,0,1,Placebo,50,F,30\np2,0,2,Placebo,60,M,40\n"
        );
        let data = PanelDataset::parse_csv(&csv).unwrap();
        let spec = CovariateSpec::from_names(&["intercept"]).unwrap();
        let trace = intercept_only_trace(3.0, 2, 150);
        let groups = group_mean_posteriors(&trace, &data, &spec).unwrap();
        assert_eq!(groups.arms.len(), 1);
        assert!(matches!(
            pairwise_contrasts(&groups),
            Err(AnalysisError::NeedTwoGroups(1))
        ));
    }

    #[test]
    fn missing_gamma_is_a_spec_mismatch() {
        let data = two_arm_panel();
        let spec = CovariateSpec::from_names(&["intercept"]).unwrap();
        let names = vec![
            "intercept".to_string(),
            "mu_beta".to_string(),
            "sigma_gamma".to_string(),
            "sigma_score".to_string(),
            "tau_beta".to_string(),
        ];
        let series = vec![vec![1.0; 150]; 5];
        let trace = TraceStore::from_draws(names, vec![series]).unwrap();
        assert!(matches!(
            group_mean_posteriors(&trace, &data, &spec),
            Err(AnalysisError::SpecMismatch(_))
        ));
    }

    fn groups_from_draws(a: Vec<f64>, b: Vec<f64>) -> GroupMeanPosteriors {
        let trace = TraceStore::from_draws(
            vec!["Placebo".into(), "5000U".into()],
            vec![vec![a, b]],
        )
        .unwrap();
        GroupMeanPosteriors {
            arms: vec![Arm::Placebo, Arm::U5000],
            summary: summarize(&trace).unwrap(),
            trace,
        }
    }

    #[test]
    fn identical_groups_contrast_to_zero() {
        let xs: Vec<f64> = (0..400).map(|i| (i % 37) as f64).collect();
        let groups = groups_from_draws(xs.clone(), xs);
        let c = contrast_between(&groups, Arm::U5000, Arm::Placebo).unwrap();
        assert_eq!(c.median, 0.0);
        assert_eq!((c.lower, c.upper), (0.0, 0.0));
        assert!(c.contains_zero);
        assert_eq!(c.prob_ties, 1.0);
    }

    #[test]
    fn constant_shift_contrast_has_zero_width() {
        let xs: Vec<f64> = (0..400).map(|i| (i % 23) as f64).collect();
        let shifted: Vec<f64> = xs.iter().map(|x| x + 2.5).collect();
        let groups = groups_from_draws(xs, shifted);
        let c = contrast_between(&groups, Arm::U5000, Arm::Placebo).unwrap();
        assert_eq!(c.median, 2.5);
        assert_eq!((c.lower, c.upper), (2.5, 2.5));
        assert!(!c.contains_zero);
    }

    #[test]
    fn contrasts_are_antisymmetric_and_probabilities_sum_to_one() {
        let a: Vec<f64> = (0..500).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
        let b: Vec<f64> = (0..500).map(|i| (i as f64 * 0.3).cos() * 2.0 + 0.5).collect();
        let groups = groups_from_draws(a, b);
        let ab = contrast_between(&groups, Arm::Placebo, Arm::U5000).unwrap();
        let ba = contrast_between(&groups, Arm::U5000, Arm::Placebo).unwrap();
        assert!((ab.median + ba.median).abs() < 1e-12);
        assert!((ab.lower + ba.upper).abs() < 1e-12);
        assert!((ab.upper + ba.lower).abs() < 1e-12);
        assert_eq!(ab.prob_first_less, ba.prob_second_less);
        let total = ab.prob_first_less + ab.prob_second_less + ab.prob_ties;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relative_change_is_symmetric_in_preset_order() {
        let m1 = [1.0, 1.02, 0.99];
        let mut m2 = m1;
        m2.reverse();
        assert_eq!(super::max_relative_change(&m1), super::max_relative_change(&m2));
    }
}
