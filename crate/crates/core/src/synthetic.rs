//! Generative simulator and calibration harness.
//!
//! [`simulate_panel`] draws panels from the model itself: patient intercepts
//! γ_i ~ Normal(0, σ_γ²), residuals ε ~ Normal(0, σ_score²), scores rounded
//! to the integer outcome scale and clamped to [0, 87]. The unclamped latent
//! values are returned alongside the panel so calibration checks can stay
//! exact; recorded panels use the clamped integers.
//!
//! [`sbc`] is simulation-based calibration: truths drawn from the prior,
//! panels simulated, the sampler run, and the rank of each truth within its
//! thinned posterior recorded. Under a correct sampler ranks are uniform;
//! the report carries per-parameter rank histograms and a pooled chi-square
//! uniformity test. Scale-parameter truths are truncated to (0, 50) to keep
//! simulated scores in a realistic range, and the per-replication fit uses
//! the identically truncated prior so the rank statistics stay exact.

use serde::Serialize;
use statrs::distribution::ContinuousCDF;
use thiserror::Error;

use crate::data::{Arm, ObservationRecord, PanelDataset, Sex, VISIT_SCHEDULE};
use crate::design::{encode_design, CovariateSpec};
use crate::mcmc::{run_chains_masked, SamplerConfig, SamplerError, UpdateMask};
use crate::model::{ModelDefinition, ModelError, ParameterPoint, Prior, PriorConfig};
use crate::rng::{split_seed, stream_rng};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};

use crate::data::DataError;

/// Scale-truth ceiling used by the calibration harness.
pub const SBC_SIGMA_CAP: f64 = 50.0;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("replication {index}: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<SynthError>,
    },
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Cohort layout of a simulated trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub patients: usize,
    /// Visit weeks; must start at 0 and be drawn from the trial schedule.
    pub schedule: Vec<u32>,
    /// Patients per arm (Placebo, 5000U, 10000U); must sum to `patients`.
    pub arm_counts: [usize; 3],
    /// Number of clinical sites, 1–9.
    pub sites: u32,
    /// Independent per-visit dropout probability after week 0.
    pub dropout: f64,
}

impl Layout {
    fn validate(&self) -> Result<(), SynthError> {
        if self.patients < 2 {
            return Err(SynthError::InvalidLayout("need at least 2 patients".into()));
        }
        if self.arm_counts.iter().sum::<usize>() != self.patients {
            return Err(SynthError::InvalidLayout(format!(
                "arm counts {:?} do not sum to {}",
                self.arm_counts, self.patients
            )));
        }
        if self.schedule.is_empty() || self.schedule[0] != 0 {
            return Err(SynthError::InvalidLayout(
                "schedule must start at week 0".into(),
            ));
        }
        for pair in self.schedule.windows(2) {
            if pair[1] <= pair[0] {
                return Err(SynthError::InvalidLayout("schedule must increase".into()));
            }
        }
        if let Some(w) = self.schedule.iter().find(|w| !VISIT_SCHEDULE.contains(w)) {
            return Err(SynthError::InvalidLayout(format!(
                "week {w} is not a trial visit week"
            )));
        }
        if !(1..=9).contains(&self.sites) {
            return Err(SynthError::InvalidLayout("sites must be in 1..=9".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(SynthError::InvalidLayout("dropout must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// A simulated panel with its exact latent values.
#[derive(Debug, Clone)]
pub struct SimulatedPanel {
    pub panel: PanelDataset,
    /// Unclamped, unrounded responses aligned with `panel` rows.
    pub latent: Vec<f64>,
    /// True patient intercepts in panel patient-index order.
    pub gamma: Vec<f64>,
    /// Rows whose integer score hit the scale bounds.
    pub clamped_rows: usize,
}

/// Simulates a panel from the model at a fixed truth.
///
/// Covariates are assigned with deterministic seeded randomization: arms are
/// shuffled to match the allocation, sites are uniform over 1..=sites, sex is
/// male with probability 1/3, and ages are uniform over 30..=80. `truth.beta`
/// must align with `spec`.
pub fn simulate_panel(
    truth: &ParameterPoint,
    spec: &CovariateSpec,
    layout: &Layout,
    seed: u64,
) -> Result<SimulatedPanel, SynthError> {
    layout.validate()?;
    if truth.beta.len() != spec.len() {
        return Err(SynthError::InvalidLayout(format!(
            "truth has {} coefficients but spec names {} columns",
            truth.beta.len(),
            spec.len()
        )));
    }
    if !(truth.sigma_gamma > 0.0 && truth.sigma_score > 0.0) {
        return Err(SynthError::InvalidLayout(
            "truth scale parameters must be positive".into(),
        ));
    }

    let mut rng = stream_rng(seed, 0);
    let mut arms = Vec::with_capacity(layout.patients);
    for (arm, count) in Arm::ALL.iter().zip(layout.arm_counts.iter()) {
        arms.extend(std::iter::repeat_n(*arm, *count));
    }
    arms.shuffle(&mut rng);

    let width = (layout.patients as f64).log10().ceil().max(3.0) as usize;
    let mut records = Vec::new();
    let mut kept_rows: Vec<usize> = Vec::new(); // patient of each kept row
    let mut gamma = Vec::with_capacity(layout.patients);
    for (patient, arm) in arms.iter().enumerate() {
        let site = rng.random_range(1..=layout.sites);
        let sex = if rng.random::<f64>() < 1.0 / 3.0 {
            Sex::Male
        } else {
            Sex::Female
        };
        let age = rng.random_range(30..=80u32);
        gamma.push(truth.sigma_gamma * rng.sample::<f64, _>(StandardNormal));
        for &week in &layout.schedule {
            if week > 0 && rng.random::<f64>() < layout.dropout {
                continue;
            }
            records.push(ObservationRecord {
                patient_id: format!("p{:0width$}", patient + 1),
                week,
                site,
                arm: *arm,
                age,
                sex,
                score: 0,
            });
            kept_rows.push(patient);
        }
    }

    // Encode covariates on the placeholder panel, then fill in outcomes.
    let skeleton = PanelDataset::from_records(records.clone())?;
    let design = encode_design(&skeleton, spec)?;
    let mut latent = Vec::with_capacity(records.len());
    let mut clamped_rows = 0usize;
    for (row, record) in records.iter_mut().enumerate() {
        let mut eta = gamma[kept_rows[row]];
        for (col, b) in truth.beta.iter().enumerate() {
            eta += design.values[(row, col)] * b;
        }
        let value = eta + truth.sigma_score * rng.sample::<f64, _>(StandardNormal);
        latent.push(value);
        let rounded = value.round();
        let clamped = rounded.clamp(0.0, crate::data::SCORE_MAX as f64);
        if clamped != rounded {
            clamped_rows += 1;
        }
        record.score = clamped as u32;
    }

    // Patient indices in the panel follow first appearance, which matches the
    // generation order here.
    let panel = PanelDataset::from_records(records)?;
    Ok(SimulatedPanel {
        panel,
        latent,
        gamma,
        clamped_rows,
    })
}

/// Rank-statistic report of a calibration run.
#[derive(Debug, Clone, Serialize)]
pub struct SbcReport {
    pub parameters: Vec<String>,
    /// Per-parameter histogram of truth ranks over `bins` bins.
    pub rank_histograms: Vec<Vec<usize>>,
    pub replications: usize,
    pub bins: usize,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Deliberate sampler defects used as negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SbcMutation {
    None,
    /// Never update σ_score after initialization.
    FreezeSigmaScore,
}

/// Calibration options.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SbcOptions {
    /// Replications, at least 20.
    pub replications: usize,
    /// Rank histogram bins; must divide `posterior_draws + 1`.
    pub bins: usize,
    /// Posterior draws kept (by even thinning) for ranking.
    pub posterior_draws: usize,
    pub mutation: SbcMutation,
}

impl Default for SbcOptions {
    fn default() -> Self {
        SbcOptions {
            replications: 100,
            bins: 20,
            posterior_draws: 99,
            mutation: SbcMutation::None,
        }
    }
}

fn draw_truth<R: Rng>(prior: &PriorConfig, k: usize, rng: &mut R) -> ParameterPoint {
    let mu_sd = (1.0 / prior.mu_beta_precision).sqrt();
    let mu_beta = prior.mu_beta_mean + mu_sd * rng.sample::<f64, _>(StandardNormal);
    let gamma_dist =
        GammaDist::new(prior.tau_beta_shape, 1.0 / prior.tau_beta_rate).expect("valid prior");
    // Conditioning sigma_beta below the cap; at desk scale the rejected mass
    // is negligible, so generation and fit stay matched.
    let tau_beta = loop {
        let t: f64 = gamma_dist.sample(rng);
        if t > 1.0 / (SBC_SIGMA_CAP * SBC_SIGMA_CAP) {
            break t;
        }
    };
    let sigma_beta = (1.0 / tau_beta).sqrt();
    let beta = (0..k)
        .map(|_| mu_beta + sigma_beta * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let sigma_gamma = rng.random::<f64>() * prior.sigma_gamma_upper.min(SBC_SIGMA_CAP);
    let sigma_score = rng.random::<f64>() * prior.sigma_score_upper.min(SBC_SIGMA_CAP);
    ParameterPoint {
        beta,
        gamma: Vec::new(),
        mu_beta,
        sigma_gamma: sigma_gamma.max(1e-6),
        sigma_score: sigma_score.max(1e-6),
        tau_beta,
    }
}

fn ranked_parameters(spec: &CovariateSpec) -> Vec<String> {
    let mut names = spec.names();
    names.push("mu_beta".into());
    names.push("sigma_gamma".into());
    names.push("sigma_score".into());
    names.push("tau_beta".into());
    names
}

fn truth_value(truth: &ParameterPoint, spec: &CovariateSpec, name: &str) -> f64 {
    if let Some(idx) = spec.names().iter().position(|n| n == name) {
        return truth.beta[idx];
    }
    match name {
        "mu_beta" => truth.mu_beta,
        "sigma_gamma" => truth.sigma_gamma,
        "sigma_score" => truth.sigma_score,
        "tau_beta" => truth.tau_beta,
        other => unreachable!("unranked parameter {other}"),
    }
}

struct ReplicationRanks {
    ranks: Vec<usize>,
}

fn run_replication(
    index: usize,
    truth_prior: &PriorConfig,
    fit_prior: &PriorConfig,
    spec: &CovariateSpec,
    layout: &Layout,
    sampler: &SamplerConfig,
    options: &SbcOptions,
) -> Result<ReplicationRanks, SynthError> {
    let wrap = |source: SynthError| SynthError::Replication {
        index,
        source: Box::new(source),
    };

    let mut rng = stream_rng(sampler.seed, 1_000_000 + index as u64);
    let truth = draw_truth(truth_prior, spec.len(), &mut rng);
    let sim = simulate_panel(&truth, spec, layout, split_seed(sampler.seed, index as u64))
        .map_err(wrap)?;

    // Fit on the exact latent responses.
    let design = encode_design(&sim.panel, spec).map_err(|e| wrap(e.into()))?;
    let model = ModelDefinition::new(design, Prior::Hierarchical(*fit_prior), sim.latent.clone())
        .map_err(|e| wrap(e.into()))?;
    let mut config = *sampler;
    config.seed = split_seed(sampler.seed, 2_000_000 + index as u64);
    config.keep_gamma = false;
    let mask = match options.mutation {
        SbcMutation::None => UpdateMask::default(),
        SbcMutation::FreezeSigmaScore => UpdateMask {
            sigma_score: false,
            ..UpdateMask::default()
        },
    };
    let trace = run_chains_masked(&model, &config, mask).map_err(|e| wrap(e.into()))?;

    let names = ranked_parameters(spec);
    let mut ranks = Vec::with_capacity(names.len());
    for name in &names {
        let pooled = trace.pooled(name).expect("ranked parameters are traced");
        // Even thinning to weakly dependent draws.
        let stride = (pooled.len() / options.posterior_draws).max(1);
        let kept: Vec<f64> = pooled
            .iter()
            .copied()
            .step_by(stride)
            .take(options.posterior_draws)
            .collect();
        let t = truth_value(&truth, spec, name);
        ranks.push(kept.iter().filter(|&&d| d < t).count());
    }
    Ok(ReplicationRanks { ranks })
}

/// Runs simulation-based calibration.
///
/// Per replication, a truth is drawn from the (scale-truncated) prior, a
/// panel is simulated, the sampler fit, and the rank of each truth among its
/// thinned posterior draws recorded. Returns per-parameter rank histograms
/// and a pooled chi-square uniformity p-value.
pub fn sbc(
    truth_prior: &PriorConfig,
    spec: &CovariateSpec,
    layout: &Layout,
    sampler: &SamplerConfig,
    options: &SbcOptions,
) -> Result<SbcReport, SynthError> {
    if options.replications < 20 {
        return Err(SynthError::InvalidLayout(format!(
            "need at least 20 replications, got {}",
            options.replications
        )));
    }
    if (options.posterior_draws + 1) % options.bins != 0 {
        return Err(SynthError::InvalidLayout(format!(
            "bins {} must divide posterior_draws + 1 = {}",
            options.bins,
            options.posterior_draws + 1
        )));
    }
    layout.validate()?;
    truth_prior.validate()?;

    // The fit prior is the truth prior with scale supports truncated the same
    // way the truth draws are.
    let fit_prior = PriorConfig {
        sigma_gamma_upper: truth_prior.sigma_gamma_upper.min(SBC_SIGMA_CAP),
        sigma_score_upper: truth_prior.sigma_score_upper.min(SBC_SIGMA_CAP),
        ..*truth_prior
    };

    let names = ranked_parameters(spec);
    let reps = options.replications;
    let workers = std::thread::available_parallelism()
        .map(std::num::NonZeroUsize::get)
        .unwrap_or(1)
        .min(reps);

    let mut results: Vec<Option<Result<ReplicationRanks, SynthError>>> =
        (0..reps).map(|_| None).collect();
    if workers <= 1 {
        for (index, slot) in results.iter_mut().enumerate() {
            *slot = Some(run_replication(
                index,
                truth_prior,
                &fit_prior,
                spec,
                layout,
                sampler,
                options,
            ));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let outputs = std::sync::Mutex::new((0..reps).map(|_| None).collect::<Vec<_>>());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if index >= reps {
                        break;
                    }
                    let out = run_replication(
                        index,
                        truth_prior,
                        &fit_prior,
                        spec,
                        layout,
                        sampler,
                        options,
                    );
                    outputs.lock().unwrap()[index] = Some(out);
                });
            }
        });
        results = outputs.into_inner().unwrap();
    }

    let mut histograms = vec![vec![0usize; options.bins]; names.len()];
    for result in results {
        let reps_ranks = result.expect("slot filled")?;
        for (param, rank) in reps_ranks.ranks.iter().enumerate() {
            let bin = rank * options.bins / (options.posterior_draws + 1);
            histograms[param][bin.min(options.bins - 1)] += 1;
        }
    }

    let expected = reps as f64 / options.bins as f64;
    let mut chi_square = 0.0;
    for hist in &histograms {
        for &count in hist {
            chi_square += (count as f64 - expected).powi(2) / expected;
        }
    }
    let dof = names.len() * (options.bins - 1);
    let p_value = 1.0
        - statrs::distribution::ChiSquared::new(dof as f64)
            .expect("positive dof")
            .cdf(chi_square);

    Ok(SbcReport {
        parameters: names,
        rank_histograms: histograms,
        replications: reps,
        bins: options.bins,
        chi_square,
        degrees_of_freedom: dof,
        p_value,
    })
}

/// Truth preset at published-analysis magnitudes with the trial's cohort
/// layout (109 patients in arms 36/36/37 over nine sites, six visits).
pub fn trial_truth() -> (ParameterPoint, CovariateSpec, Layout) {
    let spec = CovariateSpec::final_model();
    let truth = ParameterPoint {
        // intercept, treatment, week, week_sq, sex, site
        beta: vec![71.2967, -2.3940, -1.3611, 0.0595, -14.0381, -2.6204],
        gamma: Vec::new(),
        mu_beta: 0.0,
        sigma_gamma: 2.5556,
        sigma_score: 12.0214,
        tau_beta: 1.0,
    };
    let layout = Layout {
        patients: 109,
        schedule: VISIT_SCHEDULE.to_vec(),
        arm_counts: [36, 36, 37],
        sites: 9,
        dropout: 0.0422,
    };
    (truth, spec, layout)
}

/// Small truth preset for quick desk runs.
pub fn desk_truth() -> (ParameterPoint, CovariateSpec, Layout) {
    let spec = CovariateSpec::from_names(&["intercept", "treatment", "week"]).unwrap();
    let truth = ParameterPoint {
        beta: vec![40.0, -4.0, -1.0],
        gamma: Vec::new(),
        mu_beta: 0.0,
        sigma_gamma: 3.0,
        sigma_score: 8.0,
        tau_beta: 1.0,
    };
    let layout = Layout {
        patients: 40,
        schedule: vec![0, 2, 8, 16],
        arm_counts: [14, 13, 13],
        sites: 5,
        dropout: 0.0,
    };
    (truth, spec, layout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intercept_only_truth(value: f64, sigma_gamma: f64, sigma_score: f64) -> ParameterPoint {
        ParameterPoint {
            beta: vec![value],
            gamma: Vec::new(),
            mu_beta: 0.0,
            sigma_gamma,
            sigma_score,
            tau_beta: 1.0,
        }
    }

    #[test]
    fn noiseless_simulation_is_constant() {
        let spec = CovariateSpec::from_names(&["intercept"]).unwrap();
        let layout = Layout {
            patients: 10,
            schedule: vec![0, 2, 4],
            arm_counts: [4, 3, 3],
            sites: 3,
            dropout: 0.0,
        };
        let truth = intercept_only_truth(40.0, 1e-9, 1e-9);
        let sim = simulate_panel(&truth, &spec, &layout, 5).unwrap();
        assert!(sim.panel.records().iter().all(|r| r.score == 40));
        assert_eq!(sim.clamped_rows, 0);
    }

    #[test]
    fn full_layout_row_counts() {
        let spec = CovariateSpec::from_names(&["intercept"]).unwrap();
        let mut layout = Layout {
            patients: 109,
            schedule: VISIT_SCHEDULE.to_vec(),
            arm_counts: [36, 36, 37],
            sites: 9,
            dropout: 0.0,
        };
        let truth = intercept_only_truth(40.0, 2.0, 10.0);
        let sim = simulate_panel(&truth, &spec, &layout, 1).unwrap();
        assert_eq!(sim.panel.len(), 654);
        assert_eq!(sim.panel.patient_count(), 109);
        let counts = sim.panel.arm_patient_counts();
        assert_eq!(counts[&Arm::Placebo], 36);
        assert_eq!(counts[&Arm::U5000], 36);
        assert_eq!(counts[&Arm::U10000], 37);

        // With per-visit dropout of 0.035 after week 0 the expected row count
        // is 654 - 545 * 0.035 = 634.9; a single draw lands within Monte
        // Carlo range of it.
        layout.dropout = 0.035;
        let mut total = 0usize;
        let runs = 40;
        for seed in 0..runs {
            let sim = simulate_panel(&truth, &spec, &layout, 100 + seed).unwrap();
            assert!(sim.panel.records().iter().filter(|r| r.week == 0).count() == 109);
            total += sim.panel.len();
        }
        let mean_rows = total as f64 / runs as f64;
        // SE of the mean over 40 runs is about 0.7; allow 3 SE.
        assert!(
            (mean_rows - 634.9).abs() < 2.1,
            "mean simulated rows {mean_rows}"
        );
    }

    #[test]
    fn simulation_is_deterministic_and_round_trips_csv() {
        let (truth, spec, layout) = desk_truth();
        let a = simulate_panel(&truth, &spec, &layout, 9).unwrap();
        let b = simulate_panel(&truth, &spec, &layout, 9).unwrap();
        assert_eq!(a.panel, b.panel);
        assert_eq!(a.latent, b.latent);

        let parsed = PanelDataset::parse_csv(&a.panel.to_csv()).unwrap();
        assert_eq!(parsed, a.panel);
    }

    #[test]
    fn empirical_covariance_matches_model() {
        // Large-P check of the marginal covariance structure on the latent
        // values: same-patient cross-visit covariance is sigma_gamma^2, and
        // cross-patient covariance is 0.
        let spec = CovariateSpec::from_names(&["intercept"]).unwrap();
        let layout = Layout {
            patients: 10_000,
            schedule: vec![0, 2],
            arm_counts: [3334, 3333, 3333],
            sites: 9,
            dropout: 0.0,
        };
        let truth = intercept_only_truth(40.0, 5.0, 3.0);
        let sim = simulate_panel(&truth, &spec, &layout, 31).unwrap();

        // Latent residuals u = latent - x'beta = gamma + eps; with an
        // intercept-only design x'beta is constant.
        let u: Vec<f64> = sim.latent.iter().map(|v| v - 40.0).collect();
        let n = layout.patients;
        let first = |i: usize| u[2 * i];
        let second = |i: usize| u[2 * i + 1];

        let mean_a = (0..n).map(first).sum::<f64>() / n as f64;
        let mean_b = (0..n).map(second).sum::<f64>() / n as f64;
        let cov_within = (0..n)
            .map(|i| (first(i) - mean_a) * (second(i) - mean_b))
            .sum::<f64>()
            / (n - 1) as f64;
        assert!(
            (cov_within - 25.0).abs() / 25.0 < 0.05,
            "within-patient covariance {cov_within}"
        );

        // Adjacent patients' week-0 values.
        let pairs = n / 2;
        let xs: Vec<f64> = (0..pairs).map(|i| first(2 * i)).collect();
        let ys: Vec<f64> = (0..pairs).map(|i| first(2 * i + 1)).collect();
        let mx = xs.iter().sum::<f64>() / pairs as f64;
        let my = ys.iter().sum::<f64>() / pairs as f64;
        let cov_across = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / (pairs - 1) as f64;
        // SE of a covariance of independent pairs: sqrt(var_x var_y / n).
        let var = 34.0;
        let se = (var * var / pairs as f64).sqrt();
        assert!(cov_across.abs() < 3.0 * se, "cross-patient covariance {cov_across}");
    }

    #[test]
    fn clamping_is_counted_and_rare_at_trial_magnitudes() {
        let (truth, spec, layout) = trial_truth();
        let sim = simulate_panel(&truth, &spec, &layout, 3).unwrap();
        let frac = sim.clamped_rows as f64 / sim.panel.len() as f64;
        assert!(frac < 0.01, "clamped fraction {frac}");
    }

    #[test]
    fn invalid_layouts_are_rejected() {
        let spec = CovariateSpec::from_names(&["intercept"]).unwrap();
        let truth = intercept_only_truth(40.0, 1.0, 1.0);
        let bad_arms = Layout {
            patients: 10,
            schedule: vec![0, 2],
            arm_counts: [5, 3, 3],
            sites: 3,
            dropout: 0.0,
        };
        assert!(simulate_panel(&truth, &spec, &bad_arms, 1).is_err());

        let bad_week = Layout {
            patients: 10,
            schedule: vec![0, 3],
            arm_counts: [4, 3, 3],
            sites: 3,
            dropout: 0.0,
        };
        assert!(simulate_panel(&truth, &spec, &bad_week, 1).is_err());
    }

    #[test]
    fn sbc_enforces_minimum_replications() {
        let (truth, spec, layout) = desk_truth();
        let _ = truth;
        let prior = crate::model::default_prior();
        let sampler = SamplerConfig::with_seed(1);
        let options = SbcOptions {
            replications: 19,
            ..SbcOptions::default()
        };
        let err = sbc(&prior, &spec, &layout, &sampler, &options).unwrap_err();
        assert!(err.to_string().contains("at least 20"));
    }
}
