//! Command-line surface for the panel analysis pipeline.
//!
//! Subcommands wrap the library end to end: `fit` (parse → encode → sample →
//! summarize), `select` (backward elimination), `sensitivity` (three-preset
//! prior comparison), `contrasts` (group means and pairwise differences),
//! `simulate` (generative panels), and `sbc` (calibration). All randomness
//! flows from `--seed`; two invocations with identical flags and inputs write
//! byte-identical reports. `-` denotes standard input/output for data
//! streams.
//!
//! Exit codes: 0 success, 2 validation/usage error, 3 sampler error.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use panelmc::analysis::{group_mean_posteriors, pairwise_contrasts, sensitivity_analysis, AnalysisError};
use panelmc::data::PanelDataset;
use panelmc::design::{encode_design, CovariateSpec};
use panelmc::diagnostics::summarize;
use panelmc::export;
use panelmc::mcmc::{run_chains, InitStrategy, SamplerConfig, SamplerError};
use panelmc::model::{default_prior, sensitivity_presets, ModelDefinition, Prior, PriorConfig};
use panelmc::selection::{backward_select, SelectionError};
use panelmc::synthetic::{desk_truth, sbc, trial_truth, Layout, SbcOptions, SynthError};

#[derive(Parser)]
#[command(
    name = "panelmc",
    about = "Bayesian random-intercept regression for longitudinal trial panels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model and write summary.json, trace_<c>.csv, manifest.json.
    Fit(FitArgs),
    /// Backward covariate elimination; writes steps.json.
    Select(SelectArgs),
    /// Prior-strength sensitivity comparison; writes stability.json.
    Sensitivity(SensitivityArgs),
    /// Group-mean posteriors and pairwise contrasts; writes contrasts.json.
    Contrasts(FitArgs),
    /// Simulate a panel in the CSV wire format.
    Simulate(SimulateArgs),
    /// Simulation-based calibration of the sampler; writes sbc.json.
    Sbc(SbcArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Panel CSV path, or `-` for standard input.
    #[arg(long)]
    data: String,
    /// Covariate spec: `full`, `final`, or `file:<path>`.
    #[arg(long, default_value = "full")]
    spec: String,
    /// Hierarchical prior hyperparameters as `key = value` lines.
    #[arg(long)]
    prior_file: Option<PathBuf>,
    /// Fixed-precision prior preset: VeryWeak, Weak, or Moderate.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Clone)]
struct SamplerArgs {
    /// Number of chains (run concurrently).
    #[arg(long, default_value_t = 4)]
    chains: usize,
    /// Retained post-burn-in draws per chain (minimum 100).
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    /// Discarded initial sweeps.
    #[arg(long, default_value_t = 2_000)]
    burn_in: usize,
    /// Keep-every stride.
    #[arg(long, default_value_t = 1)]
    thin: usize,
    /// Root seed; required so no run is silently nondeterministic.
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Output directory for reports.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SensitivityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Truth preset: `trial` (109-patient cohort) or `desk` (small).
    #[arg(long, default_value = "trial")]
    preset: String,
    #[arg(long)]
    seed: u64,
    /// Output path for the panel CSV, or `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SbcArgs {
    /// Calibration replications (minimum 20).
    #[arg(long, default_value_t = 100)]
    replications: usize,
    /// Chains per replication fit.
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Retained draws per replication fit.
    #[arg(long, default_value_t = 2_000)]
    iterations: usize,
    #[arg(long, default_value_t = 500)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long)]
    seed: u64,
    /// Truth-prior hyperparameters (desk-scale defaults otherwise).
    #[arg(long)]
    prior_file: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

enum CliError {
    Validation(String),
    Sampler(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Sampler(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Sampler(m) => m,
        }
    }
}

fn sampler_error(e: SamplerError) -> CliError {
    match e {
        SamplerError::InvalidConfig(m) => CliError::Validation(format!("config: {m}")),
        other => CliError::Sampler(other.to_string()),
    }
}

impl From<SelectionError> for CliError {
    fn from(e: SelectionError) -> Self {
        match e {
            SelectionError::Sampler(s) => sampler_error(s),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Sampler(s) => sampler_error(s),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match &e {
            SynthError::Sampler(_) => CliError::Sampler(e.to_string()),
            SynthError::Replication { source, .. } if matches!(**source, SynthError::Sampler(_)) => {
                CliError::Sampler(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

fn read_data(path: &str) -> Result<PanelDataset, CliError> {
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Validation(format!("reading standard input: {e}")))?;
        buf
    } else {
        fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("reading {path}: {e}")))?
    };
    PanelDataset::parse_csv(&text).map_err(|e| CliError::Validation(e.to_string()))
}

fn read_spec(spec: &str) -> Result<CovariateSpec, CliError> {
    match spec {
        "full" => Ok(CovariateSpec::full()),
        "final" => Ok(CovariateSpec::final_model()),
        other => {
            if let Some(path) = other.strip_prefix("file:") {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("reading {path}: {e}")))?;
                CovariateSpec::parse(&text).map_err(|e| CliError::Validation(e.to_string()))
            } else {
                Err(CliError::Validation(format!(
                    "unknown spec `{other}`: expected full, final, or file:<path>"
                )))
            }
        }
    }
}

fn read_prior(args: &DataArgs) -> Result<Prior, CliError> {
    match (&args.prior_file, &args.preset) {
        (Some(_), Some(_)) => Err(CliError::Validation(
            "--prior-file and --preset are mutually exclusive".into(),
        )),
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))?;
            let config = PriorConfig::parse_key_values(&text)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            Ok(Prior::Hierarchical(config))
        }
        (None, Some(name)) => {
            let preset = sensitivity_presets()
                .into_iter()
                .find(|p| p.name.eq_ignore_ascii_case(name))
                .ok_or_else(|| {
                    CliError::Validation(format!(
                        "unknown preset `{name}`: expected VeryWeak, Weak, or Moderate"
                    ))
                })?;
            Ok(Prior::FixedPrecision(preset))
        }
        (None, None) => Ok(Prior::Hierarchical(default_prior())),
    }
}

fn sampler_config(args: &SamplerArgs) -> Result<SamplerConfig, CliError> {
    let config = SamplerConfig {
        chains: args.chains,
        iterations: args.iterations,
        burn_in: args.burn_in,
        thin: args.thin,
        seed: args.seed,
        init: InitStrategy::DataDriven,
        keep_gamma: true,
    };
    config.validate().map_err(sampler_error)?;
    Ok(config)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Validation(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Validation(format!("writing {}: {e}", path.display())))
}

fn build_model(data: &PanelDataset, spec: &CovariateSpec, prior: Prior) -> Result<ModelDefinition, CliError> {
    let design = encode_design(data, spec).map_err(|e| CliError::Validation(e.to_string()))?;
    let response = data.records().iter().map(|r| r.score as f64).collect();
    ModelDefinition::new(design, prior, response).map_err(|e| CliError::Validation(e.to_string()))
}

fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let data = read_data(&args.data.data)?;
    let spec = read_spec(&args.data.spec)?;
    let prior = read_prior(&args.data)?;
    let config = sampler_config(&args.sampler)?;
    let model = build_model(&data, &spec, prior)?;
    let trace = run_chains(&model, &config).map_err(sampler_error)?;
    let summary = summarize(&trace).map_err(|e| CliError::Validation(e.to_string()))?;

    write_file(&args.out_dir, "summary.json", &export::summary_json(&summary))?;
    write_file(
        &args.out_dir,
        "manifest.json",
        &export::manifest_json(&config, trace.names(), &model.digest()),
    )?;
    for chain in 0..trace.chain_count() {
        write_file(
            &args.out_dir,
            &format!("trace_{}.csv", chain + 1),
            &export::trace_csv(&trace, chain),
        )?;
    }
    Ok(())
}

fn cmd_select(args: &SelectArgs) -> Result<(), CliError> {
    let data = read_data(&args.data.data)?;
    let spec = read_spec(&args.data.spec)?;
    let prior = read_prior(&args.data)?;
    let config = sampler_config(&args.sampler)?;
    let history = backward_select(&data, &spec, prior, &config)?;
    write_file(&args.out_dir, "steps.json", &export::selection_json(&history))
}

fn cmd_sensitivity(args: &SensitivityArgs) -> Result<(), CliError> {
    let data = read_data(&args.data.data)?;
    let spec = read_spec(&args.data.spec)?;
    let config = sampler_config(&args.sampler)?;
    let report = sensitivity_analysis(&data, &spec, &config)?;
    write_file(&args.out_dir, "stability.json", &export::sensitivity_json(&report))
}

fn cmd_contrasts(args: &FitArgs) -> Result<(), CliError> {
    let data = read_data(&args.data.data)?;
    let spec = read_spec(&args.data.spec)?;
    let prior = read_prior(&args.data)?;
    let config = sampler_config(&args.sampler)?;
    let model = build_model(&data, &spec, prior)?;
    let trace = run_chains(&model, &config).map_err(sampler_error)?;
    let groups = group_mean_posteriors(&trace, &data, &spec)?;
    let contrasts = pairwise_contrasts(&groups)?;
    write_file(
        &args.out_dir,
        "contrasts.json",
        &export::contrasts_json(&groups, &contrasts),
    )
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (truth, spec, layout) = match args.preset.as_str() {
        "trial" => trial_truth(),
        "desk" => desk_truth(),
        other => {
            return Err(CliError::Validation(format!(
                "unknown preset `{other}`: expected trial or desk"
            )))
        }
    };
    let sim = panelmc::synthetic::simulate_panel(&truth, &spec, &layout, args.seed)?;
    let csv = sim.panel.to_csv();
    if args.out == "-" {
        print!("{csv}");
        Ok(())
    } else {
        fs::write(&args.out, csv)
            .map_err(|e| CliError::Validation(format!("writing {}: {e}", args.out)))
    }
}

/// Desk-scale truth prior for calibration runs.
fn sbc_default_prior() -> PriorConfig {
    PriorConfig {
        mu_beta_mean: 0.0,
        mu_beta_precision: 0.01,
        sigma_gamma_upper: 30.0,
        sigma_score_upper: 30.0,
        tau_beta_shape: 3.0,
        tau_beta_rate: 12.0,
    }
}

fn cmd_sbc(args: &SbcArgs) -> Result<(), CliError> {
    let prior = match &args.prior_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))?;
            PriorConfig::parse_key_values(&text).map_err(|e| CliError::Validation(e.to_string()))?
        }
        None => sbc_default_prior(),
    };
    let (_, spec, layout) = desk_truth();
    let layout = Layout {
        dropout: 0.0,
        ..layout
    };
    let config = SamplerConfig {
        chains: args.chains,
        iterations: args.iterations,
        burn_in: args.burn_in,
        thin: args.thin,
        seed: args.seed,
        init: InitStrategy::PriorDraw,
        keep_gamma: false,
    };
    config.validate().map_err(sampler_error)?;
    let options = SbcOptions {
        replications: args.replications,
        ..SbcOptions::default()
    };
    let report = sbc(&prior, &spec, &layout, &config, &options)?;
    write_file(&args.out_dir, "sbc.json", &export::sbc_json(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Select(args) => cmd_select(args),
        Command::Sensitivity(args) => cmd_sensitivity(args),
        Command::Contrasts(args) => cmd_contrasts(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sbc(args) => cmd_sbc(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
