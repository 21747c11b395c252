//! Deterministic report serialization.
//!
//! Every JSON report carries a `"schema": 1` field and serializes floats with
//! fixed 17-significant-digit scientific notation, so identical runs produce
//! byte-identical files. Trace CSVs use the same float formatting.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::analysis::{Contrast, SensitivityReport};
use crate::diagnostics::{DensityCurve, PosteriorSummary};
use crate::mcmc::{SamplerConfig, TraceStore};
use crate::selection::SelectionHistory;
use crate::synthetic::SbcReport;

pub const SCHEMA_VERSION: u32 = 1;

/// Compact JSON with every float rendered as 17 significant digits.
struct FixedFloatFormatter;

impl Formatter for FixedFloatFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if !value.is_finite() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "non-finite float in report",
            ));
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes any value with the deterministic float formatting.
pub fn to_json(value: &impl Serialize) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloatFormatter);
    value
        .serialize(&mut ser)
        .expect("report values are finite and serializable");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct SummaryReport<'a> {
    schema: u32,
    parameters: serde_json::Map<String, serde_json::Value>,
    #[serde(skip)]
    _marker: std::marker::PhantomData<&'a ()>,
}

/// Summary JSON keyed by parameter name in trace order.
pub fn summary_json(summary: &PosteriorSummary) -> String {
    let mut parameters = serde_json::Map::new();
    for (name, s) in summary.iter() {
        parameters.insert(
            name.clone(),
            serde_json::json!({
                "median": s.median,
                "sd": s.sd,
                "lower": s.lower,
                "upper": s.upper,
                "ess": s.ess,
                "geweke_z": s.geweke_z,
                "split_rhat": s.split_rhat,
                "significant": s.significant,
            }),
        );
    }
    to_json(&SummaryReport {
        schema: SCHEMA_VERSION,
        parameters,
        _marker: std::marker::PhantomData,
    })
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: u32,
    seed: u64,
    config: &'a SamplerConfig,
    columns: &'a [String],
    model_digest: &'a str,
}

/// Run manifest: seed, config, trace column order, and model digest.
pub fn manifest_json(config: &SamplerConfig, columns: &[String], model_digest: &str) -> String {
    to_json(&Manifest {
        schema: SCHEMA_VERSION,
        seed: config.seed,
        config,
        columns,
        model_digest,
    })
}

/// One CSV per chain: header of parameter names, one row per retained draw.
pub fn trace_csv(trace: &TraceStore, chain_index: usize) -> String {
    let chain = &trace.chains()[chain_index];
    let mut out = String::new();
    out.push_str(&trace.names().join(","));
    out.push('\n');
    for iter in 0..chain.retained() {
        let row: Vec<String> = (0..trace.names().len())
            .map(|p| format_float(chain.param(p)[iter]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct SelectionReport {
    schema: u32,
    steps: Vec<SelectionStepJson>,
    final_columns: Vec<String>,
}

#[derive(Serialize)]
struct SelectionStepJson {
    columns: Vec<String>,
    removed: Option<String>,
    sigma_overlap: Option<f64>,
    summaries: serde_json::Map<String, serde_json::Value>,
}

/// Selection history JSON: per-step summaries, removal, and sigma overlap.
pub fn selection_json(history: &SelectionHistory) -> String {
    let steps = history
        .steps
        .iter()
        .map(|step| {
            let mut summaries = serde_json::Map::new();
            for (name, s) in step.summary.iter() {
                summaries.insert(
                    name.clone(),
                    serde_json::json!({
                        "median": s.median,
                        "sd": s.sd,
                        "lower": s.lower,
                        "upper": s.upper,
                        "significant": s.significant,
                    }),
                );
            }
            SelectionStepJson {
                columns: step.columns.clone(),
                removed: step.removed.clone(),
                sigma_overlap: step.sigma_overlap,
                summaries,
            }
        })
        .collect();
    to_json(&SelectionReport {
        schema: SCHEMA_VERSION,
        steps,
        final_columns: history.final_spec.names(),
    })
}

#[derive(Serialize)]
struct SensitivityJson<'a> {
    schema: u32,
    #[serde(flatten)]
    report: &'a SensitivityReport,
}

pub fn sensitivity_json(report: &SensitivityReport) -> String {
    to_json(&SensitivityJson {
        schema: SCHEMA_VERSION,
        report,
    })
}

#[derive(Serialize)]
struct ContrastsJson<'a> {
    schema: u32,
    group_medians: serde_json::Map<String, serde_json::Value>,
    contrasts: &'a [Contrast],
}

pub fn contrasts_json(
    groups: &crate::analysis::GroupMeanPosteriors,
    contrasts: &[Contrast],
) -> String {
    let mut group_medians = serde_json::Map::new();
    for arm in &groups.arms {
        let s = groups.summary.get(arm.token()).expect("summarized arm");
        group_medians.insert(
            arm.token().to_string(),
            serde_json::json!({
                "median": s.median,
                "lower": s.lower,
                "upper": s.upper,
            }),
        );
    }
    to_json(&ContrastsJson {
        schema: SCHEMA_VERSION,
        group_medians,
        contrasts,
    })
}

#[derive(Serialize)]
struct SbcJson<'a> {
    schema: u32,
    #[serde(flatten)]
    report: &'a SbcReport,
}

pub fn sbc_json(report: &SbcReport) -> String {
    to_json(&SbcJson {
        schema: SCHEMA_VERSION,
        report,
    })
}

/// Two-column CSV (grid, density) for downstream plotting.
pub fn density_csv(curve: &DensityCurve) -> String {
    let mut out = String::from("grid,density\n");
    for (g, d) in curve.grid.iter().zip(curve.density.iter()) {
        out.push_str(&format_float(*g));
        out.push(',');
        out.push_str(&format_float(*d));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_significant_digits() {
        #[derive(Serialize)]
        struct V {
            x: f64,
        }
        let s = to_json(&V { x: 0.1 });
        assert_eq!(s, "{\"x\":1.0000000000000001e-1}");
        let s = to_json(&V { x: -41.56 });
        assert_eq!(s, "{\"x\":-4.1560000000000002e1}");
    }

    #[test]
    fn serialization_round_trips_exactly() {
        let values = [0.1, -2.394, 1e-300, 12.0214, f64::MIN_POSITIVE, 87.0];
        for v in values {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, v, "{s}");
        }
    }

    #[test]
    fn json_is_parseable_and_ordered() {
        #[derive(Serialize)]
        struct V {
            b: f64,
            a: f64,
        }
        let s = to_json(&V { b: 1.0, a: 2.0 });
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed["b"], 1.0);
        // Declaration order is preserved, not alphabetized.
        assert!(s.find("\"b\"").unwrap() < s.find("\"a\"").unwrap());
    }
}
