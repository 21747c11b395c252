//! Panel ingestion and validation for longitudinal trial data.
//!
//! A panel is a long-format collection of visit rows: one row per
//! (patient, week) with the patient's site, treatment arm, age, sex, and the
//! outcome score measured at that visit. Panels are unbalanced — patients may
//! miss visits — but every row must come from the fixed visit schedule and
//! patient-level covariates must be constant across a patient's rows.
//!
//! The CSV wire format has the exact header `id,week,site,treat,age,sex,twstrs`
//! with `treat` one of `Placebo`/`5000U`/`10000U` and `sex` one of `F`/`M`,
//! comma-separated with LF line endings and no quoting.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Weeks at which visits may occur.
pub const VISIT_SCHEDULE: [u32; 6] = [0, 2, 4, 8, 12, 16];

/// Outcome scale upper bound (total severity score).
pub const SCORE_MAX: u32 = 87;

/// Expected CSV header for panel input and output.
pub const CSV_HEADER: &str = "id,week,site,treat,age,sex,twstrs";

/// Treatment arm of the trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    Placebo,
    U5000,
    U10000,
}

impl Arm {
    /// All arms in canonical (dose) order.
    pub const ALL: [Arm; 3] = [Arm::Placebo, Arm::U5000, Arm::U10000];

    /// Ordinal dose code used by the default design encoding.
    pub fn code(self) -> f64 {
        match self {
            Arm::Placebo => 0.0,
            Arm::U5000 => 1.0,
            Arm::U10000 => 2.0,
        }
    }

    /// Wire-format token.
    pub fn token(self) -> &'static str {
        match self {
            Arm::Placebo => "Placebo",
            Arm::U5000 => "5000U",
            Arm::U10000 => "10000U",
        }
    }

    fn parse(token: &str) -> Option<Arm> {
        match token {
            "Placebo" => Some(Arm::Placebo),
            "5000U" => Some(Arm::U5000),
            "10000U" => Some(Arm::U10000),
            _ => None,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Biological sex as recorded in the trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    pub const ALL: [Sex; 2] = [Sex::Female, Sex::Male];

    /// Indicator code used by the default design encoding (Female 0, Male 1).
    pub fn code(self) -> f64 {
        match self {
            Sex::Female => 0.0,
            Sex::Male => 1.0,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
        }
    }

    fn parse(token: &str) -> Option<Sex> {
        match token {
            "F" => Some(Sex::Female),
            "M" => Some(Sex::Male),
            _ => None,
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// One visit row of the panel.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRecord {
    pub patient_id: String,
    pub week: u32,
    pub site: u32,
    pub arm: Arm,
    pub age: u32,
    pub sex: Sex,
    pub score: u32,
}

/// Validation and parse errors for panel data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("patient {0} has no week-0 baseline row")]
    MissingBaseline(String),
    #[error("unknown covariate `{0}`")]
    UnknownCovariate(String),
    #[error("covariate spec is empty")]
    EmptySpec,
    #[error("column `{0}` is constant zero over the dataset")]
    ConstantZeroColumn(String),
}

/// A validated long-format panel.
///
/// `patient_index` maps each patient id to a contiguous index in
/// `0..patient_count()`, assigned in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    records: Vec<ObservationRecord>,
    patient_index: BTreeMap<String, usize>,
}

impl PanelDataset {
    /// Validates a set of records into a panel.
    ///
    /// Checks every [`ObservationRecord`] invariant: week in the schedule,
    /// score on the outcome scale, site in 1..=9, (patient, week) unique, and
    /// patient-level covariates constant per patient.
    pub fn from_records(records: Vec<ObservationRecord>) -> Result<PanelDataset, DataError> {
        let mut patient_index = BTreeMap::new();
        let mut next = 0usize;
        let mut first_row_of: Vec<usize> = Vec::new();
        let mut seen_weeks: Vec<Vec<u32>> = Vec::new();

        for (row, rec) in records.iter().enumerate() {
            if !VISIT_SCHEDULE.contains(&rec.week) {
                return Err(DataError::InvariantViolation(format!(
                    "patient {} has week {} outside the visit schedule",
                    rec.patient_id, rec.week
                )));
            }
            if rec.score > SCORE_MAX {
                return Err(DataError::InvariantViolation(format!(
                    "patient {} week {}: score {} outside 0..={}",
                    rec.patient_id, rec.week, rec.score, SCORE_MAX
                )));
            }
            if !(1..=9).contains(&rec.site) {
                return Err(DataError::InvariantViolation(format!(
                    "patient {} has site {} outside 1..=9",
                    rec.patient_id, rec.site
                )));
            }
            if rec.age == 0 {
                return Err(DataError::InvariantViolation(format!(
                    "patient {} has non-positive age",
                    rec.patient_id
                )));
            }
            let idx = *patient_index.entry(rec.patient_id.clone()).or_insert_with(|| {
                let idx = next;
                next += 1;
                first_row_of.push(row);
                seen_weeks.push(Vec::new());
                idx
            });
            let first = &records[first_row_of[idx]];
            if rec.arm != first.arm || rec.sex != first.sex || rec.age != first.age
                || rec.site != first.site
            {
                return Err(DataError::InvariantViolation(format!(
                    "patient {} has inconsistent arm/sex/age/site across visits",
                    rec.patient_id
                )));
            }
            if seen_weeks[idx].contains(&rec.week) {
                return Err(DataError::InvariantViolation(format!(
                    "duplicate visit (patient {}, week {})",
                    rec.patient_id, rec.week
                )));
            }
            seen_weeks[idx].push(rec.week);
        }

        Ok(PanelDataset {
            records,
            patient_index,
        })
    }

    /// Parses the CSV wire format.
    pub fn parse_csv(input: &str) -> Result<PanelDataset, DataError> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| DataError::SchemaError("empty input".into()))?;
        let header = header.trim_end_matches('\r');
        if header != CSV_HEADER {
            return Err(DataError::SchemaError(format!(
                "expected header `{CSV_HEADER}`, got `{header}`"
            )));
        }

        let mut records = Vec::new();
        for (lineno, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(DataError::MalformedRow {
                    line: lineno + 1,
                    reason: format!("expected 7 fields, got {}", fields.len()),
                });
            }
            let parse_u32 = |name: &str, tok: &str| -> Result<u32, DataError> {
                tok.parse::<u32>().map_err(|_| DataError::MalformedRow {
                    line: lineno + 1,
                    reason: format!("non-numeric {name} `{tok}`"),
                })
            };
            let record = ObservationRecord {
                patient_id: fields[0].to_string(),
                week: parse_u32("week", fields[1])?,
                site: parse_u32("site", fields[2])?,
                arm: Arm::parse(fields[3]).ok_or_else(|| DataError::MalformedRow {
                    line: lineno + 1,
                    reason: format!("bad treat `{}`", fields[3]),
                })?,
                age: parse_u32("age", fields[4])?,
                sex: Sex::parse(fields[5]).ok_or_else(|| DataError::MalformedRow {
                    line: lineno + 1,
                    reason: format!("bad sex `{}`", fields[5]),
                })?,
                score: parse_u32("twstrs", fields[6])?,
            };
            records.push(record);
        }
        PanelDataset::from_records(records)
    }

    /// Serializes back to the CSV wire format (rows in stored order).
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.patient_id, r.week, r.site, r.arm, r.age, r.sex, r.score
            ));
        }
        out
    }

    pub fn records(&self) -> &[ObservationRecord] {
        &self.records
    }

    /// Number of rows N.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of distinct patients P.
    pub fn patient_count(&self) -> usize {
        self.patient_index.len()
    }

    /// Contiguous patient index for a row.
    pub fn patient_of(&self, record: &ObservationRecord) -> usize {
        self.patient_index[&record.patient_id]
    }

    /// Map from patient id to contiguous index (first-appearance order).
    pub fn patient_index(&self) -> &BTreeMap<String, usize> {
        &self.patient_index
    }

    /// Per-arm patient counts in canonical arm order.
    pub fn arm_patient_counts(&self) -> BTreeMap<Arm, usize> {
        let mut seen: BTreeMap<&str, Arm> = BTreeMap::new();
        for r in &self.records {
            seen.entry(&r.patient_id).or_insert(r.arm);
        }
        let mut counts = BTreeMap::new();
        for arm in Arm::ALL {
            counts.insert(arm, 0usize);
        }
        for arm in seen.values() {
            *counts.get_mut(arm).unwrap() += 1;
        }
        counts
    }

    /// Rows of a single arm.
    pub fn arm_rows(&self, arm: Arm) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.arm == arm)
            .map(|(i, _)| i)
            .collect()
    }

    /// Arms present in the data, canonical order.
    pub fn arms_present(&self) -> Vec<Arm> {
        Arm::ALL
            .into_iter()
            .filter(|arm| self.records.iter().any(|r| r.arm == *arm))
            .collect()
    }
}

/// Group statistics over week-0 rows.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GroupBaseline {
    pub n: usize,
    pub score_mean: f64,
    pub score_sd: f64,
    pub age_mean: f64,
}

/// Baseline (week-0) summary by arm and by sex.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSummary {
    pub by_arm: BTreeMap<Arm, GroupBaseline>,
    pub by_sex: BTreeMap<Sex, GroupBaseline>,
}

fn group_stats(rows: &[&ObservationRecord]) -> GroupBaseline {
    let n = rows.len();
    let score_mean = rows.iter().map(|r| r.score as f64).sum::<f64>() / n as f64;
    let age_mean = rows.iter().map(|r| r.age as f64).sum::<f64>() / n as f64;
    // Sample SD; a single observation has SD 0 by convention.
    let score_sd = if n > 1 {
        let ss = rows
            .iter()
            .map(|r| (r.score as f64 - score_mean).powi(2))
            .sum::<f64>();
        (ss / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    GroupBaseline {
        n,
        score_mean,
        score_sd,
        age_mean,
    }
}

/// Mean/SD of week-0 scores and mean age, grouped by arm and by sex.
///
/// Errors with [`DataError::MissingBaseline`] if any patient lacks a week-0 row.
pub fn baseline_summary(data: &PanelDataset) -> Result<BaselineSummary, DataError> {
    let mut has_baseline: BTreeMap<&str, bool> = BTreeMap::new();
    for r in data.records() {
        let e = has_baseline.entry(&r.patient_id).or_insert(false);
        if r.week == 0 {
            *e = true;
        }
    }
    if let Some((id, _)) = has_baseline.iter().find(|(_, has)| !**has) {
        return Err(DataError::MissingBaseline(id.to_string()));
    }

    let week0: Vec<&ObservationRecord> = data.records().iter().filter(|r| r.week == 0).collect();
    let mut by_arm = BTreeMap::new();
    for arm in Arm::ALL {
        let rows: Vec<&ObservationRecord> = week0.iter().copied().filter(|r| r.arm == arm).collect();
        if !rows.is_empty() {
            by_arm.insert(arm, group_stats(&rows));
        }
    }
    let mut by_sex = BTreeMap::new();
    for sex in Sex::ALL {
        let rows: Vec<&ObservationRecord> = week0.iter().copied().filter(|r| r.sex == sex).collect();
        if !rows.is_empty() {
            by_sex.insert(sex, group_stats(&rows));
        }
    }
    Ok(BaselineSummary { by_arm, by_sex })
}
