//! Fixed-effect covariate encoding.
//!
//! A [`CovariateSpec`] is an ordered list of named columns drawn from a fixed
//! vocabulary of base covariates plus two-way interactions written `a:b`.
//! Encoding is deterministic and row-local: each matrix row depends only on
//! its observation record, so permuting dataset rows permutes matrix rows
//! identically.
//!
//! Base column definitions:
//!
//! * `intercept` — constant 1
//! * `treatment` — ordinal dose code (Placebo 0, 5000U 1, 10000U 2)
//! * `treat_5000` / `treat_10000` — alternative indicator coding
//! * `week` — weeks since treatment start
//! * `week_sq` — week squared
//! * `sex` — Female 0, Male 1
//! * `age` — years
//! * `site` — numeric site code 1–9
//! * `site_2` … `site_9` — alternative one-hot site coding (site 1 reference)
//! * `dose_onset` — treatment code × 1{week ≥ 2}, modeling delayed onset
//!
//! With the centering option enabled, `age` and `week` are centered at their
//! dataset means before deriving `week_sq` and any interaction involving them.

use nalgebra::DMatrix;

use crate::data::{DataError, ObservationRecord, PanelDataset};

/// Week threshold after which an assigned dose is considered active.
pub const DOSE_ONSET_WEEK: u32 = 2;

/// A named column: a base covariate or a product of two base covariates.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Column {
    Base(String),
    Interaction(String, String),
}

impl Column {
    fn name(&self) -> String {
        match self {
            Column::Base(name) => name.clone(),
            Column::Interaction(a, b) => format!("{a}:{b}"),
        }
    }
}

/// Ordered list of named covariate columns plus encoding options.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateSpec {
    columns: Vec<Column>,
    /// Center `age` and `week` at their dataset means before deriving columns.
    pub center_age_week: bool,
}

const BASE_NAMES: [&str; 18] = [
    "intercept",
    "treatment",
    "treat_5000",
    "treat_10000",
    "week",
    "week_sq",
    "sex",
    "age",
    "site",
    "site_2",
    "site_3",
    "site_4",
    "site_5",
    "site_6",
    "site_7",
    "site_8",
    "site_9",
    "dose_onset",
];

impl CovariateSpec {
    /// Builds a spec from column names; interactions are written `a:b`.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<CovariateSpec, DataError> {
        if names.is_empty() {
            return Err(DataError::EmptySpec);
        }
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref().trim();
            if let Some((a, b)) = name.split_once(':') {
                for part in [a, b] {
                    if !BASE_NAMES.contains(&part) {
                        return Err(DataError::UnknownCovariate(name.to_string()));
                    }
                }
                columns.push(Column::Interaction(a.to_string(), b.to_string()));
            } else if BASE_NAMES.contains(&name) {
                columns.push(Column::Base(name.to_string()));
            } else {
                return Err(DataError::UnknownCovariate(name.to_string()));
            }
        }
        Ok(CovariateSpec {
            columns,
            center_age_week: false,
        })
    }

    /// The default full model: all main effects plus the standard interaction
    /// set (15 columns).
    pub fn full() -> CovariateSpec {
        CovariateSpec::from_names(&[
            "intercept",
            "treatment",
            "week",
            "week_sq",
            "sex",
            "age",
            "dose_onset",
            "site",
            "treatment:sex",
            "treatment:week",
            "treatment:site",
            "sex:age",
            "sex:week",
            "dose_onset:site",
            "age:week",
        ])
        .expect("built-in spec is valid")
    }

    /// The reduced model retained after backward elimination.
    pub fn final_model() -> CovariateSpec {
        CovariateSpec::from_names(&["intercept", "treatment", "week", "week_sq", "sex", "site"])
            .expect("built-in spec is valid")
    }

    /// Parses a spec file: one column name per line, `#` comments allowed.
    pub fn parse(text: &str) -> Result<CovariateSpec, DataError> {
        let names: Vec<&str> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .collect();
        CovariateSpec::from_names(&names)
    }

    /// Column names in spec order.
    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(Column::name).collect()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name() == name)
    }

    /// Spec with one named column removed.
    pub fn without(&self, name: &str) -> CovariateSpec {
        CovariateSpec {
            columns: self
                .columns
                .iter()
                .filter(|c| c.name() != name)
                .cloned()
                .collect(),
            center_age_week: self.center_age_week,
        }
    }

    /// Parent base-column names of an interaction column, if `name` is one.
    pub fn interaction_parents(name: &str) -> Option<(&str, &str)> {
        name.split_once(':')
    }
}

/// Encoded fixed-effect matrix with row-to-patient mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub columns: Vec<String>,
    pub values: DMatrix<f64>,
    pub patient_of_row: Vec<usize>,
    pub patients: usize,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn base_value(rec: &ObservationRecord, name: &str, week_c: f64, age_c: f64) -> f64 {
    match name {
        "intercept" => 1.0,
        "treatment" => rec.arm.code(),
        "treat_5000" => (rec.arm == crate::data::Arm::U5000) as u8 as f64,
        "treat_10000" => (rec.arm == crate::data::Arm::U10000) as u8 as f64,
        "week" => rec.week as f64 - week_c,
        "week_sq" => (rec.week as f64 - week_c).powi(2),
        "sex" => rec.sex.code(),
        "age" => rec.age as f64 - age_c,
        "site" => rec.site as f64,
        "dose_onset" => {
            if rec.week >= DOSE_ONSET_WEEK {
                rec.arm.code()
            } else {
                0.0
            }
        }
        _ => {
            if let Some(k) = name.strip_prefix("site_") {
                let k: u32 = k.parse().expect("validated site indicator");
                (rec.site == k) as u8 as f64
            } else {
                unreachable!("column names validated at spec construction")
            }
        }
    }
}

/// Encodes a panel into a design matrix under a covariate spec.
///
/// Columns appear in spec order. Errors if a non-empty dataset yields a
/// constant-zero column (such a column carries no information and would make
/// its coefficient prior-only).
pub fn encode_design(data: &PanelDataset, spec: &CovariateSpec) -> Result<DesignMatrix, DataError> {
    if spec.is_empty() {
        return Err(DataError::EmptySpec);
    }
    let n = data.len();
    let k = spec.len();
    let (week_c, age_c) = if spec.center_age_week && n > 0 {
        let week_mean = data.records().iter().map(|r| r.week as f64).sum::<f64>() / n as f64;
        let age_mean = data.records().iter().map(|r| r.age as f64).sum::<f64>() / n as f64;
        (week_mean, age_mean)
    } else {
        (0.0, 0.0)
    };

    let mut values = DMatrix::zeros(n, k);
    for (row, rec) in data.records().iter().enumerate() {
        for (col, column) in spec.columns.iter().enumerate() {
            let v = match column {
                Column::Base(name) => base_value(rec, name, week_c, age_c),
                Column::Interaction(a, b) => {
                    base_value(rec, a, week_c, age_c) * base_value(rec, b, week_c, age_c)
                }
            };
            values[(row, col)] = v;
        }
    }

    if n > 0 {
        for (col, column) in spec.columns.iter().enumerate() {
            if (0..n).all(|row| values[(row, col)] == 0.0) {
                return Err(DataError::ConstantZeroColumn(column.name()));
            }
        }
    }

    let patient_of_row = data
        .records()
        .iter()
        .map(|rec| data.patient_of(rec))
        .collect();
    Ok(DesignMatrix {
        columns: spec.names(),
        values,
        patient_of_row,
        patients: data.patient_count(),
    })
}
