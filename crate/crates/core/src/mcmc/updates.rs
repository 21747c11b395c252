//! Full-conditional updates of the Gibbs sweep.
//!
//! Writing τ_s = σ_score⁻², τ_γ = σ_γ⁻², the conditionals are
//!
//! * β | rest ~ Normal(A⁻¹ b, A⁻¹) with A = τ_s XᵀX + τ_β I and
//!   b = τ_s Xᵀ(y − Zγ) + τ_β μ_β 1
//! * γ_i | rest ~ Normal(τ_s Σ_j (y_ij − x'_ij β) / q_i, q_i⁻¹) with
//!   q_i = n_i τ_s + τ_γ
//! * μ_β | rest ~ Normal conjugate of the β sample mean against its hyperprior
//! * τ_β | rest ~ Gamma(a_τβ + K/2, b_τβ + ½ Σ (β_k − μ_β)²)
//! * σ | rest ∝ σ^−m exp(−SS/(2σ²)) on (0, upper), drawn by slice sampling
//!   on log σ with m = N, SS = Σ residual² for σ_score and m = P, SS = Σ γ²
//!   for σ_γ

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};

use crate::mcmc::slice::slice_sample_sigma;
use crate::mcmc::SamplerError;
use crate::model::{ModelDefinition, ParameterPoint, Prior};

/// Condition-number ceiling for the β conditional precision matrix.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Per-fit precomputed quantities shared by every sweep and chain.
#[derive(Debug, Clone)]
pub struct SamplerWorkspace {
    model: ModelDefinition,
    xtx: DMatrix<f64>,
    /// Eigenvalue range of XᵀX, for O(1) condition estimates of τ_s XᵀX + τ_β I.
    lambda_min: f64,
    lambda_max: f64,
    rows_of_patient: Vec<Vec<usize>>,
    ridge_beta: DVector<f64>,
}

impl SamplerWorkspace {
    pub fn new(model: &ModelDefinition) -> Result<SamplerWorkspace, SamplerError> {
        let x = &model.design.values;
        let k = model.k();
        let xtx = x.transpose() * x;
        let (lambda_min, lambda_max) = if k == 0 {
            (0.0, 0.0)
        } else {
            let eigen = xtx.clone().symmetric_eigen();
            let max = eigen.eigenvalues.iter().cloned().fold(0.0, f64::max);
            let min = eigen
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
                .max(0.0);
            (min, max)
        };

        let mut rows_of_patient = vec![Vec::new(); model.p()];
        for (row, &pat) in model.design.patient_of_row.iter().enumerate() {
            rows_of_patient[pat].push(row);
        }

        // Ridge least squares for data-driven initialization.
        let ridge_beta = if k == 0 {
            DVector::zeros(0)
        } else {
            let mut ridge = xtx.clone();
            for i in 0..k {
                ridge[(i, i)] += 1e-6;
            }
            let xty = x.transpose() * DVector::from_column_slice(&model.response);
            ridge
                .cholesky()
                .map(|c| c.solve(&xty))
                .unwrap_or_else(|| DVector::zeros(k))
        };

        Ok(SamplerWorkspace {
            model: model.clone(),
            xtx,
            lambda_min,
            lambda_max,
            rows_of_patient,
            ridge_beta,
        })
    }

    pub fn model(&self) -> &ModelDefinition {
        &self.model
    }

    pub(crate) fn ridge_beta(&self) -> &DVector<f64> {
        &self.ridge_beta
    }

    fn tau_score(&self, state: &ParameterPoint) -> f64 {
        1.0 / (state.sigma_score * state.sigma_score)
    }

    fn tau_gamma(&self, state: &ParameterPoint) -> f64 {
        1.0 / (state.sigma_gamma * state.sigma_gamma)
    }

    /// Fitted fixed-effect values Xβ.
    fn linear_predictor(&self, beta: &[f64]) -> Vec<f64> {
        let x = &self.model.design.values;
        let n = self.model.n();
        let k = self.model.k();
        let mut out = vec![0.0; n];
        for (row, value) in out.iter_mut().enumerate() {
            let mut eta = 0.0;
            for (col, b) in beta.iter().enumerate().take(k) {
                eta += x[(row, col)] * b;
            }
            *value = eta;
        }
        out
    }
}

/// The exact Gaussian full conditional of β.
#[derive(Debug, Clone)]
pub struct BetaConditional {
    pub mean: DVector<f64>,
    /// Cholesky factor L of the precision matrix A = L Lᵀ.
    chol_l: DMatrix<f64>,
}

impl BetaConditional {
    /// Draws β = mean + L⁻ᵀ z.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let k = self.mean.len();
        let z = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let u = self
            .chol_l
            .transpose()
            .solve_upper_triangular(&z)
            .expect("cholesky factor is nonsingular");
        &self.mean + u
    }
}

/// Builds the β full conditional, checking conditioning of the precision.
pub fn beta_full_conditional(
    ws: &SamplerWorkspace,
    state: &ParameterPoint,
) -> Result<BetaConditional, SamplerError> {
    let model = &ws.model;
    let k = model.k();
    if k == 0 {
        return Ok(BetaConditional {
            mean: DVector::zeros(0),
            chol_l: DMatrix::zeros(0, 0),
        });
    }
    let tau_score = ws.tau_score(state);
    let tau_beta = state.tau_beta;

    let condition = (tau_score * ws.lambda_max + tau_beta) / (tau_score * ws.lambda_min + tau_beta);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(SamplerError::SingularSystem { condition });
    }

    let mut precision = &ws.xtx * tau_score;
    for i in 0..k {
        precision[(i, i)] += tau_beta;
    }

    // b = τ_s Xᵀ(y − Zγ) + τ_β μ_β 1
    let x = &model.design.values;
    let n = model.n();
    let mut b = DVector::from_element(k, tau_beta * state.mu_beta);
    for row in 0..n {
        let u = tau_score * (model.response[row] - state.gamma[model.design.patient_of_row[row]]);
        for col in 0..k {
            b[col] += x[(row, col)] * u;
        }
    }

    let chol = precision
        .clone()
        .cholesky()
        .ok_or(SamplerError::SingularSystem { condition })?;
    let mean = chol.solve(&b);
    Ok(BetaConditional {
        mean,
        chol_l: chol.l(),
    })
}

/// Draws β from its full conditional in place.
pub fn update_beta<R: Rng>(
    ws: &SamplerWorkspace,
    state: &mut ParameterPoint,
    rng: &mut R,
) -> Result<(), SamplerError> {
    let conditional = beta_full_conditional(ws, state)?;
    let draw = conditional.draw(rng);
    state.beta.clear();
    state.beta.extend(draw.iter());
    Ok(())
}

/// Mean and precision of one patient's γ conditional.
pub fn gamma_conditional(
    ws: &SamplerWorkspace,
    state: &ParameterPoint,
    patient: usize,
    fixed_effects: &[f64],
) -> (f64, f64) {
    let model = &ws.model;
    let tau_score = ws.tau_score(state);
    let tau_gamma = ws.tau_gamma(state);
    let rows = &ws.rows_of_patient[patient];
    let residual_sum: f64 = rows
        .iter()
        .map(|&row| model.response[row] - fixed_effects[row])
        .sum();
    let precision = rows.len() as f64 * tau_score + tau_gamma;
    let mean = tau_score * residual_sum / precision;
    (mean, precision)
}

/// Draws every γ_i from its independent Normal conditional.
pub fn update_gamma<R: Rng>(ws: &SamplerWorkspace, state: &mut ParameterPoint, rng: &mut R) {
    let fixed = ws.linear_predictor(&state.beta);
    for patient in 0..ws.model.p() {
        let (mean, precision) = gamma_conditional(ws, state, patient, &fixed);
        state.gamma[patient] = mean + rng.sample::<f64, _>(StandardNormal) / precision.sqrt();
    }
}

/// Draws μ_β from its Normal conjugate conditional.
pub fn update_mu_beta<R: Rng>(ws: &SamplerWorkspace, state: &mut ParameterPoint, rng: &mut R) {
    let k = state.beta.len() as f64;
    let prior_mean = ws.model.prior.mu_beta_mean();
    let prior_precision = ws.model.prior.mu_beta_precision();
    let precision = prior_precision + k * state.tau_beta;
    let mean = (prior_precision * prior_mean + state.tau_beta * state.beta.iter().sum::<f64>())
        / precision;
    state.mu_beta = mean + rng.sample::<f64, _>(StandardNormal) / precision.sqrt();
}

/// Draws τ_β from its Gamma conditional (hierarchical regime only).
pub fn update_tau_beta<R: Rng>(ws: &SamplerWorkspace, state: &mut ParameterPoint, rng: &mut R) {
    let config = match &ws.model.prior {
        Prior::Hierarchical(c) => c,
        Prior::FixedPrecision(_) => return,
    };
    let k = state.beta.len() as f64;
    let shape = config.tau_beta_shape + 0.5 * k;
    let rate = config.tau_beta_rate
        + 0.5
            * state
                .beta
                .iter()
                .map(|b| (b - state.mu_beta).powi(2))
                .sum::<f64>();
    let dist = GammaDist::new(shape, 1.0 / rate).expect("positive shape and scale");
    state.tau_beta = dist.sample(rng).max(f64::MIN_POSITIVE);
}

/// Which scale parameter a sigma update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaKind {
    Score,
    Gamma,
}

/// Residual count and sum of squares for a sigma conditional.
pub fn sigma_sufficient_stats(
    ws: &SamplerWorkspace,
    state: &ParameterPoint,
    which: SigmaKind,
) -> (usize, f64) {
    match which {
        SigmaKind::Score => {
            let fixed = ws.linear_predictor(&state.beta);
            let model = &ws.model;
            let ss = (0..model.n())
                .map(|row| {
                    let r = model.response[row]
                        - fixed[row]
                        - state.gamma[model.design.patient_of_row[row]];
                    r * r
                })
                .sum();
            (model.n(), ss)
        }
        SigmaKind::Gamma => {
            let ss = state.gamma.iter().map(|g| g * g).sum();
            (state.gamma.len(), ss)
        }
    }
}

/// Draws σ_score or σ_γ from its truncated conditional by slice sampling.
pub fn update_sigma<R: Rng>(
    ws: &SamplerWorkspace,
    state: &mut ParameterPoint,
    which: SigmaKind,
    rng: &mut R,
) -> Result<(), SamplerError> {
    let config = match &ws.model.prior {
        Prior::Hierarchical(c) => c,
        Prior::FixedPrecision(_) => return Ok(()),
    };
    let (m, ss) = sigma_sufficient_stats(ws, state, which);
    let (upper, current, label) = match which {
        SigmaKind::Score => (config.sigma_score_upper, state.sigma_score, "sigma_score"),
        SigmaKind::Gamma => (config.sigma_gamma_upper, state.sigma_gamma, "sigma_gamma"),
    };
    let new = slice_sample_sigma(m, ss, upper, current, label, rng)?;
    match which {
        SigmaKind::Score => state.sigma_score = new,
        SigmaKind::Gamma => state.sigma_gamma = new,
    }
    Ok(())
}
