//! Stepping-out slice sampler for the Uniform-prior scale parameters.
//!
//! The conditional of a scale σ with m attached residuals and sum of squares
//! SS is p(σ) ∝ σ^−m exp(−SS/(2σ²)) truncated to (0, upper). Sampling runs on
//! t = log σ, where the density becomes
//!
//! ```text
//! p(t) ∝ exp(−(m−1) t − SS e^{−2t} / 2),   t < log upper
//! ```
//!
//! (the extra +t is the Jacobian of the transform). Stepping out uses Neal's
//! capped procedure so a bounded number of expansions keeps the draw exact;
//! the shrinkage loop then samples from the slice.

use rand::Rng;
use rand_distr::Exp1;

use crate::mcmc::SamplerError;

const STEP_WIDTH: f64 = 1.0;
const MAX_STEP_OUT: usize = 64;
const MAX_SHRINK: usize = 200;

fn log_density(t: f64, m: f64, ss: f64, t_max: f64) -> f64 {
    if t >= t_max {
        return f64::NEG_INFINITY;
    }
    -(m - 1.0) * t - 0.5 * ss * (-2.0 * t).exp()
}

/// Draws a new σ from its conditional.
///
/// With no attached residuals (m = 0, SS = 0) the conditional is the
/// Uniform(0, upper) prior itself. SS = 0 with m > 0 makes the conditional
/// improper at σ → 0 and is reported as [`SamplerError::DegenerateSS`].
pub fn slice_sample_sigma<R: Rng>(
    m: usize,
    ss: f64,
    upper: f64,
    current: f64,
    label: &'static str,
    rng: &mut R,
) -> Result<f64, SamplerError> {
    if ss <= 0.0 {
        if m == 0 {
            return Ok((rng.random::<f64>() * upper).max(f64::MIN_POSITIVE));
        }
        return Err(SamplerError::DegenerateSS { which: label });
    }

    let m = m as f64;
    let t_max = upper.ln();
    let mut t0 = current.clamp(f64::MIN_POSITIVE, upper * 0.999_999).ln();
    if !t0.is_finite() {
        t0 = t_max - 1.0;
    }

    let g0 = log_density(t0, m, ss, t_max);
    let log_level = g0 - rng.sample::<f64, _>(Exp1);

    // Capped stepping out (Neal 2003, Fig. 3): random share of the step
    // budget on each side keeps the procedure exact.
    let mut left = t0 - STEP_WIDTH * rng.random::<f64>();
    let mut right = left + STEP_WIDTH;
    let budget_left = (rng.random::<f64>() * MAX_STEP_OUT as f64).floor() as usize;
    let budget_right = MAX_STEP_OUT - 1 - budget_left;
    for _ in 0..budget_left {
        if log_density(left, m, ss, t_max) <= log_level {
            break;
        }
        left -= STEP_WIDTH;
    }
    for _ in 0..budget_right {
        if right >= t_max || log_density(right, m, ss, t_max) <= log_level {
            break;
        }
        right += STEP_WIDTH;
    }
    right = right.min(t_max);

    // Shrinkage.
    for _ in 0..MAX_SHRINK {
        let candidate = left + rng.random::<f64>() * (right - left);
        if log_density(candidate, m, ss, t_max) > log_level {
            return Ok(candidate.exp());
        }
        if candidate < t0 {
            left = candidate;
        } else {
            right = candidate;
        }
    }
    // Numerically stuck slice: keep the current state (a valid, if sticky,
    // MCMC move).
    Ok(current)
}
