//! Posterior summarization and convergence diagnostics.
//!
//! Quantiles use linear interpolation of order statistics (type-7): the p-th
//! quantile of n sorted draws sits at position h = (n−1)p and interpolates
//! linearly between the bracketing order statistics. A parameter is flagged
//! significant when its central 95% interval excludes zero.
//!
//! * ESS — initial-positive-sequence truncation of the autocorrelation sum
//!   (consecutive lag pairs are summed until a pair turns non-positive),
//!   computed per chain and summed.
//! * Geweke — z-score comparing the means of the first 10% and last 50% of a
//!   chain, with window variances from Bartlett-windowed spectral density
//!   estimates at frequency zero. Multi-chain summaries report the largest
//!   |z| across chains.
//! * Split R-hat — each chain is halved and the standard pooled/within
//!   variance ratio is taken over the resulting sequences.
//! * KDE — Gaussian kernel, Silverman bandwidth, equally spaced grid spanning
//!   [min−3h, max+3h]; the curve is normalized so its trapezoid integral is
//!   exactly 1.

use serde::Serialize;
use thiserror::Error;

use crate::mcmc::TraceStore;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("insufficient draws: need at least {needed}, got {got}")]
    InsufficientDraws { needed: usize, got: usize },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

/// Summary statistics of one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterSummary {
    pub median: f64,
    pub sd: f64,
    /// 2.5% quantile.
    pub lower: f64,
    /// 97.5% quantile.
    pub upper: f64,
    pub ess: f64,
    pub geweke_z: f64,
    pub split_rhat: f64,
    /// Central 95% interval excludes zero.
    pub significant: bool,
}

/// Per-parameter summaries in trace order.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    entries: Vec<(String, ParameterSummary)>,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParameterSummary> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, ParameterSummary)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Type-7 quantile of already-sorted draws.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty slice");
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Autocorrelation at lag t (biased normalization, population variance).
fn autocorrelation(xs: &[f64], m: f64, var: f64, t: usize) -> f64 {
    let n = xs.len();
    let mut acc = 0.0;
    for i in 0..n - t {
        acc += (xs[i] - m) * (xs[i + t] - m);
    }
    acc / (n as f64 * var)
}

/// Effective sample size of a single sequence via the initial positive
/// sequence of autocorrelation pair sums, clamped to the draw count.
pub fn ess(draws: &[f64]) -> Result<f64, DiagnosticsError> {
    let n = draws.len();
    if n < 100 {
        return Err(DiagnosticsError::InsufficientDraws { needed: 100, got: n });
    }
    let m = mean(draws);
    let var = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        // A constant sequence carries no autocorrelation information.
        return Ok(n as f64);
    }
    let mut pair_total = 0.0;
    let mut lag = 0usize;
    loop {
        if lag + 1 >= n {
            break;
        }
        let rho_even = if lag == 0 {
            1.0
        } else {
            autocorrelation(draws, m, var, lag)
        };
        let rho_odd = autocorrelation(draws, m, var, lag + 1);
        let pair = rho_even + rho_odd;
        if pair <= 0.0 {
            break;
        }
        pair_total += pair;
        lag += 2;
    }
    let tau = (2.0 * pair_total - 1.0).max(1e-12);
    Ok((n as f64 / tau).min(n as f64))
}

/// Bartlett-windowed spectral density at frequency zero.
fn spectral_density_zero(xs: &[f64]) -> f64 {
    let n = xs.len();
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return 0.0;
    }
    let lags = (n as f64).sqrt().floor() as usize;
    let mut s = 1.0;
    for t in 1..=lags.min(n - 1) {
        let w = 1.0 - t as f64 / (lags + 1) as f64;
        s += 2.0 * w * autocorrelation(xs, m, var, t);
    }
    var * s.max(0.0)
}

/// Geweke convergence z-score between early and late chain segments.
pub fn geweke(draws: &[f64], first: f64, last: f64) -> Result<f64, DiagnosticsError> {
    let n = draws.len();
    if n < 100 {
        return Err(DiagnosticsError::InsufficientDraws { needed: 100, got: n });
    }
    let n_a = ((n as f64) * first).floor() as usize;
    let n_b = ((n as f64) * last).floor() as usize;
    let a = &draws[..n_a.max(2)];
    let b = &draws[n - n_b.max(2)..];
    let s_a = spectral_density_zero(a);
    let s_b = spectral_density_zero(b);
    let denom = (s_a / a.len() as f64 + s_b / b.len() as f64).sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((mean(a) - mean(b)) / denom)
}

/// Split R-hat over chains: each chain is halved and the pooled/within
/// variance ratio of the resulting sequences is returned.
pub fn split_rhat(chains: &[&[f64]]) -> Result<f64, DiagnosticsError> {
    let mut halves: Vec<&[f64]> = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        let n = chain.len();
        if n < 4 {
            return Err(DiagnosticsError::InsufficientDraws { needed: 4, got: n });
        }
        let half = n / 2;
        halves.push(&chain[..half]);
        halves.push(&chain[n - half..]);
    }
    let len = halves.iter().map(|h| h.len()).min().unwrap_or(0);
    let m = halves.len() as f64;
    let n = len as f64;
    let mut means: Vec<f64> = halves.iter().map(|h| mean(&h[..len])).collect();
    let mut vars: Vec<f64> = halves
        .iter()
        .map(|h| {
            let hm = mean(&h[..len]);
            h[..len].iter().map(|x| (x - hm).powi(2)).sum::<f64>() / (n - 1.0)
        })
        .collect();
    // Sorted aggregation keeps the statistic exactly chain-order invariant.
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    vars.sort_by(|a, b| a.partial_cmp(b).expect("finite variances"));
    let within: f64 = vars.iter().sum::<f64>() / m;
    let grand = mean(&means);
    let between = n * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (m - 1.0);
    if within == 0.0 {
        // All halves constant: identical chains are perfectly mixed.
        return Ok(1.0);
    }
    Ok((((n - 1.0) / n * within + between / n) / within).sqrt())
}

fn summarize_draws(pooled: &mut [f64], per_chain: &[&[f64]]) -> Result<ParameterSummary, DiagnosticsError> {
    // Sorting first makes every pooled statistic independent of chain order
    // and draw permutation, down to the last bit.
    pooled.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
    let sd = sample_sd(pooled);
    let median = quantile_sorted(pooled, 0.5);
    let lower = quantile_sorted(pooled, 0.025);
    let upper = quantile_sorted(pooled, 0.975);

    let mut ess_values = Vec::with_capacity(per_chain.len());
    let mut geweke_max: f64 = 0.0;
    for chain in per_chain {
        ess_values.push(ess(chain)?);
        let z = geweke(chain, 0.1, 0.5)?;
        if (z.abs(), z) > (geweke_max.abs(), geweke_max) {
            geweke_max = z;
        }
    }
    ess_values.sort_by(|a, b| a.partial_cmp(b).expect("finite ess"));
    let ess_total = ess_values.iter().sum();
    let rhat = split_rhat(per_chain)?;

    Ok(ParameterSummary {
        median,
        sd,
        lower,
        upper,
        ess: ess_total,
        geweke_z: geweke_max,
        split_rhat: rhat,
        significant: lower > 0.0 || upper < 0.0,
    })
}

/// Summarizes every parameter of a trace.
///
/// Requires at least 100 retained draws pooled across chains.
pub fn summarize(trace: &TraceStore) -> Result<PosteriorSummary, DiagnosticsError> {
    let pooled_count = trace.retained_per_chain() * trace.chain_count();
    if pooled_count < 100 {
        return Err(DiagnosticsError::InsufficientDraws {
            needed: 100,
            got: pooled_count,
        });
    }
    let mut entries = Vec::with_capacity(trace.names().len());
    for name in trace.names() {
        let per_chain = trace.per_chain(name).expect("name from trace");
        let mut pooled = trace.pooled(name).expect("name from trace");
        entries.push((name.clone(), summarize_draws(&mut pooled, &per_chain)?));
    }
    Ok(PosteriorSummary { entries })
}

/// An evaluated density curve on an equally spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

impl DensityCurve {
    /// Trapezoid integral of the curve.
    pub fn area(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    /// Grid location of the maximum density value.
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for i in 1..self.density.len() {
            if self.density[i] > self.density[best] {
                best = i;
            }
        }
        self.grid[best]
    }
}

fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..grid.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
    }
    acc
}

/// Silverman's bandwidth with an interquartile-range guard.
pub fn silverman_bandwidth(draws: &[f64]) -> f64 {
    let n = draws.len() as f64;
    let sd = sample_sd(draws);
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let scale = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * scale * n.powf(-0.2);
    if h > 0.0 {
        h
    } else {
        1e-9
    }
}

/// Gaussian-kernel density estimate on `grid_count` points spanning
/// [min−3h, max+3h], normalized to unit trapezoid area.
pub fn kde(draws: &[f64], grid_count: usize) -> Result<DensityCurve, DiagnosticsError> {
    if draws.len() < 100 {
        return Err(DiagnosticsError::InsufficientDraws {
            needed: 100,
            got: draws.len(),
        });
    }
    let h = silverman_bandwidth(draws);
    let lo = draws.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = draws.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    kde_on_grid(draws, lo, hi, grid_count)
}

/// KDE evaluated on an explicit grid range (shared-grid comparisons).
pub fn kde_on_grid(
    draws: &[f64],
    lo: f64,
    hi: f64,
    grid_count: usize,
) -> Result<DensityCurve, DiagnosticsError> {
    if draws.len() < 100 {
        return Err(DiagnosticsError::InsufficientDraws {
            needed: 100,
            got: draws.len(),
        });
    }
    let count = grid_count.max(2);
    let h = silverman_bandwidth(draws);
    let step = (hi - lo) / (count - 1) as f64;
    let grid: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    let norm = 1.0 / (draws.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut density: Vec<f64> = grid
        .iter()
        .map(|g| {
            draws
                .iter()
                .map(|x| (-0.5 * ((g - x) / h).powi(2)).exp())
                .sum::<f64>()
                * norm
        })
        .collect();
    // Normalize away boundary truncation and quadrature error.
    let area = trapezoid(&grid, &density);
    if area > 0.0 {
        for d in &mut density {
            *d /= area;
        }
    }
    Ok(DensityCurve { grid, density })
}
