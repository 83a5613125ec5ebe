//! Evaluation quantities over fitted hierarchies and realized play.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{Game, Strategy, SIMPLEX_TOL};
use crate::store::ActionLog;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub mean_level: f64,
    pub dist_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub model_id: String,
    pub per_opponent_means: BTreeMap<String, f64>,
    pub cross_mean: f64,
    pub cross_variance: f64,
}

/// Mean and variance of the level index under `weights`.
pub fn level_stats(weights: &[f64]) -> Result<LevelStats> {
    if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(invalid(format!("level weights must be non-negative: {weights:?}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(invalid(format!("level weights sum to {total}, expected 1")));
    }
    let mean: f64 = weights.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
    let second: f64 = weights.iter().enumerate().map(|(k, w)| (k * k) as f64 * w).sum();
    Ok(LevelStats { mean_level: mean, dist_variance: (second - mean * mean).max(0.0) })
}

fn population_moments(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Spread of one model's mean level across opponents (population variance).
pub fn robustness(model_id: &str, fits: &BTreeMap<String, LevelStats>) -> Result<RobustnessReport> {
    if fits.is_empty() {
        return Err(invalid("robustness needs at least one opponent"));
    }
    let per_opponent_means: BTreeMap<String, f64> = fits.iter().map(|(k, s)| (k.clone(), s.mean_level)).collect();
    let (cross_mean, cross_variance) = population_moments(per_opponent_means.values().copied());
    Ok(RobustnessReport { model_id: model_id.to_string(), per_opponent_means, cross_mean, cross_variance })
}

/// Relative NLL reduction when moving from the smaller to the larger model.
pub fn likelihood_improvement_ratio(nll_small: f64, nll_large: f64) -> Result<f64> {
    if !(nll_small > 0.0) {
        return Err(invalid(format!("nll_small must be positive, got {nll_small}")));
    }
    Ok((nll_small - nll_large) / nll_small)
}

/// `KL(p || q)` with both arguments floored inside the log; zero-mass terms of `p` contribute nothing.
pub fn kl_divergence(p: &Strategy, q: &Strategy, floor: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(invalid(format!("KL of distributions with {} and {} entries", p.len(), q.len())));
    }
    if !(floor > 0.0 && floor <= 1e-3) {
        return Err(invalid(format!("floor must lie in (0, 1e-3], got {floor}")));
    }
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .filter(|(pa, _)| **pa > 0.0)
        .map(|(&pa, &qa)| pa * (pa.max(floor) / qa.max(floor)).ln())
        .sum())
}

/// Mean realized payoff `(row, col)` over the log's rounds.
pub fn average_utility(log: &ActionLog, game: &Game) -> Result<(f64, f64)> {
    log.validate_against(game)?;
    let t = log.records.len() as f64;
    let (r, c) = log.records.iter().fold((0.0, 0.0), |(r, c), rec| (r + rec.row_payoff, c + rec.col_payoff));
    Ok((r / t, c / t))
}

/// Population variance of per-opponent average utilities.
pub fn utility_variance(per_opponent_avgs: &BTreeMap<String, f64>) -> Result<f64> {
    if per_opponent_avgs.is_empty() {
        return Err(Error::InvalidArgument("utility variance needs at least one opponent".into()));
    }
    Ok(population_moments(per_opponent_avgs.values().copied()).1)
}
