//! Level-K and Poisson cognitive-hierarchy predictions.
//!
//! Both models start from a uniform level-0 strategy. A Level-K agent at
//! level `k` best-responds to the opponent's level `k-1` strategy and errs
//! with probability `eps[k-1]`; a Poisson agent at level `k` best-responds to
//! a Poisson-weighted mixture of all opponent levels below `k`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{best_response_unchecked, Game, PlayerRole, Strategy, SIMPLEX_TOL};

/// One agent's Level-K parameters. `alpha[k]` is the weight of level `k`
/// and `eps[k - 1]` the error rate at level `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelKParams {
    pub eps: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl LevelKParams {
    pub fn new(eps: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        let p = LevelKParams { eps, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn k_hat(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() {
            return Err(invalid("level-k params need k_hat >= 1"));
        }
        if self.eps.len() + 1 != self.alpha.len() {
            return Err(invalid(format!(
                "level-k params: {} error rates for k_hat = {} (expected {})",
                self.eps.len(),
                self.alpha.len(),
                self.alpha.len() - 1
            )));
        }
        if self.eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(invalid(format!("error rates must lie in [0, 1]: {:?}", self.eps)));
        }
        check_distribution(&self.alpha, "alpha")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonParams {
    pub k_hat: usize,
    pub lambda: f64,
}

impl PoissonParams {
    pub fn new(k_hat: usize, lambda: f64) -> Result<Self> {
        let p = PoissonParams { k_hat, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_hat == 0 {
            return Err(invalid("poisson params need k_hat >= 1"));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be positive and finite, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Whose Poisson rate weights the believed opponent mixture at each level.
///
/// `Own` uses the believing agent's rate (`f_i` inside `s_{-i}^k`) and is the
/// default; `Opponent` uses the opponent's rate instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeliefWeights {
    #[default]
    Own,
    Opponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub level_strategies: Vec<Strategy>,
    pub level_weights: Vec<f64>,
    pub aggregate: Strategy,
}

impl LevelProfile {
    pub fn k_hat(&self) -> usize {
        self.level_strategies.len()
    }
}

fn check_distribution(w: &[f64], what: &str) -> Result<()> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(invalid(format!("{what} has a negative or non-finite entry: {w:?}")));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(invalid(format!("{what} sums to {total}, expected 1")));
    }
    Ok(())
}

/// Convex combination `sum_k weights[k] * levels[k]`.
pub fn aggregate_strategy(levels: &[Strategy], weights: &[f64]) -> Result<Strategy> {
    if levels.is_empty() || levels.len() != weights.len() {
        return Err(invalid(format!("{} level strategies but {} weights", levels.len(), weights.len())));
    }
    check_distribution(weights, "level weights")?;
    let n = levels[0].len();
    if levels.iter().any(|s| s.len() != n) {
        return Err(invalid("level strategies have different dimensions"));
    }
    Ok(Strategy::from_raw(mix(levels, weights, n)))
}

fn mix(levels: &[Strategy], weights: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (s, &w) in levels.iter().zip(weights) {
        for (o, &p) in out.iter_mut().zip(s.probs()) {
            *o += w * p;
        }
    }
    out
}

/// Truncated Poisson weights over levels `0..k_hat`.
pub fn poisson_weights(lambda: f64, k_hat: usize) -> Result<Vec<f64>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive and finite, got {lambda}")));
    }
    if k_hat == 0 {
        return Err(invalid("k_hat must be at least 1"));
    }
    Ok(poisson_weights_unchecked(lambda, k_hat))
}

pub(crate) fn poisson_weights_unchecked(lambda: f64, k_hat: usize) -> Vec<f64> {
    // Log-space pmf without the e^{-lambda} factor, which cancels on normalization.
    let ln_lambda = lambda.ln();
    let mut log_terms = Vec::with_capacity(k_hat);
    let mut ln_fact = 0.0;
    for k in 0..k_hat {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        log_terms.push(k as f64 * ln_lambda - ln_fact);
    }
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let terms: Vec<f64> = log_terms.iter().map(|t| (t - max).exp()).collect();
    let total: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / total).collect()
}

/// Level-K strategy given a best-response set: `(1 - eps)` spread over the
/// set and `eps` over its complement, uniform when the set covers every action.
fn noisy_best_response(n: usize, br: &[usize], eps: f64) -> Strategy {
    if br.len() == n {
        return Strategy::uniform(n);
    }
    let off = eps / (n - br.len()) as f64;
    let on = (1.0 - eps) / br.len() as f64;
    let mut probs = vec![off; n];
    for &a in br {
        probs[a] = on;
    }
    Strategy::from_raw(probs)
}

/// Per-level Level-K strategies for both players, computed jointly.
pub fn level_k_levels(game: &Game, row: &LevelKParams, col: &LevelKParams, tol: f64) -> Result<(Vec<Strategy>, Vec<Strategy>)> {
    row.validate()?;
    col.validate()?;
    if row.k_hat() != col.k_hat() {
        return Err(invalid(format!("k_hat mismatch: {} vs {}", row.k_hat(), col.k_hat())));
    }
    Ok(level_k_levels_unchecked(game, &row.eps, &col.eps, row.k_hat(), tol))
}

pub(crate) fn level_k_levels_unchecked(game: &Game, row_eps: &[f64], col_eps: &[f64], k_hat: usize, tol: f64) -> (Vec<Strategy>, Vec<Strategy>) {
    let (n, m) = game.shape();
    let mut rows = vec![Strategy::uniform(n)];
    let mut cols = vec![Strategy::uniform(m)];
    for k in 1..k_hat {
        let br_row = best_response_unchecked(game, PlayerRole::Row, cols[k - 1].probs(), tol);
        let br_col = best_response_unchecked(game, PlayerRole::Column, rows[k - 1].probs(), tol);
        rows.push(noisy_best_response(n, &br_row, row_eps[k - 1]));
        cols.push(noisy_best_response(m, &br_col, col_eps[k - 1]));
    }
    (rows, cols)
}

/// Level-K profiles `(row, column)`.
pub fn level_k_profiles(game: &Game, row: &LevelKParams, col: &LevelKParams, tol: f64) -> Result<(LevelProfile, LevelProfile)> {
    let (rows, cols) = level_k_levels(game, row, col, tol)?;
    let row_agg = aggregate_strategy(&rows, &row.alpha)?;
    let col_agg = aggregate_strategy(&cols, &col.alpha)?;
    Ok((
        LevelProfile { level_strategies: rows, level_weights: row.alpha.clone(), aggregate: row_agg },
        LevelProfile { level_strategies: cols, level_weights: col.alpha.clone(), aggregate: col_agg },
    ))
}

pub fn level_k_profile(game: &Game, role: PlayerRole, params: &LevelKParams, opp_params: &LevelKParams, tol: f64) -> Result<LevelProfile> {
    match role {
        PlayerRole::Row => level_k_profiles(game, params, opp_params, tol).map(|p| p.0),
        PlayerRole::Column => level_k_profiles(game, opp_params, params, tol).map(|p| p.1),
    }
}

/// Per-level Poisson-CH strategies for both players.
pub fn poisson_levels(
    game: &Game,
    row: &PoissonParams,
    col: &PoissonParams,
    tol: f64,
    beliefs: BeliefWeights,
) -> Result<(Vec<Strategy>, Vec<Strategy>)> {
    row.validate()?;
    col.validate()?;
    if row.k_hat != col.k_hat {
        return Err(invalid(format!("k_hat mismatch: {} vs {}", row.k_hat, col.k_hat)));
    }
    Ok(poisson_levels_unchecked(game, row.lambda, col.lambda, row.k_hat, tol, beliefs))
}

pub(crate) fn poisson_levels_unchecked(
    game: &Game,
    row_lambda: f64,
    col_lambda: f64,
    k_hat: usize,
    tol: f64,
    beliefs: BeliefWeights,
) -> (Vec<Strategy>, Vec<Strategy>) {
    let (n, m) = game.shape();
    let (row_belief, col_belief) = match beliefs {
        BeliefWeights::Own => (row_lambda, col_lambda),
        BeliefWeights::Opponent => (col_lambda, row_lambda),
    };
    // Weights over 0..k_hat; the believed mixture at level k renormalizes the first k of them.
    let row_f = poisson_weights_unchecked(row_belief, k_hat);
    let col_f = poisson_weights_unchecked(col_belief, k_hat);
    let mut rows = vec![Strategy::uniform(n)];
    let mut cols = vec![Strategy::uniform(m)];
    for k in 1..k_hat {
        let row_view = believed_mixture(&cols, &row_f[..k], m);
        let col_view = believed_mixture(&rows, &col_f[..k], n);
        let br_row = best_response_unchecked(game, PlayerRole::Row, &row_view, tol);
        let br_col = best_response_unchecked(game, PlayerRole::Column, &col_view, tol);
        rows.push(Strategy::uniform_over(n, &br_row));
        cols.push(Strategy::uniform_over(m, &br_col));
    }
    (rows, cols)
}

fn believed_mixture(levels: &[Strategy], f: &[f64], dim: usize) -> Vec<f64> {
    let total: f64 = f.iter().sum();
    let weights: Vec<f64> = f.iter().map(|x| x / total).collect();
    mix(&levels[..f.len()], &weights, dim)
}

/// Poisson-CH profiles `(row, column)`.
pub fn poisson_profiles(
    game: &Game,
    row: &PoissonParams,
    col: &PoissonParams,
    tol: f64,
    beliefs: BeliefWeights,
) -> Result<(LevelProfile, LevelProfile)> {
    let (rows, cols) = poisson_levels(game, row, col, tol, beliefs)?;
    let row_w = poisson_weights_unchecked(row.lambda, row.k_hat);
    let col_w = poisson_weights_unchecked(col.lambda, col.k_hat);
    let row_agg = aggregate_strategy(&rows, &row_w)?;
    let col_agg = aggregate_strategy(&cols, &col_w)?;
    Ok((
        LevelProfile { level_strategies: rows, level_weights: row_w, aggregate: row_agg },
        LevelProfile { level_strategies: cols, level_weights: col_w, aggregate: col_agg },
    ))
}

pub fn poisson_profile(game: &Game, role: PlayerRole, params: &PoissonParams, opp_params: &PoissonParams, tol: f64) -> Result<LevelProfile> {
    match role {
        PlayerRole::Row => poisson_profiles(game, params, opp_params, tol, BeliefWeights::Own).map(|p| p.0),
        PlayerRole::Column => poisson_profiles(game, opp_params, params, tol, BeliefWeights::Own).map(|p| p.1),
    }
}
