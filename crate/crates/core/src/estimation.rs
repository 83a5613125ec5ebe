//! Maximum-likelihood fitting of Level-K and Poisson-CH parameters.
//!
//! Parameters are searched in an unconstrained space and mapped back
//! through smooth squashing functions, so every returned parameter set is
//! feasible by construction:
//!
//! * error rates: logistic sigmoid onto `[0, 1]`
//! * level weights: softmax onto the simplex
//! * Poisson rates: sigmoid onto `[ln LAMBDA_MIN, ln LAMBDA_MAX]`, then `exp`
//!
//! Each fit runs `restarts` independent local searches from random starts.
//! Restart `r` draws its start from a ChaCha8 stream keyed by `(seed, r)`,
//! so the sequential and parallel schedules agree bit for bit.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{Game, Strategy, DEFAULT_BR_TOL};
use crate::models::{
    level_k_levels_unchecked, level_k_profiles, poisson_levels_unchecked, poisson_profiles, poisson_weights_unchecked,
    BeliefWeights, LevelKParams, LevelProfile, PoissonParams,
};
use crate::optim::{minimize, LocalSearchConfig};
use crate::parallel::{map_indexed, ExecMode};
use crate::store::{unit_f64, ActionLog};

pub const LAMBDA_MIN: f64 = 1e-4;
pub const LAMBDA_MAX: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    LevelK,
    PoissonCh,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::LevelK => "level-k",
            ModelKind::PoissonCh => "poisson",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "level-k" | "levelk" => Ok(ModelKind::LevelK),
            "poisson" | "poisson-ch" => Ok(ModelKind::PoissonCh),
            _ => Err(invalid(format!("unknown model kind {s:?}; expected level-k or poisson"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub prob_floor: f64,
    pub seed: u64,
    pub beliefs: BeliefWeights,
    pub exec: ExecMode,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 10,
            max_iterations: 500,
            convergence_tol: 1e-8,
            prob_floor: 1e-9,
            seed: 0,
            beliefs: BeliefWeights::Own,
            exec: ExecMode::Parallel,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        OptimizerConfig { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        if !(self.prob_floor > 0.0 && self.prob_floor <= 1e-3) {
            return Err(invalid(format!("prob_floor must lie in (0, 1e-3], got {}", self.prob_floor)));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(invalid("convergence_tol must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FittedParams {
    LevelK { row: LevelKParams, col: LevelKParams },
    Poisson { row: PoissonParams, col: PoissonParams },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model_kind: ModelKind,
    pub k_hat: usize,
    pub params: FittedParams,
    pub nll: f64,
    /// Row player's share of `nll`.
    pub row_nll: f64,
    /// Column player's share of `nll`.
    pub col_nll: f64,
    pub restarts_run: usize,
    pub best_restart_index: usize,
    pub converged: bool,
    pub seed: u64,
}

impl FitResult {
    /// Level profiles `(row, col)` implied by the fitted parameters on `game`.
    pub fn profiles(&self, game: &Game, beliefs: BeliefWeights) -> Result<(LevelProfile, LevelProfile)> {
        match &self.params {
            FittedParams::LevelK { row, col } => level_k_profiles(game, row, col, DEFAULT_BR_TOL),
            FittedParams::Poisson { row, col } => poisson_profiles(game, row, col, DEFAULT_BR_TOL, beliefs),
        }
    }
}

fn floored_ln(p: f64, floor: f64) -> f64 {
    p.max(floor).ln()
}

/// Summed negative log-likelihood of every observed action under the two
/// aggregate strategies, with probabilities floored at `floor`.
pub fn negative_log_likelihood(log: &ActionLog, game: &Game, profiles: (&LevelProfile, &LevelProfile), floor: f64) -> Result<f64> {
    let (n, m) = game.shape();
    let (row, col) = profiles;
    if row.aggregate.len() != n || col.aggregate.len() != m {
        return Err(invalid("profiles do not match the game's action counts"));
    }
    let mut total = 0.0;
    for r in &log.records {
        if r.row_action >= n || r.col_action >= m {
            return Err(Error::DataValidation(format!(
                "game {} round {}: action pair ({}, {}) outside {n}x{m}",
                log.game_id, r.round, r.row_action, r.col_action
            )));
        }
        total -= floored_ln(row.aggregate[r.row_action], floor) + floored_ln(col.aggregate[r.col_action], floor);
    }
    Ok(total)
}

/// Sufficient statistics of one log: per-action counts for both players.
struct Observation<'a> {
    game: &'a Game,
    row_counts: Vec<f64>,
    col_counts: Vec<f64>,
}

fn counts_nll(strategy: &[f64], counts: &[f64], floor: f64) -> f64 {
    strategy.iter().zip(counts).filter(|(_, c)| **c > 0.0).map(|(p, c)| -c * floored_ln(*p, floor)).sum()
}

fn mix_levels(levels: &[Strategy], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; levels[0].len()];
    for (s, w) in levels.iter().zip(weights) {
        for (o, p) in out.iter_mut().zip(s.probs()) {
            *o += w * p;
        }
    }
    out
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

fn lambda_from(u: f64) -> f64 {
    let (lo, hi) = (LAMBDA_MIN.ln(), LAMBDA_MAX.ln());
    (lo + (hi - lo) * sigmoid(u)).exp().clamp(LAMBDA_MIN, LAMBDA_MAX)
}

fn lambda_to(lambda: f64) -> f64 {
    let (lo, hi) = (LAMBDA_MIN.ln(), LAMBDA_MAX.ln());
    logit((lambda.ln() - lo) / (hi - lo))
}

fn standard_normal(rng: &mut impl RngCore) -> f64 {
    // Box-Muller; 1 - u keeps the log argument in (0, 1]
    let u1 = 1.0 - unit_f64(rng);
    let u2 = unit_f64(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Unconstrained coordinates of one Level-K agent: `k_hat - 1` error logits then `k_hat` weight logits.
fn level_k_block(k_hat: usize) -> usize {
    2 * k_hat - 1
}

fn decode_level_k(x: &[f64], k_hat: usize) -> (LevelKParams, LevelKParams) {
    let b = level_k_block(k_hat);
    let agent = |blk: &[f64]| LevelKParams {
        eps: blk[..k_hat - 1].iter().map(|&u| sigmoid(u)).collect(),
        alpha: softmax(&blk[k_hat - 1..]),
    };
    (agent(&x[..b]), agent(&x[b..2 * b]))
}

fn random_level_k_start(rng: &mut impl RngCore, k_hat: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * level_k_block(k_hat));
    for _ in 0..2 {
        for _ in 1..k_hat {
            x.push(logit(0.5 * unit_f64(rng)));
        }
        for _ in 0..k_hat {
            x.push(standard_normal(rng));
        }
    }
    x
}

fn random_poisson_start(rng: &mut impl RngCore) -> Vec<f64> {
    let (lo, hi) = (0.05f64.ln(), 5.0f64.ln());
    (0..2).map(|_| lambda_to((lo + (hi - lo) * unit_f64(rng)).exp())).collect()
}

/// Extends a smaller-`k_hat` Level-K optimum to `k_hat` levels with
/// vanishing weight on the new levels.
fn pad_level_k_start(x: &[f64], from: usize, to: usize) -> Vec<f64> {
    let b = level_k_block(from);
    let mut out = Vec::with_capacity(2 * level_k_block(to));
    for blk in [&x[..b], &x[b..2 * b]] {
        out.extend_from_slice(&blk[..from - 1]);
        out.extend(std::iter::repeat(0.0).take(to - from));
        let max = blk[from - 1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.extend_from_slice(&blk[from - 1..]);
        out.extend(std::iter::repeat(max - 700.0).take(to - from));
    }
    out
}

struct Objective<'a> {
    kind: ModelKind,
    k_hat: usize,
    data: Vec<Observation<'a>>,
    floor: f64,
    beliefs: BeliefWeights,
}

impl Objective<'_> {
    fn dim(&self) -> usize {
        match self.kind {
            ModelKind::LevelK => 2 * level_k_block(self.k_hat),
            ModelKind::PoissonCh => 2,
        }
    }

    /// `(row_nll, col_nll)` at unconstrained point `x`.
    fn split_loss(&self, x: &[f64]) -> (f64, f64) {
        let k = self.k_hat;
        let (mut row_total, mut col_total) = (0.0, 0.0);
        match self.kind {
            ModelKind::LevelK => {
                let (row, col) = decode_level_k(x, k);
                for obs in &self.data {
                    let (rl, cl) = level_k_levels_unchecked(obs.game, &row.eps, &col.eps, k, DEFAULT_BR_TOL);
                    row_total += counts_nll(&mix_levels(&rl, &row.alpha), &obs.row_counts, self.floor);
                    col_total += counts_nll(&mix_levels(&cl, &col.alpha), &obs.col_counts, self.floor);
                }
            }
            ModelKind::PoissonCh => {
                let (lr, lc) = (lambda_from(x[0]), lambda_from(x[1]));
                let (wr, wc) = (poisson_weights_unchecked(lr, k), poisson_weights_unchecked(lc, k));
                for obs in &self.data {
                    let (rl, cl) = poisson_levels_unchecked(obs.game, lr, lc, k, DEFAULT_BR_TOL, self.beliefs);
                    row_total += counts_nll(&mix_levels(&rl, &wr), &obs.row_counts, self.floor);
                    col_total += counts_nll(&mix_levels(&cl, &wc), &obs.col_counts, self.floor);
                }
            }
        }
        (row_total, col_total)
    }

    fn loss(&self, x: &[f64]) -> f64 {
        let (r, c) = self.split_loss(x);
        r + c
    }

    fn params(&self, x: &[f64]) -> FittedParams {
        match self.kind {
            ModelKind::LevelK => {
                let (row, col) = decode_level_k(x, self.k_hat);
                FittedParams::LevelK { row, col }
            }
            ModelKind::PoissonCh => FittedParams::Poisson {
                row: PoissonParams { k_hat: self.k_hat, lambda: lambda_from(x[0]) },
                col: PoissonParams { k_hat: self.k_hat, lambda: lambda_from(x[1]) },
            },
        }
    }

    fn random_start(&self, rng: &mut impl RngCore) -> Vec<f64> {
        match self.kind {
            ModelKind::LevelK => random_level_k_start(rng, self.k_hat),
            ModelKind::PoissonCh => random_poisson_start(rng),
        }
    }
}

fn build_objective<'a>(kind: ModelKind, data: &[(&ActionLog, &'a Game)], k_hat: usize, cfg: &OptimizerConfig) -> Result<Objective<'a>> {
    cfg.validate()?;
    if k_hat == 0 {
        return Err(invalid("k_hat must be at least 1"));
    }
    if data.is_empty() {
        return Err(invalid("no logs to fit"));
    }
    let mut obs = Vec::with_capacity(data.len());
    for (log, game) in data {
        if log.records.is_empty() {
            return Err(invalid(format!("log for {} is empty", log.game_id)));
        }
        let (n, m) = game.shape();
        let (row_counts, col_counts) = log.action_counts(n, m)?;
        obs.push(Observation { game, row_counts, col_counts });
    }
    Ok(Objective { kind, k_hat, data: obs, floor: cfg.prob_floor, beliefs: cfg.beliefs })
}

fn run_fit(objective: &Objective<'_>, cfg: &OptimizerConfig, extra_start: Option<Vec<f64>>) -> Result<(FitResult, Vec<f64>)> {
    let mut starts: Vec<Vec<f64>> =
        (0..cfg.restarts).map(|r| objective.random_start(&mut restart_rng(cfg.seed, r))).collect();
    starts.extend(extra_start);
    debug_assert!(starts.iter().all(|s| s.len() == objective.dim()));

    let local = LocalSearchConfig { max_iterations: cfg.max_iterations, tol: cfg.convergence_tol };
    let loss = |x: &[f64]| objective.loss(x);
    let runs = map_indexed(cfg.exec, starts.len(), |i| minimize(&loss, &starts[i], local));

    let mut best: Option<usize> = None;
    for (i, r) in runs.iter().enumerate() {
        if r.value.is_finite() && best.map_or(true, |b| r.value < runs[b].value) {
            best = Some(i);
        }
    }
    let best = best.ok_or_else(|| Error::OptimizationFailure("loss was non-finite from every start".into()))?;
    let run = &runs[best];
    let (row_nll, col_nll) = objective.split_loss(&run.x);
    let fit = FitResult {
        model_kind: objective.kind,
        k_hat: objective.k_hat,
        params: objective.params(&run.x),
        nll: row_nll + col_nll,
        row_nll,
        col_nll,
        restarts_run: starts.len(),
        best_restart_index: best,
        converged: run.converged,
        seed: cfg.seed,
    };
    Ok((fit, run.x.clone()))
}

/// Fits one parameter set to several logs at once, summing their losses.
pub fn fit_pooled(kind: ModelKind, data: &[(&ActionLog, &Game)], k_hat: usize, cfg: &OptimizerConfig) -> Result<FitResult> {
    let objective = build_objective(kind, data, k_hat, cfg)?;
    run_fit(&objective, cfg, None).map(|(fit, _)| fit)
}

pub fn fit(kind: ModelKind, log: &ActionLog, game: &Game, k_hat: usize, cfg: &OptimizerConfig) -> Result<FitResult> {
    fit_pooled(kind, &[(log, game)], k_hat, cfg)
}

pub fn fit_level_k(log: &ActionLog, game: &Game, k_hat: usize, cfg: &OptimizerConfig) -> Result<FitResult> {
    fit(ModelKind::LevelK, log, game, k_hat, cfg)
}

pub fn fit_poisson(log: &ActionLog, game: &Game, k_hat: usize, cfg: &OptimizerConfig) -> Result<FitResult> {
    fit(ModelKind::PoissonCh, log, game, k_hat, cfg)
}

/// Fits every `k_hat` in `k_hats` (strictly ascending) with the same seed.
///
/// For Level-K the optimum at each depth, padded with near-zero weight on the
/// new levels, is added as one extra start for the next depth, which makes
/// the NLL non-increasing in `k_hat`. A violation beyond
/// `10 * convergence_tol` is logged as a warning.
pub fn nll_sweep(
    kind: ModelKind,
    log: &ActionLog,
    game: &Game,
    k_hats: &[usize],
    cfg: &OptimizerConfig,
) -> Result<BTreeMap<usize, FitResult>> {
    nll_sweep_pooled(kind, &[(log, game)], k_hats, cfg)
}

pub fn nll_sweep_pooled(
    kind: ModelKind,
    data: &[(&ActionLog, &Game)],
    k_hats: &[usize],
    cfg: &OptimizerConfig,
) -> Result<BTreeMap<usize, FitResult>> {
    if k_hats.is_empty() {
        return Err(invalid("k_hats must be nonempty"));
    }
    if k_hats.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!("k_hats must be strictly ascending: {k_hats:?}")));
    }
    let mut out = BTreeMap::new();
    let mut previous: Option<(usize, Vec<f64>, f64)> = None;
    for &k in k_hats {
        let objective = build_objective(kind, data, k, cfg)?;
        let seeded = match (&previous, kind) {
            (Some((pk, x, _)), ModelKind::LevelK) => Some(pad_level_k_start(x, *pk, k)),
            _ => None,
        };
        let (fit, x) = run_fit(&objective, cfg, seeded)?;
        if let Some((pk, _, prev_nll)) = &previous {
            if fit.nll > prev_nll + 10.0 * cfg.convergence_tol {
                log::warn!("nll increased from k_hat={pk} ({prev_nll}) to k_hat={k} ({})", fit.nll);
            }
        }
        previous = Some((k, x, fit.nll));
        out.insert(k, fit);
    }
    Ok(out)
}

/// NLL of `log` under fixed parameters.
pub fn nll_at(log: &ActionLog, game: &Game, params: &FittedParams, cfg: &OptimizerConfig) -> Result<f64> {
    let (row, col) = match params {
        FittedParams::LevelK { row, col } => level_k_profiles(game, row, col, DEFAULT_BR_TOL)?,
        FittedParams::Poisson { row, col } => poisson_profiles(game, row, col, DEFAULT_BR_TOL, cfg.beliefs)?,
    };
    negative_log_likelihood(log, game, (&row, &col), cfg.prob_floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{synthesize_log, Corpus, GeneratorSpec, Mechanism};
    use crate::store::ActionRecord;
    use approx::assert_abs_diff_eq;

    fn uniform_profile(n: usize, k: usize) -> LevelProfile {
        LevelProfile {
            level_strategies: vec![Strategy::uniform(n); k],
            level_weights: vec![1.0 / k as f64; k],
            aggregate: Strategy::uniform(n),
        }
    }

    fn one_round(game: &Game, a: usize, b: usize) -> ActionLog {
        ActionLog {
            game_id: game.id().into(),
            row_model: "r".into(),
            col_model: "c".into(),
            mechanism: Mechanism::Baseline,
            records: vec![ActionRecord::from_game(game, 1, a, b)],
        }
    }

    #[test]
    fn nll_uniform_one_round() {
        let corpus = Corpus::builtin();
        let g = corpus.game("paper-01").unwrap();
        let p = uniform_profile(2, 2);
        let v = negative_log_likelihood(&one_round(g, 0, 1), g, (&p, &p), 1e-9).unwrap();
        assert_abs_diff_eq!(v, 2.0 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn nll_certain_and_floored() {
        let corpus = Corpus::builtin();
        let g = corpus.game("paper-01").unwrap();
        let mut sure = uniform_profile(2, 1);
        sure.aggregate = Strategy::pure(2, 0);
        let v = negative_log_likelihood(&one_round(g, 0, 0), g, (&sure, &sure), 1e-9).unwrap();
        assert_eq!(v, 0.0);
        let v = negative_log_likelihood(&one_round(g, 1, 0), g, (&sure, &sure), 1e-9).unwrap();
        assert_abs_diff_eq!(v, -(1e-9f64).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(v, 20.7233, epsilon = 1e-4);
    }

    #[test]
    fn nll_rejects_out_of_range_action() {
        let corpus = Corpus::builtin();
        let g = corpus.game("paper-01").unwrap();
        let mut log = one_round(g, 0, 0);
        log.records[0].col_action = 5;
        let p = uniform_profile(2, 1);
        assert!(matches!(negative_log_likelihood(&log, g, (&p, &p), 1e-9), Err(Error::DataValidation(_))));
    }

    #[test]
    fn empty_log_rejected() {
        let corpus = Corpus::builtin();
        let g = corpus.game("paper-01").unwrap();
        let mut log = one_round(g, 0, 0);
        log.records.clear();
        assert!(matches!(fit_level_k(&log, g, 4, &OptimizerConfig::default()), Err(Error::InvalidArgument(_))));
        assert!(matches!(fit_poisson(&log, g, 4, &OptimizerConfig::default()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn config_validation() {
        let corpus = Corpus::builtin();
        let g = corpus.game("paper-01").unwrap();
        let log = one_round(g, 0, 0);
        let bad = OptimizerConfig { restarts: 0, ..Default::default() };
        assert!(fit_poisson(&log, g, 4, &bad).is_err());
        let bad = OptimizerConfig { prob_floor: 0.1, ..Default::default() };
        assert!(fit_poisson(&log, g, 4, &bad).is_err());
    }

    #[test]
    fn single_round_poisson_is_finite() {
        let corpus = Corpus::builtin();
        let g = corpus.game("paper-13").unwrap();
        let fit = fit_poisson(&one_round(g, 2, 1), g, 4, &OptimizerConfig::with_seed(3)).unwrap();
        assert!(fit.nll.is_finite() && fit.nll >= 0.0);
    }

    #[test]
    fn dominant_play_pushes_mass_to_best_response() {
        let corpus = Corpus::builtin();
        let g = corpus.game("paper-01").unwrap();
        let log = ActionLog {
            game_id: g.id().into(),
            row_model: "r".into(),
            col_model: "c".into(),
            mechanism: Mechanism::Baseline,
            records: (1..=30).map(|t| ActionRecord::from_game(g, t, 0, 0)).collect(),
        };
        let fit = fit_level_k(&log, g, 4, &OptimizerConfig::with_seed(5)).unwrap();
        let (r, c) = fit.profiles(g, BeliefWeights::Own).unwrap();
        assert!(r.aggregate[0] >= 0.95, "{:?}", r.aggregate);
        assert!(c.aggregate[0] >= 0.95, "{:?}", c.aggregate);
    }

    #[test]
    fn level_one_only_model_is_uniform() {
        let corpus = Corpus::builtin();
        let g = corpus.game("paper-11").unwrap();
        let log = synthesize_log(g, &GeneratorSpec::Uniform, &GeneratorSpec::Fixed(vec![0.2, 0.3, 0.5]), 50, 1).unwrap();
        let sweep = nll_sweep(ModelKind::LevelK, &log, g, &[1], &OptimizerConfig::with_seed(1)).unwrap();
        let expect = 50.0 * (3f64.ln() + 3f64.ln());
        assert_abs_diff_eq!(sweep[&1].nll, expect, epsilon = 1e-9 * expect);
    }

    #[test]
    fn padding_preserves_loss() {
        let corpus = Corpus::builtin();
        let g = corpus.game("paper-11").unwrap();
        let gen = GeneratorSpec::parse("level-k:0.2,0.5,0.3;0.1,0.2", 3).unwrap();
        let log = synthesize_log(g, &gen, &gen, 100, 2).unwrap();
        let cfg = OptimizerConfig::default();
        let o3 = build_objective(ModelKind::LevelK, &[(&log, g)], 3, &cfg).unwrap();
        let o5 = build_objective(ModelKind::LevelK, &[(&log, g)], 5, &cfg).unwrap();
        let x = o3.random_start(&mut restart_rng(9, 0));
        let padded = pad_level_k_start(&x, 3, 5);
        assert_abs_diff_eq!(o3.loss(&x), o5.loss(&padded), epsilon = 1e-9);
    }

    #[test]
    fn reparameterization_is_feasible() {
        for u in [-1e6, -50.0, -1.0, 0.0, 2.0, 80.0, 1e6] {
            let l = lambda_from(u);
            assert!((LAMBDA_MIN..=LAMBDA_MAX).contains(&l));
            let e = sigmoid(u);
            assert!((0.0..=1.0).contains(&e));
        }
        let w = softmax(&[1000.0, -1000.0, 3.0]);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lambda_from(lambda_to(1.2)), 1.2, epsilon = 1e-9);
    }
}
