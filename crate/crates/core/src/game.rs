//! Two-player normal-form games, mixed strategies, and best responses.
//!
//! Payoffs are stored row-major: `row_payoff[i][j]` and `col_payoff[i][j]`
//! are the utilities when the row player picks action `i` and the column
//! player picks action `j`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default tolerance for best-response ties.
pub const DEFAULT_BR_TOL: f64 = 1e-9;

/// Tolerance for the sum-to-one check on strategies.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlayerRole {
    Row,
    Column,
}

impl PlayerRole {
    pub fn opponent(self) -> Self {
        match self {
            PlayerRole::Row => PlayerRole::Column,
            PlayerRole::Column => PlayerRole::Row,
        }
    }
}

/// A probability distribution over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strategy(Vec<f64>);

impl Strategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("strategy must have at least one action"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(invalid(format!("strategy has a negative or non-finite entry: {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(invalid(format!("strategy sums to {total}, expected 1")));
        }
        Ok(Strategy(probs))
    }

    pub fn uniform(n: usize) -> Self {
        Strategy(vec![1.0 / n as f64; n])
    }

    pub fn pure(n: usize, action: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[action] = 1.0;
        Strategy(probs)
    }

    /// Uniform over `support`, zero elsewhere.
    pub fn uniform_over(n: usize, support: &[usize]) -> Self {
        let mut probs = vec![0.0; n];
        let w = 1.0 / support.len() as f64;
        for &a in support {
            probs[a] = w;
        }
        Strategy(probs)
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        debug_assert!(Strategy::new(probs.clone()).is_ok(), "invalid strategy {probs:?}");
        Strategy(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for Strategy {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    id: String,
    row_actions: Vec<String>,
    col_actions: Vec<String>,
    row_payoff: Vec<Vec<f64>>,
    col_payoff: Vec<Vec<f64>>,
    symmetric: bool,
}

impl Game {
    /// Builds a game, checking dimensions and finiteness. The symmetric flag
    /// is derived from the matrices.
    pub fn new(
        id: impl Into<String>,
        row_actions: Vec<String>,
        col_actions: Vec<String>,
        row_payoff: Vec<Vec<f64>>,
        col_payoff: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let id = id.into();
        let n = row_actions.len();
        let m = col_actions.len();
        if n < 2 || m < 2 {
            return Err(invalid(format!("game {id}: each player needs at least two actions")));
        }
        for (name, mat) in [("row_payoff", &row_payoff), ("col_payoff", &col_payoff)] {
            if mat.len() != n || mat.iter().any(|r| r.len() != m) {
                return Err(invalid(format!("game {id}: {name} is not {n}x{m}")));
            }
            if mat.iter().flatten().any(|p| !p.is_finite()) {
                return Err(invalid(format!("game {id}: {name} has a non-finite payoff")));
            }
        }
        let symmetric = is_symmetric(&row_payoff, &col_payoff);
        Ok(Game { id, row_actions, col_actions, row_payoff, col_payoff, symmetric })
    }

    /// Convenience constructor with letter labels A, B, C, ...
    pub fn from_matrices(id: impl Into<String>, row_payoff: Vec<Vec<f64>>, col_payoff: Vec<Vec<f64>>) -> Result<Self> {
        let n = row_payoff.len();
        let m = row_payoff.first().map_or(0, Vec::len);
        Game::new(id, letter_labels(n), letter_labels(m), row_payoff, col_payoff)
    }

    /// Symmetric game whose column payoffs are the transpose of `row_payoff`.
    pub fn symmetric_from(id: impl Into<String>, row_payoff: Vec<Vec<f64>>) -> Result<Self> {
        let n = row_payoff.len();
        if row_payoff.iter().any(|r| r.len() != n) {
            return Err(invalid("symmetric game requires a square matrix"));
        }
        let col = (0..n).map(|i| (0..n).map(|j| row_payoff[j][i]).collect()).collect();
        Game::from_matrices(id, row_payoff, col)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn row_actions(&self) -> &[String] {
        &self.row_actions
    }

    pub fn col_actions(&self) -> &[String] {
        &self.col_actions
    }

    pub fn row_payoff(&self) -> &[Vec<f64>] {
        &self.row_payoff
    }

    pub fn col_payoff(&self) -> &[Vec<f64>] {
        &self.col_payoff
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `(n, m)`: row and column action counts.
    pub fn shape(&self) -> (usize, usize) {
        (self.row_actions.len(), self.col_actions.len())
    }

    pub fn action_count(&self, role: PlayerRole) -> usize {
        match role {
            PlayerRole::Row => self.row_actions.len(),
            PlayerRole::Column => self.col_actions.len(),
        }
    }

    pub fn action_labels(&self, role: PlayerRole) -> &[String] {
        match role {
            PlayerRole::Row => &self.row_actions,
            PlayerRole::Column => &self.col_actions,
        }
    }

    /// Payoff to `role` when it plays `own` and the opponent plays `opp`.
    #[inline]
    pub fn payoff(&self, role: PlayerRole, own: usize, opp: usize) -> f64 {
        match role {
            PlayerRole::Row => self.row_payoff[own][opp],
            PlayerRole::Column => self.col_payoff[opp][own],
        }
    }

    /// Realized payoffs `(row, col)` for the joint action `(row_action, col_action)`.
    pub fn cell(&self, row_action: usize, col_action: usize) -> (f64, f64) {
        (self.row_payoff[row_action][col_action], self.col_payoff[row_action][col_action])
    }

    pub(crate) fn with_id(mut self, id: String) -> Self {
        self.id = id;
        self
    }
}

fn is_symmetric(row: &[Vec<f64>], col: &[Vec<f64>]) -> bool {
    let n = row.len();
    if row.iter().any(|r| r.len() != n) {
        return false;
    }
    (0..n).all(|i| (0..n).all(|j| col[i][j] == row[j][i]))
}

pub fn letter_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                ((b'A' + i as u8) as char).to_string()
            } else {
                format!("A{i}")
            }
        })
        .collect()
}

fn check_dims(game: &Game, role: PlayerRole, own: Option<&Strategy>, opp: &Strategy) -> Result<()> {
    if let Some(own) = own {
        if own.len() != game.action_count(role) {
            return Err(invalid(format!(
                "own strategy has {} entries, {:?} player has {} actions",
                own.len(),
                role,
                game.action_count(role)
            )));
        }
    }
    if opp.len() != game.action_count(role.opponent()) {
        return Err(invalid(format!(
            "opponent strategy has {} entries, opponent has {} actions",
            opp.len(),
            game.action_count(role.opponent())
        )));
    }
    Ok(())
}

pub fn expected_payoff(game: &Game, role: PlayerRole, own: &Strategy, opp: &Strategy) -> Result<f64> {
    check_dims(game, role, Some(own), opp)?;
    let mut total = 0.0;
    for (i, &pi) in own.probs().iter().enumerate() {
        for (j, &qj) in opp.probs().iter().enumerate() {
            total += pi * qj * game.payoff(role, i, j);
        }
    }
    Ok(total)
}

/// Expected payoff of each pure action of `role` against `opp`.
pub fn pure_payoffs(game: &Game, role: PlayerRole, opp: &Strategy) -> Result<Vec<f64>> {
    check_dims(game, role, None, opp)?;
    Ok(pure_payoffs_unchecked(game, role, opp.probs()))
}

pub(crate) fn pure_payoffs_unchecked(game: &Game, role: PlayerRole, opp: &[f64]) -> Vec<f64> {
    (0..game.action_count(role))
        .map(|a| opp.iter().enumerate().map(|(b, &q)| q * game.payoff(role, a, b)).sum())
        .collect()
}

/// All pure actions whose expected payoff is within `tol` of the best.
pub fn best_response_set(game: &Game, role: PlayerRole, opp: &Strategy, tol: f64) -> Result<Vec<usize>> {
    if !(tol >= 0.0) {
        return Err(invalid(format!("tolerance must be non-negative, got {tol}")));
    }
    check_dims(game, role, None, opp)?;
    Ok(best_response_unchecked(game, role, opp.probs(), tol))
}

pub(crate) fn best_response_unchecked(game: &Game, role: PlayerRole, opp: &[f64], tol: f64) -> Vec<usize> {
    let values = pure_payoffs_unchecked(game, role, opp);
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= best - tol)
        .map(|(a, _)| a)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibria {
    /// Pure profiles first, then the interior mixed profile if any.
    pub profiles: Vec<(Strategy, Strategy)>,
    /// Set when payoff ties make the equilibrium set a continuum; only pure
    /// corners are reported in that case.
    pub degenerate: bool,
}

/// Nash equilibria of a 2x2 game: pure cells by enumeration, plus the
/// interior mixed profile from the indifference conditions.
pub fn solve_2x2(game: &Game) -> Result<Equilibria> {
    if game.shape() != (2, 2) {
        let (n, m) = game.shape();
        return Err(Error::UnsupportedGame(format!("solve_2x2 needs a 2x2 game, {} is {n}x{m}", game.id())));
    }
    let r = game.row_payoff();
    let c = game.col_payoff();
    let eq_tol = 1e-9;

    let mut profiles = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let row_ok = r[i][j] >= r[1 - i][j] - eq_tol;
            let col_ok = c[i][j] >= c[i][1 - j] - eq_tol;
            if row_ok && col_ok {
                profiles.push((Strategy::pure(2, i), Strategy::pure(2, j)));
            }
        }
    }

    let degenerate = r[0][0] == r[1][0] || r[0][1] == r[1][1] || c[0][0] == c[0][1] || c[1][0] == c[1][1];
    if !degenerate {
        // Row mixes to make the column player indifferent, and vice versa.
        let p_den = c[0][0] - c[1][0] - c[0][1] + c[1][1];
        let q_den = r[0][0] - r[0][1] - r[1][0] + r[1][1];
        if p_den != 0.0 && q_den != 0.0 {
            let p = (c[1][1] - c[1][0]) / p_den;
            let q = (r[1][1] - r[0][1]) / q_den;
            if p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0 {
                profiles.push((Strategy::from_raw(vec![p, 1.0 - p]), Strategy::from_raw(vec![q, 1.0 - q])));
            }
        }
    }
    Ok(Equilibria { profiles, degenerate })
}

/// Replaces every payoff `p` with `scale * p + shift`.
pub fn affine_transform(game: &Game, scale: f64, shift: f64) -> Result<Game> {
    if !(scale > 0.0) || !scale.is_finite() || !shift.is_finite() {
        return Err(invalid(format!("affine transform needs finite scale > 0, got scale={scale} shift={shift}")));
    }
    let map = |m: &[Vec<f64>]| -> Vec<Vec<f64>> { m.iter().map(|r| r.iter().map(|p| scale * p + shift).collect()).collect() };
    let g = Game::new(
        game.id(),
        game.row_actions.clone(),
        game.col_actions.clone(),
        map(&game.row_payoff),
        map(&game.col_payoff),
    )?;
    Ok(g.with_id(format!("{}~affine({scale},{shift})", game.id())))
}
