//! Brute-force reference implementations, written from the model
//! definitions and sharing no code with the library.

#![allow(dead_code)]

use cogh_core::Game;

/// `u[own][opp]` for the row player (`column = false`) or the column player.
pub fn own_matrix(game: &Game, column: bool) -> Vec<Vec<f64>> {
    let (n, m) = game.shape();
    if column {
        (0..m).map(|b| (0..n).map(|a| game.col_payoff()[a][b]).collect()).collect()
    } else {
        game.row_payoff().to_vec()
    }
}

pub fn action_values(u: &[Vec<f64>], opp: &[f64]) -> Vec<f64> {
    u.iter()
        .map(|row| {
            let mut v = 0.0;
            for j in 0..opp.len() {
                v += opp[j] * row[j];
            }
            v
        })
        .collect()
}

pub fn br_set(u: &[Vec<f64>], opp: &[f64], tol: f64) -> Vec<usize> {
    let v = action_values(u, opp);
    let mut best = v[0];
    for &x in &v {
        if x > best {
            best = x;
        }
    }
    (0..v.len()).filter(|&a| v[a] >= best - tol).collect()
}

pub fn noisy(n: usize, br: &[usize], eps: f64) -> Vec<f64> {
    if br.len() == n {
        return vec![1.0 / n as f64; n];
    }
    (0..n)
        .map(|a| if br.contains(&a) { (1.0 - eps) / br.len() as f64 } else { eps / (n - br.len()) as f64 })
        .collect()
}

/// Level strategies for both players; `eps[k - 1]` is level k's error rate.
pub fn level_k(game: &Game, row_eps: &[f64], col_eps: &[f64], k_hat: usize, tol: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (n, m) = game.shape();
    let (ur, uc) = (own_matrix(game, false), own_matrix(game, true));
    let mut rows = vec![vec![1.0 / n as f64; n]];
    let mut cols = vec![vec![1.0 / m as f64; m]];
    for k in 1..k_hat {
        let r = noisy(n, &br_set(&ur, &cols[k - 1], tol), row_eps[k - 1]);
        let c = noisy(m, &br_set(&uc, &rows[k - 1], tol), col_eps[k - 1]);
        rows.push(r);
        cols.push(c);
    }
    (rows, cols)
}

pub fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    let mut fact = 1.0;
    for i in 1..=k {
        fact *= i as f64;
    }
    (-lambda).exp() * lambda.powi(k as i32) / fact
}

pub fn truncated_poisson(lambda: f64, k_hat: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k_hat).map(|k| poisson_pmf(lambda, k)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|p| p / total).collect()
}

fn mixture(levels: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut out = vec![0.0; levels[0].len()];
    for (s, w) in levels.iter().zip(weights) {
        for a in 0..out.len() {
            out[a] += s[a] * w / total;
        }
    }
    out
}

/// Poisson-CH level strategies; each player's beliefs use `belief_*` rates.
pub fn poisson(game: &Game, belief_row: f64, belief_col: f64, k_hat: usize, tol: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (n, m) = game.shape();
    let (ur, uc) = (own_matrix(game, false), own_matrix(game, true));
    let uniform_over = |dim: usize, br: &[usize]| -> Vec<f64> {
        (0..dim).map(|a| if br.contains(&a) { 1.0 / br.len() as f64 } else { 0.0 }).collect()
    };
    let mut rows = vec![vec![1.0 / n as f64; n]];
    let mut cols = vec![vec![1.0 / m as f64; m]];
    for k in 1..k_hat {
        let fr: Vec<f64> = (0..k).map(|h| poisson_pmf(belief_row, h)).collect();
        let fc: Vec<f64> = (0..k).map(|h| poisson_pmf(belief_col, h)).collect();
        let r = uniform_over(n, &br_set(&ur, &mixture(&cols, &fr), tol));
        let c = uniform_over(m, &br_set(&uc, &mixture(&rows, &fc), tol));
        rows.push(r);
        cols.push(c);
    }
    (rows, cols)
}

pub fn aggregate(levels: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; levels[0].len()];
    for (s, w) in levels.iter().zip(weights) {
        for a in 0..out.len() {
            out[a] += s[a] * w;
        }
    }
    out
}
