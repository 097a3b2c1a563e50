//! Zero-sum matrix game solving with a dense primal simplex method.
//!
//! The payoff matrix is shifted positive, the column player's bounded LP is
//! solved directly (max 1'y subject to U'y <= 1, y >= 0) and the row player's
//! maximin strategy is read off the slack reduced costs. Bland's rule keeps
//! the pivoting finite. Matrices here are tiny (population sizes), so a dense
//! tableau is the simplest sound tool.

use crate::error::{Error, Result};

/// Equilibrium of a two-player zero-sum matrix game: payoffs `u[i][j]` flow
/// to the row player, who maximizes.
#[derive(Debug, Clone)]
pub struct MatrixGameSolution {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub value: f64,
}

impl MatrixGameSolution {
    /// Worst-case slack of each strategy against a best-responding opponent:
    /// (row gap, column gap), both ~0 at an exact equilibrium.
    pub fn gaps(&self, u: &[Vec<f64>]) -> (f64, f64) {
        let m = u.len();
        let n = u[0].len();
        let mut col_payoffs = vec![0.0; n];
        for (i, row) in u.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                col_payoffs[j] += self.row_strategy[i] * e;
            }
        }
        let row_worst = col_payoffs.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut row_payoffs = vec![0.0; m];
        for (i, row) in u.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                row_payoffs[i] += self.col_strategy[j] * e;
            }
        }
        let col_worst = row_payoffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (self.value - row_worst, col_worst - self.value)
    }
}

const PIVOT_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 10_000;

/// Solves the matrix game exactly (up to floating point): returns maximin
/// row strategy, minimax column strategy, and the game value.
pub fn solve_matrix_game(u: &[Vec<f64>]) -> Result<MatrixGameSolution> {
    let m = u.len();
    if m == 0 {
        return Err(Error::InvalidSpec("empty payoff matrix".to_string()));
    }
    let n = u[0].len();
    if n == 0 {
        return Err(Error::InvalidSpec("payoff matrix has no columns".to_string()));
    }
    let mut lo = f64::INFINITY;
    for row in u {
        if row.len() != n {
            return Err(Error::LengthMismatch("ragged payoff matrix".to_string()));
        }
        for &e in row {
            if !e.is_finite() {
                return Err(Error::InvalidSpec(format!("non-finite payoff {e}")));
            }
            lo = lo.min(e);
        }
    }
    let shift = 1.0 - lo;

    // Tableau for: maximize sum(y) s.t. (U + shift) y <= 1, y >= 0.
    let cols = n + m + 1;
    let rhs = cols - 1;
    let mut t = vec![vec![0.0f64; cols]; m];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = u[i][j] + shift;
        }
        t[i][n + i] = 1.0;
        t[i][rhs] = 1.0;
    }
    let mut cost = vec![0.0f64; cols];
    for c in cost.iter_mut().take(n) {
        *c = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    for _pivots in 0..MAX_PIVOTS {
        // Bland's rule: smallest improving column index.
        let Some(e) = (0..n + m).find(|&j| cost[j] < -PIVOT_EPS) else {
            let obj = cost[rhs];
            if obj <= PIVOT_EPS {
                return Err(Error::Convergence { gap: f64::INFINITY, tol: 0.0 });
            }
            let v_shifted = 1.0 / obj;
            let mut q = vec![0.0; n];
            for i in 0..m {
                if basis[i] < n {
                    q[basis[i]] = t[i][rhs] * v_shifted;
                }
            }
            let mut p: Vec<f64> = (0..m).map(|i| cost[n + i] * v_shifted).collect();
            normalize_simplex(&mut p);
            normalize_simplex(&mut q);
            return Ok(MatrixGameSolution {
                row_strategy: p,
                col_strategy: q,
                value: v_shifted - shift,
            });
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i][e];
            if a > PIVOT_EPS {
                let ratio = t[i][rhs] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((l, best)) => {
                        if ratio < best - 1e-12
                            || (ratio <= best + 1e-12 && basis[i] < basis[l])
                        {
                            Some((i, ratio))
                        } else {
                            Some((l, best))
                        }
                    }
                };
            }
        }
        let Some((l, _)) = leave else {
            return Err(Error::Convergence { gap: f64::INFINITY, tol: 0.0 });
        };
        let piv = t[l][e];
        for v in t[l].iter_mut() {
            *v /= piv;
        }
        for i in 0..m {
            if i != l {
                let f = t[i][e];
                if f != 0.0 {
                    for j in 0..cols {
                        t[i][j] -= f * t[l][j];
                    }
                }
            }
        }
        let f = cost[e];
        if f != 0.0 {
            for j in 0..cols {
                cost[j] -= f * t[l][j];
            }
        }
        basis[l] = e;
    }
    Err(Error::Convergence { gap: f64::INFINITY, tol: 0.0 })
}

fn normalize_simplex(v: &mut [f64]) {
    let mut sum = 0.0;
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
        sum += *x;
    }
    if sum > 0.0 {
        for x in v.iter_mut() {
            *x /= sum;
        }
    }
}
