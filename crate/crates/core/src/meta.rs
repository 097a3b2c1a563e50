//! Empirical meta-game machinery: exact payoff matrices over populations,
//! certified zero-sum Nash solving, and the meta-graph of training priors
//! that assigns each population slot the equilibrium of its predecessors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nash::solve_matrix_game;
use crate::policy::{MixtureWeights, TabularPolicy};

/// Exact expected returns U[i][j] = J(pi_i, pi_j); antisymmetric with zero
/// diagonal by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PayoffMatrix {
    rows: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    /// Validates shape and antisymmetry (within 1e-9), then stores the
    /// exactly antisymmetrized matrix.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidSpec("empty payoff matrix".to_string()));
        }
        for row in &rows {
            if row.len() != n {
                return Err(Error::LengthMismatch("payoff matrix is not square".to_string()));
            }
        }
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let delta = (rows[i][j] + rows[j][i]).abs();
                if delta > 1e-9 {
                    return Err(Error::NotAntisymmetric { i, j, delta });
                }
                let e = (rows[i][j] - rows[j][i]) / 2.0;
                out[i][j] = e;
                out[j][i] = -e;
            }
            if rows[i][i].abs() > 1e-9 {
                return Err(Error::NotAntisymmetric { i, j: i, delta: rows[i][i].abs() });
            }
        }
        Ok(PayoffMatrix { rows: out })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Leading k-by-k submatrix.
    pub fn leading(&self, k: usize) -> PayoffMatrix {
        let rows = self.rows[..k].iter().map(|r| r[..k].to_vec()).collect();
        PayoffMatrix { rows }
    }

    /// Payoff vector (U sigma): expected return of each pure row against the
    /// mixture sigma.
    pub fn against(&self, sigma: &MixtureWeights) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(sigma.weights()).map(|(e, w)| e * w).sum())
            .collect()
    }
}

/// Row-stochastic matrix of training priors: row i is the opponent mixture
/// slot i trains against, supported on strictly earlier slots (row 0 is the
/// fixed seed's self-play convention).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetaGraph {
    rows: Vec<Vec<f64>>,
}

impl MetaGraph {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidSpec("empty meta-graph".to_string()));
        }
        let mut out = Vec::with_capacity(n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch("meta-graph is not square".to_string()));
            }
            let support_end = if i == 0 { 1 } else { i };
            for (j, &w) in row.iter().enumerate() {
                if j >= support_end && w.abs() > 1e-9 {
                    return Err(Error::InvalidMixture(format!(
                        "meta-graph row {i} has mass {w} on slot {j}"
                    )));
                }
            }
            let mut cleaned = row;
            for w in cleaned.iter_mut().skip(support_end) {
                *w = 0.0;
            }
            MixtureWeights::new(cleaned.clone())?;
            out.push(cleaned);
        }
        Ok(MetaGraph { rows: out })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> MixtureWeights {
        MixtureWeights::new(self.rows[i].clone()).expect("validated at construction")
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// A certified equilibrium of the restricted meta-game.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NashCertificate {
    pub strategy: MixtureWeights,
    pub value: f64,
    /// max_i (U sigma)_i - value: how much any pure row gains over the
    /// certified value when playing against sigma.
    pub gap: f64,
}

/// Computes the exact payoff matrix of a population: the upper triangle is
/// evaluated and reflected, so antisymmetry is structural.
pub fn eval_payoff_matrix(policies: &[TabularPolicy]) -> Result<PayoffMatrix> {
    if policies.is_empty() {
        return Err(Error::InvalidSpec("empty population".to_string()));
    }
    let n = policies.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = crate::best_response::expected_value(&policies[i], &policies[j])?;
            rows[i][j] = v;
            rows[j][i] = -v;
        }
    }
    PayoffMatrix::new(rows)
}

/// Maximin strategy of the symmetric zero-sum meta-game, with a certified
/// exploitability gap. Fails if the certificate misses `tol`.
pub fn solve_zero_sum_nash(u: &PayoffMatrix, tol: f64) -> Result<NashCertificate> {
    let sol = solve_matrix_game(u.rows())?;
    let strategy = MixtureWeights::new(sol.row_strategy)?;
    let best_row =
        u.against(&strategy).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let gap = (best_row - sol.value).max(0.0);
    if gap > tol || sol.value.abs() > tol {
        return Err(Error::Convergence { gap: gap.max(sol.value.abs()), tol });
    }
    Ok(NashCertificate { strategy, value: sol.value, gap })
}

/// Meta-graph of the PSRO-Nash meta-graph solver: row i (for i >= 1) is the
/// certified equilibrium of the leading i-by-i payoff submatrix, zero-padded;
/// row 0 is one-hot on the seed slot.
pub fn psro_nash_meta_graph(u: &PayoffMatrix, tol: f64) -> Result<MetaGraph> {
    let n = u.len();
    let mut rows = Vec::with_capacity(n);
    let mut seed_row = vec![0.0; n];
    seed_row[0] = 1.0;
    rows.push(seed_row);
    for i in 1..n {
        let cert = solve_zero_sum_nash(&u.leading(i), tol)?;
        let mut row = cert.strategy.weights().to_vec();
        row.resize(n, 0.0);
        rows.push(row);
    }
    MetaGraph::new(rows)
}

/// Representative indices of the distinct meta-graph rows (first occurrence;
/// rows equal within 1e-9 elementwise are duplicates). Row 0 is always its
/// own representative: the seed slot holds a fixed policy rather than a
/// trained one, so a trained row that happens to equal the seed's self-play
/// row still denotes a different policy. Trained rows (indices >= 1)
/// deduplicate among themselves.
pub fn unique_rows(sigma: &MetaGraph) -> Vec<usize> {
    let n = sigma.len();
    let mut out = vec![0usize];
    for i in 1..n {
        let duplicate = out.iter().skip(1).any(|&j| {
            sigma.rows()[i]
                .iter()
                .zip(&sigma.rows()[j])
                .all(|(a, b)| (a - b).abs() <= 1e-9)
        });
        if !duplicate {
            out.push(i);
        }
    }
    out
}
