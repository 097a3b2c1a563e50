//! Evaluation harness: any-mixture return comparisons, exploitability,
//! relative population performance, divergence matrices between populations,
//! and posterior-weighted divergence curves, plus the CSV emitters for all of
//! them.

use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::best_response::{best_response_to_mixture, exact_best_response, expected_value};
use crate::error::{Error, Result};
use crate::game::new_game;
use crate::meta::solve_zero_sum_nash;
use crate::policy::{
    aggregate_mixture, sample_action, ActionDistribution, MixtureWeights, PopulationSnapshot,
    TabularPolicy,
};
use crate::posterior::PosteriorState;
use crate::rng::RngForge;
use crate::trainer::{dirichlet_draw, ConditionalPolicyStore, NASH_TOL};

/// Shannon entropy in nats, with 0 ln 0 = 0.
pub fn entropy(sigma: &MixtureWeights) -> f64 {
    sigma
        .weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum()
}

/// How candidate returns are measured: exactly, or by sampled episodes as in
/// the original protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    MonteCarlo(usize),
}

/// The four policies compared against each sampled opponent mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    ExactBr,
    Informed,
    Uninformed,
    NeMixture,
}

impl Candidate {
    pub const ALL: [Candidate; 4] =
        [Candidate::ExactBr, Candidate::Informed, Candidate::Uninformed, Candidate::NeMixture];

    pub fn as_str(self) -> &'static str {
        match self {
            Candidate::ExactBr => "exact_br",
            Candidate::Informed => "informed",
            Candidate::Uninformed => "uninformed",
            Candidate::NeMixture => "ne_mixture",
        }
    }

    fn index(self) -> usize {
        match self {
            Candidate::ExactBr => 0,
            Candidate::Informed => 1,
            Candidate::Uninformed => 2,
            Candidate::NeMixture => 3,
        }
    }
}

/// One sampled opponent mixture and the candidates' returns against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub entropy: f64,
    /// Returns indexed as [`Candidate::ALL`].
    pub returns: [f64; 4],
}

impl SampleRecord {
    pub fn ret(&self, c: Candidate) -> f64 {
        self.returns[c.index()]
    }
}

/// All samples drawn at one Dirichlet concentration level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub alpha: f64,
    pub samples: Vec<SampleRecord>,
}

impl LevelReport {
    pub fn mean_entropy(&self) -> f64 {
        self.samples.iter().map(|s| s.entropy).sum::<f64>() / self.samples.len() as f64
    }

    pub fn mean_return(&self, c: Candidate) -> f64 {
        self.samples.iter().map(|s| s.ret(c)).sum::<f64>() / self.samples.len() as f64
    }

    pub fn stderr(&self, c: Candidate) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean_return(c);
        let var = self.samples.iter().map(|s| (s.ret(c) - mean).powi(2)).sum::<f64>()
            / (n as f64 - 1.0);
        (var / n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnyMixtureReport {
    pub mode: EvalMode,
    pub levels: Vec<LevelReport>,
}

/// Draws `samples_per_level` opponent mixtures per concentration level and
/// scores four candidates against each: a fresh exact best response, the
/// store policy at the true mixture (informed), the store policy at the
/// uniform mixture over effective policies (uninformed), and the population's
/// equilibrium mixture.
pub fn any_mixture_experiment(
    pop: &PopulationSnapshot,
    store: &ConditionalPolicyStore,
    levels: &[f64],
    samples_per_level: usize,
    mode: EvalMode,
    forge: &RngForge,
) -> Result<AnyMixtureReport> {
    if levels.is_empty() {
        return Err(Error::InvalidSpec("empty concentration level list".to_string()));
    }
    if samples_per_level == 0 {
        return Err(Error::InvalidSpec("samples_per_level must be at least 1".to_string()));
    }
    let n = pop.len();
    let effective = pop.effective_indices();
    let sigma_bar = MixtureWeights::uniform_over(n, &effective);
    let uninformed = store.lookup_conditional(&sigma_bar)?.1.clone();
    let ne = solve_zero_sum_nash(pop.payoff_matrix(), NASH_TOL)?.strategy;
    let ne_aggregate = aggregate_mixture(pop.policies(), &ne)?;

    let mut report = AnyMixtureReport { mode, levels: Vec::with_capacity(levels.len()) };
    for (level, &alpha) in levels.iter().enumerate() {
        let mut samples = Vec::with_capacity(samples_per_level);
        for s in 0..samples_per_level {
            let mut rng = forge.fork(&format!("any-mixture/level{level}/sample{s}"));
            let vals = dirichlet_draw(effective.len(), alpha, &mut rng)?;
            let sigma = MixtureWeights::embed(&vals, &effective, n)?;
            let opponent = aggregate_mixture(pop.policies(), &sigma)?;
            let (br, br_value) = exact_best_response(&opponent)?;
            let informed = store.lookup_conditional(&sigma)?.1;

            let returns = match mode {
                EvalMode::Exact => [
                    br_value,
                    expected_value(informed, &opponent)?,
                    expected_value(&uninformed, &opponent)?,
                    bilinear_value(pop, &ne, &sigma),
                ],
                EvalMode::MonteCarlo(episodes) => {
                    let mut rollout_rng =
                        forge.fork(&format!("any-mixture/level{level}/sample{s}/rollouts"));
                    [
                        mc_return(&br, &opponent, episodes, &mut rollout_rng)?,
                        mc_return(informed, &opponent, episodes, &mut rollout_rng)?,
                        mc_return(&uninformed, &opponent, episodes, &mut rollout_rng)?,
                        mc_return(&ne_aggregate, &opponent, episodes, &mut rollout_rng)?,
                    ]
                }
            };
            samples.push(SampleRecord { entropy: entropy(&sigma), returns });
        }
        report.levels.push(LevelReport { alpha, samples });
    }
    Ok(report)
}

/// sigma_a' U sigma_b: exact value of one mixture against another over the
/// same population.
fn bilinear_value(pop: &PopulationSnapshot, a: &MixtureWeights, b: &MixtureWeights) -> f64 {
    pop.payoff_matrix()
        .against(b)
        .iter()
        .zip(a.weights())
        .map(|(row_value, w)| row_value * w)
        .sum()
}

/// One sampled playthrough of `p0` (seat 0) against `p1` (seat 1).
pub fn rollout_return(
    p0: &TabularPolicy,
    p1: &TabularPolicy,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut state = new_game(p0.spec())?;
    while !state.is_terminal() {
        let d0 = p0
            .distribution(&state.infostate_key(0))
            .ok_or_else(|| Error::MissingKey(state.infostate_key(0).as_str().to_string()))?;
        let d1 = p1
            .distribution(&state.infostate_key(1))
            .ok_or_else(|| Error::MissingKey(state.infostate_key(1).as_str().to_string()))?;
        let a = sample_action(d0, rng);
        let b = sample_action(d1, rng);
        state = state.apply_joint_action(a, b)?.0;
    }
    state.terminal_return()
}

fn mc_return(
    p0: &TabularPolicy,
    p1: &TabularPolicy,
    episodes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut total = 0.0;
    for _ in 0..episodes {
        total += rollout_return(p0, p1, rng)?;
    }
    Ok(total / episodes as f64)
}

/// Value of the exact best response against the population mixture; zero
/// exactly when the mixture is an equilibrium of the restricted game.
pub fn exploitability(sigma: &MixtureWeights, pop: &PopulationSnapshot) -> Result<f64> {
    Ok(best_response_to_mixture(pop, sigma)?.1)
}

/// Relative population performance: the value p' U q of the cross-population
/// zero-sum game at a certified equilibrium.
pub fn rpp(u_cross: &[Vec<f64>], tol: f64) -> Result<f64> {
    let sol = crate::nash::solve_matrix_game(u_cross)?;
    let (row_gap, col_gap) = sol.gaps(u_cross);
    if row_gap > tol || col_gap > tol {
        return Err(Error::Convergence { gap: row_gap.max(col_gap), tol });
    }
    let mut value = 0.0;
    for (i, p) in sol.row_strategy.iter().enumerate() {
        for (j, q) in sol.col_strategy.iter().enumerate() {
            value += p * q * u_cross[i][j];
        }
    }
    Ok(value)
}

/// Cross-population payoff matrix: entry (i, j) is the exact value of row
/// population's policy i against column population's policy j.
pub fn cross_payoff_matrix(
    rows: &[TabularPolicy],
    cols: &[TabularPolicy],
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let mut row = Vec::with_capacity(cols.len());
        for c in cols {
            row.push(expected_value(r, c)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// Jensen-Shannon divergence between two action distributions, in nats.
pub fn jsd(p: &ActionDistribution, q: &ActionDistribution) -> f64 {
    let mut actions: Vec<u8> = p.entries().iter().map(|&(a, _)| a).collect();
    actions.extend(q.entries().iter().map(|&(a, _)| a));
    actions.sort_unstable();
    actions.dedup();
    let mut total = 0.0;
    for a in actions {
        let pp = p.prob(a);
        let qq = q.prob(a);
        let m = 0.5 * (pp + qq);
        if pp > 0.0 {
            total += 0.5 * pp * (pp / m).ln();
        }
        if qq > 0.0 {
            total += 0.5 * qq * (qq / m).ln();
        }
    }
    total.clamp(0.0, 2f64.ln())
}

/// Matrix of expected per-decision Jensen-Shannon divergences between two
/// populations' policies, under the row policies' own trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceMatrix {
    values: Vec<Vec<f64>>,
    episodes: usize,
}

impl DivergenceMatrix {
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn num_rows(&self) -> usize {
        self.values.len()
    }

    pub fn num_cols(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    /// Column j as a vector over row indices.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }
}

/// Estimates D[i][j]: row policy i plays `episodes` games against the column
/// population's uniform effective mixture, and at every decision the
/// divergence between row policy i's and column policy j's action
/// distributions at that observation is averaged.
pub fn jsd_matrix(
    pop_row: &PopulationSnapshot,
    pop_col: &PopulationSnapshot,
    episodes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DivergenceMatrix> {
    if pop_row.spec() != pop_col.spec() {
        return Err(Error::SpecMismatch("divergence across different games".to_string()));
    }
    if episodes == 0 {
        return Err(Error::InvalidSpec("episodes must be at least 1".to_string()));
    }
    let col_bar = MixtureWeights::uniform_over(pop_col.len(), &pop_col.effective_indices());
    let opponent = aggregate_mixture(pop_col.policies(), &col_bar)?;

    let nr = pop_row.len();
    let nc = pop_col.len();
    let mut values = vec![vec![0.0; nc]; nr];
    for (i, row_policy) in pop_row.policies().iter().enumerate() {
        let mut decisions = 0usize;
        for _ in 0..episodes {
            let mut state = new_game(pop_row.spec())?;
            while !state.is_terminal() {
                let key = state.infostate_key(0);
                let row_dist = row_policy
                    .distribution(&key)
                    .ok_or_else(|| Error::MissingKey(key.as_str().to_string()))?;
                for (j, col_policy) in pop_col.policies().iter().enumerate() {
                    let col_dist = col_policy
                        .distribution(&key)
                        .ok_or_else(|| Error::MissingKey(key.as_str().to_string()))?;
                    values[i][j] += jsd(row_dist, col_dist);
                }
                decisions += 1;
                let okey = state.infostate_key(1);
                let odist = opponent
                    .distribution(&okey)
                    .ok_or_else(|| Error::MissingKey(okey.as_str().to_string()))?;
                let a = sample_action(row_dist, rng);
                let b = sample_action(odist, rng);
                state = state.apply_joint_action(a, b)?.0;
            }
        }
        for v in &mut values[i] {
            *v /= decisions as f64;
        }
    }
    Ok(DivergenceMatrix { values, episodes })
}

/// Posterior-weighted divergence against one opponent, by turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorWeightedCurve {
    /// values[t] = mean over episodes of posterior_t' D[:, j]; index 0 is the
    /// prior.
    pub values: Vec<f64>,
    /// Episodes still running at each turn (constant here: episodes have a
    /// fixed length).
    pub active_episodes: Vec<usize>,
}

/// Simulates `observer` (seat 0, typically the uninformed store policy)
/// against `opponent` (seat 1) and tracks the analytical posterior over the
/// row population after each turn. The curve averages posterior' D[:, j]
/// across episodes; the prior is uniform over the row population's effective
/// policies.
pub fn posterior_weighted_divergence(
    d: &DivergenceMatrix,
    pop_row: &PopulationSnapshot,
    observer: &TabularPolicy,
    opponent: &TabularPolicy,
    j: usize,
    episodes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PosteriorWeightedCurve> {
    if d.num_rows() != pop_row.len() {
        return Err(Error::LengthMismatch(format!(
            "divergence matrix has {} rows for a population of {}",
            d.num_rows(),
            pop_row.len()
        )));
    }
    if j >= d.num_cols() {
        return Err(Error::LengthMismatch(format!(
            "column {j} out of range for {} columns",
            d.num_cols()
        )));
    }
    if episodes == 0 {
        return Err(Error::InvalidSpec("episodes must be at least 1".to_string()));
    }
    let spec = pop_row.spec();
    let column = d.column(j);
    let prior = MixtureWeights::uniform_over(pop_row.len(), &pop_row.effective_indices());
    let turns = spec.num_cards as usize;
    let mut sums = vec![0.0; turns + 1];
    for _ in 0..episodes {
        let mut state = new_game(spec)?;
        let mut belief = PosteriorState::new(spec, prior.clone());
        sums[0] += weighted_column(&prior, &column);
        for t in 1..=turns {
            let key = state.infostate_key(0);
            let d0 = observer
                .distribution(&key)
                .ok_or_else(|| Error::MissingKey(key.as_str().to_string()))?;
            let okey = state.infostate_key(1);
            let d1 = opponent
                .distribution(&okey)
                .ok_or_else(|| Error::MissingKey(okey.as_str().to_string()))?;
            let a = sample_action(d0, rng);
            let b = sample_action(d1, rng);
            let (next, w) = state.apply_joint_action(a, b)?;
            belief = belief.update(pop_row.policies(), a, w)?;
            sums[t] += weighted_column(belief.posterior(), &column);
            state = next;
        }
    }
    Ok(PosteriorWeightedCurve {
        values: sums.into_iter().map(|s| s / episodes as f64).collect(),
        active_episodes: vec![episodes; turns + 1],
    })
}

fn weighted_column(weights: &MixtureWeights, column: &[f64]) -> f64 {
    weights.weights().iter().zip(column).map(|(w, d)| w * d).sum()
}

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either input has no rank variance.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "rank correlation needs paired samples");
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx <= 0.0 || vy <= 0.0 {
        return 0.0;
    }
    cov / (vx.sqrt() * vy.sqrt())
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// One-sided binomial sign test: probability of at least `successes` heads in
/// `trials` fair coin flips.
pub fn sign_test_p_value(successes: usize, trials: usize) -> f64 {
    assert!(successes <= trials, "more successes than trials");
    let mut p = 0.0;
    for k in successes..=trials {
        let mut term = 0.5f64.powi(trials as i32);
        for i in 0..k {
            term *= (trials - i) as f64 / (k - i) as f64;
        }
        p += term;
    }
    p.min(1.0)
}

pub fn any_mixture_csv(report: &AnyMixtureReport) -> String {
    let mut out = String::from("level,alpha,entropy,candidate,mean_return,stderr\n");
    for (level, lr) in report.levels.iter().enumerate() {
        for c in Candidate::ALL {
            let _ = writeln!(
                out,
                "{level},{},{},{},{},{}",
                lr.alpha,
                lr.mean_entropy(),
                c.as_str(),
                lr.mean_return(c),
                lr.stderr(c)
            );
        }
    }
    out
}

pub fn matrix_csv(values: &[Vec<f64>]) -> String {
    let mut out = String::from("i,j,value\n");
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let _ = writeln!(out, "{i},{j},{v}");
        }
    }
    out
}

pub fn exploitability_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("iteration,value\n");
    for (iteration, value) in points {
        let _ = writeln!(out, "{iteration},{value}");
    }
    out
}

pub fn rpp_csv(value: f64) -> String {
    format!("rpp\n{value}\n")
}

pub fn posterior_weighted_csv(curve: &PosteriorWeightedCurve) -> String {
    let mut out = String::from("turn,value,active_episodes\n");
    for (t, (v, n)) in curve.values.iter().zip(&curve.active_episodes).enumerate() {
        let _ = writeln!(out, "{t},{v},{n}");
    }
    out
}
