//! Population training loop: grows a policy population against the meta-graph
//! of prefix equilibria and fills a conditional best-response store over the
//! population simplex, using either an exact oracle or a tabular Q-learner as
//! the approximate-best-response operator.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::best_response::{mixture_best_response, mixture_value};
use crate::error::{Error, Result};
use crate::game::{new_game, GameSpec};
use crate::meta::{
    eval_payoff_matrix, psro_nash_meta_graph, solve_zero_sum_nash, unique_rows, MetaGraph,
};
use crate::policy::{
    sample_action, sample_categorical, uniform_random_policy, ActionDistribution, MixtureWeights,
    PopulationSnapshot, TabularPolicy,
};
use crate::rng::{fnv1a, RngForge, FNV_OFFSET};
use crate::table::GameTable;

/// Meta-game equilibria are accepted when the certificate gap is below this.
pub const NASH_TOL: f64 = 1e-6;

const ANCHOR_EQ_TOL: f64 = 1e-9;
const Q_FINAL_EXPLORATION: f64 = 0.05;
const Q_VISIT_TAU: f64 = 50.0;

/// Best-response operator plugged into the training loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbrKind {
    /// Exact extensive-form best response; zero slack.
    ExactOracle,
    /// Episodic tabular Q-learning with a fixed episode budget; never returns
    /// a policy worse than the previous one (checked by exact evaluation).
    TabularQLearner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    /// Probability of drawing the training prior from the simplex instead of
    /// the meta-graph rows.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Symmetric Dirichlet concentration for simplex draws.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_max_population")]
    pub max_population: usize,
    /// A new slot is added while the frontier best-response gain exceeds this.
    #[serde(default = "default_br_gain_threshold")]
    pub br_gain_threshold: f64,
    /// Barycentric grid resolution for store anchors (entries are multiples
    /// of 1/m over the effective policies).
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: usize,
    #[serde(default = "default_abr_kind")]
    pub abr_kind: AbrKind,
    /// Episodes per Q-learner invocation; ignored by the exact oracle.
    #[serde(default = "default_abr_budget")]
    pub abr_budget: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_epsilon() -> f64 {
    0.5
}
fn default_alpha() -> f64 {
    1.0
}
fn default_max_population() -> usize {
    8
}
fn default_br_gain_threshold() -> f64 {
    1e-3
}
fn default_grid_resolution() -> usize {
    4
}
fn default_abr_kind() -> AbrKind {
    AbrKind::ExactOracle
}
fn default_abr_budget() -> usize {
    50_000
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            epsilon: default_epsilon(),
            alpha: default_alpha(),
            max_population: default_max_population(),
            br_gain_threshold: default_br_gain_threshold(),
            grid_resolution: default_grid_resolution(),
            abr_kind: default_abr_kind(),
            abr_budget: default_abr_budget(),
            rng_seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidSpec(format!("epsilon {} not in [0,1]", self.epsilon)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidSpec(format!("alpha {} must be positive", self.alpha)));
        }
        if self.max_population == 0 {
            return Err(Error::InvalidSpec("max_population must be at least 1".to_string()));
        }
        if self.grid_resolution == 0 {
            return Err(Error::InvalidSpec("grid_resolution must be at least 1".to_string()));
        }
        if self.abr_kind == AbrKind::TabularQLearner && self.abr_budget == 0 {
            return Err(Error::InvalidSpec("abr_budget must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Map from anchor mixtures to their trained best-response policies. Anchors
/// are kept in lexicographic order so nearest-anchor ties resolve to the
/// lexicographically smallest anchor.
#[derive(Debug, Clone)]
pub struct ConditionalPolicyStore {
    spec: GameSpec,
    anchors: Vec<MixtureWeights>,
    policies: Vec<TabularPolicy>,
    fingerprints: Vec<Option<u64>>,
}

impl ConditionalPolicyStore {
    pub fn new(
        spec: GameSpec,
        anchors: Vec<MixtureWeights>,
        initial: &TabularPolicy,
    ) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::EmptyStore);
        }
        if initial.spec() != spec {
            return Err(Error::SpecMismatch("store seed policy is for a different game".into()));
        }
        let n = anchors.len();
        Ok(ConditionalPolicyStore {
            spec,
            anchors,
            policies: vec![initial.clone(); n],
            fingerprints: vec![None; n],
        })
    }

    /// Reassembles a store from saved anchors and policies. Training
    /// fingerprints start empty, so every anchor retrains on first use.
    pub fn from_parts(
        spec: GameSpec,
        anchors: Vec<MixtureWeights>,
        policies: Vec<TabularPolicy>,
    ) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::EmptyStore);
        }
        if anchors.len() != policies.len() {
            return Err(Error::LengthMismatch(format!(
                "{} anchors but {} policies",
                anchors.len(),
                policies.len()
            )));
        }
        let len = anchors[0].len();
        for a in &anchors {
            if a.len() != len {
                return Err(Error::LengthMismatch("ragged anchor set".to_string()));
            }
        }
        for p in &policies {
            if p.spec() != spec {
                return Err(Error::SpecMismatch("store policy is for a different game".into()));
            }
        }
        let n = anchors.len();
        Ok(ConditionalPolicyStore { spec, anchors, policies, fingerprints: vec![None; n] })
    }

    /// Rebuilds the store over a new anchor set (the population may have
    /// grown, so old anchors are zero-padded for comparison). Anchors present
    /// in the old set carry their policy and training fingerprint; new
    /// anchors warm-start from the L1-nearest old anchor and must retrain.
    pub fn reproject(&self, new_anchors: Vec<MixtureWeights>) -> Result<Self> {
        if new_anchors.is_empty() {
            return Err(Error::EmptyStore);
        }
        let len = new_anchors[0].len();
        let padded: Vec<MixtureWeights> =
            self.anchors.iter().map(|a| a.zero_padded(len)).collect();
        let mut policies = Vec::with_capacity(new_anchors.len());
        let mut fingerprints = Vec::with_capacity(new_anchors.len());
        for anchor in &new_anchors {
            if anchor.len() != len {
                return Err(Error::LengthMismatch("ragged anchor set".to_string()));
            }
            let carried = padded.iter().position(|old| {
                old.weights()
                    .iter()
                    .zip(anchor.weights())
                    .all(|(a, b)| (a - b).abs() <= ANCHOR_EQ_TOL)
            });
            match carried {
                Some(i) => {
                    policies.push(self.policies[i].clone());
                    fingerprints.push(self.fingerprints[i]);
                }
                None => {
                    let nearest = nearest_index(&padded, anchor);
                    policies.push(self.policies[nearest].clone());
                    fingerprints.push(None);
                }
            }
        }
        Ok(ConditionalPolicyStore {
            spec: self.spec,
            anchors: new_anchors,
            policies,
            fingerprints,
        })
    }

    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn anchors(&self) -> &[MixtureWeights] {
        &self.anchors
    }

    pub fn anchor(&self, i: usize) -> &MixtureWeights {
        &self.anchors[i]
    }

    pub fn policies(&self) -> &[TabularPolicy] {
        &self.policies
    }

    pub fn policy(&self, i: usize) -> &TabularPolicy {
        &self.policies[i]
    }

    pub fn fingerprint(&self, i: usize) -> Option<u64> {
        self.fingerprints[i]
    }

    pub fn set_policy(&mut self, i: usize, policy: TabularPolicy, fingerprint: u64) {
        self.policies[i] = policy;
        self.fingerprints[i] = Some(fingerprint);
    }

    /// Index and policy of the L1-nearest anchor to `sigma`.
    pub fn lookup_conditional(&self, sigma: &MixtureWeights) -> Result<(usize, &TabularPolicy)> {
        if self.anchors.is_empty() {
            return Err(Error::EmptyStore);
        }
        if sigma.len() != self.anchors[0].len() {
            return Err(Error::LengthMismatch(format!(
                "query over {} slots against anchors over {}",
                sigma.len(),
                self.anchors[0].len()
            )));
        }
        let idx = nearest_index(&self.anchors, sigma);
        Ok((idx, &self.policies[idx]))
    }
}

fn nearest_index(anchors: &[MixtureWeights], sigma: &MixtureWeights) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, a) in anchors.iter().enumerate() {
        let d = a.l1_distance(sigma);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn lex_less(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.total_cmp(y);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}

/// All length-`parts` vectors of non-negative integers summing to `total`,
/// in lexicographic order.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn recurse(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            recurse(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    let mut prefix = Vec::new();
    recurse(total, parts, &mut prefix, &mut out);
    out
}

/// The store's anchor set for the current meta-graph: the unique rows, plus
/// (when simplex sampling is active) the barycentric grid at resolution m
/// over the effective policies. Sorted lexicographically and deduplicated.
pub fn anchor_set(
    sigma: &MetaGraph,
    epsilon: f64,
    grid_resolution: usize,
) -> Result<Vec<MixtureWeights>> {
    let n = sigma.len();
    let uniq = unique_rows(sigma);
    let mut raw: Vec<Vec<f64>> = uniq.iter().map(|&i| sigma.rows()[i].clone()).collect();
    if epsilon > 0.0 {
        let m = grid_resolution;
        for comp in compositions(m, uniq.len()) {
            let vals: Vec<f64> = comp.iter().map(|&c| c as f64 / m as f64).collect();
            raw.push(MixtureWeights::embed(&vals, &uniq, n)?.weights().to_vec());
        }
    }
    raw.sort_by(|a, b| lex_less(a, b));
    let mut out: Vec<MixtureWeights> = Vec::with_capacity(raw.len());
    for cand in raw {
        let duplicate = out.iter().rev().take_while(|kept| {
            kept.weights()[0] >= cand[0] - ANCHOR_EQ_TOL
        });
        let mut is_dup = false;
        for kept in duplicate {
            if kept.weights().iter().zip(&cand).all(|(a, b)| (a - b).abs() <= ANCHOR_EQ_TOL) {
                is_dup = true;
                break;
            }
        }
        if !is_dup {
            out.push(MixtureWeights::new(cand)?);
        }
    }
    Ok(out)
}

/// One draw from a symmetric Dirichlet(alpha) over `k` coordinates.
pub fn dirichlet_draw(k: usize, alpha: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let gamma = Gamma::new(alpha, 1.0)
        .map_err(|e| Error::InvalidSpec(format!("bad Dirichlet concentration: {e}")))?;
    for _ in 0..100 {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return Ok(draws.iter().map(|d| d / total).collect());
        }
    }
    // Vanishingly small concentrations can underflow every draw.
    Ok(vec![1.0 / k as f64; k])
}

/// Training prior for one invocation: with probability ε, a symmetric
/// Dirichlet(α) draw over the effective policies embedded on their
/// representative indices; otherwise one of the unique meta-graph rows.
pub fn sample_opponent_prior(
    sigma: &MetaGraph,
    epsilon: f64,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<MixtureWeights> {
    let uniq = unique_rows(sigma);
    let k = uniq.len();
    if rng.random::<f64>() < epsilon {
        let vals = dirichlet_draw(k, alpha, rng)?;
        MixtureWeights::embed(&vals, &uniq, sigma.len())
    } else {
        let j = uniq[rng.random_range(0..k)];
        Ok(sigma.row(j))
    }
}

/// Exact-oracle instantiation of the best-response operator.
pub fn abr_exact(
    policies: &[TabularPolicy],
    sigma: &MixtureWeights,
) -> Result<(TabularPolicy, f64)> {
    mixture_best_response(policies, sigma)
}

/// Tabular Q-learning instantiation: plays `budget` episodes against
/// opponents drawn from the mixture, then extracts the greedy policy. The
/// returned policy never scores below `previous` against the target mixture
/// (both are evaluated exactly).
pub fn abr_tabular_q(
    policies: &[TabularPolicy],
    sigma: &MixtureWeights,
    budget: usize,
    previous: Option<&TabularPolicy>,
    rng: &mut ChaCha8Rng,
) -> Result<(TabularPolicy, f64)> {
    if policies.is_empty() {
        return Err(Error::InvalidSpec("empty population".to_string()));
    }
    if budget == 0 {
        return Err(Error::InvalidSpec("abr_budget must be at least 1".to_string()));
    }
    let spec = policies[0].spec();
    let table = GameTable::get(spec)?;
    let nk = table.num_keys();
    let mut q: Vec<Vec<f64>> = (0..nk).map(|id| vec![0.0; table.key_legal(id).len()]).collect();
    let mut visits: Vec<Vec<u32>> = (0..nk).map(|id| vec![0u32; table.key_legal(id).len()]).collect();

    let denom = budget.saturating_sub(1).max(1) as f64;
    for episode in 0..budget {
        let explore = 1.0 + (Q_FINAL_EXPLORATION - 1.0) * (episode as f64 / denom);
        let opp = &policies[sample_categorical(sigma.weights(), rng)];
        let mut state = new_game(spec)?;
        while !state.is_terminal() {
            let id = table
                .key_id(&state.infostate_key(0))
                .ok_or_else(|| Error::MissingKey(state.infostate_key(0).as_str().to_string()))?;
            let legal = table.key_legal(id);
            let a_idx = if rng.random::<f64>() < explore {
                rng.random_range(0..legal.len())
            } else {
                argmax_lowest(&q[id])
            };
            let okey = state.infostate_key(1);
            let odist = opp
                .distribution(&okey)
                .ok_or_else(|| Error::MissingKey(okey.as_str().to_string()))?;
            let b = sample_action(odist, rng);
            let (next, w) = state.apply_joint_action(legal[a_idx], b)?;
            let reward = f64::from(w) * f64::from(spec.point_card(state.turn()));
            let future = if next.is_terminal() {
                0.0
            } else {
                let nid = table
                    .key_id(&next.infostate_key(0))
                    .ok_or_else(|| Error::MissingKey(next.infostate_key(0).as_str().to_string()))?;
                q[nid].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            visits[id][a_idx] += 1;
            let step = 1.0 / (1.0 + f64::from(visits[id][a_idx]) / Q_VISIT_TAU);
            q[id][a_idx] += step * (reward + future - q[id][a_idx]);
            state = next;
        }
    }

    let greedy = TabularPolicy::from_fn(spec, |key, legal| {
        let id = table.key_id(key).expect("policy keys come from the same table");
        if visits[id].iter().all(|&v| v == 0) {
            ActionDistribution::uniform(legal)
        } else {
            ActionDistribution::deterministic(legal[argmax_lowest(&q[id])])
        }
    })?;
    let value = mixture_value(&greedy, policies, sigma)?;
    if let Some(prev) = previous {
        let prev_value = mixture_value(prev, policies, sigma)?;
        if prev_value > value {
            return Ok((prev.clone(), prev_value));
        }
    }
    Ok((greedy, value))
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn run_abr(
    kind: AbrKind,
    budget: usize,
    policies: &[TabularPolicy],
    sigma: &MixtureWeights,
    previous: Option<&TabularPolicy>,
    rng: &mut ChaCha8Rng,
) -> Result<(TabularPolicy, f64)> {
    match kind {
        AbrKind::ExactOracle => abr_exact(policies, sigma),
        AbrKind::TabularQLearner => abr_tabular_q(policies, sigma, budget, previous, rng),
    }
}

/// Fingerprint of an anchor's training target: the positively weighted slots
/// and their current policies. Stable across population growth because only
/// supported slots contribute.
fn target_fingerprint(sigma: &MixtureWeights, policies: &[TabularPolicy]) -> Result<u64> {
    let mut h = FNV_OFFSET;
    for (i, &w) in sigma.weights().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        h = fnv1a(&(i as u64).to_le_bytes(), h);
        h = fnv1a(&w.to_le_bytes(), h);
        h = fnv1a(policies[i].to_json_string()?.as_bytes(), h);
    }
    Ok(h)
}

/// One training round's record: the meta-game state after the round's
/// updates and the frontier best-response gain that decided expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub num_slots: usize,
    pub frontier_gain: f64,
    pub expanded: bool,
    pub payoff: Vec<Vec<f64>>,
    pub meta_graph: Vec<Vec<f64>>,
}

/// Output of [`train`]: the final population, the conditional store, and the
/// per-round history.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub snapshot: PopulationSnapshot,
    pub store: ConditionalPolicyStore,
    pub history: Vec<RoundRecord>,
}

/// Runs the full training loop on `spec`.
///
/// Each round: recompute the payoff matrix and meta-graph, re-project the
/// store onto the current anchor set, run one sampled invocation per anchor
/// plus a sweep over any anchors the samples missed, copy the meta-graph-row
/// anchors back into their population slots, and then best-respond to the
/// equilibrium of the updated meta-game. While that frontier gain exceeds
/// `br_gain_threshold` and the population is below `max_population`, the
/// frontier best response joins as a new slot; otherwise the loop stops.
pub fn train(config: &TrainerConfig, spec: GameSpec) -> Result<TrainResult> {
    config.validate()?;
    let forge = RngForge::new(config.rng_seed);
    let seed_policy = uniform_random_policy(spec)?;
    let mut policies: Vec<TabularPolicy> = vec![seed_policy.clone()];
    let mut store: Option<ConditionalPolicyStore> = None;
    let mut history: Vec<RoundRecord> = Vec::new();

    let mut round = 0;
    loop {
        let u = eval_payoff_matrix(&policies)?;
        let sigma = psro_nash_meta_graph(&u, NASH_TOL)?;
        let anchors = anchor_set(&sigma, config.epsilon, config.grid_resolution)?;
        let mut current = match store.take() {
            Some(s) => s.reproject(anchors)?,
            None => ConditionalPolicyStore::new(spec, anchors, &seed_policy)?,
        };

        let mut trained = vec![false; current.len()];
        for draw in 0..current.len() {
            let mut rng = forge.fork(&format!("round{round}/draw{draw}"));
            let sample = sample_opponent_prior(&sigma, config.epsilon, config.alpha, &mut rng)?;
            let (idx, _) = current.lookup_conditional(&sample)?;
            train_anchor(config, &mut current, idx, &policies, &mut rng)?;
            trained[idx] = true;
        }
        for idx in 0..current.len() {
            if !trained[idx] {
                let mut rng = forge.fork(&format!("round{round}/sweep{idx}"));
                train_anchor(config, &mut current, idx, &policies, &mut rng)?;
            }
        }

        for i in 1..policies.len() {
            let (idx, policy) = current.lookup_conditional(&sigma.row(i))?;
            debug_assert!(current.anchor(idx).l1_distance(&sigma.row(i)) <= 1e-6);
            policies[i] = policy.clone();
        }

        let u_after = eval_payoff_matrix(&policies)?;
        let sigma_after = psro_nash_meta_graph(&u_after, NASH_TOL)?;
        let frontier = solve_zero_sum_nash(&u_after, NASH_TOL)?;
        let mut rng = forge.fork(&format!("round{round}/frontier"));
        let (frontier_br, gain) = run_abr(
            config.abr_kind,
            config.abr_budget,
            &policies,
            &frontier.strategy,
            None,
            &mut rng,
        )?;

        let expand = gain > config.br_gain_threshold && policies.len() < config.max_population;
        history.push(RoundRecord {
            round,
            num_slots: policies.len(),
            frontier_gain: gain,
            expanded: expand,
            payoff: u_after.rows().to_vec(),
            meta_graph: sigma_after.rows().to_vec(),
        });

        if !expand {
            let snapshot = PopulationSnapshot::new(spec, policies, sigma_after, u_after)?;
            return Ok(TrainResult { snapshot, store: current, history });
        }
        policies.push(frontier_br);
        store = Some(current);
        round += 1;
    }
}

fn train_anchor(
    config: &TrainerConfig,
    store: &mut ConditionalPolicyStore,
    idx: usize,
    policies: &[TabularPolicy],
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let target = store.anchor(idx).clone();
    let fp = target_fingerprint(&target, policies)?;
    if config.abr_kind == AbrKind::ExactOracle && store.fingerprint(idx) == Some(fp) {
        return Ok(());
    }
    let previous = store.policy(idx).clone();
    let (policy, _) = run_abr(
        config.abr_kind,
        config.abr_budget,
        policies,
        &target,
        Some(&previous),
        rng,
    )?;
    store.set_policy(idx, policy, fp);
    Ok(())
}

/// Exploitability of the final equilibrium mixture, recomputed with an
/// independent exact best response.
pub fn final_gain(result: &TrainResult) -> Result<f64> {
    let cert = solve_zero_sum_nash(result.snapshot.payoff_matrix(), NASH_TOL)?;
    let (_, value) =
        mixture_best_response(result.snapshot.policies(), &cert.strategy)?;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::best_response::{exact_best_response, expected_value};

    fn meta(rows: Vec<Vec<f64>>) -> MetaGraph {
        MetaGraph::new(rows).unwrap()
    }

    #[test]
    fn compositions_count_matches_stars_and_bars() {
        assert_eq!(compositions(4, 2).len(), 5);
        assert_eq!(compositions(4, 8).len(), 330);
        assert_eq!(compositions(1, 3), vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert_eq!(compositions(3, 1), vec![vec![3]]);
    }

    #[test]
    fn anchor_set_without_sampling_is_the_unique_rows() {
        let sigma = meta(vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.25, 0.75, 0.0],
        ]);
        let anchors = anchor_set(&sigma, 0.0, 4).unwrap();
        assert_eq!(anchors.len(), 2);
        assert_eq!(anchors[0].weights(), &[0.25, 0.75, 0.0]);
        assert_eq!(anchors[1].weights(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn anchor_grid_covers_the_effective_simplex() {
        let sigma = meta(vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.5, 0.0],
        ]);
        // Row 2 duplicates row 1, so the effective indices are {0, 1, 3} and
        // the m = 2 grid has 6 points on them. Row 3 carries mass on the
        // non-representative slot 2, so it joins the anchor set verbatim; the
        // seed rows fold into the grid vertex e_0.
        let anchors = anchor_set(&sigma, 0.5, 2).unwrap();
        let expected: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.0, 0.5, 0.5, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0, 0.5],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ];
        let got: Vec<Vec<f64>> = anchors.iter().map(|a| a.weights().to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn prior_sampling_without_epsilon_returns_meta_rows() {
        let sigma = meta(vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.5, 0.5, 0.0],
        ]);
        let forge = RngForge::new(11);
        let mut rng = forge.fork("prior");
        let rows = sigma.rows();
        let mut seen = [0usize; 2];
        for _ in 0..500 {
            let draw = sample_opponent_prior(&sigma, 0.0, 1.0, &mut rng).unwrap();
            let w = draw.weights();
            if w == rows[0].as_slice() {
                seen[0] += 1;
            } else if w == rows[2].as_slice() {
                seen[1] += 1;
            } else {
                panic!("draw {w:?} is not a unique meta-graph row");
            }
        }
        assert!(seen[0] > 150 && seen[1] > 150, "draws {seen:?} should be near-uniform");
    }

    #[test]
    fn dirichlet_draws_match_the_flat_mean() {
        let sigma = meta(vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ]);
        let forge = RngForge::new(5);
        let mut rng = forge.fork("dirichlet");
        let trials = 10_000;
        let mut mean = vec![0.0; 3];
        for _ in 0..trials {
            let draw = sample_opponent_prior(&sigma, 1.0, 1.0, &mut rng).unwrap();
            let w = draw.weights();
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            // Support stays on the representative indices {0, 1}.
            assert_eq!(w[2], 0.0);
            for (m, x) in mean.iter_mut().zip(w) {
                *m += x / trials as f64;
            }
        }
        assert!((mean[0] - 0.5).abs() < 0.02);
        assert!((mean[1] - 0.5).abs() < 0.02);

        // Three effective rows: the flat Dirichlet mean is (1/3, 1/3, 1/3).
        let sigma = meta(vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.5, 0.5, 0.0],
        ]);
        let mut rng = forge.fork("dirichlet-k3");
        let mut mean = vec![0.0; 3];
        for _ in 0..trials {
            let draw = sample_opponent_prior(&sigma, 1.0, 1.0, &mut rng).unwrap();
            for (m, x) in mean.iter_mut().zip(draw.weights()) {
                *m += x / trials as f64;
            }
        }
        for m in mean {
            assert!((m - 1.0 / 3.0).abs() < 0.02, "mean coordinate {m}");
        }
    }

    #[test]
    fn lookups_snap_to_the_nearest_anchor_with_lex_ties() {
        let spec = GameSpec::new(3).unwrap();
        let seed = uniform_random_policy(spec).unwrap();
        let anchors = vec![
            MixtureWeights::new(vec![0.0, 1.0]).unwrap(),
            MixtureWeights::new(vec![0.5, 0.5]).unwrap(),
            MixtureWeights::new(vec![1.0, 0.0]).unwrap(),
        ];
        let store = ConditionalPolicyStore::new(spec, anchors, &seed).unwrap();
        let q = MixtureWeights::new(vec![0.9, 0.1]).unwrap();
        assert_eq!(store.lookup_conditional(&q).unwrap().0, 2);
        let q = MixtureWeights::new(vec![0.55, 0.45]).unwrap();
        assert_eq!(store.lookup_conditional(&q).unwrap().0, 1);
        // Exactly between the first two anchors: the lexicographically
        // smaller anchor wins.
        let q = MixtureWeights::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(store.lookup_conditional(&q).unwrap().0, 0);
        let bad = MixtureWeights::new(vec![1.0]).unwrap();
        assert!(store.lookup_conditional(&bad).is_err());
    }

    #[test]
    fn reprojection_carries_identical_anchors() {
        let spec = GameSpec::new(3).unwrap();
        let seed = uniform_random_policy(spec).unwrap();
        let pm = crate::policy::point_matching_policy(spec).unwrap();
        let anchors = vec![
            MixtureWeights::new(vec![0.5, 0.5]).unwrap(),
            MixtureWeights::new(vec![1.0, 0.0]).unwrap(),
        ];
        let mut store = ConditionalPolicyStore::new(spec, anchors, &seed).unwrap();
        store.set_policy(0, pm.clone(), 7);

        let grown = store
            .reproject(vec![
                MixtureWeights::new(vec![0.4, 0.4, 0.2]).unwrap(),
                MixtureWeights::new(vec![0.5, 0.5, 0.0]).unwrap(),
                MixtureWeights::new(vec![1.0, 0.0, 0.0]).unwrap(),
            ])
            .unwrap();
        // The padded (0.5, 0.5) anchor carries its policy and fingerprint.
        assert_eq!(grown.policy(1).map(), pm.map());
        assert_eq!(grown.fingerprint(1), Some(7));
        // The new anchor warm-starts from its L1-nearest old anchor but is
        // marked untrained.
        assert_eq!(grown.policy(0).map(), pm.map());
        assert_eq!(grown.fingerprint(0), None);
        assert_eq!(grown.fingerprint(2), store.fingerprint(1));
    }

    #[test]
    fn q_learner_approaches_the_exact_best_response() {
        let spec = GameSpec::new(3).unwrap();
        let target = uniform_random_policy(spec).unwrap();
        let (_, exact_value) = exact_best_response(&target).unwrap();
        let forge = RngForge::new(3);
        let mut rng = forge.fork("qlearn");
        let sigma = MixtureWeights::one_hot(1, 0);
        let (_, value) =
            abr_tabular_q(&[target], &sigma, 50_000, None, &mut rng).unwrap();
        assert!(
            (exact_value - value).abs() < 0.1,
            "learner value {value} vs exact {exact_value}"
        );
    }

    #[test]
    fn q_learner_never_regresses_against_a_fixed_target() {
        let spec = GameSpec::new(3).unwrap();
        let target = crate::policy::point_matching_policy(spec).unwrap();
        let population = [target];
        let sigma = MixtureWeights::one_hot(1, 0);
        let forge = RngForge::new(9);
        let mut previous: Option<TabularPolicy> = None;
        let mut last_value = f64::NEG_INFINITY;
        for i in 0..3 {
            let mut rng = forge.fork_indexed("invocation", i);
            let (policy, value) =
                abr_tabular_q(&population, &sigma, 2_000, previous.as_ref(), &mut rng).unwrap();
            assert!(value >= last_value - 1e-12);
            last_value = value;
            previous = Some(policy);
        }
    }

    #[test]
    fn retained_policy_beats_an_untrained_learner() {
        let spec = GameSpec::new(3).unwrap();
        let target = uniform_random_policy(spec).unwrap();
        let (br, exact_value) = exact_best_response(&target).unwrap();
        let sigma = MixtureWeights::one_hot(1, 0);
        let forge = RngForge::new(4);
        let mut rng = forge.fork("tiny-budget");
        // One episode cannot beat the exact best response, so it is retained.
        let (policy, value) =
            abr_tabular_q(&[target], &sigma, 1, Some(&br), &mut rng).unwrap();
        assert_eq!(policy.map(), br.map());
        assert!((value - exact_value).abs() <= 1e-12);
    }

    #[test]
    fn training_expands_and_certifies_convergence() {
        let spec = GameSpec::new(3).unwrap();
        let config = TrainerConfig {
            epsilon: 0.0,
            max_population: 6,
            ..TrainerConfig::default()
        };
        let result = train(&config, spec).unwrap();
        let n = result.snapshot.len();
        assert!(n > 1, "population never grew");
        assert!(n <= 6);
        assert_eq!(result.history.len(), n);
        let last = result.history.last().unwrap();
        assert!(
            last.frontier_gain <= config.br_gain_threshold || n == 6,
            "stopped with gain {} and population {}",
            last.frontier_gain,
            n
        );
        assert!((final_gain(&result).unwrap() - last.frontier_gain).abs() <= 1e-9);
        for record in &result.history {
            assert!(record.frontier_gain >= -1e-12);
        }
    }

    #[test]
    fn first_two_slots_match_the_known_best_response_chain() {
        let spec = GameSpec::new(5).unwrap();
        let config = TrainerConfig {
            epsilon: 0.0,
            max_population: 3,
            ..TrainerConfig::default()
        };
        let result = train(&config, spec).unwrap();
        assert_eq!(result.snapshot.len(), 3);
        let policies = result.snapshot.policies();

        let seed = uniform_random_policy(spec).unwrap();
        let (_, v_br_seed) = exact_best_response(&seed).unwrap();
        let v1 = expected_value(&policies[1], &policies[0]).unwrap();
        assert!((v1 - v_br_seed).abs() <= 1e-9, "slot 1 scores {v1}, best response {v_br_seed}");

        // Slot 1 dominates the two-slot prefix, so slot 2 best-responds to it
        // alone and profits against it.
        let sigma2 = result.snapshot.meta_graph().row(2);
        assert!((sigma2.get(1) - 1.0).abs() <= 1e-9);
        let (_, v_br_pi1) = exact_best_response(&policies[1]).unwrap();
        let v2 = expected_value(&policies[2], &policies[1]).unwrap();
        assert!((v2 - v_br_pi1).abs() <= 1e-9);
        assert!(v2 > 0.0);
    }

    #[test]
    fn identical_seeds_reproduce_identical_runs() {
        let spec = GameSpec::new(3).unwrap();
        let config = TrainerConfig {
            epsilon: 0.5,
            max_population: 3,
            grid_resolution: 2,
            abr_kind: AbrKind::TabularQLearner,
            abr_budget: 500,
            rng_seed: 123,
            ..TrainerConfig::default()
        };
        let a = train(&config, spec).unwrap();
        let b = train(&config, spec).unwrap();
        assert_eq!(a.snapshot.meta_graph(), b.snapshot.meta_graph());
        assert_eq!(a.snapshot.payoff_matrix(), b.snapshot.payoff_matrix());
        for (pa, pb) in a.snapshot.policies().iter().zip(b.snapshot.policies()) {
            assert_eq!(pa.map(), pb.map());
        }
        assert_eq!(a.store.len(), b.store.len());
        for (pa, pb) in a.store.policies().iter().zip(b.store.policies()) {
            assert_eq!(pa.map(), pb.map());
        }
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = TrainerConfig { epsilon: 1.5, ..TrainerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TrainerConfig { alpha: 0.0, ..TrainerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TrainerConfig { max_population: 0, ..TrainerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TrainerConfig { grid_resolution: 0, ..TrainerConfig::default() };
        assert!(bad.validate().is_err());
    }
}
