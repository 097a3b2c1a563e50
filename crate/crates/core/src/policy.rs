//! Tabular behavioral policies, mixtures over populations, and the
//! realization-equivalent aggregation of a mixture into one behavioral policy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, InfoStateKey};
use crate::meta::{MetaGraph, PayoffMatrix};
use crate::table::{DensePolicy, GameTable};

/// Probabilities over the legal bids at one information state, stored as
/// (bid, probability) pairs in ascending bid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionDistribution {
    entries: Vec<(u8, f64)>,
}

impl ActionDistribution {
    pub fn new(mut entries: Vec<(u8, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(a, _)| a);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let mut sum = 0.0;
        for &mut (a, ref mut p) in entries.iter_mut() {
            if *p < 0.0 {
                if *p < -1e-12 {
                    return Err(Error::InvalidMixture(format!(
                        "negative probability {p} on bid {a}"
                    )));
                }
                *p = 0.0;
            }
            sum += *p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMixture(format!(
                "action probabilities sum to {sum}, expected 1"
            )));
        }
        for (_, p) in entries.iter_mut() {
            *p /= sum;
        }
        entries.retain(|&(_, p)| p > 0.0);
        Ok(ActionDistribution { entries })
    }

    pub fn deterministic(action: u8) -> Self {
        ActionDistribution { entries: vec![(action, 1.0)] }
    }

    pub fn uniform(actions: &[u8]) -> Self {
        let p = 1.0 / actions.len() as f64;
        let mut entries: Vec<(u8, f64)> = actions.iter().map(|&a| (a, p)).collect();
        entries.sort_by_key(|&(a, _)| a);
        ActionDistribution { entries }
    }

    pub fn entries(&self) -> &[(u8, f64)] {
        &self.entries
    }

    pub fn prob(&self, action: u8) -> f64 {
        self.entries
            .iter()
            .find(|&&(a, _)| a == action)
            .map(|&(_, p)| p)
            .unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.entries.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMixture(format!("probabilities sum to {sum}")));
        }
        if self.entries.iter().any(|&(_, p)| p < 0.0) {
            return Err(Error::InvalidMixture("negative probability".to_string()));
        }
        Ok(())
    }
}

/// A behavioral policy defined on every reachable information state.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    spec: GameSpec,
    map: BTreeMap<InfoStateKey, ActionDistribution>,
}

impl TabularPolicy {
    /// Builds and validates a policy: it must cover exactly the reachable
    /// keys of `spec` and place probability only on legal bids.
    pub fn new(spec: GameSpec, map: BTreeMap<InfoStateKey, ActionDistribution>) -> Result<Self> {
        let table = GameTable::get(spec)?;
        for key in table.keys() {
            let dist = map
                .get(key)
                .ok_or_else(|| Error::MissingKey(key.as_str().to_string()))?;
            dist.validate()?;
            let legal = table.key_legal(table.key_id(key).expect("table key"));
            for &(a, p) in dist.entries() {
                if p > 0.0 && !legal.contains(&a) {
                    return Err(Error::InvalidSpec(format!(
                        "probability on illegal bid {a} at {key}"
                    )));
                }
            }
        }
        if map.len() != table.num_keys() {
            return Err(Error::InvalidSpec(format!(
                "policy has {} keys, game has {} reachable keys",
                map.len(),
                table.num_keys()
            )));
        }
        Ok(TabularPolicy { spec, map })
    }

    /// Builds a policy by calling `f` with every reachable key and its legal
    /// bids in ascending order.
    pub fn from_fn(
        spec: GameSpec,
        mut f: impl FnMut(&InfoStateKey, &[u8]) -> ActionDistribution,
    ) -> Result<Self> {
        let table = GameTable::get(spec)?;
        let mut map = BTreeMap::new();
        for (id, key) in table.keys().iter().enumerate() {
            map.insert(key.clone(), f(key, table.key_legal(id)));
        }
        TabularPolicy::new(spec, map)
    }

    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn distribution(&self, key: &InfoStateKey) -> Option<&ActionDistribution> {
        self.map.get(key)
    }

    pub fn map(&self) -> &BTreeMap<InfoStateKey, ActionDistribution> {
        &self.map
    }

    /// Serializes as a bare JSON object {key: [[bid, prob], ...]}; keys are
    /// in lexicographic order, making the output byte-stable.
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.map)?)
    }

    pub fn from_json_str(spec: GameSpec, json: &str) -> Result<Self> {
        let map: BTreeMap<InfoStateKey, ActionDistribution> = serde_json::from_str(json)?;
        TabularPolicy::new(spec, map)
    }
}

/// A point in the population simplex; also used as an opponent prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixtureWeights {
    weights: Vec<f64>,
}

impl MixtureWeights {
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMixture("empty weight vector".to_string()));
        }
        let mut sum = 0.0;
        for w in weights.iter_mut() {
            if *w < 0.0 {
                if *w < -1e-12 {
                    return Err(Error::InvalidMixture(format!("negative weight {w}")));
                }
                *w = 0.0;
            }
            sum += *w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMixture(format!("weights sum to {sum}, expected 1")));
        }
        for w in weights.iter_mut() {
            *w /= sum;
        }
        Ok(MixtureWeights { weights })
    }

    pub fn one_hot(len: usize, index: usize) -> Self {
        let mut weights = vec![0.0; len];
        weights[index] = 1.0;
        MixtureWeights { weights }
    }

    pub fn uniform(len: usize) -> Self {
        MixtureWeights { weights: vec![1.0 / len as f64; len] }
    }

    /// Uniform mass over `indices`, zero elsewhere.
    pub fn uniform_over(len: usize, indices: &[usize]) -> Self {
        let mut weights = vec![0.0; len];
        let p = 1.0 / indices.len() as f64;
        for &i in indices {
            weights[i] = p;
        }
        MixtureWeights { weights }
    }

    /// Embeds a length-k simplex point into a length-`len` vector, placing
    /// `values[j]` at `indices[j]`.
    pub fn embed(values: &[f64], indices: &[usize], len: usize) -> Result<Self> {
        if values.len() != indices.len() {
            return Err(Error::LengthMismatch(format!(
                "{} values for {} indices",
                values.len(),
                indices.len()
            )));
        }
        let mut weights = vec![0.0; len];
        for (&v, &i) in values.iter().zip(indices) {
            weights[i] = v;
        }
        MixtureWeights::new(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn l1_distance(&self, other: &MixtureWeights) -> f64 {
        let long = self.weights.len().max(other.weights.len());
        (0..long)
            .map(|i| {
                let a = self.weights.get(i).copied().unwrap_or(0.0);
                let b = other.weights.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .sum()
    }

    /// Extends with zero-mass slots up to `len` (population growth).
    pub fn zero_padded(&self, len: usize) -> Self {
        let mut weights = self.weights.clone();
        weights.resize(len.max(weights.len()), 0.0);
        MixtureWeights { weights }
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidMixture(format!("weights sum to {sum}")));
        }
        Ok(())
    }
}

/// A trained population: ordered policies with their meta-graph and exact
/// payoff matrix. Slot 0 is the fixed seed policy.
#[derive(Debug, Clone)]
pub struct PopulationSnapshot {
    spec: GameSpec,
    policies: Vec<TabularPolicy>,
    meta_graph: MetaGraph,
    payoff: PayoffMatrix,
}

impl PopulationSnapshot {
    pub fn new(
        spec: GameSpec,
        policies: Vec<TabularPolicy>,
        meta_graph: MetaGraph,
        payoff: PayoffMatrix,
    ) -> Result<Self> {
        let n = policies.len();
        if n == 0 {
            return Err(Error::InvalidSpec("population is empty".to_string()));
        }
        if meta_graph.len() != n || payoff.len() != n {
            return Err(Error::LengthMismatch(format!(
                "population {} policies, meta-graph {} rows, payoff {} rows",
                n,
                meta_graph.len(),
                payoff.len()
            )));
        }
        for p in &policies {
            if p.spec() != spec {
                return Err(Error::SpecMismatch("population policy spec differs".to_string()));
            }
        }
        Ok(PopulationSnapshot { spec, policies, meta_graph, payoff })
    }

    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn policies(&self) -> &[TabularPolicy] {
        &self.policies
    }

    pub fn meta_graph(&self) -> &MetaGraph {
        &self.meta_graph
    }

    pub fn payoff_matrix(&self) -> &PayoffMatrix {
        &self.payoff
    }

    /// Representative slot indices of the distinct meta-graph rows.
    pub fn effective_indices(&self) -> Vec<usize> {
        crate::meta::unique_rows(&self.meta_graph)
    }
}

/// Plays uniformly over the legal bids everywhere.
pub fn uniform_random_policy(spec: GameSpec) -> Result<TabularPolicy> {
    TabularPolicy::from_fn(spec, |_, legal| ActionDistribution::uniform(legal))
}

/// Bids the revealed point card whenever it is still in hand (on its own
/// path this is always the highest remaining card, i.e. descending order);
/// otherwise falls back to the highest remaining bid.
pub fn point_matching_policy(spec: GameSpec) -> Result<TabularPolicy> {
    TabularPolicy::from_fn(spec, |key, legal| {
        let want = spec.point_card(key.turn() as u8);
        let bid = if legal.contains(&want) { want } else { *legal.last().expect("non-empty") };
        ActionDistribution::deterministic(bid)
    })
}

/// Bids 1 on the first (highest) point card, then the card one above each
/// later point card: sequence (1, K, K-1, ..., 2) against points
/// (K, K-1, ..., 1). Off its own path it falls back to the highest remaining.
pub fn sacrifice_top_policy(spec: GameSpec) -> Result<TabularPolicy> {
    TabularPolicy::from_fn(spec, |key, legal| {
        let turn = key.turn() as u8;
        let want = if turn == 0 { 1 } else { spec.point_card(turn) + 1 };
        let bid = if legal.contains(&want) { want } else { *legal.last().expect("non-empty") };
        ActionDistribution::deterministic(bid)
    })
}

/// Full-support random policy: every key's distribution is drawn from a flat
/// Dirichlet over its legal bids. Useful as an arbitrary test opponent.
pub fn random_policy(spec: GameSpec, rng: &mut impl rand::Rng) -> Result<TabularPolicy> {
    TabularPolicy::from_fn(spec, |_, legal| {
        let draws: Vec<f64> = legal
            .iter()
            .map(|_| {
                let u: f64 = rng.random();
                -(1.0 - u).ln()
            })
            .collect();
        let sum: f64 = draws.iter().sum();
        let entries: Vec<(u8, f64)> =
            legal.iter().zip(&draws).map(|(&a, &d)| (a, d / sum)).collect();
        ActionDistribution::new(entries).expect("normalized draws")
    })
}

/// Samples an action from a distribution's entries.
pub(crate) fn sample_action(dist: &ActionDistribution, rng: &mut impl rand::Rng) -> u8 {
    let mut u: f64 = rng.random();
    let entries = dist.entries();
    for &(a, p) in entries {
        if u < p {
            return a;
        }
        u -= p;
    }
    entries.last().expect("distributions are non-empty").0
}

/// Samples an index from non-negative weights summing to one.
pub(crate) fn sample_categorical(weights: &[f64], rng: &mut impl rand::Rng) -> usize {
    let mut u: f64 = rng.random();
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if u < w {
            return i;
        }
        u -= w;
    }
    last
}

/// Probability that the owner's own actions allow reaching each key
/// (product of own action probabilities along the key's unique path).
pub fn own_reach_probs(policy: &TabularPolicy) -> Result<BTreeMap<InfoStateKey, f64>> {
    let table = GameTable::get(policy.spec())?;
    let dense = table.densify(policy)?;
    let reach = own_reach_dense(&table, &dense);
    Ok(table
        .keys()
        .iter()
        .enumerate()
        .map(|(id, key)| (key.clone(), reach[id]))
        .collect())
}

/// Dense own-reach per key id; parents always precede children in turn order.
pub(crate) fn own_reach_dense(table: &GameTable, dense: &DensePolicy) -> Vec<f64> {
    let n = table.num_keys();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&id| (table.key_turn(id), id));
    let mut reach = vec![0.0; n];
    for id in order {
        reach[id] = match table.key_parent(id) {
            None => 1.0,
            Some((pid, a_idx)) => reach[pid] * dense.at(pid)[a_idx],
        };
    }
    reach
}

/// Collapses a mixture over policies into a single behavioral policy that is
/// realization-equivalent to sampling policy i with probability sigma_i per
/// episode. At each key the action probabilities are the reach-weighted blend
/// of the member policies; keys no member reaches get the uniform
/// distribution (their play is value-irrelevant).
pub fn aggregate_mixture(
    policies: &[TabularPolicy],
    sigma: &MixtureWeights,
) -> Result<TabularPolicy> {
    if policies.is_empty() {
        return Err(Error::LengthMismatch("empty population".to_string()));
    }
    if policies.len() != sigma.len() {
        return Err(Error::LengthMismatch(format!(
            "{} policies for {} mixture weights",
            policies.len(),
            sigma.len()
        )));
    }
    sigma.validate()?;
    let spec = policies[0].spec();
    for p in policies {
        if p.spec() != spec {
            return Err(Error::SpecMismatch("mixture member spec differs".to_string()));
        }
    }
    let table = GameTable::get(spec)?;
    let mut members: Vec<(f64, DensePolicy, Vec<f64>)> = Vec::new();
    for (i, p) in policies.iter().enumerate() {
        let w = sigma.get(i);
        if w == 0.0 {
            continue;
        }
        let dense = table.densify(p)?;
        let reach = own_reach_dense(&table, &dense);
        members.push((w, dense, reach));
    }
    let mut map = BTreeMap::new();
    for (id, key) in table.keys().iter().enumerate() {
        let legal = table.key_legal(id);
        let mut nums = vec![0.0; legal.len()];
        let mut denom = 0.0;
        for (w, dense, reach) in &members {
            let mass = w * reach[id];
            if mass == 0.0 {
                continue;
            }
            denom += mass;
            for (j, p) in dense.at(id).iter().enumerate() {
                nums[j] += mass * p;
            }
        }
        let dist = if denom == 0.0 {
            ActionDistribution::uniform(legal)
        } else {
            let entries: Vec<(u8, f64)> =
                legal.iter().zip(&nums).map(|(&a, &m)| (a, m / denom)).collect();
            ActionDistribution::new(entries)?
        };
        map.insert(key.clone(), dist);
    }
    TabularPolicy::new(spec, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game;

    fn spec(k: u8) -> GameSpec {
        GameSpec::new(k).unwrap()
    }

    #[test]
    fn uniform_policy_spreads_mass_evenly() {
        let pi = uniform_random_policy(spec(5)).unwrap();
        let root = InfoStateKey::root();
        let dist = pi.distribution(&root).unwrap();
        assert_eq!(dist.entries().len(), 5);
        for &(_, p) in dist.entries() {
            assert!((p - 0.2).abs() < 1e-12);
        }
        for dist in pi.map().values() {
            let sum: f64 = dist.entries().iter().map(|&(_, p)| p).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_policy_is_forced_on_the_last_turn() {
        let pi = uniform_random_policy(spec(5)).unwrap();
        let last_turn = pi.map().iter().filter(|(k, _)| k.turn() == 4);
        let mut seen = 0;
        for (_, dist) in last_turn {
            assert_eq!(dist.entries().len(), 1);
            assert_eq!(dist.entries()[0].1, 1.0);
            seen += 1;
        }
        assert!(seen > 0);
    }

    #[test]
    fn point_matching_bids_the_point_card() {
        let pi = point_matching_policy(spec(5)).unwrap();
        let root = InfoStateKey::root();
        assert_eq!(pi.distribution(&root).unwrap().entries(), &[(5, 1.0)]);
        let pi2 = point_matching_policy(spec(2)).unwrap();
        assert_eq!(pi2.distribution(&InfoStateKey::root()).unwrap().entries(), &[(2, 1.0)]);
        let after = InfoStateKey::from_parts(&[2], &[0]);
        assert_eq!(pi2.distribution(&after).unwrap().entries(), &[(1, 1.0)]);
    }

    #[test]
    fn sacrifice_top_follows_its_sequence() {
        let pi = sacrifice_top_policy(spec(5)).unwrap();
        let mut state = game::new_game(spec(5)).unwrap();
        let mut bids = Vec::new();
        while !state.is_terminal() {
            let key = state.infostate_key(0);
            let dist = pi.distribution(&key).unwrap();
            assert_eq!(dist.entries().len(), 1);
            let bid = dist.entries()[0].0;
            bids.push(bid);
            let (next, _) = state.apply_joint_action(bid, state.legal_actions(1)[0]).unwrap();
            state = next;
        }
        assert_eq!(bids, vec![1, 5, 4, 3, 2]);
    }

    #[test]
    fn own_reach_follows_action_products() {
        let pi = uniform_random_policy(spec(3)).unwrap();
        let reach = own_reach_probs(&pi).unwrap();
        assert_eq!(reach[&InfoStateKey::root()], 1.0);
        // Any turn-1 key is reached with the probability of its own bid.
        assert!((reach[&InfoStateKey::from_parts(&[2], &[1])] - 1.0 / 3.0).abs() < 1e-12);
        // Deterministic policies have reach 0 or 1.
        let pm = point_matching_policy(spec(3)).unwrap();
        for (_, r) in own_reach_probs(&pm).unwrap() {
            assert!(r == 0.0 || r == 1.0);
        }
    }

    #[test]
    fn tie_branch_children_reaches_sum_to_the_root_reach() {
        let pi = uniform_random_policy(spec(3)).unwrap();
        let reach = own_reach_probs(&pi).unwrap();
        let total: f64 =
            (1..=3).map(|a| reach[&InfoStateKey::from_parts(&[a], &[0])]).sum();
        assert!((total - reach[&InfoStateKey::root()]).abs() < 1e-12);
    }

    #[test]
    fn singleton_mixture_reproduces_the_policy_on_reached_keys() {
        let pm = point_matching_policy(spec(3)).unwrap();
        let sigma = MixtureWeights::new(vec![1.0]).unwrap();
        let agg = aggregate_mixture(std::slice::from_ref(&pm), &sigma).unwrap();
        let reach = own_reach_probs(&pm).unwrap();
        for (key, r) in reach {
            if r > 0.0 {
                assert_eq!(agg.distribution(&key), pm.distribution(&key));
            }
        }
    }

    #[test]
    fn even_mixture_splits_the_root() {
        let s = spec(3);
        let a = TabularPolicy::from_fn(s, |key, legal| {
            if key.turn() == 0 {
                ActionDistribution::deterministic(1)
            } else {
                ActionDistribution::uniform(legal)
            }
        })
        .unwrap();
        let b = TabularPolicy::from_fn(s, |key, legal| {
            if key.turn() == 0 {
                ActionDistribution::deterministic(3)
            } else {
                ActionDistribution::uniform(legal)
            }
        })
        .unwrap();
        let sigma = MixtureWeights::new(vec![0.5, 0.5]).unwrap();
        let agg = aggregate_mixture(&[a, b], &sigma).unwrap();
        let root = agg.distribution(&InfoStateKey::root()).unwrap();
        assert!((root.prob(1) - 0.5).abs() < 1e-12);
        assert!((root.prob(3) - 0.5).abs() < 1e-12);
        assert_eq!(root.prob(2), 0.0);
    }

    #[test]
    fn zero_reach_keys_become_uniform() {
        let s = spec(3);
        let pm = point_matching_policy(s).unwrap();
        let sigma = MixtureWeights::new(vec![1.0]).unwrap();
        let agg = aggregate_mixture(std::slice::from_ref(&pm), &sigma).unwrap();
        // Point-matching never opens with bid 1, so keys under that bid have
        // zero own-reach and must be uniform in the aggregate.
        let off_path = InfoStateKey::from_parts(&[1], &[-1]);
        let dist = agg.distribution(&off_path).unwrap();
        assert_eq!(dist.entries().len(), 2);
        for &(_, p) in dist.entries() {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_length_mismatch_is_rejected() {
        let pm = point_matching_policy(spec(3)).unwrap();
        let sigma = MixtureWeights::new(vec![0.5, 0.5]).unwrap();
        assert!(aggregate_mixture(std::slice::from_ref(&pm), &sigma).is_err());
    }

    #[test]
    fn invalid_weights_are_rejected() {
        assert!(MixtureWeights::new(vec![0.5, 0.4]).is_err());
        assert!(MixtureWeights::new(vec![1.5, -0.5]).is_err());
        assert!(MixtureWeights::new(vec![]).is_err());
        assert!(MixtureWeights::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn distribution_validation_catches_bad_sums() {
        assert!(ActionDistribution::new(vec![(1, 0.5), (2, 0.4)]).is_err());
        assert!(ActionDistribution::new(vec![(1, 0.5), (2, 0.5)]).is_ok());
        assert!(ActionDistribution::new(vec![(1, 1.5), (2, -0.5)]).is_err());
    }

    #[test]
    fn policy_json_round_trips() {
        let s = spec(3);
        let pi = uniform_random_policy(s).unwrap();
        let json = pi.to_json_string().unwrap();
        let back = TabularPolicy::from_json_str(s, &json).unwrap();
        assert_eq!(pi, back);
        // Keys appear in lexicographic order in the serialized text.
        let first_key = pi.map().keys().next().unwrap();
        assert!(json.find(&format!("\"{first_key}\"")).is_some());
    }

    #[test]
    fn incomplete_policies_are_rejected() {
        let s = spec(3);
        let pi = uniform_random_policy(s).unwrap();
        let mut map = pi.map().clone();
        map.remove(&InfoStateKey::root());
        assert!(TabularPolicy::new(s, map).is_err());
    }

    #[test]
    fn illegal_support_is_rejected() {
        let s = spec(2);
        let pi = uniform_random_policy(s).unwrap();
        let mut map = pi.map().clone();
        map.insert(InfoStateKey::root(), ActionDistribution::deterministic(5));
        assert!(TabularPolicy::new(s, map).is_err());
    }

    #[test]
    fn embed_places_values_at_indices() {
        let m = MixtureWeights::embed(&[0.25, 0.75], &[0, 2], 4).unwrap();
        assert_eq!(m.weights(), &[0.25, 0.0, 0.75, 0.0]);
        assert_eq!(m.zero_padded(6).len(), 6);
        assert_eq!(MixtureWeights::one_hot(3, 1).weights(), &[0.0, 1.0, 0.0]);
        let u = MixtureWeights::uniform_over(4, &[1, 3]);
        assert_eq!(u.weights(), &[0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn l1_distance_is_symmetric() {
        let a = MixtureWeights::new(vec![0.2, 0.8]).unwrap();
        let b = MixtureWeights::new(vec![0.5, 0.5]).unwrap();
        assert!((a.l1_distance(&b) - 0.6).abs() < 1e-12);
        assert_eq!(a.l1_distance(&b), b.l1_distance(&a));
    }
}
