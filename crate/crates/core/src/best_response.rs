//! Exact expected values and exact best responses against fixed policies and
//! mixtures, plus a brute-force oracle for small card counts.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::policy::{
    aggregate_mixture, ActionDistribution, MixtureWeights, PopulationSnapshot, TabularPolicy,
};
use crate::table::{turn_reward, GameTable, NO_KEY};

/// Exact expected return J(pi, opp) for the seat-0 player, computed by a
/// single forward pass over the joint-history arena.
pub fn expected_value(pi: &TabularPolicy, opp: &TabularPolicy) -> Result<f64> {
    if pi.spec() != opp.spec() {
        return Err(Error::SpecMismatch(format!(
            "evaluating K={} policy against K={} policy",
            pi.spec().num_cards,
            opp.spec().num_cards
        )));
    }
    let spec = pi.spec();
    let table = GameTable::get(spec)?;
    let d0 = table.densify(pi)?;
    let d1 = table.densify(opp)?;
    let mut prob = vec![0.0f64; table.nodes.len()];
    prob[0] = 1.0;
    let mut total = 0.0;
    for id in 0..table.nodes.len() {
        let node = table.nodes[id];
        if node.key0 == NO_KEY {
            continue;
        }
        let p = prob[id];
        if p == 0.0 {
            continue;
        }
        let k0 = node.key0 as usize;
        let k1 = node.key1 as usize;
        let legal0 = table.key_legal(k0);
        let legal1 = table.key_legal(k1);
        let row0 = d0.at(k0);
        let row1 = d1.at(k1);
        let children = table.node_children(&node);
        let mut ci = 0;
        for (i0, &a0) in legal0.iter().enumerate() {
            let pa = row0[i0];
            for (i1, &a1) in legal1.iter().enumerate() {
                let pc = p * pa * row1[i1];
                if pc != 0.0 {
                    total += pc * turn_reward(spec, node.turn, a0, a1);
                    prob[children[ci] as usize] += pc;
                }
                ci += 1;
            }
        }
    }
    Ok(total)
}

/// Exact best response to a fixed opponent policy: deterministic, with ties
/// broken toward the lowest bid. Returns the policy and its exact value.
///
/// Joint histories are grouped by the responder's information-state key and
/// weighted by the opponent's reach probability; backward induction over the
/// responder's observation tree then maximizes turn by turn.
pub fn exact_best_response(opponent: &TabularPolicy) -> Result<(TabularPolicy, f64)> {
    let spec = opponent.spec();
    let table = GameTable::get(spec)?;
    let d1 = table.densify(opponent)?;

    // Opponent reach per joint history (responder's own probabilities are
    // irrelevant for the argmax and excluded).
    let mut reach = vec![0.0f64; table.nodes.len()];
    reach[0] = 1.0;
    for id in 0..table.nodes.len() {
        let node = table.nodes[id];
        if node.key0 == NO_KEY {
            continue;
        }
        let r = reach[id];
        if r == 0.0 {
            continue;
        }
        let k0 = node.key0 as usize;
        let k1 = node.key1 as usize;
        let legal0_len = table.key_legal(k0).len();
        let legal1_len = table.key_legal(k1).len();
        let row1 = d1.at(k1);
        let children = table.node_children(&node);
        for i0 in 0..legal0_len {
            for i1 in 0..legal1_len {
                let pb = row1[i1];
                if pb != 0.0 {
                    reach[children[i0 * legal1_len + i1] as usize] = r * pb;
                }
            }
        }
    }

    let n = table.num_keys();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&id| (std::cmp::Reverse(table.key_turn(id)), id));
    let mut value = vec![0.0f64; n];
    let mut best_idx = vec![0usize; n];
    for &key_id in &order {
        let legal0 = table.key_legal(key_id);
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0usize;
        for (i0, &a0) in legal0.iter().enumerate() {
            let mut q = 0.0;
            for &nid in &table.nodes_by_key0[key_id] {
                let node = table.nodes[nid as usize];
                let w_opp = reach[nid as usize];
                if w_opp == 0.0 {
                    continue;
                }
                let k1 = node.key1 as usize;
                let legal1 = table.key_legal(k1);
                let row1 = d1.at(k1);
                for (i1, &a1) in legal1.iter().enumerate() {
                    let pb = row1[i1];
                    if pb != 0.0 {
                        q += w_opp * pb * turn_reward(spec, node.turn, a0, a1);
                    }
                }
            }
            for w in [-1i8, 0, 1] {
                if let Some(child) = table.key_child(key_id, i0, w) {
                    q += value[child];
                }
            }
            if q > best {
                best = q;
                best_a = i0;
            }
        }
        value[key_id] = best;
        best_idx[key_id] = best_a;
    }

    let mut map = BTreeMap::new();
    for (id, key) in table.keys().iter().enumerate() {
        let bid = table.key_legal(id)[best_idx[id]];
        map.insert(key.clone(), ActionDistribution::deterministic(bid));
    }
    let policy = TabularPolicy::new(spec, map)?;
    Ok((policy, value[table.root_key_id()]))
}

/// Exact best response to the mixture over the population's policies:
/// aggregates the mixture into one behavioral policy and best-responds to it.
pub fn best_response_to_mixture(
    pop: &PopulationSnapshot,
    sigma: &MixtureWeights,
) -> Result<(TabularPolicy, f64)> {
    mixture_best_response(pop.policies(), sigma)
}

/// Exact value of `policy` against a mixture over `policies`, computed as the
/// weighted sum of pairwise values (equal to the value against the aggregated
/// behavioral policy).
pub fn mixture_value(
    policy: &TabularPolicy,
    policies: &[TabularPolicy],
    sigma: &MixtureWeights,
) -> Result<f64> {
    if policies.len() != sigma.len() {
        return Err(Error::LengthMismatch(format!(
            "{} policies but {} mixture weights",
            policies.len(),
            sigma.len()
        )));
    }
    let mut total = 0.0;
    for (i, w) in sigma.weights().iter().enumerate() {
        if *w > 0.0 {
            total += w * expected_value(policy, &policies[i])?;
        }
    }
    Ok(total)
}

/// Slice-level variant of [`best_response_to_mixture`] for callers that have
/// not assembled a full snapshot yet.
pub fn mixture_best_response(
    policies: &[TabularPolicy],
    sigma: &MixtureWeights,
) -> Result<(TabularPolicy, f64)> {
    let aggregated = aggregate_mixture(policies, sigma)?;
    exact_best_response(&aggregated)
}

/// Largest card count the brute-force oracle accepts; K=3 already enumerates
/// 384 deterministic policies over the reachable keys.
pub const MAX_BRUTE_FORCE_CARDS: u8 = 3;

/// Independent oracle: enumerates every deterministic policy over the
/// reachable keys, evaluates each exactly, and returns the argmax. Ties break
/// toward the lexicographically first policy (keys in lexicographic order,
/// bids ascending).
pub fn brute_force_best_response(opponent: &TabularPolicy) -> Result<(TabularPolicy, f64)> {
    let spec = opponent.spec();
    if spec.num_cards > MAX_BRUTE_FORCE_CARDS {
        return Err(Error::BruteForceTooLarge {
            num_cards: spec.num_cards,
            max: MAX_BRUTE_FORCE_CARDS,
        });
    }
    let table = GameTable::get(spec)?;
    let n = table.num_keys();
    let mut choice = vec![0usize; n];
    let mut best: Option<(TabularPolicy, f64)> = None;
    loop {
        let mut map = BTreeMap::new();
        for (id, key) in table.keys().iter().enumerate() {
            let bid = table.key_legal(id)[choice[id]];
            map.insert(key.clone(), ActionDistribution::deterministic(bid));
        }
        let candidate = TabularPolicy::new(spec, map)?;
        let v = expected_value(&candidate, opponent)?;
        if best.as_ref().map_or(true, |&(_, bv)| v > bv) {
            best = Some((candidate, v));
        }
        // Advance the odometer: the last key varies fastest, so candidates
        // are visited in lexicographic (key, bid) order.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(best.expect("at least one candidate"));
            }
            pos -= 1;
            if choice[pos] + 1 < table.key_legal(pos).len() {
                choice[pos] += 1;
                for c in choice.iter_mut().skip(pos + 1) {
                    *c = 0;
                }
                break;
            }
        }
    }
}
