//! Exact Bayesian identification of the opponent from one seat's private
//! observations. The observer sees its own bids and the win/loss/draw sign of
//! each turn; the opponent's bids are hidden, so each candidate's likelihood
//! marginalizes over every hidden bid sequence consistent with the signs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{bid_sign, CardSet, GameSpec, InfoStateKey};
use crate::policy::{MixtureWeights, TabularPolicy};

/// Running posterior over a fixed set of candidate opponents. Updates
/// recompute the full-history likelihood from the prior each time, so a
/// chain of updates is exactly the single batch computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    spec: GameSpec,
    prior: MixtureWeights,
    posterior: MixtureWeights,
    own_actions: Vec<u8>,
    outcomes: Vec<i8>,
}

impl PosteriorState {
    pub fn new(spec: GameSpec, prior: MixtureWeights) -> Self {
        let posterior = prior.clone();
        PosteriorState { spec, prior, posterior, own_actions: Vec::new(), outcomes: Vec::new() }
    }

    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn turn(&self) -> usize {
        self.own_actions.len()
    }

    pub fn prior(&self) -> &MixtureWeights {
        &self.prior
    }

    pub fn posterior(&self) -> &MixtureWeights {
        &self.posterior
    }

    pub fn own_actions(&self) -> &[u8] {
        &self.own_actions
    }

    pub fn outcomes(&self) -> &[i8] {
        &self.outcomes
    }

    /// Appends one observed turn and recomputes the posterior over
    /// `candidates` from the prior and the whole history. Errors with
    /// `ImpossibleEvidence` when every candidate assigns the history zero
    /// probability.
    pub fn update(
        &self,
        candidates: &[TabularPolicy],
        own_action: u8,
        outcome: i8,
    ) -> Result<PosteriorState> {
        if candidates.len() != self.prior.len() {
            return Err(Error::LengthMismatch(format!(
                "{} candidates for a prior over {}",
                candidates.len(),
                self.prior.len()
            )));
        }
        for candidate in candidates {
            if candidate.spec() != self.spec {
                return Err(Error::SpecMismatch(
                    "candidate policy is for a different game".to_string(),
                ));
            }
        }
        let mut own_actions = self.own_actions.clone();
        let mut outcomes = self.outcomes.clone();
        own_actions.push(own_action);
        outcomes.push(outcome);
        check_observation(self.spec, &own_actions, &outcomes)?;

        let mut masses = Vec::with_capacity(candidates.len());
        for (j, candidate) in candidates.iter().enumerate() {
            let w = self.prior.get(j);
            let mass = if w > 0.0 {
                w * opponent_likelihood(candidate, &own_actions, &outcomes)?
            } else {
                0.0
            };
            masses.push(mass);
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        for m in &mut masses {
            *m /= total;
        }
        Ok(PosteriorState {
            spec: self.spec,
            prior: self.prior.clone(),
            posterior: MixtureWeights::new(masses)?,
            own_actions,
            outcomes,
        })
    }
}

fn check_observation(spec: GameSpec, own_actions: &[u8], outcomes: &[i8]) -> Result<()> {
    if own_actions.len() != outcomes.len() {
        return Err(Error::LengthMismatch(format!(
            "{} own actions but {} outcomes",
            own_actions.len(),
            outcomes.len()
        )));
    }
    if own_actions.len() > spec.num_cards as usize {
        return Err(Error::LengthMismatch(format!(
            "{} observed turns in a {}-card game",
            own_actions.len(),
            spec.num_cards
        )));
    }
    let mut hand = CardSet::full(spec.num_cards);
    for (t, &a) in own_actions.iter().enumerate() {
        if !hand.contains(a) {
            return Err(Error::IllegalAction { player: 0, action: a, turn: t as u8 });
        }
        hand = hand.without(a);
    }
    for &w in outcomes {
        if !(-1..=1).contains(&w) {
            return Err(Error::InvalidSpec(format!("outcome sign {w} out of range")));
        }
    }
    Ok(())
}

/// Probability that `opponent` produces the observed signs given the
/// observer's bids: the sum over all consistent hidden bid sequences of the
/// product of the opponent's action probabilities at its own information
/// states. The opponent's keys carry its egocentric signs, which are the
/// observer's negated.
pub fn opponent_likelihood(
    opponent: &TabularPolicy,
    own_actions: &[u8],
    outcomes: &[i8],
) -> Result<f64> {
    let spec = opponent.spec();
    check_observation(spec, own_actions, outcomes)?;
    let mut bids: Vec<u8> = Vec::new();
    let mut signs: Vec<i8> = Vec::new();
    likelihood_recurse(
        opponent,
        own_actions,
        outcomes,
        0,
        CardSet::full(spec.num_cards),
        &mut bids,
        &mut signs,
    )
}

fn likelihood_recurse(
    opponent: &TabularPolicy,
    own_actions: &[u8],
    outcomes: &[i8],
    turn: usize,
    hand: CardSet,
    bids: &mut Vec<u8>,
    signs: &mut Vec<i8>,
) -> Result<f64> {
    if turn == own_actions.len() {
        return Ok(1.0);
    }
    let key = InfoStateKey::from_parts(bids, signs);
    let dist = opponent
        .distribution(&key)
        .ok_or_else(|| Error::MissingKey(key.as_str().to_string()))?;
    let mut total = 0.0;
    for b in hand.iter() {
        if bid_sign(own_actions[turn], b) != outcomes[turn] {
            continue;
        }
        let p = dist.prob(b);
        if p <= 0.0 {
            continue;
        }
        bids.push(b);
        signs.push(-outcomes[turn]);
        total += p
            * likelihood_recurse(
                opponent,
                own_actions,
                outcomes,
                turn + 1,
                hand.without(b),
                bids,
                signs,
            )?;
        bids.pop();
        signs.pop();
    }
    Ok(total)
}

/// All hidden bid sequences consistent with the observed signs and card
/// legality, regardless of any policy's support.
pub fn consistent_opponent_sequences(
    spec: GameSpec,
    own_actions: &[u8],
    outcomes: &[i8],
) -> Result<Vec<Vec<u8>>> {
    check_observation(spec, own_actions, outcomes)?;
    let mut out = Vec::new();
    let mut bids = Vec::new();
    sequences_recurse(own_actions, outcomes, 0, CardSet::full(spec.num_cards), &mut bids, &mut out);
    Ok(out)
}

fn sequences_recurse(
    own_actions: &[u8],
    outcomes: &[i8],
    turn: usize,
    hand: CardSet,
    bids: &mut Vec<u8>,
    out: &mut Vec<Vec<u8>>,
) {
    if turn == own_actions.len() {
        out.push(bids.clone());
        return;
    }
    for b in hand.iter() {
        if bid_sign(own_actions[turn], b) != outcomes[turn] {
            continue;
        }
        bids.push(b);
        sequences_recurse(own_actions, outcomes, turn + 1, hand.without(b), bids, out);
        bids.pop();
    }
}

/// Plays one full game of `observer` (seat 0) against `opponent` (seat 1),
/// sampling both seats' bids from their policies, and returns seat 0's
/// posterior over `candidates` after every turn.
pub fn simulate_posterior_episode(
    observer: &TabularPolicy,
    opponent: &TabularPolicy,
    candidates: &[TabularPolicy],
    prior: &MixtureWeights,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Vec<MixtureWeights>> {
    if observer.spec() != opponent.spec() {
        return Err(Error::SpecMismatch(
            "observer and opponent play different games".to_string(),
        ));
    }
    let spec = observer.spec();
    let mut state = crate::game::new_game(spec)?;
    let mut posterior = PosteriorState::new(spec, prior.clone());
    let mut out = Vec::with_capacity(spec.num_cards as usize);
    while !state.is_terminal() {
        let k0 = state.infostate_key(0);
        let k1 = state.infostate_key(1);
        let d0 = observer
            .distribution(&k0)
            .ok_or_else(|| Error::MissingKey(k0.as_str().to_string()))?;
        let d1 = opponent
            .distribution(&k1)
            .ok_or_else(|| Error::MissingKey(k1.as_str().to_string()))?;
        let a0 = crate::policy::sample_action(d0, rng);
        let a1 = crate::policy::sample_action(d1, rng);
        let (next, sign) = state.apply_joint_action(a0, a1)?;
        posterior = posterior.update(candidates, a0, sign)?;
        out.push(posterior.posterior().clone());
        state = next;
    }
    Ok(out)
}

/// Posterior after each observed turn, starting from the prior.
pub fn posterior_trace(
    spec: GameSpec,
    prior: &MixtureWeights,
    candidates: &[TabularPolicy],
    own_actions: &[u8],
    outcomes: &[i8],
) -> Result<Vec<MixtureWeights>> {
    check_observation(spec, own_actions, outcomes)?;
    let mut state = PosteriorState::new(spec, prior.clone());
    let mut out = Vec::with_capacity(own_actions.len());
    for (t, &a) in own_actions.iter().enumerate() {
        state = state.update(candidates, a, outcomes[t])?;
        out.push(state.posterior().clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{point_matching_policy, sacrifice_top_policy, uniform_random_policy};

    fn specs() -> (GameSpec, GameSpec) {
        (GameSpec::new(3).unwrap(), GameSpec::new(5).unwrap())
    }

    /// Independent oracle: filter full opponent bid permutations by prefix
    /// sign-consistency.
    fn consistent_by_permutations(spec: GameSpec, own: &[u8], outs: &[i8]) -> Vec<Vec<u8>> {
        let k = spec.num_cards;
        let mut perms: Vec<Vec<u8>> = vec![Vec::new()];
        for _ in 0..k {
            let mut next = Vec::new();
            for p in &perms {
                for c in 1..=k {
                    if !p.contains(&c) {
                        let mut q = p.clone();
                        q.push(c);
                        next.push(q);
                    }
                }
            }
            perms = next;
        }
        let mut out: Vec<Vec<u8>> = perms
            .into_iter()
            .map(|p| p[..own.len()].to_vec())
            .filter(|p| (0..own.len()).all(|t| bid_sign(own[t], p[t]) == outs[t]))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn fresh_state_reports_the_prior() {
        let (k3, _) = specs();
        let prior = MixtureWeights::new(vec![0.25, 0.75]).unwrap();
        let state = PosteriorState::new(k3, prior.clone());
        assert_eq!(state.posterior(), &prior);
        assert_eq!(state.turn(), 0);
    }

    #[test]
    fn sign_consistency_prunes_hidden_bids() {
        let (_, k5) = specs();
        // Winning with the top card leaves four possible opposing bids.
        let seqs = consistent_opponent_sequences(k5, &[5], &[1]).unwrap();
        assert_eq!(seqs.len(), 4);
        // Winning with the bottom card is impossible.
        let seqs = consistent_opponent_sequences(k5, &[1], &[1]).unwrap();
        assert!(seqs.is_empty());
        // A draw pins the hidden bid exactly.
        let seqs = consistent_opponent_sequences(k5, &[3], &[0]).unwrap();
        assert_eq!(seqs, vec![vec![3]]);
    }

    #[test]
    fn consistent_sequences_match_the_permutation_oracle() {
        let (k3, _) = specs();
        let cases: &[(&[u8], &[i8])] = &[
            (&[3, 1], &[1, -1]),
            (&[2], &[0]),
            (&[1, 2, 3], &[-1, -1, 1]),
            (&[3, 2, 1], &[0, 0, 0]),
            (&[2, 3], &[1, 1]),
        ];
        for (own, outs) in cases {
            let mut got = consistent_opponent_sequences(k3, own, outs).unwrap();
            got.sort();
            let want = consistent_by_permutations(k3, own, outs);
            assert_eq!(got, want, "own {own:?} outs {outs:?}");
        }
    }

    #[test]
    fn uniform_opponent_likelihood_counts_branches() {
        let (k3, k5) = specs();
        let u5 = uniform_random_policy(k5).unwrap();
        // One turn: 4 of 5 equally likely bids lose to a 5.
        let l = opponent_likelihood(&u5, &[5], &[1]).unwrap();
        assert!((l - 0.8).abs() < 1e-12);
        // Two turns: sequences (1,2),(1,3),(2,3), each with mass 1/3 * 1/2.
        let u3 = uniform_random_policy(k3).unwrap();
        let l = opponent_likelihood(&u3, &[3, 1], &[1, -1]).unwrap();
        assert!((l - 0.5).abs() < 1e-12);
        // Impossible evidence has zero likelihood.
        let l = opponent_likelihood(&u3, &[1], &[1]).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn deterministic_candidates_are_eliminated_by_one_sign() {
        let (k3, _) = specs();
        let pm = point_matching_policy(k3).unwrap();
        let st = sacrifice_top_policy(k3).unwrap();
        let uni = uniform_random_policy(k3).unwrap();
        let candidates = vec![pm, st, uni];
        let prior = MixtureWeights::uniform(3);
        let state = PosteriorState::new(k3, prior);

        // Turn 0: we bid 2 and win. Point-matching bids 3 (impossible),
        // sacrifice-top bids 1 (likelihood 1), uniform bids 1 w.p. 1/3.
        let state = state.update(&candidates, 2, 1).unwrap();
        assert_eq!(state.posterior().get(0), 0.0);
        assert!((state.posterior().get(1) - 0.75).abs() < 1e-12);
        assert!((state.posterior().get(2) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn impossible_evidence_is_an_error() {
        let (k3, _) = specs();
        let pm = point_matching_policy(k3).unwrap();
        let candidates = vec![pm];
        let state = PosteriorState::new(k3, MixtureWeights::one_hot(1, 0));
        // Point-matching opens with 3; we bid 3 and cannot win the turn.
        let err = state.update(&candidates, 3, 1).unwrap_err();
        assert!(matches!(err, Error::ImpossibleEvidence));
    }

    #[test]
    fn chained_updates_equal_the_trace() {
        let (k3, _) = specs();
        let candidates = vec![
            uniform_random_policy(k3).unwrap(),
            point_matching_policy(k3).unwrap(),
            sacrifice_top_policy(k3).unwrap(),
        ];
        let prior = MixtureWeights::new(vec![0.5, 0.3, 0.2]).unwrap();
        let own = [2u8, 3, 1];
        let outs = [1i8, 0, -1];
        let trace = posterior_trace(k3, &prior, &candidates, &own, &outs).unwrap();
        assert_eq!(trace.len(), 3);

        let mut state = PosteriorState::new(k3, prior);
        for t in 0..3 {
            state = state.update(&candidates, own[t], outs[t]).unwrap();
            for j in 0..3 {
                assert!((state.posterior().get(j) - trace[t].get(j)).abs() <= 1e-12);
            }
        }
        let sum: f64 = (0..3).map(|j| state.posterior().get(j)).sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn simulated_episodes_concentrate_on_the_true_opponent() {
        use crate::rng::RngForge;
        let (k3, _) = specs();
        let candidates = vec![
            uniform_random_policy(k3).unwrap(),
            point_matching_policy(k3).unwrap(),
            sacrifice_top_policy(k3).unwrap(),
        ];
        let observer = uniform_random_policy(k3).unwrap();
        let prior = MixtureWeights::uniform(3);
        let forge = RngForge::new(11);

        let episodes = 200;
        let mut mean_final = 0.0;
        for e in 0..episodes {
            let mut rng = forge.fork(&format!("episode{e}"));
            let trace = simulate_posterior_episode(
                &observer,
                &candidates[1],
                &candidates,
                &prior,
                &mut rng,
            )
            .unwrap();
            assert_eq!(trace.len(), 3);
            for w in &trace {
                let sum: f64 = (0..3).map(|j| w.get(j)).sum();
                assert!((sum - 1.0).abs() <= 1e-9);
            }
            mean_final += trace[2].get(1);
        }
        mean_final /= f64::from(episodes);
        assert!(mean_final > 0.5, "mean final mass on truth {mean_final}");

        // Same seed, same trace.
        let a = simulate_posterior_episode(
            &observer,
            &candidates[1],
            &candidates,
            &prior,
            &mut forge.fork("again"),
        )
        .unwrap();
        let b = simulate_posterior_episode(
            &observer,
            &candidates[1],
            &candidates,
            &prior,
            &mut forge.fork("again"),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_observations_are_rejected() {
        let (k3, _) = specs();
        let u = uniform_random_policy(k3).unwrap();
        assert!(opponent_likelihood(&u, &[1, 1], &[0, 0]).is_err());
        assert!(opponent_likelihood(&u, &[1], &[0, 0]).is_err());
        assert!(opponent_likelihood(&u, &[1, 2, 3, 1], &[0; 4]).is_err());
    }
}
