//! Exact engine for imperfect-information goofspiel.
//!
//! Both players hold bid cards 1..=K. Point cards are revealed in descending
//! order (K, K-1, ..., 1); each turn both players secretly bid one card, the
//! higher bid takes the point card and tied bids discard it. A player observes
//! only its own bids and the per-turn win/loss/draw signal, never the
//! opponent's bid. The terminal return for player 0 is its point total minus
//! player 1's.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How tied bids are resolved. The point card goes to neither player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub enum TieRule {
    #[default]
    Discard,
}

/// Parameters of one goofspiel instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GameSpec {
    pub num_cards: u8,
    #[serde(default)]
    pub tie_rule: TieRule,
}

impl GameSpec {
    pub fn new(num_cards: u8) -> Result<Self> {
        if num_cards < 2 {
            return Err(Error::InvalidSpec(format!(
                "num_cards must be at least 2, got {num_cards}"
            )));
        }
        Ok(GameSpec { num_cards, tie_rule: TieRule::Discard })
    }

    /// Point card revealed at `turn` (0-based): K, K-1, ..., 1.
    pub fn point_card(&self, turn: u8) -> u8 {
        self.num_cards - turn
    }

    /// Sum of all point cards, K(K+1)/2.
    pub fn total_points(&self) -> i32 {
        let k = i32::from(self.num_cards);
        k * (k + 1) / 2
    }
}

/// A hand of bid cards, stored as a bitmask (bit c-1 = card c).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CardSet(u16);

impl CardSet {
    pub fn full(num_cards: u8) -> Self {
        debug_assert!(num_cards <= 16);
        CardSet(((1u32 << num_cards) - 1) as u16)
    }

    pub fn empty() -> Self {
        CardSet(0)
    }

    pub fn contains(&self, card: u8) -> bool {
        card >= 1 && self.0 & (1 << (card - 1)) != 0
    }

    #[must_use]
    pub fn without(&self, card: u8) -> Self {
        CardSet(self.0 & !(1 << (card - 1)))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Cards in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        let bits = self.0;
        (1..=16u8).filter(move |c| bits & (1 << (c - 1)) != 0)
    }
}

pub(crate) fn bid_sign(a0: u8, a1: u8) -> i8 {
    match a0.cmp(&a1) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Less => -1,
    }
}

/// Canonical encoding of one player's observation history: own bids joined by
/// commas, then `|`, then one of `+`/`0`/`-` per turn, from that player's
/// egocentric perspective. The revealed point card is omitted because it is a
/// fixed function of the turn.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InfoStateKey(String);

impl InfoStateKey {
    pub fn from_parts(actions: &[u8], outcomes: &[i8]) -> Self {
        debug_assert_eq!(actions.len(), outcomes.len());
        let mut s = String::with_capacity(actions.len() * 3 + 1);
        for (i, a) in actions.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&a.to_string());
        }
        s.push('|');
        for &w in outcomes {
            s.push(match w {
                1 => '+',
                0 => '0',
                _ => '-',
            });
        }
        InfoStateKey(s)
    }

    pub fn root() -> Self {
        InfoStateKey("|".to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn actions(&self) -> Vec<u8> {
        let (acts, _) = self.0.split_once('|').expect("key always contains '|'");
        if acts.is_empty() {
            return Vec::new();
        }
        acts.split(',').map(|t| t.parse().expect("valid bid")).collect()
    }

    pub fn outcomes(&self) -> Vec<i8> {
        let (_, outs) = self.0.split_once('|').expect("key always contains '|'");
        outs.chars()
            .map(|c| match c {
                '+' => 1,
                '0' => 0,
                '-' => -1,
                other => panic!("invalid outcome char {other:?}"),
            })
            .collect()
    }

    pub fn turn(&self) -> usize {
        let (_, outs) = self.0.split_once('|').expect("key always contains '|'");
        outs.chars().count()
    }

    /// Key of the observation history truncated by one turn; None at the root.
    pub fn parent(&self) -> Option<Self> {
        if self.turn() == 0 {
            return None;
        }
        let actions = self.actions();
        let outcomes = self.outcomes();
        Some(InfoStateKey::from_parts(
            &actions[..actions.len() - 1],
            &outcomes[..outcomes.len() - 1],
        ))
    }
}

impl fmt::Display for InfoStateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One joint history of play. Immutable: transitions return fresh states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    spec: GameSpec,
    turn: u8,
    hands: [CardSet; 2],
    actions: [Vec<u8>; 2],
    outcomes: Vec<i8>,
}

pub fn new_game(spec: GameSpec) -> Result<GameState> {
    if spec.num_cards < 2 {
        return Err(Error::InvalidSpec(format!(
            "num_cards must be at least 2, got {}",
            spec.num_cards
        )));
    }
    Ok(GameState {
        spec,
        turn: 0,
        hands: [CardSet::full(spec.num_cards), CardSet::full(spec.num_cards)],
        actions: [Vec::new(), Vec::new()],
        outcomes: Vec::new(),
    })
}

impl GameState {
    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn turn(&self) -> u8 {
        self.turn
    }

    pub fn is_terminal(&self) -> bool {
        self.turn == self.spec.num_cards
    }

    pub fn hand(&self, player: usize) -> CardSet {
        self.hands[player]
    }

    pub fn legal_actions(&self, player: usize) -> Vec<u8> {
        self.hands[player].iter().collect()
    }

    pub fn action_history(&self, player: usize) -> &[u8] {
        &self.actions[player]
    }

    /// Win/loss/draw history from player 0's perspective.
    pub fn outcome_history(&self) -> &[i8] {
        &self.outcomes
    }

    /// Plays one simultaneous turn; returns the successor and the outcome
    /// sign w = sign(a0 - a1) from player 0's perspective.
    pub fn apply_joint_action(&self, a0: u8, a1: u8) -> Result<(GameState, i8)> {
        if self.is_terminal() {
            return Err(Error::IllegalAction { player: 0, action: a0, turn: self.turn });
        }
        if !self.hands[0].contains(a0) {
            return Err(Error::IllegalAction { player: 0, action: a0, turn: self.turn });
        }
        if !self.hands[1].contains(a1) {
            return Err(Error::IllegalAction { player: 1, action: a1, turn: self.turn });
        }
        let w = bid_sign(a0, a1);
        let mut next = self.clone();
        next.turn += 1;
        next.hands[0] = next.hands[0].without(a0);
        next.hands[1] = next.hands[1].without(a1);
        next.actions[0].push(a0);
        next.actions[1].push(a1);
        next.outcomes.push(w);
        Ok((next, w))
    }

    /// Point difference for player 0; player 1's return is its negation.
    pub fn terminal_return(&self) -> Result<f64> {
        if !self.is_terminal() {
            return Err(Error::NotTerminal { turn: self.turn, num_cards: self.spec.num_cards });
        }
        let mut total = 0i32;
        for (t, &w) in self.outcomes.iter().enumerate() {
            total += i32::from(w) * i32::from(self.spec.point_card(t as u8));
        }
        Ok(f64::from(total))
    }

    /// Egocentric, perfect-recall observation key for `player`.
    pub fn infostate_key(&self, player: usize) -> InfoStateKey {
        let flip: i8 = if player == 0 { 1 } else { -1 };
        let outcomes: Vec<i8> = self.outcomes.iter().map(|&w| w * flip).collect();
        InfoStateKey::from_parts(&self.actions[player], &outcomes)
    }
}

/// All information-state keys reachable under some joint play, excluding
/// terminal histories. Both seats share one key space (the game is
/// symmetric), so keys are collected from both players' viewpoints.
pub fn enumerate_infostates(spec: GameSpec) -> Result<BTreeSet<InfoStateKey>> {
    let root = new_game(spec)?;
    let mut keys = BTreeSet::new();
    let mut frontier = vec![root];
    while let Some(state) = frontier.pop() {
        if state.is_terminal() {
            continue;
        }
        keys.insert(state.infostate_key(0));
        keys.insert(state.infostate_key(1));
        for a0 in state.legal_actions(0) {
            for a1 in state.legal_actions(1) {
                let (next, _) = state.apply_joint_action(a0, a1)?;
                frontier.push(next);
            }
        }
    }
    Ok(keys)
}
