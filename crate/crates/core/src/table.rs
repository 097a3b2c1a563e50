//! Precomputed joint-history arena for fast exact evaluation.
//!
//! The full goofspiel tree is tiny at desk scale (32,826 joint histories at
//! K=5), so every exact computation walks a flat arena instead of re-deriving
//! states. Tables are memoized per `GameSpec` behind a process-wide cache.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::game::{self, bid_sign, GameSpec, InfoStateKey};
use crate::policy::TabularPolicy;

/// Largest card count for which the joint arena is tabulated. K=7 already
/// needs ~58M joint histories, far past desk scale.
pub const MAX_TABLE_CARDS: u8 = 6;

pub(crate) const NO_KEY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub(crate) turn: u8,
    pub(crate) key0: u32,
    pub(crate) key1: u32,
    pub(crate) child_offset: u32,
}

/// Immutable per-spec lookup structure: interned information-state keys, the
/// per-key observation tree, and the joint-history arena.
#[derive(Debug)]
pub struct GameTable {
    spec: GameSpec,
    keys: Vec<InfoStateKey>,
    key_index: HashMap<InfoStateKey, usize>,
    key_turn: Vec<u8>,
    key_legal: Vec<Vec<u8>>,
    key_parent: Vec<Option<(usize, usize)>>,
    /// child key id per (key, action index, outcome w+1); NO_KEY when the
    /// continuation is terminal or that (action, outcome) pair is unreachable.
    key_child: Vec<Vec<[u32; 3]>>,
    root_key: usize,
    pub(crate) nodes: Vec<Node>,
    pub(crate) children: Vec<u32>,
    pub(crate) nodes_by_key0: Vec<Vec<u32>>,
}

static TABLE_CACHE: OnceLock<Mutex<HashMap<GameSpec, Arc<GameTable>>>> = OnceLock::new();

impl GameTable {
    /// Fetches (building on first use) the cached table for `spec`.
    pub fn get(spec: GameSpec) -> Result<Arc<GameTable>> {
        if spec.num_cards > MAX_TABLE_CARDS {
            return Err(Error::InvalidSpec(format!(
                "num_cards {} exceeds the exact-tabulation limit {}",
                spec.num_cards, MAX_TABLE_CARDS
            )));
        }
        let cache = TABLE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("table cache poisoned");
        if let Some(table) = guard.get(&spec) {
            return Ok(Arc::clone(table));
        }
        let table = Arc::new(GameTable::build(spec)?);
        guard.insert(spec, Arc::clone(&table));
        Ok(table)
    }

    fn build(spec: GameSpec) -> Result<GameTable> {
        let key_set = game::enumerate_infostates(spec)?;
        let keys: Vec<InfoStateKey> = key_set.into_iter().collect();
        let key_index: HashMap<InfoStateKey, usize> =
            keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();

        let mut key_turn = Vec::with_capacity(keys.len());
        let mut key_legal = Vec::with_capacity(keys.len());
        let mut key_parent = Vec::with_capacity(keys.len());
        for key in &keys {
            key_turn.push(key.turn() as u8);
            let mut hand = game::CardSet::full(spec.num_cards);
            for a in key.actions() {
                hand = hand.without(a);
            }
            key_legal.push(hand.iter().collect::<Vec<u8>>());
            let parent = key.parent().map(|p| {
                let pid = key_index[&p];
                let last = *key.actions().last().expect("non-root key has actions");
                let a_idx = key_legal_position(&keys[pid], spec, last);
                (pid, a_idx)
            });
            key_parent.push(parent);
        }
        let root_key = key_index[&InfoStateKey::root()];

        let mut key_child: Vec<Vec<[u32; 3]>> =
            key_legal.iter().map(|legal| vec![[NO_KEY; 3]; legal.len()]).collect();

        let mut nodes = Vec::new();
        let mut children: Vec<u32> = Vec::new();
        let mut nodes_by_key0: Vec<Vec<u32>> = vec![Vec::new(); keys.len()];
        let root_state = game::new_game(spec)?;
        nodes.push(Node { turn: 0, key0: root_key as u32, key1: root_key as u32, child_offset: u32::MAX });
        nodes_by_key0[root_key].push(0);
        let mut queue: VecDeque<(game::GameState, usize)> = VecDeque::new();
        queue.push_back((root_state, 0));

        while let Some((state, id)) = queue.pop_front() {
            if state.is_terminal() {
                continue;
            }
            let offset = children.len() as u32;
            nodes[id].child_offset = offset;
            let legal0 = state.legal_actions(0);
            let legal1 = state.legal_actions(1);
            let parent_key0 = nodes[id].key0 as usize;
            for (a_idx, &a0) in legal0.iter().enumerate() {
                for &a1 in &legal1 {
                    let (next, w) = state.apply_joint_action(a0, a1)?;
                    let child_id = nodes.len();
                    let (k0, k1) = if next.is_terminal() {
                        (NO_KEY, NO_KEY)
                    } else {
                        let k0 = key_index[&next.infostate_key(0)] as u32;
                        let k1 = key_index[&next.infostate_key(1)] as u32;
                        nodes_by_key0[k0 as usize].push(child_id as u32);
                        (k0, k1)
                    };
                    nodes.push(Node { turn: next.turn(), key0: k0, key1: k1, child_offset: u32::MAX });
                    children.push(child_id as u32);
                    let slot = &mut key_child[parent_key0][a_idx][(w + 1) as usize];
                    if k0 != NO_KEY {
                        debug_assert!(*slot == NO_KEY || *slot == k0);
                        *slot = k0;
                    }
                    queue.push_back((next, child_id));
                }
            }
        }

        Ok(GameTable {
            spec,
            keys,
            key_index,
            key_turn,
            key_legal,
            key_parent,
            key_child,
            root_key,
            nodes,
            children,
            nodes_by_key0,
        })
    }

    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn keys(&self) -> &[InfoStateKey] {
        &self.keys
    }

    pub fn num_keys(&self) -> usize {
        self.keys.len()
    }

    pub fn key_id(&self, key: &InfoStateKey) -> Option<usize> {
        self.key_index.get(key).copied()
    }

    pub fn root_key_id(&self) -> usize {
        self.root_key
    }

    pub fn key_turn(&self, id: usize) -> u8 {
        self.key_turn[id]
    }

    pub fn key_legal(&self, id: usize) -> &[u8] {
        &self.key_legal[id]
    }

    /// Parent key id and the action index (into the parent's legal list) that
    /// led here; None at the root.
    pub fn key_parent(&self, id: usize) -> Option<(usize, usize)> {
        self.key_parent[id]
    }

    /// Successor key reached from `id` by the action at `action_idx` with
    /// outcome `w`; None when the continuation is terminal or unreachable.
    pub fn key_child(&self, id: usize, action_idx: usize, w: i8) -> Option<usize> {
        let c = self.key_child[id][action_idx][(w + 1) as usize];
        if c == NO_KEY {
            None
        } else {
            Some(c as usize)
        }
    }

    pub(crate) fn node_children(&self, node: &Node) -> &[u32] {
        let legal0 = self.key_legal[node.key0 as usize].len();
        let legal1 = self.key_legal[node.key1 as usize].len();
        let start = node.child_offset as usize;
        &self.children[start..start + legal0 * legal1]
    }

    /// Converts a tabular policy into a per-key-id probability table aligned
    /// with each key's legal-action list.
    pub fn densify(&self, policy: &TabularPolicy) -> Result<DensePolicy> {
        if policy.spec() != self.spec {
            return Err(Error::SpecMismatch(format!(
                "policy is for K={}, table is for K={}",
                policy.spec().num_cards,
                self.spec.num_cards
            )));
        }
        let mut probs = Vec::with_capacity(self.keys.len());
        for (id, key) in self.keys.iter().enumerate() {
            let dist = policy
                .distribution(key)
                .ok_or_else(|| Error::MissingKey(key.as_str().to_string()))?;
            let legal = &self.key_legal[id];
            let mut row = vec![0.0; legal.len()];
            for &(action, p) in dist.entries() {
                match legal.iter().position(|&l| l == action) {
                    Some(i) => row[i] += p,
                    None => {
                        return Err(Error::InvalidSpec(format!(
                            "policy places probability on illegal bid {action} at {key}"
                        )))
                    }
                }
            }
            probs.push(row);
        }
        Ok(DensePolicy { probs })
    }
}

fn key_legal_position(parent: &InfoStateKey, spec: GameSpec, action: u8) -> usize {
    let mut hand = game::CardSet::full(spec.num_cards);
    for a in parent.actions() {
        hand = hand.without(a);
    }
    let position = hand.iter().position(|c| c == action);
    position.expect("action legal at parent")
}

/// Dense per-key action probabilities; row i aligns with key i's legal list.
#[derive(Debug, Clone)]
pub struct DensePolicy {
    pub(crate) probs: Vec<Vec<f64>>,
}

impl DensePolicy {
    pub(crate) fn at(&self, key_id: usize) -> &[f64] {
        &self.probs[key_id]
    }
}

/// Per-turn reward to player 0 when bids `a0` and `a1` meet at `turn`.
pub(crate) fn turn_reward(spec: GameSpec, turn: u8, a0: u8, a1: u8) -> f64 {
    f64::from(bid_sign(a0, a1)) * f64::from(spec.point_card(turn))
}
