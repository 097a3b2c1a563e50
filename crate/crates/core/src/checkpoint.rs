//! Run configuration and the on-disk checkpoint format. Checkpoints are
//! schema-versioned JSON, written atomically (temp file in the target
//! directory, then rename), and everything loaded from disk is re-validated
//! through the domain constructors.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalMode;
use crate::game::{GameSpec, InfoStateKey};
use crate::meta::{MetaGraph, PayoffMatrix};
use crate::policy::{ActionDistribution, MixtureWeights, PopulationSnapshot, TabularPolicy};
use crate::trainer::{ConditionalPolicyStore, RoundRecord, TrainResult, TrainerConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Default Dirichlet concentration levels for the any-mixture experiment,
/// spanning low-entropy (near one-hot) to near-uniform opponent mixtures.
pub const DEFAULT_LEVELS: [f64; 7] = [0.055, 0.11, 0.22, 0.45, 1.0, 3.0, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_samples_per_level")]
    pub samples_per_level: usize,
    /// Episode count for sampled evaluations (Monte-Carlo returns, divergence
    /// rollouts, posterior traces).
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default = "default_mode")]
    pub mode: EvalMode,
}

fn default_levels() -> Vec<f64> {
    DEFAULT_LEVELS.to_vec()
}
fn default_samples_per_level() -> usize {
    64
}
fn default_episodes() -> usize {
    32
}
fn default_mode() -> EvalMode {
    EvalMode::Exact
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            levels: default_levels(),
            samples_per_level: default_samples_per_level(),
            episodes: default_episodes(),
            mode: default_mode(),
        }
    }
}

/// Everything that determines a run: the game, the trainer, the evaluation
/// protocol, and where outputs go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: GameSpec,
    #[serde(default)]
    pub trainer: TrainerConfig,
    #[serde(default)]
    pub eval: EvalSettings,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Convenience override: when set, replaces trainer.rng_seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(spec: GameSpec) -> Self {
        ExperimentConfig {
            spec,
            trainer: TrainerConfig::default(),
            eval: EvalSettings::default(),
            out_dir: None,
            seed: None,
        }
    }

    /// Trainer configuration with the top-level seed override applied.
    pub fn effective_trainer(&self) -> TrainerConfig {
        let mut t = self.trainer.clone();
        if let Some(seed) = self.seed {
            t.rng_seed = seed;
        }
        t
    }

    pub fn validate(&self) -> Result<()> {
        self.effective_trainer().validate()?;
        if self.eval.levels.is_empty() {
            return Err(Error::InvalidSpec("empty concentration level list".to_string()));
        }
        if self.eval.samples_per_level == 0 || self.eval.episodes == 0 {
            return Err(Error::InvalidSpec("eval sample counts must be positive".to_string()));
        }
        Ok(())
    }
}

type PolicyMap = BTreeMap<InfoStateKey, ActionDistribution>;

/// A completed run: population, meta-game state, conditional store, history,
/// and the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub spec: GameSpec,
    pub rng_seed: u64,
    pub policies: Vec<PolicyMap>,
    pub meta_graph: Vec<Vec<f64>>,
    pub payoff_matrix: Vec<Vec<f64>>,
    pub store_anchors: Vec<Vec<f64>>,
    pub store_policies: Vec<PolicyMap>,
    pub history: Vec<RoundRecord>,
}

impl Checkpoint {
    pub fn from_result(config: &ExperimentConfig, result: &TrainResult) -> Self {
        let snapshot = &result.snapshot;
        Checkpoint {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            spec: snapshot.spec(),
            rng_seed: config.effective_trainer().rng_seed,
            policies: snapshot.policies().iter().map(|p| p.map().clone()).collect(),
            meta_graph: snapshot.meta_graph().rows().to_vec(),
            payoff_matrix: snapshot.payoff_matrix().rows().to_vec(),
            store_anchors: result
                .store
                .anchors()
                .iter()
                .map(|a| a.weights().to_vec())
                .collect(),
            store_policies: result.store.policies().iter().map(|p| p.map().clone()).collect(),
            history: result.history.clone(),
        }
    }

    /// Rebuilds the population through the validating constructors.
    pub fn snapshot(&self) -> Result<PopulationSnapshot> {
        let policies = self
            .policies
            .iter()
            .map(|m| TabularPolicy::new(self.spec, m.clone()))
            .collect::<Result<Vec<_>>>()?;
        let meta_graph = MetaGraph::new(self.meta_graph.clone())?;
        let payoff = PayoffMatrix::new(self.payoff_matrix.clone())?;
        PopulationSnapshot::new(self.spec, policies, meta_graph, payoff)
    }

    /// Rebuilds the conditional store through the validating constructors.
    pub fn store(&self) -> Result<ConditionalPolicyStore> {
        let anchors = self
            .store_anchors
            .iter()
            .map(|w| MixtureWeights::new(w.clone()))
            .collect::<Result<Vec<_>>>()?;
        let policies = self
            .store_policies
            .iter()
            .map(|m| TabularPolicy::new(self.spec, m.clone()))
            .collect::<Result<Vec<_>>>()?;
        ConditionalPolicyStore::from_parts(self.spec, anchors, policies)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(json)?;
        if ck.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "checkpoint schema {} but this build reads {}",
                ck.schema_version, SCHEMA_VERSION
            )));
        }
        Ok(ck)
    }

    /// Writes the checkpoint next to `path` and renames it into place, so a
    /// crash never leaves a torn file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = self.to_json()?;
        write_atomic(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path)?;
        Self::from_json(&json)
    }
}

/// Atomic file write used for every artifact: temp file in the destination
/// directory, flushed, then renamed over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::{train, AbrKind};

    fn tiny_config() -> ExperimentConfig {
        let mut config = ExperimentConfig::new(GameSpec::new(3).unwrap());
        config.trainer = TrainerConfig {
            epsilon: 0.5,
            grid_resolution: 2,
            max_population: 3,
            abr_kind: AbrKind::ExactOracle,
            rng_seed: 5,
            ..TrainerConfig::default()
        };
        config
    }

    #[test]
    fn checkpoint_round_trips_through_json() {
        let config = tiny_config();
        let result = train(&config.effective_trainer(), config.spec).unwrap();
        let ck = Checkpoint::from_result(&config, &result);
        let json = ck.to_json().unwrap();
        let back = Checkpoint::from_json(&json).unwrap();
        assert_eq!(ck, back);

        let snapshot = back.snapshot().unwrap();
        assert_eq!(snapshot.len(), result.snapshot.len());
        for (a, b) in snapshot.policies().iter().zip(result.snapshot.policies()) {
            assert_eq!(a.map(), b.map());
        }
        assert_eq!(snapshot.meta_graph(), result.snapshot.meta_graph());
        assert_eq!(snapshot.payoff_matrix(), result.snapshot.payoff_matrix());

        let store = back.store().unwrap();
        assert_eq!(store.len(), result.store.len());
        for (a, b) in store.anchors().iter().zip(result.store.anchors()) {
            assert_eq!(a.weights(), b.weights());
        }
    }

    #[test]
    fn reserialization_is_byte_identical() {
        let config = tiny_config();
        let result = train(&config.effective_trainer(), config.spec).unwrap();
        let ck = Checkpoint::from_result(&config, &result);
        let json = ck.to_json().unwrap();
        let again = Checkpoint::from_json(&json).unwrap().to_json().unwrap();
        assert_eq!(json, again);
    }

    #[test]
    fn atomic_save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("checkpoint.json");
        let config = tiny_config();
        let result = train(&config.effective_trainer(), config.spec).unwrap();
        let ck = Checkpoint::from_result(&config, &result);
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(ck, back);
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let config = tiny_config();
        let result = train(&config.effective_trainer(), config.spec).unwrap();
        let mut ck = Checkpoint::from_result(&config, &result);
        ck.schema_version = 99;
        let json = serde_json::to_string(&ck).unwrap();
        assert!(matches!(Checkpoint::from_json(&json), Err(Error::Schema(_))));
    }

    #[test]
    fn seed_override_feeds_the_trainer() {
        let mut config = tiny_config();
        config.seed = Some(99);
        assert_eq!(config.effective_trainer().rng_seed, 99);
        config.seed = None;
        assert_eq!(config.effective_trainer().rng_seed, 5);
    }

    #[test]
    fn config_defaults_fill_missing_fields() {
        let json = r#"{"spec": {"num_cards": 3}}"#;
        let config: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(config.spec.num_cards, 3);
        assert_eq!(config.trainer, TrainerConfig::default());
        assert_eq!(config.eval.levels.len(), 7);
        assert_eq!(config.eval.samples_per_level, 64);
        assert_eq!(config.eval.mode, EvalMode::Exact);
        config.validate().unwrap();
    }
}
