//! Full games, tournaments and spot-suite runs with seeded reproducibility.

mod eval;
mod game;
mod tournament;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::{Agent, AgentError, GtAgent, HeuristicAgent, RandomAgent, SearchConfig};
use crate::llm::{Completer, LlmAgent, LlmConfig, Persona};
use crate::rng::RNG_ALGORITHM;
use crate::spots::Provenance;

pub use eval::{builtin_record, read_records, run_spot_eval, spot_seed, EvalBackend, RecordLog};
pub use game::{run_game, GameResult, TurnRecord, DEFAULT_TURN_CAP};
pub use tournament::{run_tournament, Matchup, WinMatrix};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Llm(#[from] crate::llm::LlmError),
}

/// An agent named on the command line or in a config file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentSpec {
    Random,
    Heuristic,
    Gt,
    Llm(String),
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSpec::Random => f.write_str("random"),
            AgentSpec::Heuristic => f.write_str("heuristic"),
            AgentSpec::Gt => f.write_str("gt"),
            AgentSpec::Llm(m) => write!(f, "llm:{m}"),
        }
    }
}

impl FromStr for AgentSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(AgentSpec::Random),
            "heuristic" => Ok(AgentSpec::Heuristic),
            "gt" => Ok(AgentSpec::Gt),
            _ => match s.strip_prefix("llm:") {
                Some(m) if !m.is_empty() => Ok(AgentSpec::Llm(m.to_string())),
                _ => Err(format!("unknown agent `{s}` (expected random, heuristic, gt or llm:<model>)")),
            },
        }
    }
}

impl Serialize for AgentSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AgentSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Builds a fresh agent for one seat.
pub type AgentFactory = dyn Fn(&AgentSpec) -> Result<Box<dyn Agent>, AgentError> + Sync;

/// Factory for the built-in agents, plus LLM agents when a service is given.
pub fn agent_factory(
    search: SearchConfig,
    llm: Option<(Arc<dyn Completer>, LlmConfig)>,
) -> impl Fn(&AgentSpec) -> Result<Box<dyn Agent>, AgentError> + Sync {
    move |spec| match spec {
        AgentSpec::Random => Ok(Box::new(RandomAgent) as Box<dyn Agent>),
        AgentSpec::Heuristic => Ok(Box::new(HeuristicAgent)),
        AgentSpec::Gt => Ok(Box::new(GtAgent::new(search))),
        AgentSpec::Llm(model) => match &llm {
            Some((c, cfg)) => {
                Ok(Box::new(LlmAgent::new(c.clone(), LlmConfig { model: model.clone(), ..cfg.clone() }, Persona::None)))
            }
            None => Err(AgentError::Llm(crate::llm::LlmError::Config(format!("no completion service for {spec}")))),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub roster: Vec<AgentSpec>,
    pub games: u32,
    pub seed: u64,
    pub turn_cap: u32,
    pub search: SearchConfig,
}

impl MatchConfig {
    pub fn new(roster: Vec<AgentSpec>, games: u32, seed: u64) -> Self {
        MatchConfig { roster, games, seed, turn_cap: DEFAULT_TURN_CAP, search: SearchConfig::default() }
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        if !(2..=4).contains(&self.roster.len()) {
            return Err(HarnessError::Config(format!("roster must list 2-4 agents, got {}", self.roster.len())));
        }
        if self.games == 0 {
            return Err(HarnessError::Config("games must be at least 1".into()));
        }
        self.search.check().map_err(HarnessError::Config)
    }
}

/// Settings read from a TOML file; every field is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub games: u32,
    pub turn_cap: u32,
    pub roster: Vec<AgentSpec>,
    pub personas: Vec<Persona>,
    pub corpus_dir: Option<PathBuf>,
    pub search: SearchConfig,
    pub llm: LlmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            games: 200,
            turn_cap: DEFAULT_TURN_CAP,
            roster: vec![AgentSpec::Random, AgentSpec::Heuristic, AgentSpec::Gt],
            personas: Persona::ALL.to_vec(),
            corpus_dir: None,
            search: SearchConfig::default(),
            llm: LlmConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Everything needed to reproduce a run's non-LLM outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub rng_algorithm: String,
    pub version: String,
    pub seed: u64,
    pub corpus: Option<Provenance>,
    pub config: RunConfig,
    pub spot_seeds: BTreeMap<String, u64>,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, corpus: Option<Provenance>) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(config.to_toml().as_bytes());
        h.update(serde_json::to_string(&corpus).unwrap_or_default().as_bytes());
        let run_id = hex::encode(&h.finalize()[..6]);
        RunManifest {
            run_id,
            command: command.to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            corpus,
            config: config.clone(),
            spot_seeds: BTreeMap::new(),
            started_unix: now(),
            finished_unix: None,
        }
    }

    pub fn finish(&mut self) {
        self.finished_unix = Some(now());
    }
}
