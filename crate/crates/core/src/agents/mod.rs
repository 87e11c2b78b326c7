//! Baseline policies: uniform random, greedy heuristic and depth-limited
//! expectiminimax / expectimax-MaxN search.

mod eval;
mod heuristic;
mod search;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{BoardLayout, Dice, GameState, Move, PlayerId};
use crate::rng::GameRng;

pub use eval::{evaluate_2p, evaluate_maxn, evaluate_maxn_raw, PlayerCounts};
pub use heuristic::{heuristic_decide, heuristic_score};
pub use search::{gt_decide, MemoKey, NodeKind, NodeValue, Search, SearchStats};

/// A chosen move plus optional diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    #[serde(rename = "move")]
    pub mv: Move,
    pub value: Option<f64>,
    pub rationale: Option<String>,
}

impl Decision {
    pub fn bare(mv: Move) -> Self {
        Decision { mv, value: None, rationale: None }
    }
}

/// Weights of the linear cutoff evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalWeights {
    pub progress: f64,
    pub finished: f64,
    pub base: f64,
    pub safe: f64,
}

impl Default for EvalWeights {
    fn default() -> Self {
        EvalWeights { progress: 0.0025, finished: 0.20, base: 0.05, safe: 0.01 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Remaining decision plies at the root.
    pub depth: u32,
    pub weights: EvalWeights,
    pub clip: f64,
    pub memo: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { depth: 2, weights: EvalWeights::default(), clip: 0.999, memo: true }
    }
}

impl SearchConfig {
    pub fn with_depth(self, depth: u32) -> Self {
        SearchConfig { depth, ..self }
    }

    pub fn with_memo(self, memo: bool) -> Self {
        SearchConfig { memo, ..self }
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return Err(format!("clip {} outside (0, 1)", self.clip));
        }
        let w = self.weights;
        if ![w.progress, w.finished, w.base, w.safe].iter().all(|x| x.is_finite()) {
            return Err("non-finite evaluator weight".into());
        }
        Ok(())
    }
}

/// Uniform choice among the legal moves; `None` when there is nothing to play.
pub fn random_decide(
    layout: &BoardLayout,
    state: &GameState,
    player: PlayerId,
    dice: Dice,
    rng: &mut GameRng,
) -> Option<Decision> {
    let moves = layout.moves_unchecked(state, player, dice);
    rng.pick(&moves).copied().map(Decision::bare)
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("agent produced an illegal move: {0}")]
    IllegalMove(String),
    #[error(transparent)]
    Llm(#[from] crate::llm::LlmError),
}

/// A seat-filling policy used by the game harness.
pub trait Agent: Send {
    fn name(&self) -> &str;

    /// Chooses a move for `state.current_player()`; `Ok(None)` means the
    /// player has no legal move and passes.
    fn decide(
        &mut self,
        layout: &BoardLayout,
        state: &GameState,
        dice: Dice,
        rng: &mut GameRng,
    ) -> Result<Option<Decision>, AgentError>;
}

#[derive(Debug, Default)]
pub struct RandomAgent;

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn decide(&mut self, layout: &BoardLayout, state: &GameState, dice: Dice, rng: &mut GameRng) -> Result<Option<Decision>, AgentError> {
        Ok(random_decide(layout, state, state.current_player(), dice, rng))
    }
}

#[derive(Debug, Default)]
pub struct HeuristicAgent;

impl Agent for HeuristicAgent {
    fn name(&self) -> &str {
        "heuristic"
    }

    fn decide(&mut self, layout: &BoardLayout, state: &GameState, dice: Dice, _rng: &mut GameRng) -> Result<Option<Decision>, AgentError> {
        Ok(heuristic_decide(layout, state, state.current_player(), dice))
    }
}

#[derive(Debug, Default)]
pub struct GtAgent {
    pub config: SearchConfig,
}

impl GtAgent {
    pub fn new(config: SearchConfig) -> Self {
        GtAgent { config }
    }
}

impl Agent for GtAgent {
    fn name(&self) -> &str {
        "gt"
    }

    fn decide(&mut self, layout: &BoardLayout, state: &GameState, dice: Dice, _rng: &mut GameRng) -> Result<Option<Decision>, AgentError> {
        Ok(gt_decide(&self.config, layout, state, state.current_player(), dice))
    }
}
