//! Ludo rules engine with baseline agents, a spot-scenario benchmark corpus,
//! an LLM prompting bridge, behavioral metrics and a seeded game harness.

pub mod agents;
pub mod board;
pub mod harness;
pub mod llm;
pub mod metrics;
pub mod rng;
pub mod spots;

pub use agents::{gt_decide, heuristic_decide, Agent, Decision, SearchConfig};
pub use board::{BoardLayout, Dice, EngineError, GameState, Move, PlayerId, Position, TokenStatus};
pub use rng::{GameRng, RNG_ALGORITHM};
pub use spots::{Category, SpotScenario};
