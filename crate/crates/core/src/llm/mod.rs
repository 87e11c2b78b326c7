//! Prompting a text-completion service and turning its answer into a move.

mod client;
mod parse;
mod prompt;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, AgentError, Decision};
use crate::board::{BoardLayout, Dice, GameState};
use crate::rng::GameRng;
use crate::spots::SpotScenario;

pub use client::{
    complete, Backoff, CompletionRequest, Completer, FixtureEntry, Fixtures, RateLimiter, RecordingCompleter,
    ReplayCompleter, ScriptedCompleter, StubCompleter, TransportError, TransportErrorKind, ENV_API_KEY, ENV_ENDPOINT,
};
#[cfg(feature = "http")]
pub use client::HttpCompleter;
pub use parse::{adjudicate, adjudicate_transport_failure, parse_response, AdjudicatedDecision, ParseMode, ParsedResponse};
pub use prompt::{render_prompt, render_view, Persona, PromptSpec, PromptView};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("spot cannot be adjudicated: {0}")]
    Unadjudicable(String),
}

/// Model settings shared by spot evaluation and full games.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub model: String,
    pub max_retries: u32,
    pub timeout_secs: u64,
    pub parse_mode: ParseMode,
    /// Concurrent requests during spot evaluation.
    pub concurrency: usize,
    /// Request rate ceiling; 0 disables the limiter.
    pub requests_per_second: f64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            model: "unset".into(),
            max_retries: 3,
            timeout_secs: 60,
            parse_mode: ParseMode::Strict,
            concurrency: 4,
            requests_per_second: 0.0,
        }
    }
}

impl LlmConfig {
    pub fn request(&self, prompt: String) -> CompletionRequest {
        CompletionRequest {
            prompt,
            model: self.model.clone(),
            temperature: 0.0,
            max_retries: self.max_retries,
            timeout: std::time::Duration::from_secs(self.timeout_secs),
        }
    }
}

/// Full trace of one spot query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpotOutcome {
    pub prompt: String,
    pub parsed: ParsedResponse,
    pub decision: AdjudicatedDecision,
}

/// Renders, queries, parses and adjudicates one spot under one persona.
pub fn evaluate_spot(
    completer: &dyn Completer,
    cfg: &LlmConfig,
    backoff: Backoff,
    layout: &BoardLayout,
    spot: &SpotScenario,
    persona: Persona,
    rng: &mut GameRng,
) -> Result<SpotOutcome, LlmError> {
    let prompt = render_prompt(&PromptSpec::new(spot, persona), layout)?;
    let state = spot.state().map_err(LlmError::Config)?;
    let (parsed, decision) = match complete(completer, &cfg.request(prompt.clone()), backoff) {
        Ok(text) => {
            let parsed = parse_response(&text, cfg.parse_mode);
            let d = adjudicate(&parsed, &text, layout, &state, spot.llm_player_id, spot.dice, rng)?;
            (parsed, d)
        }
        Err(e) => {
            let d = adjudicate_transport_failure(&e.tag(), layout, &state, spot.llm_player_id, spot.dice, rng)?;
            (ParsedResponse::default(), d)
        }
    };
    Ok(SpotOutcome { prompt, parsed, decision })
}

/// Seat-filling agent backed by a completion service.
pub struct LlmAgent {
    name: String,
    completer: Arc<dyn Completer>,
    pub config: LlmConfig,
    pub persona: Persona,
    pub backoff: Backoff,
    /// Responses that needed the random fallback.
    pub fallbacks: u32,
}

impl LlmAgent {
    pub fn new(completer: Arc<dyn Completer>, config: LlmConfig, persona: Persona) -> Self {
        LlmAgent {
            name: format!("llm:{}", config.model),
            completer,
            config,
            persona,
            backoff: Backoff::default(),
            fallbacks: 0,
        }
    }
}

impl Agent for LlmAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, layout: &BoardLayout, state: &GameState, dice: Dice, rng: &mut GameRng) -> Result<Option<Decision>, AgentError> {
        let player = state.current_player();
        if layout.moves_unchecked(state, player, dice).is_empty() {
            return Ok(None);
        }
        let view = PromptView { state, player, dice, persona: self.persona, history: None, persona_text: None };
        let prompt = render_view(&view, layout)?;
        let d = match complete(self.completer.as_ref(), &self.config.request(prompt), self.backoff) {
            Ok(text) => {
                let parsed = parse_response(&text, self.config.parse_mode);
                adjudicate(&parsed, &text, layout, state, player, dice, rng)?
            }
            Err(e) => adjudicate_transport_failure(&e.tag(), layout, state, player, dice, rng)?,
        };
        if !d.is_valid() {
            self.fallbacks += 1;
        }
        Ok(Some(Decision { mv: d.final_move, value: None, rationale: Some(d.raw_text) }))
    }
}
