use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::board::{BoardLayout, Dice, GameState, Move, PlayerId, TokenStatus, TOKENS_PER_PLAYER};
use crate::rng::GameRng;

use super::LlmError;

static STRICT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(\d+)\s*\|\s*(\S.*?)\s*$").unwrap());
static INDEX_ONLY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(\d+)\s*\|?\s*$").unwrap());

/// How responses without a reason are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseMode {
    /// `<int> | <reason>` only.
    #[default]
    Strict,
    /// Also accepts a bare index line.
    Lenient,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub token_index: Option<u8>,
    pub reason: Option<String>,
    pub format_valid: bool,
}

impl ParsedResponse {
    fn invalid() -> Self {
        ParsedResponse::default()
    }
}

fn index(digits: &str) -> Option<u8> {
    digits.parse::<u8>().ok().filter(|&i| (i as usize) < TOKENS_PER_PLAYER)
}

/// Parses the first line shaped like `<int> | <reason>`. An index outside
/// 0..=3 makes the response format-invalid.
pub fn parse_response(text: &str, mode: ParseMode) -> ParsedResponse {
    for line in text.lines() {
        if let Some(c) = STRICT.captures(line) {
            return match index(&c[1]) {
                Some(i) => ParsedResponse { token_index: Some(i), reason: Some(c[2].to_string()), format_valid: true },
                None => ParsedResponse::invalid(),
            };
        }
        if mode == ParseMode::Lenient {
            if let Some(c) = INDEX_ONLY.captures(line) {
                return match index(&c[1]) {
                    Some(i) => ParsedResponse { token_index: Some(i), reason: None, format_valid: true },
                    None => ParsedResponse::invalid(),
                };
            }
        }
    }
    ParsedResponse::invalid()
}

/// The move actually played for one response, with pre-fallback flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjudicatedDecision {
    pub final_move: Move,
    pub was_format_invalid: bool,
    pub was_move_invalid: bool,
    /// Set when no response text was obtained at all.
    pub transport_error: Option<String>,
    /// Token named by a format-valid response, legal or not.
    pub chosen_token: Option<u8>,
    /// Why the named token could not move, if it could not.
    pub chosen_status: Option<TokenStatus>,
    pub raw_text: String,
}

impl AdjudicatedDecision {
    pub fn is_valid(&self) -> bool {
        !self.was_format_invalid && !self.was_move_invalid && self.transport_error.is_none()
    }
}

fn fallback(moves: &[Move], rng: &mut GameRng) -> Move {
    *rng.pick(moves).expect("non-empty legal move list")
}

/// Maps a parsed response onto a legal move, falling back to a uniformly
/// random legal move when the response is unusable.
pub fn adjudicate(
    parsed: &ParsedResponse,
    raw_text: &str,
    layout: &BoardLayout,
    state: &GameState,
    player: PlayerId,
    dice: Dice,
    rng: &mut GameRng,
) -> Result<AdjudicatedDecision, LlmError> {
    let moves = layout.legal_moves(state, player, dice).map_err(|e| LlmError::Unadjudicable(e.to_string()))?;
    if moves.is_empty() {
        return Err(LlmError::Unadjudicable(format!("player {player} has no legal move with dice {dice}")));
    }
    let base = AdjudicatedDecision {
        final_move: moves[0],
        was_format_invalid: false,
        was_move_invalid: false,
        transport_error: None,
        chosen_token: None,
        chosen_status: None,
        raw_text: raw_text.to_string(),
    };
    let Some(token) = parsed.token_index.filter(|_| parsed.format_valid) else {
        return Ok(AdjudicatedDecision { final_move: fallback(&moves, rng), was_format_invalid: true, ..base });
    };
    match moves.iter().find(|m| m.token == token) {
        Some(&m) => Ok(AdjudicatedDecision { final_move: m, chosen_token: Some(token), ..base }),
        None => Ok(AdjudicatedDecision {
            final_move: fallback(&moves, rng),
            was_move_invalid: true,
            chosen_token: Some(token),
            chosen_status: Some(layout.token_status(state, player, dice, token)),
            ..base
        }),
    }
}

/// Fallback record for a request that never produced text.
pub fn adjudicate_transport_failure(
    error: &str,
    layout: &BoardLayout,
    state: &GameState,
    player: PlayerId,
    dice: Dice,
    rng: &mut GameRng,
) -> Result<AdjudicatedDecision, LlmError> {
    let mut d = adjudicate(&ParsedResponse::invalid(), "", layout, state, player, dice, rng)?;
    d.was_format_invalid = false;
    d.transport_error = Some(error.to_string());
    Ok(d)
}
