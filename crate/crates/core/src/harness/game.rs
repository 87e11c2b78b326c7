use serde::{Deserialize, Serialize};

use crate::agents::{Agent, AgentError};
use crate::board::{BoardLayout, Dice, GameState, Move, PlayerId, MAX_PLAYERS};
use crate::rng::{derive_seed, GameRng};

pub const DEFAULT_TURN_CAP: u32 = 2_000;

/// One roll of the dice and what came of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub half_turn: u32,
    pub player: PlayerId,
    pub dice: Dice,
    /// `None` when the player had no legal move and passed.
    #[serde(rename = "move")]
    pub mv: Option<Move>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameResult {
    pub winner: PlayerId,
    /// Winner decided by progress at the turn cap rather than by finishing.
    pub adjudicated: bool,
    pub half_turns: u32,
    pub captures: [u32; MAX_PLAYERS],
    pub finishes: [u32; MAX_PLAYERS],
    pub final_state: GameState,
    pub transcript: Vec<TurnRecord>,
}

/// Plays one game. `seats[i]` is the player id driven by `agents[i]`; play
/// starts with the lowest seat id. Dice come from one stream and each seat's
/// agent draws from its own stream, all derived from `seed`.
pub fn run_game(
    layout: &BoardLayout,
    agents: &mut [Box<dyn Agent>],
    seats: &[PlayerId],
    seed: u64,
    turn_cap: u32,
) -> Result<GameResult, AgentError> {
    assert_eq!(agents.len(), seats.len(), "one agent per seat");
    let mut state = GameState::initial(seats).map_err(|e| AgentError::IllegalMove(e.to_string()))?;
    let mut dice_rng = GameRng::seed_from(derive_seed(seed, &[0]));
    let mut agent_rngs: Vec<GameRng> =
        (0..seats.len()).map(|i| GameRng::seed_from(derive_seed(seed, &[1, i as u64]))).collect();
    let seat_of = |p: PlayerId| seats.iter().position(|&s| s == p).expect("current player has a seat");
    let mut result = GameResult {
        winner: 0,
        adjudicated: false,
        half_turns: 0,
        captures: [0; MAX_PLAYERS],
        finishes: [0; MAX_PLAYERS],
        final_state: state,
        transcript: Vec::new(),
    };
    while result.half_turns < turn_cap {
        let player = state.current_player();
        let dice = dice_rng.roll();
        let seat = seat_of(player);
        let decision = agents[seat].decide(layout, &state, dice, &mut agent_rngs[seat])?;
        let mv = match decision {
            Some(d) => {
                let next = layout.apply_move(&state, player, dice, &d.mv).map_err(|e| {
                    AgentError::IllegalMove(format!("{} at half-turn {}: {e}", agents[seat].name(), result.half_turns))
                })?;
                if d.mv.capture.is_some() {
                    result.captures[player as usize] += 1;
                }
                if d.mv.finishes {
                    result.finishes[player as usize] += 1;
                }
                state = next;
                Some(d.mv)
            }
            None => {
                if !layout.moves_unchecked(&state, player, dice).is_empty() {
                    return Err(AgentError::IllegalMove(format!("{} passed with a legal move available", agents[seat].name())));
                }
                None
            }
        };
        result.transcript.push(TurnRecord { half_turn: result.half_turns, player, dice, mv });
        result.half_turns += 1;
        if let Some(w) = layout.winner(&state) {
            result.winner = w;
            result.final_state = state;
            return Ok(result);
        }
        state = state.with_current(layout.next_player(&state, dice, mv.is_some()));
    }
    result.winner = layout.adjudicate(&state);
    result.adjudicated = true;
    result.final_state = state;
    Ok(result)
}
