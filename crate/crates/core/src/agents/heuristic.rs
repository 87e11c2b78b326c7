use crate::board::{BoardLayout, Dice, GameState, Move, PlayerId};

use super::Decision;

const LEAVE_BASE_SCORE: i32 = 50;
const CAPTURE_BONUS: i32 = 100;
const SAFE_BONUS: i32 = 20;

/// Greedy one-step score of a legal move.
///
/// Leaving base is worth a flat 50. Otherwise the positional score is the new
/// relative progress on the main track, or `52 + step` on the home path where
/// `step` counts home squares from 1. Capturing adds 100 and landing on a
/// safe square adds 20.
pub fn heuristic_score(layout: &BoardLayout, _state: &GameState, player: PlayerId, dice: Dice, mv: &Move) -> i32 {
    if mv.leaves_base {
        return LEAVE_BASE_SCORE;
    }
    let mut score = if mv.to.is_home_path() {
        let home_start = layout.home_start[player as usize];
        52 + (mv.to.0 - home_start + 1) as i32
    } else {
        let rel = layout.rel_progress(player, mv.from).ok().flatten().unwrap_or(0);
        rel as i32 + dice.value() as i32
    };
    if mv.capture.is_some() {
        score += CAPTURE_BONUS;
    }
    if mv.lands_safe {
        score += SAFE_BONUS;
    }
    score
}

/// Highest-scoring legal move, ties to the lowest token index.
pub fn heuristic_decide(layout: &BoardLayout, state: &GameState, player: PlayerId, dice: Dice) -> Option<Decision> {
    let moves = layout.moves_unchecked(state, player, dice);
    let mut best: Option<(i32, Move)> = None;
    for m in moves {
        let s = heuristic_score(layout, state, player, dice, &m);
        if best.is_none_or(|(b, _)| s > b) {
            best = Some((s, m));
        }
    }
    best.map(|(s, mv)| Decision { mv, value: Some(s as f64), rationale: Some(format!("heuristic score {s}")) })
}
