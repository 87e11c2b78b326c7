//! Positions for the benchmarks, sampled from random self-play.

use ludo_core::{BoardLayout, GameRng, GameState, PlayerId};

pub const LAYOUT: BoardLayout = BoardLayout::standard();

/// Non-terminal positions reached after `plies` random half-turns, one per
/// game, with dice to roll from each.
pub fn midgame_positions(players: &[PlayerId], plies: u32, count: usize, seed: u64) -> Vec<GameState> {
    let mut rng = GameRng::seed_from(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut s = GameState::initial(players).expect("valid roster");
        let mut done = false;
        for _ in 0..plies {
            let p = s.current_player();
            let d = rng.roll();
            let moves = LAYOUT.moves_unchecked(&s, p, d);
            let next = LAYOUT.next_player(&s, d, !moves.is_empty());
            if let Some(m) = rng.pick(&moves) {
                s = LAYOUT.apply_unchecked(&s, p, m);
            }
            if LAYOUT.winner(&s).is_some() {
                done = true;
                break;
            }
            s = s.with_current(next);
        }
        if !done {
            out.push(s);
        }
    }
    out
}
