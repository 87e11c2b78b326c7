//! Shared fixtures for the integration tests: a random valid-state sampler and
//! a brute-force move enumerator that walks tokens square by square.

#![allow(dead_code)]

use ludo_core::board::{BoardLayout, Capture, Dice, GameState, Move, PlayerId, Position};
use ludo_core::GameRng;

pub const L: BoardLayout = BoardLayout::standard();

const STARTS: [i8; 4] = [0, 13, 26, 39];
const HOMES: [i8; 4] = [52, 58, 64, 70];
const SAFE: [i8; 8] = [0, 8, 13, 21, 26, 34, 39, 47];

/// The 58 squares a token of `player` visits, in order, built by stepping
/// around the ring one square at a time.
pub fn walk(player: PlayerId) -> Vec<i8> {
    let mut path = Vec::with_capacity(58);
    let mut sq = STARTS[player as usize];
    for _ in 0..52 {
        path.push(sq);
        sq = if sq == 51 { 0 } else { sq + 1 };
    }
    for k in 0..6 {
        path.push(HOMES[player as usize] + k);
    }
    path
}

fn occupant(state: &GameState, mover: PlayerId, sq: i8) -> Option<Capture> {
    for q in state.active_players() {
        if q == mover {
            continue;
        }
        for (t, pos) in state.tokens(q).iter().enumerate() {
            if pos.0 == sq {
                return Some(Capture { player: q, token: t as u8 });
            }
        }
    }
    None
}

/// Legal moves by direct simulation of the rules.
pub fn brute_force_moves(state: &GameState, player: PlayerId, dice: Dice) -> Vec<Move> {
    let path = walk(player);
    let end = *path.last().unwrap();
    let own = state.tokens(player);
    let mut out = Vec::new();
    for t in 0..4usize {
        let from = own[t].0;
        let dest = if from == -1 {
            if dice.value() != 6 {
                continue;
            }
            path[0]
        } else {
            if from == end {
                continue;
            }
            let mut i = path.iter().position(|&s| s == from).expect("token on its own path");
            let mut ok = true;
            for _ in 0..dice.value() {
                i += 1;
                if i >= path.len() {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            path[i]
        };
        let stacked = (0..4).any(|j| j != t && own[j].0 == dest);
        if stacked && dest != end {
            continue;
        }
        let on_ring = (0..52).contains(&dest);
        let safe = SAFE.contains(&dest);
        out.push(Move {
            token: t as u8,
            from: Position(from),
            to: Position(dest),
            leaves_base: from == -1,
            capture: if on_ring && !safe { occupant(state, player, dest) } else { None },
            enters_home: (0..52).contains(&from) && dest >= 52,
            finishes: dest == end,
            lands_safe: safe,
        });
    }
    out
}

/// A uniformly drawn valid position with 2-4 players. Roughly a third of the
/// tokens sit in base, most of the rest on the ring, some on home paths.
pub fn random_state(rng: &mut GameRng) -> GameState {
    loop {
        let n = 2 + rng.below(3) as usize;
        let mut ids: Vec<PlayerId> = vec![0, 1, 2, 3];
        while ids.len() > n {
            ids.remove(rng.below(ids.len() as u32) as usize);
        }
        let mut tokens = Vec::new();
        for &p in &ids {
            let path = walk(p);
            let mut toks = [-1i8; 4];
            for t in toks.iter_mut() {
                let r = rng.below(100);
                *t = if r < 30 {
                    -1
                } else if r < 85 {
                    path[rng.below(52) as usize]
                } else {
                    path[52 + rng.below(6) as usize]
                };
            }
            tokens.push((p, toks));
        }
        let current = ids[rng.below(ids.len() as u32) as usize];
        if let Ok(s) = GameState::from_tokens(&tokens, current) {
            if L.validate_state(&s).is_ok() {
                return s;
            }
        }
    }
}

/// Two-player variant of [`random_state`].
pub fn random_state_2p(rng: &mut GameRng) -> GameState {
    loop {
        let s = random_state(rng);
        if s.num_players() == 2 {
            return s;
        }
    }
}

pub fn all_dice() -> impl Iterator<Item = Dice> {
    (1..=6).map(|v| Dice::new(v).unwrap())
}
