use crate::board::{BoardLayout, GameState, PlayerId, FINISHED_PROGRESS, MAX_PLAYERS};

use super::SearchConfig;

/// Per-player material counted by the cutoff evaluator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlayerCounts {
    /// Summed relative progress of on-board tokens; finished tokens count 57.
    pub progress: i64,
    pub finished: i64,
    pub base: i64,
    pub safe: i64,
}

impl PlayerCounts {
    pub fn of(layout: &BoardLayout, state: &GameState, player: PlayerId) -> Self {
        let mut c = PlayerCounts::default();
        for &pos in state.tokens(player) {
            if pos.is_base() {
                c.base += 1;
                continue;
            }
            if layout.is_finished(player, pos) {
                c.finished += 1;
                c.progress += FINISHED_PROGRESS as i64;
                continue;
            }
            if let Ok(Some(rel)) = layout.rel_progress(player, pos) {
                c.progress += rel as i64;
            }
            if layout.is_safe(pos) {
                c.safe += 1;
            }
        }
        c
    }
}

fn linear(cfg: &SearchConfig, prog: i64, fin: i64, base: i64, safe: i64) -> f64 {
    let w = cfg.weights;
    w.progress * prog as f64 + w.finished * fin as f64 - w.base * base as f64 + w.safe * safe as f64
}

/// Two-player cutoff value from `root`'s point of view, clipped to `[-clip, clip]`.
///
/// Each term is the difference between root's and the opponent's count, so
/// swapping the root negates the result exactly. Meant for non-terminal
/// states; terminal states take the ±1 terminal value in search.
pub fn evaluate_2p(cfg: &SearchConfig, layout: &BoardLayout, state: &GameState, root: PlayerId) -> f64 {
    let opp = state.successor(root);
    let r = PlayerCounts::of(layout, state, root);
    let o = PlayerCounts::of(layout, state, opp);
    let raw = linear(cfg, r.progress - o.progress, r.finished - o.finished, r.base - o.base, r.safe - o.safe);
    raw.clamp(-cfg.clip, cfg.clip)
}

/// Mean-centered per-player scores before clipping, indexed by player id
/// (inactive seats are 0).
pub fn evaluate_maxn_raw(cfg: &SearchConfig, layout: &BoardLayout, state: &GameState) -> [f64; MAX_PLAYERS] {
    let players = state.active_players();
    let n = players.len() as i64;
    let counts: Vec<PlayerCounts> = players.iter().map(|&p| PlayerCounts::of(layout, state, p)).collect();
    let total = counts.iter().fold(PlayerCounts::default(), |a, c| PlayerCounts {
        progress: a.progress + c.progress,
        finished: a.finished + c.finished,
        base: a.base + c.base,
        safe: a.safe + c.safe,
    });
    // centre the integer counts first so equal players come out exactly 0
    let mut out = [0.0; MAX_PLAYERS];
    for (&p, c) in players.iter().zip(&counts) {
        let v = linear(
            cfg,
            n * c.progress - total.progress,
            n * c.finished - total.finished,
            n * c.base - total.base,
            n * c.safe - total.safe,
        );
        out[p as usize] = v / n as f64;
    }
    out
}

/// Multiplayer cutoff vector: raw linear score per player, mean-centered,
/// then clipped.
pub fn evaluate_maxn(cfg: &SearchConfig, layout: &BoardLayout, state: &GameState) -> [f64; MAX_PLAYERS] {
    evaluate_maxn_raw(cfg, layout, state).map(|v| v.clamp(-cfg.clip, cfg.clip))
}
