//! Depth-limited search over alternating decision and chance nodes.
//!
//! Two-player games use expectiminimax with a scalar value seen from the
//! root player. Three and four player games use expectimax-MaxN where every
//! node carries one value per seat and each mover maximizes its own entry.
//! Depth counts decision plies and drops by one on every decision-to-chance
//! step, including extra turns after a six.

use std::collections::HashMap;

use crate::board::{BoardLayout, Dice, GameState, Move, PlayerId, MAX_PLAYERS};

use super::eval::{evaluate_2p, evaluate_maxn};
use super::{Decision, SearchConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Chance,
    Decision,
}

/// Transposition key. `state` carries the player to act as its current player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MemoKey {
    pub kind: NodeKind,
    pub state: GameState,
    pub player: PlayerId,
    pub dice: Option<Dice>,
    pub depth: u32,
}

impl MemoKey {
    pub fn chance(state: &GameState, player: PlayerId, depth: u32) -> Self {
        MemoKey { kind: NodeKind::Chance, state: state.with_current(player), player, dice: None, depth }
    }

    pub fn decision(state: &GameState, player: PlayerId, dice: Dice, depth: u32) -> Self {
        MemoKey { kind: NodeKind::Decision, state: state.with_current(player), player, dice: Some(dice), depth }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeValue {
    /// Two-player value from the root's perspective.
    Scalar(f64),
    /// Per-seat values indexed by player id.
    Vector([f64; MAX_PLAYERS]),
}

impl NodeValue {
    /// Value as seen by `player`.
    pub fn for_player(&self, root: PlayerId, player: PlayerId) -> f64 {
        match *self {
            NodeValue::Scalar(v) if player == root => v,
            NodeValue::Scalar(v) => -v,
            NodeValue::Vector(v) => v[player as usize],
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match *self {
            NodeValue::Scalar(v) => Some(v),
            NodeValue::Vector(_) => None,
        }
    }

    pub fn vector(&self) -> Option<[f64; MAX_PLAYERS]> {
        match *self {
            NodeValue::Vector(v) => Some(v),
            NodeValue::Scalar(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub decision_nodes: u64,
    pub chance_nodes: u64,
    pub evaluations: u64,
    pub memo_hits: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    TwoPlayer,
    MaxN,
}

/// One search context: fixed root player, configuration and cache.
pub struct Search<'a> {
    cfg: &'a SearchConfig,
    layout: &'a BoardLayout,
    root: PlayerId,
    mode: Mode,
    memo: HashMap<MemoKey, NodeValue>,
    pub stats: SearchStats,
}

impl<'a> Search<'a> {
    /// Picks expectiminimax for two active players and MaxN otherwise.
    pub fn new(cfg: &'a SearchConfig, layout: &'a BoardLayout, state: &GameState, root: PlayerId) -> Self {
        let mode = if state.num_players() == 2 { Mode::TwoPlayer } else { Mode::MaxN };
        Search { cfg, layout, root, mode, memo: HashMap::new(), stats: SearchStats::default() }
    }

    /// Forces the vector-valued MaxN recursion even for two players.
    pub fn new_maxn(cfg: &'a SearchConfig, layout: &'a BoardLayout, root: PlayerId) -> Self {
        Search { cfg, layout, root, mode: Mode::MaxN, memo: HashMap::new(), stats: SearchStats::default() }
    }

    pub fn root(&self) -> PlayerId {
        self.root
    }

    pub fn is_maxn(&self) -> bool {
        self.mode == Mode::MaxN
    }

    fn terminal(&self, state: &GameState) -> Option<NodeValue> {
        let winner = self.layout.winner(state)?;
        Some(match self.mode {
            Mode::TwoPlayer => NodeValue::Scalar(if winner == self.root { 1.0 } else { -1.0 }),
            Mode::MaxN => {
                let players = state.active_players();
                let loss = -1.0 / (players.len() as f64 - 1.0);
                let mut v = [0.0; MAX_PLAYERS];
                for p in players {
                    v[p as usize] = if p == winner { 1.0 } else { loss };
                }
                NodeValue::Vector(v)
            }
        })
    }

    /// Cutoff evaluator value for `state`.
    pub fn evaluate(&mut self, state: &GameState) -> NodeValue {
        self.stats.evaluations += 1;
        match self.mode {
            Mode::TwoPlayer => NodeValue::Scalar(evaluate_2p(self.cfg, self.layout, state, self.root)),
            Mode::MaxN => NodeValue::Vector(evaluate_maxn(self.cfg, self.layout, state)),
        }
    }

    fn lookup(&mut self, key: &MemoKey) -> Option<NodeValue> {
        if !self.cfg.memo {
            return None;
        }
        let hit = self.memo.get(key).copied();
        if hit.is_some() {
            self.stats.memo_hits += 1;
        }
        hit
    }

    fn store(&mut self, key: MemoKey, value: NodeValue) {
        if self.cfg.memo {
            self.memo.insert(key, value);
        }
    }

    pub fn memo_get(&self, key: &MemoKey) -> Option<NodeValue> {
        self.memo.get(key).copied()
    }

    pub fn memo_put(&mut self, key: MemoKey, value: NodeValue) {
        self.memo.insert(key, value);
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Expected value before `player` rolls, `depth` decision plies remaining.
    pub fn chance_value(&mut self, state: &GameState, player: PlayerId, depth: u32) -> NodeValue {
        if let Some(t) = self.terminal(state) {
            return t;
        }
        if depth == 0 {
            return self.evaluate(state);
        }
        let key = MemoKey::chance(state, player, depth);
        if let Some(v) = self.lookup(&key) {
            return v;
        }
        self.stats.chance_nodes += 1;
        let value = match self.mode {
            Mode::TwoPlayer => {
                let mut sum = 0.0;
                for d in Dice::all() {
                    sum += self.decision_value(state, player, d, depth).for_player(self.root, self.root);
                }
                NodeValue::Scalar(sum / 6.0)
            }
            Mode::MaxN => {
                let mut sum = [0.0; MAX_PLAYERS];
                for d in Dice::all() {
                    let v = self.decision_value(state, player, d, depth).vector().expect("maxn vector");
                    for (s, x) in sum.iter_mut().zip(v) {
                        *s += x;
                    }
                }
                NodeValue::Vector(sum.map(|s| s / 6.0))
            }
        };
        self.store(key, value);
        value
    }

    /// Value once `player` has rolled `dice`. The mover picks the successor
    /// best for itself (the two-player opponent minimizes root's value);
    /// ties keep the lowest token index. Without a legal move the turn passes.
    pub fn decision_value(&mut self, state: &GameState, player: PlayerId, dice: Dice, depth: u32) -> NodeValue {
        let key = MemoKey::decision(state, player, dice, depth);
        if let Some(v) = self.lookup(&key) {
            return v;
        }
        self.stats.decision_nodes += 1;
        let child_depth = depth.saturating_sub(1);
        let moves = self.layout.moves_unchecked(state, player, dice);
        let value = if moves.is_empty() {
            let next = if dice.is_six() { player } else { state.successor(player) };
            self.chance_value(state, next, child_depth)
        } else {
            self.best_child(state, player, dice, &moves, child_depth).1
        };
        self.store(key, value);
        value
    }

    /// Index into `moves` of the mover's preferred successor and its value.
    fn best_child(
        &mut self,
        state: &GameState,
        player: PlayerId,
        dice: Dice,
        moves: &[Move],
        child_depth: u32,
    ) -> (usize, NodeValue) {
        let next = if dice.is_six() { player } else { state.successor(player) };
        let mut best: Option<(usize, f64, NodeValue)> = None;
        for (i, m) in moves.iter().enumerate() {
            let succ = self.layout.apply_unchecked(state, player, m);
            let v = self.chance_value(&succ, next, child_depth);
            // Own-perspective score; for two players this turns the opponent's
            // minimization of root value into a maximization.
            let score = v.for_player(self.root, player);
            if best.as_ref().is_none_or(|&(_, b, _)| score > b) {
                best = Some((i, score, v));
            }
        }
        let (i, _, v) = best.expect("non-empty move list");
        (i, v)
    }

    /// Root choice: index of the best move in `moves` and its value.
    pub fn choose(&mut self, state: &GameState, dice: Dice, moves: &[Move]) -> (usize, NodeValue) {
        let depth = self.cfg.depth.saturating_sub(1);
        self.best_child(state, self.root, dice, moves, depth)
    }
}

/// Depth-limited game-theory decision for `player` holding `dice`.
///
/// A fresh cache is used for every call, so the answer depends only on the
/// arguments.
pub fn gt_decide(cfg: &SearchConfig, layout: &BoardLayout, state: &GameState, player: PlayerId, dice: Dice) -> Option<Decision> {
    let moves = layout.moves_unchecked(state, player, dice);
    if moves.is_empty() {
        return None;
    }
    let mut search = Search::new(cfg, layout, state, player);
    let (i, v) = search.choose(state, dice, &moves);
    let value = v.for_player(player, player);
    Some(Decision {
        mv: moves[i],
        value: Some(value),
        rationale: Some(format!("search value {value:.4} at depth {}", cfg.depth)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: BoardLayout = BoardLayout::standard();

    fn fig9a() -> GameState {
        GameState::from_tokens(&[(0, [49, -1, -1, -1]), (1, [43, 41, -1, -1])], 1).unwrap()
    }

    #[test]
    fn terminal_root_win_is_one() {
        let cfg = SearchConfig::default();
        let s = GameState::from_tokens(&[(0, [57; 4]), (1, [-1; 4])], 1).unwrap();
        for depth in 0..3 {
            let mut search = Search::new(&cfg, &L, &s, 0);
            assert_eq!(search.chance_value(&s, 1, depth), NodeValue::Scalar(1.0));
        }
    }

    #[test]
    fn maxn_terminal_vector() {
        let cfg = SearchConfig::default();
        let s = GameState::from_tokens(&[(0, [-1; 4]), (1, [63; 4]), (2, [-1; 4])], 0).unwrap();
        let mut search = Search::new(&cfg, &L, &s, 0);
        let v = search.chance_value(&s, 0, 2).vector().unwrap();
        assert_eq!(v, [-0.5, 1.0, -0.5, 0.0]);
    }

    #[test]
    fn depth_zero_chance_is_evaluator() {
        let cfg = SearchConfig::default();
        let s = fig9a();
        let mut search = Search::new(&cfg, &L, &s, 1);
        let v = search.chance_value(&s, 1, 0).scalar().unwrap();
        assert_eq!(v, evaluate_2p(&cfg, &L, &s, 1));
    }

    #[test]
    fn six_keeps_the_mover() {
        // With dice 6 the successor chance node is keyed on the same player.
        let cfg = SearchConfig::default().with_depth(2);
        let s = fig9a();
        let mut search = Search::new(&cfg, &L, &s, 1);
        search.decision_value(&s, 1, Dice::SIX, 2);
        let m = L.moves_unchecked(&s, 1, Dice::SIX)[1];
        let succ = L.apply_unchecked(&s, 1, &m);
        assert!(search.memo_get(&MemoKey::chance(&succ, 1, 1)).is_some());
        assert!(search.memo_get(&MemoKey::chance(&succ, 0, 1)).is_none());
    }

    #[test]
    fn opponent_takes_winning_move() {
        // P0 (opponent of root P1) has three finished tokens and one at 56;
        // a roll of 1 wins. Root P1 far behind.
        let cfg = SearchConfig::default();
        let s = GameState::from_tokens(&[(0, [57, 57, 57, 56]), (1, [20, -1, -1, -1])], 0).unwrap();
        let mut search = Search::new(&cfg, &L, &s, 1);
        let v = search.decision_value(&s, 0, Dice::new(1).unwrap(), 1);
        assert_eq!(v, NodeValue::Scalar(-1.0));
    }

    #[test]
    fn single_move_decision_equals_successor() {
        let cfg = SearchConfig::default();
        let s = GameState::from_tokens(&[(0, [10, -1, -1, -1]), (1, [30, -1, -1, -1])], 0).unwrap();
        let d = Dice::new(3).unwrap();
        let moves = L.moves_unchecked(&s, 0, d);
        assert_eq!(moves.len(), 1);
        let succ = L.apply_unchecked(&s, 0, &moves[0]);
        let mut a = Search::new(&cfg, &L, &s, 0);
        let mut b = Search::new(&cfg, &L, &s, 0);
        assert_eq!(a.decision_value(&s, 0, d, 2), b.chance_value(&succ, 1, 1));
    }

    #[test]
    fn memo_put_get() {
        let cfg = SearchConfig::default();
        let s = fig9a();
        let mut search = Search::new(&cfg, &L, &s, 1);
        let k = MemoKey::chance(&s, 1, 2);
        search.memo_put(k, NodeValue::Scalar(0.125));
        assert_eq!(search.memo_get(&k), Some(NodeValue::Scalar(0.125)));
        assert_ne!(k, MemoKey::chance(&s, 1, 1));
    }

    #[test]
    fn gt_on_fig9a_is_deterministic() {
        let cfg = SearchConfig::default();
        let a = gt_decide(&cfg, &L, &fig9a(), 1, Dice::SIX).unwrap();
        let b = gt_decide(&cfg, &L, &fig9a(), 1, Dice::SIX).unwrap();
        assert_eq!(a, b);
    }
}
