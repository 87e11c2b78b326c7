//! Board model, token encoding and the movement/capture rules.
//!
//! Positions use a single absolute encoding shared by every module:
//! `-1` is the base, `0..=51` the shared circular track and `52..=75` the four
//! private six-square home paths (P0 `52..=57`, P1 `58..=63`, P2 `64..=69`,
//! P3 `70..=75`). A token sitting on its owner's last home square is finished.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type PlayerId = u8;

pub const MAX_PLAYERS: usize = 4;
pub const TOKENS_PER_PLAYER: usize = 4;
pub const MAIN_TRACK_LEN: i8 = 52;
/// Relative progress of a finished token (51 main-track steps + 6 home steps).
pub const FINISHED_PROGRESS: u8 = 57;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("dice value {0} outside 1..=6")]
    InvalidDice(i64),
    #[error("position {pos} is not valid for player {player}")]
    InvalidPosition { player: PlayerId, pos: i8 },
    #[error("player {0} is not active")]
    InactivePlayer(PlayerId),
    #[error("it is player {current}'s turn, not player {requested}'s")]
    WrongPlayer { current: PlayerId, requested: PlayerId },
    #[error("state violates invariants: {}", join_violations(.0))]
    InvalidState(Vec<Violation>),
    #[error("move of token {token} to {to} is not legal")]
    IllegalMove { token: u8, to: i8 },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// One face of the die.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Dice(u8);

impl Dice {
    pub const SIX: Dice = Dice(6);

    pub fn new(value: i64) -> Result<Self, EngineError> {
        if (1..=6).contains(&value) {
            Ok(Dice(value as u8))
        } else {
            Err(EngineError::InvalidDice(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_six(self) -> bool {
        self.0 == 6
    }

    /// All six faces in ascending order.
    pub fn all() -> impl Iterator<Item = Dice> {
        (1..=6).map(Dice)
    }
}

impl TryFrom<i64> for Dice {
    type Error = EngineError;
    fn try_from(v: i64) -> Result<Self, Self::Error> {
        Dice::new(v)
    }
}

impl From<Dice> for u8 {
    fn from(d: Dice) -> u8 {
        d.0
    }
}

impl fmt::Display for Dice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Absolute token position (see module docs for the encoding).
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct Position(pub i8);

impl Position {
    pub const BASE: Position = Position(-1);

    pub fn is_base(self) -> bool {
        self.0 == -1
    }

    pub fn is_main_track(self) -> bool {
        (0..MAIN_TRACK_LEN).contains(&self.0)
    }

    pub fn is_home_path(self) -> bool {
        self.0 >= MAIN_TRACK_LEN
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Fixed geometry of the board.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardLayout {
    pub main_track_len: i8,
    pub start_square: [i8; MAX_PLAYERS],
    pub home_start: [i8; MAX_PLAYERS],
    pub home_end: [i8; MAX_PLAYERS],
    pub safe_squares: [i8; 8],
}

impl Default for BoardLayout {
    fn default() -> Self {
        Self::standard()
    }
}

impl BoardLayout {
    pub const fn standard() -> Self {
        BoardLayout {
            main_track_len: MAIN_TRACK_LEN,
            start_square: [0, 13, 26, 39],
            home_start: [52, 58, 64, 70],
            home_end: [57, 63, 69, 75],
            safe_squares: [0, 8, 13, 21, 26, 34, 39, 47],
        }
    }

    pub fn start_square(&self, player: PlayerId) -> Position {
        Position(self.start_square[player as usize])
    }

    pub fn home_range(&self, player: PlayerId) -> RangeInclusive<i8> {
        self.home_start[player as usize]..=self.home_end[player as usize]
    }

    pub fn home_end(&self, player: PlayerId) -> Position {
        Position(self.home_end[player as usize])
    }

    pub fn is_safe(&self, pos: Position) -> bool {
        self.safe_squares.contains(&pos.0)
    }

    /// Owner of the home path containing `pos`, if it lies on one.
    pub fn home_owner(&self, pos: Position) -> Option<PlayerId> {
        (0..MAX_PLAYERS as u8).find(|&p| self.home_range(p).contains(&pos.0))
    }

    pub fn is_finished(&self, player: PlayerId, pos: Position) -> bool {
        pos == self.home_end(player)
    }

    /// Checks the geometric invariants of the layout itself.
    pub fn check(&self) -> Result<(), String> {
        for p in 0..MAX_PLAYERS as u8 {
            if !self.is_safe(self.start_square(p)) {
                return Err(format!("start square of P{p} is not safe"));
            }
            let r = self.home_range(p);
            if r.end() - r.start() + 1 != 6 || *r.start() < self.main_track_len {
                return Err(format!("home range of P{p} is malformed"));
            }
            for q in 0..p {
                let o = self.home_range(q);
                if r.start() <= o.end() && o.start() <= r.end() {
                    return Err(format!("home ranges of P{q} and P{p} overlap"));
                }
            }
        }
        if self.safe_squares.iter().any(|&s| !(0..self.main_track_len).contains(&s)) {
            return Err("safe square off the main track".into());
        }
        Ok(())
    }

    pub fn position_valid_for(&self, player: PlayerId, pos: Position) -> bool {
        pos.is_base() || pos.is_main_track() || self.home_range(player).contains(&pos.0)
    }

    /// Progress measured from the player's start square: `None` for a token in
    /// base, `0..=51` on the main track, `52..=57` on the home path.
    pub fn rel_progress(&self, player: PlayerId, pos: Position) -> Result<Option<u8>, EngineError> {
        if pos.is_base() {
            return Ok(None);
        }
        if pos.is_main_track() {
            let start = self.start_square[player as usize];
            let rel = (pos.0 - start).rem_euclid(self.main_track_len);
            return Ok(Some(rel as u8));
        }
        if self.home_range(player).contains(&pos.0) {
            let step = pos.0 - self.home_start[player as usize];
            return Ok(Some(self.main_track_len as u8 + step as u8));
        }
        Err(EngineError::InvalidPosition { player, pos: pos.0 })
    }

    /// Inverse of [`rel_progress`](Self::rel_progress) for on-board progress values.
    pub fn position_at(&self, player: PlayerId, rel: u8) -> Position {
        let len = self.main_track_len as u8;
        if rel < len {
            let sq = (self.start_square[player as usize] as i16 + rel as i16) % len as i16;
            Position(sq as i8)
        } else {
            Position(self.home_start[player as usize] + (rel - len) as i8)
        }
    }

    /// Sum of relative progress over all of a player's tokens (base counts 0).
    pub fn total_progress(&self, state: &GameState, player: PlayerId) -> u32 {
        state
            .tokens(player)
            .iter()
            .filter_map(|&pos| self.rel_progress(player, pos).ok().flatten())
            .map(u32::from)
            .sum()
    }

    pub fn validate_state(&self, state: &GameState) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let players = state.active_players();
        if !(2..=MAX_PLAYERS).contains(&players.len()) {
            out.push(Violation::PlayerCount(players.len()));
        }
        if !state.is_active(state.current_player()) {
            out.push(Violation::CurrentInactive(state.current_player()));
        }
        for p in 0..MAX_PLAYERS as u8 {
            if !state.is_active(p) && state.tokens[p as usize] != [Position::BASE; 4] {
                out.push(Violation::InactiveTokens(p));
            }
        }
        for &p in &players {
            let toks = state.tokens(p);
            for (i, &pos) in toks.iter().enumerate() {
                if !self.position_valid_for(p, pos) {
                    if self.home_owner(pos).is_some() {
                        out.push(Violation::ForeignHomeRange { player: p, token: i as u8, pos: pos.0 });
                    } else {
                        out.push(Violation::OutOfRange { player: p, token: i as u8, pos: pos.0 });
                    }
                }
            }
            for i in 0..TOKENS_PER_PLAYER {
                for j in i + 1..TOKENS_PER_PLAYER {
                    let (a, b) = (toks[i], toks[j]);
                    if a == b && !a.is_base() && !self.is_finished(p, a) {
                        out.push(Violation::OwnStacking { player: p, pos: a.0 });
                    }
                }
            }
        }
        for (ai, &p) in players.iter().enumerate() {
            for &q in &players[ai + 1..] {
                for &a in state.tokens(p) {
                    if a.is_main_track() && !self.is_safe(a) && state.tokens(q).contains(&a) {
                        out.push(Violation::SharedNonSafe { players: (p, q), pos: a.0 });
                    }
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn ensure_valid(&self, state: &GameState) -> Result<(), EngineError> {
        self.validate_state(state).map_err(EngineError::InvalidState)
    }

    /// What token `token` of `player` can do with `dice`; the single place the
    /// movement rules are encoded.
    pub fn token_status(&self, state: &GameState, player: PlayerId, dice: Dice, token: u8) -> TokenStatus {
        let from = state.tokens(player)[token as usize];
        let own = state.tokens(player);
        let blocked_by_own = |to: Position| {
            own.iter().enumerate().any(|(j, &p)| j != token as usize && p == to)
                && !self.is_finished(player, to)
        };

        if from.is_base() {
            if !dice.is_six() {
                return TokenStatus::InBase;
            }
            let to = self.start_square(player);
            if blocked_by_own(to) {
                return TokenStatus::BlockedByOwn { to };
            }
            return TokenStatus::Movable(Move {
                token,
                from,
                to,
                leaves_base: true,
                capture: None,
                enters_home: false,
                finishes: false,
                lands_safe: true,
            });
        }
        if self.is_finished(player, from) {
            return TokenStatus::Finished;
        }
        let rel = match self.rel_progress(player, from) {
            Ok(Some(r)) => r,
            _ => return TokenStatus::Finished,
        };
        let target = rel + dice.value();
        if target > FINISHED_PROGRESS {
            return TokenStatus::Overshoot;
        }
        let to = self.position_at(player, target);
        if blocked_by_own(to) {
            return TokenStatus::BlockedByOwn { to };
        }
        let lands_safe = self.is_safe(to);
        let capture = if to.is_main_track() && !lands_safe {
            state.occupant_other_than(player, to)
        } else {
            None
        };
        TokenStatus::Movable(Move {
            token,
            from,
            to,
            leaves_base: false,
            capture,
            enters_home: from.is_main_track() && to.is_home_path(),
            finishes: self.is_finished(player, to),
            lands_safe,
        })
    }

    /// Legal moves without validating `state` first; for hot paths whose
    /// states are valid by construction.
    pub fn moves_unchecked(&self, state: &GameState, player: PlayerId, dice: Dice) -> Vec<Move> {
        (0..TOKENS_PER_PLAYER as u8)
            .filter_map(|t| match self.token_status(state, player, dice, t) {
                TokenStatus::Movable(m) => Some(m),
                _ => None,
            })
            .collect()
    }

    pub fn legal_moves(&self, state: &GameState, player: PlayerId, dice: Dice) -> Result<Vec<Move>, EngineError> {
        if player != state.current_player() {
            return Err(EngineError::WrongPlayer { current: state.current_player(), requested: player });
        }
        self.ensure_valid(state)?;
        Ok(self.moves_unchecked(state, player, dice))
    }

    /// Applies a move known to be legal. Does not touch `current_player`.
    pub fn apply_unchecked(&self, state: &GameState, player: PlayerId, mv: &Move) -> GameState {
        let mut next = *state;
        next.tokens[player as usize][mv.token as usize] = mv.to;
        if let Some(c) = mv.capture {
            next.tokens[c.player as usize][c.token as usize] = Position::BASE;
        }
        next
    }

    pub fn apply_move(&self, state: &GameState, player: PlayerId, dice: Dice, mv: &Move) -> Result<GameState, EngineError> {
        let legal = self.legal_moves(state, player, dice)?;
        if !legal.contains(mv) {
            return Err(EngineError::IllegalMove { token: mv.token, to: mv.to.0 });
        }
        Ok(self.apply_unchecked(state, player, mv))
    }

    /// Player who moves next: the same player after a six, otherwise the
    /// next active player in ascending cyclic order.
    pub fn next_player(&self, state: &GameState, dice: Dice, _had_legal_move: bool) -> PlayerId {
        if dice.is_six() {
            state.current_player()
        } else {
            state.successor(state.current_player())
        }
    }

    pub fn winner(&self, state: &GameState) -> Option<PlayerId> {
        state
            .active_players()
            .into_iter()
            .find(|&p| state.tokens(p).iter().all(|&pos| self.is_finished(p, pos)))
    }

    /// Result used when a game hits the turn cap: greatest summed relative
    /// progress, ties to the lowest player id.
    pub fn adjudicate(&self, state: &GameState) -> PlayerId {
        let mut best = (0u32, PlayerId::MAX);
        for p in state.active_players() {
            let prog = self.total_progress(state, p);
            if best.1 == PlayerId::MAX || prog > best.0 {
                best = (prog, p);
            }
        }
        best.1
    }
}

/// Why a token can or cannot move on a given roll.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TokenStatus {
    Movable(Move),
    /// In base and the roll is not a six.
    InBase,
    Finished,
    /// The roll would carry the token past its home end.
    Overshoot,
    /// Destination is held by another token of the same player.
    BlockedByOwn { to: Position },
}

impl TokenStatus {
    pub fn movable(&self) -> Option<&Move> {
        match self {
            TokenStatus::Movable(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Capture {
    pub player: PlayerId,
    pub token: u8,
}

/// A fully resolved token action with its effect flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub token: u8,
    pub from: Position,
    pub to: Position,
    pub leaves_base: bool,
    pub capture: Option<Capture>,
    pub enters_home: bool,
    pub finishes: bool,
    pub lands_safe: bool,
}

impl Move {
    /// Destination lies on the mover's home path (entering, advancing or finishing).
    pub fn reaches_home_path(&self) -> bool {
        self.to.is_home_path()
    }

    /// Lands on a safe square by moving an existing token (bringing a token
    /// out onto its start square does not count).
    pub fn is_safe_landing(&self) -> bool {
        self.lands_safe && !self.leaves_base
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    PlayerCount(usize),
    CurrentInactive(PlayerId),
    InactiveTokens(PlayerId),
    ForeignHomeRange { player: PlayerId, token: u8, pos: i8 },
    OutOfRange { player: PlayerId, token: u8, pos: i8 },
    OwnStacking { player: PlayerId, pos: i8 },
    SharedNonSafe { players: (PlayerId, PlayerId), pos: i8 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PlayerCount(n) => write!(f, "{n} active players (need 2-4)"),
            Violation::CurrentInactive(p) => write!(f, "current player {p} is not active"),
            Violation::InactiveTokens(p) => write!(f, "inactive player {p} has tokens on the board"),
            Violation::ForeignHomeRange { player, token, pos } => {
                write!(f, "foreign home range: P{player} token {token} at {pos}")
            }
            Violation::OutOfRange { player, token, pos } => {
                write!(f, "position out of range: P{player} token {token} at {pos}")
            }
            Violation::OwnStacking { player, pos } => {
                write!(f, "own stacking off home_end: P{player} at {pos}")
            }
            Violation::SharedNonSafe { players, pos } => {
                write!(f, "P{} and P{} share non-safe square {pos}", players.0, players.1)
            }
        }
    }
}

/// Token positions of every seat plus the player to move.
///
/// Inactive seats always hold four base tokens so that derived equality and
/// hashing act as a canonical fingerprint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameState {
    active: u8,
    tokens: [[Position; TOKENS_PER_PLAYER]; MAX_PLAYERS],
    current: PlayerId,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    current_player: PlayerId,
    tokens: std::collections::BTreeMap<PlayerId, [i8; TOKENS_PER_PLAYER]>,
}

/// Serialized in the spot-file shape: `{"current_player": p, "tokens": {"0": [...], ...}}`.
impl Serialize for GameState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let tokens = self.active_players().into_iter().map(|p| (p, self.tokens(p).map(|x| x.0))).collect();
        StateRepr { current_player: self.current, tokens }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = StateRepr::deserialize(d)?;
        let toks: Vec<_> = r.tokens.into_iter().collect();
        GameState::from_tokens(&toks, r.current_player).map_err(serde::de::Error::custom)
    }
}

impl GameState {
    /// Everyone in base, lowest player id to move.
    pub fn initial(players: &[PlayerId]) -> Result<Self, EngineError> {
        let toks: Vec<_> = players.iter().map(|&p| (p, [-1i8; 4])).collect();
        let first = *players.iter().min().ok_or(EngineError::InvalidState(vec![Violation::PlayerCount(0)]))?;
        Self::from_tokens(&toks, first)
    }

    /// Builds a state from per-player token lists; the active set is the set
    /// of listed players. Positional invariants are checked separately by
    /// [`BoardLayout::validate_state`].
    pub fn from_tokens(tokens: &[(PlayerId, [i8; 4])], current: PlayerId) -> Result<Self, EngineError> {
        let mut s = GameState { active: 0, tokens: [[Position::BASE; 4]; 4], current };
        for &(p, toks) in tokens {
            if p as usize >= MAX_PLAYERS {
                return Err(EngineError::InactivePlayer(p));
            }
            if s.active & (1 << p) != 0 {
                return Err(EngineError::InvalidState(vec![Violation::PlayerCount(tokens.len())]));
            }
            s.active |= 1 << p;
            s.tokens[p as usize] = toks.map(Position);
        }
        Ok(s)
    }

    /// Raw constructor; does not require inactive rows to be empty so that
    /// validation tests can build malformed states.
    pub fn from_raw(active: &[PlayerId], tokens: [[i8; 4]; 4], current: PlayerId) -> Self {
        GameState {
            active: active.iter().fold(0, |m, &p| m | (1 << p)),
            tokens: tokens.map(|row| row.map(Position)),
            current,
        }
    }

    pub fn active_players(&self) -> Vec<PlayerId> {
        (0..MAX_PLAYERS as u8).filter(|&p| self.is_active(p)).collect()
    }

    pub fn num_players(&self) -> usize {
        self.active.count_ones() as usize
    }

    pub fn is_active(&self, p: PlayerId) -> bool {
        (p as usize) < MAX_PLAYERS && self.active & (1 << p) != 0
    }

    pub fn current_player(&self) -> PlayerId {
        self.current
    }

    pub fn with_current(mut self, p: PlayerId) -> Self {
        self.current = p;
        self
    }

    pub fn tokens(&self, p: PlayerId) -> &[Position; TOKENS_PER_PLAYER] {
        &self.tokens[p as usize]
    }

    pub fn set_token(&mut self, p: PlayerId, token: usize, pos: Position) {
        self.tokens[p as usize][token] = pos;
    }

    /// Next active player after `p` in ascending cyclic order.
    pub fn successor(&self, p: PlayerId) -> PlayerId {
        (1..=MAX_PLAYERS as u8)
            .map(|k| (p + k) % MAX_PLAYERS as u8)
            .find(|&q| self.is_active(q))
            .unwrap_or(p)
    }

    /// Some token of a player other than `player` standing on `pos`.
    pub fn occupant_other_than(&self, player: PlayerId, pos: Position) -> Option<Capture> {
        self.active_players().into_iter().filter(|&q| q != player).find_map(|q| {
            self.tokens(q)
                .iter()
                .position(|&t| t == pos)
                .map(|i| Capture { player: q, token: i as u8 })
        })
    }

    /// Canonical text form, stable across runs: `players;current;p:t0,t1,t2,t3;...`.
    pub fn fingerprint(&self) -> String {
        let mut s = String::new();
        let players = self.active_players();
        s.push_str(&players.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","));
        s.push(';');
        s.push_str(&self.current.to_string());
        for p in players {
            let t = self.tokens(p).iter().map(|x| x.0.to_string()).collect::<Vec<_>>().join(",");
            s.push_str(&format!(";{p}:{t}"));
        }
        s
    }
}
