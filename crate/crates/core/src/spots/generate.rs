use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use crate::board::{BoardLayout, Dice, PlayerId, Position, MAX_PLAYERS, TOKENS_PER_PLAYER};
use crate::rng::{derive_seed, GameRng};

use super::{check_category, grudge_history, pair_grudge, Category, CorpusError, SpotOptions, SpotScenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerateOptions {
    /// Rejection budget per spot.
    pub max_attempts: u64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions { max_attempts: 100_000 }
    }
}

/// Near-uniform split of `n` spots over 2, 3 and 4 players (40 -> 14/13/13).
pub fn split_by_player_count(n: usize) -> [(usize, usize); 3] {
    let third = n / 3;
    [(2, n - 2 * third), (3, third), (4, third)]
}

/// Partially placed board: `None` slots are filled at random afterwards.
struct Draft {
    players: Vec<PlayerId>,
    me: PlayerId,
    slots: [[Option<i8>; TOKENS_PER_PLAYER]; MAX_PLAYERS],
}

impl Draft {
    fn place(&mut self, player: PlayerId, pos: i8) -> bool {
        let row = &mut self.slots[player as usize];
        match row.iter().position(Option::is_none) {
            Some(i) => {
                row[i] = Some(pos);
                true
            }
            None => false,
        }
    }

    fn place_rel(&mut self, layout: &BoardLayout, player: PlayerId, rel: u8) -> bool {
        let pos = layout.position_at(player, rel).0;
        self.place(player, pos)
    }

    fn opponents(&self) -> Vec<PlayerId> {
        self.players.iter().copied().filter(|&p| p != self.me).collect()
    }

    /// Own token that captures an opponent with `dice`.
    fn capture(&mut self, layout: &BoardLayout, rng: &mut GameRng, dice: u8) -> Option<PlayerId> {
        let r = rng.below(52 - dice as u32) as u8;
        let to = layout.position_at(self.me, r + dice);
        if layout.is_safe(to) {
            return None;
        }
        let victim = *rng.pick(&self.opponents())?;
        (self.place_rel(layout, self.me, r) && self.place(victim, to.0)).then_some(victim)
    }

    /// Own token reaching the home path (`finish` forces the last square).
    fn home(&mut self, layout: &BoardLayout, rng: &mut GameRng, dice: u8, finish: bool) -> bool {
        let r = if finish { 57 - dice } else { 52 - dice + rng.below(dice as u32) as u8 };
        self.place_rel(layout, self.me, r)
    }

    /// Own on-board token landing on a safe main-track square.
    fn safe(&mut self, layout: &BoardLayout, rng: &mut GameRng, dice: u8) -> bool {
        let targets: Vec<u8> = (dice..52).filter(|&s| layout.is_safe(layout.position_at(self.me, s))).collect();
        match rng.pick(&targets) {
            Some(&s) => self.place_rel(layout, self.me, s - dice),
            None => false,
        }
    }

    fn open(&mut self) -> bool {
        self.place(self.me, Position::BASE.0)
    }

    /// Plain main-track advance that stays off the home path.
    fn existing(&mut self, layout: &BoardLayout, rng: &mut GameRng, dice: u8) -> bool {
        let r = 1 + rng.below(51 - dice as u32) as u8;
        self.place_rel(layout, self.me, r)
    }

    fn overshoot(&mut self, layout: &BoardLayout, rng: &mut GameRng, dice: u8) -> bool {
        // home path rel 52..=56 with r + dice > 57
        let lo = 58 - dice;
        if lo > 56 {
            return false;
        }
        let r = lo + rng.below((57 - lo) as u32) as u8;
        self.place_rel(layout, self.me, r)
    }

    fn fill(&self, layout: &BoardLayout, rng: &mut GameRng) -> BTreeMap<PlayerId, [i8; 4]> {
        let mut out = BTreeMap::new();
        for &p in &self.players {
            let mut row = [Position::BASE.0; 4];
            for (t, slot) in self.slots[p as usize].iter().enumerate() {
                row[t] = match *slot {
                    Some(pos) => pos,
                    None => random_position(layout, rng, p),
                };
            }
            out.insert(p, row);
        }
        out
    }
}

fn random_position(layout: &BoardLayout, rng: &mut GameRng, player: PlayerId) -> i8 {
    let u = rng.below(100);
    if u < 40 {
        Position::BASE.0
    } else if u < 85 {
        rng.below(52) as i8
    } else if u < 95 {
        layout.position_at(player, 52 + rng.below(5) as u8).0
    } else {
        layout.home_end(player).0
    }
}

fn roll_for(category: Category, rng: &mut GameRng) -> u8 {
    match category {
        c if c.requires_six() => 6,
        Category::Overshoot => 2 + rng.below(5) as u8,
        _ => 1 + rng.below(6) as u8,
    }
}

/// One candidate board; `None` when the constructive step itself failed.
fn attempt(
    layout: &BoardLayout,
    category: Category,
    players: &[PlayerId],
    rng: &mut GameRng,
) -> Option<(SpotScenario, Option<PlayerId>)> {
    let me = *rng.pick(players)?;
    let dice = roll_for(category, rng);
    let mut d = Draft { players: players.to_vec(), me, slots: [[None; 4]; 4] };
    let mut aggressor = None;
    let ok = match category {
        Category::Blocked => {
            if dice == 6 {
                // own token one roll ahead of another
                let r = rng.below(46) as u8;
                d.place_rel(layout, me, r) && d.place_rel(layout, me, r + 6)
            } else {
                d.open() && d.existing(layout, rng, dice)
            }
        }
        Category::Overshoot => d.overshoot(layout, rng, dice),
        Category::Capture => d.capture(layout, rng, dice).is_some(),
        Category::HomeEntry => d.home(layout, rng, dice, false),
        Category::Safe => d.safe(layout, rng, dice),
        Category::ExtraTurn => d.open() && d.existing(layout, rng, dice),
        Category::CaptureVsHome => d.capture(layout, rng, dice).is_some() && d.home(layout, rng, dice, false),
        Category::CaptureVsHomeFinish => d.capture(layout, rng, dice).is_some() && d.home(layout, rng, dice, true),
        Category::CaptureVsOpenexisting => d.capture(layout, rng, dice).is_some() && d.open(),
        Category::CaptureVsSafe => d.capture(layout, rng, dice).is_some() && d.safe(layout, rng, dice),
        Category::SafeVsOpenexisting => d.safe(layout, rng, dice) && d.open(),
        Category::Grudge => {
            aggressor = d.capture(layout, rng, dice);
            aggressor.is_some()
        }
    };
    if !ok {
        return None;
    }
    let spot = SpotScenario {
        id: String::new(),
        scenario: category,
        players: players.to_vec(),
        llm_player_id: me,
        current_player: me,
        dice: Dice::new(dice as i64).ok()?,
        tokens: d.fill(layout, rng),
        note: String::new(),
        history_text: None,
    };
    let state = spot.state().ok()?;
    layout.validate_state(&state).ok()?;
    if category == Category::Grudge {
        // aggressor drawn among opponents actually exposed to a capture
        let opts = SpotOptions::analyze(layout, &state, me, spot.dice);
        let exposed: Vec<PlayerId> =
            d.opponents().into_iter().filter(|&p| opts.captures_of(p).next().is_some()).collect();
        aggressor = Some(*rng.pick(&exposed)?);
    }
    check_category(category, layout, &state, me, spot.dice, aggressor).ok()?;
    if !isolated(category, &SpotOptions::analyze(layout, &state, me, spot.dice)) {
        return None;
    }
    Some((spot, aggressor))
}

/// Generated tradeoff spots offer only the two options they are named after
/// (plus plain advances). Loaded spots are held to the looser predicate.
fn isolated(category: Category, o: &SpotOptions) -> bool {
    let none = |v: &[u8]| v.is_empty();
    match category {
        Category::CaptureVsHome | Category::CaptureVsHomeFinish => none(&o.safe) && none(&o.open),
        Category::CaptureVsOpenexisting => none(&o.home) && none(&o.safe),
        Category::CaptureVsSafe => none(&o.home) && none(&o.open),
        Category::SafeVsOpenexisting => none(&o.capture) && none(&o.home),
        _ => true,
    }
}

fn fingerprint(spot: &SpotScenario) -> String {
    format!("{}|{}", spot.board_key(), spot.llm_player_id)
}

/// Rejection-samples `n` distinct spots of one category with `player_count`
/// players (ids `0..player_count`).
///
/// Grudge spots come in pairs: `n` pairs yield `2n` entries, neutral side
/// first.
pub fn generate_spots(
    layout: &BoardLayout,
    category: Category,
    player_count: usize,
    n: usize,
    rng: &mut GameRng,
    opts: GenerateOptions,
) -> Result<Vec<SpotScenario>, CorpusError> {
    if !(2..=MAX_PLAYERS).contains(&player_count) {
        return Err(CorpusError::Pairing(format!("player count {player_count} outside 2..=4")));
    }
    let players: Vec<PlayerId> = (0..player_count as u8).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    for seq in 1..=n {
        let mut tries = 0u64;
        let (mut spot, aggressor) = loop {
            if tries >= opts.max_attempts {
                return Err(CorpusError::GenerationFailed { category, attempts: opts.max_attempts });
            }
            tries += 1;
            if let Some((s, a)) = attempt(layout, category, &players, rng) {
                if seen.insert(fingerprint(&s)) {
                    break (s, a);
                }
            }
        };
        if category == Category::Grudge {
            let aggressor = aggressor.expect("grudge attempt names an aggressor");
            spot.id = format!("grudge_pair{player_count}{seq:03}");
            spot.note = format!("generated; aggressor player {aggressor}");
            let pair = pair_grudge(layout, &spot, aggressor, None)?;
            debug_assert_eq!(pair.grudge.history_text.as_deref(), Some(grudge_history(aggressor).as_str()));
            out.push(pair.neutral);
            out.push(pair.grudge);
        } else {
            spot.id = format!("{}_{player_count}p_{seq:03}", category.id_prefix());
            spot.note = "generated".to_string();
            out.push(spot);
        }
    }
    Ok(out)
}

/// A full corpus: `per_category` entries for each category, split over 2/3/4
/// players. Grudge counts boards, so it yields `per_category` pairs. Each
/// (category, player count) job draws from its own derived seed.
pub fn generate_corpus(
    layout: &BoardLayout,
    per_category: usize,
    seed: u64,
    opts: GenerateOptions,
) -> Result<Vec<SpotScenario>, CorpusError> {
    let jobs: Vec<(usize, Category, usize, usize)> = Category::ALL
        .iter()
        .enumerate()
        .flat_map(|(ci, &cat)| {
            split_by_player_count(per_category).into_iter().map(move |(k, count)| (ci, cat, k, count))
        })
        .filter(|j| j.3 > 0)
        .collect();
    let parts: Vec<Result<Vec<SpotScenario>, CorpusError>> = jobs
        .par_iter()
        .map(|&(ci, cat, k, count)| {
            let mut rng = GameRng::seed_from(derive_seed(seed, &[ci as u64, k as u64]));
            generate_spots(layout, cat, k, count, &mut rng, opts)
        })
        .collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
