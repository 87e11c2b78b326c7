use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::board::{BoardLayout, Dice, GameState, Move, PlayerId, TokenStatus, TOKENS_PER_PLAYER};

/// The twelve spot categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Blocked,
    Overshoot,
    Capture,
    HomeEntry,
    Safe,
    ExtraTurn,
    CaptureVsHome,
    CaptureVsHomeFinish,
    CaptureVsOpenexisting,
    CaptureVsSafe,
    SafeVsOpenexisting,
    #[serde(alias = "grudge_paired")]
    Grudge,
}

impl Category {
    pub const ALL: [Category; 12] = [
        Category::Blocked,
        Category::Overshoot,
        Category::Capture,
        Category::HomeEntry,
        Category::Safe,
        Category::ExtraTurn,
        Category::CaptureVsHome,
        Category::CaptureVsHomeFinish,
        Category::CaptureVsOpenexisting,
        Category::CaptureVsSafe,
        Category::SafeVsOpenexisting,
        Category::Grudge,
    ];

    /// Label stored in the `scenario` field.
    pub fn label(self) -> &'static str {
        match self {
            Category::Blocked => "blocked",
            Category::Overshoot => "overshoot",
            Category::Capture => "capture",
            Category::HomeEntry => "home_entry",
            Category::Safe => "safe",
            Category::ExtraTurn => "extra_turn",
            Category::CaptureVsHome => "capture_vs_home",
            Category::CaptureVsHomeFinish => "capture_vs_home_finish",
            Category::CaptureVsOpenexisting => "capture_vs_openexisting",
            Category::CaptureVsSafe => "capture_vs_safe",
            Category::SafeVsOpenexisting => "safe_vs_openexisting",
            Category::Grudge => "grudge",
        }
    }

    /// Prefix used in generated spot ids.
    pub fn id_prefix(self) -> &'static str {
        match self {
            Category::CaptureVsHome => "cvh",
            Category::CaptureVsHomeFinish => "cvf",
            Category::CaptureVsOpenexisting => "cvo",
            Category::CaptureVsSafe => "cvs",
            Category::SafeVsOpenexisting => "svo",
            Category::HomeEntry => "home",
            Category::ExtraTurn => "extra",
            other => other.label(),
        }
    }

    /// Corpus file holding this category.
    pub fn file_name(self) -> String {
        match self {
            Category::Grudge => "spots_grudge_paired.json".to_string(),
            c => format!("spots_{}.json", c.label()),
        }
    }

    pub fn requires_six(self) -> bool {
        matches!(self, Category::ExtraTurn | Category::CaptureVsOpenexisting | Category::SafeVsOpenexisting)
    }

    pub fn is_tradeoff(self) -> bool {
        matches!(
            self,
            Category::CaptureVsHome
                | Category::CaptureVsHomeFinish
                | Category::CaptureVsOpenexisting
                | Category::CaptureVsSafe
                | Category::SafeVsOpenexisting
        )
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Category {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "grudge_paired" {
            return Ok(Category::Grudge);
        }
        Category::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| format!("unknown category label `{s}`"))
    }
}

/// The strategic options a roll offers, by token.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpotOptions {
    pub moves: Vec<Move>,
    pub capture: Vec<u8>,
    /// Moves ending on the home path (entering, advancing or finishing).
    pub home: Vec<u8>,
    pub finish: Vec<u8>,
    /// Safe landings by tokens already on the board.
    pub safe: Vec<u8>,
    pub open: Vec<u8>,
    pub existing: Vec<u8>,
    pub overshoot: Vec<u8>,
    pub blocked_by_own: Vec<u8>,
    /// Unfinished tokens with no legal move for any reason.
    pub stuck: Vec<u8>,
}

impl SpotOptions {
    pub fn analyze(layout: &BoardLayout, state: &GameState, player: PlayerId, dice: Dice) -> Self {
        let mut o = SpotOptions::default();
        for t in 0..TOKENS_PER_PLAYER as u8 {
            match layout.token_status(state, player, dice, t) {
                TokenStatus::Movable(m) => {
                    if m.capture.is_some() {
                        o.capture.push(t);
                    }
                    if m.reaches_home_path() {
                        o.home.push(t);
                    }
                    if m.finishes {
                        o.finish.push(t);
                    }
                    if m.is_safe_landing() {
                        o.safe.push(t);
                    }
                    if m.leaves_base {
                        o.open.push(t);
                    } else {
                        o.existing.push(t);
                    }
                    o.moves.push(m);
                }
                TokenStatus::Finished => {}
                TokenStatus::Overshoot => {
                    o.overshoot.push(t);
                    o.stuck.push(t);
                }
                TokenStatus::BlockedByOwn { .. } => {
                    o.blocked_by_own.push(t);
                    o.stuck.push(t);
                }
                TokenStatus::InBase => o.stuck.push(t),
            }
        }
        o
    }

    pub fn captures_of(&self, victim: PlayerId) -> impl Iterator<Item = &Move> {
        self.moves.iter().filter(move |m| m.capture.is_some_and(|c| c.player == victim))
    }
}

fn distinct(a: &[u8], b: &[u8]) -> bool {
    a.iter().any(|x| b.iter().any(|y| x != y))
}

/// Checks a category's defining condition against the legal moves of a
/// board. `aggressor` is only consulted for grudge spots; when absent any
/// capture qualifies.
pub fn check_category(
    category: Category,
    layout: &BoardLayout,
    state: &GameState,
    player: PlayerId,
    dice: Dice,
    aggressor: Option<PlayerId>,
) -> Result<(), String> {
    let o = SpotOptions::analyze(layout, state, player, dice);
    let fail = |why: &str| Err(format!("{category}: {why}"));
    if category.requires_six() && !dice.is_six() {
        return fail("requires dice = 6");
    }
    if o.moves.is_empty() {
        return fail("no legal move");
    }
    let absent = |name: &str, v: &[u8]| if v.is_empty() { Ok(()) } else { Err(format!("{category}: competing {name} option present")) };
    match category {
        Category::Blocked => {
            if o.stuck.is_empty() {
                return fail("every unfinished token can move");
            }
        }
        Category::Overshoot => {
            if o.overshoot.is_empty() {
                return fail("no token is stopped by overshoot");
            }
        }
        Category::Capture => {
            if o.capture.is_empty() {
                return fail("no capture available");
            }
            absent("home", &o.home)?;
            absent("safe", &o.safe)?;
            absent("open", &o.open)?;
        }
        Category::HomeEntry => {
            if o.home.is_empty() {
                return fail("no home-path move available");
            }
            absent("capture", &o.capture)?;
            absent("safe", &o.safe)?;
            absent("open", &o.open)?;
        }
        Category::Safe => {
            if o.safe.is_empty() {
                return fail("no safe landing available");
            }
            absent("capture", &o.capture)?;
            absent("home", &o.home)?;
            absent("open", &o.open)?;
        }
        Category::ExtraTurn => {
            if o.open.is_empty() || o.existing.is_empty() {
                return fail("needs both a leave-base and a move-existing option");
            }
            absent("capture", &o.capture)?;
            absent("home", &o.home)?;
        }
        Category::CaptureVsHome => {
            if !distinct(&o.capture, &o.home) {
                return fail("needs capture and home-path options on distinct tokens");
            }
        }
        Category::CaptureVsHomeFinish => {
            if !distinct(&o.capture, &o.finish) {
                return fail("needs capture and finishing options on distinct tokens");
            }
        }
        Category::CaptureVsOpenexisting => {
            if !distinct(&o.capture, &o.open) {
                return fail("needs capture and leave-base options on distinct tokens");
            }
        }
        Category::CaptureVsSafe => {
            if !distinct(&o.capture, &o.safe) {
                return fail("needs capture and safe-landing options on distinct tokens");
            }
        }
        Category::SafeVsOpenexisting => {
            if !distinct(&o.safe, &o.open) {
                return fail("needs safe-landing and leave-base options on distinct tokens");
            }
        }
        Category::Grudge => {
            let ok = match aggressor {
                Some(q) => o.captures_of(q).next().is_some(),
                None => !o.capture.is_empty(),
            };
            if !ok {
                return fail("no capture against the aggressor");
            }
        }
    }
    Ok(())
}
