//! Spot scenarios: single decision points isolating one strategic choice.
//!
//! Corpora are JSON files named `spots_<category>.json`, each holding a list
//! of entries with the fields of [`SpotScenario`].

mod category;
mod generate;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{BoardLayout, Dice, GameState, PlayerId};

pub use category::{check_category, Category, SpotOptions};
pub use generate::{generate_corpus, generate_spots, split_by_player_count, GenerateOptions};

pub const NEUTRAL_HISTORY: &str = "No prior conflicts noted.";

pub fn grudge_history(aggressor: PlayerId) -> String {
    format!("Player {aggressor} captured one of your tokens earlier in the game.")
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed spot file: {0}")]
    Json(String),
    #[error("{} invalid spot entr{}: {}", .0.len(), if .0.len() == 1 { "y" } else { "ies" }, join_entries(.0))]
    InvalidEntries(Vec<EntryError>),
    #[error("could not generate {category} spots within {attempts} attempts")]
    GenerationFailed { category: Category, attempts: u64 },
    #[error("grudge pairing failed: {0}")]
    Pairing(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn join_entries(v: &[EntryError]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryErrorKind {
    UnknownCategory,
    Schema,
    InvalidBoard,
    Inconsistent,
    Predicate,
}

/// A rejected corpus entry, reported by position and id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryError {
    pub index: usize,
    pub id: Option<String>,
    pub kind: EntryErrorKind,
    pub reason: String,
}

impl fmt::Display for EntryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            Some(id) => write!(f, "entry {} ({id}): {}", self.index, self.reason),
            None => write!(f, "entry {}: {}", self.index, self.reason),
        }
    }
}

/// One benchmark decision point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpotScenario {
    pub id: String,
    pub scenario: Category,
    pub players: Vec<PlayerId>,
    pub llm_player_id: PlayerId,
    pub current_player: PlayerId,
    pub dice: Dice,
    pub tokens: BTreeMap<PlayerId, [i8; 4]>,
    #[serde(default)]
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history_text: Option<String>,
}

impl SpotScenario {
    pub fn state(&self) -> Result<GameState, String> {
        let toks: Vec<_> = self.tokens.iter().map(|(&p, &t)| (p, t)).collect();
        GameState::from_tokens(&toks, self.current_player).map_err(|e| e.to_string())
    }

    /// Aggressor named in a grudge narrative ("Player <k> captured ...").
    pub fn aggressor(&self) -> Option<PlayerId> {
        let text = self.history_text.as_deref()?;
        let re = Regex::new(r"Player\s+(\d)\s+captured").expect("static regex");
        re.captures(text)?.get(1)?.as_str().parse().ok()
    }

    /// Id shared by both sides of a grudge pair (`_a` / `_b` suffix removed).
    pub fn pair_id(&self) -> Option<&str> {
        self.id.strip_suffix("_a").or_else(|| self.id.strip_suffix("_b"))
    }

    /// Canonical board key: identical for both sides of a grudge pair.
    pub fn board_key(&self) -> String {
        let toks = self
            .tokens
            .iter()
            .map(|(p, t)| format!("{p}:{}", t.map(|x| x.to_string()).join(",")))
            .collect::<Vec<_>>()
            .join(";");
        let players = self.players.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
        format!("players={players};llm={};dice={};{toks}", self.llm_player_id, self.dice)
    }
}

/// Every schema and rule check for one spot.
pub fn validate_spot(layout: &BoardLayout, spot: &SpotScenario) -> Result<(), EntryError> {
    let err = |kind, reason: String| EntryError { index: 0, id: Some(spot.id.clone()), kind, reason };
    if spot.current_player != spot.llm_player_id {
        return Err(err(
            EntryErrorKind::Inconsistent,
            format!("current_player {} must equal llm_player_id {}", spot.current_player, spot.llm_player_id),
        ));
    }
    let mut sorted = spot.players.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != spot.players.len() || !(2..=4).contains(&sorted.len()) || sorted.iter().any(|&p| p > 3) {
        return Err(err(EntryErrorKind::Inconsistent, format!("players {:?} must be 2-4 distinct ids in 0..=3", spot.players)));
    }
    let keys: Vec<PlayerId> = spot.tokens.keys().copied().collect();
    if keys != sorted {
        return Err(err(EntryErrorKind::Inconsistent, format!("token keys {keys:?} do not match players {:?}", spot.players)));
    }
    if !spot.players.contains(&spot.llm_player_id) {
        return Err(err(EntryErrorKind::Inconsistent, format!("llm_player_id {} not among players", spot.llm_player_id)));
    }
    if (spot.scenario == Category::Grudge) != spot.history_text.is_some() {
        return Err(err(EntryErrorKind::Inconsistent, "history_text must be present exactly for grudge spots".into()));
    }
    let state = spot.state().map_err(|e| err(EntryErrorKind::InvalidBoard, e))?;
    layout.validate_state(&state).map_err(|v| {
        err(EntryErrorKind::InvalidBoard, v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    })?;
    check_category(spot.scenario, layout, &state, spot.llm_player_id, spot.dice, spot.aggressor())
        .map_err(|e| err(EntryErrorKind::Predicate, e))
}

/// Outcome of reading a spot file: accepted spots and rejected entries.
#[derive(Clone, Debug, Default)]
pub struct LoadReport {
    pub spots: Vec<SpotScenario>,
    pub rejected: Vec<EntryError>,
}

/// Parses a spot file, keeping every entry's verdict.
pub fn parse_spots(layout: &BoardLayout, text: &str) -> Result<LoadReport, CorpusError> {
    if text.trim().is_empty() {
        return Ok(LoadReport::default());
    }
    let entries: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| CorpusError::Json(e.to_string()))?;
    let mut report = LoadReport::default();
    for (index, v) in entries.into_iter().enumerate() {
        let id = v.get("id").and_then(|x| x.as_str()).map(str::to_string);
        let reject = |kind, reason: String| EntryError { index, id: id.clone(), kind, reason };
        if let Some(label) = v.get("scenario").and_then(|x| x.as_str()) {
            if let Err(e) = label.parse::<Category>() {
                report.rejected.push(reject(EntryErrorKind::UnknownCategory, e));
                continue;
            }
        }
        let spot: SpotScenario = match serde_json::from_value(v) {
            Ok(s) => s,
            Err(e) => {
                report.rejected.push(reject(EntryErrorKind::Schema, e.to_string()));
                continue;
            }
        };
        match validate_spot(layout, &spot) {
            Ok(()) => report.spots.push(spot),
            Err(mut e) => {
                e.index = index;
                report.rejected.push(e);
            }
        }
    }
    Ok(report)
}

/// Strict loader: any rejected entry fails the whole file.
pub fn load_spots(layout: &BoardLayout, text: &str) -> Result<Vec<SpotScenario>, CorpusError> {
    let report = parse_spots(layout, text)?;
    if report.rejected.is_empty() {
        Ok(report.spots)
    } else {
        Err(CorpusError::InvalidEntries(report.rejected))
    }
}

pub fn emit_spots(spots: &[SpotScenario]) -> String {
    serde_json::to_string_pretty(spots).expect("spots serialize")
}

/// Where a corpus came from; recorded with every result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Official { path: String },
    Generated { seed: u64, per_category: usize },
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub spots: Vec<SpotScenario>,
    pub provenance: Provenance,
}

/// Reads every `spots_*.json` file in `dir`, validating each entry.
pub fn parse_corpus_dir(layout: &BoardLayout, dir: &Path) -> Result<Vec<(String, LoadReport)>, CorpusError> {
    let io = |e, p: &Path| CorpusError::Io { path: p.display().to_string(), source: e };
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| io(e, dir))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("spots_") && n.ends_with(".json"))
        })
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f).map_err(|e| io(e, &f))?;
        let name = f.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        out.push((name, parse_spots(layout, &text)?));
    }
    Ok(out)
}

pub fn load_corpus_dir(layout: &BoardLayout, dir: &Path, provenance: Provenance) -> Result<Corpus, CorpusError> {
    let mut spots = Vec::new();
    let mut rejected = Vec::new();
    for (_, report) in parse_corpus_dir(layout, dir)? {
        spots.extend(report.spots);
        rejected.extend(report.rejected);
    }
    if !rejected.is_empty() {
        return Err(CorpusError::InvalidEntries(rejected));
    }
    Ok(Corpus { spots, provenance })
}

/// Writes one file per category present in `spots`.
pub fn write_corpus_dir(dir: &Path, spots: &[SpotScenario]) -> Result<Vec<String>, CorpusError> {
    let io = |e, p: &Path| CorpusError::Io { path: p.display().to_string(), source: e };
    std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let mut written = Vec::new();
    for cat in Category::ALL {
        let subset: Vec<_> = spots.iter().filter(|s| s.scenario == cat).cloned().collect();
        if subset.is_empty() {
            continue;
        }
        let path = dir.join(cat.file_name());
        std::fs::write(&path, emit_spots(&subset)).map_err(|e| io(e, &path))?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

/// Neutral and grudge framings of one board.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrudgePair {
    pub neutral: SpotScenario,
    pub grudge: SpotScenario,
    pub aggressor: PlayerId,
}

/// Builds the `_a` (neutral) / `_b` (grudge) pair for `base`.
///
/// `base.id` becomes the shared prefix. The default narratives are
/// [`NEUTRAL_HISTORY`] and [`grudge_history`].
pub fn pair_grudge(
    layout: &BoardLayout,
    base: &SpotScenario,
    aggressor: PlayerId,
    narratives: Option<(String, String)>,
) -> Result<GrudgePair, CorpusError> {
    let state = base.state().map_err(CorpusError::Pairing)?;
    let opts = SpotOptions::analyze(layout, &state, base.llm_player_id, base.dice);
    if aggressor == base.llm_player_id || opts.captures_of(aggressor).next().is_none() {
        return Err(CorpusError::Pairing(format!("{}: no capture against player {aggressor}", base.id)));
    }
    let (neutral_text, grudge_text) = narratives.unwrap_or_else(|| (NEUTRAL_HISTORY.to_string(), grudge_history(aggressor)));
    let side = |suffix: &str, text: String| SpotScenario {
        id: format!("{}_{suffix}", base.id),
        scenario: Category::Grudge,
        history_text: Some(text),
        ..base.clone()
    };
    Ok(GrudgePair { neutral: side("a", neutral_text), grudge: side("b", grudge_text), aggressor })
}

/// Re-links loaded grudge spots into pairs by id prefix. The aggressor is
/// read from the grudge-side narrative.
pub fn collect_grudge_pairs(spots: &[SpotScenario]) -> Result<Vec<GrudgePair>, CorpusError> {
    let mut sides: BTreeMap<&str, (Option<&SpotScenario>, Option<&SpotScenario>)> = BTreeMap::new();
    for s in spots.iter().filter(|s| s.scenario == Category::Grudge) {
        let Some(prefix) = s.pair_id() else {
            return Err(CorpusError::Pairing(format!("{}: grudge id lacks _a/_b suffix", s.id)));
        };
        let e = sides.entry(prefix).or_default();
        if s.id.ends_with("_a") {
            e.0 = Some(s);
        } else {
            e.1 = Some(s);
        }
    }
    let mut out = Vec::new();
    for (prefix, pair) in sides {
        let (Some(a), Some(b)) = pair else {
            return Err(CorpusError::Pairing(format!("{prefix}: missing one side")));
        };
        if a.board_key() != b.board_key() {
            return Err(CorpusError::Pairing(format!("{prefix}: sides have different boards")));
        }
        let aggressor = b
            .aggressor()
            .ok_or_else(|| CorpusError::Pairing(format!("{prefix}: grudge narrative names no aggressor")))?;
        out.push(GrudgePair { neutral: a.clone(), grudge: b.clone(), aggressor });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: BoardLayout = BoardLayout::standard();

    const FIG9A: &str = r#"[{
        "id": "cvs_2p_001",
        "scenario": "capture_vs_safe",
        "players": [0, 1],
        "llm_player_id": 1,
        "current_player": 1,
        "dice": 6,
        "tokens": {"0": [49, -1, -1, -1], "1": [43, 41, -1, -1]},
        "note": "One capture option and one safe-square option."
    }]"#;

    #[test]
    fn loads_fig9a() {
        let spots = load_spots(&L, FIG9A).unwrap();
        assert_eq!(spots.len(), 1);
        let s = &spots[0];
        assert_eq!(s.id, "cvs_2p_001");
        assert_eq!(s.scenario, Category::CaptureVsSafe);
        assert_eq!(s.dice, Dice::SIX);
        assert_eq!(s.tokens[&1], [43, 41, -1, -1]);
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(load_spots(&L, "").unwrap().is_empty());
        assert!(load_spots(&L, "[]").unwrap().is_empty());
    }

    #[test]
    fn current_player_mismatch_rejected() {
        let text = FIG9A.replace("\"current_player\": 1", "\"current_player\": 0");
        let report = parse_spots(&L, &text).unwrap();
        assert!(report.spots.is_empty());
        assert_eq!(report.rejected[0].kind, EntryErrorKind::Inconsistent);
        assert_eq!(report.rejected[0].id.as_deref(), Some("cvs_2p_001"));
        assert!(load_spots(&L, &text).is_err());
    }

    #[test]
    fn unknown_category_and_missing_field() {
        let text = FIG9A.replace("capture_vs_safe", "capture_vs_moon");
        let r = parse_spots(&L, &text).unwrap();
        assert_eq!(r.rejected[0].kind, EntryErrorKind::UnknownCategory);
        let text = FIG9A.replace("\"dice\": 6,", "");
        let r = parse_spots(&L, &text).unwrap();
        assert_eq!(r.rejected[0].kind, EntryErrorKind::Schema);
    }

    #[test]
    fn invalid_board_rejected() {
        let text = FIG9A.replace("[43, 41, -1, -1]", "[43, 43, -1, -1]");
        let r = parse_spots(&L, &text).unwrap();
        assert_eq!(r.rejected[0].kind, EntryErrorKind::InvalidBoard);
    }

    #[test]
    fn round_trip_is_stable() {
        let spots = load_spots(&L, FIG9A).unwrap();
        assert_eq!(load_spots(&L, &emit_spots(&spots)).unwrap(), spots);
    }

    fn fig9b_base() -> SpotScenario {
        SpotScenario {
            id: "grudge_pair1001".into(),
            scenario: Category::Grudge,
            players: vec![0, 1],
            llm_player_id: 0,
            current_player: 0,
            dice: Dice::new(5).unwrap(),
            tokens: BTreeMap::from([(0, [18, 11, -1, -1]), (1, [23, 16, -1, -1])]),
            note: String::new(),
            history_text: None,
        }
    }

    #[test]
    fn grudge_pair_sides() {
        let pair = pair_grudge(&L, &fig9b_base(), 1, None).unwrap();
        assert_eq!(pair.neutral.id, "grudge_pair1001_a");
        assert_eq!(pair.grudge.id, "grudge_pair1001_b");
        assert_eq!(pair.neutral.tokens, pair.grudge.tokens);
        assert_eq!(pair.neutral.dice, pair.grudge.dice);
        assert_eq!(pair.neutral.history_text.as_deref(), Some(NEUTRAL_HISTORY));
        assert_eq!(pair.grudge.history_text.as_deref(), Some("Player 1 captured one of your tokens earlier in the game."));
        assert_eq!(pair.grudge.aggressor(), Some(1));
        validate_spot(&L, &pair.neutral).unwrap();
        validate_spot(&L, &pair.grudge).unwrap();

        let text = emit_spots(&[pair.neutral.clone(), pair.grudge.clone()]);
        let loaded = load_spots(&L, &text).unwrap();
        let pairs = collect_grudge_pairs(&loaded).unwrap();
        assert_eq!(pairs, vec![pair]);
    }

    #[test]
    fn grudge_pair_needs_capturable_aggressor() {
        let mut base = fig9b_base();
        base.players = vec![0, 1, 2];
        base.tokens.insert(2, [40, -1, -1, -1]);
        assert!(matches!(pair_grudge(&L, &base, 2, None), Err(CorpusError::Pairing(_))));
    }
}
