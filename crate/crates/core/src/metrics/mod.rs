//! Behavioral rates, grudge sensitivity and agreement with the search agent,
//! computed from per-spot evaluation records.

mod report;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Move, PlayerId, TokenStatus};
use crate::llm::{AdjudicatedDecision, Persona};
use crate::spots::{Category, SpotScenario};

pub use report::{build_report, emit_csv, emit_json, parse_json, AlignmentRow, GrudgeRow, MetricsReport, PersonaAlignmentRow, RateRow, CSV_HEADER};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("grudge pair {0}: sides reference different boards")]
    PairMismatch(String),
    #[error("grudge pair {0}: incomplete or without aggressor")]
    PairIncomplete(String),
    #[error("no reference record for spot {0}")]
    Coverage(String),
    #[error("malformed report: {0}")]
    Parse(String),
}

/// What the chosen move did. Only recorded for valid outputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveEffects {
    pub capture: bool,
    pub captured_player: Option<PlayerId>,
    pub safe: bool,
    pub home_entry: bool,
    pub home_finish: bool,
    pub leave_base: bool,
    pub move_existing: bool,
}

impl MoveEffects {
    pub fn of(mv: &Move) -> Self {
        MoveEffects {
            capture: mv.capture.is_some(),
            captured_player: mv.capture.map(|c| c.player),
            safe: mv.is_safe_landing(),
            home_entry: mv.reaches_home_path(),
            home_finish: mv.finishes,
            leave_base: mv.leaves_base,
            move_existing: !mv.leaves_base,
        }
    }

    /// Coarse class used for grudge transition counts.
    pub fn class(&self) -> ChoiceClass {
        if self.capture {
            ChoiceClass::Capture
        } else if self.safe {
            ChoiceClass::Safe
        } else if self.home_entry {
            ChoiceClass::Home
        } else {
            ChoiceClass::Other
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiceClass {
    Capture,
    Safe,
    Home,
    Other,
}

impl ChoiceClass {
    pub const ALL: [ChoiceClass; 4] = [ChoiceClass::Capture, ChoiceClass::Safe, ChoiceClass::Home, ChoiceClass::Other];

    pub fn label(self) -> &'static str {
        match self {
            ChoiceClass::Capture => "capture",
            ChoiceClass::Safe => "safe",
            ChoiceClass::Home => "home",
            ChoiceClass::Other => "other",
        }
    }
}

/// One agent's answer to one spot under one persona.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub spot_id: String,
    pub category: Category,
    pub persona: Persona,
    pub agent: String,
    pub was_format_invalid: bool,
    pub was_move_invalid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport_error: Option<String>,
    /// Token named by the output (pre-fallback); absent when unparseable.
    pub chosen_token: Option<u8>,
    /// Token actually moved, after any fallback.
    pub final_token: u8,
    pub effects: Option<MoveEffects>,
    pub blocked_choice: bool,
    pub overshoot_choice: bool,
    /// Board identity shared by both sides of a grudge pair.
    pub board: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggressor: Option<PlayerId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
}

impl EvalRecord {
    /// Record for a built-in agent's (always legal) move.
    pub fn from_move(spot: &SpotScenario, persona: Persona, agent: &str, mv: &Move) -> Self {
        EvalRecord {
            spot_id: spot.id.clone(),
            category: spot.scenario,
            persona,
            agent: agent.to_string(),
            was_format_invalid: false,
            was_move_invalid: false,
            transport_error: None,
            chosen_token: Some(mv.token),
            final_token: mv.token,
            effects: Some(MoveEffects::of(mv)),
            blocked_choice: false,
            overshoot_choice: false,
            board: spot.board_key(),
            aggressor: spot.aggressor(),
            raw_text: None,
        }
    }

    /// Record for an adjudicated model response.
    pub fn from_adjudicated(spot: &SpotScenario, persona: Persona, agent: &str, d: &AdjudicatedDecision) -> Self {
        let status = d.chosen_status;
        EvalRecord {
            spot_id: spot.id.clone(),
            category: spot.scenario,
            persona,
            agent: agent.to_string(),
            was_format_invalid: d.was_format_invalid,
            was_move_invalid: d.was_move_invalid,
            transport_error: d.transport_error.clone(),
            chosen_token: d.chosen_token,
            final_token: d.final_move.token,
            effects: d.is_valid().then(|| MoveEffects::of(&d.final_move)),
            blocked_choice: matches!(status, Some(TokenStatus::BlockedByOwn { .. } | TokenStatus::InBase)),
            overshoot_choice: matches!(status, Some(TokenStatus::Overshoot)),
            board: spot.board_key(),
            aggressor: spot.aggressor(),
            raw_text: Some(d.raw_text.clone()),
        }
    }

    pub fn is_valid(&self) -> bool {
        !self.was_format_invalid && !self.was_move_invalid && self.transport_error.is_none()
    }

    pub fn is_invalid(&self) -> bool {
        self.was_format_invalid || self.was_move_invalid
    }

    /// An integer was parsed, whether or not it named a movable token.
    pub fn is_format_valid(&self) -> bool {
        !self.was_format_invalid && self.transport_error.is_none()
    }

    /// Token used for preference comparisons; `None` for invalid records.
    pub fn preference(&self) -> Option<u8> {
        self.is_valid().then_some(self.final_token)
    }

    /// Shared id of a grudge pair.
    pub fn pair_id(&self) -> Option<&str> {
        self.spot_id.strip_suffix("_a").or_else(|| self.spot_id.strip_suffix("_b"))
    }
}

/// A fraction that keeps its denominator; undefined when empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn new(num: u64, den: u64) -> Self {
        debug_assert!(num <= den);
        Rate { num, den }
    }

    pub fn value(&self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 / self.den as f64)
    }

    fn count<'a, T: 'a>(items: impl IntoIterator<Item = &'a T>, pred: impl Fn(&T) -> bool) -> Self {
        let mut r = Rate::default();
        for x in items {
            r.den += 1;
            if pred(x) {
                r.num += 1;
            }
        }
        r
    }
}

#[derive(Serialize, Deserialize)]
struct RateRepr {
    num: u64,
    den: u64,
    value: Option<f64>,
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RateRepr { num: self.num, den: self.den, value: self.value() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = RateRepr::deserialize(d)?;
        if r.num > r.den {
            return Err(serde::de::Error::custom(format!("rate numerator {} exceeds denominator {}", r.num, r.den)));
        }
        Ok(Rate { num: r.num, den: r.den })
    }
}

/// Every per-cell rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateSet {
    pub invalid_rate: Rate,
    pub capture_rate: Rate,
    pub safe_rate: Rate,
    pub home_entry_rate: Rate,
    pub home_finish_rate: Rate,
    pub open_rate: Rate,
    pub bring_out_rate: Rate,
    pub move_existing_rate: Rate,
    pub block_rate: Rate,
    pub overshoot_rate: Rate,
    pub records: u64,
    pub valid: u64,
    pub transport_errors: u64,
}

impl RateSet {
    pub fn named(&self) -> [(&'static str, Rate); 10] {
        [
            ("invalid_rate", self.invalid_rate),
            ("capture_rate", self.capture_rate),
            ("safe_rate", self.safe_rate),
            ("home_entry_rate", self.home_entry_rate),
            ("home_finish_rate", self.home_finish_rate),
            ("open_rate", self.open_rate),
            ("bring_out_rate", self.bring_out_rate),
            ("move_existing_rate", self.move_existing_rate),
            ("block_rate", self.block_rate),
            ("overshoot_rate", self.overshoot_rate),
        ]
    }
}

/// Rates over records sharing an (agent, category, persona) key.
///
/// Behavioral rates use valid records only. `invalid_rate` counts format- or
/// move-invalid outputs over all records that produced text; transport
/// failures are tallied separately. `block_rate` and `overshoot_rate` use
/// format-valid records, since a blocked or overshooting pick is never a
/// legal move.
pub fn behavioral_rates(records: &[EvalRecord]) -> RateSet {
    let answered: Vec<&EvalRecord> = records.iter().filter(|r| r.transport_error.is_none()).collect();
    let valid: Vec<&MoveEffects> = records.iter().filter(|r| r.is_valid()).filter_map(|r| r.effects.as_ref()).collect();
    let format_valid: Vec<&EvalRecord> = records.iter().filter(|r| r.is_format_valid()).collect();
    let eff = |f: fn(&MoveEffects) -> bool| Rate::count(valid.iter().copied(), f);
    RateSet {
        invalid_rate: Rate::count(answered.iter().copied(), EvalRecord::is_invalid),
        capture_rate: eff(|e| e.capture),
        safe_rate: eff(|e| e.safe),
        home_entry_rate: eff(|e| e.home_entry),
        home_finish_rate: eff(|e| e.home_finish),
        open_rate: eff(|e| e.leave_base),
        bring_out_rate: eff(|e| e.leave_base),
        move_existing_rate: eff(|e| e.move_existing),
        block_rate: Rate::count(format_valid.iter().copied(), |r| r.blocked_choice),
        overshoot_rate: Rate::count(format_valid.iter().copied(), |r| r.overshoot_choice),
        records: records.len() as u64,
        valid: valid.len() as u64,
        transport_errors: (records.len() - answered.len()) as u64,
    }
}

/// Neutral and grudge records for one board.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordPair {
    pub neutral: EvalRecord,
    pub grudge: EvalRecord,
    pub aggressor: PlayerId,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrudgeBlock {
    pub change_rate: Rate,
    pub retaliation_grudge_rate: Rate,
    pub retaliation_noconflict_rate: Rate,
    /// `retaliation_grudge_rate - retaliation_noconflict_rate`.
    pub grudge_effect: Option<f64>,
    /// `"<neutral class>-><grudge class>"` counts over valid pairs.
    pub transitions: BTreeMap<String, u64>,
    pub pairs: u64,
}

fn retaliates(r: &EvalRecord, aggressor: PlayerId) -> bool {
    r.effects.is_some_and(|e| e.captured_player == Some(aggressor))
}

pub fn grudge_metrics(pairs: &[RecordPair]) -> Result<GrudgeBlock, MetricsError> {
    for p in pairs {
        if p.neutral.board != p.grudge.board {
            return Err(MetricsError::PairMismatch(p.neutral.pair_id().unwrap_or(&p.neutral.spot_id).to_string()));
        }
    }
    let both_valid: Vec<&RecordPair> = pairs.iter().filter(|p| p.neutral.is_valid() && p.grudge.is_valid()).collect();
    let change_rate = Rate::count(both_valid.iter().copied(), |p| p.neutral.final_token != p.grudge.final_token);
    let side = |pick: fn(&RecordPair) -> &EvalRecord| {
        Rate::count(pairs.iter().filter(|p| pick(p).is_valid()), |p| retaliates(pick(p), p.aggressor))
    };
    let g = side(|p| &p.grudge);
    let n = side(|p| &p.neutral);
    let mut transitions = BTreeMap::new();
    for a in ChoiceClass::ALL {
        for b in ChoiceClass::ALL {
            transitions.insert(format!("{}->{}", a.label(), b.label()), 0);
        }
    }
    for p in &both_valid {
        let (Some(a), Some(b)) = (p.neutral.effects, p.grudge.effects) else { continue };
        *transitions.entry(format!("{}->{}", a.class().label(), b.class().label())).or_default() += 1;
    }
    Ok(GrudgeBlock {
        change_rate,
        retaliation_grudge_rate: g,
        retaliation_noconflict_rate: n,
        grudge_effect: g.value().zip(n.value()).map(|(g, n)| g - n),
        transitions,
        pairs: pairs.len() as u64,
    })
}

/// Links `_a` / `_b` grudge records; the aggressor comes from the grudge side.
pub fn pair_records(records: &[EvalRecord]) -> Result<Vec<RecordPair>, MetricsError> {
    let mut sides: BTreeMap<&str, (Option<&EvalRecord>, Option<&EvalRecord>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.category == Category::Grudge) {
        let Some(pid) = r.pair_id() else { return Err(MetricsError::PairIncomplete(r.spot_id.clone())) };
        let e = sides.entry(pid).or_default();
        if r.spot_id.ends_with("_a") {
            e.0 = Some(r);
        } else {
            e.1 = Some(r);
        }
    }
    sides
        .into_iter()
        .map(|(pid, s)| match s {
            (Some(a), Some(b)) => {
                let aggressor = b.aggressor.ok_or_else(|| MetricsError::PairIncomplete(pid.to_string()))?;
                Ok(RecordPair { neutral: a.clone(), grudge: b.clone(), aggressor })
            }
            _ => Err(MetricsError::PairIncomplete(pid.to_string())),
        })
        .collect()
}

/// Treatment of invalid agent outputs when scoring agreement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidPolicy {
    Disagree,
    Exclude,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub per_category: BTreeMap<Category, Rate>,
    pub overall: Rate,
}

/// Fraction of spots where the agent picks the same token as the reference.
pub fn gt_alignment(agent: &[EvalRecord], reference: &[EvalRecord], policy: InvalidPolicy) -> Result<Alignment, MetricsError> {
    let by_id: BTreeMap<&str, &EvalRecord> = reference.iter().map(|r| (r.spot_id.as_str(), r)).collect();
    let mut out = Alignment::default();
    for r in agent {
        let gt = by_id.get(r.spot_id.as_str()).ok_or_else(|| MetricsError::Coverage(r.spot_id.clone()))?;
        let agree = match r.preference() {
            Some(t) => gt.preference() == Some(t),
            None if policy == InvalidPolicy::Exclude => continue,
            None => false,
        };
        let cell = out.per_category.entry(r.category).or_default();
        cell.den += 1;
        out.overall.den += 1;
        if agree {
            cell.num += 1;
            out.overall.num += 1;
        }
    }
    Ok(out)
}

/// Direction a persona is expected to push one rate.
#[derive(Clone, Copy, Debug)]
pub struct PersonaTarget {
    pub category: Category,
    pub metric: &'static str,
}

/// Rates each persona is meant to raise.
pub fn persona_targets(persona: Persona) -> &'static [PersonaTarget] {
    use Category::*;
    const fn t(category: Category, metric: &'static str) -> PersonaTarget {
        PersonaTarget { category, metric }
    }
    const AGGRESSIVE: &[PersonaTarget] = &[
        t(CaptureVsHome, "capture_rate"),
        t(CaptureVsHomeFinish, "capture_rate"),
        t(CaptureVsOpenexisting, "capture_rate"),
        t(CaptureVsSafe, "capture_rate"),
    ];
    const GREEDY: &[PersonaTarget] = &[t(CaptureVsHome, "home_entry_rate"), t(CaptureVsHomeFinish, "home_finish_rate"), t(HomeEntry, "home_entry_rate")];
    const SAFE: &[PersonaTarget] = &[t(CaptureVsSafe, "safe_rate"), t(SafeVsOpenexisting, "safe_rate"), t(Safe, "safe_rate")];
    const UNFORGIVING: &[PersonaTarget] = &[t(Grudge, "retaliation_grudge_rate")];
    match persona {
        Persona::None => &[],
        Persona::Aggressive => AGGRESSIVE,
        Persona::Greedy => GREEDY,
        Persona::Safe => SAFE,
        Persona::Unforgiving => UNFORGIVING,
    }
}

/// Shift from `baseline` toward 1, as a share of the available headroom,
/// clamped to [0, 1]. A locally defined score, not a published formula.
pub fn shift_score(baseline: f64, persona: f64) -> f64 {
    if baseline >= 1.0 {
        return if persona >= 1.0 { 1.0 } else { 0.0 };
    }
    ((persona - baseline) / (1.0 - baseline)).clamp(0.0, 1.0)
}

/// Mean [`shift_score`] over a persona's targets for one agent; `None` when no
/// target has data under both conditions.
pub fn persona_alignment(records: &[EvalRecord], persona: Persona) -> Option<f64> {
    let rate = |p: Persona, t: &PersonaTarget| -> Option<f64> {
        let cell: Vec<EvalRecord> = records.iter().filter(|r| r.persona == p && r.category == t.category).cloned().collect();
        if t.metric == "retaliation_grudge_rate" {
            return grudge_metrics(&pair_records(&cell).ok()?).ok()?.retaliation_grudge_rate.value();
        }
        let set = behavioral_rates(&cell);
        set.named().into_iter().find(|(n, _)| *n == t.metric)?.1.value()
    };
    let scores: Vec<f64> = persona_targets(persona)
        .iter()
        .filter_map(|t| Some(shift_score(rate(Persona::None, t)?, rate(persona, t)?)))
        .collect();
    (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Distinct values of a record field, in order.
pub fn distinct<T: Ord + Clone>(records: &[EvalRecord], f: impl Fn(&EvalRecord) -> T) -> Vec<T> {
    records.iter().map(f).collect::<BTreeSet<_>>().into_iter().collect()
}
