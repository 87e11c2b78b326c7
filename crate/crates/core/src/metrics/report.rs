use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::llm::Persona;
use crate::spots::{Category, Provenance};

use super::{
    behavioral_rates, distinct, grudge_metrics, gt_alignment, pair_records, persona_alignment, Alignment, EvalRecord,
    GrudgeBlock, InvalidPolicy, MetricsError, Rate, RateSet,
};

pub const CSV_HEADER: &str = "agent,category,persona,metric,num,den,value,corpus";

const STRATUM_NOTE: &str = "block_rate and overshoot_rate are computed over format-valid outputs: a blocked or \
overshooting pick is never a legal move, so restricting them to fully valid outputs would make both rates zero by construction";
const PERSONA_NOTE: &str = "persona_alignment is a locally defined score (mean shift of each persona's target rates \
from the none baseline toward 1, clamped to [0, 1])";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub agent: String,
    pub category: Category,
    pub persona: Persona,
    pub rates: RateSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrudgeRow {
    pub agent: String,
    pub persona: Persona,
    pub block: GrudgeBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub agent: String,
    pub persona: Persona,
    pub reference: String,
    pub policy: InvalidPolicy,
    pub alignment: Alignment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersonaAlignmentRow {
    pub agent: String,
    pub persona: Persona,
    pub score: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub provenance: Option<Provenance>,
    pub seed: Option<u64>,
    pub rates: Vec<RateRow>,
    pub grudge: Vec<GrudgeRow>,
    pub alignment: Vec<AlignmentRow>,
    pub persona_alignment: Vec<PersonaAlignmentRow>,
    pub notes: Vec<String>,
}

/// Aggregates `records` into every table. Agreement is measured against
/// `reference` (normally the search agent) when its records are present.
pub fn build_report(
    records: &[EvalRecord],
    reference: Option<&str>,
    provenance: Option<Provenance>,
    seed: Option<u64>,
) -> Result<MetricsReport, MetricsError> {
    let mut report = MetricsReport { provenance, seed, ..Default::default() };
    if records.is_empty() {
        return Ok(report);
    }
    let mut cells: BTreeMap<(String, Category, Persona), Vec<EvalRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.agent.clone(), r.category, r.persona)).or_default().push(r.clone());
    }
    for ((agent, category, persona), cell) in &cells {
        report.rates.push(RateRow { agent: agent.clone(), category: *category, persona: *persona, rates: behavioral_rates(cell) });
        if *category == Category::Grudge {
            let block = grudge_metrics(&pair_records(cell)?)?;
            report.grudge.push(GrudgeRow { agent: agent.clone(), persona: *persona, block });
        }
    }
    let agents = distinct(records, |r| r.agent.clone());
    let of = |agent: &str, persona: Persona| -> Vec<EvalRecord> {
        records.iter().filter(|r| r.agent == agent && r.persona == persona).cloned().collect()
    };
    if let Some(reference) = reference.filter(|g| agents.iter().any(|a| a == g)) {
        for agent in agents.iter().filter(|a| a.as_str() != reference) {
            for persona in distinct(records, |r| r.persona) {
                let mine = of(agent, persona);
                if mine.is_empty() {
                    continue;
                }
                let mut theirs = of(reference, persona);
                if theirs.is_empty() {
                    theirs = of(reference, Persona::None);
                }
                for policy in [InvalidPolicy::Disagree, InvalidPolicy::Exclude] {
                    report.alignment.push(AlignmentRow {
                        agent: agent.clone(),
                        persona,
                        reference: reference.to_string(),
                        policy,
                        alignment: gt_alignment(&mine, &theirs, policy)?,
                    });
                }
            }
        }
    }
    for agent in &agents {
        let mine: Vec<EvalRecord> = records.iter().filter(|r| &r.agent == agent).cloned().collect();
        for persona in distinct(&mine, |r| r.persona).into_iter().filter(|&p| p != Persona::None) {
            report.persona_alignment.push(PersonaAlignmentRow {
                agent: agent.clone(),
                persona,
                score: persona_alignment(&mine, persona),
            });
        }
    }
    report.notes.push(STRATUM_NOTE.to_string());
    if !report.persona_alignment.is_empty() {
        report.notes.push(PERSONA_NOTE.to_string());
    }
    Ok(report)
}

fn corpus_label(p: &Option<Provenance>) -> String {
    match p {
        None => String::new(),
        Some(Provenance::Official { path }) => format!("official:{path}"),
        Some(Provenance::Generated { seed, per_category }) => format!("generated:seed={seed};per_category={per_category}"),
    }
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct Csv {
    w: csv::Writer<Vec<u8>>,
    corpus: String,
}

impl Csv {
    #[allow(clippy::too_many_arguments)]
    fn row(&mut self, agent: &str, category: &str, persona: &str, metric: &str, n: Option<u64>, d: Option<u64>, value: Option<f64>) {
        let opt = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        self.w
            .write_record([agent, category, persona, metric, &opt(n), &opt(d), &num(value), &self.corpus])
            .expect("in-memory csv write");
    }

    fn rate(&mut self, agent: &str, category: &str, persona: &str, metric: &str, r: Rate) {
        self.row(agent, category, persona, metric, Some(r.num), Some(r.den), r.value());
    }
}

/// One row per (agent, category, persona, metric); undefined values are empty.
pub fn emit_csv(report: &MetricsReport) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory csv write");
    let mut c = Csv { w, corpus: corpus_label(&report.provenance) };
    for r in &report.rates {
        for (name, rate) in r.rates.named() {
            c.rate(&r.agent, r.category.label(), r.persona.label(), name, rate);
        }
    }
    for g in &report.grudge {
        let (a, p, b) = (&g.agent, g.persona.label(), &g.block);
        c.rate(a, "grudge", p, "change_rate", b.change_rate);
        c.rate(a, "grudge", p, "retaliation_grudge_rate", b.retaliation_grudge_rate);
        c.rate(a, "grudge", p, "retaliation_noconflict_rate", b.retaliation_noconflict_rate);
        c.row(a, "grudge", p, "grudge_effect", None, None, b.grudge_effect);
        for (t, n) in &b.transitions {
            c.row(a, "grudge", p, &format!("transition:{t}"), Some(*n), None, None);
        }
    }
    for row in &report.alignment {
        let metric = match row.policy {
            InvalidPolicy::Disagree => "gt_alignment",
            InvalidPolicy::Exclude => "gt_alignment_excluding_invalid",
        };
        for (cat, rate) in &row.alignment.per_category {
            c.rate(&row.agent, cat.label(), row.persona.label(), metric, *rate);
        }
        c.rate(&row.agent, "all", row.persona.label(), metric, row.alignment.overall);
    }
    for row in &report.persona_alignment {
        c.row(&row.agent, "all", row.persona.label(), "persona_alignment", None, None, row.score);
    }
    String::from_utf8(c.w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
}

pub fn emit_json(report: &MetricsReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn parse_json(text: &str) -> Result<MetricsReport, MetricsError> {
    serde_json::from_str(text).map_err(|e| MetricsError::Parse(e.to_string()))
}
