use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::agents::{gt_decide, heuristic_decide, random_decide, SearchConfig};
use crate::board::BoardLayout;
use crate::llm::{evaluate_spot, Backoff, Completer, LlmConfig, Persona, RateLimiter};
use crate::metrics::EvalRecord;
use crate::rng::{derive_seed_str, GameRng};
use crate::spots::SpotScenario;

use super::{AgentSpec, HarnessError};

/// Seed used for one spot's random draws; independent of persona so that
/// persona-blind agents answer identically under every label.
pub fn spot_seed(master: u64, spot_id: &str) -> u64 {
    derive_seed_str(master, spot_id)
}

/// Built-in agent's record for one spot.
pub fn builtin_record(
    layout: &BoardLayout,
    spec: &AgentSpec,
    search: &SearchConfig,
    spot: &SpotScenario,
    persona: Persona,
    seed: u64,
) -> Result<EvalRecord, HarnessError> {
    let state = spot.state().map_err(HarnessError::Config)?;
    let (p, d) = (spot.llm_player_id, spot.dice);
    let decision = match spec {
        AgentSpec::Random => random_decide(layout, &state, p, d, &mut GameRng::seed_from(spot_seed(seed, &spot.id))),
        AgentSpec::Heuristic => heuristic_decide(layout, &state, p, d),
        AgentSpec::Gt => gt_decide(search, layout, &state, p, d),
        AgentSpec::Llm(_) => return Err(HarnessError::Config("LLM agents need a completion service".into())),
    };
    let d = decision.ok_or_else(|| HarnessError::Config(format!("{}: no legal move", spot.id)))?;
    Ok(EvalRecord::from_move(spot, persona, &spec.to_string(), &d.mv))
}

/// Append-only JSONL store that survives interruption.
pub struct RecordLog {
    file: File,
    done: HashSet<(String, String, String)>,
    pub existing: Vec<EvalRecord>,
}

fn key(r: &EvalRecord) -> (String, String, String) {
    (r.agent.clone(), r.spot_id.clone(), r.persona.label().to_string())
}

impl RecordLog {
    /// Opens or creates `path`, dropping a trailing partial line left by a crash.
    pub fn open(path: &Path) -> Result<Self, HarnessError> {
        let io = |e| HarnessError::Io(format!("{}: {e}", path.display()));
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path).map_err(io)?;
        let mut existing = Vec::new();
        let mut good_len = 0u64;
        {
            let mut reader = BufReader::new(&file);
            let mut line = String::new();
            loop {
                line.clear();
                let n = reader.read_line(&mut line).map_err(io)?;
                if n == 0 || !line.ends_with('\n') {
                    break;
                }
                match serde_json::from_str::<EvalRecord>(line.trim_end()) {
                    Ok(r) => existing.push(r),
                    Err(_) => break,
                }
                good_len += n as u64;
            }
        }
        if file.metadata().map_err(io)?.len() != good_len {
            file.set_len(good_len).map_err(io)?;
            file.seek(SeekFrom::End(0)).map_err(io)?;
        }
        let done = existing.iter().map(key).collect();
        Ok(RecordLog { file, done, existing })
    }

    pub fn contains(&self, agent: &str, spot_id: &str, persona: Persona) -> bool {
        self.done.contains(&(agent.to_string(), spot_id.to_string(), persona.label().to_string()))
    }

    pub fn append(&mut self, records: &[EvalRecord]) -> Result<(), HarnessError> {
        let mut buf = String::new();
        for r in records {
            if self.done.insert(key(r)) {
                buf.push_str(&serde_json::to_string(r).expect("record serializes"));
                buf.push('\n');
            }
        }
        let io = |e: std::io::Error| HarnessError::Io(e.to_string());
        self.file.write_all(buf.as_bytes()).map_err(io)?;
        self.file.sync_data().map_err(io)
    }
}

/// Reads a record log, ignoring a trailing partial line.
pub fn read_records(path: &Path) -> Result<Vec<EvalRecord>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if !line.ends_with('\n') {
            break;
        }
        let r = serde_json::from_str(line.trim_end())
            .map_err(|e| HarnessError::Io(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(r);
    }
    Ok(out)
}

/// Where spot evaluation sends its queries.
#[derive(Default)]
pub struct EvalBackend {
    pub completer: Option<Arc<dyn Completer>>,
    pub llm: LlmConfig,
    pub backoff: Backoff,
}

/// Evaluates `agent` on every (spot, persona) pair not already in `log`.
/// Returns the full record set for this agent in corpus order.
#[allow(clippy::too_many_arguments)]
pub fn run_spot_eval(
    layout: &BoardLayout,
    agent: &AgentSpec,
    search: &SearchConfig,
    spots: &[SpotScenario],
    personas: &[Persona],
    seed: u64,
    backend: &EvalBackend,
    log: &mut RecordLog,
) -> Result<Vec<EvalRecord>, HarnessError> {
    if personas.is_empty() {
        return Err(HarnessError::Config("no persona conditions requested".into()));
    }
    let name = agent.to_string();
    let todo: Vec<(&SpotScenario, Persona)> = spots
        .iter()
        .flat_map(|s| personas.iter().map(move |&p| (s, p)))
        .filter(|(s, p)| !log.contains(&name, &s.id, *p))
        .collect();
    match agent {
        AgentSpec::Llm(model) => {
            let completer = backend
                .completer
                .clone()
                .ok_or_else(|| HarnessError::Config(format!("no completion service configured for {name}")))?;
            let cfg = LlmConfig { model: model.clone(), ..backend.llm.clone() };
            let limiter = RateLimiter::per_second(cfg.requests_per_second);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.concurrency.max(1))
                .build()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            for chunk in todo.chunks(cfg.concurrency.max(1) * 4) {
                let recs: Vec<Result<EvalRecord, HarnessError>> = pool.install(|| {
                    chunk
                        .par_iter()
                        .map(|&(spot, persona)| {
                            limiter.wait();
                            let mut rng = GameRng::seed_from(spot_seed(seed, &format!("{}/{}", spot.id, persona)));
                            let out = evaluate_spot(completer.as_ref(), &cfg, backend.backoff, layout, spot, persona, &mut rng)?;
                            Ok(EvalRecord::from_adjudicated(spot, persona, &name, &out.decision))
                        })
                        .collect()
                });
                let recs: Vec<EvalRecord> = recs.into_iter().collect::<Result<_, _>>()?;
                log.append(&recs)?;
                log.existing.extend(recs);
            }
        }
        _ => {
            let recs: Vec<Result<EvalRecord, HarnessError>> =
                todo.par_iter().map(|&(spot, persona)| builtin_record(layout, agent, search, spot, persona, seed)).collect();
            let recs: Vec<EvalRecord> = recs.into_iter().collect::<Result<_, _>>()?;
            log.append(&recs)?;
            log.existing.extend(recs);
        }
    }
    let order: std::collections::HashMap<(&str, Persona), usize> = spots
        .iter()
        .enumerate()
        .flat_map(|(i, s)| personas.iter().enumerate().map(move |(j, &p)| ((s.id.as_str(), p), i * personas.len() + j)))
        .collect();
    let mut mine: Vec<EvalRecord> = log
        .existing
        .iter()
        .filter(|r| r.agent == name && order.contains_key(&(r.spot_id.as_str(), r.persona)))
        .cloned()
        .collect();
    mine.sort_by_key(|r| order[&(r.spot_id.as_str(), r.persona)]);
    Ok(mine)
}
