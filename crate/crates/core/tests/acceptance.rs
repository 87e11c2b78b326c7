//! Acceptance suite. Every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line; the test fails if any criterion fails.
//!
//! Set `LUDO_OFFICIAL_CORPUS` to a directory of `spots_*.json` files to run
//! the corpus criteria against it; otherwise they run on generated corpora.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{all_dice, brute_force_moves, random_state, random_state_2p, L};
use ludo_core::agents::{evaluate_2p, evaluate_maxn, evaluate_maxn_raw, heuristic_decide, NodeValue, Search};
use ludo_core::board::{Dice, GameState, TokenStatus};
use ludo_core::harness::{agent_factory, builtin_record, run_spot_eval, run_tournament, AgentSpec, EvalBackend, MatchConfig, RecordLog};
use ludo_core::llm::{adjudicate, parse_response, render_prompt, ParseMode, Persona, PromptSpec};
use ludo_core::metrics::{
    behavioral_rates, grudge_metrics, gt_alignment, pair_records, EvalRecord, InvalidPolicy, MoveEffects, RateSet,
};
use ludo_core::spots::{
    check_category, generate_spots, load_corpus_dir, load_spots, validate_spot, Category, GenerateOptions, Provenance,
    SpotScenario,
};
use ludo_core::{GameRng, SearchConfig};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn official_corpus() -> Option<Vec<SpotScenario>> {
    let dir = std::env::var_os("LUDO_OFFICIAL_CORPUS")?;
    let dir = PathBuf::from(dir);
    let prov = Provenance::Official { path: dir.display().to_string() };
    Some(load_corpus_dir(&L, &dir, prov).expect("official corpus loads").spots)
}

/// 40 spots per category per player count; grudge counts entries, so 20 pairs.
fn generated_corpus(seed: u64) -> Result<Vec<SpotScenario>, String> {
    let mut out = Vec::new();
    for (ci, cat) in Category::ALL.into_iter().enumerate() {
        let n = if cat == Category::Grudge { 20 } else { 40 };
        for k in 2..=4usize {
            let mut rng = GameRng::seed_from(ludo_core::rng::derive_seed(seed, &[ci as u64, k as u64]));
            out.extend(generate_spots(&L, cat, k, n, &mut rng, GenerateOptions::default()).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn records(spec: &AgentSpec, spots: &[SpotScenario], persona: Persona, seed: u64) -> Vec<EvalRecord> {
    spots.iter().map(|s| builtin_record(&L, spec, &SearchConfig::default(), s, persona, seed).unwrap()).collect()
}

fn rates_by_category(recs: &[EvalRecord]) -> BTreeMap<Category, RateSet> {
    let mut cells: BTreeMap<Category, Vec<EvalRecord>> = BTreeMap::new();
    for r in recs {
        cells.entry(r.category).or_default().push(r.clone());
    }
    cells.into_iter().map(|(c, v)| (c, behavioral_rates(&v))).collect()
}

fn c1_skill_ladder() -> Outcome {
    let cfg = MatchConfig::new(vec![AgentSpec::Random, AgentSpec::Heuristic, AgentSpec::Gt], 200, 20_250_101);
    let factory = agent_factory(cfg.search, None);
    let m = run_tournament(&L, &cfg, &factory).map_err(|e| e.to_string())?;
    let hr = m.rate("heuristic", "random").unwrap();
    let gr = m.rate("gt", "random").unwrap();
    let gh = m.rate("gt", "heuristic").unwrap();
    ensure(
        hr >= 0.60 && gr >= 0.60 && (gh - 0.59).abs() <= 0.08,
        format!("heuristic>random {hr:.3} (>=0.60), gt>random {gr:.3} (>=0.60), gt>heuristic {gh:.3} (0.59 +/- 0.08)"),
    )
}

fn c2_history_invariance() -> Outcome {
    let mut grudge = Vec::new();
    for k in 2..=4 {
        let mut rng = GameRng::seed_from(700 + k as u64);
        grudge.extend(generate_spots(&L, Category::Grudge, k, 30, &mut rng, GenerateOptions::default()).map_err(|e| e.to_string())?);
    }
    if let Some(official) = official_corpus() {
        grudge.extend(official.into_iter().filter(|s| s.scenario == Category::Grudge));
    }
    let gt = records(&AgentSpec::Gt, &grudge, Persona::None, 1);
    let block = grudge_metrics(&pair_records(&gt).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;

    let mut mixed = generated_corpus(31)?;
    mixed.truncate(mixed.len().min(600));
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    for spec in [AgentSpec::Gt, AgentSpec::Heuristic] {
        let mut log = RecordLog::open(&dir.path().join(format!("{spec}.jsonl"))).map_err(|e| e.to_string())?;
        let recs = run_spot_eval(&L, &spec, &SearchConfig::default(), &mixed, &Persona::ALL, 5, &EvalBackend::default(), &mut log)
            .map_err(|e| e.to_string())?;
        let mut by_spot: BTreeMap<&str, Vec<(u8, Option<MoveEffects>)>> = BTreeMap::new();
        for r in &recs {
            by_spot.entry(r.spot_id.as_str()).or_default().push((r.final_token, r.effects));
        }
        identical &= by_spot.values().all(|v| v.len() == 5 && v.iter().all(|x| *x == v[0]));
    }
    ensure(
        block.change_rate.num == 0 && block.change_rate.den == block.pairs && identical,
        format!(
            "gt change_rate {}/{} over {} pairs; gt and heuristic identical across 5 personas on {} spots: {identical}",
            block.change_rate.num,
            block.change_rate.den,
            block.pairs,
            mixed.len()
        ),
    )
}

fn value(r: &RateSet, name: &str) -> Option<f64> {
    r.named().into_iter().find(|(n, _)| *n == name).and_then(|(_, x)| x.value())
}

fn c3_reference_columns() -> Outcome {
    if let Some(spots) = official_corpus() {
        let none: Vec<SpotScenario> = spots.into_iter().filter(|s| s.scenario != Category::Grudge).collect();
        let gt = rates_by_category(&records(&AgentSpec::Gt, &none, Persona::None, 0));
        let he = rates_by_category(&records(&AgentSpec::Heuristic, &none, Persona::None, 0));
        let ra = rates_by_category(&records(&AgentSpec::Random, &none, Persona::None, 0));
        use Category::*;
        let gt_rows = [
            (Capture, "capture_rate", 0.88),
            (Safe, "safe_rate", 0.88),
            (HomeEntry, "home_entry_rate", 0.13),
            (ExtraTurn, "bring_out_rate", 1.00),
            (CaptureVsHomeFinish, "home_finish_rate", 1.00),
            (CaptureVsSafe, "capture_rate", 0.98),
        ];
        let he_rows = [
            (CaptureVsSafe, "capture_rate", 1.00),
            (CaptureVsHome, "capture_rate", 1.00),
            (CaptureVsHomeFinish, "capture_rate", 1.00),
            (CaptureVsOpenexisting, "capture_rate", 1.00),
            (CaptureVsHomeFinish, "home_finish_rate", 0.00),
            (ExtraTurn, "bring_out_rate", 1.00),
        ];
        let ra_rows = [
            (Capture, "capture_rate", 0.45),
            (Safe, "safe_rate", 0.53),
            (HomeEntry, "home_entry_rate", 0.50),
            (ExtraTurn, "bring_out_rate", 0.78),
            (ExtraTurn, "move_existing_rate", 0.22),
            (CaptureVsSafe, "capture_rate", 0.63),
            (CaptureVsSafe, "safe_rate", 0.38),
            (CaptureVsHome, "capture_rate", 0.35),
            (CaptureVsHome, "home_entry_rate", 0.65),
            (CaptureVsHomeFinish, "capture_rate", 0.48),
            (CaptureVsHomeFinish, "home_finish_rate", 0.53),
            (CaptureVsOpenexisting, "capture_rate", 0.23),
            (CaptureVsOpenexisting, "open_rate", 0.78),
        ];
        let mut misses = Vec::new();
        for (agent, table, rows, tol) in
            [("gt", &gt, &gt_rows[..], 0.03 + 1e-9), ("heuristic", &he, &he_rows[..], 1e-9), ("random", &ra, &ra_rows[..], 0.15 + 1e-9)]
        {
            for &(cat, metric, want) in rows {
                let got = table.get(&cat).and_then(|r| value(r, metric));
                if got.is_none_or(|g| (g - want).abs() > tol) {
                    misses.push(format!("{agent} {cat} {metric} {got:?} vs {want}"));
                }
            }
        }
        return ensure(misses.is_empty(), format!("official corpus; mismatches: {misses:?}"));
    }
    let spots = generated_corpus(77)?;
    let plain: Vec<SpotScenario> = spots.iter().filter(|s| s.scenario != Category::Grudge).cloned().collect();
    let gt = rates_by_category(&records(&AgentSpec::Gt, &plain, Persona::None, 0));
    let cvf = value(&gt[&Category::CaptureVsHomeFinish], "home_finish_rate").unwrap_or(0.0);
    let bring = value(&gt[&Category::ExtraTurn], "bring_out_rate").unwrap_or(0.0);
    let cvs = value(&gt[&Category::CaptureVsSafe], "capture_rate").unwrap_or(0.0);
    let mut capture_spots = 0;
    let mut heuristic_captures = 0;
    for s in &spots {
        let state = s.state().unwrap();
        let moves = L.moves_unchecked(&state, s.llm_player_id, s.dice);
        if moves.iter().any(|m| m.capture.is_some()) {
            capture_spots += 1;
            let d = heuristic_decide(&L, &state, s.llm_player_id, s.dice).unwrap();
            heuristic_captures += d.mv.capture.is_some() as usize;
        }
    }
    ensure(
        cvf == 1.0 && bring == 1.0 && cvs >= 0.95 && heuristic_captures == capture_spots,
        format!(
            "generated corpus; gt cvf home_finish {cvf:.3} (=1), gt extra_turn bring_out {bring:.3} (=1), gt cvs capture {cvs:.3} (>=0.95), heuristic captured {heuristic_captures}/{capture_spots}"
        ),
    )
}

fn c4_oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let mut rng = GameRng::seed_from(4_0000);
    let mut discrepancies = 0;
    let mut checks = 0;
    for _ in 0..10_000 {
        let s = random_state(&mut rng);
        let p = s.current_player();
        for d in all_dice() {
            checks += 1;
            if L.legal_moves(&s, p, d).unwrap() != brute_force_moves(&s, p, d) {
                discrepancies += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    ensure(
        discrepancies == 0 && elapsed < Duration::from_secs(60),
        format!("{checks} (state, dice) pairs, {discrepancies} discrepancies, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn c5_search_algebra() -> Outcome {
    let cfg = SearchConfig::default();
    let mut rng = GameRng::seed_from(55);
    let mut fails = Vec::new();

    for _ in 0..200 {
        let s = random_state(&mut rng);
        if L.winner(&s).is_some() {
            continue;
        }
        let p = s.current_player();
        let v = Search::new(&cfg, &L, &s, p).chance_value(&s, p, 0);
        let want =
            if s.num_players() == 2 { NodeValue::Scalar(evaluate_2p(&cfg, &L, &s, p)) } else { NodeValue::Vector(evaluate_maxn(&cfg, &L, &s)) };
        if v != want {
            fails.push("depth-0 value differs from evaluator".to_string());
            break;
        }
    }

    for _ in 0..60 {
        let s = random_state(&mut rng);
        if L.winner(&s).is_some() {
            continue;
        }
        let p = s.current_player();
        let whole = Search::new(&cfg, &L, &s, p).chance_value(&s, p, 2);
        let parts: Vec<NodeValue> = all_dice().map(|d| Search::new(&cfg, &L, &s, p).decision_value(&s, p, d, 2)).collect();
        let mean = match whole {
            NodeValue::Scalar(_) => NodeValue::Scalar(parts.iter().map(|v| v.scalar().unwrap()).sum::<f64>() / 6.0),
            NodeValue::Vector(_) => {
                let mut acc = [0.0; 4];
                for v in &parts {
                    acc.iter_mut().zip(v.vector().unwrap()).for_each(|(a, b)| *a += b);
                }
                NodeValue::Vector(acc.map(|a| a / 6.0))
            }
        };
        if whole != mean {
            fails.push(format!("chance decomposition at {}", s.fingerprint()));
            break;
        }
    }

    for _ in 0..1000 {
        let s = random_state_2p(&mut rng);
        let ps = s.active_players();
        if evaluate_2p(&cfg, &L, &s, ps[0]) != -evaluate_2p(&cfg, &L, &s, ps[1]) {
            fails.push(format!("antisymmetry at {}", s.fingerprint()));
            break;
        }
    }

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = random_state(&mut rng);
        worst = worst.max(evaluate_maxn_raw(&cfg, &L, &s).iter().sum::<f64>().abs());
    }
    if worst >= 1e-12 {
        fails.push(format!("maxn sum {worst:e}"));
    }

    let off = cfg.with_memo(false);
    for _ in 0..100 {
        let s = random_state(&mut rng);
        let p = s.current_player();
        let a = Search::new(&cfg, &L, &s, p).chance_value(&s, p, 2);
        let b = Search::new(&off, &L, &s, p).chance_value(&s, p, 2);
        if a != b {
            fails.push(format!("memo changes value at {}", s.fingerprint()));
            break;
        }
    }
    ensure(
        fails.is_empty(),
        format!("depth-0, chance mean, 1000-state antisymmetry, maxn |sum| max {worst:e}, memo on/off x100; failures: {fails:?}"),
    )
}

fn c6_evaluator_values() -> Outcome {
    let cfg = SearchConfig::default();
    let mirror = GameState::from_tokens(&[(0, [5, -1, -1, -1]), (1, [18, -1, -1, -1])], 0).unwrap();
    let finished = GameState::from_tokens(&[(0, [57, 10, -1, -1]), (1, [43, 50, -1, -1])], 0).unwrap();
    let lopsided = GameState::from_tokens(&[(0, [57; 4]), (1, [-1; 4])], 0).unwrap();
    let got = [evaluate_2p(&cfg, &L, &mirror, 0), evaluate_2p(&cfg, &L, &finished, 0), evaluate_2p(&cfg, &L, &lopsided, 0)];
    ensure(got == [0.0, 0.20, 0.999], format!("values {got:?} (want [0.0, 0.2, 0.999])"))
}

fn c7_prompt_golden() -> Outcome {
    let text = std::fs::read_to_string(fixture("spot_cvs_2p_001.json")).unwrap();
    let spot = load_spots(&L, &text).map_err(|e| e.to_string())?.remove(0);
    let got = render_prompt(&PromptSpec::new(&spot, Persona::None), &L).map_err(|e| e.to_string())?;
    let want = std::fs::read_to_string(fixture("prompt_cvs_2p_001_none.txt")).unwrap();
    let banners = ["BOARD & POSITION SYSTEM", "TOKEN STATES", "GAME RULES", "CURRENT GAME STATE", "OUTPUT FORMAT (STRICT)"];
    let positions: Vec<Option<usize>> = banners.iter().map(|b| want.find(&format!("\n{b}\n"))).collect();
    let ordered = positions.iter().all(Option::is_some) && positions.windows(2).all(|w| w[0] < w[1]);
    let aggressive = render_prompt(&PromptSpec::new(&spot, Persona::Aggressive), &L).map_err(|e| e.to_string())?;
    let sentence = aggressive.contains("You are an aggressive Ludo player");
    ensure(
        got == want && ordered && sentence,
        format!("golden byte match {}, banners in order {ordered}, aggressive sentence {sentence}", got == want),
    )
}

fn c8_parser_adjudication() -> Outcome {
    let a = parse_response("2 | reason", ParseMode::Strict);
    let b = parse_response("I move token 2", ParseMode::Strict);
    let ok_parse = a.token_index == Some(2) && a.format_valid && !b.format_valid;

    // Player 1 rolls 2: token 1 (41) would land on its own token at 43.
    let state = GameState::from_tokens(&[(0, [49, -1, -1, -1]), (1, [43, 41, -1, -1])], 1).unwrap();
    let dice = Dice::new(2).unwrap();
    let mut rng = GameRng::seed_from(8);
    let d = adjudicate(&parse_response("1 | advance", ParseMode::Strict), "1 | advance", &L, &state, 1, dice, &mut rng)
        .map_err(|e| e.to_string())?;
    let legal = L.legal_moves(&state, 1, dice).unwrap();
    let ok_block = d.was_move_invalid
        && !d.was_format_invalid
        && matches!(d.chosen_status, Some(TokenStatus::BlockedByOwn { .. }))
        && legal.contains(&d.final_move);

    let spot = SpotScenario {
        id: "cvs_2p_001".into(),
        scenario: Category::CaptureVsSafe,
        players: vec![0, 1],
        llm_player_id: 1,
        current_player: 1,
        dice: Dice::new(6).unwrap(),
        tokens: [(0, [49, -1, -1, -1]), (1, [43, 41, -1, -1])].into_iter().collect(),
        note: String::new(),
        history_text: None,
    };
    let six = spot.dice;
    let answers = ["0 | capture", "1 | safe", "2 | open", "0 | x", "1 | y", "0 | z", "I move token 2", "9 | nine", "no idea", "3|"];
    let recs: Vec<EvalRecord> = answers
        .iter()
        .enumerate()
        .map(|(i, raw)| {
            let mut s = spot.clone();
            s.id = format!("cvs_2p_{i:03}");
            let d = adjudicate(&parse_response(raw, ParseMode::Strict), raw, &L, &state.with_current(1), 1, six, &mut rng).unwrap();
            EvalRecord::from_adjudicated(&s, Persona::None, "llm:fixture", &d)
        })
        .collect();
    let rate = behavioral_rates(&recs).invalid_rate;
    ensure(
        ok_parse && ok_block && rate.num == 4 && rate.den == 10 && rate.value() == Some(0.40),
        format!("strict parse {ok_parse}, blocked pick move-invalid with legal fallback {ok_block}, invalid_rate {}/{}", rate.num, rate.den),
    )
}

fn rec(id: &str, category: Category, token: u8, effects: MoveEffects, aggressor: Option<u8>) -> EvalRecord {
    EvalRecord {
        spot_id: id.to_string(),
        category,
        persona: Persona::None,
        agent: "fixture".into(),
        was_format_invalid: false,
        was_move_invalid: false,
        transport_error: None,
        chosen_token: Some(token),
        final_token: token,
        effects: Some(effects),
        blocked_choice: false,
        overshoot_choice: false,
        board: id.trim_end_matches("_a").trim_end_matches("_b").to_string(),
        aggressor,
        raw_text: None,
    }
}

fn capture_of(p: u8) -> MoveEffects {
    MoveEffects { capture: true, captured_player: Some(p), ..MoveEffects::default() }
}

fn safe() -> MoveEffects {
    MoveEffects { safe: true, ..MoveEffects::default() }
}

fn c9_metric_fixtures() -> Outcome {
    let mut recs = Vec::new();
    for (k, (n, g)) in [(0u8, 0u8), (1, 1), (0, 1)].into_iter().enumerate() {
        let eff = |t: u8| if t == 0 { capture_of(2) } else { safe() };
        recs.push(rec(&format!("grudge_pair{k}_a"), Category::Grudge, n, eff(n), None));
        recs.push(rec(&format!("grudge_pair{k}_b"), Category::Grudge, g, eff(g), Some(2)));
    }
    let block = grudge_metrics(&pair_records(&recs).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let change = (block.change_rate.num, block.change_rate.den);

    let mut rng = GameRng::seed_from(909);
    let mut delta_ok = true;
    for _ in 0..200 {
        let pairs = 1 + rng.below(12);
        let mut recs = Vec::new();
        for k in 0..pairs {
            let aggressor = 1 + rng.below(3) as u8;
            let side = |rng: &mut GameRng| match rng.below(3) {
                0 => (0, capture_of(aggressor)),
                1 => (1, capture_of(if aggressor == 1 { 2 } else { 1 })),
                _ => (2, safe()),
            };
            let (tn, en) = side(&mut rng);
            let (tg, eg) = side(&mut rng);
            recs.push(rec(&format!("grudge_pair{k}_a"), Category::Grudge, tn, en, None));
            recs.push(rec(&format!("grudge_pair{k}_b"), Category::Grudge, tg, eg, Some(aggressor)));
        }
        let b = grudge_metrics(&pair_records(&recs).unwrap()).unwrap();
        let want = b.retaliation_grudge_rate.value().unwrap() - b.retaliation_noconflict_rate.value().unwrap();
        delta_ok &= b.grudge_effect == Some(want);
    }

    let agent: Vec<EvalRecord> = (0..10).map(|i| rec(&format!("s{i}"), Category::Capture, (i % 2) as u8, capture_of(1), None)).collect();
    let gt: Vec<EvalRecord> =
        (0..10).map(|i| rec(&format!("s{i}"), Category::Capture, if i < 6 { (i % 2) as u8 } else { 3 }, capture_of(1), None)).collect();
    let a = gt_alignment(&agent, &gt, InvalidPolicy::Disagree).map_err(|e| e.to_string())?.overall;
    ensure(
        change == (1, 3) && delta_ok && (a.num, a.den) == (6, 10) && a.value() == Some(0.60),
        format!("change_rate {}/{}, delta identity on 200 random fixtures {delta_ok}, gt_alignment {}/{}", change.0, change.1, a.num, a.den),
    )
}

fn c10_corpus() -> Outcome {
    let mut detail = String::new();
    if let Some(spots) = official_corpus() {
        let bad: Vec<String> = spots
            .iter()
            .filter(|s| {
                let st = s.state().unwrap();
                validate_spot(&L, s).is_err()
                    || check_category(s.scenario, &L, &st, s.llm_player_id, s.dice, s.aggressor()).is_err()
            })
            .map(|s| s.id.clone())
            .collect();
        if !bad.is_empty() {
            return Err(format!("official spots failing: {bad:?}"));
        }
        detail.push_str(&format!("official corpus {} spots valid; ", spots.len()));
    }
    let t = Instant::now();
    let spots = generated_corpus(1010)?;
    let mut counts: BTreeMap<(Category, usize), usize> = BTreeMap::new();
    let mut bad = Vec::new();
    for s in &spots {
        *counts.entry((s.scenario, s.players.len())).or_default() += 1;
        let st = s.state().unwrap();
        if validate_spot(&L, s).is_err() || check_category(s.scenario, &L, &st, s.llm_player_id, s.dice, s.aggressor()).is_err() {
            bad.push(s.id.clone());
        }
    }
    let full = counts.len() == 36 && counts.values().all(|&n| n == 40);
    ensure(
        bad.is_empty() && full,
        format!(
            "{detail}generated {} spots over {} (category, player count) cells in {:.1}s, all 40 each {full}, failing {bad:?}",
            spots.len(),
            counts.len(),
            t.elapsed().as_secs_f64()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 skill ladder", c1_skill_ladder),
        ("2 history invariance", c2_history_invariance),
        ("3 reference behavioral columns", c3_reference_columns),
        ("4 engine oracle equivalence", c4_oracle_equivalence),
        ("5 search algebra", c5_search_algebra),
        ("6 evaluator spot values", c6_evaluator_values),
        ("7 prompt golden", c7_prompt_golden),
        ("8 parser and adjudication", c8_parser_adjudication),
        ("9 metric fixtures", c9_metric_fixtures),
        ("10 corpus validity", c10_corpus),
    ];
    let results: Vec<(&str, Outcome, Duration)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(name, f)| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let out = std::panic::catch_unwind(f).unwrap_or_else(|e| {
                        Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
                    });
                    (name, out, t.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = Vec::new();
    for (name, out, took) in &results {
        let secs = took.as_secs_f64();
        match out {
            Ok(d) => println!("criterion {name}: PASS ({secs:.1}s) {d}"),
            Err(d) => {
                println!("criterion {name}: FAIL ({secs:.1}s) {d}");
                failed.push(*name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
