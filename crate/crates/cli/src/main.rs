//! `ludo`: games, tournaments, spot corpora, evaluations and reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ludo_core::agents::SearchConfig;
use ludo_core::board::BoardLayout;
use ludo_core::harness::{
    agent_factory, read_records, run_game, run_spot_eval, run_tournament, spot_seed, AgentSpec, EvalBackend, MatchConfig,
    RecordLog, RunConfig, RunManifest,
};
use ludo_core::llm::{Backoff, Completer, Fixtures, LlmConfig, Persona, ReplayCompleter};
use ludo_core::metrics::{build_report, emit_csv, emit_json};
use ludo_core::spots::{
    generate_corpus, load_corpus_dir, parse_corpus_dir, parse_spots, write_corpus_dir, GenerateOptions, LoadReport,
    Provenance, SpotScenario,
};

#[derive(Parser, Debug)]
#[command(name = "ludo", version, about = "Ludo engine, baseline agents and spot benchmark harness")]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML config with seed, roster, search and model settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Play one game and write its transcript.
    Simulate(SimulateArgs),
    /// Round-robin two-player matches; writes the win-rate matrix.
    Tournament(TournamentArgs),
    /// Generate a spot corpus.
    GenSpots(GenSpotsArgs),
    /// Check a spot file or corpus directory; fails on any bad entry.
    ValidateSpots(ValidateArgs),
    /// Evaluate one agent on a spot corpus under persona conditions.
    Eval(EvalArgs),
    /// Aggregate evaluation records into metric tables.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct SearchArgs {
    /// Search depth for the gt agent.
    #[arg(long)]
    depth: Option<u32>,
    /// Disable the transposition cache.
    #[arg(long)]
    no_memo: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Comma-separated agents, one per seat (2-4).
    #[arg(long, value_delimiter = ',', default_value = "gt,heuristic")]
    agents: Vec<AgentSpec>,
    #[arg(long)]
    turn_cap: Option<u32>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Args, Debug)]
struct TournamentArgs {
    /// Comma-separated roster; defaults to the config roster.
    #[arg(long, value_delimiter = ',')]
    agents: Option<Vec<AgentSpec>>,
    /// Games per pairing.
    #[arg(long)]
    games: Option<u32>,
    #[arg(long)]
    turn_cap: Option<u32>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Args, Debug)]
struct GenSpotsArgs {
    /// Entries per category (grudge: pairs), split over 2/3/4 players.
    #[arg(long, default_value_t = 40)]
    per_category: usize,
    #[arg(long, default_value_t = GenerateOptions::default().max_attempts)]
    max_attempts: u64,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// A spot file or a directory of spots_*.json files.
    path: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Agent to evaluate: random, heuristic, gt or llm:<model>.
    #[arg(long)]
    agent: AgentSpec,
    /// Corpus directory; defaults to the config corpus, else a generated one.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Size of the generated corpus when no directory is given.
    #[arg(long, default_value_t = 40)]
    per_category: usize,
    /// Comma-separated persona labels; defaults to the config list.
    #[arg(long, value_delimiter = ',')]
    personas: Option<Vec<Persona>>,
    /// Record log, resumed if it exists.
    #[arg(long)]
    records: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Args, Debug, Default)]
struct LlmArgs {
    /// Answer model queries from a recorded fixture file instead of a live service.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Save every live response to this fixture file (needs the `http` feature).
    #[arg(long)]
    record_fixtures: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Record logs to aggregate; defaults to <out>/records.jsonl.
    #[arg(long = "records")]
    records: Vec<PathBuf>,
    /// Agent used as the alignment reference.
    #[arg(long, default_value = "gt")]
    reference: String,
    /// Manifest of the evaluation run, for corpus provenance.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

const L: BoardLayout = BoardLayout::standard();

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.clone();
    match cli.command {
        Command::Simulate(a) => simulate(&mut cfg, &out, a),
        Command::Tournament(a) => tournament(&mut cfg, &out, a),
        Command::GenSpots(a) => gen_spots(&cfg, &out, a),
        Command::ValidateSpots(a) => validate(&out, a),
        Command::Eval(a) => eval(&mut cfg, &out, a),
        Command::Report(a) => report(&out, a),
    }
}

fn apply_search(cfg: &mut RunConfig, a: &SearchArgs) -> Result<SearchConfig> {
    if let Some(d) = a.depth {
        cfg.search.depth = d;
    }
    if a.no_memo {
        cfg.search.memo = false;
    }
    cfg.search.check().map_err(anyhow::Error::msg)?;
    Ok(cfg.search)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
}

fn save_manifest(out: &Path, mut m: RunManifest) -> Result<()> {
    m.finish();
    let name = format!("manifest-{}.json", m.command);
    write(&out.join(name), &serde_json::to_string_pretty(&m)?)
}

/// Completion service for LLM agents, if any is needed and available.
fn completer(cfg: &LlmConfig, a: &LlmArgs, needed: bool) -> Result<Option<Arc<dyn Completer>>> {
    if !needed {
        return Ok(None);
    }
    if let Some(p) = &a.fixtures {
        let fixtures = Fixtures::load(p).with_context(|| format!("loading fixtures {}", p.display()))?;
        return Ok(Some(Arc::new(ReplayCompleter { fixtures })));
    }
    live_completer(cfg, a)
}

#[cfg(feature = "http")]
fn live_completer(_cfg: &LlmConfig, a: &LlmArgs) -> Result<Option<Arc<dyn Completer>>> {
    use ludo_core::llm::{HttpCompleter, RecordingCompleter};
    let http = HttpCompleter::from_env().map_err(|e| anyhow::anyhow!("{e}"))?;
    match &a.record_fixtures {
        Some(p) => Ok(Some(Arc::new(SavingCompleter { inner: RecordingCompleter::new(http), path: p.clone() }))),
        None => Ok(Some(Arc::new(http))),
    }
}

#[cfg(not(feature = "http"))]
fn live_completer(_cfg: &LlmConfig, a: &LlmArgs) -> Result<Option<Arc<dyn Completer>>> {
    if a.record_fixtures.is_some() {
        bail!("--record-fixtures needs a build with the `http` feature");
    }
    bail!("LLM agents need --fixtures, or a build with the `http` feature and a live endpoint")
}

/// Recording client that rewrites its fixture file after every answer.
#[cfg(feature = "http")]
struct SavingCompleter<C> {
    inner: ludo_core::llm::RecordingCompleter<C>,
    path: PathBuf,
}

#[cfg(feature = "http")]
impl<C: Completer> Completer for SavingCompleter<C> {
    fn complete_once(&self, req: &ludo_core::llm::CompletionRequest) -> Result<String, ludo_core::llm::TransportError> {
        let text = self.inner.complete_once(req)?;
        let mut all = Fixtures::load(&self.path).unwrap_or_default();
        all.0.extend(self.inner.fixtures().0);
        if let Err(e) = all.save(&self.path) {
            eprintln!("warning: could not save fixtures to {}: {e}", self.path.display());
        }
        Ok(text)
    }
}

fn has_llm(roster: &[AgentSpec]) -> bool {
    roster.iter().any(|a| matches!(a, AgentSpec::Llm(_)))
}

fn simulate(cfg: &mut RunConfig, out: &Path, a: SimulateArgs) -> Result<ExitCode> {
    let search = apply_search(cfg, &a.search)?;
    if !(2..=4).contains(&a.agents.len()) {
        bail!("simulate needs 2-4 agents, got {}", a.agents.len());
    }
    cfg.roster = a.agents.clone();
    if let Some(t) = a.turn_cap {
        cfg.turn_cap = t;
    }
    let svc = completer(&cfg.llm, &a.llm, has_llm(&a.agents))?;
    let factory = agent_factory(search, svc.map(|c| (c, cfg.llm.clone())));
    let mut agents = a.agents.iter().map(&factory).collect::<Result<Vec<_>, _>>()?;
    let seats: Vec<u8> = if a.agents.len() == 2 { vec![0, 1] } else { (0..a.agents.len() as u8).collect() };
    let manifest = RunManifest::new("simulate", cfg, None);
    let result = run_game(&L, &mut agents, &seats, cfg.seed, cfg.turn_cap)?;
    write(&out.join("game.json"), &serde_json::to_string_pretty(&result)?)?;
    let seat = seats.iter().position(|&s| s == result.winner).unwrap_or(0);
    println!(
        "winner: player {} ({}) after {} half-turns{}",
        result.winner,
        a.agents[seat],
        result.half_turns,
        if result.adjudicated { " (adjudicated at turn cap)" } else { "" }
    );
    save_manifest(out, manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn tournament(cfg: &mut RunConfig, out: &Path, a: TournamentArgs) -> Result<ExitCode> {
    let search = apply_search(cfg, &a.search)?;
    if let Some(r) = a.agents {
        cfg.roster = r;
    }
    if let Some(g) = a.games {
        cfg.games = g;
    }
    if let Some(t) = a.turn_cap {
        cfg.turn_cap = t;
    }
    let m = MatchConfig { roster: cfg.roster.clone(), games: cfg.games, seed: cfg.seed, turn_cap: cfg.turn_cap, search };
    m.check()?;
    let svc = completer(&cfg.llm, &a.llm, has_llm(&m.roster))?;
    let factory = agent_factory(search, svc.map(|c| (c, cfg.llm.clone())));
    let manifest = RunManifest::new("tournament", cfg, None);
    let matrix = run_tournament(&L, &m, &factory)?;
    let csv = matrix.to_csv();
    write(&out.join("matrix.csv"), &csv)?;
    write(&out.join("matrix.json"), &serde_json::to_string_pretty(&matrix)?)?;
    print!("{csv}");
    save_manifest(out, manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn gen_spots(cfg: &RunConfig, out: &Path, a: GenSpotsArgs) -> Result<ExitCode> {
    let opts = GenerateOptions { max_attempts: a.max_attempts };
    let spots = generate_corpus(&L, a.per_category, cfg.seed, opts)?;
    let dir = out.join("spots");
    let files = write_corpus_dir(&dir, &spots)?;
    let prov = Provenance::Generated { seed: cfg.seed, per_category: a.per_category };
    let manifest = RunManifest::new("gen-spots", cfg, Some(prov));
    println!("{} spots in {} files under {}", spots.len(), files.len(), dir.display());
    save_manifest(out, manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn validate(out: &Path, a: ValidateArgs) -> Result<ExitCode> {
    let reports: Vec<(String, LoadReport)> = if a.path.is_dir() {
        parse_corpus_dir(&L, &a.path)?
    } else {
        let text = std::fs::read_to_string(&a.path).with_context(|| format!("reading {}", a.path.display()))?;
        vec![(a.path.display().to_string(), parse_spots(&L, &text)?)]
    };
    let mut bad = 0;
    let mut files = Vec::new();
    for (name, r) in &reports {
        println!("{name}: {} valid, {} rejected", r.spots.len(), r.rejected.len());
        for e in &r.rejected {
            eprintln!("{name}: {e}");
        }
        bad += r.rejected.len();
        files.push(serde_json::json!({ "file": name, "valid": r.spots.len(), "rejected": r.rejected }));
    }
    write(&out.join("validation.json"), &serde_json::to_string_pretty(&files)?)?;
    if bad > 0 {
        eprintln!("{bad} invalid entr{}", if bad == 1 { "y" } else { "ies" });
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn eval(cfg: &mut RunConfig, out: &Path, a: EvalArgs) -> Result<ExitCode> {
    let search = apply_search(cfg, &a.search)?;
    if let Some(p) = a.personas {
        cfg.personas = p;
    }
    if let Some(c) = a.corpus {
        cfg.corpus_dir = Some(c);
    }
    let (spots, prov): (Vec<SpotScenario>, Provenance) = match &cfg.corpus_dir {
        Some(dir) => {
            let c = load_corpus_dir(&L, dir, corpus_provenance(dir))?;
            if c.spots.is_empty() {
                bail!("no spots_*.json entries under {}", dir.display());
            }
            (c.spots, c.provenance)
        }
        None => (
            generate_corpus(&L, a.per_category, cfg.seed, GenerateOptions::default())?,
            Provenance::Generated { seed: cfg.seed, per_category: a.per_category },
        ),
    };
    let svc = completer(&cfg.llm, &a.llm, matches!(a.agent, AgentSpec::Llm(_)))?;
    let backend = EvalBackend { completer: svc, llm: cfg.llm.clone(), backoff: Backoff::default() };
    let path = a.records.unwrap_or_else(|| out.join("records.jsonl"));
    let mut log = RecordLog::open(&path)?;
    let resumed = log.existing.len();
    let mut manifest = RunManifest::new("eval", cfg, Some(prov));
    for s in &spots {
        manifest.spot_seeds.insert(s.id.clone(), spot_seed(cfg.seed, &s.id));
    }
    let recs = run_spot_eval(&L, &a.agent, &search, &spots, &cfg.personas, cfg.seed, &backend, &mut log)?;
    let invalid = recs.iter().filter(|r| r.is_invalid()).count();
    let transport = recs.iter().filter(|r| r.transport_error.is_some()).count();
    println!(
        "{}: {} records ({} resumed) over {} spots x {} personas; {invalid} invalid, {transport} transport errors -> {}",
        a.agent,
        recs.len(),
        resumed,
        spots.len(),
        cfg.personas.len(),
        path.display()
    );
    save_manifest(out, manifest)?;
    Ok(ExitCode::SUCCESS)
}

/// A directory written by `gen-spots` keeps its generator provenance; anything
/// else counts as an official corpus.
fn corpus_provenance(dir: &Path) -> Provenance {
    let manifest = dir.parent().unwrap_or(Path::new(".")).join("manifest-gen-spots.json");
    std::fs::read_to_string(manifest)
        .ok()
        .and_then(|t| serde_json::from_str::<RunManifest>(&t).ok())
        .and_then(|m| m.corpus)
        .filter(|p| matches!(p, Provenance::Generated { .. }))
        .unwrap_or_else(|| Provenance::Official { path: dir.display().to_string() })
}

fn report(out: &Path, a: ReportArgs) -> Result<ExitCode> {
    let paths = if a.records.is_empty() { vec![out.join("records.jsonl")] } else { a.records };
    let mut records = Vec::new();
    for p in &paths {
        records.extend(read_records(p)?);
    }
    let manifest_path = a.manifest.or_else(|| {
        let p = paths[0].parent().unwrap_or(Path::new(".")).join("manifest-eval.json");
        p.exists().then_some(p)
    });
    let (prov, seed) = match manifest_path {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let m: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            (m.corpus, Some(m.seed))
        }
        None => (None, None),
    };
    let rep = build_report(&records, Some(&a.reference), prov, seed)?;
    let csv = emit_csv(&rep);
    write(&out.join("report.csv"), &csv)?;
    write(&out.join("report.json"), &emit_json(&rep))?;
    println!("{} records -> {} rows in {}", records.len(), csv.lines().count() - 1, out.join("report.csv").display());
    Ok(ExitCode::SUCCESS)
}
