//! Campaign orchestration and the on-disk artifacts: `histories.jsonl`,
//! `manifest.json`, the optional replies sidecar, and the analysis exports.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};

use agentgame_gateway::{load_profiles, ChatBackend, Gateway, ProfileError};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentFactory, ConfigAgentFactory, FactoryError, LlmChoice};
use crate::analytics::{
    aggregate_final_scores, build_scorecard, metrics_by_model, scorecard_json, trajectories_by_variant,
    write_aggregates_csv, write_radar_csv, write_trajectories_csv, AnalyticsError, Encoding, GroupBy, Scorecard,
};
use crate::config::{
    enumerate_game_setups, expand_agent_permutations, parse_config, validate_config, ConfigError, EnumerateError,
    GameConfig, GameSetup, Variant,
};
use crate::engine::{instantiate_game, run_game, EngineError, GameHistory, GameInstance, Termination};
use crate::seed::digest_hex;
use crate::template::{read_template_dir, validate_templates, TemplateError, TemplateSet};
use crate::validation::ValidationReport;

pub const HISTORIES_FILE: &str = "histories.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPLIES_FILE: &str = "replies.jsonl";
pub const AGGREGATES_FILE: &str = "aggregates.csv";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const RADAR_FILE: &str = "radar.csv";

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("config {path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error("template: {0}")]
    Template(#[from] TemplateError),
    #[error("{} validation finding(s)", .0.findings.len())]
    Invalid(ValidationReport),
    #[error("profiles {path}: {source}")]
    Profiles { path: PathBuf, source: ProfileError },
    #[error("config selects model profile `{0}` but no --profiles file was given")]
    NoProfiles(String),
    #[error(transparent)]
    Factory(#[from] FactoryError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error("{path} line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0} already exists; pass --resume to continue it")]
    OutputExists(PathBuf),
    #[error("no histories")]
    NoHistories,
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CampaignError + '_ {
    move |source| CampaignError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_text(path: &Path) -> Result<String, CampaignError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// A parsed config with its templates and the raw texts they came from.
#[derive(Clone, Debug)]
pub struct LoadedInputs {
    pub config: GameConfig,
    pub config_text: String,
    pub template_sources: IndexMap<String, String>,
    pub templates: TemplateSet,
}

/// Reads and parses a config and its per-language templates, and returns
/// the inputs together with every validation finding.
pub fn load_inputs(
    config_path: &Path,
    templates_dir: &Path,
) -> Result<(LoadedInputs, ValidationReport), CampaignError> {
    let config_text = read_text(config_path)?;
    let config = parse_config(&config_text).map_err(|source| CampaignError::Config {
        path: config_path.to_path_buf(),
        source,
    })?;
    let template_sources = read_template_dir(templates_dir, &config).map_err(io_err(templates_dir))?;
    let templates = TemplateSet::parse_all(&template_sources)?;
    let mut report = validate_config(&config);
    report.extend(validate_templates(&templates, &config));
    Ok((
        LoadedInputs {
            config,
            config_text,
            template_sources,
            templates,
        },
        report,
    ))
}

/// Settings for one campaign run.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub config: PathBuf,
    pub templates_dir: PathBuf,
    pub profiles: Option<PathBuf>,
    /// Empty means the config's own matrix.
    pub variants: Vec<Variant>,
    pub repetitions: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub concurrency: usize,
    pub mock_endpoint: Option<String>,
    pub resume: bool,
    pub dedupe_mixed_personalities: bool,
    pub save_replies: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounts {
    pub games: usize,
    pub decisions: usize,
    pub failures: usize,
}

/// Written next to `histories.jsonl` when a run finishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub template_digests: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles_digest: Option<String>,
    pub variants: Vec<Variant>,
    pub repetitions: u32,
    pub seed: u64,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    /// Setups this run played; earlier runs' games are not included.
    pub executed: usize,
    /// Recomputed from the histories file.
    pub counts: RunCounts,
}

impl RunManifest {
    pub fn has_failures(&self) -> bool {
        self.counts.failures > 0
    }
}

/// One line of the replies sidecar: raw replies per round, per agent,
/// per attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplyLine {
    pub key: String,
    pub replies: Vec<Vec<Vec<String>>>,
}

/// Builds the agent factory the config asks for. Profile-backed agents
/// need a profiles file; scripted ones need nothing.
pub fn build_factory(
    config: &GameConfig,
    profiles: Option<&Path>,
    mock_endpoint: Option<&str>,
    max_in_flight: usize,
) -> Result<(ConfigAgentFactory, Option<String>), CampaignError> {
    let choice = LlmChoice::parse(&config.llm)?;
    let (client, digest) = match (&choice, profiles) {
        (LlmChoice::Scripted(_), None) => (None, None),
        (LlmChoice::Profile(id), None) => return Err(CampaignError::NoProfiles(id.clone())),
        (_, Some(path)) => {
            let text = read_text(path)?;
            let list = load_profiles(&text).map_err(|source| CampaignError::Profiles {
                path: path.to_path_buf(),
                source,
            })?;
            let mut builder = Gateway::builder(list).max_in_flight(max_in_flight);
            if let Some(url) = mock_endpoint {
                builder = builder.mock_endpoint(url);
            }
            let client: Arc<dyn ChatBackend> = Arc::new(builder.build());
            (Some(client), Some(digest_hex(text.as_bytes())))
        }
    };
    Ok((ConfigAgentFactory::new(&config.llm, client)?, digest))
}

/// Runs a campaign from files on disk.
pub fn run_campaign(opts: &RunOptions) -> Result<RunManifest, CampaignError> {
    let started_at = now();
    let (inputs, report) = load_inputs(&opts.config, &opts.templates_dir)?;
    if !report.is_clean() {
        return Err(CampaignError::Invalid(report));
    }
    let (factory, profiles_digest) = build_factory(
        &inputs.config,
        opts.profiles.as_deref(),
        opts.mock_endpoint.as_deref(),
        opts.concurrency,
    )?;
    let variants = if opts.variants.is_empty() {
        vec![Variant::new(inputs.config.variant_id.clone())]
    } else {
        opts.variants.clone()
    };
    let assignments = expand_agent_permutations(&inputs.config, opts.dedupe_mixed_personalities);
    let setups = enumerate_game_setups(&inputs.config, &assignments, &variants, opts.repetitions)?;

    let executed = run_setups(
        &inputs.config,
        &inputs.templates,
        &setups,
        &factory,
        opts.seed,
        &opts.out,
        RunFlags {
            concurrency: opts.concurrency,
            resume: opts.resume,
            save_replies: opts.save_replies,
        },
    )?;

    let manifest = RunManifest {
        config_digest: digest_hex(inputs.config_text.as_bytes()),
        template_digests: inputs
            .template_sources
            .iter()
            .map(|(lang, text)| (lang.clone(), digest_hex(text.as_bytes())))
            .collect(),
        profiles_digest,
        variants,
        repetitions: opts.repetitions,
        seed: opts.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: now(),
        executed,
        counts: count_histories(&opts.out.join(HISTORIES_FILE))?,
    };
    let path = opts.out.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    Ok(manifest)
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[derive(Clone, Copy, Debug)]
pub struct RunFlags {
    pub concurrency: usize,
    pub resume: bool,
    pub save_replies: bool,
}

/// Plays every setup not yet in `out/histories.jsonl` and appends the
/// results in setup order. Every game is instantiated before the first
/// one starts, so setup errors leave the output untouched. Returns the
/// number of games played.
pub fn run_setups(
    config: &GameConfig,
    templates: &TemplateSet,
    setups: &[GameSetup],
    factory: &dyn AgentFactory,
    seed: u64,
    out: &Path,
    flags: RunFlags,
) -> Result<usize, CampaignError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let hist_path = out.join(HISTORIES_FILE);
    let replies_path = out.join(REPLIES_FILE);

    let done = if flags.resume {
        let done = recover_keys(&hist_path)?;
        if flags.save_replies {
            recover_keys(&replies_path)?;
        }
        done
    } else {
        for p in [&hist_path, &replies_path] {
            if fs::metadata(p).map(|m| m.len() > 0).unwrap_or(false) {
                return Err(CampaignError::OutputExists(p.clone()));
            }
        }
        HashSet::new()
    };

    let games = setups
        .iter()
        .filter(|s| !done.contains(&s.key()))
        .map(|s| instantiate_game(config, templates, s, factory, seed))
        .collect::<Result<Vec<_>, _>>()?;
    if games.len() < setups.len() {
        log::info!(
            "resuming: {} of {} setups already persisted",
            setups.len() - games.len(),
            setups.len()
        );
    }

    let mut sink = Sink::open(&hist_path, flags.save_replies.then_some(replies_path.as_path()))?;
    let played = games.len();
    play_all(games, flags.concurrency, |h| sink.write(&h))?;
    Ok(played)
}

/// Runs games on up to `concurrency` threads and hands the histories to
/// `emit` in input order.
fn play_all<E>(
    games: Vec<GameInstance>,
    concurrency: usize,
    mut emit: impl FnMut(GameHistory) -> Result<(), E>,
) -> Result<(), E> {
    let total = games.len();
    let slots: Vec<std::sync::Mutex<Option<GameInstance>>> =
        games.into_iter().map(|g| std::sync::Mutex::new(Some(g))).collect();
    let next = AtomicUsize::new(0);
    let workers = concurrency.clamp(1, total.max(1));
    let (tx, rx) = mpsc::channel::<(usize, GameHistory)>();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (slots, next) = (&slots, &next);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(slot) = slots.get(i) else { break };
                let game = slot
                    .lock()
                    .unwrap_or_else(|e| e.into_inner())
                    .take()
                    .expect("each game is taken once");
                if tx.send((i, run_game(game))).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        let mut expected = 0;
        for (i, h) in rx {
            pending.insert(i, h);
            while let Some(h) = pending.remove(&expected) {
                if let Err(e) = emit(h) {
                    // stop handing out work; running games finish and are dropped
                    next.store(total, Ordering::SeqCst);
                    return Err(e);
                }
                expected += 1;
            }
        }
        Ok(())
    })
}

/// Appends one line per game, flushed before the next.
struct Sink {
    histories: (PathBuf, File),
    replies: Option<(PathBuf, File)>,
}

impl Sink {
    fn open(histories: &Path, replies: Option<&Path>) -> Result<Self, CampaignError> {
        let open = |p: &Path| {
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(io_err(p))?;
            Ok::<_, CampaignError>((p.to_path_buf(), f))
        };
        Ok(Sink {
            histories: open(histories)?,
            replies: replies.map(open).transpose()?,
        })
    }

    fn write(&mut self, h: &GameHistory) -> Result<(), CampaignError> {
        // the sidecar goes first so a persisted history always has its replies
        if let Some((path, f)) = &mut self.replies {
            let line = ReplyLine {
                key: h.key.clone(),
                replies: h.records.iter().map(|r| r.replies.clone()).collect(),
            };
            write_line(f, &serde_json::to_string(&line).expect("replies serialize")).map_err(io_err(path))?;
        }
        let (path, f) = &mut self.histories;
        write_line(f, &serde_json::to_string(h).expect("history serializes")).map_err(io_err(path))
    }
}

fn write_line(f: &mut File, json: &str) -> io::Result<()> {
    let mut buf = Vec::with_capacity(json.len() + 1);
    buf.extend_from_slice(json.as_bytes());
    buf.push(b'\n');
    f.write_all(&buf)?;
    f.flush()
}

#[derive(Deserialize)]
struct KeyOnly {
    key: String,
}

/// Drops an unterminated final line, then returns the keys of the
/// complete lines. A missing file has no keys.
pub fn recover_keys(path: &Path) -> Result<HashSet<String>, CampaignError> {
    let mut file = match OpenOptions::new().read(true).write(true).open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(HashSet::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(io_err(path))?;
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if keep < bytes.len() {
        log::warn!(
            "{}: discarding partial final line ({} bytes)",
            path.display(),
            bytes.len() - keep
        );
        file.set_len(keep as u64).map_err(io_err(path))?;
        file.seek(SeekFrom::End(0)).map_err(io_err(path))?;
    }
    let mut keys = HashSet::new();
    for (i, line) in bytes[..keep].split(|&b| b == b'\n').enumerate() {
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let k: KeyOnly = serde_json::from_slice(line).map_err(|e| CampaignError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        keys.insert(k.key);
    }
    Ok(keys)
}

/// Parses every line of a histories file.
pub fn read_histories(path: &Path) -> Result<Vec<GameHistory>, CampaignError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let h = serde_json::from_str(&line).map_err(|e| CampaignError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(h);
    }
    Ok(out)
}

pub fn count_histories(path: &Path) -> Result<RunCounts, CampaignError> {
    let mut c = RunCounts::default();
    for h in read_histories(path)? {
        c.games += 1;
        c.decisions += h.records.iter().map(|r| r.strategies.len()).sum::<usize>();
        c.failures += usize::from(h.termination == Termination::AgentFailure);
    }
    Ok(c)
}

/// Writes `aggregates.csv` and `trajectories.csv` into `out`.
pub fn analyze(histories: &[GameHistory], by: &[GroupBy], encoding: Encoding, out: &Path) -> Result<(), CampaignError> {
    if histories.is_empty() {
        return Err(CampaignError::NoHistories);
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let cells = aggregate_final_scores::<f64>(histories, by)?;
    let series = trajectories_by_variant::<f64>(histories, encoding)?;
    let create = |name: &str| {
        let p = out.join(name);
        File::create(&p).map_err(io_err(&p))
    };
    write_aggregates_csv(create(AGGREGATES_FILE)?, by, &cells)?;
    write_trajectories_csv(create(TRAJECTORIES_FILE)?, &series)?;
    Ok(())
}

/// Scorecard over every model found in the given histories files.
pub fn score(paths: &[PathBuf]) -> Result<Scorecard<f64>, CampaignError> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_histories(p)?);
    }
    if all.is_empty() {
        return Err(CampaignError::NoHistories);
    }
    Ok(build_scorecard(&metrics_by_model::<f64>(&all)?)?)
}

/// Writes the scorecard JSON to `path` and `radar.csv` beside it.
pub fn write_scorecard(card: &Scorecard<f64>, path: &Path) -> Result<(), CampaignError> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    fs::write(path, scorecard_json(card) + "\n").map_err(io_err(path))?;
    let radar = dir.join(RADAR_FILE);
    write_radar_csv(File::create(&radar).map_err(io_err(&radar))?, card)?;
    Ok(())
}
