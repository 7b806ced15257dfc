use std::path::PathBuf;
use std::process::ExitCode;

use agentgame::analytics::{Encoding, GroupBy};
use agentgame::campaign::{self, CampaignError, RunOptions};
use agentgame::config::Variant;
use agentgame::validation::ValidationReport;
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_FINDINGS: u8 = 1;
const EXIT_FATAL: u8 = 2;
const EXIT_AGENT_FAILURES: u8 = 3;

#[derive(Parser)]
#[command(
    name = "agentgame",
    version,
    about = "Run repeated two-player games between scripted or LLM agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and its templates; exits 1 if anything is wrong.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        templates_dir: PathBuf,
    },
    /// Play every enumerated game and append them to histories.jsonl.
    Run(RunArgs),
    /// Aggregate final scores and per-round trajectories.
    Analyze {
        #[arg(long)]
        histories: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated grouping columns.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "model,language,personalities,rounds_known,variant"
        )]
        group_by: Vec<String>,
        #[arg(long, value_enum, default_value_t = EncodingArg::Action)]
        encoding: EncodingArg,
    },
    /// Compute the normalized metric scorecard across models.
    Score {
        /// One histories file per model.
        #[arg(required = true)]
        histories: Vec<PathBuf>,
        #[arg(long, default_value = "scorecard.json")]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    templates_dir: PathBuf,
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Comma-separated `<matrix>[:known|:unknown]`; defaults to the config's own matrix.
    #[arg(long, value_delimiter = ',')]
    variants: Vec<Variant>,
    #[arg(long, default_value_t = 1)]
    repetitions: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    concurrency: usize,
    /// Send every model request to this local server instead.
    #[arg(long)]
    mock_endpoint: Option<String>,
    #[arg(long)]
    resume: bool,
    /// Play a mixed personality pair once instead of in both seat orders.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value = "false", action = clap::ArgAction::Set)]
    dedupe_mixed_personalities: bool,
    /// Keep raw model replies in replies.jsonl.
    #[arg(long)]
    save_replies: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Action,
    Coordination,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config, templates_dir } => validate(&config, &templates_dir),
        Command::Run(args) => run(args),
        Command::Analyze {
            histories,
            out,
            group_by,
            encoding,
        } => analyze(histories, out, &group_by, encoding),
        Command::Score { histories, out } => score(&histories, &out),
    }
}

fn print_findings(report: &ValidationReport) {
    for f in &report.findings {
        println!("{f}");
    }
    println!("{} findings", report.findings.len());
}

fn fatal(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_FATAL)
}

fn validate(config: &std::path::Path, templates_dir: &std::path::Path) -> ExitCode {
    match campaign::load_inputs(config, templates_dir) {
        Ok((_, report)) => {
            print_findings(&report);
            if report.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FINDINGS)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FINDINGS)
        }
    }
}

fn run(args: RunArgs) -> ExitCode {
    let opts = RunOptions {
        config: args.config,
        templates_dir: args.templates_dir,
        profiles: args.profiles,
        variants: args.variants,
        repetitions: args.repetitions,
        seed: args.seed,
        out: args.out,
        concurrency: args.concurrency,
        mock_endpoint: args.mock_endpoint,
        resume: args.resume,
        dedupe_mixed_personalities: args.dedupe_mixed_personalities,
        save_replies: args.save_replies,
    };
    match campaign::run_campaign(&opts) {
        Ok(m) => {
            println!(
                "{} games played; {} in {} ({} decisions, {} agent failures)",
                m.executed,
                m.counts.games,
                opts.out.join(campaign::HISTORIES_FILE).display(),
                m.counts.decisions,
                m.counts.failures
            );
            if m.has_failures() {
                ExitCode::from(EXIT_AGENT_FAILURES)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(CampaignError::Invalid(report)) => {
            print_findings(&report);
            ExitCode::from(EXIT_FINDINGS)
        }
        Err(e) => fatal(e),
    }
}

fn analyze(histories: PathBuf, out: PathBuf, group_by: &[String], encoding: EncodingArg) -> ExitCode {
    let mut by = Vec::new();
    for name in group_by {
        match GroupBy::from_column(name.trim()) {
            Some(g) => by.push(g),
            None => return fatal(format!("unknown grouping column `{name}`")),
        }
    }
    let encoding = match encoding {
        EncodingArg::Action => Encoding::Action,
        EncodingArg::Coordination => Encoding::Coordination,
    };
    let result = campaign::read_histories(&histories).and_then(|hs| campaign::analyze(&hs, &by, encoding, &out));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fatal(e),
    }
}

fn score(histories: &[PathBuf], out: &std::path::Path) -> ExitCode {
    match campaign::score(histories).and_then(|card| campaign::write_scorecard(&card, out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fatal(e),
    }
}
