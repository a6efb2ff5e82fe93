mod commands;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Root cause analysis for layered network telemetry.
#[derive(Parser, Debug)]
#[command(name = "netrca", version, about)]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a fault scenario snapshot and its ground truth.
    Simulate(SimulateArgs),
    /// Rank root-cause candidates for a snapshot.
    Analyze(AnalyzeArgs),
    /// Run the full diagnosis pipeline on a snapshot.
    Diagnose(DiagnoseArgs),
    /// Add snapshots with ground truth to an incident corpus.
    CorpusAdd(CorpusAddArgs),
    /// Score predicted diagnoses against gold text.
    Eval(EvalArgs),
    /// Serve the diagnosis pipeline over HTTP.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Scenario slug or name; `all` writes every scenario.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Store root; files go to `<out>/<topology_id>/<scenario>.json`.
    #[arg(long, default_value = "store")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    snapshot: PathBuf,
    /// Number of ranked causes to report.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    FewShot,
    ZeroShot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Stub,
    Http,
    Replay,
    Record,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StubArg {
    Template,
    Echo,
    Fixed,
    Failing,
}

#[derive(Args, Debug)]
struct PipelineFlags {
    /// Model backend; defaults to the configured one (template stub).
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Response style of the stub backend.
    #[arg(long, value_enum)]
    stub_mode: Option<StubArg>,
    /// Response text for `--stub-mode fixed`, message for `failing`.
    #[arg(long)]
    stub_text: Option<String>,
    /// Cassette file for the replay and record backends.
    #[arg(long)]
    cassette: Option<PathBuf>,
    /// Backend consulted by `--backend record` for unseen prompts.
    #[arg(long, value_enum, default_value = "stub")]
    record_inner: BackendArg,
    /// Completion endpoint for `--backend http` (else RCA_LLM_URL).
    #[arg(long)]
    llm_url: Option<String>,
    /// Incident corpus used in few-shot mode.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Number of draft agents.
    #[arg(long)]
    agents: Option<usize>,
    /// Disable the aggregator call.
    #[arg(long)]
    no_aggregator: bool,
    /// Number of exemplars to retrieve.
    #[arg(long)]
    exemplars: Option<usize>,
    /// Number of ranked causes in the health report.
    #[arg(long)]
    k: Option<usize>,
    /// Operator notes injected into the prompt.
    #[arg(long)]
    domain_knowledge: Option<String>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    snapshot: PathBuf,
    #[arg(long, value_enum, default_value = "few-shot")]
    mode: ModeArg,
    #[command(flatten)]
    flags: PipelineFlags,
    /// Zero all stage timings so repeated runs print identical JSON.
    #[arg(long)]
    stable_output: bool,
    /// Also write the result JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CorpusAddArgs {
    /// Corpus file; created if missing.
    #[arg(long)]
    corpus: PathBuf,
    /// Snapshot files; each needs a sibling `.truth.json`.
    #[arg(required_unless_present = "store")]
    snapshots: Vec<PathBuf>,
    /// Add every store entry that has ground truth.
    #[arg(long, conflicts_with = "snapshots")]
    store: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// JSON list of {"usecase","predicted","gold"}.
    cases: PathBuf,
    #[arg(long, value_enum, default_value = "few-shot")]
    mode: ModeArg,
    /// Write the per-case results as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the rendered table.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// Address to listen on; port 0 picks a free port.
    #[arg(long)]
    bind: Option<String>,
    #[command(flatten)]
    flags: PipelineFlags,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Domain(e.into())
    }
}

/// Joins the cause chain, skipping causes a message already embeds.
fn render_chain(e: &anyhow::Error) -> String {
    let mut text = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !text.contains(&c) {
            text.push_str(": ");
            text.push_str(&c);
        }
    }
    text
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve(_)) {
        "info"
    } else {
        "warn"
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level)),
        )
        .with_writer(std::io::stderr)
        .init();

    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {}", render_chain(&e));
            ExitCode::from(1)
        }
    }
}
