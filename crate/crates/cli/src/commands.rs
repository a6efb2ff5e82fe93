use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use netrca_core::diagnosis::PromptMode;
use netrca_core::evaluation::{run_eval_suite, EvalCase, TrigramTokenEmbedder};
use netrca_core::faultlab::{generate_scenario, FaultlabError, ScenarioKind, ScenarioSpec};
use netrca_core::pipeline::{corpus_record, AppConfig, BackendConfig, Pipeline, StubKind};
use netrca_core::retrieval::VectorIndex;
use netrca_core::statrca::analyze;
use netrca_core::topology::{
    load_snapshot, load_truth, truth_path_for, validate_store, write_entry,
};

use crate::{
    AnalyzeArgs, BackendArg, Cli, CliError, Command, CorpusAddArgs, DiagnoseArgs, EvalArgs,
    ModeArg, PipelineFlags, SimulateArgs, StubArg,
};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze_cmd(a, config),
        Command::Diagnose(a) => diagnose_cmd(a, config),
        Command::CorpusAdd(a) => corpus_add(a, config),
        Command::Eval(a) => eval_cmd(a, config),
        Command::Serve(a) => {
            let cfg = apply_flags(config, &a.flags)?;
            let bind = a.bind.clone().unwrap_or_else(|| cfg.bind.clone());
            cfg.check_paths(false)?;
            let pipeline = Pipeline::from_config(&cfg)?;
            crate::serve::serve(pipeline, &bind)?;
            Ok(())
        }
    }
}

/// Prints to stdout; a closed pipe (e.g. `| head`) ends the process quietly.
pub(crate) fn out(text: std::fmt::Arguments) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_fmt(text).and_then(|_| stdout.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing output: {e}");
        std::process::exit(1);
    }
}

impl From<ModeArg> for PromptMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FewShot => PromptMode::FewShot,
            ModeArg::ZeroShot => PromptMode::ZeroShot,
        }
    }
}

fn write_json(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let kinds: Vec<ScenarioKind> = if a.scenario.eq_ignore_ascii_case("all") {
        ScenarioKind::ALL.to_vec()
    } else {
        match a.scenario.parse::<ScenarioKind>() {
            Ok(k) => vec![k],
            Err(e @ FaultlabError::UnknownScenario { .. }) => {
                return Err(CliError::Usage(e.to_string()))
            }
            Err(e) => return Err(e.into()),
        }
    };
    for kind in kinds {
        let generated = generate_scenario(&ScenarioSpec::default_for(kind, a.seed))?;
        for path in write_entry(
            &a.out,
            kind.slug(),
            &generated.snapshot,
            Some(&generated.truth),
        )? {
            out(format_args!("{}\n", path.display()));
        }
    }
    Ok(())
}

fn analyze_cmd(a: AnalyzeArgs, config: AppConfig) -> Result<(), CliError> {
    let snapshot = load_snapshot(&a.snapshot)?;
    let mut stat = config.stat;
    if let Some(k) = a.k {
        stat = stat.with_k(k);
    }
    stat.validate()?;
    let analysis = analyze(&snapshot, &stat)?;
    eprintln!("{}", analysis.status_message());
    for note in &analysis.graph.notes {
        eprintln!("note: {note}");
    }
    out(format_args!("{}\n", analysis.report.to_json()));
    Ok(())
}

fn stub_kind(s: StubArg) -> StubKind {
    match s {
        StubArg::Template => StubKind::Template,
        StubArg::Echo => StubKind::Echo,
        StubArg::Fixed => StubKind::Fixed,
        StubArg::Failing => StubKind::Failing,
    }
}

fn simple_backend(kind: BackendArg, flags: &PipelineFlags) -> Result<BackendConfig, CliError> {
    Ok(match kind {
        BackendArg::Stub => BackendConfig::Stub {
            mode: flags.stub_mode.map(stub_kind).unwrap_or_default(),
            text: flags.stub_text.clone(),
        },
        BackendArg::Http => BackendConfig::Http {
            url: flags.llm_url.clone(),
        },
        BackendArg::Replay | BackendArg::Record => {
            return Err(CliError::Usage(
                "--record-inner must be stub or http".into(),
            ))
        }
    })
}

/// Overlays command-line flags on the file configuration.
fn apply_flags(mut cfg: AppConfig, flags: &PipelineFlags) -> Result<AppConfig, CliError> {
    if let Some(kind) = flags.backend {
        cfg.backend = match kind {
            BackendArg::Stub | BackendArg::Http => simple_backend(kind, flags)?,
            BackendArg::Replay | BackendArg::Record => {
                let cassette = flags.cassette.clone().ok_or_else(|| {
                    CliError::Usage("--cassette is required for replay and record".into())
                })?;
                let record = matches!(kind, BackendArg::Record);
                BackendConfig::Replay {
                    cassette,
                    record,
                    inner: if record {
                        Some(Box::new(simple_backend(flags.record_inner, flags)?))
                    } else {
                        None
                    },
                }
            }
        };
    } else if flags.stub_mode.is_some() || flags.stub_text.is_some() {
        cfg.backend = simple_backend(BackendArg::Stub, flags)?;
    }
    if let Some(c) = &flags.corpus {
        cfg.corpus = Some(c.clone());
    }
    if let Some(m) = flags.agents {
        cfg.ensemble.num_agents = m;
    }
    if flags.no_aggregator {
        cfg.ensemble.aggregator = false;
    }
    if let Some(n) = flags.exemplars {
        cfg.retrieval_count = n;
    }
    if let Some(k) = flags.k {
        cfg.stat = cfg.stat.with_k(k);
    }
    if let Some(dk) = &flags.domain_knowledge {
        cfg.domain_knowledge = dk.clone();
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn diagnose_cmd(a: DiagnoseArgs, config: AppConfig) -> Result<(), CliError> {
    let mode = PromptMode::from(a.mode);
    let cfg = apply_flags(config, &a.flags)?;
    cfg.check_paths(mode == PromptMode::FewShot)?;
    let snapshot = load_snapshot(&a.snapshot)?;
    let pipeline = Pipeline::from_config(&cfg)?;
    let mut result = pipeline.run(&snapshot, mode)?;
    if a.stable_output {
        result = result.without_timings();
    }
    let json = result.to_json();
    out(format_args!("{json}\n"));
    if let Some(out) = &a.out {
        write_json(out, &format!("{json}\n"))?;
    }
    if result.partial {
        return Err(CliError::Domain(anyhow!(
            "model backend failed, only the health report is available: {}",
            result.error.as_deref().unwrap_or("unknown error")
        )));
    }
    Ok(())
}

fn corpus_add(a: CorpusAddArgs, config: AppConfig) -> Result<(), CliError> {
    let provider = config.provider.build()?;
    let mut index = if a.corpus.exists() {
        VectorIndex::load(&a.corpus)?
    } else {
        VectorIndex::new(provider.as_ref())
    };
    let paths: Vec<PathBuf> = match &a.store {
        Some(dir) => {
            let listing = validate_store(dir)?;
            for r in &listing.rejected {
                eprintln!("skipped {}: {}", r.path.display(), r.reason);
            }
            listing
                .entries
                .into_iter()
                .filter(|e| e.has_truth)
                .map(|e| e.path)
                .collect()
        }
        None => a.snapshots.clone(),
    };
    if paths.is_empty() {
        return Err(CliError::Domain(anyhow!(
            "no snapshots with ground truth to add"
        )));
    }
    for path in paths {
        let snapshot = load_snapshot(&path)?;
        let truth_path = truth_path_for(&path);
        let truth = load_truth(&truth_path)
            .with_context(|| format!("ground truth for {}", path.display()))?;
        let record = corpus_record(&snapshot, &truth, &config.stat)?;
        let id = index.add(record, provider.as_ref())?;
        out(format_args!("{id}\t{}\n", path.display()));
    }
    index.save(&a.corpus)?;
    eprintln!(
        "corpus {} now holds {} records",
        a.corpus.display(),
        index.len()
    );
    Ok(())
}

fn eval_cmd(a: EvalArgs, config: AppConfig) -> Result<(), CliError> {
    let raw = fs::read(&a.cases).with_context(|| format!("reading {}", a.cases.display()))?;
    let cases: Vec<EvalCase> = serde_json::from_slice(&raw)
        .with_context(|| format!("parsing cases in {}", a.cases.display()))?;
    if cases.is_empty() {
        return Err(CliError::Domain(anyhow!(
            "{} holds no cases",
            a.cases.display()
        )));
    }
    let provider = config.provider.build()?;
    let dimension = provider.dimension();
    let suite = run_eval_suite(
        &cases,
        a.mode.into(),
        &TrigramTokenEmbedder { dimension },
        provider.as_ref(),
    )?;
    let table = suite.table();
    out(format_args!("{table}"));
    if let Some(path) = &a.table {
        write_json(path, &table)?;
    }
    let json = serde_json::to_string_pretty(&suite)?;
    match &a.json {
        Some(path) => write_json(path, &format!("{json}\n"))?,
        None => out(format_args!("\n{json}\n")),
    }
    for row in suite.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "case {} ({}) failed: {}",
            row.sno,
            row.usecase,
            row.error.as_deref().unwrap_or("")
        );
    }
    Ok(())
}
