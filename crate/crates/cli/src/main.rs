//! `mathpvs`: drive the workbench pipeline and its tools from the shell.
//!
//! Exit codes: 0 success, 1 stage or tool failure, 2 usage error,
//! 3 stopped at a human gate.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mathpvs_core::canonical::to_canonical_line;
use mathpvs_core::ingest::DocFormat;
use mathpvs_core::pipeline::{self, Pipeline, PipelineConfig};
use mathpvs_core::prover::BackendKind;
use mathpvs_core::pvs::{analyze, parse_theory, print_theory, PreludeIndex};
use mathpvs_core::repair::repair_to_fixpoint;
use mathpvs_core::store::{Decision, ProjectStore, Stage, StageRun, StageStatus, StoredGraph};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mathpvs", version, about = "Autoformalization workbench for PVS")]
struct Cli {
    /// Project directory.
    #[arg(long, global = true, default_value = ".")]
    project: PathBuf,
    /// JSON configuration file; overrides the configuration stored in the project.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print canonical JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Latex,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum Verdict {
    Approve,
    Reject,
}

#[derive(Subcommand)]
enum Command {
    /// Create a project.
    Init {
        dir: PathBuf,
        /// Load the bundled worked example and its settings.
        #[arg(long)]
        fixture: bool,
        /// Project id; defaults to the directory name.
        #[arg(long)]
        id: Option<String>,
    },
    /// Add a LaTeX or OCR-markdown document.
    Ingest {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    Extract,
    Graph {
        /// Write the graph as DOT, or JSON when the name ends in `.json`.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    Summarize,
    Abstract,
    Formalize,
    Repair {
        /// Print the planned edits without storing anything.
        #[arg(long)]
        dry_run: bool,
    },
    Merge {
        #[arg(long)]
        name: Option<String>,
    },
    Check {
        #[arg(long)]
        backend: Option<BackendKind>,
    },
    Prove {
        /// Formula to prove; defaults to every THEOREM.
        formula: Option<String>,
        #[arg(long)]
        tactic: Option<String>,
        #[arg(long)]
        backend: Option<BackendKind>,
    },
    /// Run stages in order until a gate or `--stop-at`.
    Run {
        #[arg(long)]
        stop_at: Option<Stage>,
    },
    /// Per-statement status matrix.
    Report,
    /// Record a verdict at a human gate.
    Verdict {
        stage: Stage,
        #[arg(value_enum)]
        decision: Verdict,
        #[arg(long)]
        note: String,
    },
    /// Store an edited theory as a child of `version`.
    Edit {
        version: String,
        file: PathBuf,
        #[arg(long)]
        note: String,
    },
    /// Versions from the root to `version`.
    Lineage { version: String },
    /// Serve the review API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Further project roots to serve.
        #[arg(long = "root")]
        roots: Vec<PathBuf>,
        /// Built review UI to serve at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Allowed CORS origin; repeatable. Any origin when absent.
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
    },
    /// Parse and lint a PVS file.
    Lint { file: PathBuf },
    /// Print a PVS file in canonical layout.
    Fmt {
        file: PathBuf,
        /// Rewrite the file in place.
        #[arg(long)]
        write: bool,
    },
}

struct Ctx {
    project: PathBuf,
    config: Option<PathBuf>,
    json: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let ctx = Ctx { project: cli.project, config: cli.config, json: cli.json };
    match dispatch(&ctx, cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if ctx.json {
                print!("{}", to_canonical_line(&serde_json::json!({"error": format!("{e:#}")})));
            }
            ExitCode::from(1)
        }
    }
}

impl Ctx {
    fn emit<T: Serialize>(&self, value: &T, human: impl FnOnce() -> String) {
        if self.json {
            print!("{}", to_canonical_line(value));
        } else {
            let text = human();
            if !text.is_empty() {
                println!("{}", text.trim_end());
            }
        }
    }

    /// Configuration from `--config`, else the one stored in the project.
    fn pipeline_config(&self, store: Option<&ProjectStore>) -> Result<PipelineConfig> {
        if let Some(path) = &self.config {
            return Ok(PipelineConfig::load(path)?);
        }
        match store {
            Some(s) => Ok(PipelineConfig::from_value(&s.project()?.config)?),
            None => Ok(PipelineConfig::default()),
        }
    }

    fn pipeline(&self, tweak: impl FnOnce(&mut PipelineConfig)) -> Result<Pipeline> {
        let store = ProjectStore::open_writer(&self.project)
            .with_context(|| format!("opening project {}", self.project.display()))?;
        let mut config = self.pipeline_config(Some(&store))?;
        tweak(&mut config);
        Ok(Pipeline::new(store, config)?)
    }

    fn reader(&self) -> Result<ProjectStore> {
        ProjectStore::open(&self.project).with_context(|| format!("opening project {}", self.project.display()))
    }
}

fn exit_for(status: StageStatus) -> u8 {
    match status {
        StageStatus::Ok => 0,
        StageStatus::Failed => 1,
        StageStatus::NeedsHuman => 3,
    }
}

fn describe(run: &StageRun) -> String {
    let status = match run.status {
        StageStatus::Ok => "ok",
        StageStatus::Failed => "failed",
        StageStatus::NeedsHuman => "needs human review",
    };
    let mut out = format!("{}: {status} ({}) -> {} output(s)\n", run.stage, run.run_id, run.outputs.len());
    for n in &run.notes {
        out.push_str(&format!("  {n}\n"));
    }
    out
}

fn stage(ctx: &Ctx, stage: Stage, tweak: impl FnOnce(&mut PipelineConfig)) -> Result<u8> {
    let run = ctx.pipeline(tweak)?.run_stage(stage)?;
    ctx.emit(&run, || describe(&run));
    Ok(exit_for(run.status))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn dispatch(ctx: &Ctx, command: Command) -> Result<u8> {
    match command {
        Command::Init { dir, fixture, id } => init(ctx, &dir, fixture, id),
        Command::Ingest { file, format } => {
            let bytes = std::fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let hint = match format {
                Some(Format::Latex) => Some(DocFormat::Latex),
                Some(Format::Markdown) => Some(DocFormat::NougatMarkdown),
                None => file.extension().and_then(|e| e.to_str()).and_then(DocFormat::from_extension),
            };
            let run = ctx.pipeline(|_| {})?.ingest(&bytes, hint)?;
            ctx.emit(&run, || describe(&run));
            Ok(exit_for(run.status))
        }
        Command::Extract => stage(ctx, Stage::Extract, |_| {}),
        Command::Graph { export } => {
            let pipeline = ctx.pipeline(|_| {})?;
            let run = pipeline.run_stage(Stage::Graph)?;
            if let (Some(path), Some(id)) = (export, run.outputs.first()) {
                let g: StoredGraph = pipeline.store().get(id)?;
                let body = if path.extension().is_some_and(|e| e == "json") {
                    to_canonical_line(&g.graph)
                } else {
                    g.graph.to_dot()
                };
                std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            }
            ctx.emit(&run, || describe(&run));
            Ok(exit_for(run.status))
        }
        Command::Summarize => stage(ctx, Stage::Summarize, |_| {}),
        Command::Abstract => stage(ctx, Stage::Abstract, |_| {}),
        Command::Formalize => stage(ctx, Stage::Formalize, |_| {}),
        Command::Repair { dry_run: true } => repair_dry_run(ctx),
        Command::Repair { dry_run: false } => stage(ctx, Stage::Repair, |_| {}),
        Command::Merge { name } => stage(ctx, Stage::Merge, |c| {
            if let Some(n) = name {
                c.merged_theory_name = n;
            }
        }),
        Command::Check { backend } => stage(ctx, Stage::Check, |c| {
            if let Some(b) = backend {
                c.prover.backend = b;
            }
        }),
        Command::Prove { formula, tactic, backend } => stage(ctx, Stage::Prove, |c| {
            if let Some(f) = formula {
                c.prove_formulas = vec![f];
            }
            if let Some(t) = tactic {
                c.tactic = t;
            }
            if let Some(b) = backend {
                c.prover.backend = b;
            }
        }),
        Command::Run { stop_at } => {
            let runs = ctx.pipeline(|_| {})?.run_all(stop_at)?;
            ctx.emit(&runs, || runs.iter().map(describe).collect());
            Ok(runs.last().map_or(0, |r| exit_for(r.status)))
        }
        Command::Report => {
            let report = pipeline::report_for(&ctx.project)?;
            ctx.emit(&report, || report.to_string());
            Ok(0)
        }
        Command::Verdict { stage, decision, note } => {
            let store = ProjectStore::open_writer(&ctx.project)?;
            let decision = match decision {
                Verdict::Approve => Decision::Approve,
                Verdict::Reject => Decision::Reject,
            };
            let v = pipeline::record_verdict(&store, stage, decision, &note)?;
            ctx.emit(&v, || format!("{}: {:?} recorded as {}", v.stage, v.decision, v.verdict_id));
            Ok(0)
        }
        Command::Edit { version, file, note } => {
            let store = ProjectStore::open_writer(&ctx.project)?;
            let v = pipeline::human_edit(&store, &version, &read_text(&file)?, &note)?;
            ctx.emit(&v, || {
                if v.version_id == version {
                    format!("unchanged: {version}")
                } else {
                    format!("stored {} (child of {version})", v.version_id)
                }
            });
            Ok(0)
        }
        Command::Lineage { version } => {
            let chain = ctx.reader()?.lineage(&version)?;
            ctx.emit(&chain, || {
                chain
                    .iter()
                    .map(|v| format!("{} {:<6} {}\n", v.version_id, v.origin.as_str(), v.theory_name))
                    .collect()
            });
            Ok(0)
        }
        Command::Serve { port, host, mut roots, static_dir, cors_origins } => {
            roots.insert(0, ctx.project.clone());
            let config = mathpvs_service::ServiceConfig { roots, cors_origins, static_dir };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(mathpvs_service::serve(config, (host, port).into()))?;
            Ok(0)
        }
        Command::Lint { file } => lint(ctx, &file),
        Command::Fmt { file, write } => fmt(ctx, &file, write),
    }
}

fn init(ctx: &Ctx, dir: &Path, fixture: bool, id: Option<String>) -> Result<u8> {
    let config = match (&ctx.config, fixture) {
        (Some(path), _) => PipelineConfig::load(path)?,
        (None, true) => PipelineConfig::fixture(),
        (None, false) => PipelineConfig::default(),
    };
    let id = match id {
        Some(id) => id,
        None => std::path::absolute(dir)?
            .file_name()
            .and_then(|n| n.to_str())
            .map(str::to_owned)
            .unwrap_or_else(|| "project".into()),
    };
    let store = ProjectStore::init(dir, &id, config.to_json())?;
    let mut documents = Vec::new();
    if fixture {
        let pipeline = Pipeline::new(store, config)?;
        let run = pipeline.ingest(mathpvs_core::fixtures::SUMMARY_TEX.as_bytes(), Some(DocFormat::Latex))?;
        documents = run.outputs;
    }
    #[derive(Serialize)]
    struct Created {
        project_id: String,
        root: PathBuf,
        documents: Vec<String>,
    }
    let out = Created { project_id: id, root: dir.to_path_buf(), documents };
    ctx.emit(&out, || format!("initialized project {} in {}", out.project_id, out.root.display()));
    Ok(0)
}

fn repair_dry_run(ctx: &Ctx) -> Result<u8> {
    let store = ctx.reader()?;
    let config = ctx.pipeline_config(Some(&store))?;
    let prelude = PreludeIndex::bundled().with_renames(config.rename_table.clone());
    let index = store.index()?;
    let Some(run_id) = index.latest_run.get(&Stage::Formalize) else {
        bail!("nothing to repair: the formalize stage has not run");
    };
    let run: StageRun = store.get(run_id)?;

    #[derive(Serialize)]
    struct Plan {
        version_id: String,
        theory: String,
        edits: mathpvs_core::repair::RepairLog,
        remaining: Vec<mathpvs_core::pvs::Diagnostic>,
    }
    let mut plans = Vec::new();
    for vid in &run.outputs {
        let v = store.theory(vid)?;
        let outcome = match repair_to_fixpoint(&v.text, config.max_repair_passes, &prelude) {
            Ok(o) => o,
            Err(mathpvs_core::repair::RepairError::MaxPassesExceeded { partial, .. }) => *partial,
            Err(e) => return Err(e.into()),
        };
        plans.push(Plan {
            version_id: v.version_id,
            theory: v.theory_name,
            edits: outcome.log,
            remaining: outcome.remaining.into_iter().filter(|d| d.is_error()).collect(),
        });
    }
    ctx.emit(&plans, || {
        let mut out = String::new();
        for p in &plans {
            out.push_str(&format!("{} ({}): {} edit(s)\n", p.theory, p.version_id, p.edits.len()));
            for e in &p.edits.entries {
                out.push_str(&format!(
                    "  pass {} {}: {:?} -> {:?}\n",
                    e.pass_number, e.rule_id, e.text_before, e.text_after
                ));
            }
            for d in &p.remaining {
                out.push_str(&format!("  remaining {d}\n"));
            }
        }
        out
    });
    Ok(0)
}

fn lint(ctx: &Ctx, file: &Path) -> Result<u8> {
    let text = read_text(file)?;
    let config = ctx.pipeline_config(None)?;
    let prelude = PreludeIndex::bundled().with_renames(config.rename_table);
    let (_, diagnostics) = analyze(&text, &prelude);
    let errors = diagnostics.iter().filter(|d| d.is_error()).count();

    #[derive(Serialize)]
    struct LintReport<'a> {
        file: &'a Path,
        errors: usize,
        diagnostics: &'a [mathpvs_core::pvs::Diagnostic],
    }
    ctx.emit(&LintReport { file, errors, diagnostics: &diagnostics }, || {
        diagnostics.iter().map(|d| format!("{}:{d}\n", file.display())).collect()
    });
    Ok(if errors > 0 { 1 } else { 0 })
}

fn fmt(ctx: &Ctx, file: &Path, write: bool) -> Result<u8> {
    let text = read_text(file)?;
    let parsed = parse_theory(&text);
    let ast = match parsed.ast {
        Some(ast) if !parsed.diagnostics.iter().any(|d| d.is_error()) => ast,
        _ => {
            for d in &parsed.diagnostics {
                eprintln!("{}:{d}", file.display());
            }
            eprintln!("error: {} does not parse", file.display());
            #[derive(Serialize)]
            struct Unparsed<'a> {
                file: &'a Path,
                diagnostics: &'a [mathpvs_core::pvs::Diagnostic],
            }
            if ctx.json {
                print!("{}", to_canonical_line(&Unparsed { file, diagnostics: &parsed.diagnostics }));
            }
            return Ok(1);
        }
    };
    let formatted = print_theory(&ast)?;
    let changed = formatted != text;
    if write && changed {
        std::fs::write(file, &formatted).with_context(|| format!("writing {}", file.display()))?;
    }

    #[derive(Serialize)]
    struct Formatted<'a> {
        file: &'a Path,
        changed: bool,
        text: &'a str,
    }
    ctx.emit(&Formatted { file, changed, text: &formatted }, || {
        if write {
            String::new()
        } else {
            formatted.clone()
        }
    });
    Ok(0)
}
