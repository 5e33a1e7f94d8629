use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use har_cl::data::{gen_synthetic, gen_synthetic_recordings, write_recording_csv, write_windows_jsonl};
use har_cl::harness::{augview, load_data, parse_document, thread_cap, ExperimentConfig, Protocol, Runner};
use har_cl::Error;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "har-cl", version, about = "Contrastive pretraining and evaluation for wearable-sensor HAR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic dataset as windows.jsonl and per-recording CSVs
    Synth(Common),
    /// Pretrain encoders and save checkpoints
    Pretrain(Common),
    /// Pretrain (or load `checkpoint`) and linear-probe on a random split
    Evaluate(Common),
    /// Leave-one-person-out transfer
    CrossPerson(Common),
    /// Source/target matrix over device positions
    Wearing(Common),
    /// Window length and step sweep
    SweepWindow(Common),
    /// Ablation grid over one config key or augmentation pairs
    SweepGrid(Common),
    /// One window and its two augmented views as CSV
    Augview(Common),
}

#[derive(Args)]
struct Common {
    /// Config file, or inline `key=value` / JSON text
    #[arg(long)]
    config: Option<String>,
    /// Dataset file or directory; overrides `data`
    #[arg(long)]
    data: Option<String>,
    /// Output directory
    #[arg(long, default_value = "har-cl-out")]
    out: PathBuf,
    /// Single seed; overrides `seed` and clears `seeds`
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` override, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Failure reported as one `error kind=... message=...` line.
struct Failure {
    kind: &'static str,
    field: Option<String>,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let field = match &e {
            Error::InvalidConfig { field, .. } => Some(field.clone()),
            _ => None,
        };
        let message = match &e {
            Error::InvalidConfig { message, .. } => message.clone(),
            other => other.to_string(),
        };
        Failure { kind: e.kind(), field, message }
    }
}

impl Failure {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Failure { kind, field: None, message: message.into() }
    }

    fn line(&self) -> String {
        let quote = |s: &str| serde_json::to_string(s).unwrap_or_default();
        match &self.field {
            Some(f) => format!("error kind={} field={} message={}", self.kind, quote(f), quote(&self.message)),
            None => format!("error kind={} message={}", self.kind, quote(&self.message)),
        }
    }

    fn code(&self) -> u8 {
        match self.kind {
            "usage" | "invalid_config" | "invalid_argument" => 2,
            _ => 1,
        }
    }
}

/// Recursive merge; `patch` wins on conflicts.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

/// Overrides join the config document before defaults are resolved, so
/// `--set framework=byol` also picks up that framework's defaults.
fn load_config(opts: &Common, protocol: Option<Protocol>) -> Result<ExperimentConfig, Failure> {
    let mut doc = match &opts.config {
        None => Value::Object(Default::default()),
        Some(c) if Path::new(c).is_file() => {
            parse_document(&fs::read_to_string(c).map_err(|e| Failure::new("io", format!("{c}: {e}")))?)?
        }
        Some(c) if c.trim_start().starts_with('{') => parse_document(c)?,
        Some(c) if c.contains('=') => parse_document(&c.replace(';', "\n"))?,
        Some(c) => return Err(Failure::new("io", format!("{c}: no such config file"))),
    };
    let mut lines = vec![];
    for s in &opts.set {
        let (k, v) = s.split_once('=').ok_or_else(|| Failure::new("usage", format!("--set expects KEY=VALUE, got `{s}`")))?;
        lines.push(format!("{} = {}", k.trim(), v.trim()));
    }
    if let Some(s) = opts.seed {
        lines.push(format!("seed = {s}"));
        lines.push("seeds = []".into());
    }
    if let Some(p) = protocol {
        lines.push(format!("protocol = {}", p.name()));
    }
    merge(&mut doc, parse_document(&lines.join("\n"))?);
    if let (Some(d), Value::Object(m)) = (&opts.data, &mut doc) {
        m.insert("data".into(), Value::String(d.clone()));
    }
    Ok(ExperimentConfig::from_document(doc)?)
}

fn synth(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let windows = gen_synthetic(&cfg.synthetic)?;
    fs::create_dir_all(out.join("recordings")).map_err(Error::from)?;
    write_windows_jsonl(&out.join("windows.jsonl"), &windows)?;
    for (i, rec) in gen_synthetic_recordings(&cfg.synthetic)?.iter().enumerate() {
        write_recording_csv(&out.join("recordings").join(format!("{:03}_{}_{}.csv", i, rec.subject_id, rec.position)), rec)?;
    }
    fs::write(out.join("config.json"), serde_json::to_string_pretty(cfg).map_err(Error::from)?).map_err(Error::from)?;
    log::info!("wrote {} windows to {}", windows.len(), out.display());
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    let (opts, protocol) = match &command {
        Command::Synth(o) | Command::Pretrain(o) | Command::Augview(o) => (o, None),
        Command::Evaluate(o) => (o, Some(Protocol::RandomSplit)),
        Command::CrossPerson(o) => (o, Some(Protocol::CrossPerson)),
        Command::Wearing(o) => (o, Some(Protocol::WearingDiversity)),
        Command::SweepWindow(o) => (o, Some(Protocol::WindowSweep)),
        Command::SweepGrid(o) => (o, Some(Protocol::Grid)),
    };
    let cfg = load_config(opts, protocol)?;
    let out = &opts.out;
    if let Some(n) = thread_cap() {
        log::info!("HAR_CL_THREADS caps workers at {n}");
    }
    match command {
        Command::Synth(_) => return synth(&cfg, out),
        Command::Augview(_) => {
            let windows = load_data(&cfg)?.windows(&cfg)?;
            fs::create_dir_all(out).map_err(Error::from)?;
            fs::write(out.join("augview.csv"), augview(&cfg, &windows)?).map_err(Error::from)?;
            return Ok(());
        }
        _ => {}
    }
    let source = load_data(&cfg)?;
    let runner = Runner::new(cfg, Some(out.clone()));
    let report = match command {
        Command::Pretrain(_) => runner.pretrain_only(&source)?,
        _ => runner.run(&source)?,
    };
    report.write(out)?;
    log::info!("report written to {} in {} ms", out.display(), report.wall_ms);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let f = Failure::new("usage", first);
            eprintln!("{}", f.line());
            return ExitCode::from(f.code());
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code())
        }
    }
}
