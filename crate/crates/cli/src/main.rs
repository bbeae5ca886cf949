//! `taylorom` command-line driver.

mod commands;
mod manifest;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use commands::Command;
use manifest::{sha256_file, RunManifest, MANIFEST_NAME};
use taylorom::{ConfigDoc, Problem};

#[derive(Debug, Parser)]
#[command(name = "taylorom", version, about = "Taylor-augmented reduced-order wave modelling")]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Run directory; the manifest is written at its root.
    #[arg(long, short, global = true, default_value = "taylorom-run")]
    out: PathBuf,
    /// Override a configuration key, e.g. `--set epsilon=0.001`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Top,
}

#[derive(Debug, Subcommand)]
enum Top {
    #[command(flatten)]
    Run(Command),
    /// Rerun the command recorded in a manifest and check its outputs.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

/// Bad invocation or configuration; exits with code 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<taylorom::Error>() {
        Some(e) if e.is_numerical() => 1,
        Some(taylorom::Error::MissingKey(_))
        | Some(taylorom::Error::InvalidValue { .. })
        | Some(taylorom::Error::Parse { .. }) => 2,
        _ => 1,
    }
}

fn load_config_text(path: &Path, overrides: &[String]) -> Result<String> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut doc = ConfigDoc::parse(&text).with_context(|| format!("in {}", path.display()))?;
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| usage(format!("override `{o}` is not KEY=VALUE")))?;
        doc.set(k.trim(), v)?;
    }
    Ok(doc.into_config()?.to_text())
}

/// Runs `cmd` against `config_text` into `out` and writes the manifest.
fn execute(cmd: Command, config_text: String, out: &Path) -> Result<RunManifest> {
    let cfg = taylorom::load_config(&config_text)?;
    let problem = Problem::new(cfg)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.txt"), &config_text)?;
    let mut m = RunManifest::new(cmd.clone(), config_text);
    m.artifact(out, "config.txt")?;
    let t = Instant::now();
    log::info!("{} -> {}", cmd.name(), out.display());
    cmd.run(&problem, out, &mut m)?;
    m.durations.total_s = t.elapsed().as_secs_f64();
    m.write(out)?;
    Ok(m)
}

fn replay(path: &Path, out: &Path) -> Result<RunManifest> {
    let recorded = RunManifest::read(path)?;
    for input in &recorded.inputs {
        let now = sha256_file(Path::new(&input.path))?;
        if now != input.sha256 {
            bail!("input {} changed since the recorded run", input.path);
        }
    }
    let fresh = execute(recorded.command.clone(), recorded.config.clone(), out)?;
    let mut mismatched = Vec::new();
    for a in &recorded.artifacts {
        match fresh.artifacts.iter().find(|b| b.path == a.path) {
            Some(b) if b.sha256 == a.sha256 => {}
            _ => mismatched.push(a.path.clone()),
        }
    }
    if !mismatched.is_empty() {
        bail!("replay outputs differ: {}", mismatched.join(", "));
    }
    println!("replay matched {} artifacts", recorded.artifacts.len());
    Ok(fresh)
}

fn run(cli: Cli) -> Result<()> {
    let m = match cli.cmd {
        Top::Run(cmd) => {
            let path = cli
                .config
                .ok_or_else(|| usage("--config is required for this command"))?;
            let text = load_config_text(&path, &cli.overrides)?;
            execute(cmd, text, &cli.out)?
        }
        Top::Replay { manifest } => {
            if cli.config.is_some() || !cli.overrides.is_empty() {
                return Err(usage("replay takes its configuration from the manifest"));
            }
            replay(&manifest, &cli.out)?
        }
    };
    for (k, v) in &m.results {
        println!("{k}: {v}");
    }
    let d = &m.durations;
    for (name, v) in [("offline_s", d.offline_s), ("online_s", d.online_s), ("full_s", d.full_s)] {
        if let Some(v) = v {
            println!("{name}: {v:.3}");
        }
    }
    println!("manifest: {}", cli.out.join(MANIFEST_NAME).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
