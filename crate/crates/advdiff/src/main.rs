use std::path::PathBuf;
use std::process::ExitCode;

use advdiff::config::ProfileName;
use advdiff::{execute, parallel, CliError, Outcome, RunConfig};
use clap::Parser;

/// Advection-diffusion solver and boundary control synthesis.
#[derive(Parser, Debug)]
#[command(name = "advdiff", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accuracy profile; overrides `numerics.profile`.
    #[arg(long, value_parser = ["fast", "default", "paper"])]
    profile: Option<String>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(p) = &args.profile {
        cfg.numerics.profile = ProfileName::parse(p).expect("checked by clap");
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.clone();
    }
    Ok(cfg)
}

fn write(cfg: &RunConfig, out: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    for a in &out.artifacts {
        let path = cfg.output.dir.join(&a.name);
        std::fs::write(&path, &a.contents)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run(args: &Args) -> Result<Outcome, CliError> {
    parallel::init_threads()?;
    let cfg = load(args)?;
    let out = execute(&cfg)?;
    write(&cfg, &out)?;
    Ok(out)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(out) => {
            eprintln!("{}", out.summary);
            if out.failures.is_empty() {
                return ExitCode::SUCCESS;
            }
            for f in &out.failures {
                eprintln!("  {f}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("advdiff: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
