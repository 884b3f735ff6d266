use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cmf_cli::config::Overrides;
use cmf_cli::{parse_config, run};

/// Pairwise concurrence of spin-1/2 rings along field or temperature sweeps.
#[derive(Parser, Debug)]
#[command(name = "cmf", version)]
struct Cli {
    /// TOML file with [chain], [coupling], [sweep] and [output] sections
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match parse_config(cli.config.as_deref(), cli.overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(threads) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("thread pool: {e}");
        }
    }
    let out = match run(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &out.csv).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{}", out.csv);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    let bs = out.bs.map_or("none".to_string(), |b| format!("{b:.6}"));
    eprintln!("{} rows, b_c = {:.6}, b_s = {bs}, {} failed points", out.rows, out.bc, out.failures);
    if out.failures > 0 {
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
