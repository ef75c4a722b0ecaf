use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use percoflow::config::{parse_config, ExperimentKind};
use percoflow::runner::run;

/// Exact-solver experiments for maximal flows in first passage percolation.
#[derive(Parser, Debug)]
#[command(name = "percoflow", version, arg_required_else_help = true)]
struct Cli {
    /// Experiment kind: nu, flow, converge, tail, cutset or wulff.
    kind: String,

    /// Path to the TOML experiment config.
    #[arg(long)]
    config: PathBuf,

    /// Worker threads; overrides PERCOFLOW_WORKERS and the config.
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory; overrides the config (default "out").
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fail(code: u8, payload: serde_json::Value) -> ExitCode {
    eprintln!("{}", serde_json::to_string_pretty(&payload).unwrap());
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let kind: ExperimentKind = match cli.kind.parse() {
        Ok(k) => k,
        Err(message) => {
            return fail(1, json!({ "error": "config", "issues": [message] }));
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            return fail(
                1,
                json!({
                    "error": "config",
                    "issues": [format!("cannot read {}: {e}", cli.config.display())],
                }),
            );
        }
    };
    let mut cfg = match parse_config(kind, &text) {
        Ok(cfg) => cfg,
        Err(issues) => {
            return fail(1, json!({ "error": "config", "issues": issues }));
        }
    };

    if let Ok(seed) = std::env::var("PERCOFLOW_SEED") {
        match seed.parse() {
            Ok(s) => cfg.master_seed = s,
            Err(_) => {
                return fail(
                    1,
                    json!({
                        "error": "config",
                        "issues": [format!("PERCOFLOW_SEED must be an integer, found {seed:?}")],
                    }),
                );
            }
        }
    }
    let env_workers = std::env::var("PERCOFLOW_WORKERS")
        .ok()
        .and_then(|w| w.parse::<usize>().ok())
        .filter(|&w| w >= 1);
    let workers = cli.workers.or(env_workers).or(cfg.workers);

    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    match run(&cfg, &out_dir, workers) {
        Ok(output) => {
            println!("{}", output.csv_path.display());
            println!("{}", output.manifest_path.display());
            println!("{}", output.svg_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let payload = json!({ "error": "runtime", "message": e.to_string() });
            let _ = std::fs::create_dir_all(&out_dir)
                .and_then(|_| {
                    std::fs::write(
                        out_dir.join("error.json"),
                        serde_json::to_string_pretty(&payload).unwrap(),
                    )
                });
            fail(2, payload)
        }
    }
}
