//! Thin command-line front end over `quartic_finsler::run`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use quartic_finsler::config::{load_config, PatchConfig};
use quartic_finsler::run::{error_json, run_command, Command, RunManifest, Tolerances};
use quartic_finsler::Result;

#[derive(Parser, Debug)]
#[command(name = "finsler", about = "Randers-changed quartic metrics: evaluation, geodesics, distances and checks")]
struct Args {
    command: Command,
    /// Patch file or built-in catalog name.
    #[arg(long)]
    patch: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    /// Override the pass threshold of every report.
    #[arg(long)]
    tol: Option<f64>,
    /// Print the summary JSON on stdout.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    samples: Option<usize>,
    /// Base point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    at: Option<Vec<f64>>,
    /// Target point for `distance`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    to: Option<Vec<f64>>,
    /// Tangent direction for `eval` and `geodesic`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    dir: Option<Vec<f64>>,
    #[arg(long)]
    t_end: Option<f64>,
}

fn manifest(args: &Args) -> Result<RunManifest> {
    let patch: Option<PatchConfig> = args.patch.as_deref().map(load_config).transpose()?;
    Ok(RunManifest {
        seed: args.seed,
        tolerances: Tolerances { threshold: args.tol },
        samples: args.samples,
        steps: args.steps,
        grid: args.grid,
        at: args.at.clone(),
        to: args.to.clone(),
        dir: args.dir.clone(),
        t_end: args.t_end,
        ..RunManifest::new(args.command, patch, &args.out)
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = write!(std::io::stdout(), "{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!("{}", serde_json::json!({ "error": { "kind": "usage", "message": msg.trim() } }));
            return ExitCode::from(2);
        }
    };
    match manifest(&args).and_then(|m| run_command(&m)) {
        Ok(outcome) => {
            // a closed stdout (`| head`) is not an error worth reporting
            let mut out = std::io::stdout().lock();
            if args.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&outcome.summary).expect("json"));
            } else {
                let verdict = if outcome.pass { "pass" } else { "FAIL" };
                let _ = writeln!(out, "{}: {verdict}", args.command.name());
                for path in &outcome.artifacts {
                    let _ = writeln!(out, "  wrote {}", path.display());
                }
            }
            if outcome.pass { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
