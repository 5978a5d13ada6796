use std::path::PathBuf;
use std::process::ExitCode;

use antopt::bench::{self, Algorithm, ExperimentConfig, Problem};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

/// Run seeded ant colony experiments and write trace.csv and summary.json.
#[derive(Debug, Parser)]
#[command(name = "antopt", version)]
struct Cli {
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    #[arg(long, value_enum)]
    problem: Problem,
    /// TSPLIB, MatrixMarket, LOP matrix or network edge-list file.
    #[arg(long)]
    instance: PathBuf,
    /// Demand pairs for the route problem (default: all pairs).
    #[arg(long)]
    demands: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    repeats: u64,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    ants: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    params: Vec<(String, String)>,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    bench::parse_param(s).map_err(|e| e.to_string())
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("ANTOPT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("ANTOPT_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let rendered = e.render().to_string();
            eprint!("{rendered}");
            if !rendered.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(6);
    }
    let cfg = ExperimentConfig {
        algorithm: cli.algorithm,
        problem: cli.problem,
        instance: cli.instance,
        demands: cli.demands,
        seed: cli.seed,
        repeats: cli.repeats as usize,
        iterations: cli.iterations,
        ants: cli.ants,
        params: cli.params,
    };
    let report = match bench::run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(bench::exit_code(&e) as u8);
        }
    };
    let write = |name: &str, body: String| {
        let path = cli.out.join(name);
        std::fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display()))
    };
    let written = std::fs::create_dir_all(&cli.out)
        .map_err(|e| format!("{}: {e}", cli.out.display()))
        .and_then(|_| write("trace.csv", report.to_csv()))
        .and_then(|_| write("summary.json", report.summary_json() + "\n"));
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(4);
    }
    println!("{}", report.summary_json());
    ExitCode::SUCCESS
}
