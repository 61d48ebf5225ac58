use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sweetspot_cli::runner::{self, Method};
use sweetspot_cli::ScenarioConfig;

/// Sweet-spot maximization and sound field synthesis baselines for
/// loudspeaker arrays.
#[derive(Parser)]
#[command(name = "sweetspot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one method and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several methods and tabulate their sweet-spot fractions.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, value_enum)]
        methods: Vec<Method>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the number of grid atoms.
    Grid {
        #[arg(long)]
        config: PathBuf,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SWEET_THREADS") {
        let n: usize = v.parse().with_context(|| format!("SWEET_THREADS={v} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main_inner() -> Result<()> {
    let cli = Cli::parse();
    init_threads()?;
    match cli.command {
        Command::Run { config, method, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let result = runner::run(&cfg, method, &out)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            let f = &result.report.overall;
            println!(
                "{method}: lss {:.4} css-proxy {:.4} internal-sweet {:.4} ({} atoms)",
                f.lss,
                f.css,
                f.sweet,
                result.report.atoms.len()
            );
        }
        Command::Compare { config, methods, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let rows = runner::compare(&cfg, &methods, &out)?;
            println!("method,lss,css_proxy,internal_sweet,lss_dh");
            for r in rows {
                let dh = r.lss_dh.map(|v| format!("{v:.4}")).unwrap_or_default();
                println!("{},{:.4},{:.4},{:.4},{dh}", r.method, r.lss, r.css_proxy, r.internal_sweet);
            }
        }
        Command::Grid { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            println!("{}", cfg.grid()?.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
