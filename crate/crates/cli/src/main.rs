use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lrfield::limit::ValidityMode;
use lrfield_cli::{exit_code, run, Command, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "lrf", version, about = "Long-range dependent field experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Synthesize one field and write a binary dump with a JSON header.
    Synth(Common),
    /// Run the scaling pipeline and write the report, cell table and plot data.
    Scaling(Common),
    /// Draw from the limit process and summarize against the covariance integral.
    LimitSample(Common),
    /// Classify integrability over a grid of exponents per window.
    Integrability(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; keys may be dotted (params.alpha = 0.4).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = ["theorem", "window"])]
    validity_mode: Option<String>,
    /// Override a config key, e.g. --set params.alpha=0.3 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Sub::Synth(c) => (Command::Synth, c),
        Sub::Scaling(c) => (Command::Scaling, c),
        Sub::LimitSample(c) => (Command::LimitSample, c),
        Sub::Integrability(c) => (Command::Integrability, c),
    };
    let overrides = Overrides {
        seed: common.seed,
        out: common.out,
        threads: common.threads,
        validity_mode: common.validity_mode.map(|m| m.parse::<ValidityMode>().unwrap()),
        sets: common.sets,
    };
    let result = RunConfig::load(common.config.as_deref(), &overrides).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| lrfield::Error::Config(format!("thread pool: {e}")))?;
        }
        run(cmd, &cfg)
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
