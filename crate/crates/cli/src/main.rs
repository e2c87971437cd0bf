use std::fs;
use std::process::ExitCode;

use clap::Parser;
use robotaxi_cli::cli::{execute, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or("warn,robotaxi_core=info"),
    )
    .init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let (json, csv) = execute(cli)?;
    match &cli.out {
        Some(p) => {
            fs::write(p, &json).map_err(|e| anyhow::anyhow!("writing {}: {e}", p.display()))?
        }
        None => print!("{json}"),
    }
    if let (Some(p), Some(text)) = (&cli.csv, csv) {
        fs::write(p, text).map_err(|e| anyhow::anyhow!("writing {}: {e}", p.display()))?;
    }
    Ok(())
}
