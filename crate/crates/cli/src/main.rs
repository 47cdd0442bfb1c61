use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use oscspin_cli::config::{Mode, ScenarioConfig};
use oscspin_cli::CliError;

#[derive(Debug, Parser)]
#[command(name = "oscspin", version, about = "Oscillator coupled to a spin bath")]
struct Args {
    mode: Mode,
    /// TOML scenario file; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set tls.gamma_tls=100`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Omit the wall-clock header line so outputs are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
    /// Worker threads for sweeps; defaults to the number of processors.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oscspin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    if let Some(n) = args.jobs {
        if n == 0 {
            return Err(CliError::Config("`--jobs` must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = ScenarioConfig::load(args.config.as_deref(), &args.overrides)?;
    let out = oscspin_cli::run(args.mode, cfg, &args.out, !args.no_timestamp)?;
    for line in &out.report {
        println!("{line}");
    }
    for p in &out.written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
