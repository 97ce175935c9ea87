use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlspread::{commands, CliError, Scenario};

#[derive(Parser)]
#[command(name = "nlspread", version, about = "Spreading speeds and front simulations for a two-component nonlocal epidemic model")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for `simulate` and `sweep`.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override a config key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Worker threads for `sweep`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Allow `sigma-star` when kernel.u is neither normal nor uniform.
    #[arg(long, global = true)]
    unproven: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Extremal speeds and their minimisers.
    Speeds,
    /// Propagation direction from the set Lambda.
    Classify,
    /// Asymmetry index.
    Kappa,
    /// Critical mobility of kernel.v's family.
    SigmaStar,
    /// Simulate and fit front speeds.
    Simulate,
    /// Repeat a command over sweep.values of sweep.axis.
    Sweep,
    /// Run the oracle suite.
    Validate,
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let s = Scenario::load(path, &cli.set)?;
    let stdout = std::io::stdout();
    let table = match cli.command {
        Command::Speeds => commands::speeds(&s)?,
        Command::Classify => commands::classify(&s)?,
        Command::Kappa => commands::kappa(&s)?,
        Command::SigmaStar => {
            let (table, note) = commands::sigma_star(&s, cli.unproven)?;
            if let Some(note) = note {
                eprintln!("{note}");
            }
            table
        }
        Command::Simulate => {
            let outcome = commands::simulate(&s, &cli.out)?;
            eprintln!("wrote {}", outcome.dir.display());
            for t in &outcome.tags {
                eprintln!("tag: {t}");
            }
            outcome.summary
        }
        Command::Sweep => commands::sweep(&s, &cli.out, cli.jobs, cli.unproven)?,
        Command::Validate => {
            let report = commands::validate(&s)?;
            stdout.lock().write_all(report.render().as_bytes())?;
            return Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    };
    table.write_to(stdout.lock())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("nlspread: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
