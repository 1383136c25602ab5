use bsenclose::cli_report::{parse_config, run, CliError, Command, ExitStatus, Format, MAX_SEED};
use bsenclose::par;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectral-stability certificates and eigenvalue enclosures for perturbed
/// Dirac and Klein-Gordon operators.
#[derive(Parser, Debug)]
#[command(name = "bsenclose", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Stability or enclosure certificate for one theorem.
    Certify(Flags),
    /// Enclosure disks for a massive Dirac perturbation.
    Disks(Flags),
    /// Birman-Schwinger norm over a rectangle of the complex plane.
    Scan(Flags),
    /// Eigenvalues of the discretized perturbed operator.
    Eig(Flags),
    /// Randomized checks of the resolvent estimates.
    Bench(Flags),
    /// Weighted and dyadic norms of a potential.
    Norms(Flags),
}

#[derive(clap::Args, Debug)]
struct Flags {
    /// TOML or JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Report path; CSV siblings are written next to it. Defaults to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

impl Cmd {
    fn split(self) -> (Command, Flags) {
        match self {
            Cmd::Certify(f) => (Command::Certify, f),
            Cmd::Disks(f) => (Command::Disks, f),
            Cmd::Scan(f) => (Command::Scan, f),
            Cmd::Eig(f) => (Command::Eig, f),
            Cmd::Bench(f) => (Command::Bench, f),
            Cmd::Norms(f) => (Command::Norms, f),
        }
    }
}

fn execute(command: Command, flags: &Flags) -> Result<ExitStatus, CliError> {
    let path = flags.config.as_path();
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text, Format::from_path(path), Some(command))?;
    if let Some(s) = flags.seed {
        if s > MAX_SEED {
            return Err(CliError::Validation(format!("--seed must be <= {MAX_SEED}")));
        }
        cfg.seed = s;
    }
    if let Some(k) = flags.threads {
        par::init_global_threads(k);
    }
    let out: Option<PathBuf> = flags.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let report = run(&cfg, path.parent(), out.as_deref())?;
    report.write(out.as_deref())?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(report.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = cli.command.split();
    let code = match execute(command, &flags) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
