use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlslab_cli::{runner, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Spectral NLS experiments on a periodic box")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Wiener-randomize a Gaussian profile.
    Randomize,
    /// Tail and moment statistics of randomized data.
    Taildiag,
    /// Nonlinear evolution with conservation diagnostics.
    Evolve,
    /// X, Y and G norms of a free evolution.
    Norms,
    /// Trilinear estimate ratios.
    Trilinear,
    /// Forced Picard solve.
    Picard,
    /// Constrained ground state.
    Groundstate,
    /// Minimal energy against mass.
    Mcurve,
    /// Orbital stability under smooth perturbations.
    Stability,
    /// Orbital stability under rough randomized perturbations.
    Asstability,
    /// Forced against unforced solutions.
    Perturb,
    /// Summarize finished runs.
    Report {
        /// Manifest files of earlier runs.
        manifests: Vec<PathBuf>,
    },
}

impl Cmd {
    fn command(&self) -> Command {
        match self {
            Cmd::Randomize => Command::Randomize,
            Cmd::Taildiag => Command::Taildiag,
            Cmd::Evolve => Command::Evolve,
            Cmd::Norms => Command::Norms,
            Cmd::Trilinear => Command::Trilinear,
            Cmd::Picard => Command::Picard,
            Cmd::Groundstate => Command::Groundstate,
            Cmd::Mcurve => Command::Mcurve,
            Cmd::Stability => Command::Stability,
            Cmd::Asstability => Command::Asstability,
            Cmd::Perturb => Command::Perturb,
            Cmd::Report { .. } => Command::Report,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("NLSLAB_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Validation(format!("NLSLAB_THREADS={v} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.quiet { "error" } else { "warn" }))
        .init();
    let fail = |e: CliError| {
        eprintln!("nlslab: {e}");
        ExitCode::from(e.exit_code() as u8)
    };
    if let Err(e) = configure_threads() {
        return fail(e);
    }
    let mut config = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => return fail(e),
        },
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(o) = &cli.out {
        config.output_dir = o.clone();
    }
    let manifests = match &cli.command {
        Cmd::Report { manifests } => manifests.clone(),
        _ => Vec::new(),
    };
    let (manifest, err) = runner::run(cli.command.command(), config, &manifests);
    if let Some(e) = err {
        return fail(e);
    }
    if !cli.quiet {
        println!("{} finished in {:.1}s", manifest.command, manifest.wall_time_seconds);
        for a in &manifest.artifacts {
            println!("  {}", manifest.config.output_dir.join(&a.path).display());
        }
    }
    ExitCode::SUCCESS
}
