use clap::{Args, Parser, Subcommand};
use nccic_cli::{run, CliError, Mode, RawSpec, SweepSpec};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nccic",
    version,
    about = "Rate sweeps, converse bounds, GDoF curves, and Monte-Carlo simulation \
             for the two-user network-coded cognitive interference channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimized achievable rate pairs with converse bounds over an (SNR, rho) grid
    Rates(CommonArgs),
    /// Finite-SNR GDoF estimates against the 1 + rho limit
    Gdof(CommonArgs),
    /// Monte-Carlo simulation of the full transceiver chain
    Simulate(CommonArgs),
    /// Converse bounds only
    Bounds(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Comma-separated SNR grid in dB
    #[arg(long = "snr-db", value_name = "LIST")]
    snr_db: Option<String>,
    /// Comma-separated rho values (INR = SNR^rho)
    #[arg(long, value_name = "LIST")]
    rho: Option<String>,
    /// Explicit gain, as re,im (all four required together)
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    h11: Option<String>,
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    h12: Option<String>,
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    h21: Option<String>,
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    h22: Option<String>,
    /// Number of random unit-magnitude channels to draw instead of explicit gains
    #[arg(long, value_name = "COUNT")]
    ensemble: Option<String>,
    /// Field modulus (prime, 3 mod 4)
    #[arg(long, value_name = "PRIME")]
    p: Option<String>,
    /// Lattice blocklength (complex dimensions)
    #[arg(long, value_name = "INT")]
    n: Option<String>,
    /// Code dimension (defaults to n; r < n uses a random generator)
    #[arg(long, value_name = "INT")]
    r: Option<String>,
    /// Monte-Carlo trials per simulation row
    #[arg(long, value_name = "INT")]
    trials: Option<String>,
    /// Master seed; all draws derive deterministically from it
    #[arg(long, value_name = "INT")]
    seed: Option<String>,
    /// Disable channel noise in simulation
    #[arg(long)]
    noiseless: bool,
    /// CSV output path (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    /// JSON summary path (simulate only)
    #[arg(long = "json-summary", value_name = "PATH")]
    json_summary: Option<String>,
    /// Optional key=value config file; explicit flags win
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn into_raw(self) -> Result<RawSpec, CliError> {
        let flags = RawSpec {
            snr_db: self.snr_db,
            rho: self.rho,
            h11: self.h11,
            h12: self.h12,
            h21: self.h21,
            h22: self.h22,
            ensemble: self.ensemble,
            p: self.p,
            n: self.n,
            r: self.r,
            trials: self.trials,
            seed: self.seed,
            noiseless: if self.noiseless {
                Some("true".into())
            } else {
                None
            },
            out: self.out,
            json_summary: self.json_summary,
        };
        match &self.config {
            Some(path) => Ok(flags.or(RawSpec::from_config_file(path)?)),
            None => Ok(flags),
        }
    }
}

fn execute(mode: Mode, args: CommonArgs) -> Result<nccic_cli::RunReport, CliError> {
    let raw = args.into_raw()?;
    let spec = SweepSpec::resolve(mode, raw)?;
    log::info!("running {} over {}", mode.as_str(), spec.canonical_string());

    let mut csv: Box<dyn Write> = match &spec.out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut json_file = match &spec.json_summary {
        Some(path) => Some(std::fs::File::create(path)?),
        None => None,
    };
    let json: Option<&mut dyn Write> = json_file.as_mut().map(|f| f as &mut dyn Write);

    let report = run(&spec, &mut csv, json)?;
    csv.flush()?;
    log::info!("{} rows, {} violations", report.rows, report.violations);
    Ok(report)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NCCIC_LOG", "warn")).init();
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Rates(a) => (Mode::Rates, a),
        Command::Gdof(a) => (Mode::Gdof, a),
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Bounds(a) => (Mode::Bounds, a),
    };
    match execute(mode, args) {
        Ok(report) if report.violations == 0 => ExitCode::SUCCESS,
        Ok(report) => {
            eprintln!(
                "nccic: {} row-level invariant violations",
                report.violations
            );
            ExitCode::from(1)
        }
        Err(CliError::Spec(e)) => {
            eprintln!("nccic: invalid sweep spec: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("nccic: {e}");
            ExitCode::from(1)
        }
    }
}
