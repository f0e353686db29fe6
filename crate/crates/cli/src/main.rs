mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypershift::Error;

use config::{ConfigFile, RunConfig, Section};

/// Scattering phase shifts, X-ray transforms and trace formulas on
/// hyperbolic space.
///
/// Exit status: 0 on success, 2 on invalid input, 3 when a numerical
/// tolerance cannot be met (or a selftest criterion fails). Errors are
/// reported as one JSON object on stderr. HYPERSHIFT_THREADS caps the
/// number of worker threads.
#[derive(Parser, Debug)]
#[command(name = "hypershift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// TOML file with a [common] table and one table per subcommand
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// boundary dimension n: the space is H^{n+1}, its boundary S^n (1, 2 or 3) [default: 1]
    #[arg(long, global = true)]
    dim: Option<u32>,
    /// potential: gaussian_rho:A=..,sigma=.. | bump_ball:A=..,delta=.. | exp_decay:A=..,m=.. | zero | csv:PATH
    /// [default: gaussian_rho:A=1,sigma=1]
    #[arg(long, global = true)]
    potential: Option<String>,
    /// spectral parameter λ [default: 50]
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// comma-separated increasing λ values [trace default: 50,100,200]
    #[arg(long, global = true, value_delimiter = ',')]
    lambda_list: Option<Vec<f64>>,
    /// highest harmonic degree [default: ceil(2λR), R where |G_V| < 1e-6; freespec: 20]
    #[arg(long, global = true)]
    kmax: Option<u64>,
    /// tolerance [trace: 1e-6, xray/invert: 1e-12, others: 1e-10]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// comma-separated moments p [default: 1]
    #[arg(long, global = true, value_delimiter = ',')]
    p_list: Option<Vec<u32>>,
    /// Tikhonov weight relative to the largest singular value squared [default: L-curve corner]
    #[arg(long, global = true)]
    reg: Option<f64>,
    /// output directory [default: .]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// xray: largest r of the profile grid [default: 200]
    #[arg(long, global = true)]
    r_max: Option<f64>,
    /// xray: grid step, in asinh(r) or in r depending on --r-grid [default: 0.025]
    #[arg(long, global = true)]
    r_step: Option<f64>,
    /// xray: asinh (uniform in the closest-approach distance) or uniform [default: asinh]
    #[arg(long, global = true)]
    r_grid: Option<String>,
    /// invert: end of the ρ knot grid [default: 6]
    #[arg(long, global = true)]
    rho_max: Option<f64>,
    /// invert: spline knot spacing [default: 0.1]
    #[arg(long, global = true)]
    knot_spacing: Option<f64>,
    /// invert: profile CSV (r,G) to invert instead of computing one
    #[arg(long, global = true)]
    profile: Option<PathBuf>,
    /// decay exponent m for csv: potentials (e^{−mρ} tail)
    #[arg(long, global = true)]
    tail_exponent: Option<f64>,
    /// trace: harmonic or binomial degree weights [default: harmonic]
    #[arg(long, global = true)]
    multiplicity: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// sample G_V on an r grid -> profile.csv
    Xray,
    /// phase shifts δ_k for k = 0..kmax -> shifts.csv, shifts.json
    Shifts,
    /// quantum vs classical moments -> trace.csv, trace.json
    Trace,
    /// reconstruct V from a profile -> potential.csv, invert.json
    Invert,
    /// free scattering eigenvalues μ_k(λ) -> freespec.csv
    Freespec,
    /// run the acceptance criteria -> selftest.json
    Selftest {
        /// run only these criteria (e.g. A3,A8)
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Xray => "xray",
            Command::Shifts => "shifts",
            Command::Trace => "trace",
            Command::Invert => "invert",
            Command::Freespec => "freespec",
            Command::Selftest { .. } => "selftest",
        }
    }
}

fn flags(o: &Opts) -> Section {
    Section {
        dim: o.dim,
        potential: o.potential.clone(),
        lambda: o.lambda,
        lambda_list: o.lambda_list.clone(),
        kmax: o.kmax,
        tol: o.tol,
        p_list: o.p_list.clone(),
        reg: o.reg,
        out: o.out.clone(),
        r_max: o.r_max,
        r_step: o.r_step,
        r_grid: o.r_grid.clone(),
        rho_max: o.rho_max,
        knot_spacing: o.knot_spacing,
        profile: o.profile.clone(),
        tail_exponent: o.tail_exponent,
        multiplicity: o.multiplicity.clone(),
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("HYPERSHIFT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| Error::InvalidParameter(format!("HYPERSHIFT_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn fail(e: &Error) -> ExitCode {
    let code = if e.is_validation() { 2 } else { 3 };
    let msg = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
    eprintln!("{msg}");
    ExitCode::from(code)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    configure_threads()?;
    let file = cli.opts.config.as_deref().map(ConfigFile::load).transpose()?;
    let cfg = RunConfig::resolve(cli.command.name(), &flags(&cli.opts), file.as_ref())?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::Io(format!("{}: {e}", cfg.out.display())))?;
    let msg = match &cli.command {
        Command::Xray => commands::xray(&cfg)?,
        Command::Shifts => commands::shifts(&cfg)?,
        Command::Trace => commands::trace(&cfg)?,
        Command::Invert => commands::invert(&cfg)?,
        Command::Freespec => commands::freespec(&cfg)?,
        Command::Selftest { only } => return commands::selftest(&cfg, only),
    };
    println!("{msg}");
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => fail(&e),
    }
}
