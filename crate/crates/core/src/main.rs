use clap::Parser;
use dirac2d::cli::{self, OneOrMany, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Radial solver for weakly localized states of 2D cubic Dirac systems:
/// solve massless profiles, verify their invariants, compare against the
/// exact isotropic solution, locate massive bound states by shooting, and
/// sweep parameter grids.
#[derive(Parser, Debug)]
#[command(name = "dirac2d", version, about, long_about = None)]
struct Args {
    /// massless | massive | verify | oracle-compare | sweep
    #[arg(long)]
    mode: Option<String>,

    /// First cubic coupling (default 1).
    #[arg(long)]
    beta1: Option<f64>,

    /// Second cubic coupling, 0 < beta2 <= beta1 (default 1/2).
    #[arg(long)]
    beta2: Option<f64>,

    /// Initial amplitude v(0); a comma-separated list in sweep mode.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,

    /// Mass of the gapped system (default 1).
    #[arg(long)]
    mass: Option<f64>,

    /// Frequency in the spectral gap (-m, m); a comma-separated list in
    /// sweep mode.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,

    /// Outer integration radius (default: 50 massless, 40 linearized
    /// e-folds massive).
    #[arg(long = "r-max")]
    r_max: Option<f64>,

    /// Relative tolerance of the integrator (default 1e-10).
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,

    /// Absolute tolerance of the integrator (default 1e-12).
    #[arg(long = "abs-tol")]
    abs_tol: Option<f64>,

    /// Output directory for profile.csv / summary.csv and report.toml.
    #[arg(long)]
    out: Option<PathBuf>,

    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn overrides_from(args: &Args) -> Result<Overrides, cli::CliError> {
    Ok(Overrides {
        mode: args.mode.clone(),
        beta1: args.beta1,
        beta2: args.beta2,
        lambda: args
            .lambda
            .as_deref()
            .map(OneOrMany::parse_list)
            .transpose()?,
        mass: args.mass,
        omega: args
            .omega
            .as_deref()
            .map(OneOrMany::parse_list)
            .transpose()?,
        r_max: args.r_max,
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
        out: args.out.clone(),
        ..Default::default()
    })
}

fn main() -> ExitCode {
    let args = Args::parse();

    let resolved = overrides_from(&args).and_then(|flags| {
        let file = match &args.config {
            Some(path) => Overrides::from_file(path)?,
            None => Overrides::default(),
        };
        flags.over(file).resolve()
    });

    let cfg = match resolved {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("dirac2d: {err} [{}]", err.code());
            return ExitCode::from(err.exit_code() as u8);
        }
    };

    let outcome = cli::run(&cfg);
    if let Some(error) = &outcome.report.error {
        eprintln!("dirac2d: {} [{}]", error.message, error.code);
    }
    ExitCode::from(outcome.exit_code as u8)
}
