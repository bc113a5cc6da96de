//! Command-line surface: solve, verify, compare against the isotropic
//! oracle, locate massive bound states, and sweep parameter grids, writing
//! plottable CSV tables and structured run reports.
//!
//! Exit statuses: 0 success, 1 validation error, 2 numerical failure,
//! 3 verification failure. Every failure is also written to the report with
//! a machine-readable code. There is no randomness anywhere in the pipeline,
//! so identical configs produce byte-identical artifacts.

pub mod report;

use crate::integrator::{IntegratorConfig, IntegratorError, Termination};
use crate::massive::{classification_config, find_bound_state, scan_bracket, MassiveError};
use crate::massless::{
    asymptotic_fit, isotropic_closed_form, solve_massless, verify_profile_with, MasslessError,
    VerifyThresholds,
};
use crate::model::{BetaParams, MassiveParams, ModelError};
use crate::variational::{action_value, dual_check, VariationalError};
use rayon::prelude::*;
use report::{
    write_profile_csv, write_sweep_csv, ActionSection, BoundStateSection, ConfigSection,
    ErrorSection, FitSection, InvariantsSection, OracleSection, Report, RunSection, SweepRow,
    TerminationSection,
};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Oracle comparison passes below this max-abs deviation.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Massless,
    Massive,
    Verify,
    OracleCompare,
    Sweep,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "massless" => Some(Mode::Massless),
            "massive" => Some(Mode::Massive),
            "verify" => Some(Mode::Verify),
            "oracle-compare" | "oraclecompare" => Some(Mode::OracleCompare),
            "sweep" => Some(Mode::Sweep),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Massless => "massless",
            Mode::Massive => "massive",
            Mode::Verify => "verify",
            Mode::OracleCompare => "oracle-compare",
            Mode::Sweep => "sweep",
        }
    }
}

/// Fully resolved run configuration; flags override config-file values,
/// which override the built-in defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub beta1: f64,
    pub beta2: f64,
    /// Initial amplitudes; one entry outside sweep mode. In massive mode the
    /// first entry seeds the geometric bracket scan.
    pub lambda: Vec<f64>,
    pub mass: f64,
    pub omega: Vec<f64>,
    pub r_start: f64,
    /// None picks the mode default: 50 for massless runs, forty linearized
    /// e-folds for massive runs.
    pub r_max: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub blowup_threshold: f64,
    /// None defaults to the upper half of the integration interval.
    pub fit_window: Option<(f64, f64)>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let integ = IntegratorConfig::default();
        Self {
            mode: Mode::Massless,
            beta1: 1.0,
            beta2: 0.5,
            lambda: vec![1.0],
            mass: 1.0,
            omega: vec![0.0],
            r_start: integ.r_start,
            r_max: None,
            rel_tol: integ.rel_tol,
            abs_tol: integ.abs_tol,
            max_steps: integ.max_steps,
            blowup_threshold: integ.blowup_threshold,
            fit_window: None,
            out: PathBuf::from("dirac2d-out"),
        }
    }
}

/// Unresolved overrides, from flags or a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub mode: Option<String>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub lambda: Option<OneOrMany>,
    pub mass: Option<f64>,
    pub omega: Option<OneOrMany>,
    pub r_start: Option<f64>,
    pub r_max: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_steps: Option<usize>,
    pub blowup_threshold: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }

    /// Parse "0.5,1,2" or a single number.
    pub fn parse_list(s: &str) -> Result<OneOrMany, CliError> {
        let values: Result<Vec<f64>, _> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse::<f64>)
            .collect();
        match values {
            Ok(v) => Ok(OneOrMany::Many(v)),
            Err(_) => Err(CliError::BadConfig {
                reason: format!("cannot parse number list {s:?}"),
            }),
        }
    }
}

impl Overrides {
    /// Apply `self` on top of `other` (self wins).
    pub fn over(self, other: Overrides) -> Overrides {
        Overrides {
            mode: self.mode.or(other.mode),
            beta1: self.beta1.or(other.beta1),
            beta2: self.beta2.or(other.beta2),
            lambda: self.lambda.or(other.lambda),
            mass: self.mass.or(other.mass),
            omega: self.omega.or(other.omega),
            r_start: self.r_start.or(other.r_start),
            r_max: self.r_max.or(other.r_max),
            rel_tol: self.rel_tol.or(other.rel_tol),
            abs_tol: self.abs_tol.or(other.abs_tol),
            max_steps: self.max_steps.or(other.max_steps),
            blowup_threshold: self.blowup_threshold.or(other.blowup_threshold),
            fit_window: self.fit_window.or(other.fit_window),
            out: self.out.or(other.out),
        }
    }

    pub fn from_file(path: &Path) -> Result<Overrides, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            message: format!("cannot read config {}: {e}", path.display()),
        })?;
        toml::from_str(&text).map_err(|e| CliError::BadConfig {
            reason: format!("cannot parse config {}: {e}", path.display()),
        })
    }

    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let defaults = RunConfig::default();
        let mode = match self.mode {
            None => defaults.mode,
            Some(s) => Mode::parse(&s).ok_or_else(|| CliError::BadConfig {
                reason: format!("unknown mode {s:?}"),
            })?,
        };
        Ok(RunConfig {
            mode,
            beta1: self.beta1.unwrap_or(defaults.beta1),
            beta2: self.beta2.unwrap_or(defaults.beta2),
            lambda: self.lambda.map_or(defaults.lambda, OneOrMany::into_vec),
            mass: self.mass.unwrap_or(defaults.mass),
            omega: self.omega.map_or(defaults.omega, OneOrMany::into_vec),
            r_start: self.r_start.unwrap_or(defaults.r_start),
            r_max: self.r_max,
            rel_tol: self.rel_tol.unwrap_or(defaults.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(defaults.abs_tol),
            max_steps: self.max_steps.unwrap_or(defaults.max_steps),
            blowup_threshold: self.blowup_threshold.unwrap_or(defaults.blowup_threshold),
            fit_window: self.fit_window,
            out: self.out.unwrap_or(defaults.out),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{reason}")]
    BadConfig { reason: String },
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("oracle comparison is defined for couplings (1, 1/2) and lambda > 0")]
    OracleDomain,
    #[error("{message}")]
    Io { message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error(transparent)]
    Massless(#[from] MasslessError),
    #[error(transparent)]
    Massive(#[from] MassiveError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

impl CliError {
    /// Machine-readable code written to reports.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::BadConfig { .. } => "BAD_CONFIG",
            CliError::EmptyGrid => "EMPTY_GRID",
            CliError::OracleDomain => "ORACLE_DOMAIN",
            CliError::Io { .. } => "IO_ERROR",
            CliError::Model(ModelError::InvalidBeta { .. }) => "BAD_BETA",
            CliError::Model(ModelError::InvalidMass { .. }) => "INVALID_MASS",
            CliError::Model(ModelError::OmegaOutOfGap { .. }) => "OMEGA_OUT_OF_GAP",
            CliError::Model(ModelError::SingularRadius { .. }) => "SINGULAR_RADIUS",
            CliError::Model(ModelError::NewtonDivergence { .. }) => "NEWTON_DIVERGENCE",
            CliError::Integrator(IntegratorError::R0TooLarge { .. }) => "R0_TOO_LARGE",
            CliError::Integrator(IntegratorError::InvalidConfig { .. }) => "BAD_CONFIG",
            CliError::Integrator(_) => "INTEGRATION_FAILED",
            CliError::Massless(MasslessError::TrivialLambda) => "TRIVIAL_LAMBDA",
            CliError::Massless(MasslessError::WindowTooShort { .. }) => "WINDOW_TOO_SHORT",
            CliError::Massless(MasslessError::DegenerateWindow) => "DEGENERATE_WINDOW",
            CliError::Massless(MasslessError::SolveFailed {
                termination: Termination::StepUnderflow,
            }) => "STEP_UNDERFLOW",
            CliError::Massless(MasslessError::SolveFailed { .. }) => "BLOW_UP",
            CliError::Massless(MasslessError::Integrator(IntegratorError::R0TooLarge {
                ..
            })) => "R0_TOO_LARGE",
            CliError::Massless(MasslessError::Integrator(_)) => "INTEGRATION_FAILED",
            CliError::Massive(MassiveError::TrivialLambda) => "TRIVIAL_LAMBDA",
            CliError::Massive(MassiveError::InvalidLambda { .. }) => "BAD_CONFIG",
            CliError::Massive(MassiveError::BracketInvalid { .. }) => "BRACKET_INVALID",
            CliError::Massive(MassiveError::NoConvergence { .. }) => "NO_CONVERGENCE",
            CliError::Massive(MassiveError::NoBracket { .. }) => "NO_BRACKET",
            CliError::Massive(MassiveError::WindowTooShort { .. }) => "WINDOW_TOO_SHORT",
            CliError::Massive(MassiveError::ZeroSample { .. }) => "DEGENERATE_WINDOW",
            CliError::Massive(MassiveError::Integrator(_)) => "INTEGRATION_FAILED",
            CliError::Variational(VariationalError::NonDecayingProfile { .. }) => {
                "NON_DECAYING_PROFILE"
            }
            CliError::Variational(VariationalError::MassiveProfile) => "BAD_CONFIG",
            CliError::Variational(VariationalError::Model(_)) => "NEWTON_DIVERGENCE",
            CliError::Variational(VariationalError::Massless(_)) => "WINDOW_TOO_SHORT",
        }
    }

    /// 1 validation, 2 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self.code() {
            "BAD_CONFIG" | "EMPTY_GRID" | "ORACLE_DOMAIN" | "IO_ERROR" | "BAD_BETA"
            | "INVALID_MASS" | "OMEGA_OUT_OF_GAP" | "TRIVIAL_LAMBDA" | "SINGULAR_RADIUS" => 1,
            _ => 2,
        }
    }
}

/// Everything a finished invocation hands back to `main`.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Report,
}

fn config_section(cfg: &RunConfig, r_max: f64, fit_window: (f64, f64)) -> ConfigSection {
    ConfigSection {
        mode: cfg.mode.as_str().to_string(),
        beta1: cfg.beta1,
        beta2: cfg.beta2,
        lambda: cfg.lambda.clone(),
        mass: cfg.mass,
        omega: cfg.omega.clone(),
        r_start: cfg.r_start,
        r_max,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_steps: cfg.max_steps as u64,
        blowup_threshold: cfg.blowup_threshold,
        fit_window: [fit_window.0, fit_window.1],
        out: cfg.out.display().to_string(),
    }
}

fn termination_section(p: &crate::integrator::Profile) -> TerminationSection {
    TerminationSection {
        kind: match p.termination {
            Termination::ReachedRMax => "reached_r_max",
            Termination::BlowUp => "blow_up",
            Termination::StepUnderflow => "step_underflow",
        }
        .to_string(),
        r_end: *p.grid.last().unwrap(),
        samples: p.len() as u64,
    }
}

fn integrator_config(cfg: &RunConfig, r_max: f64) -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        r_start: cfg.r_start,
        r_max,
        max_steps: cfg.max_steps,
        blowup_threshold: cfg.blowup_threshold,
    }
}

/// Execute one run (any mode) and write its artifacts under `cfg.out`.
pub fn run(cfg: &RunConfig) -> Outcome {
    let result = match cfg.mode {
        Mode::Sweep => return sweep(cfg),
        Mode::Massless => run_massless(cfg, false),
        Mode::Verify => run_massless(cfg, true),
        Mode::OracleCompare => run_oracle_compare(cfg),
        Mode::Massive => run_massive(cfg),
    };
    let outcome = match result {
        Ok(outcome) => outcome,
        Err(err) => error_outcome(cfg, &err),
    };
    write_report(cfg, &outcome)
}

fn error_outcome(cfg: &RunConfig, err: &CliError) -> Outcome {
    let exit_code = err.exit_code();
    let r_max = cfg.r_max.unwrap_or(f64::NAN);
    Outcome {
        exit_code,
        report: Report {
            run: RunSection {
                mode: cfg.mode.as_str().to_string(),
                status: "error".to_string(),
                exit_code,
            },
            config: config_section(cfg, r_max, cfg.fit_window.unwrap_or((f64::NAN, f64::NAN))),
            termination: None,
            fit: None,
            bound_state: None,
            invariants: None,
            action: None,
            oracle: None,
            error: Some(ErrorSection {
                code: err.code().to_string(),
                message: err.to_string(),
            }),
        },
    }
}

fn write_report(cfg: &RunConfig, outcome: &Outcome) -> Outcome {
    if let Err(e) = std::fs::create_dir_all(&cfg.out)
        .and_then(|_| outcome.report.write(&cfg.out.join("report.toml")))
    {
        eprintln!("cannot write report under {}: {e}", cfg.out.display());
        return Outcome {
            exit_code: 1,
            report: outcome.report.clone(),
        };
    }
    Outcome {
        exit_code: outcome.exit_code,
        report: outcome.report.clone(),
    }
}

fn single_lambda(cfg: &RunConfig) -> Result<f64, CliError> {
    match cfg.lambda.as_slice() {
        [l] => Ok(*l),
        _ => Err(CliError::BadConfig {
            reason: format!(
                "mode {} expects exactly one lambda, got {:?}",
                cfg.mode.as_str(),
                cfg.lambda
            ),
        }),
    }
}

fn run_massless(cfg: &RunConfig, verify_gate: bool) -> Result<Outcome, CliError> {
    let beta = BetaParams::new(cfg.beta1, cfg.beta2)?;
    let lambda = single_lambda(cfg)?;
    let r_max = cfg.r_max.unwrap_or(50.0);
    let icfg = integrator_config(cfg, r_max);
    let fit_window = cfg.fit_window.unwrap_or((0.5 * r_max, r_max));

    let profile = solve_massless(lambda, beta, &icfg)?;
    let fit = asymptotic_fit(&profile, fit_window).ok();
    let verdict = verify_profile_with(&profile, &VerifyThresholds::for_config(&icfg));
    let action = action_value(&profile, beta).ok();
    let dual = dual_check(&profile, beta).ok();

    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io {
        message: format!("cannot create {}: {e}", cfg.out.display()),
    })?;
    write_profile_csv(&cfg.out.join("profile.csv"), &profile).map_err(|e| CliError::Io {
        message: format!("cannot write profile table: {e}"),
    })?;

    let gate_failed = verify_gate && !verdict.passed;
    let exit_code = if gate_failed { 3 } else { 0 };
    Ok(Outcome {
        exit_code,
        report: Report {
            run: RunSection {
                mode: cfg.mode.as_str().to_string(),
                status: if gate_failed { "verification_failed" } else { "ok" }.to_string(),
                exit_code,
            },
            config: config_section(cfg, r_max, fit_window),
            termination: Some(termination_section(&profile)),
            fit: fit.map(|f| FitSection {
                slope_u: f.slope_u,
                slope_v: f.slope_v,
                l: f.l,
                c2: f.c2,
                residual_u: f.residual_u,
                residual_v: f.residual_v,
                window_lo: f.fit_window.0,
                window_hi: f.fit_window.1,
            }),
            bound_state: None,
            invariants: Some(InvariantsSection {
                identity_max_rel: verdict.identity_max_rel,
                monotonicity_violations: verdict.monotonicity_violations as u64,
                positivity_violations: verdict.positivity_violations as u64,
                decay_lower_bounded: verdict.decay_lower_bounded,
                decay_upper_bounded: verdict.decay_upper_bounded,
                fd_residual_uv: verdict.fd_residual_uv,
                fd_residual_energy: verdict.fd_residual_energy,
                pde_residual_max: verdict.pde_residual_max,
                passed: verdict.passed,
            }),
            action: action.map(|a| ActionSection {
                kinetic: a.kinetic,
                potential: a.potential,
                action: a.action,
                dual_action: a.dual_action,
                nehari_residual: a.nehari_residual,
                dual_discrepancy: dual.unwrap_or(f64::NAN),
            }),
            oracle: None,
            error: gate_failed.then(|| ErrorSection {
                code: "VERIFICATION_FAILED".to_string(),
                message: "profile diagnostics exceeded tolerances".to_string(),
            }),
        },
    })
}

fn run_oracle_compare(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let beta = BetaParams::new(cfg.beta1, cfg.beta2)?;
    let lambda = single_lambda(cfg)?;
    if lambda == 0.0 {
        return Err(CliError::Massless(MasslessError::TrivialLambda));
    }
    // the closed form exists exactly at the isotropic couplings
    if !(cfg.beta1 == 1.0 && cfg.beta2 == 0.5 && lambda > 0.0) {
        return Err(CliError::OracleDomain);
    }
    let r_max = cfg.r_max.unwrap_or(50.0);
    let icfg = integrator_config(cfg, r_max);
    let fit_window = cfg.fit_window.unwrap_or((0.5 * r_max, r_max));

    let profile = solve_massless(lambda, beta, &icfg)?;
    let mut err_u = 0.0f64;
    let mut err_v = 0.0f64;
    for i in 0..profile.len() {
        let (u, v) = isotropic_closed_form(lambda, profile.grid[i]);
        err_u = err_u.max((profile.u[i] - u).abs());
        err_v = err_v.max((profile.v[i] - v).abs());
    }
    let max_err = err_u.max(err_v);

    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io {
        message: format!("cannot create {}: {e}", cfg.out.display()),
    })?;
    write_profile_csv(&cfg.out.join("profile.csv"), &profile).map_err(|e| CliError::Io {
        message: format!("cannot write profile table: {e}"),
    })?;

    let failed = max_err > ORACLE_TOLERANCE;
    let exit_code = if failed { 3 } else { 0 };
    Ok(Outcome {
        exit_code,
        report: Report {
            run: RunSection {
                mode: cfg.mode.as_str().to_string(),
                status: if failed { "verification_failed" } else { "ok" }.to_string(),
                exit_code,
            },
            config: config_section(cfg, r_max, fit_window),
            termination: Some(termination_section(&profile)),
            fit: None,
            bound_state: None,
            invariants: None,
            action: None,
            oracle: Some(OracleSection {
                max_abs_error_u: err_u,
                max_abs_error_v: err_v,
                max_abs_error: max_err,
                tolerance: ORACLE_TOLERANCE,
            }),
            error: failed.then(|| ErrorSection {
                code: "VERIFICATION_FAILED".to_string(),
                message: format!("oracle deviation {max_err:e} exceeds {ORACLE_TOLERANCE:e}"),
            }),
        },
    })
}

fn run_massive(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let beta = BetaParams::new(cfg.beta1, cfg.beta2)?;
    let omega = match cfg.omega.as_slice() {
        [w] => *w,
        _ => {
            return Err(CliError::BadConfig {
                reason: format!("massive mode expects exactly one omega, got {:?}", cfg.omega),
            })
        }
    };
    let mp = MassiveParams::new(cfg.mass, omega)?;
    let base = classification_config(mp);
    let r_max = cfg.r_max.unwrap_or(base.r_max);
    let icfg = integrator_config(cfg, r_max);
    let lambda0 = cfg.lambda.first().copied().unwrap_or(1e-3);

    let bracket = scan_bracket(beta, mp, &icfg, lambda0)?;
    let bound = find_bound_state(beta, mp, &icfg, bracket)?;

    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io {
        message: format!("cannot create {}: {e}", cfg.out.display()),
    })?;
    write_profile_csv(&cfg.out.join("profile.csv"), &bound.profile).map_err(|e| {
        CliError::Io {
            message: format!("cannot write profile table: {e}"),
        }
    })?;

    Ok(Outcome {
        exit_code: 0,
        report: Report {
            run: RunSection {
                mode: cfg.mode.as_str().to_string(),
                status: "ok".to_string(),
                exit_code: 0,
            },
            config: config_section(cfg, r_max, cfg.fit_window.unwrap_or((f64::NAN, f64::NAN))),
            termination: Some(termination_section(&bound.profile)),
            fit: None,
            bound_state: Some(BoundStateSection {
                lambda_star: bound.lambda_star,
                kappa_fit: bound.kappa_fit,
                kappa_theory: bound.kappa_theory,
                kappa_rel_error: (bound.kappa_fit - bound.kappa_theory).abs()
                    / bound.kappa_theory,
                bracket_width: bound.bracket_width,
            }),
            invariants: None,
            action: None,
            oracle: None,
            error: None,
        },
    })
}

/// Run a sweep over lambda (massless rows) or omega (massive rows). Per-run
/// failures land in their row and do not abort the sweep; rows come out
/// ordered by parameter.
pub fn sweep(cfg: &RunConfig) -> Outcome {
    let outcome = match sweep_inner(cfg) {
        Ok(o) => o,
        Err(err) => error_outcome(cfg, &err),
    };
    write_report(cfg, &outcome)
}

fn sweep_inner(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let beta = BetaParams::new(cfg.beta1, cfg.beta2)?;
    let over_omega = cfg.omega.len() > 1;
    let grid: &[f64] = if over_omega { &cfg.omega } else { &cfg.lambda };
    if grid.is_empty() {
        return Err(CliError::EmptyGrid);
    }
    let mut ordered: Vec<f64> = grid.to_vec();
    ordered.sort_by(|a, b| a.total_cmp(b));

    let rows: Vec<SweepRow> = ordered
        .par_iter()
        .map(|&value| {
            if over_omega {
                massive_row(cfg, beta, value)
            } else {
                massless_row(cfg, beta, value)
            }
        })
        .collect();

    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io {
        message: format!("cannot create {}: {e}", cfg.out.display()),
    })?;
    write_sweep_csv(&cfg.out.join("summary.csv"), &rows).map_err(|e| CliError::Io {
        message: format!("cannot write sweep summary: {e}"),
    })?;

    let r_max = cfg.r_max.unwrap_or(if over_omega { f64::NAN } else { 50.0 });
    Ok(Outcome {
        exit_code: 0,
        report: Report {
            run: RunSection {
                mode: cfg.mode.as_str().to_string(),
                status: "ok".to_string(),
                exit_code: 0,
            },
            config: config_section(cfg, r_max, cfg.fit_window.unwrap_or((f64::NAN, f64::NAN))),
            termination: None,
            fit: None,
            bound_state: None,
            invariants: None,
            action: None,
            oracle: None,
            error: None,
        },
    })
}

fn massless_row(cfg: &RunConfig, beta: BetaParams, lambda: f64) -> SweepRow {
    let r_max = cfg.r_max.unwrap_or(50.0);
    let icfg = integrator_config(cfg, r_max);
    let fit_window = cfg.fit_window.unwrap_or((0.5 * r_max, r_max));
    let mut row = SweepRow {
        param_name: "lambda",
        param_value: lambda,
        status: "ok".to_string(),
        ..SweepRow::default()
    };
    let profile = match solve_massless(lambda, beta, &icfg) {
        Ok(p) => p,
        Err(e) => {
            row.status = CliError::from(e).code().to_string();
            return row;
        }
    };
    if let Ok(fit) = asymptotic_fit(&profile, fit_window) {
        row.l = Some(fit.l);
        row.c2 = Some(fit.c2);
        row.slope_u = Some(fit.slope_u);
        row.slope_v = Some(fit.slope_v);
    }
    row.identity_residual = Some(
        verify_profile_with(&profile, &VerifyThresholds::for_config(&icfg)).identity_max_rel,
    );
    if let Ok(a) = action_value(&profile, beta) {
        row.action = Some(a.action);
    }
    row
}

fn massive_row(cfg: &RunConfig, beta: BetaParams, omega: f64) -> SweepRow {
    let mut row = SweepRow {
        param_name: "omega",
        param_value: omega,
        status: "ok".to_string(),
        ..SweepRow::default()
    };
    let mp = match MassiveParams::new(cfg.mass, omega) {
        Ok(mp) => mp,
        Err(e) => {
            row.status = CliError::from(e).code().to_string();
            return row;
        }
    };
    let base = classification_config(mp);
    let icfg = integrator_config(cfg, cfg.r_max.unwrap_or(base.r_max));
    let lambda0 = cfg.lambda.first().copied().unwrap_or(1e-3);
    let result = scan_bracket(beta, mp, &icfg, lambda0)
        .and_then(|bracket| find_bound_state(beta, mp, &icfg, bracket));
    match result {
        Ok(bound) => row.kappa_fit = Some(bound.kappa_fit),
        Err(e) => row.status = CliError::from(e).code().to_string(),
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!(Mode::parse("massless"), Some(Mode::Massless));
        assert_eq!(Mode::parse("Oracle-Compare"), Some(Mode::OracleCompare));
        assert_eq!(Mode::parse("oracle_compare"), Some(Mode::OracleCompare));
        assert_eq!(Mode::parse("SWEEP"), Some(Mode::Sweep));
        assert_eq!(Mode::parse("nope"), None);
    }

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let file: Overrides = toml::from_str(
            r#"
            mode = "verify"
            beta2 = 0.7
            lambda = [0.5, 1.0]
            rel_tol = 1e-8
            fit_window = [20.0, 45.0]
            "#,
        )
        .unwrap();
        let flags = Overrides {
            beta2: Some(0.9),
            ..Default::default()
        };
        let cfg = flags.over(file).resolve().unwrap();
        assert_eq!(cfg.mode, Mode::Verify);
        assert_eq!(cfg.beta2, 0.9); // flag wins
        assert_eq!(cfg.rel_tol, 1e-8); // file wins over default
        assert_eq!(cfg.beta1, 1.0); // default
        assert_eq!(cfg.lambda, vec![0.5, 1.0]);
        assert_eq!(cfg.fit_window, Some((20.0, 45.0)));
    }

    #[test]
    fn list_parsing() {
        let parsed = OneOrMany::parse_list("0.5, 1, 2").unwrap().into_vec();
        assert_eq!(parsed, vec![0.5, 1.0, 2.0]);
        assert!(OneOrMany::parse_list("a,b").is_err());
        assert!(OneOrMany::parse_list("").unwrap().into_vec().is_empty());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let parsed: Result<Overrides, _> = toml::from_str("betamax = 1.0");
        assert!(parsed.is_err());
    }

    #[test]
    fn error_codes_and_exit_classes() {
        let e = CliError::Massless(MasslessError::TrivialLambda);
        assert_eq!(e.code(), "TRIVIAL_LAMBDA");
        assert_eq!(e.exit_code(), 1);

        let e = CliError::Model(ModelError::OmegaOutOfGap { m: 1.0, omega: 1.5 });
        assert_eq!(e.code(), "OMEGA_OUT_OF_GAP");
        assert_eq!(e.exit_code(), 1);

        let e = CliError::Massive(MassiveError::NoConvergence { lo: 1.0, hi: 2.0 });
        assert_eq!(e.code(), "NO_CONVERGENCE");
        assert_eq!(e.exit_code(), 2);
    }
}
