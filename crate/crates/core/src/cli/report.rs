//! Run-report document and profile table writers.
//!
//! One report per run, TOML-structured: human-readable, machine-parseable,
//! and embedding the fully resolved config so every artifact can be
//! reproduced from its own header. Profile tables are plain CSV with radii
//! ascending and 17 significant digits, enough for a lossless f64
//! round-trip. Nothing here depends on wall-clock or environment, so
//! repeated runs produce byte-identical files.

use crate::integrator::Profile;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub run: RunSection,
    pub config: ConfigSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<TerminationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_state: Option<BoundStateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorSection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSection {
    pub mode: String,
    pub status: String,
    pub exit_code: i32,
}

/// Echo of the fully resolved configuration, defaults included.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigSection {
    pub mode: String,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda: Vec<f64>,
    pub mass: f64,
    pub omega: Vec<f64>,
    pub r_start: f64,
    pub r_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: u64,
    pub blowup_threshold: f64,
    pub fit_window: [f64; 2],
    pub out: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TerminationSection {
    pub kind: String,
    pub r_end: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSection {
    pub slope_u: f64,
    pub slope_v: f64,
    pub l: f64,
    pub c2: f64,
    pub residual_u: f64,
    pub residual_v: f64,
    pub window_lo: f64,
    pub window_hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundStateSection {
    pub lambda_star: f64,
    pub kappa_fit: f64,
    pub kappa_theory: f64,
    pub kappa_rel_error: f64,
    pub bracket_width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantsSection {
    pub identity_max_rel: f64,
    pub monotonicity_violations: u64,
    pub positivity_violations: u64,
    pub decay_lower_bounded: bool,
    pub decay_upper_bounded: bool,
    pub fd_residual_uv: f64,
    pub fd_residual_energy: f64,
    pub pde_residual_max: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ActionSection {
    pub kinetic: f64,
    pub potential: f64,
    pub action: f64,
    pub dual_action: f64,
    pub nehari_residual: f64,
    pub dual_discrepancy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSection {
    pub max_abs_error_u: f64,
    pub max_abs_error_v: f64,
    pub max_abs_error: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSection {
    pub code: String,
    pub message: String,
}

impl Report {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_toml())
    }
}

/// 17 significant digits: lossless f64 round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Profile table: `r,u,v,H,uv_minus_2rH`, radii ascending.
pub fn write_profile_csv(path: &Path, p: &Profile) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "r,u,v,H,uv_minus_2rH")?;
    for i in 0..p.len() {
        let h = p.hamiltonian(i);
        let residual = p.u[i] * p.v[i] - 2.0 * p.grid[i] * h;
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(p.grid[i]),
            fmt_f64(p.u[i]),
            fmt_f64(p.v[i]),
            fmt_f64(h),
            fmt_f64(residual)
        )?;
    }
    out.flush()
}

/// One row of a sweep summary; empty fields mean "not applicable here".
#[derive(Debug, Clone, Default)]
pub struct SweepRow {
    pub param_name: &'static str,
    pub param_value: f64,
    pub l: Option<f64>,
    pub c2: Option<f64>,
    pub slope_u: Option<f64>,
    pub slope_v: Option<f64>,
    pub action: Option<f64>,
    pub identity_residual: Option<f64>,
    pub kappa_fit: Option<f64>,
    pub status: String,
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "param_name,param_value,l,c2,slope_u,slope_v,action,identity_residual,kappa_fit,status"
    )?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            row.param_name,
            fmt_f64(row.param_value),
            opt(row.l),
            opt(row.c2),
            opt(row.slope_u),
            opt(row.slope_v),
            opt(row.action),
            opt(row.identity_residual),
            opt(row.kappa_fit),
            row.status
        )?;
    }
    out.flush()
}
