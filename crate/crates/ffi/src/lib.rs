//! C ABI over the dirac2d radial solver.
//!
//! Profiles travel across the boundary as opaque handles created by the
//! solve entry points and released with `dirac2d_profile_free`; scalar
//! results land in caller-provided structs. Every entry point returns a
//! status code and never unwinds. The generated header lives at
//! `include/dirac2d.h`.
//!
//! Pointer contracts (which arguments may be null, required array lengths,
//! handle ownership) are stated on each entry point.
#![allow(clippy::missing_safety_doc)]

use dirac2d::integrator::IntegratorConfig;
use dirac2d::massive::{classification_config, find_bound_state, scan_bracket};
use dirac2d::massless::{
    asymptotic_fit, isotropic_closed_form, rescale, solve_massless, verify_profile, ScaleFactor,
};
use dirac2d::model::{BetaParams, DualPoint, MassiveParams};
use dirac2d::variational::action_value;
use dirac2d::Profile;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dirac2dStatus {
    Ok = 0,
    /// A parameter fails its domain constraint.
    InvalidArgument = 1,
    /// The computation ran but did not converge or left its guard rails.
    NumericalFailure = 2,
    /// A required pointer was null.
    NullPointer = 3,
}

/// Opaque radial profile handle.
pub struct Dirac2dProfile {
    inner: Profile,
}

/// Converged bound-state summary.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Dirac2dBoundState {
    pub lambda_star: f64,
    pub kappa_fit: f64,
    pub kappa_theory: f64,
    pub bracket_width: f64,
}

/// Power-law tail fit of a massless profile.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Dirac2dAsymptoticFit {
    pub l: f64,
    pub c2: f64,
    pub slope_u: f64,
    pub slope_v: f64,
    pub residual_u: f64,
    pub residual_v: f64,
}

/// Action integrals of a massless profile.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Dirac2dAction {
    pub kinetic: f64,
    pub potential: f64,
    pub action: f64,
    pub dual_action: f64,
    pub nehari_residual: f64,
}

/// Diagnostic summary of a profile's invariants.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Dirac2dProfileReport {
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

static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dirac2d_version() -> *const c_char {
    VERSION.as_ptr() as *const c_char
}

/// Quartic energy H(u, v) for couplings (beta1, beta2); NaN if the couplings
/// are out of range.
#[no_mangle]
pub extern "C" fn dirac2d_hamiltonian(u: f64, v: f64, beta1: f64, beta2: f64) -> f64 {
    match BetaParams::new(beta1, beta2) {
        Ok(beta) => dirac2d::model::hamiltonian(u, v, beta),
        Err(_) => f64::NAN,
    }
}

/// Convex conjugate H*(w, z) and its maximizer. Any of the output pointers
/// may be null to skip that value.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_legendre(
    w: f64,
    z: f64,
    beta1: f64,
    beta2: f64,
    value: *mut f64,
    argmax_u: *mut f64,
    argmax_v: *mut f64,
) -> Dirac2dStatus {
    let Ok(beta) = BetaParams::new(beta1, beta2) else {
        return Dirac2dStatus::InvalidArgument;
    };
    match dirac2d::model::legendre(DualPoint::new(w, z), beta) {
        Ok(conj) => {
            if !value.is_null() {
                *value = conj.value;
            }
            if !argmax_u.is_null() {
                *argmax_u = conj.argmax.0;
            }
            if !argmax_v.is_null() {
                *argmax_v = conj.argmax.1;
            }
            Dirac2dStatus::Ok
        }
        Err(_) => Dirac2dStatus::NumericalFailure,
    }
}

/// Exact isotropic solution (couplings (1, 1/2)) with v(0) = lambda > 0.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_closed_form(
    lambda: f64,
    r: f64,
    u: *mut f64,
    v: *mut f64,
) -> Dirac2dStatus {
    if u.is_null() || v.is_null() {
        return Dirac2dStatus::NullPointer;
    }
    if !lambda.is_finite() || !r.is_finite() || lambda <= 0.0 || r < 0.0 {
        return Dirac2dStatus::InvalidArgument;
    }
    let (cu, cv) = isotropic_closed_form(lambda, r);
    *u = cu;
    *v = cv;
    Dirac2dStatus::Ok
}

fn config_from(r_start: f64, r_max: f64, rel_tol: f64, abs_tol: f64) -> IntegratorConfig {
    let mut cfg = IntegratorConfig::default();
    if r_start > 0.0 {
        cfg.r_start = r_start;
    }
    if r_max > 0.0 {
        cfg.r_max = r_max;
    }
    if rel_tol > 0.0 {
        cfg.rel_tol = rel_tol;
    }
    if abs_tol > 0.0 {
        cfg.abs_tol = abs_tol;
    }
    cfg
}

/// Solve the massless Cauchy problem. Pass zero (or any non-positive value)
/// for r_start / r_max / rel_tol / abs_tol to take the defaults
/// (1e-4, 50, 1e-10, 1e-12). On success `*out` owns the profile.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_solve_massless(
    lambda: f64,
    beta1: f64,
    beta2: f64,
    r_start: f64,
    r_max: f64,
    rel_tol: f64,
    abs_tol: f64,
    out: *mut *mut Dirac2dProfile,
) -> Dirac2dStatus {
    if out.is_null() {
        return Dirac2dStatus::NullPointer;
    }
    let Ok(beta) = BetaParams::new(beta1, beta2) else {
        return Dirac2dStatus::InvalidArgument;
    };
    if lambda == 0.0 || !lambda.is_finite() {
        return Dirac2dStatus::InvalidArgument;
    }
    let cfg = config_from(r_start, r_max, rel_tol, abs_tol);
    let result = catch_unwind(AssertUnwindSafe(|| solve_massless(lambda, beta, &cfg)));
    match result {
        Ok(Ok(profile)) => {
            *out = Box::into_raw(Box::new(Dirac2dProfile { inner: profile }));
            Dirac2dStatus::Ok
        }
        _ => Dirac2dStatus::NumericalFailure,
    }
}

/// Locate the bound state of the gapped system for mass m > 0 and a
/// frequency inside the gap, by a geometric bracket scan and bisection. On
/// success fills `info` and, when `out` is non-null, hands back the decaying
/// profile.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_find_bound_state(
    beta1: f64,
    beta2: f64,
    mass: f64,
    omega: f64,
    info: *mut Dirac2dBoundState,
    out: *mut *mut Dirac2dProfile,
) -> Dirac2dStatus {
    if info.is_null() {
        return Dirac2dStatus::NullPointer;
    }
    let Ok(beta) = BetaParams::new(beta1, beta2) else {
        return Dirac2dStatus::InvalidArgument;
    };
    let Ok(mp) = MassiveParams::new(mass, omega) else {
        return Dirac2dStatus::InvalidArgument;
    };
    let cfg = classification_config(mp);
    let result = catch_unwind(AssertUnwindSafe(|| {
        let bracket = scan_bracket(beta, mp, &cfg, 1e-3)?;
        find_bound_state(beta, mp, &cfg, bracket)
    }));
    match result {
        Ok(Ok(bound)) => {
            *info = Dirac2dBoundState {
                lambda_star: bound.lambda_star,
                kappa_fit: bound.kappa_fit,
                kappa_theory: bound.kappa_theory,
                bracket_width: bound.bracket_width,
            };
            if !out.is_null() {
                *out = Box::into_raw(Box::new(Dirac2dProfile {
                    inner: bound.profile,
                }));
            }
            Dirac2dStatus::Ok
        }
        _ => Dirac2dStatus::NumericalFailure,
    }
}

/// Number of grid samples held by a profile; zero for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_profile_len(profile: *const Dirac2dProfile) -> usize {
    if profile.is_null() {
        0
    } else {
        (*profile).inner.len()
    }
}

/// Copy the grid and both components into caller-provided arrays of length
/// `len` (= `dirac2d_profile_len`). Any destination may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_profile_copy(
    profile: *const Dirac2dProfile,
    r: *mut f64,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> Dirac2dStatus {
    if profile.is_null() {
        return Dirac2dStatus::NullPointer;
    }
    let p = &(*profile).inner;
    if len != p.len() {
        return Dirac2dStatus::InvalidArgument;
    }
    if !r.is_null() {
        std::slice::from_raw_parts_mut(r, len).copy_from_slice(&p.grid);
    }
    if !u.is_null() {
        std::slice::from_raw_parts_mut(u, len).copy_from_slice(&p.u);
    }
    if !v.is_null() {
        std::slice::from_raw_parts_mut(v, len).copy_from_slice(&p.v);
    }
    Dirac2dStatus::Ok
}

/// Initial amplitude v(0) of the producing run; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_profile_lambda(profile: *const Dirac2dProfile) -> f64 {
    if profile.is_null() {
        f64::NAN
    } else {
        (*profile).inner.lambda
    }
}

/// Power-law tail fit over [r_lo, r_hi] (needs at least 10 samples there).
#[no_mangle]
pub unsafe extern "C" fn dirac2d_profile_fit(
    profile: *const Dirac2dProfile,
    r_lo: f64,
    r_hi: f64,
    out: *mut Dirac2dAsymptoticFit,
) -> Dirac2dStatus {
    if profile.is_null() || out.is_null() {
        return Dirac2dStatus::NullPointer;
    }
    match asymptotic_fit(&(*profile).inner, (r_lo, r_hi)) {
        Ok(fit) => {
            *out = Dirac2dAsymptoticFit {
                l: fit.l,
                c2: fit.c2,
                slope_u: fit.slope_u,
                slope_v: fit.slope_v,
                residual_u: fit.residual_u,
                residual_v: fit.residual_v,
            };
            Dirac2dStatus::Ok
        }
        Err(_) => Dirac2dStatus::InvalidArgument,
    }
}

/// Action integrals of a decaying massless profile.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_profile_action(
    profile: *const Dirac2dProfile,
    out: *mut Dirac2dAction,
) -> Dirac2dStatus {
    if profile.is_null() || out.is_null() {
        return Dirac2dStatus::NullPointer;
    }
    let p = &(*profile).inner;
    let result = catch_unwind(AssertUnwindSafe(|| action_value(p, p.beta)));
    match result {
        Ok(Ok(a)) => {
            *out = Dirac2dAction {
                kinetic: a.kinetic,
                potential: a.potential,
                action: a.action,
                dual_action: a.dual_action,
                nehari_residual: a.nehari_residual,
            };
            Dirac2dStatus::Ok
        }
        _ => Dirac2dStatus::NumericalFailure,
    }
}

/// Evaluate the diagnostic identities of the massless theory on a profile.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_profile_verify(
    profile: *const Dirac2dProfile,
    out: *mut Dirac2dProfileReport,
) -> Dirac2dStatus {
    if profile.is_null() || out.is_null() {
        return Dirac2dStatus::NullPointer;
    }
    let report = verify_profile(&(*profile).inner);
    *out = Dirac2dProfileReport {
        identity_max_rel: report.identity_max_rel,
        monotonicity_violations: report.monotonicity_violations as u64,
        positivity_violations: report.positivity_violations as u64,
        decay_lower_bounded: report.decay_lower_bounded,
        decay_upper_bounded: report.decay_upper_bounded,
        fd_residual_uv: report.fd_residual_uv,
        fd_residual_energy: report.fd_residual_energy,
        pde_residual_max: report.pde_residual_max,
        passed: report.passed,
    };
    Dirac2dStatus::Ok
}

/// Apply the scaling symmetry, producing a new profile handle.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_profile_rescale(
    profile: *const Dirac2dProfile,
    delta: f64,
    out: *mut *mut Dirac2dProfile,
) -> Dirac2dStatus {
    if profile.is_null() || out.is_null() {
        return Dirac2dStatus::NullPointer;
    }
    let Ok(scale) = ScaleFactor::new(delta) else {
        return Dirac2dStatus::InvalidArgument;
    };
    let scaled = rescale(&(*profile).inner, scale);
    *out = Box::into_raw(Box::new(Dirac2dProfile { inner: scaled }));
    Dirac2dStatus::Ok
}

/// Release a profile handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn dirac2d_profile_free(profile: *mut Dirac2dProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_nul_terminated() {
        let ptr = dirac2d_version();
        let s = unsafe { std::ffi::CStr::from_ptr(ptr) };
        assert_eq!(s.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn hamiltonian_and_validation() {
        assert_eq!(dirac2d_hamiltonian(1.0, 1.0, 1.0, 0.5), 1.0);
        assert!(dirac2d_hamiltonian(1.0, 1.0, 1.0, 2.0).is_nan());
    }

    #[test]
    fn legendre_isotropic_value() {
        let mut value = 0.0;
        let status = unsafe {
            dirac2d_legendre(
                0.6,
                0.8,
                1.0,
                0.5,
                &mut value,
                std::ptr::null_mut(),
                std::ptr::null_mut(),
            )
        };
        assert_eq!(status, Dirac2dStatus::Ok);
        assert!((value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn closed_form_round_trip() {
        let (mut u, mut v) = (0.0, 0.0);
        let status = unsafe { dirac2d_closed_form(2f64.sqrt(), 1.0, &mut u, &mut v) };
        assert_eq!(status, Dirac2dStatus::Ok);
        assert!((u - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((v - 2f64.sqrt() / 2.0).abs() < 1e-15);

        let status = unsafe { dirac2d_closed_form(-1.0, 1.0, &mut u, &mut v) };
        assert_eq!(status, Dirac2dStatus::InvalidArgument);
        let status =
            unsafe { dirac2d_closed_form(1.0, 1.0, std::ptr::null_mut(), &mut v) };
        assert_eq!(status, Dirac2dStatus::NullPointer);
    }

    #[test]
    fn solve_and_inspect_profile() {
        let mut handle: *mut Dirac2dProfile = std::ptr::null_mut();
        let status = unsafe {
            dirac2d_solve_massless(2f64.sqrt(), 1.0, 0.5, 0.0, 0.0, 0.0, 0.0, &mut handle)
        };
        assert_eq!(status, Dirac2dStatus::Ok);
        let len = unsafe { dirac2d_profile_len(handle) };
        assert!(len > 100);

        let mut r = vec![0.0; len];
        let mut u = vec![0.0; len];
        let mut v = vec![0.0; len];
        let status = unsafe {
            dirac2d_profile_copy(handle, r.as_mut_ptr(), u.as_mut_ptr(), v.as_mut_ptr(), len)
        };
        assert_eq!(status, Dirac2dStatus::Ok);
        // spot check against the closed form
        let (cu, cv) = isotropic_closed_form(2f64.sqrt(), r[len / 2]);
        assert!((u[len / 2] - cu).abs() < 1e-6);
        assert!((v[len / 2] - cv).abs() < 1e-6);

        let mut report = unsafe { std::mem::zeroed::<Dirac2dProfileReport>() };
        let status = unsafe { dirac2d_profile_verify(handle, &mut report) };
        assert_eq!(status, Dirac2dStatus::Ok);
        assert!(report.passed);

        let mut action = unsafe { std::mem::zeroed::<Dirac2dAction>() };
        let status = unsafe { dirac2d_profile_action(handle, &mut action) };
        assert_eq!(status, Dirac2dStatus::Ok);
        assert!((action.potential - 0.5).abs() < 1e-4);

        let mut fit = unsafe { std::mem::zeroed::<Dirac2dAsymptoticFit>() };
        let status = unsafe { dirac2d_profile_fit(handle, 25.0, 50.0, &mut fit) };
        assert_eq!(status, Dirac2dStatus::Ok);
        assert!((fit.slope_u + 1.0).abs() < 0.05);

        let mut scaled: *mut Dirac2dProfile = std::ptr::null_mut();
        let status = unsafe { dirac2d_profile_rescale(handle, 4.0, &mut scaled) };
        assert_eq!(status, Dirac2dStatus::Ok);
        assert!((unsafe { dirac2d_profile_lambda(scaled) } - 2.0 * 2f64.sqrt()).abs() < 1e-12);

        unsafe {
            dirac2d_profile_free(scaled);
            dirac2d_profile_free(handle);
            dirac2d_profile_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn bound_state_through_ffi() {
        let mut info = unsafe { std::mem::zeroed::<Dirac2dBoundState>() };
        let mut handle: *mut Dirac2dProfile = std::ptr::null_mut();
        let status =
            unsafe { dirac2d_find_bound_state(1.0, 0.5, 1.0, 0.0, &mut info, &mut handle) };
        assert_eq!(status, Dirac2dStatus::Ok);
        assert!((info.kappa_fit - 1.0).abs() < 0.05);
        assert!(info.lambda_star > 0.0);
        assert!(unsafe { dirac2d_profile_len(handle) } > 100);
        unsafe { dirac2d_profile_free(handle) };

        let status = unsafe {
            dirac2d_find_bound_state(1.0, 0.5, 1.0, 1.5, &mut info, std::ptr::null_mut())
        };
        assert_eq!(status, Dirac2dStatus::InvalidArgument);
    }
}
