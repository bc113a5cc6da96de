//! Radial solver and verification suite for weakly localized stationary
//! states of two-dimensional cubic Dirac systems.
//!
//! The crate computes the radial profiles (u, v) of the symmetric ansatz for
//! both the massless system (algebraically decaying states) and the gapped
//! system (exponentially decaying bound states found by shooting), and
//! cross-checks them against the closed-form isotropic solution, conserved
//! and dissipated quantities, convex-duality identities, and the action
//! functional.

pub mod cli;
pub mod integrator;
pub mod massive;
pub mod massless;
pub mod model;
pub mod numerics;
pub mod variational;

pub use integrator::{
    integrate, series_start, shifted_integrate, Event, EventKind, EventSpec, IntegratorConfig,
    IntegratorError, Profile, Termination,
};
pub use massive::{classify, decay_fit, find_bound_state, scan_bracket, BoundState, ShootOutcome};
pub use massless::{
    asymptotic_fit, isotropic_closed_form, rescale, solve_massless, verify_profile,
    AsymptoticFit, ProfileReport, ScaleFactor,
};
pub use model::{
    hamiltonian, hamiltonian_grad, hessian_det, legendre, limit_field, massive_field,
    massless_field, BetaParams, Conjugate, DualPoint, MassiveParams, ModelError, TrajectoryState,
};
pub use variational::{action_value, dual_check, ActionReport};
