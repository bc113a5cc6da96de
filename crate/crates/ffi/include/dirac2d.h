#ifndef DIRAC2D_H
#define DIRAC2D_H

/* Generated with cbindgen:0.27.0 */

/* Generated by cbindgen from the dirac2d-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum Dirac2dStatus {
  DIRAC2D_STATUS_OK = 0,
  /**
   * A parameter fails its domain constraint.
   */
  DIRAC2D_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The computation ran but did not converge or left its guard rails.
   */
  DIRAC2D_STATUS_NUMERICAL_FAILURE = 2,
  /**
   * A required pointer was null.
   */
  DIRAC2D_STATUS_NULL_POINTER = 3,
} Dirac2dStatus;

/**
 * Opaque radial profile handle.
 */
typedef struct Dirac2dProfile Dirac2dProfile;

/**
 * Converged bound-state summary.
 */
typedef struct Dirac2dBoundState {
  double lambda_star;
  double kappa_fit;
  double kappa_theory;
  double bracket_width;
} Dirac2dBoundState;

/**
 * Power-law tail fit of a massless profile.
 */
typedef struct Dirac2dAsymptoticFit {
  double l;
  double c2;
  double slope_u;
  double slope_v;
  double residual_u;
  double residual_v;
} Dirac2dAsymptoticFit;

/**
 * Action integrals of a massless profile.
 */
typedef struct Dirac2dAction {
  double kinetic;
  double potential;
  double action;
  double dual_action;
  double nehari_residual;
} Dirac2dAction;

/**
 * Diagnostic summary of a profile's invariants.
 */
typedef struct Dirac2dProfileReport {
  double identity_max_rel;
  uint64_t monotonicity_violations;
  uint64_t positivity_violations;
  bool decay_lower_bounded;
  bool decay_upper_bounded;
  double fd_residual_uv;
  double fd_residual_energy;
  double pde_residual_max;
  bool passed;
} Dirac2dProfileReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dirac2d_version(void);

/**
 * Quartic energy H(u, v) for couplings (beta1, beta2); NaN if the couplings
 * are out of range.
 */
double dirac2d_hamiltonian(double u, double v, double beta1, double beta2);

/**
 * Convex conjugate H*(w, z) and its maximizer. Any of the output pointers
 * may be null to skip that value.
 */
enum Dirac2dStatus dirac2d_legendre(double w,
                                    double z,
                                    double beta1,
                                    double beta2,
                                    double *value,
                                    double *argmax_u,
                                    double *argmax_v);

/**
 * Exact isotropic solution (couplings (1, 1/2)) with v(0) = lambda > 0.
 */
enum Dirac2dStatus dirac2d_closed_form(double lambda, double r, double *u, double *v);

/**
 * Solve the massless Cauchy problem. Pass zero (or any non-positive value)
 * for r_start / r_max / rel_tol / abs_tol to take the defaults
 * (1e-4, 50, 1e-10, 1e-12). On success `*out` owns the profile.
 */
enum Dirac2dStatus dirac2d_solve_massless(double lambda,
                                          double beta1,
                                          double beta2,
                                          double r_start,
                                          double r_max,
                                          double rel_tol,
                                          double abs_tol,
                                          struct Dirac2dProfile **out);

/**
 * Locate the bound state of the gapped system for mass m > 0 and a
 * frequency inside the gap, by a geometric bracket scan and bisection. On
 * success fills `info` and, when `out` is non-null, hands back the decaying
 * profile.
 */
enum Dirac2dStatus dirac2d_find_bound_state(double beta1,
                                            double beta2,
                                            double mass,
                                            double omega,
                                            struct Dirac2dBoundState *info,
                                            struct Dirac2dProfile **out);

/**
 * Number of grid samples held by a profile; zero for a null handle.
 */
size_t dirac2d_profile_len(const struct Dirac2dProfile *profile);

/**
 * Copy the grid and both components into caller-provided arrays of length
 * `len` (= `dirac2d_profile_len`). Any destination may be null to skip it.
 */
enum Dirac2dStatus dirac2d_profile_copy(const struct Dirac2dProfile *profile,
                                        double *r,
                                        double *u,
                                        double *v,
                                        size_t len);

/**
 * Initial amplitude v(0) of the producing run; NaN for a null handle.
 */
double dirac2d_profile_lambda(const struct Dirac2dProfile *profile);

/**
 * Power-law tail fit over [r_lo, r_hi] (needs at least 10 samples there).
 */
enum Dirac2dStatus dirac2d_profile_fit(const struct Dirac2dProfile *profile,
                                       double r_lo,
                                       double r_hi,
                                       struct Dirac2dAsymptoticFit *out);

/**
 * Action integrals of a decaying massless profile.
 */
enum Dirac2dStatus dirac2d_profile_action(const struct Dirac2dProfile *profile,
                                          struct Dirac2dAction *out);

/**
 * Evaluate the diagnostic identities of the massless theory on a profile.
 */
enum Dirac2dStatus dirac2d_profile_verify(const struct Dirac2dProfile *profile,
                                          struct Dirac2dProfileReport *out);

/**
 * Apply the scaling symmetry, producing a new profile handle.
 */
enum Dirac2dStatus dirac2d_profile_rescale(const struct Dirac2dProfile *profile,
                                           double delta,
                                           struct Dirac2dProfile **out);

/**
 * Release a profile handle. Null is a no-op.
 */
void dirac2d_profile_free(struct Dirac2dProfile *profile);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIRAC2D_H */
