//! Embedded Dormand-Prince 5(4) stepper with PI step-size control and a
//! cubic-Hermite continuous extension on every accepted step.
//!
//! The driver is dimension-generic; the radial systems use N = 2 and the
//! scalar self-tests use N = 1. Integration is forward-only (t_end > t0);
//! the radial runs never need the reverse direction.

use thiserror::Error;

/// Right-hand side of an autonomous-or-not ODE system dy/dt = f(t, y).
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

/// Per-run error tolerances; the local error per step is held below
/// abs + rel * |y| componentwise (in the RMS sense).
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

/// One accepted step with the data needed for dense output.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
    /// Coefficients of the fourth-order continuous extension of the pair.
    cont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Dense-output interpolant of the accepted step; fourth-order accurate,
    /// so its error tracks the step error rather than degrading to the
    /// endpoints' Hermite cubic.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let theta = ((t - self.t0) / h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        std::array::from_fn(|i| {
            self.cont[0][i]
                + theta
                    * (self.cont[1][i]
                        + theta1
                            * (self.cont[2][i]
                                + theta * (self.cont[3][i] + theta1 * self.cont[4][i])))
        })
    }
}

/// Why the driver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Reached t_end.
    ReachedEnd,
    /// The controller drove the step below machine-representable progress.
    StepUnderflow,
    /// The step callback requested a halt.
    Halted,
}

#[derive(Debug, Clone, Copy)]
pub struct Finish<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub status: Status,
    pub accepted_steps: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DopriError {
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("invalid integration interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
}

/// Whether to keep stepping after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Halt,
}

// Dormand-Prince 5(4) coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// 5th-order minus 4th-order weights, applied to the stages for the local
// error estimate.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output weights of the pair's continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MAX_SHRINK: f64 = 0.1;
// PI controller exponents for a 4th-order error estimate.
const CTRL_BETA: f64 = 0.04;
const CTRL_ALPHA: f64 = 0.2 - 0.75 * CTRL_BETA;

/// Drive the stepper from (t0, y0) to t_end, invoking `on_step` after every
/// accepted step. The callback may halt the run (blow-up detection, event
/// stop). Local error per step is bounded by tol.abs + tol.rel * |y|.
pub fn integrate_adaptive<const N: usize, S, F>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: Tolerances,
    max_steps: usize,
    mut on_step: F,
) -> Result<Finish<N>, DopriError>
where
    S: OdeSystem<N>,
    F: FnMut(&Step<N>) -> Control,
{
    if !t0.is_finite() || !t_end.is_finite() || t_end <= t0 {
        return Err(DopriError::InvalidInterval { t0, t1: t_end });
    }

    let mut t = t0;
    let mut y = y0;
    let mut f = sys.rhs(t, &y);
    let mut evals = 1usize;
    let mut accepted = 0usize;

    let mut h = initial_step(sys, t, &y, &f, t_end, tol, &mut evals);
    let mut err_old: f64 = 1e-4;

    for _ in 0..max_steps {
        if t >= t_end {
            break;
        }
        let underflow_floor = (16.0 * f64::EPSILON * t.abs()).max(1e-300);
        if h < underflow_floor {
            return Ok(Finish {
                t,
                y,
                status: Status::StepUnderflow,
                accepted_steps: accepted,
                rhs_evals: evals,
            });
        }
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }

        // Stages (FSAL: k7 becomes k1 of the next step on acceptance).
        let k1 = f;
        let y2 = axpy(&y, h, &[(A21, &k1)]);
        let k2 = sys.rhs(t + C2 * h, &y2);
        let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = sys.rhs(t + C3 * h, &y3);
        let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = sys.rhs(t + C4 * h, &y4);
        let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = sys.rhs(t + C5 * h, &y5);
        let y6 = axpy(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let k6 = sys.rhs(t + h, &y6);
        let y_new = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = sys.rhs(t + h, &y_new);
        evals += 6;

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if !err.is_finite() {
            // A stage blew past f64 range: shrink hard and retry.
            h *= MAX_SHRINK;
            continue;
        }

        if err <= 1.0 {
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                cont[4][i] = h
                    * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let step = Step {
                t0: t,
                y0: y,
                f0: k1,
                t1: t + h,
                y1: y_new,
                f1: k7,
                cont,
            };
            t += h;
            y = y_new;
            f = k7;
            accepted += 1;
            if !y.iter().all(|c| c.is_finite()) {
                return Err(DopriError::NonFiniteState { t });
            }

            let err_clamped = err.max(1e-10);
            let factor = SAFETY * err_clamped.powf(-CTRL_ALPHA) * err_old.powf(CTRL_BETA);
            h *= factor.clamp(MAX_SHRINK, MAX_GROWTH);
            err_old = err_clamped;

            if on_step(&step) == Control::Halt {
                return Ok(Finish {
                    t,
                    y,
                    status: Status::Halted,
                    accepted_steps: accepted,
                    rhs_evals: evals,
                });
            }
            if last || t >= t_end {
                return Ok(Finish {
                    t,
                    y,
                    status: Status::ReachedEnd,
                    accepted_steps: accepted,
                    rhs_evals: evals,
                });
            }
        } else {
            let factor = SAFETY * err.powf(-0.2);
            h *= factor.clamp(MAX_SHRINK, 1.0);
        }
    }

    if t >= t_end {
        Ok(Finish {
            t,
            y,
            status: Status::ReachedEnd,
            accepted_steps: accepted,
            rhs_evals: evals,
        })
    } else {
        Err(DopriError::MaxStepsExceeded { t, max_steps })
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Standard automatic initial step: balance the scaled state against the
/// scaled slope, refine with one explicit Euler probe.
fn initial_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t_end: f64,
    tol: Tolerances,
    evals: &mut usize,
) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = tol.abs + tol.rel * y0[i].abs();
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = (d0 / N as f64).sqrt();
    d1 = (d1 / N as f64).sqrt();

    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(t_end - t0);

    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + h0, &y1);
    *evals += 1;

    let mut d2 = 0.0;
    for i in 0..N {
        let sc = tol.abs + tol.rel * y0[i].abs();
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    d2 = (d2 / N as f64).sqrt() / h0;

    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(t_end - t0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_reference() {
        // u' = -u, u(0) = 1 over [0, 1]: u(1) = exp(-1) to 1e-8 at rel 1e-10.
        let sys = |_t: f64, y: &[f64; 1]| [-y[0]];
        let fin = integrate_adaptive(
            &sys,
            0.0,
            [1.0],
            1.0,
            Tolerances {
                rel: 1e-10,
                abs: 1e-12,
            },
            100_000,
            |_| Control::Continue,
        )
        .unwrap();
        assert_eq!(fin.status, Status::ReachedEnd);
        assert!(
            (fin.y[0] - (-1.0f64).exp()).abs() <= 1e-8,
            "u(1) = {} vs {}",
            fin.y[0],
            (-1.0f64).exp()
        );
    }

    #[test]
    fn harmonic_oscillator_period() {
        let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let tf = 2.0 * std::f64::consts::PI;
        let fin = integrate_adaptive(
            &sys,
            0.0,
            [1.0, 0.0],
            tf,
            Tolerances {
                rel: 1e-12,
                abs: 1e-12,
            },
            1_000_000,
            |_| Control::Continue,
        )
        .unwrap();
        assert!((fin.y[0] - 1.0).abs() < 1e-9);
        assert!(fin.y[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_accuracy() {
        // Interpolated values of exp(-t) inside accepted steps.
        let sys = |_t: f64, y: &[f64; 1]| [-y[0]];
        let mut worst: f64 = 0.0;
        integrate_adaptive(
            &sys,
            0.0,
            [1.0],
            2.0,
            Tolerances {
                rel: 1e-9,
                abs: 1e-12,
            },
            100_000,
            |step| {
                for k in 1..8 {
                    let t = step.t0 + (step.t1 - step.t0) * k as f64 / 8.0;
                    let y = step.interpolate(t);
                    worst = worst.max((y[0] - (-t).exp()).abs());
                }
                Control::Continue
            },
        )
        .unwrap();
        assert!(worst < 1e-9, "dense output error {worst}");
    }

    #[test]
    fn halting_from_callback() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0]];
        let fin = integrate_adaptive(
            &sys,
            0.0,
            [1.0],
            50.0,
            Tolerances {
                rel: 1e-8,
                abs: 1e-10,
            },
            1_000_000,
            |step| {
                if step.y1[0] > 10.0 {
                    Control::Halt
                } else {
                    Control::Continue
                }
            },
        )
        .unwrap();
        assert_eq!(fin.status, Status::Halted);
        assert!(fin.t < 50.0);
    }

    #[test]
    fn step_budget_is_enforced() {
        let sys = |_t: f64, y: &[f64; 1]| [-y[0]];
        let res = integrate_adaptive(
            &sys,
            0.0,
            [1.0],
            1000.0,
            Tolerances {
                rel: 1e-12,
                abs: 1e-14,
            },
            10,
            |_| Control::Continue,
        );
        assert!(matches!(res, Err(DopriError::MaxStepsExceeded { .. })));
    }

    #[test]
    fn rejects_bad_interval() {
        let sys = |_t: f64, y: &[f64; 1]| [-y[0]];
        let tol = Tolerances {
            rel: 1e-8,
            abs: 1e-10,
        };
        assert!(matches!(
            integrate_adaptive(&sys, 1.0, [1.0], 0.0, tol, 100, |_| Control::Continue),
            Err(DopriError::InvalidInterval { .. })
        ));
    }
}
