//! Core algebra of the radial reduction: the quartic energy, its gradient,
//! the cubic vector fields of the singular / limit / massive systems, and the
//! convex conjugate used by the dual formulation.
//!
//! Every function here is a pure map of plain `f64` data; values are `Copy`
//! and freely shareable between threads.

use thiserror::Error;

/// Coupling pair (beta1, beta2) of the cubic nonlinearity.
///
/// The admissible range is `0 < beta2 <= beta1`; outside it the energy loses
/// the convexity that the dual construction relies on, so construction fails
/// rather than extending the theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    beta1: f64,
    beta2: f64,
}

impl BetaParams {
    pub fn new(beta1: f64, beta2: f64) -> Result<Self, ModelError> {
        if !beta1.is_finite() || !beta2.is_finite() || beta2 <= 0.0 || beta2 > beta1 {
            return Err(ModelError::InvalidBeta { beta1, beta2 });
        }
        Ok(Self { beta1, beta2 })
    }

    /// The isotropic pair (1, 1/2), for which the closed-form profile is exact.
    pub fn isotropic() -> Self {
        Self { beta1: 1.0, beta2: 0.5 }
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }
}

/// Instantaneous state (r, u, v) of a radial trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    pub r: f64,
    pub u: f64,
    pub v: f64,
}

impl TrajectoryState {
    pub fn new(r: f64, u: f64, v: f64) -> Self {
        Self { r, u, v }
    }

    pub fn amplitude(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

/// Mass m and frequency omega of the gapped system; omega must lie strictly
/// inside the spectral gap (-m, m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassiveParams {
    m: f64,
    omega: f64,
}

impl MassiveParams {
    pub fn new(m: f64, omega: f64) -> Result<Self, ModelError> {
        if !m.is_finite() || m <= 0.0 {
            return Err(ModelError::InvalidMass { m });
        }
        if !omega.is_finite() || omega <= -m || omega >= m {
            return Err(ModelError::OmegaOutOfGap { m, omega });
        }
        Ok(Self { m, omega })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Decay rate sqrt(m^2 - omega^2) of the linearization at the origin.
    pub fn kappa(&self) -> f64 {
        (self.m * self.m - self.omega * self.omega).sqrt()
    }
}

/// A point (w, z) in the dual variables of the conjugate problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPoint {
    pub w: f64,
    pub z: f64,
}

impl DualPoint {
    pub fn new(w: f64, z: f64) -> Self {
        Self { w, z }
    }

    pub fn norm(&self) -> f64 {
        self.w.hypot(self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid couplings (beta1={beta1}, beta2={beta2}): need 0 < beta2 <= beta1")]
    InvalidBeta { beta1: f64, beta2: f64 },
    #[error("invalid mass m={m}: need m > 0")]
    InvalidMass { m: f64 },
    #[error("frequency omega={omega} outside the spectral gap (-{m}, {m})")]
    OmegaOutOfGap { m: f64, omega: f64 },
    #[error("singular radius r={r}: the radial fields require r > 0")]
    SingularRadius { r: f64 },
    #[error("conjugate Newton solve did not converge: residual {residual} after {iterations} iterations at (w={w}, z={z})")]
    NewtonDivergence {
        w: f64,
        z: f64,
        residual: f64,
        iterations: usize,
    },
}

/// Quartic energy H(u, v) = beta1/4 (u^4 + v^4) + beta2 u^2 v^2.
///
/// Positive definite on the admissible coupling range: zero exactly at the
/// origin.
pub fn hamiltonian(u: f64, v: f64, beta: BetaParams) -> f64 {
    let u2 = u * u;
    let v2 = v * v;
    0.25 * beta.beta1 * (u2 * u2 + v2 * v2) + beta.beta2 * u2 * v2
}

/// Gradient of the energy:
/// dH/du = u (beta1 u^2 + 2 beta2 v^2), dH/dv = v (2 beta2 u^2 + beta1 v^2).
///
/// These two cubics are the building blocks of every radial vector field
/// below.
pub fn hamiltonian_grad(u: f64, v: f64, beta: BetaParams) -> (f64, f64) {
    let u2 = u * u;
    let v2 = v * v;
    let gu = u * (beta.beta1 * u2 + 2.0 * beta.beta2 * v2);
    let gv = v * (2.0 * beta.beta2 * u2 + beta.beta1 * v2);
    (gu, gv)
}

/// Determinant of the energy Hessian,
/// 6 beta1 beta2 (u^4 + v^4) + (9 beta1^2 - 12 beta2^2) u^2 v^2.
///
/// Strictly positive away from the origin whenever 0 < beta2 <= beta1; the
/// sharp lower bound (9/2) beta2^2 (u^4 + v^4) is exercised in the tests.
pub fn hessian_det(u: f64, v: f64, beta: BetaParams) -> f64 {
    let u2 = u * u;
    let v2 = v * v;
    let b1 = beta.beta1;
    let b2 = beta.beta2;
    6.0 * b1 * b2 * (u2 * u2 + v2 * v2) + (9.0 * b1 * b1 - 12.0 * b2 * b2) * u2 * v2
}

/// Value and maximizer of the convex conjugate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugate {
    /// H*(w, z) = <(u, v), (w, z)> - H(u, v) at the maximizer.
    pub value: f64,
    /// The unique (u, v) with grad H(u, v) = (w, z).
    pub argmax: (f64, f64),
}

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;

/// Convex conjugate H*(w, z) = sup over (u, v) of <(u, v), (w, z)> - H(u, v),
/// together with the maximizer.
///
/// The sup is attained at the unique root of grad H(u, v) = (w, z); the root
/// is found by a damped Newton iteration started from the isotropic inverse
/// (u, v) = q |q|^(-2/3) beta1^(-1/3), which is exact at beta2 = beta1/2.
/// Steps are halved until the residual norm decreases. Failure to converge
/// signals a bug, not a domain case: the energy is strictly convex away from
/// the origin on the whole admissible coupling range.
pub fn legendre(q: DualPoint, beta: BetaParams) -> Result<Conjugate, ModelError> {
    let qn = q.norm();
    if qn == 0.0 {
        return Ok(Conjugate {
            value: 0.0,
            argmax: (0.0, 0.0),
        });
    }
    // 1e-12 absolute per the contract; the |q|-proportional part only matters
    // far from the origin where f64 rounding of the cubic already exceeds it.
    let tol = NEWTON_TOL * (1.0 + qn);

    let scale = qn.powf(-2.0 / 3.0) * beta.beta1.powf(-1.0 / 3.0);
    let mut u = q.w * scale;
    let mut v = q.z * scale;
    let (mut gu, mut gv) = hamiltonian_grad(u, v, beta);
    let mut res = (gu - q.w).hypot(gv - q.z);

    for iter in 0..NEWTON_MAX_ITER {
        if res <= tol {
            let value = u * q.w + v * q.z - hamiltonian(u, v, beta);
            return Ok(Conjugate {
                value,
                argmax: (u, v),
            });
        }
        let u2 = u * u;
        let v2 = v * v;
        let huu = 3.0 * beta.beta1 * u2 + 2.0 * beta.beta2 * v2;
        let hvv = 3.0 * beta.beta1 * v2 + 2.0 * beta.beta2 * u2;
        let huv = 4.0 * beta.beta2 * u * v;
        let det = huu * hvv - huv * huv;
        if det == 0.0 || !det.is_finite() {
            return Err(ModelError::NewtonDivergence {
                w: q.w,
                z: q.z,
                residual: res,
                iterations: iter,
            });
        }
        let ru = gu - q.w;
        let rv = gv - q.z;
        let du = (hvv * ru - huv * rv) / det;
        let dv = (huu * rv - huv * ru) / det;

        // Halve the step until the residual norm drops; the Newton direction
        // is a descent direction for it whenever the Hessian is invertible.
        let mut t = 1.0;
        loop {
            let cu = u - t * du;
            let cv = v - t * dv;
            let (cgu, cgv) = hamiltonian_grad(cu, cv, beta);
            let cres = (cgu - q.w).hypot(cgv - q.z);
            if cres < res || t < 1e-12 {
                u = cu;
                v = cv;
                gu = cgu;
                gv = cgv;
                res = cres;
                break;
            }
            t *= 0.5;
        }
    }
    if res <= tol {
        let value = u * q.w + v * q.z - hamiltonian(u, v, beta);
        return Ok(Conjugate {
            value,
            argmax: (u, v),
        });
    }
    Err(ModelError::NewtonDivergence {
        w: q.w,
        z: q.z,
        residual: res,
        iterations: NEWTON_MAX_ITER,
    })
}

/// Right-hand side of the autonomous limit system:
/// du/dr = dH/dv, dv/dr = -dH/du. The energy is exactly conserved along its
/// flow.
pub fn limit_field(u: f64, v: f64, beta: BetaParams) -> (f64, f64) {
    let (gu, gv) = hamiltonian_grad(u, v, beta);
    (gv, -gu)
}

/// Right-hand side of the singular massless system,
/// du/dr = dH/dv - u/r, dv/dr = -dH/du.
///
/// The u/r term is subtracted from the limit field verbatim, so removing it
/// recovers `limit_field` exactly.
pub fn massless_field(s: TrajectoryState, beta: BetaParams) -> Result<(f64, f64), ModelError> {
    if s.r <= 0.0 {
        return Err(ModelError::SingularRadius { r: s.r });
    }
    let (du, dv) = limit_field(s.u, s.v, beta);
    Ok((du - s.u / s.r, dv))
}

/// Right-hand side of the singular gapped system,
/// du/dr = dH/dv - (m - omega) v - u/r, dv/dr = -dH/du - (m + omega) u.
///
/// At m = omega = 0 this coincides with `massless_field`.
pub fn massive_field(
    s: TrajectoryState,
    beta: BetaParams,
    mp: MassiveParams,
) -> Result<(f64, f64), ModelError> {
    if s.r <= 0.0 {
        return Err(ModelError::SingularRadius { r: s.r });
    }
    let (du, dv) = limit_field(s.u, s.v, beta);
    Ok((
        du - (mp.m - mp.omega) * s.v - s.u / s.r,
        dv - (mp.m + mp.omega) * s.u,
    ))
}

pub(crate) fn massive_field_raw(
    r: f64,
    u: f64,
    v: f64,
    beta: BetaParams,
    m: f64,
    omega: f64,
) -> (f64, f64) {
    let (du, dv) = limit_field(u, v, beta);
    (du - (m - omega) * v - u / r, dv - (m + omega) * u)
}
