//! Region-R3 machinery: scaling to the Jupiter neighborhood, the
//! Levi-Civita transform, the regularized Hamiltonian and its quadratic
//! model, fictitious-time integration through collision, and the local
//! collision manifold.
//!
//! Conventions. With epsilon = mu^(1/2), the local chart is
//! u = epsilon u~, t = epsilon * varsigma, and the scaled Hamiltonian is
//! H~(u~, v) = ham_jupiter(epsilon u~, v) + (mu-1)(mu-3)/2, whose energy
//! 1/(2 xi^2) defines the scale xi. The Levi-Civita map is u~ = 2 z^2,
//! v = w / (xi conj(z)) and the regularized Hamiltonian
//!
//!   K_rho(z, w) = xi^2 |z|^2 [ H~(2 z^2, w/(xi conj z)) - 1/(2 xi^2) ]
//!
//! is evaluated here in a closed form that is regular at z = 0 and free of
//! small-mu cancellation:
//!
//!   K_rho = (|w|^2 - |z|^2)/2 - mu^(1/2) xi^2 / 2
//!           - 2 mu^(1/2) xi |z|^2 Im(conj(z) w) + xi^2 |z|^2 W(2 z^2),
//!
//! where W collects the Sun's tidal potential in the scaled chart; its
//! leading term is -(mu/2)(1-mu)(2 u~1^2 - u~2^2). (The quadratic-model
//! printed form of the rotation term differs by an overall factor; the
//! coefficient used here is the one the exact definition produces, which
//! the chart-consistency tests pin down.)
//!
//! Hamiltonian flow in fictitious time sigma satisfies
//! d varsigma / d sigma = 4 xi |z|^2, hence d t / d sigma =
//! 4 xi mu^(1/2) |z|^2 for the physical-time quadrature.

use crate::dynamics::ode::{OdeOptions, Rkf78, StepControl};
use crate::kepler::JupiterCenteredState;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LcError {
    #[error("z = 0 is the collision point: velocity undefined")]
    CollisionPoint,
    #[error("initial condition off the K_rho = 0 shell: |K| = {0}")]
    OffShell(f64),
    #[error("scaled energy {0} outside the window ({1}, {2})")]
    EnergyWindow(f64, f64, f64),
    #[error("regularized integration: {0}")]
    Integration(String),
    #[error("backward orbit failed to reach |u~| = rho within sigma budget")]
    ManifoldTimeout,
}

/// Scaled Jupiter-neighborhood state: u = mu^(1/2) u~, v unscaled;
/// `sigma` carries fictitious-time bookkeeping for spliced trajectories.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScaledState {
    pub u_tilde: [f64; 2],
    pub v: [f64; 2],
    pub sigma: f64,
}

/// Levi-Civita state (z, w) at energy scale xi.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LCState {
    pub z: Complex64,
    pub w: Complex64,
    pub xi: f64,
}

/// Point of the local collision manifold: the state at |u| = rho mu^(1/2)
/// whose forward orbit hits the collision, labeled by the w-phase psi of
/// its collision datum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CollisionManifoldPoint {
    pub psi: f64,
    pub u: [f64; 2],
    pub v: [f64; 2],
    /// Fictitious time spent from the collision to the exit (negative).
    pub sigma_exit: f64,
}

/// u = mu^(1/2) u~ with the time dilation recorded by the caller.
pub fn scale_to_local(s: &JupiterCenteredState, mu: f64) -> ScaledState {
    let eps = mu.sqrt();
    ScaledState {
        u_tilde: [s.u[0] / eps, s.u[1] / eps],
        v: s.v,
        sigma: 0.0,
    }
}

/// Exact inverse of [`scale_to_local`].
pub fn unscale(s: &ScaledState, mu: f64) -> JupiterCenteredState {
    let eps = mu.sqrt();
    JupiterCenteredState {
        u: [eps * s.u_tilde[0], eps * s.u_tilde[1]],
        v: s.v,
    }
}

/// Scaled Hamiltonian H~(u~, v) = ham_jupiter(mu^(1/2) u~, v)
/// + (mu-1)(mu-3)/2, the quantity whose level 1/(2 xi^2) fixes xi.
pub fn scaled_ham(s: &ScaledState, mu: f64) -> Result<f64, crate::dynamics::DynamicsError> {
    let phys = unscale(s, mu);
    Ok(crate::dynamics::ham_jupiter(&phys, mu)? + (mu - 1.0) * (mu - 3.0) / 2.0)
}

/// Forward Levi-Civita transform: z is the principal square root of u~/2,
/// w = xi conj(z) v.
pub fn lc_forward(s: &ScaledState, xi: f64) -> LCState {
    let u = Complex64::new(s.u_tilde[0], s.u_tilde[1]);
    let z = (u / 2.0).sqrt();
    let v = Complex64::new(s.v[0], s.v[1]);
    let w = xi * z.conj() * v;
    LCState { z, w, xi }
}

/// Inverse transform: u~ = 2 z^2, v = w / (xi conj(z)). Both preimages
/// (z, w) and (-z, -w) map to the same scaled state. Fails at z = 0 where
/// the position is fine but the velocity is undefined.
pub fn lc_inverse(s: &LCState) -> Result<ScaledState, LcError> {
    if s.z == Complex64::ZERO {
        return Err(LcError::CollisionPoint);
    }
    let u = 2.0 * s.z * s.z;
    let v = s.w / (s.xi * s.z.conj());
    Ok(ScaledState {
        u_tilde: [u.re, u.im],
        v: [v.re, v.im],
        sigma: 0.0,
    })
}

/// Sun tidal potential in the scaled chart:
/// W(u~) = (1-mu) [1 - eps u~1 - 1/|eps u~ + e1|], eps = mu^(1/2),
/// in a cancellation-free form whose mu -> 0 limit is
/// -(mu/2)(2 u~1^2 - u~2^2) exactly.
fn sun_tidal(u1: f64, u2: f64, mu: f64) -> f64 {
    let eps = mu.sqrt();
    let norm2 = u1 * u1 + u2 * u2;
    let a = eps * (2.0 * u1 + eps * norm2);
    let d = (1.0 + a).sqrt();
    let numerator = -eps * u1 * a / (1.0 + d) + eps * eps * (norm2 - 2.0 * u1 * u1)
        - eps * eps * eps * u1 * norm2;
    (1.0 - mu) * numerator / (d * (d + 1.0))
}

/// Gradient of [`sun_tidal`] with respect to u~ (direct form; the
/// cancellation here is below force-evaluation tolerance for mu >= 1e-12).
fn sun_tidal_grad(u1: f64, u2: f64, mu: f64) -> [f64; 2] {
    let eps = mu.sqrt();
    let d2 = (1.0 + eps * u1) * (1.0 + eps * u1) + eps * eps * u2 * u2;
    let d3 = d2 * d2.sqrt();
    [
        (1.0 - mu) * eps * ((1.0 + eps * u1) / d3 - 1.0),
        (1.0 - mu) * eps * eps * u2 / d3,
    ]
}

/// Regularized Hamiltonian K_rho, exact and regular at z = 0.
pub fn k_rho(s: &LCState, mu: f64) -> f64 {
    let eps = mu.sqrt();
    let xi = s.xi;
    let m = s.z.norm_sqr();
    let q = s.z.conj() * s.w;
    let u = 2.0 * s.z * s.z;
    0.5 * (s.w.norm_sqr() - m) - 0.5 * eps * xi * xi - 2.0 * eps * xi * m * q.im
        + xi * xi * m * sun_tidal(u.re, u.im, mu)
}

/// The displayed power-series form of K_rho: quadratic part, rotation
/// term, and the sextic tidal terms, with the O(z^8) tail dropped. For
/// model comparison only; integration always uses [`k_rho`].
pub fn k_rho_expansion(s: &LCState, mu: f64) -> f64 {
    let eps = mu.sqrt();
    let xi = s.xi;
    let m = s.z.norm_sqr();
    let q = s.z.conj() * s.w;
    let z4 = s.z.powi(4);
    0.5 * (s.w.norm_sqr() - m) - 0.5 * eps * xi * xi - 2.0 * eps * xi * m * q.im
        - 0.5 * mu * (1.0 - mu) * xi * xi * (2.0 * m * m * m + 6.0 * m * z4.re)
}

/// Quadratic model K0 = (|w|^2 - |z|^2)/2 - mu^(1/2) xi^2 / 2.
pub fn k0(s: &LCState, mu: f64) -> f64 {
    0.5 * (s.w.norm_sqr() - s.z.norm_sqr()) - 0.5 * mu.sqrt() * s.xi * s.xi
}

/// Collision datum scale delta_mu = mu^(1/4) xi: the |w| that puts
/// (z, w) = (0, delta_mu e^(i psi)) on the K_rho = 0 shell.
pub fn delta_mu(mu: f64, xi: f64) -> f64 {
    mu.powf(0.25) * xi
}

/// Hamiltonian field of K_rho in (z1, z2, w1, w2), plus the physical-time
/// quadrature dt/dsigma = 4 xi mu^(1/2) |z|^2 as the fifth component.
pub fn k_rho_field(y: &[f64; 5], mu: f64, xi: f64) -> [f64; 5] {
    let eps = mu.sqrt();
    let (z1, z2, w1, w2) = (y[0], y[1], y[2], y[3]);
    let m = z1 * z1 + z2 * z2;
    let q = z1 * w2 - z2 * w1; // Im(conj(z) w)
    let u1 = 2.0 * (z1 * z1 - z2 * z2);
    let u2 = 4.0 * z1 * z2;
    let w_val = sun_tidal(u1, u2, mu);
    let w_grad = sun_tidal_grad(u1, u2, mu);
    let xi2 = xi * xi;

    // dK/dw.
    let dk_dw1 = w1 + 2.0 * eps * xi * m * z2;
    let dk_dw2 = w2 - 2.0 * eps * xi * m * z1;

    // dK/dz: quadratic part, rotation term, tidal term (chain rule through
    // u~ = 2 z^2: du1/dz1 = 4 z1, du1/dz2 = -4 z2, du2/dz1 = 4 z2,
    // du2/dz2 = 4 z1).
    let dk_dz1 = -z1 - 2.0 * eps * xi * (2.0 * z1 * q + m * w2)
        + xi2 * (2.0 * z1 * w_val + m * (w_grad[0] * 4.0 * z1 + w_grad[1] * 4.0 * z2));
    let dk_dz2 = -z2 - 2.0 * eps * xi * (2.0 * z2 * q - m * w1)
        + xi2 * (2.0 * z2 * w_val + m * (-w_grad[0] * 4.0 * z2 + w_grad[1] * 4.0 * z1));

    [dk_dw1, dk_dw2, -dk_dz1, -dk_dz2, 4.0 * xi * eps * m]
}

/// xi from the physical energy: H~ = h + (mu-1)(mu-3)/2 must lie in
/// `window`, then xi = 1/sqrt(2 H~).
pub fn xi_from_energy_with_window(
    h_physical: f64,
    mu: f64,
    window: (f64, f64),
) -> Result<f64, LcError> {
    let scaled = h_physical + (mu - 1.0) * (mu - 3.0) / 2.0;
    if !(scaled > window.0 && scaled < window.1) {
        return Err(LcError::EnergyWindow(scaled, window.0, window.1));
    }
    Ok(1.0 / (2.0 * scaled).sqrt())
}

/// Default energy window (0, sqrt(2) + 3/2) for the scaled energy.
pub fn xi_from_energy(h_physical: f64, mu: f64) -> Result<f64, LcError> {
    xi_from_energy_with_window(h_physical, mu, (0.0, std::f64::consts::SQRT_2 + 1.5))
}

/// Symplectic diagonalizing change X = (z + w)/sqrt(2), Y = (z - w)/sqrt(2).
pub fn diagonalize(s: &LCState) -> (Complex64, Complex64) {
    let rt = std::f64::consts::FRAC_1_SQRT_2;
    ((s.z + s.w) * rt, (s.z - s.w) * rt)
}

/// Inverse of [`diagonalize`].
pub fn undiagonalize(x: Complex64, y: Complex64, xi: f64) -> LCState {
    let rt = std::f64::consts::FRAC_1_SQRT_2;
    LCState {
        z: (x + y) * rt,
        w: (x - y) * rt,
        xi,
    }
}

/// K0 in diagonal coordinates. With z = (X+Y)/sqrt(2), w = (X-Y)/sqrt(2)
/// the hyperbolic part (|w|^2 - |z|^2)/2 equals -(X1 Y1 + X2 Y2), under
/// which the X directions expand at rate +1 and the Y directions contract
/// at rate -1 (the change flips the orientation of the symplectic form, so
/// the displayed sign conventions vary; the value below is the one that
/// matches [`k0`] identically).
pub fn k0_diagonal(x: Complex64, y: Complex64, mu: f64, xi: f64) -> f64 {
    -(x.re * y.re + x.im * y.im) - 0.5 * mu.sqrt() * xi * xi
}

/// One sample of a regularized trajectory.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RegSample {
    pub sigma: f64,
    pub z: Complex64,
    pub w: Complex64,
    /// Physical time elapsed since the start of the regularized segment.
    pub t_phys: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum RegEventKind {
    /// |u~| = 2 |z|^2 crosses the given radius.
    ScaledRadius { radius: f64 },
    /// Local minimum of |z| (collision pass-through).
    ZMin,
}

#[derive(Debug, Clone, Copy)]
pub struct RegEventSpec {
    pub kind: RegEventKind,
    pub halt: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RegEvent {
    pub sigma: f64,
    pub kind: RegEventKind,
    pub z: Complex64,
    pub w: Complex64,
    pub t_phys: f64,
}

#[derive(Debug, Clone)]
pub struct RegTrajectory {
    pub samples: Vec<RegSample>,
    pub events: Vec<RegEvent>,
    pub reached_final_sigma: bool,
    pub min_abs_z: f64,
    pub sigma_min_abs_z: f64,
    pub xi: f64,
}

impl RegTrajectory {
    pub fn final_sample(&self) -> RegSample {
        *self.samples.last().expect("trajectory has samples")
    }

    /// Largest |K_rho| over the samples.
    pub fn max_energy_residual(&self, mu: f64) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                k_rho(
                    &LCState {
                        z: s.z,
                        w: s.w,
                        xi: self.xi,
                    },
                    mu,
                )
                .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Integrate the K_rho flow in fictitious time from `s0` (which must lie
/// on the zero shell to 1e-10) over `sigma_span`, recording the physical
/// time by quadrature. Passes smoothly through z = 0.
pub fn integrate_regularized(
    s0: &LCState,
    mu: f64,
    sigma_span: (f64, f64),
    tol: f64,
    events: &[RegEventSpec],
) -> Result<RegTrajectory, LcError> {
    let k_init = k_rho(s0, mu).abs();
    if k_init > 1e-10 {
        return Err(LcError::OffShell(k_init));
    }
    let xi = s0.xi;
    let sys = move |_t: f64, y: &[f64; 5], d: &mut [f64; 5]| {
        *d = k_rho_field(y, mu, xi);
    };
    let opts = OdeOptions {
        rtol: tol,
        atol: tol,
        h_init: 1e-4,
        ..Default::default()
    };
    let mut solver = Rkf78::new(opts.clone());

    let y0 = [s0.z.re, s0.z.im, s0.w.re, s0.w.im, 0.0];
    let mut traj = RegTrajectory {
        samples: vec![RegSample {
            sigma: sigma_span.0,
            z: s0.z,
            w: s0.w,
            t_phys: 0.0,
        }],
        events: Vec::new(),
        reached_final_sigma: false,
        min_abs_z: s0.z.norm(),
        sigma_min_abs_z: sigma_span.0,
        xi,
    };

    let event_value = |kind: &RegEventKind, y: &[f64; 5]| -> f64 {
        match kind {
            RegEventKind::ScaledRadius { radius } => {
                2.0 * (y[0] * y[0] + y[1] * y[1]) - radius
            }
            RegEventKind::ZMin => {
                // d|z|^2/dsigma, sign readable from the field.
                let f = k_rho_field(y, mu, xi);
                y[0] * f[0] + y[1] * f[1]
            }
        }
    };

    let mut g_prev: Vec<f64> = events.iter().map(|e| event_value(&e.kind, &y0)).collect();
    let mut halted = false;
    let result = solver.drive(
        &sys,
        sigma_span.0,
        &y0,
        sigma_span.1,
        &mut |s_a, y_a, s_b, y_b, h| {
            let mut control = StepControl::Continue;
            for (idx, ev) in events.iter().enumerate() {
                let g_b = event_value(&ev.kind, y_b);
                let g_a = g_prev[idx];
                let fired = match ev.kind {
                    RegEventKind::ZMin => g_a < 0.0 && g_b >= 0.0,
                    _ => (g_a > 0.0) != (g_b > 0.0),
                };
                if fired {
                    let mut locator = Rkf78::new(opts.clone());
                    let gfun = |_s: f64, y: &[f64; 5]| event_value(&ev.kind, y);
                    let (se, ye) = locator.locate_event(&sys, s_a, y_a, h, g_a, &gfun, 1e-12);
                    let z = Complex64::new(ye[0], ye[1]);
                    let w = Complex64::new(ye[2], ye[3]);
                    if z.norm() < traj.min_abs_z {
                        traj.min_abs_z = z.norm();
                        traj.sigma_min_abs_z = se;
                    }
                    traj.events.push(RegEvent {
                        sigma: se,
                        kind: ev.kind,
                        z,
                        w,
                        t_phys: ye[4],
                    });
                    if ev.halt {
                        traj.samples.push(RegSample {
                            sigma: se,
                            z,
                            w,
                            t_phys: ye[4],
                        });
                        halted = true;
                        control = StepControl::Stop;
                    }
                }
                g_prev[idx] = g_b;
            }
            if control == StepControl::Continue {
                let z = Complex64::new(y_b[0], y_b[1]);
                if z.norm() < traj.min_abs_z {
                    traj.min_abs_z = z.norm();
                    traj.sigma_min_abs_z = s_b;
                }
                traj.samples.push(RegSample {
                    sigma: s_b,
                    z,
                    w: Complex64::new(y_b[2], y_b[3]),
                    t_phys: y_b[4],
                });
            }
            control
        },
    );

    match result {
        Ok(_) => {
            traj.reached_final_sigma = !halted;
            Ok(traj)
        }
        Err(e) => Err(LcError::Integration(e.to_string())),
    }
}

/// Construct the collision-manifold point of phase psi: backward-integrate
/// the regularized flow from the collision datum (z, w) = (0, delta_mu
/// e^(i psi)) until |u~| = rho, and return the physical state there.
pub fn collision_manifold(
    psi: f64,
    mu: f64,
    rho: f64,
    xi: f64,
) -> Result<CollisionManifoldPoint, LcError> {
    let delta = delta_mu(mu, xi);
    let s0 = LCState {
        z: Complex64::ZERO,
        w: delta * Complex64::new(psi.cos(), psi.sin()),
        xi,
    };
    // The quadratic model exits at sigma = -arcsinh(sqrt(rho/2)/delta);
    // allow a factor-2 margin before declaring a timeout.
    let sigma_model = ((rho / 2.0).sqrt() / delta).asinh();
    let events = [RegEventSpec {
        kind: RegEventKind::ScaledRadius { radius: rho },
        halt: true,
    }];
    let traj = integrate_regularized(&s0, mu, (0.0, -2.0 * sigma_model - 5.0), 1e-12, &events)?;
    if traj.reached_final_sigma {
        return Err(LcError::ManifoldTimeout);
    }
    let exit = traj.final_sample();
    let lc = LCState {
        z: exit.z,
        w: exit.w,
        xi,
    };
    let scaled = lc_inverse(&lc)?;
    let phys = unscale(&scaled, mu);
    Ok(CollisionManifoldPoint {
        psi,
        u: phys.u,
        v: phys.v,
        sigma_exit: exit.sigma,
    })
}
