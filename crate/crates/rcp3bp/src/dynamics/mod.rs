//! The mu > 0 Hamiltonians in all charts, the mollified Hamiltonian with
//! the Jupiter singularity capped, region classification, numerical
//! integration with event detection, the linear transition-zone flow, and
//! the Poincare section map.

mod flow;
mod linear;
pub mod ode;
mod poincare;

pub use flow::{
    integrate, integrate_symplectic, EventKind, EventSpec, IntegrationOptions, StopReason,
    Trajectory, TrajectoryEvent,
};
pub use linear::{flow_lin, ham_lin, vector_field_lin};
pub use poincare::{mollified_polar_field, poincare_map};

use crate::kepler::{JupiterCenteredState, PolarState, RotatingCartesianState};
use thiserror::Error;

/// Default mollifier / region exponent tau = 3/20.
pub const TAU_DEFAULT: f64 = 3.0 / 20.0;
/// Default inner-region scale rho.
pub const RHO_DEFAULT: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("evaluation at a primary singularity ({0})")]
    Singularity(&'static str),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("section lift infeasible: {0}")]
    LiftInfeasible(String),
    #[error("integration exceeded {0} steps")]
    MaxSteps(u64),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("chart transform failed: {0}")]
    Chart(#[from] crate::kepler::KeplerError),
    #[error("{0}")]
    Ode(String),
}

/// Mass ratio, region exponent and inner-region scale for the mu > 0 model.
///
/// The regions are nested as rho mu^(1/2) < mu^tau; construction rejects
/// parameter sets that break the nesting.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub mu: f64,
    pub tau: f64,
    pub rho: f64,
}

impl ModelParams {
    pub fn new(mu: f64, tau: f64, rho: f64) -> Result<Self, DynamicsError> {
        if !(mu > 0.0 && mu <= 1e-2) {
            return Err(DynamicsError::InvalidParams(format!(
                "mu = {mu} outside (0, 1e-2]"
            )));
        }
        if !(tau > 0.0 && rho > 0.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "tau = {tau}, rho = {rho} must be positive"
            )));
        }
        let p = Self { mu, tau, rho };
        if p.r3_radius() >= p.r2_outer_radius() {
            return Err(DynamicsError::InvalidParams(format!(
                "region nesting violated: rho mu^(1/2) = {} >= mu^tau = {}",
                p.r3_radius(),
                p.r2_outer_radius()
            )));
        }
        Ok(p)
    }

    /// Standard parameters: tau = 3/20, rho = 10.
    pub fn standard(mu: f64) -> Result<Self, DynamicsError> {
        Self::new(mu, TAU_DEFAULT, RHO_DEFAULT)
    }

    /// Outer radius mu^tau of the transition region R2.
    pub fn r2_outer_radius(&self) -> f64 {
        self.mu.powf(self.tau)
    }

    /// Radius rho mu^(1/2) of the Levi-Civita region R3.
    pub fn r3_radius(&self) -> f64 {
        self.rho * self.mu.sqrt()
    }

    /// Cap value 4 mu^(-tau) the mollifier substitutes for g1 near Jupiter.
    pub fn mollifier_cap(&self) -> f64 {
        4.0 * self.mu.powf(-self.tau)
    }

    /// Default collision threshold 1e-3 rho mu^(1/2): raw integration stops
    /// here and hands over to the regularized chart.
    pub fn collision_epsilon(&self) -> f64 {
        1e-3 * self.r3_radius()
    }
}

/// Region of the Jupiter-centered configuration plane, by |u|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RegionLabel {
    /// |u| >= mu^tau: the Sun dominates.
    R1,
    /// rho mu^(1/2) <= |u| <= mu^tau: transition zone.
    R2,
    /// |u| <= rho mu^(1/2): Jupiter dominates.
    R3,
}

/// Classify a configuration point; boundary points get the inner label.
pub fn classify_region(u: [f64; 2], params: &ModelParams) -> RegionLabel {
    let d = (u[0] * u[0] + u[1] * u[1]).sqrt();
    if d <= params.r3_radius() {
        RegionLabel::R3
    } else if d <= params.r2_outer_radius() {
        RegionLabel::R2
    } else {
        RegionLabel::R1
    }
}

/// Rotating-frame Hamiltonian
/// H = |y|^2/2 - x^T J y - mu/|x - (1-mu,0)| - (1-mu)/|x + (mu,0)|.
pub fn ham_rotating(s: &RotatingCartesianState, mu: f64) -> Result<f64, DynamicsError> {
    let dj = [s.x[0] - (1.0 - mu), s.x[1]];
    let ds = [s.x[0] + mu, s.x[1]];
    let rj = (dj[0] * dj[0] + dj[1] * dj[1]).sqrt();
    let rs = (ds[0] * ds[0] + ds[1] * ds[1]).sqrt();
    // The Jupiter term carries the factor mu, so it is absent in the
    // integrable limit and only mu > 0 sees that singularity.
    let jupiter = if mu > 0.0 {
        if rj == 0.0 {
            return Err(DynamicsError::Singularity("Jupiter"));
        }
        mu / rj
    } else {
        0.0
    };
    if rs == 0.0 {
        return Err(DynamicsError::Singularity("Sun"));
    }
    let kinetic = 0.5 * (s.y[0] * s.y[0] + s.y[1] * s.y[1]);
    let coriolis = s.x[0] * s.y[1] - s.x[1] * s.y[0];
    Ok(kinetic - coriolis - jupiter - (1.0 - mu) / rs)
}

/// Jupiter-centered Hamiltonian
/// H = |v|^2/2 - u^T J v - (1-mu) u1 - mu/|u| - (1-mu)/|u + (1,0)| - (1-mu)^2/2,
/// an exact rewrite of [`ham_rotating`] under the shift Psi_0.
pub fn ham_jupiter(s: &JupiterCenteredState, mu: f64) -> Result<f64, DynamicsError> {
    let ru = s.dist();
    let dsun = [s.u[0] + 1.0, s.u[1]];
    let rs = (dsun[0] * dsun[0] + dsun[1] * dsun[1]).sqrt();
    let jupiter = if mu > 0.0 {
        if ru == 0.0 {
            return Err(DynamicsError::Singularity("Jupiter"));
        }
        mu / ru
    } else {
        0.0
    };
    if rs == 0.0 {
        return Err(DynamicsError::Singularity("Sun"));
    }
    let kinetic = 0.5 * (s.v[0] * s.v[0] + s.v[1] * s.v[1]);
    let coriolis = s.u[0] * s.v[1] - s.u[1] * s.v[0];
    Ok(kinetic - coriolis - (1.0 - mu) * s.u[0] - jupiter - (1.0 - mu) / rs
        - 0.5 * (1.0 - mu) * (1.0 - mu))
}

/// Jacobi constant J = -2 H of a Jupiter-centered state.
pub fn jacobi_constant(s: &JupiterCenteredState, mu: f64) -> Result<f64, DynamicsError> {
    Ok(-2.0 * ham_jupiter(s, mu)?)
}

/// Distance from a polar configuration point to Jupiter at (1-mu, 0).
pub fn polar_jupiter_distance(r: f64, phi: f64, mu: f64) -> f64 {
    let c = phi.cos();
    (r * r + (1.0 - mu) * (1.0 - mu) - 2.0 * (1.0 - mu) * r * c)
        .max(0.0)
        .sqrt()
}

/// Perturbation g1 = 1 / |x - (1-mu, 0)|: the Jupiter term of the polar
/// Hamiltonian, singular at the collision.
pub fn polar_g1(r: f64, phi: f64, mu: f64) -> Result<f64, DynamicsError> {
    let d = polar_jupiter_distance(r, phi, mu);
    if d == 0.0 {
        return Err(DynamicsError::Singularity("Jupiter"));
    }
    Ok(1.0 / d)
}

/// Perturbation g2 = mu^-1 ((1-mu)/|x + (mu,0)| - 1/r), analytic away from
/// the Sun: the full Sun term minus its Kepler part, per unit mu. (The
/// factor 1-mu keeps kepler - mu g1 - mu g2 an exact identity with the
/// physical Hamiltonian, which the chart-coherence contract requires.)
/// Evaluated in a cancellation-free form so the mu -> 0 limit
/// -1/r - cos(phi)/r^2 comes out exactly.
pub fn polar_g2(r: f64, phi: f64, mu: f64) -> Result<f64, DynamicsError> {
    let c = phi.cos();
    let d2 = r * r + 2.0 * mu * r * c + mu * mu;
    let d = d2.sqrt();
    if d == 0.0 || r == 0.0 {
        return Err(DynamicsError::Singularity("Sun"));
    }
    // mu^-1 ((1-mu)/d - 1/r) = ((1-mu) r - d) / (mu d r)
    //   = -(2 r^2 + 2 r c + mu (1 - r^2)) / (d r ((1-mu) r + d)).
    Ok(-(2.0 * r * r + 2.0 * r * c + mu * (1.0 - r * r)) / (d * r * ((1.0 - mu) * r + d)))
}

/// Polar-chart Hamiltonian
/// H = R^2/2 + G^2/(2 r^2) - G - 1/r - mu g1 - mu g2.
pub fn ham_polar(s: &PolarState, mu: f64) -> Result<f64, DynamicsError> {
    if mu == 0.0 {
        return Ok(kepler_polar_part(s));
    }
    let g1 = polar_g1(s.r, s.phi, mu)?;
    let g2 = polar_g2(s.r, s.phi, mu)?;
    Ok(kepler_polar_part(s) - mu * g1 - mu * g2)
}

fn kepler_polar_part(s: &PolarState) -> f64 {
    0.5 * s.R * s.R + 0.5 * s.G * s.G / (s.r * s.r) - s.G - 1.0 / s.r
}

/// C-infinity bump: 0 for |z| <= 1, 1 for |z| >= 2.
pub fn bump(z: f64) -> f64 {
    let z = z.abs();
    if z <= 1.0 {
        0.0
    } else if z >= 2.0 {
        1.0
    } else {
        let b = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
        let num = b(z - 1.0);
        num / (num + b(2.0 - z))
    }
}

/// Mollified g1: equals g1 at Jupiter-distance >= 2 mu^tau (same evaluation
/// path, so the identity is exact), equals the cap 4 mu^-tau at distance
/// <= mu^tau, and is smooth in between.
pub fn mollified_g1(r: f64, phi: f64, params: &ModelParams) -> f64 {
    let mu = params.mu;
    let d = polar_jupiter_distance(r, phi, mu);
    let scale = params.r2_outer_radius();
    if d >= 2.0 * scale {
        return 1.0 / d;
    }
    let cap = params.mollifier_cap();
    if d <= scale {
        return cap;
    }
    bump(d / scale) * (1.0 / d - cap) + cap
}

/// Mollified polar Hamiltonian: the Jupiter singularity of [`ham_polar`]
/// replaced by the smooth cap, everything else untouched.
///
/// Both perturbations enter with a minus sign, matching the unmodified
/// polar Hamiltonian (the two printed modified forms disagree on the g2
/// sign; off the cap the flow must coincide with the physical one, which
/// pins the convention).
pub fn mollified_ham(s: &PolarState, params: &ModelParams) -> Result<f64, DynamicsError> {
    let g1 = mollified_g1(s.r, s.phi, params);
    let g2 = polar_g2(s.r, s.phi, params.mu)?;
    Ok(kepler_polar_part(s) - params.mu * g1 - params.mu * g2)
}

/// Hamiltonian vector field of [`ham_jupiter`]:
/// (du/dt, dv/dt) = (dH/dv, -dH/du).
pub fn vector_field(s: &JupiterCenteredState, mu: f64) -> Result<[f64; 4], DynamicsError> {
    let ru2 = s.u[0] * s.u[0] + s.u[1] * s.u[1];
    let ru = ru2.sqrt();
    let dsun = [s.u[0] + 1.0, s.u[1]];
    let rs2 = dsun[0] * dsun[0] + dsun[1] * dsun[1];
    let rs = rs2.sqrt();
    if rs == 0.0 {
        return Err(DynamicsError::Singularity("Sun"));
    }
    let (jup1, jup2) = if mu > 0.0 {
        if ru == 0.0 {
            return Err(DynamicsError::Singularity("Jupiter"));
        }
        let ru3 = ru2 * ru;
        (mu * s.u[0] / ru3, mu * s.u[1] / ru3)
    } else {
        (0.0, 0.0)
    };
    let rs3 = rs2 * rs;
    let h_u1 = -s.v[1] - (1.0 - mu) + jup1 + (1.0 - mu) * dsun[0] / rs3;
    let h_u2 = s.v[0] + jup2 + (1.0 - mu) * dsun[1] / rs3;
    Ok([
        s.v[0] + s.u[1], // dH/dv1
        s.v[1] - s.u[0], // dH/dv2
        -h_u1,
        -h_u2,
    ])
}

/// Gradient of the position-only potential of [`ham_jupiter`] (used by the
/// symplectic splitting; the rest of H is the exactly solvable linear part).
pub(crate) fn potential_gradient(u: [f64; 2], mu: f64) -> [f64; 2] {
    let ru2 = u[0] * u[0] + u[1] * u[1];
    let dsun = [u[0] + 1.0, u[1]];
    let rs2 = dsun[0] * dsun[0] + dsun[1] * dsun[1];
    let rs3 = rs2 * rs2.sqrt();
    let (jup1, jup2) = if mu > 0.0 {
        let ru3 = ru2 * ru2.sqrt();
        (mu * u[0] / ru3, mu * u[1] / ru3)
    } else {
        (0.0, 0.0)
    };
    [
        -(1.0 - mu) + jup1 + (1.0 - mu) * dsun[0] / rs3,
        jup2 + (1.0 - mu) * dsun[1] / rs3,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kepler::{
        cartesian_to_jupiter, delaunay_to_polar, h0_delaunay, jupiter_to_cartesian,
        polar_to_cartesian, DelaunayState,
    };
    use rand::{Rng, SeedableRng};

    #[test]
    fn rotating_circular_orbit_value() {
        // mu = 0, x = (1,0), y = (0,1): 1/2 - 1 - 1 = -3/2.
        let s = RotatingCartesianState {
            x: [1.0, 0.0],
            y: [0.0, 1.0],
        };
        assert!((ham_rotating(&s, 0.0).unwrap() + 1.5).abs() < 1e-15);
    }

    #[test]
    fn jupiter_chart_is_exact_shift() {
        // mu -> 0 at u = (1,0), v = (0,0) evaluates to -2, and agrees with
        // the rotating chart at x = (2,0), y = (0,1).
        let j = JupiterCenteredState {
            u: [1.0, 0.0],
            v: [0.0, 0.0],
        };
        assert!((ham_jupiter(&j, 0.0).unwrap() + 2.0).abs() < 1e-15);
        let c = jupiter_to_cartesian(&j, 0.0);
        assert!((ham_rotating(&c, 0.0).unwrap() + 2.0).abs() < 1e-15);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mu: f64 = rng.gen_range(1e-6..1e-2);
            let j = JupiterCenteredState {
                u: [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)],
                v: [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
            };
            if j.dist() < 1e-3 {
                continue;
            }
            let c = jupiter_to_cartesian(&j, mu);
            let hj = ham_jupiter(&j, mu).unwrap();
            let hr = ham_rotating(&c, mu).unwrap();
            assert!((hj - hr).abs() < 1e-12, "shift mismatch: {hj} vs {hr}");
        }
    }

    #[test]
    fn singularity_errors() {
        let s = RotatingCartesianState {
            x: [1.0 - 1e-3, 0.0],
            y: [0.0, 0.0],
        };
        assert!(matches!(
            ham_rotating(&s, 1e-3),
            Err(DynamicsError::Singularity("Jupiter"))
        ));
        let j = JupiterCenteredState {
            u: [-1.0, 0.0],
            v: [0.0, 0.0],
        };
        assert!(matches!(
            ham_jupiter(&j, 1e-3),
            Err(DynamicsError::Singularity("Sun"))
        ));
    }

    #[test]
    fn polar_chart_agrees_with_rotating() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let mu: f64 = rng.gen_range(0.0..1e-2);
            let p = PolarState::new(
                rng.gen_range(0.3..2.5),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(-0.8..0.8),
                rng.gen_range(-1.2..1.2),
            )
            .unwrap();
            if polar_jupiter_distance(p.r, p.phi, mu) < 1e-3 {
                continue;
            }
            let c = polar_to_cartesian(&p).unwrap();
            let hp = ham_polar(&p, mu).unwrap();
            let hr = ham_rotating(&c, mu).unwrap();
            assert!((hp - hr).abs() < 1e-12, "polar mismatch {hp} vs {hr}");
        }
    }

    #[test]
    fn polar_mu_zero_reduces_to_kepler() {
        let p = PolarState::new(1.3, 0.7, 0.2, 0.9).unwrap();
        let expected = 0.5 * 0.04 + 0.5 * 0.81 / (1.3 * 1.3) - 0.9 - 1.0 / 1.3;
        assert!((ham_polar(&p, 0.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn g2_bounded_as_mu_vanishes() {
        // g2 stays O(1) and tends to -1/r - cos(phi)/r^2 for r in [0.5, 2].
        for i in 0..50 {
            let r = 0.5 + 1.5 * (i as f64) / 49.0;
            for j in 0..16 {
                let phi = std::f64::consts::TAU * (j as f64) / 16.0;
                let limit = -1.0 / r - phi.cos() / (r * r);
                for &mu in &[1e-4, 1e-8, 1e-12, 0.0] {
                    let g2 = polar_g2(r, phi, mu).unwrap();
                    assert!(g2.abs() < 10.0);
                    assert!(
                        (g2 - limit).abs() < 30.0 * mu + 1e-12,
                        "g2 limit failed at r={r}, phi={phi}, mu={mu}"
                    );
                }
            }
        }
    }

    #[test]
    fn chart_coherence_with_delaunay_at_mu_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let l: f64 = rng.gen_range(0.7..1.4);
            let g_act: f64 = rng.gen_range(0.2..(l - 0.1));
            let s = DelaunayState::new(
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
                l,
                g_act,
            )
            .unwrap();
            let h0 = h0_delaunay(s.L, s.G).unwrap();
            let p = delaunay_to_polar(&s).unwrap();
            let c = polar_to_cartesian(&p).unwrap();
            let j = cartesian_to_jupiter(&c, 0.0);
            assert!((ham_polar(&p, 0.0).unwrap() - h0).abs() < 1e-10);
            assert!((ham_rotating(&c, 0.0).unwrap() - h0).abs() < 1e-10);
            assert!((ham_jupiter(&j, 0.0).unwrap() - h0).abs() < 1e-10);
        }
    }

    #[test]
    fn mollifier_plateaus() {
        let params = ModelParams::standard(1e-4).unwrap();
        let mu = params.mu;
        let scale = params.r2_outer_radius();

        // Distance 3 mu^tau from Jupiter: mollified == original exactly.
        let r = 1.0 - mu + 3.0 * scale;
        let p = PolarState::new(r, 0.0, 0.1, 0.9).unwrap();
        assert_eq!(
            mollified_ham(&p, &params).unwrap(),
            ham_polar(&p, mu).unwrap()
        );

        // At Jupiter: finite, with the g1 part capped at 4 mu^-tau.
        let p = PolarState::new(1.0 - mu, 0.0, 0.1, 0.9).unwrap();
        let h = mollified_ham(&p, &params).unwrap();
        assert!(h.is_finite());
        assert_eq!(mollified_g1(p.r, p.phi, &params), params.mollifier_cap());
    }

    #[test]
    fn mollifier_continuity_scan() {
        // Dense radial scan across the transition annulus [mu^tau, 2 mu^tau]:
        // consecutive values differ by no more than the local slope allows.
        let params = ModelParams::standard(1e-4).unwrap();
        let mu = params.mu;
        let scale = params.r2_outer_radius();
        let n = 20_000;
        let mut prev: Option<f64> = None;
        let mut max_jump = 0.0f64;
        for i in 0..=n {
            let d = scale * (0.9 + 1.3 * (i as f64) / (n as f64));
            let r = 1.0 - mu + d;
            let p = PolarState::new(r, 0.0, 0.1, 0.9).unwrap();
            let h = mollified_ham(&p, &params).unwrap();
            if let Some(ph) = prev {
                max_jump = max_jump.max((h - ph).abs());
            }
            prev = Some(h);
        }
        // The capped g1 varies by O(mu^-tau) over an annulus of width
        // mu^tau, so |dH/dr| = O(mu^(1-2tau)); multiply by the resolution.
        let bound = 50.0 * mu * params.mollifier_cap() / scale * (1.3 * scale / n as f64);
        assert!(
            max_jump < bound.max(1e-9),
            "jump {max_jump} exceeds bound {bound}"
        );
    }

    #[test]
    fn bump_profile() {
        assert_eq!(bump(0.5), 0.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(2.0), 1.0);
        assert_eq!(bump(5.0), 1.0);
        let mid = bump(1.5);
        assert!(mid > 0.0 && mid < 1.0);
        let mut prev = 0.0;
        for i in 0..=100 {
            let b = bump(1.0 + (i as f64) / 100.0);
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn vector_field_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mu = 1e-3;
        let eps = 1e-6;
        let mut checked = 0;
        while checked < 1000 {
            let s = JupiterCenteredState {
                u: [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)],
                v: [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
            };
            if s.dist() < 0.05 || ((s.u[0] + 1.0).powi(2) + s.u[1].powi(2)).sqrt() < 0.05 {
                continue;
            }
            let f = vector_field(&s, mu).unwrap();
            let h = |st: &JupiterCenteredState| ham_jupiter(st, mu).unwrap();
            let mut fd = [0.0; 4];
            for k in 0..2 {
                let mut sp = s;
                let mut sm = s;
                sp.v[k] += eps;
                sm.v[k] -= eps;
                fd[k] = (h(&sp) - h(&sm)) / (2.0 * eps); // dH/dv_k
                let mut sp = s;
                let mut sm = s;
                sp.u[k] += eps;
                sm.u[k] -= eps;
                fd[2 + k] = -(h(&sp) - h(&sm)) / (2.0 * eps); // -dH/du_k
            }
            for k in 0..4 {
                let scale = 1.0 + f[k].abs();
                assert!(
                    (f[k] - fd[k]).abs() / scale < 1e-6,
                    "field component {k} mismatch: {} vs {}",
                    f[k],
                    fd[k]
                );
            }
            checked += 1;
        }
    }

    #[test]
    fn energy_derivative_along_field_vanishes() {
        // dH/dt = <grad H, X_H> = 0 by antisymmetry; check pointwise.
        let mu = 1e-3;
        let s = JupiterCenteredState {
            u: [0.4, -0.3],
            v: [0.2, 0.9],
        };
        let f = vector_field(&s, mu).unwrap();
        // grad H = (dH/du, dH/dv) = (-f[2..4], f[0..2]).
        let dh_dt = -f[2] * f[0] - f[3] * f[1] + f[0] * f[2] + f[1] * f[3];
        assert!(dh_dt.abs() <= 1e-12);
    }

    #[test]
    fn field_vanishes_at_collinear_equilibrium() {
        // Root-find the collinear critical point between the primaries:
        // a + (1-mu) + mu/a^2 - (1-mu)/(1+a)^2 = 0 with a < 0, then check
        // the full 4D field vanishes at (a, 0, 0, a).
        let mu = 1e-3;
        let f = |a: f64| a + (1.0 - mu) + mu / (a * a) - (1.0 - mu) / ((1.0 + a) * (1.0 + a));
        let (mut lo, mut hi) = (-0.2, -0.01);
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) * f(lo) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let a = 0.5 * (lo + hi);
        let s = JupiterCenteredState {
            u: [a, 0.0],
            v: [0.0, a],
        };
        let field = vector_field(&s, mu).unwrap();
        for c in field {
            assert!(c.abs() < 1e-11, "field {field:?} at equilibrium a={a}");
        }
    }

    #[test]
    fn region_classification() {
        let params = ModelParams::new(1e-4, TAU_DEFAULT, 10.0).unwrap();
        // mu^0.15 ~ 0.2512, rho mu^(1/2) = 0.1.
        assert_eq!(classify_region([0.5, 0.0], &params), RegionLabel::R1);
        assert_eq!(classify_region([0.0, 0.0], &params), RegionLabel::R3);
        let b = params.r2_outer_radius();
        assert_eq!(classify_region([b, 0.0], &params), RegionLabel::R2);
        let b3 = params.r3_radius();
        assert_eq!(classify_region([b3, 0.0], &params), RegionLabel::R3);
        assert_eq!(classify_region([0.15, 0.0], &params), RegionLabel::R2);
    }

    #[test]
    fn params_reject_broken_nesting() {
        // mu = 1e-2, rho = 10: rho sqrt(mu) = 1 > mu^0.15.
        assert!(ModelParams::new(1e-2, TAU_DEFAULT, 10.0).is_err());
        assert!(ModelParams::new(0.5, TAU_DEFAULT, 1.0).is_err());
        assert!(ModelParams::new(1e-3, TAU_DEFAULT, 10.0).is_ok());
    }
}
