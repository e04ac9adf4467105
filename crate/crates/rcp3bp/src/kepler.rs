//! Two-body (mu = 0) machinery: Kepler equation, anomalies, and the chart
//! transforms among Delaunay, polar, rotating-Cartesian, and
//! Jupiter-centered coordinates.
//!
//! Conventions: L is the square root of the semimajor axis, G the angular
//! momentum, `ell` the mean anomaly and `g` the argument of the perihelion
//! measured from the primaries line. Angles are stored in radians and
//! normalized to [0, 2*pi) at construction only; intermediate arithmetic is
//! unnormalized so continuity tests see no branch artifacts.

use crate::angles::wrap_tau;
use thiserror::Error;

/// Tolerance for the Kepler-equation residual |u - e sin u - ell|.
pub const KEPLER_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeplerError {
    #[error("eccentricity {0} outside [0, 1)")]
    EccentricityRange(f64),
    #[error("invalid Delaunay actions L = {l}, G = {g}: {reason}")]
    InvalidActions { l: f64, g: f64, reason: &'static str },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("state is not a bound ellipse (two-body energy {0} >= 0)")]
    Unbound(f64),
    #[error("circular or degenerate state: {0}")]
    Degenerate(&'static str),
    #[error("inconsistent state: radial momentum radicand {0} < 0")]
    NegativeRadicand(f64),
}

/// Action-angle state (ell, g, L, G) of the two-body approximation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[allow(non_snake_case)]
pub struct DelaunayState {
    /// Mean anomaly in [0, 2*pi).
    pub ell: f64,
    /// Perihelion argument in [0, 2*pi).
    pub g: f64,
    /// Square root of the semimajor axis, L > 0.
    pub L: f64,
    /// Angular momentum, 0 < |G| <= L.
    pub G: f64,
}

#[allow(non_snake_case)]
impl DelaunayState {
    /// Build a state, normalizing angles and rejecting G = 0 or |G| > L.
    pub fn new(ell: f64, g: f64, L: f64, G: f64) -> Result<Self, KeplerError> {
        if !(L > 0.0) {
            return Err(KeplerError::InvalidActions {
                l: L,
                g: G,
                reason: "L must be positive",
            });
        }
        if G == 0.0 {
            return Err(KeplerError::InvalidActions {
                l: L,
                g: G,
                reason: "G = 0 is a degenerate ellipse",
            });
        }
        if G.abs() > L {
            return Err(KeplerError::InvalidActions {
                l: L,
                g: G,
                reason: "|G| > L has no real eccentricity",
            });
        }
        Ok(Self {
            ell: wrap_tau(ell),
            g: wrap_tau(g),
            L,
            G,
        })
    }

    /// Eccentricity of the state's ellipse.
    pub fn eccentricity(&self) -> f64 {
        eccentricity(self.L, self.G).expect("validated at construction")
    }
}

/// Polar chart (r, phi, R, G): radius, polar angle, radial momentum,
/// angular momentum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[allow(non_snake_case)]
pub struct PolarState {
    pub r: f64,
    pub phi: f64,
    pub R: f64,
    pub G: f64,
}

#[allow(non_snake_case)]
impl PolarState {
    pub fn new(r: f64, phi: f64, R: f64, G: f64) -> Result<Self, KeplerError> {
        if !(r > 0.0) {
            return Err(KeplerError::NonPositiveRadius(r));
        }
        Ok(Self { r, phi, R, G })
    }
}

/// Rotating-frame Cartesian chart: position x and conjugate momentum y.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RotatingCartesianState {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

/// Jupiter-centered chart: u = x - (1-mu, 0), v = y - (0, 1-mu).
/// |u| = 0 is the Jupiter collision.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JupiterCenteredState {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl JupiterCenteredState {
    /// Distance to the Jupiter singularity.
    pub fn dist(&self) -> f64 {
        (self.u[0] * self.u[0] + self.u[1] * self.u[1]).sqrt()
    }
}

/// Eccentricity e = sqrt(1 - G^2/L^2).
pub fn eccentricity(l: f64, g: f64) -> Result<f64, KeplerError> {
    if !(l > 0.0) {
        return Err(KeplerError::InvalidActions {
            l,
            g,
            reason: "L must be positive",
        });
    }
    let ratio = g / l;
    if ratio.abs() > 1.0 {
        return Err(KeplerError::InvalidActions {
            l,
            g,
            reason: "|G| > L has no real eccentricity",
        });
    }
    Ok((1.0 - ratio * ratio).max(0.0).sqrt())
}

/// Integrable Hamiltonian in Delaunay variables: -1/(2 L^2) - G.
pub fn h0_delaunay(l: f64, g: f64) -> Result<f64, KeplerError> {
    if !(l > 0.0) {
        return Err(KeplerError::InvalidActions {
            l,
            g,
            reason: "L must be positive",
        });
    }
    Ok(-0.5 / (l * l) - g)
}

/// Solve Kepler's equation ell = u - e sin u for the eccentric anomaly
/// u in [0, 2*pi).
///
/// Newton iteration seeded with ell + e sin ell; falls back to bisection on
/// the guaranteed bracket [0, 2*pi] whenever Newton leaves it or stalls.
pub fn solve_kepler(ell: f64, e: f64) -> Result<f64, KeplerError> {
    if !(0.0..1.0).contains(&e) {
        return Err(KeplerError::EccentricityRange(e));
    }
    let ell = wrap_tau(ell);
    let f = |u: f64| u - e * u.sin() - ell;

    let mut u = ell + e * ell.sin();
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::TAU);
    for _ in 0..100 {
        let fu = f(u);
        if fu.abs() <= 0.5 * KEPLER_TOL {
            return Ok(wrap_tau(u).min(u.max(0.0)));
        }
        if fu > 0.0 {
            hi = hi.min(u);
        } else {
            lo = lo.max(u);
        }
        let du = fu / (1.0 - e * u.cos());
        u -= du;
        if !(lo..=hi).contains(&u) || !du.is_finite() {
            u = 0.5 * (lo + hi);
        }
        if hi - lo < f64::EPSILON {
            break;
        }
    }
    // f is strictly increasing (f' >= 1 - e > 0), so the bracketed value is
    // the unique root; accept it if the residual is within tolerance.
    let res = f(u).abs();
    debug_assert!(res <= KEPLER_TOL, "Kepler residual {res} at ell={ell}, e={e}");
    Ok(u.clamp(0.0, std::f64::consts::TAU))
}

/// True anomaly from the eccentric anomaly, on the branch that keeps v - u
/// continuous and 2*pi-periodic (v(0) = 0, v(pi) = pi).
///
/// Uses v = u + 2 atan2(beta sin u, 1 - beta cos u) with
/// beta = e / (1 + sqrt(1 - e^2)), which is equivalent to the tan-half-angle
/// relation but free of branch cuts.
pub fn true_anomaly(u: f64, e: f64) -> Result<f64, KeplerError> {
    if !(0.0..1.0).contains(&e) {
        return Err(KeplerError::EccentricityRange(e));
    }
    let beta = e / (1.0 + (1.0 - e * e).sqrt());
    Ok(u + 2.0 * (beta * u.sin()).atan2(1.0 - beta * u.cos()))
}

/// Delaunay -> polar: r = L^2 (1 - e cos u(ell)), phi = v(ell) + g, with the
/// radial momentum recovered from the energy identity
/// R^2 = -1/L^2 + 2/r - G^2/r^2 and sign(R) = sign(sin u).
pub fn delaunay_to_polar(s: &DelaunayState) -> Result<PolarState, KeplerError> {
    let e = s.eccentricity();
    let u = solve_kepler(s.ell, e)?;
    let v = true_anomaly(u, e)?;
    let r = s.L * s.L * (1.0 - e * u.cos());
    let phi = wrap_tau(v + s.g);
    let radicand = -1.0 / (s.L * s.L) + 2.0 / r - (s.G * s.G) / (r * r);
    if radicand < -1e-12 {
        return Err(KeplerError::NegativeRadicand(radicand));
    }
    let r_mom = u.sin().signum() * radicand.max(0.0).sqrt();
    PolarState::new(r, phi, r_mom, s.G)
}

/// Polar -> Delaunay for bound, non-circular states (inverse of
/// [`delaunay_to_polar`]; the sign of the eccentric-anomaly branch is read
/// off the radial momentum, so no extra branch flag is needed).
pub fn polar_to_delaunay(s: &PolarState) -> Result<DelaunayState, KeplerError> {
    let two_body_energy = 0.5 * s.R * s.R + 0.5 * (s.G * s.G) / (s.r * s.r) - 1.0 / s.r;
    if two_body_energy >= 0.0 {
        return Err(KeplerError::Unbound(two_body_energy));
    }
    let l = (-0.5 / two_body_energy).sqrt();
    if s.G.abs() >= l {
        return Err(KeplerError::Degenerate("|G| >= L: circular or inconsistent"));
    }
    let e = eccentricity(l, s.G)?;
    if e < 1e-14 {
        return Err(KeplerError::Degenerate("circular orbit: g undefined"));
    }
    // e cos u = 1 - r/L^2, e sin u = r R / L.
    let ecosu = 1.0 - s.r / (l * l);
    let esinu = s.r * s.R / l;
    let u = wrap_tau(esinu.atan2(ecosu));
    let ell = u - e * u.sin();
    let v = true_anomaly(u, e)?;
    let g = s.phi - v;
    DelaunayState::new(ell, g, l, s.G)
}

/// Polar -> rotating Cartesian (the transformation Psi_1).
pub fn polar_to_cartesian(s: &PolarState) -> Result<RotatingCartesianState, KeplerError> {
    if !(s.r > 0.0) {
        return Err(KeplerError::NonPositiveRadius(s.r));
    }
    let (sin_phi, cos_phi) = s.phi.sin_cos();
    Ok(RotatingCartesianState {
        x: [s.r * cos_phi, s.r * sin_phi],
        y: [
            s.R * cos_phi - s.G / s.r * sin_phi,
            s.R * sin_phi + s.G / s.r * cos_phi,
        ],
    })
}

/// Rotating Cartesian -> polar: r = |x|, R = (x . y)/r, G = x1 y2 - x2 y1.
pub fn cartesian_to_polar(s: &RotatingCartesianState) -> Result<PolarState, KeplerError> {
    let r = (s.x[0] * s.x[0] + s.x[1] * s.x[1]).sqrt();
    if !(r > 0.0) {
        return Err(KeplerError::NonPositiveRadius(r));
    }
    let phi = wrap_tau(s.x[1].atan2(s.x[0]));
    let r_mom = (s.x[0] * s.y[0] + s.x[1] * s.y[1]) / r;
    let g = s.x[0] * s.y[1] - s.x[1] * s.y[0];
    PolarState::new(r, phi, r_mom, g)
}

/// Shift to the Jupiter-centered chart (the translation Psi_0):
/// u = x - (1-mu, 0), v = y - (0, 1-mu).
pub fn cartesian_to_jupiter(s: &RotatingCartesianState, mu: f64) -> JupiterCenteredState {
    JupiterCenteredState {
        u: [s.x[0] - (1.0 - mu), s.x[1]],
        v: [s.y[0], s.y[1] - (1.0 - mu)],
    }
}

/// Exact inverse of [`cartesian_to_jupiter`].
pub fn jupiter_to_cartesian(s: &JupiterCenteredState, mu: f64) -> RotatingCartesianState {
    RotatingCartesianState {
        x: [s.u[0] + (1.0 - mu), s.u[1]],
        y: [s.v[0], s.v[1] + (1.0 - mu)],
    }
}

/// Full chart chain Delaunay -> Jupiter-centered.
pub fn delaunay_to_jupiter(s: &DelaunayState, mu: f64) -> Result<JupiterCenteredState, KeplerError> {
    let polar = delaunay_to_polar(s)?;
    let cart = polar_to_cartesian(&polar)?;
    Ok(cartesian_to_jupiter(&cart, mu))
}

/// Full chart chain Jupiter-centered -> Delaunay.
pub fn jupiter_to_delaunay(s: &JupiterCenteredState, mu: f64) -> Result<DelaunayState, KeplerError> {
    let cart = jupiter_to_cartesian(s, mu);
    let polar = cartesian_to_polar(&cart)?;
    polar_to_delaunay(&polar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    /// Independent oracle: bisection on [0, 2*pi] of f(u) = u - e sin u - ell.
    fn kepler_bisection_oracle(ell: f64, e: f64) -> f64 {
        let f = |u: f64| u - e * u.sin() - ell;
        let (mut lo, mut hi) = (0.0f64, TAU);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn kepler_fixed_points() {
        assert_eq!(solve_kepler(0.0, 0.5).unwrap(), 0.0);
        assert!((solve_kepler(PI, 0.9).unwrap() - PI).abs() < 1e-13);
    }

    #[test]
    fn kepler_matches_bisection_oracle() {
        // Frozen from the oracle: ell = 1.0, e = 0.5.
        let oracle = kepler_bisection_oracle(1.0, 0.5);
        assert!((oracle - 1.498_701_133_517_848).abs() < 1e-12);
        let u = solve_kepler(1.0, 0.5).unwrap();
        assert!((u - oracle).abs() < 1e-12);
    }

    #[test]
    fn kepler_residual_grid() {
        for i in 0..1000 {
            let ell = TAU * (i as f64) / 1000.0;
            for &e in &[0.0, 0.3, 0.7, 0.9, 0.99] {
                let u = solve_kepler(ell, e).unwrap();
                let res = (u - e * u.sin() - ell).rem_euclid(TAU);
                let res = res.min(TAU - res);
                assert!(res <= 1e-13, "residual {res} at ell={ell}, e={e}");
            }
        }
    }

    #[test]
    fn kepler_rejects_bad_eccentricity() {
        assert!(solve_kepler(1.0, 1.0).is_err());
        assert!(solve_kepler(1.0, -0.1).is_err());
        assert!(true_anomaly(1.0, 1.2).is_err());
    }

    #[test]
    fn anomalies_monotone_over_period() {
        for &e in &[0.2, 0.6, 0.95] {
            let mut prev_u = -1.0;
            let mut prev_v = -1.0;
            for i in 0..=2000 {
                let ell = TAU * (i as f64) / 2000.0 * 0.9999;
                let u = solve_kepler(ell, e).unwrap();
                let v = true_anomaly(u, e).unwrap();
                assert!(u > prev_u, "u not increasing at e={e}");
                assert!(v > prev_v, "v not increasing at e={e}");
                prev_u = u;
                prev_v = v;
            }
        }
    }

    #[test]
    fn true_anomaly_analytic_points() {
        assert_eq!(true_anomaly(0.0, 0.3).unwrap(), 0.0);
        // tan(v/2) = sqrt(3) tan(pi/4) => v = 2 pi / 3.
        let v = true_anomaly(FRAC_PI_2, 0.5).unwrap();
        assert!((v - 2.0 * PI / 3.0).abs() < 1e-14);
        // Odd symmetry about u = 2 pi.
        let v2 = true_anomaly(TAU - FRAC_PI_2, 0.5).unwrap();
        assert!((v2 - (TAU - 2.0 * PI / 3.0)).abs() < 1e-13);
        assert!((true_anomaly(PI, 0.8).unwrap() - PI).abs() < 1e-13);
    }

    #[test]
    fn eccentricity_values() {
        assert_eq!(eccentricity(1.0, 1.0).unwrap(), 0.0);
        assert!((eccentricity(2.0, 1.2).unwrap() - 0.8).abs() < 1e-15);
        assert!((eccentricity(1.0, 1e-9).unwrap() - 1.0).abs() < 1e-9);
        assert!(eccentricity(1.0, 1.5).is_err());
    }

    #[test]
    fn h0_values() {
        assert!((h0_delaunay(1.0, 0.5).unwrap() - (-1.0)).abs() < 1e-15);
        assert!((h0_delaunay(1.0, -0.5).unwrap() - 0.0).abs() < 1e-15);
        assert!(h0_delaunay(-1.0, 0.5).is_err());
    }

    #[test]
    fn delaunay_state_invariants() {
        assert!(DelaunayState::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(DelaunayState::new(0.0, 0.0, 1.0, 1.1).is_err());
        assert!(DelaunayState::new(0.0, 0.0, -1.0, 0.5).is_err());
        let s = DelaunayState::new(-0.5, TAU + 0.25, 1.0, 0.8).unwrap();
        assert!((s.ell - (TAU - 0.5)).abs() < 1e-15);
        assert!((s.g - 0.25).abs() < 1e-15);
    }

    #[test]
    fn perihelion_and_aphelion() {
        // Perihelion: e = 0.6, r = 1 - e = 0.4, phi = 0.
        let s = DelaunayState::new(0.0, 0.0, 1.0, 0.8).unwrap();
        let p = delaunay_to_polar(&s).unwrap();
        assert!((p.r - 0.4).abs() < 1e-14);
        assert!(p.phi.abs() < 1e-14);
        // Aphelion: r = 1.6, phi = pi, R = 0.
        let s = DelaunayState::new(PI, 0.0, 1.0, 0.8).unwrap();
        let p = delaunay_to_polar(&s).unwrap();
        assert!((p.r - 1.6).abs() < 1e-13);
        assert!((p.phi - PI).abs() < 1e-13);
        assert!(p.R.abs() < 1e-13);
    }

    #[test]
    fn polar_to_delaunay_perihelion() {
        let p = PolarState::new(0.4, 0.0, 0.0, 0.8).unwrap();
        let d = polar_to_delaunay(&p).unwrap();
        assert!(d.ell.abs() < 1e-12);
        assert!(d.g.abs() < 1e-12);
        assert!((d.L - 1.0).abs() < 1e-12);
        assert!((d.G - 0.8).abs() < 1e-15);
    }

    #[test]
    fn polar_to_delaunay_rejects_unbound_and_circular() {
        // Hyperbolic: large radial momentum.
        let p = PolarState::new(1.0, 0.0, 2.0, 1.0).unwrap();
        assert!(matches!(polar_to_delaunay(&p), Err(KeplerError::Unbound(_))));
        // Circular: r = 1, R = 0, G = 1 has e = 0.
        let p = PolarState::new(1.0, 0.3, 0.0, 1.0).unwrap();
        assert!(polar_to_delaunay(&p).is_err());
    }

    #[test]
    fn delaunay_polar_round_trip_oracle() {
        // (ell=1.0, g=0.5, L=1.2, G=0.9): check by round trip.
        let s = DelaunayState::new(1.0, 0.5, 1.2, 0.9).unwrap();
        let p = delaunay_to_polar(&s).unwrap();
        let back = polar_to_delaunay(&p).unwrap();
        assert!((back.ell - s.ell).abs() < 1e-10);
        assert!((back.g - s.g).abs() < 1e-10);
        assert!((back.L - s.L).abs() < 1e-10);
        assert!((back.G - s.G).abs() < 1e-12);
    }

    #[test]
    fn polar_cartesian_direct_values() {
        let p = PolarState::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let c = polar_to_cartesian(&p).unwrap();
        assert_eq!(c.x, [1.0, 0.0]);
        assert!((c.y[0]).abs() < 1e-15 && (c.y[1] - 1.0).abs() < 1e-15);

        let p = PolarState::new(1.0, FRAC_PI_2, 0.3, 1.0).unwrap();
        let c = polar_to_cartesian(&p).unwrap();
        assert!(c.x[0].abs() < 1e-15 && (c.x[1] - 1.0).abs() < 1e-15);
        assert!((c.y[0] + 1.0).abs() < 1e-15 && (c.y[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn jupiter_shift_exact() {
        let mu = 1e-3;
        let c = RotatingCartesianState {
            x: [1.0 - mu, 0.0],
            y: [0.0, 1.0 - mu],
        };
        let j = cartesian_to_jupiter(&c, mu);
        assert_eq!(j.u, [0.0, 0.0]);
        assert_eq!(j.v, [0.0, 0.0]);

        let c = RotatingCartesianState {
            x: [2.0, 0.0],
            y: [0.0, 0.0],
        };
        assert_eq!(cartesian_to_jupiter(&c, 0.0).u, [1.0, 0.0]);

        let back = jupiter_to_cartesian(&cartesian_to_jupiter(&c, mu), mu);
        assert_eq!(back.x, c.x);
        assert_eq!(back.y, c.y);
    }

    /// 1e4 randomized states in a V_delta-like box: full chart chain round
    /// trips are identity within 1e-10.
    #[test]
    fn chart_round_trips_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mu = 1e-3;
        let mut checked = 0usize;
        while checked < 10_000 {
            let l: f64 = rng.gen_range(0.7..1.4);
            let g_act: f64 = rng.gen_range(0.15..(l - 0.1));
            let ell: f64 = rng.gen_range(0.0..TAU);
            let g_ang: f64 = rng.gen_range(0.0..TAU);
            let s = DelaunayState::new(ell, g_ang, l, g_act).unwrap();
            if s.eccentricity() < 0.05 {
                continue;
            }
            let p = delaunay_to_polar(&s).unwrap();
            let c = polar_to_cartesian(&p).unwrap();
            let j = cartesian_to_jupiter(&c, mu);
            let c2 = jupiter_to_cartesian(&j, mu);
            let p2 = cartesian_to_polar(&c2).unwrap();
            let s2 = polar_to_delaunay(&p2).unwrap();
            assert!(
                crate::angles::circle_dist(s2.ell, s.ell) < 1e-10
                    && crate::angles::circle_dist(s2.g, s.g) < 1e-10
                    && (s2.L - s.L).abs() < 1e-10
                    && (s2.G - s.G).abs() < 1e-10,
                "round trip failed at {s:?} -> {s2:?}"
            );
            // Cartesian-level round trip at tighter tolerance.
            let c3 = polar_to_cartesian(&cartesian_to_polar(&c).unwrap()).unwrap();
            for k in 0..2 {
                assert!((c3.x[k] - c.x[k]).abs() < 1e-12);
                assert!((c3.y[k] - c.y[k]).abs() < 1e-12);
            }
            checked += 1;
        }
    }
}
