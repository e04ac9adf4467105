//! Mollified flow in the polar chart and the Poincare return map of the
//! section {g = g0} on an energy level of the mollified Hamiltonian.
//!
//! The map is parameterized by (ell, L); the angular momentum G is lifted
//! from the energy and the return is taken along the backward g-cycle, so
//! the integrable (mu = 0) map is exactly (ell - 2 pi / L^3, L) with the
//! twist 1/L^3.

use super::ode::{OdeOptions, OdeSystem, Rkf78, StepControl};
use super::{DynamicsError, IntegrationOptions, ModelParams};
use crate::angles::{wrap_pi, wrap_tau};
use crate::kepler::{polar_to_delaunay, DelaunayState, PolarState};

/// Hamiltonian field of the mollified polar Hamiltonian; `mu = 0` gives the
/// pure Kepler field (all perturbation terms carry a factor of mu).
///
/// State layout: y = [r, phi, R, G].
pub fn mollified_polar_field(y: &[f64; 4], mu: f64, tau: f64) -> [f64; 4] {
    let (r, phi, rad_mom, ang_mom) = (y[0], y[1], y[2], y[3]);
    let r2 = r * r;
    let mut dr_dt = rad_mom;
    let dphi_dt = ang_mom / r2 - 1.0;
    let mut d_rad = ang_mom * ang_mom / (r2 * r) - 1.0 / r2;
    let mut d_ang = 0.0;
    let _ = &mut dr_dt;

    if mu > 0.0 {
        let (dg1_dr, dg1_dphi) = mollified_g1_grad(r, phi, mu, tau);
        let (dg2_dr, dg2_dphi) = g2_grad(r, phi, mu);
        // R' = -dH/dr, G' = -dH/dphi with H = kepler - mu g1hat - mu g2.
        d_rad += mu * (dg1_dr + dg2_dr);
        d_ang += mu * (dg1_dphi + dg2_dphi);
    }
    [dr_dt, dphi_dt, d_rad, d_ang]
}

/// Gradient of the mollified g1 with respect to (r, phi).
fn mollified_g1_grad(r: f64, phi: f64, mu: f64, tau: f64) -> (f64, f64) {
    let scale = mu.powf(tau);
    let cap = 4.0 * mu.powf(-tau);
    let c = phi.cos();
    let s = phi.sin();
    let one_mu = 1.0 - mu;
    let d2 = r * r + one_mu * one_mu - 2.0 * one_mu * r * c;
    let d = d2.max(0.0).sqrt();
    let dd_dr = (r - one_mu * c) / d;
    let dd_dphi = one_mu * r * s / d;

    if d >= 2.0 * scale {
        let f = -1.0 / d2;
        return (f * dd_dr, f * dd_dphi);
    }
    if d <= scale {
        return (0.0, 0.0);
    }
    let z = d / scale;
    let dphi_bump = bump_derivative(z) / scale;
    let f = bump_value(z) * (-1.0 / d2) + dphi_bump * (1.0 / d - cap);
    (f * dd_dr, f * dd_dphi)
}

fn bump_value(z: f64) -> f64 {
    super::bump(z)
}

/// Derivative of the bump on the ramp (1, 2); zero on the plateaus.
fn bump_derivative(z: f64) -> f64 {
    if z <= 1.0 || z >= 2.0 {
        return 0.0;
    }
    let b = |s: f64| (-1.0 / s).exp();
    let db = |s: f64| (-1.0 / s).exp() / (s * s);
    let n = b(z - 1.0);
    let m = b(2.0 - z);
    let dn = db(z - 1.0);
    let dm = -db(2.0 - z);
    (dn * m - n * dm) / ((n + m) * (n + m))
}

/// Gradient of g2, differentiated in its cancellation-free form
/// g2 = -(2 r^2 + 2 r cos(phi) + mu (1 - r^2)) / (d r ((1-mu) r + d))
/// with d = |x + (mu, 0)|.
fn g2_grad(r: f64, phi: f64, mu: f64) -> (f64, f64) {
    let c = phi.cos();
    let s = phi.sin();
    let d = (r * r + 2.0 * mu * r * c + mu * mu).sqrt();
    let dd_dr = (r + mu * c) / d;
    let dd_dphi = -mu * r * s / d;
    let one_mu = 1.0 - mu;
    let num = 2.0 * r * r + 2.0 * r * c + mu * (1.0 - r * r);
    let den = d * r * (one_mu * r + d);
    let dnum_dr = 4.0 * r + 2.0 * c - 2.0 * mu * r;
    let dnum_dphi = -2.0 * r * s;
    let dden_dr =
        dd_dr * r * (one_mu * r + d) + d * (one_mu * r + d) + d * r * (one_mu + dd_dr);
    let dden_dphi = dd_dphi * r * (one_mu * r + 2.0 * d);
    (
        -(dnum_dr * den - num * dden_dr) / (den * den),
        -(dnum_dphi * den - num * dden_dphi) / (den * den),
    )
}

struct MollifiedPolarSystem {
    mu: f64,
    tau: f64,
}

impl OdeSystem<4> for MollifiedPolarSystem {
    fn rhs(&self, _t: f64, y: &[f64; 4], dydt: &mut [f64; 4]) {
        *dydt = mollified_polar_field(y, self.mu, self.tau);
    }
}

fn delaunay_of_polar(y: &[f64; 4]) -> Result<DelaunayState, crate::kepler::KeplerError> {
    let p = PolarState::new(y[0], y[1], y[2], y[3])?;
    polar_to_delaunay(&p)
}

/// Poincare return map of {g = g0} at mollified energy h, acting on
/// (ell, L). The return is the first crossing along the backward g-cycle,
/// so at mu = 0 the map is exactly (ell - 2 pi omega(L), L) with
/// omega(L) = 1/L^3.
pub fn poincare_map(
    h: f64,
    g0: f64,
    p: (f64, f64),
    mu: f64,
    tau: f64,
    opts: &IntegrationOptions,
) -> Result<(f64, f64), DynamicsError> {
    let (ell, big_l) = p;
    if !(-1.5..(2.0f64).sqrt()).contains(&h) {
        return Err(DynamicsError::LiftInfeasible(format!(
            "energy h = {h} outside (-3/2, sqrt(2))"
        )));
    }
    if !(big_l > 0.0) {
        return Err(DynamicsError::LiftInfeasible(format!("L = {big_l} <= 0")));
    }

    // Lift: solve mollified H(ell, g0, L, G) = h for G near the integrable
    // value -1/(2 L^2) - h by a secant iteration.
    let eval = |g_act: f64| -> Result<f64, DynamicsError> {
        let d = DelaunayState::new(ell, g0, big_l, g_act)
            .map_err(|e| DynamicsError::LiftInfeasible(e.to_string()))?;
        let pol = crate::kepler::delaunay_to_polar(&d)
            .map_err(|e| DynamicsError::LiftInfeasible(e.to_string()))?;
        if mu == 0.0 {
            Ok(0.5 * pol.R * pol.R + 0.5 * pol.G * pol.G / (pol.r * pol.r) - pol.G - 1.0 / pol.r
                - h)
        } else {
            let params = ModelParams {
                mu,
                tau,
                rho: super::RHO_DEFAULT,
            };
            Ok(super::mollified_ham(&pol, &params)? - h)
        }
    };

    let mut g_act = -0.5 / (big_l * big_l) - h;
    if g_act.abs() >= big_l || g_act == 0.0 {
        return Err(DynamicsError::LiftInfeasible(format!(
            "integrable lift G = {g_act} incompatible with L = {big_l}"
        )));
    }
    let mut f = eval(g_act)?;
    for _ in 0..60 {
        if f.abs() <= 1e-13 {
            break;
        }
        let dg = 1e-7 * (1.0 + g_act.abs());
        let f2 = eval(g_act + dg)?;
        let slope = (f2 - f) / dg;
        if slope == 0.0 || !slope.is_finite() {
            return Err(DynamicsError::LiftInfeasible("flat energy slope".into()));
        }
        g_act -= f / slope;
        f = eval(g_act)?;
    }
    if f.abs() > 1e-11 {
        return Err(DynamicsError::LiftInfeasible(format!(
            "energy residual {f} after lift iteration"
        )));
    }

    let d0 = DelaunayState::new(ell, g0, big_l, g_act)
        .map_err(|e| DynamicsError::LiftInfeasible(e.to_string()))?;
    let pol0 = crate::kepler::delaunay_to_polar(&d0)?;
    let y0 = [pol0.r, pol0.phi, pol0.R, pol0.G];

    let sys = MollifiedPolarSystem { mu, tau };
    // Fixed-step integration: the return map is differentiated by finite
    // differences in tests and calibration, which needs the flow to be a
    // smooth function of the initial point (adaptive step-size sequences
    // jitter discretely between neighboring orbits).
    let ode_opts = OdeOptions::fixed_step(std::f64::consts::TAU / 8192.0);
    let mut solver = Rkf78::new(ode_opts);

    // Section indicator: sin(g - g0) with cos(g - g0) > 1/2, past half a
    // g-cycle so the departure crossing is not re-detected.
    let g_sin = |y: &[f64; 4]| -> f64 {
        match delaunay_of_polar(y) {
            Ok(d) => wrap_pi(d.g - g0).sin(),
            Err(_) => f64::NAN,
        }
    };
    let g_cos = |y: &[f64; 4]| -> f64 {
        match delaunay_of_polar(y) {
            Ok(d) => wrap_pi(d.g - g0).cos(),
            Err(_) => f64::NAN,
        }
    };

    let t_max = -4.0 * std::f64::consts::TAU;
    let locator_opts = solver.opts.clone();
    let mut prev = 0.0f64;
    let mut hit: Option<(f64, [f64; 4])> = None;
    let drive_result = solver.drive(&sys, 0.0, &y0, t_max, &mut |t_a, y_a, t_b, y_b, h| {
        let s_b = g_sin(y_b);
        let fired = t_b <= -std::f64::consts::PI
            && prev.is_finite()
            && s_b.is_finite()
            && (prev > 0.0) != (s_b > 0.0)
            && g_cos(y_b) > 0.5;
        if fired {
            let mut locator = Rkf78::new(locator_opts.clone());
            let gfun = |_t: f64, y: &[f64; 4]| g_sin(y);
            let (te, ye) =
                locator.locate_event(&sys, t_a, y_a, h, g_sin(y_a), &gfun, opts.event_t_tol);
            hit = Some((te, ye));
            return StepControl::Stop;
        }
        prev = s_b;
        StepControl::Continue
    });
    drive_result.map_err(|e| DynamicsError::Ode(e.to_string()))?;

    let (_, ye) = hit.ok_or_else(|| {
        DynamicsError::LiftInfeasible("no section return within 4 g-cycles".into())
    })?;
    let d_ret = delaunay_of_polar(&ye)?;
    Ok((wrap_tau(d_ret.ell), d_ret.L))
}
