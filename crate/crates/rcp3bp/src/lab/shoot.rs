//! Collision shooting: from a probe in V_delta, find a nearby initial
//! condition whose orbit is certified to hit the Jupiter collision.
//!
//! The mechanism follows the geometry of the proof it probes: a
//! one-parameter family of initial conditions near the probe (the mean
//! anomaly shifted within the search window) produces, at the R3 boundary
//! |u| = rho mu^(1/2), an incoming curve that is near-horizontal in the
//! (arg u, arg v) plane of the surface {|u| = rho mu^(1/2), H = h}; the
//! local collision manifold is a slope-one curve arg v = arg u - pi +
//! O(mu) there. A sign change of the difference along the family is
//! located by bisection, and the winner is re-integrated from scratch
//! through the regularized chart to certify the closest approach.

use super::LabError;
use crate::angles::{wrap_pi, wrap_tau};
use crate::collision::{collision_point, in_v_delta, Branch};
use crate::config::ExperimentConfig;
use crate::dynamics::{ham_jupiter, integrate, EventSpec, IntegrationOptions, StopReason};
use crate::kepler::{delaunay_to_jupiter, DelaunayState, JupiterCenteredState};
use crate::levi_civita as lc;

/// Shot summary (the certification record).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ShootResult {
    /// The winning initial condition (probe with the mean anomaly shifted).
    pub initial: DelaunayState,
    /// Closest Jupiter approach of the certified orbit, position units.
    pub min_distance: f64,
    pub hit: bool,
    /// Physical time of the first entry into the collision ball (or of
    /// the closest approach when no hit).
    pub t_hit: f64,
    /// Collision-manifold phase at the intersection.
    pub intersection_psi: f64,
}

/// One point of the numerically-realized incoming curve S1.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct S1Point {
    pub delta_ell: f64,
    pub arg_u: f64,
    pub arg_v: f64,
    pub t_cross: f64,
    pub state: JupiterCenteredState,
}

/// Full outcome with diagnostics (curves exported on a no-hit).
#[derive(Debug, Clone, serde::Serialize)]
pub struct ShootOutcome {
    pub result: ShootResult,
    /// |delta ell| between the probe and the winning initial condition.
    pub probe_distance: f64,
    pub sign_change_observed: bool,
    pub s1_curve: Vec<S1Point>,
    pub upsilon_curve: Vec<lc::CollisionManifoldPoint>,
}

/// The collision manifold sampled over psi in [0, pi) (the two-fold cover
/// repeats it on [pi, 2 pi)), sorted by arg u.
fn upsilon_table(
    cfg: &ExperimentConfig,
    xi: f64,
) -> Result<Vec<lc::CollisionManifoldPoint>, LabError> {
    let n = cfg.n_psi.max(32);
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let psi = std::f64::consts::PI * (i as f64) / n as f64;
        let pt = lc::collision_manifold(psi, cfg.mu, cfg.rho, xi)?;
        pts.push(pt);
    }
    pts.sort_by(|a, b| {
        let aa = wrap_tau(a.u[1].atan2(a.u[0]));
        let bb = wrap_tau(b.u[1].atan2(b.u[0]));
        aa.partial_cmp(&bb).unwrap()
    });
    Ok(pts)
}

/// Interpolate the manifold's arg v (and psi) at a given arg u; the table
/// covers the whole circle, so interpolation wraps around.
fn upsilon_at(table: &[lc::CollisionManifoldPoint], arg_u: f64) -> (f64, f64) {
    let n = table.len();
    let key = wrap_tau(arg_u);
    let arg_u_of = |p: &lc::CollisionManifoldPoint| wrap_tau(p.u[1].atan2(p.u[0]));
    let idx = table.partition_point(|p| arg_u_of(p) < key);
    let (a, b) = if idx == 0 || idx == n {
        (&table[n - 1], &table[0])
    } else {
        (&table[idx - 1], &table[idx])
    };
    let (ua, ub) = (arg_u_of(a), arg_u_of(b));
    let span = wrap_tau(ub - ua);
    let w = if span > 1e-12 {
        (wrap_tau(key - ua) / span).clamp(0.0, 1.0)
    } else {
        0.5
    };
    let va = wrap_tau(a.v[1].atan2(a.v[0]));
    let vb = va + wrap_pi(wrap_tau(b.v[1].atan2(b.v[0])) - va);
    let arg_v = va + w * (vb - va);
    let psi = a.psi + w * wrap_pi(b.psi - a.psi);
    (wrap_tau(arg_v), wrap_tau(psi))
}

/// Integrate a shifted initial condition to the R3 boundary; returns the
/// crossing data when the orbit enters R3 within the time budget.
fn trial_to_r3(
    probe: &DelaunayState,
    delta_ell: f64,
    t_budget: f64,
    cfg: &ExperimentConfig,
) -> Result<Option<S1Point>, LabError> {
    let params = cfg.model_params()?;
    let d = DelaunayState::new(
        probe.ell + delta_ell,
        probe.g,
        probe.L,
        probe.G,
    )?;
    let s0 = delaunay_to_jupiter(&d, cfg.mu)?;
    let opts = IntegrationOptions {
        rtol: cfg.rtol,
        atol: cfg.atol,
        event_t_tol: cfg.event_t_tol,
        dense: false,
        ..Default::default()
    };
    let traj = integrate(
        &s0,
        (0.0, t_budget),
        &opts,
        &[EventSpec::boundary_halt(params.r3_radius())],
        &params,
    );
    if traj.stop != StopReason::HaltingEvent {
        return Ok(None);
    }
    let ev = traj.events.last().expect("halting event");
    Ok(Some(S1Point {
        delta_ell,
        arg_u: wrap_tau(ev.state.u[1].atan2(ev.state.u[0])),
        arg_v: wrap_tau(ev.state.v[1].atan2(ev.state.v[0])),
        t_cross: ev.t,
        state: ev.state,
    }))
}

/// The intersection indicator along S1: signed angular difference between
/// the point's arg v and the manifold's arg v at the same arg u.
fn indicator(p: &S1Point, table: &[lc::CollisionManifoldPoint]) -> f64 {
    let (target, _) = upsilon_at(table, p.arg_u);
    wrap_pi(p.arg_v - target)
}

/// Certify an initial condition: fresh direct integration to the R3
/// boundary, then regularized integration through the collision region.
/// Returns (min distance, t at first collision-ball entry or closest
/// approach, psi at the deepest pass).
fn certify(
    probe: &DelaunayState,
    delta_ell: f64,
    t_budget: f64,
    cfg: &ExperimentConfig,
) -> Result<(f64, f64, f64), LabError> {
    let params = cfg.model_params()?;
    let d = DelaunayState::new(probe.ell + delta_ell, probe.g, probe.L, probe.G)?;
    let s0 = delaunay_to_jupiter(&d, cfg.mu)?;
    let h = ham_jupiter(&s0, cfg.mu)?;
    let xi = lc::xi_from_energy(h, cfg.mu)?;

    let opts = IntegrationOptions {
        rtol: cfg.rtol,
        atol: cfg.atol,
        event_t_tol: cfg.event_t_tol,
        dense: false,
        ..Default::default()
    };
    let traj = integrate(
        &s0,
        (0.0, t_budget),
        &opts,
        &[EventSpec::boundary_halt(params.r3_radius())],
        &params,
    );
    if traj.stop != StopReason::HaltingEvent {
        return Ok((traj.min_distance, traj.t_min_distance, f64::NAN));
    }
    let entry = traj.events.last().expect("halting event");

    // Hand off to the regularized chart.
    let scaled = lc::scale_to_local(&entry.state, cfg.mu);
    let z0 = lc::lc_forward(&scaled, xi);
    let eps_coll = params.collision_epsilon();
    let sigma_budget = 4.0 * (((cfg.rho / 2.0).sqrt()) / lc::delta_mu(cfg.mu, xi)).asinh() + 10.0;
    let reg = lc::integrate_regularized(
        &z0,
        cfg.mu,
        (0.0, sigma_budget),
        cfg.rtol.min(1e-12),
        &[
            lc::RegEventSpec {
                kind: lc::RegEventKind::ScaledRadius {
                    radius: eps_coll / cfg.mu.sqrt(),
                },
                halt: true,
            },
            lc::RegEventSpec {
                kind: lc::RegEventKind::ScaledRadius {
                    radius: 1.2 * cfg.rho,
                },
                halt: true,
            },
        ],
    )?;
    let min_u = 2.0 * reg.min_abs_z * reg.min_abs_z * cfg.mu.sqrt();
    let min_distance = min_u.min(traj.min_distance);
    // Time of the first collision-ball entry, or of the closest approach.
    let t_inner = reg
        .events
        .iter()
        .find(|e| {
            matches!(e.kind, lc::RegEventKind::ScaledRadius { radius } if radius < cfg.rho)
        })
        .map(|e| e.t_phys)
        .unwrap_or_else(|| {
            reg.samples
                .iter()
                .min_by(|a, b| a.z.norm().partial_cmp(&b.z.norm()).unwrap())
                .map(|s| s.t_phys)
                .unwrap_or(0.0)
        });
    // Phase of the deepest pass: from the w-argument at minimal |z| (at
    // the collision datum w = delta e^(i psi)).
    let psi = reg
        .samples
        .iter()
        .min_by(|a, b| a.z.norm().partial_cmp(&b.z.norm()).unwrap())
        .map(|s| wrap_tau(s.w.arg()))
        .unwrap_or(f64::NAN);
    Ok((min_distance, entry.t + t_inner, psi))
}

/// Shoot for a collision from the probe.
pub fn shoot_collision(
    probe: &DelaunayState,
    cfg: &ExperimentConfig,
) -> Result<ShootOutcome, LabError> {
    let vd = cfg.v_delta()?;
    if !in_v_delta(probe, &vd) {
        return Err(LabError::ProbeOutsideVDelta);
    }
    let params = cfg.model_params()?;
    let s_probe = delaunay_to_jupiter(probe, cfg.mu)?;
    let h = ham_jupiter(&s_probe, cfg.mu)?;
    let xi = lc::xi_from_energy(h, cfg.mu)?;
    let upsilon = upsilon_table(cfg, xi)?;

    // Rotation-model candidates: times at which the torus flow revisits
    // the collision phase, ranked by the mean-anomaly mismatch there.
    let omega = probe.L.powi(-3);
    let mut candidates: Vec<(f64, f64)> = Vec::new(); // (|mismatch|, delta_ell_center, t_k) folded below
    let mut cand_full: Vec<(f64, f64, f64)> = Vec::new();
    for branch in [Branch::Plus, Branch::Minus] {
        let cp = collision_point(probe.L, probe.G, cfg.mu, branch)?;
        let t0 = wrap_tau(probe.g - cp.g_col);
        let max_k = cfg.max_periods.ceil() as i64;
        for k in 0..max_k {
            let t_k = t0 + std::f64::consts::TAU * k as f64;
            if t_k < 1e-6 {
                continue;
            }
            let mismatch = wrap_pi(probe.ell + omega * t_k - cp.ell_col);
            cand_full.push((mismatch.abs(), -mismatch, t_k));
        }
    }
    cand_full.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    candidates.extend(cand_full.iter().map(|c| (c.1, c.2)));

    let r3 = params.r3_radius();
    let mut s1_curve: Vec<S1Point> = Vec::new();
    let mut best_no_hit: Option<ShootResult> = None;

    for &(center, t_k) in candidates.iter().take(12) {
        let t_budget = t_k + std::f64::consts::TAU;
        // Coarse scan around the model-predicted center to find the
        // sub-family actually entering R3 (the rotation model carries an
        // O(mu t) phase error).
        let w_coarse = (2.0 * cfg.mu * t_k).max(4.0 * r3);
        let n_coarse = cfg.n_scan.max(24);
        let mut entered: Vec<S1Point> = Vec::new();
        for i in 0..n_coarse {
            let de = center - w_coarse + 2.0 * w_coarse * (i as f64) / (n_coarse - 1) as f64;
            if let Some(pt) = trial_to_r3(probe, de, t_budget, cfg)? {
                entered.push(pt);
            }
        }
        if entered.is_empty() {
            continue;
        }
        // Fine family across the entering window.
        let lo = entered.first().unwrap().delta_ell - 2.0 * w_coarse / n_coarse as f64;
        let hi = entered.last().unwrap().delta_ell + 2.0 * w_coarse / n_coarse as f64;
        let n_fine = cfg.n_segment.max(24);
        let mut family: Vec<S1Point> = Vec::new();
        for i in 0..n_fine {
            let de = lo + (hi - lo) * (i as f64) / (n_fine - 1) as f64;
            if let Some(pt) = trial_to_r3(probe, de, t_budget, cfg)? {
                family.push(pt);
            }
        }
        if family.len() < 3 {
            continue;
        }
        family.sort_by(|a, b| a.delta_ell.partial_cmp(&b.delta_ell).unwrap());
        s1_curve = family.clone();

        // Sign change of the indicator along the family.
        let mut bracket: Option<(S1Point, S1Point)> = None;
        for w in family.windows(2) {
            let fa = indicator(&w[0], &upsilon);
            let fb = indicator(&w[1], &upsilon);
            if fa.is_finite() && fb.is_finite() && (fa > 0.0) != (fb > 0.0) && (fa - fb).abs() < 2.0
            {
                bracket = Some((w[0], w[1]));
                break;
            }
        }
        let Some((mut pa, pb)) = bracket else {
            // Keep the closest approach among the family as a diagnostic.
            for pt in &family {
                let (dist, t, psi) = certify(probe, pt.delta_ell, t_budget, cfg)?;
                let candidate = ShootResult {
                    initial: DelaunayState::new(
                        probe.ell + pt.delta_ell,
                        probe.g,
                        probe.L,
                        probe.G,
                    )?,
                    min_distance: dist,
                    hit: false,
                    t_hit: t,
                    intersection_psi: psi,
                };
                if best_no_hit.map(|b| dist < b.min_distance).unwrap_or(true) {
                    best_no_hit = Some(candidate);
                }
                break;
            }
            continue;
        };

        // Bisection on delta_ell to angle tolerance 1e-10.
        let mut fa = indicator(&pa, &upsilon);
        let mut pb = pb;
        for _ in 0..80 {
            if (pb.delta_ell - pa.delta_ell).abs() < 1e-15
                || fa.abs() < 1e-10
            {
                break;
            }
            let mid = 0.5 * (pa.delta_ell + pb.delta_ell);
            match trial_to_r3(probe, mid, t_budget, cfg)? {
                Some(pm) => {
                    let fm = indicator(&pm, &upsilon);
                    if (fm > 0.0) == (fa > 0.0) {
                        pa = pm;
                        fa = fm;
                    } else {
                        pb = pm;
                    }
                }
                None => break,
            }
        }

        let winner = if indicator(&pa, &upsilon).abs() <= indicator(&pb, &upsilon).abs() {
            pa
        } else {
            pb
        };
        let (_, psi_match) = upsilon_at(&upsilon, winner.arg_u);
        let (min_distance, t_hit, _) = certify(probe, winner.delta_ell, t_budget, cfg)?;
        let eps = params.collision_epsilon();
        let result = ShootResult {
            initial: DelaunayState::new(
                probe.ell + winner.delta_ell,
                probe.g,
                probe.L,
                probe.G,
            )?,
            min_distance,
            hit: min_distance <= eps,
            t_hit,
            intersection_psi: psi_match,
        };
        if result.hit {
            return Ok(ShootOutcome {
                result,
                probe_distance: winner.delta_ell.abs().max(f64::EPSILON),
                sign_change_observed: true,
                s1_curve,
                upsilon_curve: upsilon,
            });
        }
        if best_no_hit
            .map(|b| result.min_distance < b.min_distance)
            .unwrap_or(true)
        {
            best_no_hit = Some(result);
        }
    }

    // No certified hit: report the best diagnostic.
    let result = best_no_hit.unwrap_or(ShootResult {
        initial: *probe,
        min_distance: f64::INFINITY,
        hit: false,
        t_hit: f64::NAN,
        intersection_psi: f64::NAN,
    });
    Ok(ShootOutcome {
        probe_distance: wrap_pi(result.initial.ell - probe.ell).abs().max(f64::EPSILON),
        result,
        sign_change_observed: false,
        s1_curve,
        upsilon_curve: upsilon,
    })
}
