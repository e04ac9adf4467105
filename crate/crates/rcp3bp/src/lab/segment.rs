//! Transition-zone evolution: push a near-constant-velocity segment from
//! the outer boundary |u| = mu^tau of R2 down to the inner boundary
//! |u| = rho mu^(1/2), recording arrival states, velocity spread, crossing
//! times and angular coverage of the arrival arc.

use super::LabError;
use crate::config::ExperimentConfig;
use crate::dynamics::{flow_lin, integrate, EventSpec, IntegrationOptions, StopReason};
use crate::kepler::JupiterCenteredState;

/// Incoming segment on |u| = mu^tau: a graph over the arc
/// s in [pi/2 + varpi, 3pi/2 - varpi] measured from the velocity
/// direction, with constant velocity v0.
#[derive(Debug, Clone)]
pub struct SegmentSpec {
    pub v0: [f64; 2],
    /// Sample count per refinement pass.
    pub n: usize,
}

impl SegmentSpec {
    pub fn new(v0: [f64; 2], n: usize) -> Self {
        Self { v0, n }
    }

    /// The segment point at arc parameter s (angle from the v0 direction).
    pub fn point(&self, s: f64, radius: f64) -> JupiterCenteredState {
        let speed = (self.v0[0] * self.v0[0] + self.v0[1] * self.v0[1]).sqrt();
        let dir = [self.v0[0] / speed, self.v0[1] / speed];
        let (sin_s, cos_s) = s.sin_cos();
        // radius * e^(i s) * dir in complex form.
        JupiterCenteredState {
            u: [
                radius * (cos_s * dir[0] - sin_s * dir[1]),
                radius * (sin_s * dir[0] + cos_s * dir[1]),
            ],
            v: self.v0,
        }
    }
}

/// One segment point that reached the inner boundary.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ArrivalSample {
    /// Arc parameter on the outgoing segment.
    pub s: f64,
    /// Crossing time of |u| = rho mu^(1/2).
    pub t_cross: f64,
    pub state: JupiterCenteredState,
    /// Argument of u at arrival, measured from the v0 direction.
    pub arg_u_rel: f64,
    /// |v - v0| at arrival.
    pub velocity_drift: f64,
}

#[derive(Debug, Clone)]
pub struct R2Evolution {
    pub arrivals: Vec<ArrivalSample>,
    /// Samples that left R2 outward (flagged and dropped).
    pub dropped_outward: usize,
    pub max_velocity_drift: f64,
    pub max_crossing_time: f64,
    /// Fraction of the target sector [pi/2 + varpi/2, 3pi/2 - varpi/2]
    /// covered by arrivals within one grid spacing.
    pub sector_coverage: f64,
}

fn angle_rel(u: [f64; 2], v0: [f64; 2]) -> f64 {
    let a = u[1].atan2(u[0]) - v0[1].atan2(v0[0]);
    crate::angles::wrap_tau(a)
}

/// Evolve one segment point under the full flow until it crosses the R3
/// boundary inward or escapes outward. Returns None for outward escapes
/// and timeouts.
fn evolve_point(
    p: &JupiterCenteredState,
    cfg: &ExperimentConfig,
    r_in: f64,
    r_out_escape: f64,
) -> Result<Option<(f64, JupiterCenteredState)>, LabError> {
    let params = cfg.model_params()?;
    let speed = (p.v[0] * p.v[0] + p.v[1] * p.v[1]).sqrt();
    let t_max = 10.0 * params.r2_outer_radius() / speed.max(0.1);
    let opts = IntegrationOptions {
        rtol: cfg.rtol,
        atol: cfg.atol,
        event_t_tol: cfg.event_t_tol,
        dense: false,
        ..Default::default()
    };
    let traj = integrate(
        p,
        (0.0, t_max),
        &opts,
        &[
            EventSpec::boundary_halt(r_in),
            EventSpec::boundary_halt(r_out_escape),
        ],
        &params,
    );
    if traj.stop != StopReason::HaltingEvent {
        return Ok(None);
    }
    let ev = traj.events.last().expect("halting event recorded");
    if ev.state.dist() > 0.5 * (r_in + r_out_escape) {
        return Ok(None); // outward escape
    }
    Ok(Some((ev.t, ev.state)))
}

/// Evolve the segment through R2 to the R3 boundary.
///
/// A coarse pass over the full arc finds the sub-segment whose orbits
/// reach the inner boundary (only near-head-on points do: their impact
/// parameters sweep the R3 disc); a refinement pass resolves that window
/// so the arrival arc covers the target sector.
pub fn evolve_segment_r2(
    spec: &SegmentSpec,
    cfg: &ExperimentConfig,
) -> Result<R2Evolution, LabError> {
    let params = cfg.model_params()?;
    let r_seg = params.r2_outer_radius();
    let r_in = params.r3_radius();
    let r_escape = 1.05 * r_seg;
    let (s_lo, s_hi) = (
        std::f64::consts::FRAC_PI_2 + cfg.varpi,
        1.5 * std::f64::consts::PI - cfg.varpi,
    );

    let mut dropped = 0usize;
    let mut arrivals: Vec<ArrivalSample> = Vec::new();
    let mut push_arrival = |s: f64, t: f64, st: JupiterCenteredState, arr: &mut Vec<ArrivalSample>| {
        let dv = ((st.v[0] - spec.v0[0]).powi(2) + (st.v[1] - spec.v0[1]).powi(2)).sqrt();
        arr.push(ArrivalSample {
            s,
            t_cross: t,
            state: st,
            arg_u_rel: angle_rel(st.u, spec.v0),
            velocity_drift: dv,
        });
    };

    // Coarse pass.
    let n = spec.n.max(8);
    let mut hit_window: Option<(f64, f64)> = None;
    for i in 0..n {
        let s = s_lo + (s_hi - s_lo) * (i as f64) / ((n - 1) as f64);
        let p = spec.point(s, r_seg);
        match evolve_point(&p, cfg, r_in, r_escape)? {
            Some((t, st)) => {
                push_arrival(s, t, st, &mut arrivals);
                hit_window = Some(match hit_window {
                    None => (s, s),
                    Some((a, b)) => (a.min(s), b.max(s)),
                });
            }
            None => dropped += 1,
        }
    }

    // Refinement around the hitting window (pad by one coarse spacing).
    if let Some((a, b)) = hit_window {
        let pad = (s_hi - s_lo) / ((n - 1) as f64);
        let (ra, rb) = ((a - pad).max(s_lo), (b + pad).min(s_hi));
        for i in 0..n {
            let s = ra + (rb - ra) * (i as f64) / ((n - 1) as f64);
            let p = spec.point(s, r_seg);
            match evolve_point(&p, cfg, r_in, r_escape)? {
                Some((t, st)) => push_arrival(s, t, st, &mut arrivals),
                None => dropped += 1,
            }
        }
    }

    arrivals.sort_by(|x, y| x.s.partial_cmp(&y.s).unwrap());

    let max_velocity_drift = arrivals
        .iter()
        .map(|a| a.velocity_drift)
        .fold(0.0, f64::max);
    let max_crossing_time = arrivals.iter().map(|a| a.t_cross).fold(0.0, f64::max);

    // Coverage of the target sector by arrival angles.
    let sector = (
        std::f64::consts::FRAC_PI_2 + 0.5 * cfg.varpi,
        1.5 * std::f64::consts::PI - 0.5 * cfg.varpi,
    );
    let grid = 64;
    let mut covered = 0;
    for i in 0..grid {
        let theta = sector.0 + (sector.1 - sector.0) * (i as f64 + 0.5) / grid as f64;
        let tol = 1.5 * (sector.1 - sector.0) / grid as f64
            + 2.0 * (sector.1 - sector.0) / arrivals.len().max(2) as f64;
        if arrivals
            .iter()
            .any(|a| crate::angles::circle_dist(a.arg_u_rel, theta) < tol)
        {
            covered += 1;
        }
    }

    Ok(R2Evolution {
        arrivals,
        dropped_outward: dropped,
        max_velocity_drift,
        max_crossing_time,
        sector_coverage: covered as f64 / grid as f64,
    })
}

/// Closed-form arrival under the linear flow: the first t > 0 with
/// |flow_lin(p, t).u| = r_in, by bisection on the monotone approach
/// (None if the linear orbit never reaches the radius).
pub fn linear_arrival(p: &JupiterCenteredState, r_in: f64) -> Option<(f64, JupiterCenteredState)> {
    let radius = |t: f64| {
        let s = flow_lin(p, t);
        (s.u[0] * s.u[0] + s.u[1] * s.u[1]).sqrt() - r_in
    };
    // Bracket the first down-crossing by marching a fine grid.
    let speed = (p.v[0] * p.v[0] + p.v[1] * p.v[1]).sqrt();
    let t_max = 10.0 * (p.u[0] * p.u[0] + p.u[1] * p.u[1]).sqrt() / speed.max(0.1);
    let n = 4000;
    let mut t_prev = 0.0;
    let mut f_prev = radius(0.0);
    for i in 1..=n {
        let t = t_max * (i as f64) / n as f64;
        let f = radius(t);
        if f_prev > 0.0 && f <= 0.0 {
            let (mut lo, mut hi) = (t_prev, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if radius(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t_hit = 0.5 * (lo + hi);
            return Some((t_hit, flow_lin(p, t_hit)));
        }
        t_prev = t;
        f_prev = f;
    }
    None
}
