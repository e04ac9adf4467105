//! Trajectory integration of the Jupiter-centered system with event
//! location, plus a fixed-step symplectic (order 4) variant for long-time
//! drift studies.

use super::ode::{OdeOptions, OdeSystem, Rkf78, StepControl};
use super::{flow_lin, jacobi_constant, potential_gradient, vector_field, ModelParams};
use crate::angles::wrap_pi;
use crate::kepler::JupiterCenteredState;

/// Event kinds the integrator can watch for.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum EventKind {
    /// Crossing of the Delaunay section g = g0 (requires a bound state).
    SectionG { g0: f64 },
    /// Crossing of the sphere |u| = radius.
    RegionBoundary { radius: f64 },
    /// Local minimum of the distance to Jupiter (records, never stops).
    MinDistance,
    /// |u| fell below the collision threshold; integration halts.
    Collision { epsilon: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct EventSpec {
    pub kind: EventKind,
    /// Stop the integration when this event fires.
    pub halt: bool,
}

impl EventSpec {
    pub fn boundary(radius: f64) -> Self {
        Self {
            kind: EventKind::RegionBoundary { radius },
            halt: false,
        }
    }

    pub fn boundary_halt(radius: f64) -> Self {
        Self {
            kind: EventKind::RegionBoundary { radius },
            halt: true,
        }
    }

    pub fn collision(epsilon: f64) -> Self {
        Self {
            kind: EventKind::Collision { epsilon },
            halt: true,
        }
    }

    pub fn min_distance() -> Self {
        Self {
            kind: EventKind::MinDistance,
            halt: false,
        }
    }

    pub fn section(g0: f64) -> Self {
        Self {
            kind: EventKind::SectionG { g0 },
            halt: false,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TrajectoryEvent {
    pub t: f64,
    pub kind: EventKind,
    pub state: JupiterCenteredState,
}

/// Why the integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StopReason {
    ReachedFinalTime,
    HaltingEvent,
    /// Step size underflowed near a singularity; the closest approach seen
    /// so far is recorded on the trajectory.
    StepUnderflow,
}

/// Sampled orbit of the Jupiter-centered system. Sample times are strictly
/// monotone in the integration direction; the Jacobi constant is recorded
/// per sample so drift is visible in exports.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, JupiterCenteredState)>,
    pub events: Vec<TrajectoryEvent>,
    pub stop: StopReason,
    /// Closest Jupiter approach observed (distance, time, state).
    pub min_distance: f64,
    pub t_min_distance: f64,
    pub state_min_distance: JupiterCenteredState,
    pub mu: f64,
}

impl Trajectory {
    /// Maximum |J(t) - J(0)| over the samples.
    pub fn jacobi_drift(&self) -> f64 {
        let mut worst = 0.0f64;
        if let Some(&(_, s0)) = self.samples.first() {
            if let Ok(j0) = jacobi_constant(&s0, self.mu) {
                for (_, s) in &self.samples {
                    if let Ok(j) = jacobi_constant(s, self.mu) {
                        worst = worst.max((j - j0).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn final_state(&self) -> Option<(f64, JupiterCenteredState)> {
        self.samples.last().copied()
    }
}

#[derive(Debug, Clone)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Bisection tolerance for event times.
    pub event_t_tol: f64,
    pub max_steps: u64,
    /// Keep every accepted step in `samples` when true; otherwise only the
    /// endpoints and events.
    pub dense: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            event_t_tol: 1e-12,
            max_steps: 50_000_000,
            dense: true,
        }
    }
}

struct JupiterSystem {
    mu: f64,
}

impl OdeSystem<4> for JupiterSystem {
    fn rhs(&self, _t: f64, y: &[f64; 4], dydt: &mut [f64; 4]) {
        let s = JupiterCenteredState {
            u: [y[0], y[1]],
            v: [y[2], y[3]],
        };
        match vector_field(&s, self.mu) {
            Ok(f) => *dydt = f,
            // At the singularity the driver sees non-finite values and
            // reports underflow; produce them explicitly.
            Err(_) => *dydt = [f64::NAN; 4],
        }
    }
}

fn pack(s: &JupiterCenteredState) -> [f64; 4] {
    [s.u[0], s.u[1], s.v[0], s.v[1]]
}

fn unpack(y: &[f64; 4]) -> JupiterCenteredState {
    JupiterCenteredState {
        u: [y[0], y[1]],
        v: [y[2], y[3]],
    }
}

fn dist(y: &[f64; 4]) -> f64 {
    (y[0] * y[0] + y[1] * y[1]).sqrt()
}

/// Scalar event function per kind. MinDistance watches the radial rate
/// d|u|^2/dt; its zero crossings from negative to positive are the local
/// minima of the Jupiter distance.
fn event_value(kind: &EventKind, y: &[f64; 4], mu: f64) -> f64 {
    match kind {
        EventKind::RegionBoundary { radius } => dist(y) - radius,
        EventKind::Collision { epsilon } => dist(y) - epsilon,
        EventKind::MinDistance => {
            let s = unpack(y);
            match vector_field(&s, mu) {
                Ok(f) => y[0] * f[0] + y[1] * f[1],
                Err(_) => f64::NAN,
            }
        }
        EventKind::SectionG { g0 } => {
            let s = unpack(y);
            match crate::kepler::jupiter_to_delaunay(&s, mu) {
                Ok(d) => wrap_pi(d.g - g0),
                Err(_) => f64::NAN,
            }
        }
    }
}

/// Adaptive integration of the Jupiter-centered system from `s0` over
/// `t_span = (t0, tf)` with event location by bisection.
///
/// A `Collision` event halts; step-size underflow near the singularity is
/// not an error: the trajectory is returned with `StopReason::StepUnderflow`
/// and the closest approach recorded.
pub fn integrate(
    s0: &JupiterCenteredState,
    t_span: (f64, f64),
    opts: &IntegrationOptions,
    events: &[EventSpec],
    params: &ModelParams,
) -> Trajectory {
    let mu = params.mu;
    let sys = JupiterSystem { mu };
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        max_steps: opts.max_steps,
        h_init: 1e-4 * (t_span.1 - t_span.0).signum().max(-1.0)
            * if t_span.1 >= t_span.0 { 1.0 } else { 1.0 },
        ..Default::default()
    };
    let mut solver = Rkf78::new(ode_opts);

    let mut traj = Trajectory {
        samples: vec![(t_span.0, *s0)],
        events: Vec::new(),
        stop: StopReason::ReachedFinalTime,
        min_distance: s0.dist(),
        t_min_distance: t_span.0,
        state_min_distance: *s0,
        mu,
    };

    let y0 = pack(s0);
    let mut g_prev: Vec<f64> = events
        .iter()
        .map(|e| event_value(&e.kind, &y0, mu))
        .collect();

    let locator_opts = solver.opts.clone();
    let mut halted = false;
    let result = solver.drive(&sys, t_span.0, &y0, t_span.1, &mut |t_a, y_a, t_b, y_b, h| {
        let mut control = StepControl::Continue;
        for (idx, ev) in events.iter().enumerate() {
            let g_b = event_value(&ev.kind, y_b, mu);
            let g_a = g_prev[idx];
            let fired = match ev.kind {
                // Collision fires on |u| dropping through epsilon.
                EventKind::Collision { .. } => g_a > 0.0 && g_b <= 0.0,
                // Minimum distance: radial rate goes - to +.
                EventKind::MinDistance => g_a < 0.0 && g_b >= 0.0,
                _ => g_a.is_finite() && g_b.is_finite() && (g_a > 0.0) != (g_b > 0.0),
            };
            if fired {
                let mut locator = Rkf78::new(locator_opts.clone());
                let gfun = |_t: f64, y: &[f64; 4]| event_value(&ev.kind, y, mu);
                let (te, ye) =
                    locator.locate_event(&sys, t_a, y_a, h, g_a, &gfun, opts.event_t_tol);
                let se = unpack(&ye);
                traj.events.push(TrajectoryEvent {
                    t: te,
                    kind: ev.kind,
                    state: se,
                });
                let d = se.dist();
                if d < traj.min_distance {
                    traj.min_distance = d;
                    traj.t_min_distance = te;
                    traj.state_min_distance = se;
                }
                if ev.halt {
                    traj.samples.push((te, se));
                    halted = true;
                    control = StepControl::Stop;
                }
            }
            g_prev[idx] = g_b;
        }
        if control == StepControl::Continue {
            let s_b = unpack(y_b);
            let d = s_b.dist();
            if d < traj.min_distance {
                traj.min_distance = d;
                traj.t_min_distance = t_b;
                traj.state_min_distance = s_b;
            }
            if opts.dense {
                traj.samples.push((t_b, s_b));
            }
        }
        control
    });

    match result {
        Ok((t, y)) => {
            if halted {
                traj.stop = StopReason::HaltingEvent;
            } else {
                traj.stop = StopReason::ReachedFinalTime;
                let s = unpack(&y);
                if !opts.dense {
                    traj.samples.push((t, s));
                } else if traj.samples.last().map(|&(tl, _)| tl) != Some(t) {
                    traj.samples.push((t, s));
                }
            }
        }
        Err(_) => {
            traj.stop = StopReason::StepUnderflow;
        }
    }
    traj
}

/// Fixed-step 4th-order symplectic integration via a three-fold Strang
/// composition: the linear part flows exactly with [`flow_lin`], the
/// potential acts as momentum kicks.
pub fn integrate_symplectic(
    s0: &JupiterCenteredState,
    t_final: f64,
    dt: f64,
    mu: f64,
) -> Vec<(f64, JupiterCenteredState)> {
    // Yoshida composition weights.
    let cbrt2 = 2.0f64.cbrt();
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 / (2.0 - cbrt2);

    let strang = |s: &JupiterCenteredState, h: f64| {
        let mut s = flow_lin(s, 0.5 * h);
        let grad = potential_gradient(s.u, mu);
        s.v[0] -= h * grad[0];
        s.v[1] -= h * grad[1];
        flow_lin(&s, 0.5 * h)
    };

    let n = (t_final / dt).abs().round().max(1.0) as usize;
    let h = t_final / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut s = *s0;
    out.push((0.0, s));
    for i in 1..=n {
        s = strang(&s, w1 * h);
        s = strang(&s, w0 * h);
        s = strang(&s, w1 * h);
        out.push((i as f64 * h, s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ham_jupiter;
    use crate::kepler::{delaunay_to_jupiter, DelaunayState};
    use std::f64::consts::TAU;

    #[test]
    fn circular_orbit_radius_constant() {
        // mu = 0, e = 0: the circular orbit x = (-1, 0), y = (0, -1) keeps
        // |x| = 1 to 1e-9 over 100 periods.
        let mu = 0.0;
        let s0 = JupiterCenteredState {
            u: [-2.0, 0.0],
            v: [0.0, -2.0],
        };
        let sys = move |_t: f64, yv: &[f64; 4], d: &mut [f64; 4]| {
            let st = JupiterCenteredState {
                u: [yv[0], yv[1]],
                v: [yv[2], yv[3]],
            };
            *d = vector_field(&st, mu).unwrap();
        };
        let mut solver = Rkf78::new(OdeOptions::default());
        let mut max_dev = 0.0f64;
        let y0 = pack(&s0);
        solver
            .drive(&sys, 0.0, &y0, 100.0 * TAU, &mut |_, _, _, yb, _| {
                let r = ((yb[0] + 1.0).powi(2) + yb[1].powi(2)).sqrt();
                max_dev = max_dev.max((r - 1.0).abs());
                StepControl::Continue
            })
            .unwrap();
        assert!(max_dev < 1e-9, "radius deviation {max_dev}");
    }

    #[test]
    fn jacobi_drift_small() {
        let params = ModelParams::standard(1e-3).unwrap();
        let d = DelaunayState::new(1.0, 2.0, 1.1, 0.85).unwrap();
        let s0 = delaunay_to_jupiter(&d, params.mu).unwrap();
        let traj = integrate(&s0, (0.0, 20.0), &IntegrationOptions::default(), &[], &params);
        assert_eq!(traj.stop, StopReason::ReachedFinalTime);
        assert!(traj.jacobi_drift() < 20.0 * 1e-9, "drift {}", traj.jacobi_drift());
    }

    #[test]
    fn time_reversal() {
        let params = ModelParams::standard(1e-3).unwrap();
        let d = DelaunayState::new(0.7, 1.2, 1.05, 0.8).unwrap();
        let s0 = delaunay_to_jupiter(&d, params.mu).unwrap();
        let fwd = integrate(&s0, (0.0, 15.0), &IntegrationOptions::default(), &[], &params);
        let (t1, s1) = fwd.final_state().unwrap();
        assert!((t1 - 15.0).abs() < 1e-10);
        let bwd = integrate(&s1, (15.0, 0.0), &IntegrationOptions::default(), &[], &params);
        let (_, s2) = bwd.final_state().unwrap();
        for k in 0..2 {
            assert!((s2.u[k] - s0.u[k]).abs() < 1e-8, "u[{k}] {} vs {}", s2.u[k], s0.u[k]);
            assert!((s2.v[k] - s0.v[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn boundary_event_located() {
        // Head straight at Jupiter from |u| = 0.5 and watch the crossing of
        // |u| = 0.25: the event time matches a plain integration's state.
        let params = ModelParams::standard(1e-4).unwrap();
        let s0 = JupiterCenteredState {
            u: [0.5, 0.0],
            v: [-1.0, 0.48],
        };
        let traj = integrate(
            &s0,
            (0.0, 2.0),
            &IntegrationOptions::default(),
            &[EventSpec::boundary_halt(0.25)],
            &params,
        );
        assert_eq!(traj.stop, StopReason::HaltingEvent);
        let ev = traj.events.last().unwrap();
        assert!((ev.state.dist() - 0.25).abs() < 1e-10, "dist {}", ev.state.dist());
        // Energy at the event equals the initial energy.
        let h0 = ham_jupiter(&s0, params.mu).unwrap();
        let he = ham_jupiter(&ev.state, params.mu).unwrap();
        assert!((he - h0).abs() < 1e-10);
    }

    #[test]
    fn collision_event_halts() {
        let params = ModelParams::standard(1e-4).unwrap();
        // Head-on from just outside R3; Coriolis drift over this distance
        // stays below the gravitational-focusing capture radius.
        let s0 = JupiterCenteredState {
            u: [0.001, 0.0],
            v: [-1.0, 0.0],
        };
        let eps = params.collision_epsilon();
        let traj = integrate(
            &s0,
            (0.0, 1.0),
            &IntegrationOptions::default(),
            &[EventSpec::collision(eps)],
            &params,
        );
        assert_eq!(traj.stop, StopReason::HaltingEvent);
        assert!(traj.min_distance <= eps * 1.0001);
    }

    #[test]
    fn min_distance_event_records_minima() {
        let params = ModelParams::standard(1e-3).unwrap();
        let d = DelaunayState::new(0.3, 0.8, 1.1, 0.9).unwrap();
        let s0 = delaunay_to_jupiter(&d, params.mu).unwrap();
        let traj = integrate(
            &s0,
            (0.0, 40.0),
            &IntegrationOptions::default(),
            &[EventSpec::min_distance()],
            &params,
        );
        let minima: Vec<_> = traj
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::MinDistance))
            .collect();
        assert!(!minima.is_empty());
        // The recorded global minimum is no larger than any sampled distance.
        for (_, s) in &traj.samples {
            assert!(traj.min_distance <= s.dist() + 1e-12);
        }
    }

    #[test]
    fn symplectic_energy_drift_bounded() {
        let mu = 1e-3;
        let d = DelaunayState::new(1.3, 0.4, 1.05, 0.82).unwrap();
        let s0 = delaunay_to_jupiter(&d, mu).unwrap();
        let h0 = ham_jupiter(&s0, mu).unwrap();
        let out = integrate_symplectic(&s0, 200.0, 1e-3, mu);
        let mut worst = 0.0f64;
        for (_, s) in out.iter().step_by(100) {
            worst = worst.max((ham_jupiter(s, mu).unwrap() - h0).abs());
        }
        // No secular growth: the bound holds over 200 time units.
        assert!(worst < 1e-9, "symplectic drift {worst}");
    }
}
