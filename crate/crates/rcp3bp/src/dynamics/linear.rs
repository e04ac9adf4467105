//! The linear transition-zone Hamiltonian H_lin = |v|^2/2 - u^T J v and its
//! closed-form flow: a first order of the full dynamics valid where |u| is
//! small and the velocity is O(1).

use crate::kepler::JupiterCenteredState;

/// H_lin(u, v) = |v|^2/2 - u^T J v.
pub fn ham_lin(s: &JupiterCenteredState) -> f64 {
    0.5 * (s.v[0] * s.v[0] + s.v[1] * s.v[1]) - (s.u[0] * s.v[1] - s.u[1] * s.v[0])
}

/// Hamiltonian vector field of H_lin:
/// du1 = v1 + u2, du2 = v2 - u1, dv1 = v2, dv2 = -v1.
pub fn vector_field_lin(s: &JupiterCenteredState) -> [f64; 4] {
    [
        s.v[0] + s.u[1],
        s.v[1] - s.u[0],
        s.v[1],
        -s.v[0],
    ]
}

/// Closed-form flow of H_lin: with the rotation rot(t) = [[cos t, sin t],
/// [-sin t, cos t]], u(t) = rot(t) (u0 + t v0) and v(t) = rot(t) v0.
pub fn flow_lin(s0: &JupiterCenteredState, t: f64) -> JupiterCenteredState {
    let (sin_t, cos_t) = t.sin_cos();
    let rot = |p: [f64; 2]| [cos_t * p[0] + sin_t * p[1], -sin_t * p[0] + cos_t * p[1]];
    let drift = [s0.u[0] + t * s0.v[0], s0.u[1] + t * s0.v[1]];
    JupiterCenteredState {
        u: rot(drift),
        v: rot(s0.v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ode::{OdeOptions, Rkf78};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_at_zero() {
        let s = JupiterCenteredState {
            u: [0.3, -0.2],
            v: [1.1, 0.4],
        };
        let out = flow_lin(&s, 0.0);
        assert_eq!(out.u, s.u);
        assert_eq!(out.v, s.v);
    }

    #[test]
    fn quarter_turn() {
        // u0 = 0, v0 = (1,0), t = pi/2: v = (0,-1), u = (pi/2)(0,-1).
        let s = JupiterCenteredState {
            u: [0.0, 0.0],
            v: [1.0, 0.0],
        };
        let out = flow_lin(&s, FRAC_PI_2);
        assert!(out.v[0].abs() < 1e-15 && (out.v[1] + 1.0).abs() < 1e-15);
        assert!(out.u[0].abs() < 1e-15 && (out.u[1] + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn group_property() {
        let s = JupiterCenteredState {
            u: [0.2, 0.1],
            v: [-0.4, 0.9],
        };
        let a = flow_lin(&flow_lin(&s, 0.37), 0.81);
        let b = flow_lin(&s, 0.37 + 0.81);
        for k in 0..2 {
            assert!((a.u[k] - b.u[k]).abs() < 1e-12);
            assert!((a.v[k] - b.v[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_numerical_integration() {
        let s = JupiterCenteredState {
            u: [0.05, -0.02],
            v: [0.8, 0.6],
        };
        let sys = |_t: f64, y: &[f64; 4], d: &mut [f64; 4]| {
            let st = JupiterCenteredState {
                u: [y[0], y[1]],
                v: [y[2], y[3]],
            };
            *d = vector_field_lin(&st);
        };
        let mut solver = Rkf78::new(OdeOptions::default());
        let (_, y) = solver
            .integrate(&sys, 0.0, &[s.u[0], s.u[1], s.v[0], s.v[1]], 1.0)
            .unwrap();
        let exact = flow_lin(&s, 1.0);
        assert!((y[0] - exact.u[0]).abs() < 1e-10);
        assert!((y[1] - exact.u[1]).abs() < 1e-10);
        assert!((y[2] - exact.v[0]).abs() < 1e-10);
        assert!((y[3] - exact.v[1]).abs() < 1e-10);
    }

    #[test]
    fn conserves_ham_lin() {
        let s = JupiterCenteredState {
            u: [0.2, 0.3],
            v: [1.0, -0.5],
        };
        let h0 = ham_lin(&s);
        for i in 1..=10 {
            let h = ham_lin(&flow_lin(&s, 0.3 * i as f64));
            assert!((h - h0).abs() < 1e-13);
        }
    }
}
