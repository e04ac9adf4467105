//! The collision set in Delaunay variables for mu >= 0 and membership
//! tests for the sets V and V_delta of elliptic states whose orbit crosses
//! Jupiter's circle.
//!
//! At mu = 0 a collision state satisfies r = 1, phi = 0; for mu > 0 the
//! radius condition becomes r = 1 - mu. Solving L^2 (1 - e cos u) = 1 - mu
//! and v(ell) + g = 0 expresses the collision set as two graphs (one per
//! eccentric-anomaly branch) over the actions (L, G).

use crate::angles::wrap_tau;
use crate::kepler::{eccentricity, solve_kepler, true_anomaly, JupiterCenteredState};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollisionError {
    #[error("no collision: |(L^2 - (1-mu)) / (e L^2)| = {0} >= 1")]
    NoCollision(f64),
    #[error("invalid actions: {0}")]
    InvalidActions(String),
    #[error("V_delta construction: {0}")]
    BadDelta(String),
}

/// Which eccentric-anomaly branch the collision point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Branch {
    /// u* in (0, pi).
    Plus,
    /// u* in (pi, 2 pi).
    Minus,
}

/// A point of the collision graph over the actions (L, G).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[allow(non_snake_case)]
pub struct CollisionPoint {
    pub branch: Branch,
    pub ell_col: f64,
    pub g_col: f64,
    pub L: f64,
    pub G: f64,
    pub mu: f64,
}

/// Solve the collision conditions for the given actions and branch.
///
/// The plus branch takes u* = arccos((L^2 - (1-mu)) / (e L^2)) (principal
/// value); the minus branch its reflection 2 pi - u*. Then
/// ell_col = u* - e sin u*, g_col = -v(ell_col).
pub fn collision_point(
    big_l: f64,
    big_g: f64,
    mu: f64,
    branch: Branch,
) -> Result<CollisionPoint, CollisionError> {
    let e =
        eccentricity(big_l, big_g).map_err(|e| CollisionError::InvalidActions(e.to_string()))?;
    if big_g == 0.0 {
        return Err(CollisionError::InvalidActions("G = 0".into()));
    }
    if e == 0.0 {
        return Err(CollisionError::NoCollision(f64::INFINITY));
    }
    let cos_u = (big_l * big_l - (1.0 - mu)) / (e * big_l * big_l);
    if cos_u.abs() >= 1.0 {
        return Err(CollisionError::NoCollision(cos_u.abs()));
    }
    let u_star = match branch {
        Branch::Plus => cos_u.acos(),
        Branch::Minus => std::f64::consts::TAU - cos_u.acos(),
    };
    let ell_col = wrap_tau(u_star - e * u_star.sin());
    let v = true_anomaly(u_star, e).expect("e validated");
    let g_col = wrap_tau(-v);
    Ok(CollisionPoint {
        branch,
        ell_col,
        g_col,
        L: big_l,
        G: big_g,
        mu,
    })
}

impl CollisionPoint {
    /// Reconstruct the eccentric anomaly at the collision and check the
    /// radius identity L^2 (1 - e cos u*) = 1 - mu.
    pub fn radius_residual(&self) -> f64 {
        let e = eccentricity(self.L, self.G).expect("validated");
        let u = solve_kepler(self.ell_col, e).expect("validated");
        (self.L * self.L * (1.0 - e * u.cos()) - (1.0 - self.mu)).abs()
    }

    /// The collision state as a full Delaunay state.
    pub fn delaunay(&self) -> crate::kepler::DelaunayState {
        crate::kepler::DelaunayState::new(self.ell_col, self.g_col, self.L, self.G)
            .expect("collision point actions are valid")
    }
}

/// Membership in V: elliptic, non-circular, and the ellipse crosses the
/// unit circle: G^2/(1+e) < 1 < G^2/(1-e).
pub fn in_v(s: &crate::kepler::DelaunayState) -> bool {
    if s.G == 0.0 || s.G.abs() >= s.L {
        return false;
    }
    let e = s.eccentricity();
    if e == 0.0 {
        return false;
    }
    let g2 = s.G * s.G;
    g2 / (1.0 + e) < 1.0 && 1.0 < g2 / (1.0 - e)
}

/// Margin parameter for V_delta, the delta-interior of V.
///
/// The Jacobi-constant window (-2 sqrt(2), 3) is folded into the L-window
/// constraint; the bounds are kept for reference and export.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VDeltaParams {
    pub delta: f64,
}

/// Jacobi-constant window on which the collision analysis runs.
pub const J_WINDOW: (f64, f64) = (-2.0 * std::f64::consts::SQRT_2, 3.0);

impl VDeltaParams {
    /// Construct, verifying that V_delta is nonempty by sampling an
    /// (L, G) grid.
    pub fn new(delta: f64) -> Result<Self, CollisionError> {
        if !(delta > 0.0) {
            return Err(CollisionError::BadDelta(format!(
                "delta = {delta} must be positive"
            )));
        }
        let p = Self { delta };
        let n = 60;
        for i in 0..n {
            let big_l = 0.5 + 1.5 * (i as f64) / (n as f64 - 1.0);
            for j in 0..n {
                let big_g = 0.05 + (big_l - 0.05) * (j as f64) / (n as f64 - 1.0);
                if let Ok(s) = crate::kepler::DelaunayState::new(0.0, 0.0, big_l, big_g) {
                    if in_v_delta(&s, &p) {
                        return Ok(p);
                    }
                }
            }
        }
        Err(CollisionError::BadDelta(format!(
            "delta = {delta} leaves V_delta empty"
        )))
    }
}

/// Membership in V_delta: the four strict inequalities
/// L in (delta, 1/delta), delta < |G| < L - delta,
/// G^2/(1+e) + delta < 1 < G^2/(1-e) - delta.
pub fn in_v_delta(s: &crate::kepler::DelaunayState, p: &VDeltaParams) -> bool {
    let d = p.delta;
    if !(s.L > d && s.L < 1.0 / d) {
        return false;
    }
    if !(s.G.abs() > d && s.G.abs() < s.L - d) {
        return false;
    }
    let e = s.eccentricity();
    let g2 = s.G * s.G;
    g2 / (1.0 + e) + d < 1.0 && 1.0 < g2 / (1.0 - e) - d
}

/// Distance to the Jupiter singularity: |u|.
pub fn collision_distance(s: &JupiterCenteredState) -> f64 {
    s.dist()
}

/// One row of the collision-graph table exported over an (L, G) grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CollisionGraphRow {
    pub big_l: f64,
    pub big_g: f64,
    pub branch: &'static str,
    pub ell_col: f64,
    pub g_col: f64,
}

/// Tabulate both collision graphs over a rectangular (L, G) grid;
/// actions without a collision are skipped.
pub fn collision_graph_table(
    l_range: (f64, f64),
    g_range: (f64, f64),
    n_l: usize,
    n_g: usize,
    mu: f64,
) -> Vec<CollisionGraphRow> {
    let mut rows = Vec::new();
    for i in 0..n_l {
        let big_l =
            l_range.0 + (l_range.1 - l_range.0) * (i as f64) / ((n_l as f64 - 1.0).max(1.0));
        for j in 0..n_g {
            let big_g =
                g_range.0 + (g_range.1 - g_range.0) * (j as f64) / ((n_g as f64 - 1.0).max(1.0));
            for (branch, name) in [(Branch::Plus, "plus"), (Branch::Minus, "minus")] {
                if let Ok(cp) = collision_point(big_l, big_g, mu, branch) {
                    rows.push(CollisionGraphRow {
                        big_l,
                        big_g,
                        branch: name,
                        ell_col: cp.ell_col,
                        g_col: cp.g_col,
                    });
                }
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kepler::{delaunay_to_polar, DelaunayState};
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    #[test]
    fn unit_semimajor_axis_collision() {
        // mu = 0, L = 1: cos u* = 0 so u*+ = pi/2, ell_col = pi/2 - e.
        for &g in &[0.5, 0.8, 0.95] {
            let cp = collision_point(1.0, g, 0.0, Branch::Plus).unwrap();
            let e = eccentricity(1.0, g).unwrap();
            assert!((cp.ell_col - (FRAC_PI_2 - e)).abs() < 1e-14);
        }
        // e = 0.5: g_col = -2 pi / 3 (mod 2 pi).
        let g_for_e_half = (1.0f64 - 0.25).sqrt();
        let cp = collision_point(1.0, g_for_e_half, 0.0, Branch::Plus).unwrap();
        assert!((cp.g_col - (TAU - 2.0 * PI / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn collision_lands_on_jupiter_through_charts() {
        // mu = 1e-4, L = 1.1, G = 0.9: the chart chain reaches
        // (r, phi) = (1 - mu, 0) to 1e-10.
        let mu = 1e-4;
        for branch in [Branch::Plus, Branch::Minus] {
            let cp = collision_point(1.1, 0.9, mu, branch).unwrap();
            let p = delaunay_to_polar(&cp.delaunay()).unwrap();
            assert!((p.r - (1.0 - mu)).abs() < 1e-10, "r = {}", p.r);
            assert!(
                crate::angles::circle_dist(p.phi, 0.0) < 1e-10,
                "phi = {}",
                p.phi
            );
            assert!(cp.radius_residual() < 1e-12);
        }
    }

    #[test]
    fn no_collision_outside_condition() {
        // Small ellipse entirely inside the unit circle: L^2 (1+e) < 1.
        assert!(matches!(
            collision_point(0.6, 0.55, 0.0, Branch::Plus),
            Err(CollisionError::NoCollision(_))
        ));
        // Circular orbit has no graph either.
        assert!(collision_point(1.0, 1.0, 0.0, Branch::Plus).is_err());
    }

    #[test]
    fn branches_distinct_inside_condition() {
        let cp_p = collision_point(1.05, 0.85, 0.0, Branch::Plus).unwrap();
        let cp_m = collision_point(1.05, 0.85, 0.0, Branch::Minus).unwrap();
        assert!(
            crate::angles::circle_dist(cp_p.ell_col, cp_m.ell_col) > 1e-3,
            "branches coincide"
        );
    }

    #[test]
    fn graphs_vary_continuously() {
        // No branch jumps over a V_delta strip: finite differences of
        // ell_col, g_col stay bounded.
        let mu = 1e-4;
        let n = 80;
        for branch in [Branch::Plus, Branch::Minus] {
            let mut prev: Option<(f64, f64)> = None;
            for i in 0..n {
                let big_l = 0.95 + 0.2 * (i as f64) / (n as f64);
                let cp = collision_point(big_l, 0.82, mu, branch).unwrap();
                if let Some((pl, pg)) = prev {
                    let dl = crate::angles::circle_dist(cp.ell_col, pl);
                    let dg = crate::angles::circle_dist(cp.g_col, pg);
                    assert!(dl < 0.05 && dg < 0.05, "jump at L = {big_l}: {dl}, {dg}");
                }
                prev = Some((cp.ell_col, cp.g_col));
            }
        }
    }

    #[test]
    fn v_membership() {
        // (L = 1, G = 0.9): e ~ 0.4359, G^2/(1+e) ~ 0.564 < 1 < 1.436.
        let s = DelaunayState::new(0.0, 0.0, 1.0, 0.9).unwrap();
        assert!(in_v(&s));
        // Circular (G = L) is excluded.
        let s = DelaunayState::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(!in_v(&s));
    }

    #[test]
    fn v_matches_geometric_crossing_test() {
        // in_v iff perihelion < 1 < aphelion, on a grid.
        for i in 1..40 {
            let big_l = 0.3 + 1.7 * (i as f64) / 40.0;
            for j in 1..20 {
                let big_g = big_l * (j as f64) / 20.0 * 0.999;
                let s = match DelaunayState::new(0.0, 0.0, big_l, big_g) {
                    Ok(s) => s,
                    Err(_) => continue,
                };
                let e = s.eccentricity();
                let a = big_l * big_l;
                let geometric = e > 0.0 && a * (1.0 - e) < 1.0 && 1.0 < a * (1.0 + e);
                assert_eq!(in_v(&s), geometric, "mismatch at L={big_l}, G={big_g}");
            }
        }
    }

    #[test]
    fn v_delta_nested_in_v() {
        let p = VDeltaParams::new(0.05).unwrap();
        let mut inside = 0;
        for i in 0..60 {
            let big_l = 0.6 + 1.0 * (i as f64) / 60.0;
            for j in 1..30 {
                let big_g = big_l * (j as f64) / 30.0;
                let s = match DelaunayState::new(1.0, 2.0, big_l, big_g) {
                    Ok(s) => s,
                    Err(_) => continue,
                };
                if in_v_delta(&s, &p) {
                    inside += 1;
                    assert!(in_v(&s), "V_delta point outside V at L={big_l}, G={big_g}");
                }
            }
        }
        assert!(inside > 10, "V_delta sampling too sparse: {inside}");
    }

    #[test]
    fn v_delta_direct_inequalities() {
        let p = VDeltaParams::new(0.05).unwrap();
        let s = DelaunayState::new(0.0, 0.0, 1.05, 0.8).unwrap();
        let e = s.eccentricity();
        let expect = s.L > 0.05
            && s.L < 20.0
            && s.G.abs() > 0.05
            && s.G.abs() < s.L - 0.05
            && s.G * s.G / (1.0 + e) + 0.05 < 1.0
            && 1.0 < s.G * s.G / (1.0 - e) - 0.05;
        assert_eq!(in_v_delta(&s, &p), expect);
        assert!(in_v_delta(&s, &p), "reference point should lie in V_delta");

        // L below delta is excluded.
        let s = DelaunayState::new(0.0, 0.0, 0.025, 0.02).unwrap();
        assert!(!in_v_delta(&s, &p));
    }

    #[test]
    fn v_delta_rejects_empty() {
        // G > delta forces G^2/(1+e) >= delta^2/2, which already breaks
        // the first crossing margin once delta is large enough.
        assert!(VDeltaParams::new(0.85).is_err());
        assert!(VDeltaParams::new(-0.1).is_err());
        assert!(VDeltaParams::new(0.1).is_ok());
        assert!(VDeltaParams::new(0.45).is_ok());
    }

    #[test]
    fn collision_distance_is_chart_distance() {
        let s = JupiterCenteredState {
            u: [0.3, -0.4],
            v: [0.0, 0.0],
        };
        assert!((collision_distance(&s) - 0.5).abs() < 1e-15);
        let c = crate::kepler::jupiter_to_cartesian(&s, 1e-3);
        let d = ((c.x[0] - (1.0 - 1e-3)).powi(2) + c.x[1].powi(2)).sqrt();
        assert!((collision_distance(&s) - d).abs() < 1e-15);
        let origin = JupiterCenteredState {
            u: [0.0, 0.0],
            v: [1.0, 0.0],
        };
        assert_eq!(collision_distance(&origin), 0.0);
    }

    #[test]
    fn graph_table_covers_grid() {
        let rows = collision_graph_table((0.95, 1.2), (0.6, 0.9), 6, 6, 1e-4);
        assert!(!rows.is_empty());
        for row in &rows {
            let cp = collision_point(
                row.big_l,
                row.big_g,
                1e-4,
                if row.branch == "plus" {
                    Branch::Plus
                } else {
                    Branch::Minus
                },
            )
            .unwrap();
            assert_eq!(cp.ell_col, row.ell_col);
        }
    }
}
