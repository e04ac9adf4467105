//! Angle helpers shared across charts: normalization and circle distances.

use std::f64::consts::{PI, TAU};

/// Normalize an angle to [0, 2*pi).
pub fn wrap_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r == TAU {
        0.0
    } else {
        r
    }
}

/// Normalize an angle to (-pi, pi].
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_tau(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distance between two angles on the circle R / 2*pi*Z.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

/// Distance from a real number to the nearest integer (the norm used for
/// rotation-orbit estimates on R / Z).
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_ranges() {
        assert_eq!(wrap_tau(0.0), 0.0);
        assert!((wrap_tau(-0.1) - (TAU - 0.1)).abs() < 1e-15);
        assert!((wrap_pi(PI + 0.1) - (-PI + 0.1)).abs() < 1e-15);
        assert_eq!(wrap_pi(PI), PI);
    }

    #[test]
    fn circle_distance_symmetry() {
        assert!((circle_dist(0.1, TAU - 0.1) - 0.2).abs() < 1e-15);
        assert!((dist_to_int(0.75) - 0.25).abs() < 1e-15);
    }
}
