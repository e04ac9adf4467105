//! Continued fractions, constant-type Diophantine numbers, the
//! bounded-quotient Cantor sets C_K with their gap structure, the
//! inhomogeneous Dirichlet solver, and rotation-orbit density and
//! hitting-time statistics.
//!
//! Everything that compares ||q omega|| against small thresholds runs in
//! exact big-integer arithmetic: omega is carried as an exact rational
//! (every f64 is one), positions of the rotation orbit are integer residues
//! over a fixed denominator, and comparisons never round. Double precision
//! would misorder ||q omega|| near q ~ 1e6 for the smallest mass ratios
//! this crate targets.

use crate::angles::dist_to_int;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiophantineError {
    #[error("input {0} outside (0, 1)")]
    OutOfRange(f64),
    #[error("gap family is empty for K = 1")]
    EmptyGapFamily,
    #[error("Dirichlet precondition violated at x = {x}: ||x omega|| = {value} <= {bound}")]
    PreconditionViolated { x: i64, value: f64, bound: f64 },
    #[error("no solution found within |q| <= {0} (should not happen)")]
    SearchExhausted(i64),
    #[error("enumeration parameters invalid: {0}")]
    BadEnumeration(String),
}

/// Partial quotients are cut off here: a quotient beyond this threshold
/// means the input is rational to working precision.
const HUGE_QUOTIENT: u64 = 1_000_000_000_000_000;

/// Cap on the number of enumerated C_K prefixes; beyond it the free prefix
/// is shortened and the alternating tail supplies the remaining depth.
const ENUM_CAP: u64 = 2_000_000;

/// A finite continued-fraction expansion [a1, a2, ...] with value
/// 1/(a1 + 1/(a2 + ...)). `truncated` marks an expansion that stopped
/// before the requested depth because the input was rational to working
/// precision.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ContinuedFraction {
    pub quotients: Vec<u64>,
    pub truncated: bool,
}

impl ContinuedFraction {
    pub fn new(quotients: Vec<u64>) -> Self {
        assert!(quotients.iter().all(|&a| a >= 1), "quotients must be >= 1");
        Self {
            quotients,
            truncated: false,
        }
    }
}

/// Expand x in (0, 1) to at most `depth` partial quotients by the exact
/// Euclidean algorithm on the rational value of the float.
pub fn cf_expand(x: f64, depth: usize) -> Result<ContinuedFraction, DiophantineError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(DiophantineError::OutOfRange(x));
    }
    let r = BigRational::from_float(x).expect("finite float");
    let mut p = r.numer().clone();
    let mut q = r.denom().clone();
    let mut quotients = Vec::with_capacity(depth);
    let mut truncated = false;
    while quotients.len() < depth {
        if p.is_zero() {
            truncated = true;
            break;
        }
        // x = p/q in (0,1): next quotient is floor(q/p).
        let a = (&q / &p).to_u64();
        match a {
            Some(a) if a < HUGE_QUOTIENT => {
                quotients.push(a);
                let rem = &q % &p;
                q = std::mem::replace(&mut p, rem);
            }
            _ => {
                truncated = true;
                break;
            }
        }
    }
    Ok(ContinuedFraction {
        quotients,
        truncated,
    })
}

/// Evaluate the finite expansion backward in f64 (backward evaluation is
/// numerically stable: every stage is a contraction).
pub fn cf_value(cf: &ContinuedFraction) -> f64 {
    let mut x = 0.0f64;
    for &a in cf.quotients.iter().rev() {
        x = 1.0 / (a as f64 + x);
    }
    x
}

/// Exact value of the finite expansion.
pub fn cf_value_rational(cf: &ContinuedFraction) -> BigRational {
    let mut x = BigRational::zero();
    for &a in cf.quotients.iter().rev() {
        x = BigRational::one() / (BigRational::from(BigInt::from(a)) + x);
    }
    x
}

/// Convergents (p_n, q_n) for n = 0..d with the seeds p0 = 0, p1 = 1,
/// q0 = 1, q1 = a1 and the recurrences p_n = a_n p_(n-1) + p_(n-2),
/// q_n = a_n q_(n-1) + q_(n-2).
pub fn convergents(cf: &ContinuedFraction) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::with_capacity(cf.quotients.len() + 1);
    out.push((BigInt::zero(), BigInt::one()));
    let mut p_prev = BigInt::one();
    let mut q_prev = BigInt::zero();
    let mut p_cur = BigInt::zero();
    let mut q_cur = BigInt::one();
    // With (p_prev, q_prev) = (1, 0) as the virtual (-1)-st convergent the
    // single recurrence covers n = 1 as well.
    for &a in &cf.quotients {
        let a = BigInt::from(a);
        let p_next = &a * &p_cur + &p_prev;
        let q_next = &a * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
        out.push((p_cur.clone(), q_cur.clone()));
    }
    out
}

/// Distance from an exact rational to the nearest integer.
pub fn dist_to_int_rational(x: &BigRational) -> BigRational {
    let fl = x.floor();
    let frac = x - fl;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if frac > half {
        BigRational::one() - frac
    } else {
        frac
    }
}

/// Constant-type certification up to q <= q_max: ||q omega|| * q >= gamma
/// for 1 <= q <= q_max, checked in exact arithmetic. The result carries no
/// information about q > q_max.
pub fn is_constant_type(omega: f64, gamma: f64, q_max: u64) -> bool {
    let om = BigRational::from_float(omega).expect("finite");
    is_constant_type_rational(&om, gamma, q_max)
}

/// Exact-rational version of [`is_constant_type`].
pub fn is_constant_type_rational(omega: &BigRational, gamma: f64, q_max: u64) -> bool {
    let gam = BigRational::from_float(gamma).expect("finite");
    let denom = omega.denom().clone();
    let numer = ((omega.numer() % &denom) + &denom) % &denom;
    // Residue r_q = q * numer mod denom; ||q omega|| = min(r, denom - r)/denom.
    // The condition q * min(r, denom-r) >= gamma * denom is compared with
    // integers after clearing gamma's denominator.
    let gn = gam.numer();
    let gd = gam.denom();
    let mut r = BigInt::zero();
    for q in 1..=q_max {
        r = (&r + &numer) % &denom;
        let m = std::cmp::min(r.clone(), &denom - &r);
        // q * m * gd >= gn * denom ?
        if BigInt::from(q) * &m * gd < gn * &denom {
            return false;
        }
    }
    true
}

/// Necessary direction of the constant-type criterion in terms of partial
/// quotients: every quotient must satisfy a_i <= 1/gamma.
pub fn entry_bound_check(cf: &ContinuedFraction, gamma: f64) -> bool {
    let bound = 1.0 / gamma;
    cf.quotients.iter().all(|&a| (a as f64) <= bound)
}

/// Sorted finite-depth approximation of the Cantor set C_K of expansions
/// with quotients bounded by K.
///
/// Free prefixes (a1..am) in {1..K}^m are enumerated with m = depth when
/// K^depth fits the in-memory cap; otherwise m is the largest feasible
/// length and each prefix is continued by the alternating tail in both
/// phases ([K,1,K,...] and [1,K,1,...]) up to the requested total depth.
/// The tail convention makes the finite endpoints of every coarse gap,
/// including the widest one, members of the list exactly.
pub fn enumerate_ck(k: u64, depth: usize) -> Result<Vec<f64>, DiophantineError> {
    if k < 1 || depth == 0 {
        return Err(DiophantineError::BadEnumeration(format!(
            "K = {k}, depth = {depth}"
        )));
    }
    let mut free = depth;
    let mut count: u64 = 1;
    for (i, _) in (0..depth).enumerate() {
        match count.checked_mul(k) {
            Some(c) if c <= ENUM_CAP => count = c,
            _ => {
                free = i;
                break;
            }
        }
    }

    let mut values = Vec::new();
    let mut prefix = vec![1u64; free.max(1).min(free).max(0)];
    prefix.truncate(free);
    prefix.iter_mut().for_each(|a| *a = 1);

    // Depth-first enumeration of the K^free prefixes.
    fn rec(
        k: u64,
        prefix: &mut Vec<u64>,
        free: usize,
        depth: usize,
        values: &mut Vec<f64>,
    ) {
        if prefix.len() == free {
            if free == depth {
                values.push(eval_backward(prefix, &[]));
            } else {
                // Both phases of the alternating tail.
                let tail_len = depth - free;
                let tail_k1: Vec<u64> = (0..tail_len)
                    .map(|i| if i % 2 == 0 { k } else { 1 })
                    .collect();
                let tail_1k: Vec<u64> = (0..tail_len)
                    .map(|i| if i % 2 == 0 { 1 } else { k })
                    .collect();
                values.push(eval_backward(prefix, &tail_k1));
                values.push(eval_backward(prefix, &tail_1k));
            }
            return;
        }
        for a in 1..=k {
            prefix.push(a);
            rec(k, prefix, free, depth, values);
            prefix.pop();
        }
    }

    let mut stack = Vec::with_capacity(free);
    rec(k, &mut stack, free, depth, &mut values);
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    Ok(values)
}

fn eval_backward(prefix: &[u64], tail: &[u64]) -> f64 {
    let mut x = 0.0f64;
    for &a in tail.iter().rev() {
        x = 1.0 / (a as f64 + x);
    }
    for &a in prefix.iter().rev() {
        x = 1.0 / (a as f64 + x);
    }
    x
}

/// A gap of the Cantor set C_K: an open interval free of C_K points, with
/// the finite-depth expansions of its endpoints attached.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GapInterval {
    pub left: f64,
    pub right: f64,
    pub left_cf: ContinuedFraction,
    pub right_cf: ContinuedFraction,
}

impl GapInterval {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }
}

/// The widest gap of C_K: endpoints [2, K, 1, K, 1, ...] and
/// [1, 1, K, 1, K, ...], evaluated at the given truncation depth.
/// K = 1 has no gaps in this family.
pub fn largest_gap(k: u64, depth: usize) -> Result<GapInterval, DiophantineError> {
    if k < 2 {
        return Err(DiophantineError::EmptyGapFamily);
    }
    if depth < 2 {
        return Err(DiophantineError::BadEnumeration(format!("depth = {depth}")));
    }
    let mut left_q = Vec::with_capacity(depth);
    left_q.push(2);
    for i in 0..depth - 1 {
        left_q.push(if i % 2 == 0 { k } else { 1 });
    }
    let mut right_q = Vec::with_capacity(depth);
    right_q.push(1);
    right_q.push(1);
    for i in 0..depth - 2 {
        right_q.push(if i % 2 == 0 { k } else { 1 });
    }
    let left_cf = ContinuedFraction::new(left_q);
    let right_cf = ContinuedFraction::new(right_q);
    Ok(GapInterval {
        left: cf_value(&left_cf),
        right: cf_value(&right_cf),
        left_cf,
        right_cf,
    })
}

/// Result of the inhomogeneous Dirichlet search.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DirichletSolution {
    pub q: i64,
    /// Achieved ||q omega - a||.
    pub residual: f64,
    /// The bound A1 = (h+1) A / 2 the residual satisfies.
    pub a1: f64,
    /// The bound X1 = (h+1) X / 2 on |q|.
    pub x1: f64,
}

/// Inhomogeneous Dirichlet solver (one linear form). Given that no
/// 0 < |x| <= X satisfies ||x omega|| <= A (certified here by exact scan),
/// returns q with ||q omega - a|| <= A1 and |q| <= X1, where
/// A1 = (h+1) A / 2, X1 = (h+1) X / 2 and h = 1/(X A).
pub fn dirichlet_inhomogeneous(
    omega: f64,
    a: f64,
    big_a: f64,
    big_x: f64,
) -> Result<DirichletSolution, DiophantineError> {
    let om = BigRational::from_float(omega).expect("finite");
    let aa = BigRational::from_float(a).expect("finite");
    let bound = BigRational::from_float(big_a).expect("finite");

    // Certify the precondition exactly.
    let x_floor = big_x.floor() as i64;
    for x in 1..=x_floor {
        let val = dist_to_int_rational(&(&om * BigRational::from(BigInt::from(x))));
        if val <= bound {
            return Err(DiophantineError::PreconditionViolated {
                x,
                value: val.to_f64().unwrap_or(f64::NAN),
                bound: big_a,
            });
        }
    }

    let h = 1.0 / (big_x * big_a);
    let a1 = 0.5 * (h + 1.0) * big_a;
    let x1 = 0.5 * (h + 1.0) * big_x;
    let a1_rat = BigRational::from_float(a1).expect("finite");
    let q_max = x1.floor() as i64;

    // Search outward from 0 so the returned q has minimal modulus.
    for m in 0..=q_max {
        for q in [m, -m] {
            let val =
                dist_to_int_rational(&(&om * BigRational::from(BigInt::from(q)) - &aa));
            if val <= a1_rat {
                return Ok(DirichletSolution {
                    q,
                    residual: val.to_f64().unwrap_or(f64::NAN),
                    a1,
                    x1,
                });
            }
            if m == 0 {
                break;
            }
        }
    }
    Err(DiophantineError::SearchExhausted(q_max))
}

/// Rotation-orbit statistics used by the hitting-time and density
/// estimates.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RotationOrbitStats {
    pub omega: f64,
    /// Largest q with ||m omega|| > 4 C mu^tau for all 1 <= m <= q (i.e.
    /// q* + 1 is the first return to the collision ball).
    pub q_star: u64,
    /// Largest circular gap of {q omega mod 1 : 1 <= q <= q_star};
    /// 1 for an empty orbit.
    pub max_gap: f64,
    /// Minimal ||q omega - target|| over the orbit; infinite when empty.
    pub min_collision_clearance: f64,
}

/// Compute q*, the orbit's largest circle gap, and its clearance from a
/// designated target point (the collision sits at 0 in the section
/// coordinate). The scan is exact; `q_cap` bounds it (the Diophantine
/// certificate keeps desk-scale q* well below the default 1e7).
pub fn rotation_orbit_stats(
    omega: &BigRational,
    c_ball: f64,
    mu: f64,
    tau: f64,
    target: f64,
    q_cap: u64,
) -> RotationOrbitStats {
    let threshold = 4.0 * c_ball * mu.powf(tau);
    let thr = BigRational::from_float(threshold.min(0.5)).expect("finite");
    let denom = omega.denom().clone();
    let numer = ((omega.numer() % &denom) + &denom) % &denom;
    let thr_scaled = thr.numer() * &denom; // compare m * thr_d with this
    let thr_d = thr.denom().clone();

    let mut residues: Vec<BigInt> = Vec::new();
    let mut r = BigInt::zero();
    let mut q_star = q_cap;
    for q in 1..=q_cap {
        r = (&r + &numer) % &denom;
        let m = std::cmp::min(r.clone(), &denom - &r);
        if &m * &thr_d <= thr_scaled {
            q_star = q - 1;
            break;
        }
        residues.push(r.clone());
    }

    let target_rat = BigRational::from_float(target.rem_euclid(1.0)).expect("finite");
    let mut min_clear = f64::INFINITY;
    for res in &residues {
        let pos = BigRational::new(res.clone(), denom.clone());
        let d = dist_to_int_rational(&(&pos - &target_rat));
        let d = d.to_f64().unwrap_or(f64::NAN);
        if d < min_clear {
            min_clear = d;
        }
    }

    let max_gap = if residues.is_empty() {
        1.0
    } else {
        residues.sort();
        let mut widest = (&denom - residues.last().unwrap() + residues.first().unwrap())
            .to_f64()
            .unwrap_or(f64::NAN);
        for w in residues.windows(2) {
            let gap = (&w[1] - &w[0]).to_f64().unwrap_or(f64::NAN);
            if gap > widest {
                widest = gap;
            }
        }
        widest / denom.to_f64().unwrap_or(f64::NAN)
    };

    RotationOrbitStats {
        omega: omega.to_f64().unwrap_or(f64::NAN),
        q_star,
        max_gap,
        min_collision_clearance: min_clear,
    }
}

/// Iteration budget within which the two-collision triangle inequality is
/// conclusive: if both backward orbits hit the other's 4 C mu^tau-ball at
/// times q1, q2 <= Q, then ||(q1+q2) omega|| < 8 C mu^tau, which for
/// omega in B_gamma forces q1 + q2 > gamma mu^(-tau) / (8 C). Capping the
/// scan at Q = gamma mu^(-tau) / (16 C) therefore rules out a double hit.
pub fn two_collision_budget(gamma: f64, c_ball: f64, mu: f64, tau: f64) -> u64 {
    (gamma * mu.powf(-tau) / (16.0 * c_ball)).floor().max(0.0) as u64
}

/// The recurrence construction's iterate count
/// q* = ceil(gamma mu^(-tau) / (20 C) - 1): small enough that the
/// Diophantine condition guarantees ||q omega|| >= 20 C mu^tau for all
/// 0 < |q| <= q*, which feeds the shifted-point clearance chain.
pub fn recurrence_q_star(gamma: f64, c_ball: f64, mu: f64, tau: f64) -> u64 {
    (gamma * mu.powf(-tau) / (20.0 * c_ball) - 1.0).ceil().max(0.0) as u64
}

/// Two-collision avoidance check: with collisions at section positions 0
/// and ell_second, test whether the backward orbit of each clears the
/// 4 C mu^tau-ball of the other for q = 0..q*. Returns (first clear,
/// second clear). For omega in B_gamma and q_star within
/// [`two_collision_budget`], at most one flag can be false (provided the
/// two collision positions are separated by more than twice the ball
/// radius).
pub fn two_collision_clearance(
    omega: &BigRational,
    ell_second: f64,
    c_ball: f64,
    mu: f64,
    tau: f64,
    q_star: u64,
) -> (bool, bool) {
    let radius = BigRational::from_float(4.0 * c_ball * mu.powf(tau)).expect("finite");
    let ell = BigRational::from_float(ell_second.rem_euclid(1.0)).expect("finite");
    let mut q_om = BigRational::zero();
    let mut first_ok = dist_to_int_rational(&ell) >= radius;
    let mut second_ok = first_ok;
    for _q in 1..=q_star {
        q_om += omega;
        // ||q omega - ell''|| < r: backward orbit of ell'' meets the ball
        // at 0; ||q omega + ell''|| < r: backward orbit of 0 meets the
        // ball at ell''.
        if dist_to_int_rational(&(&q_om - &ell)) < radius {
            second_ok = false;
        }
        if dist_to_int_rational(&(&q_om + &ell)) < radius {
            first_ok = false;
        }
        if !first_ok && !second_ok {
            break;
        }
    }
    (first_ok, second_ok)
}

/// Clearance of the shifted point ell_1: its forward-and-backward orbit
/// over |q| <= q_hat must stay at least `clearance_radius` away from every
/// listed collision position. Returns the verdict and the minimal distance
/// observed.
pub fn shifted_orbit_clearance(
    omega: &BigRational,
    ell_1: f64,
    collisions: &[f64],
    q_hat: u64,
    clearance_radius: f64,
) -> (bool, f64) {
    let ell = BigRational::from_float(ell_1.rem_euclid(1.0)).expect("finite");
    let cols: Vec<BigRational> = collisions
        .iter()
        .map(|c| BigRational::from_float(c.rem_euclid(1.0)).expect("finite"))
        .collect();
    let mut min_dist = f64::INFINITY;
    let mut pos_f = ell.clone();
    let mut pos_b = ell.clone();
    let mut check = |p: &BigRational, min_dist: &mut f64| {
        for c in &cols {
            let d = dist_to_int_rational(&(p - c)).to_f64().unwrap_or(f64::NAN);
            if d < *min_dist {
                *min_dist = d;
            }
        }
    };
    check(&pos_f, &mut min_dist);
    for _q in 1..=q_hat {
        pos_f += omega;
        pos_b -= omega;
        check(&pos_f, &mut min_dist);
        check(&pos_b, &mut min_dist);
    }
    (min_dist >= clearance_radius, min_dist)
}

/// f64 convenience: ||q omega|| for scalar work where exactness is not
/// needed.
pub fn circle_norm(x: f64) -> f64 {
    dist_to_int(x)
}

/// Value of the purely periodic continued fraction [K, 1, K, 1, ...]:
/// the positive root of K t^2 + K t - 1 = 0.
pub fn periodic_tail_k1(k: u64) -> f64 {
    let kf = k as f64;
    (-kf + (kf * kf + 4.0 * kf).sqrt()) / (2.0 * kf)
}
