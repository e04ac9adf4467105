//! Embedded Runge-Kutta-Fehlberg 7(8) integrator (13 stages) with adaptive
//! step control. The 8th-order solution is propagated; the 7th-order one
//! only feeds the error estimate. Event times are located by re-stepping
//! from the bracketing step's start with a bisected step size, so the event
//! state carries full integration accuracy rather than interpolation error.

/// Right-hand side of dy/dt = f(t, y).
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dydt: &mut [f64; N]);
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
{
    fn rhs(&self, t: f64, y: &[f64; N], dydt: &mut [f64; N]) {
        self(t, y, dydt)
    }
}

pub const STAGES: usize = 13;

/// Fehlberg 7(8) nodes.
pub const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    0.5,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

/// Fehlberg 7(8) stage matrix (lower triangular).
pub const A: [[f64; STAGES]; STAGES] = {
    let mut a = [[0.0; STAGES]; STAGES];
    a[1][0] = 2.0 / 27.0;
    a[2][0] = 1.0 / 36.0;
    a[2][1] = 1.0 / 12.0;
    a[3][0] = 1.0 / 24.0;
    a[3][2] = 1.0 / 8.0;
    a[4][0] = 5.0 / 12.0;
    a[4][2] = -25.0 / 16.0;
    a[4][3] = 25.0 / 16.0;
    a[5][0] = 1.0 / 20.0;
    a[5][3] = 0.25;
    a[5][4] = 0.2;
    a[6][0] = -25.0 / 108.0;
    a[6][3] = 125.0 / 108.0;
    a[6][4] = -65.0 / 27.0;
    a[6][5] = 125.0 / 54.0;
    a[7][0] = 31.0 / 300.0;
    a[7][4] = 61.0 / 225.0;
    a[7][5] = -2.0 / 9.0;
    a[7][6] = 13.0 / 900.0;
    a[8][0] = 2.0;
    a[8][3] = -53.0 / 6.0;
    a[8][4] = 704.0 / 45.0;
    a[8][5] = -107.0 / 9.0;
    a[8][6] = 67.0 / 90.0;
    a[8][7] = 3.0;
    a[9][0] = -91.0 / 108.0;
    a[9][3] = 23.0 / 108.0;
    a[9][4] = -976.0 / 135.0;
    a[9][5] = 311.0 / 54.0;
    a[9][6] = -19.0 / 60.0;
    a[9][7] = 17.0 / 6.0;
    a[9][8] = -1.0 / 12.0;
    a[10][0] = 2383.0 / 4100.0;
    a[10][3] = -341.0 / 164.0;
    a[10][4] = 4496.0 / 1025.0;
    a[10][5] = -301.0 / 82.0;
    a[10][6] = 2133.0 / 4100.0;
    a[10][7] = 45.0 / 82.0;
    a[10][8] = 45.0 / 164.0;
    a[10][9] = 18.0 / 41.0;
    a[11][0] = 3.0 / 205.0;
    a[11][5] = -6.0 / 41.0;
    a[11][6] = -3.0 / 205.0;
    a[11][7] = -3.0 / 41.0;
    a[11][8] = 3.0 / 41.0;
    a[11][9] = 6.0 / 41.0;
    a[12][0] = -1777.0 / 4100.0;
    a[12][3] = -341.0 / 164.0;
    a[12][4] = 4496.0 / 1025.0;
    a[12][5] = -289.0 / 82.0;
    a[12][6] = 2193.0 / 4100.0;
    a[12][7] = 51.0 / 82.0;
    a[12][8] = 33.0 / 164.0;
    a[12][9] = 12.0 / 41.0;
    a[12][11] = 1.0;
    a
};

/// 8th-order weights (propagated solution).
pub const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: u64,
    pub h_init: f64,
    /// Accept every step regardless of the error estimate. Combined with
    /// h_min = h_max this gives a fixed-step scheme whose output is a
    /// smooth function of the initial condition (no step-sequence jitter),
    /// which finite-difference derivatives of flow maps need.
    pub force_accept: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
            h_init: 1e-3,
            force_accept: false,
        }
    }
}

impl OdeOptions {
    /// Fixed-step configuration with step size h.
    pub fn fixed_step(h: f64) -> Self {
        Self {
            h_min: h,
            h_max: h,
            h_init: h,
            force_accept: true,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    StepSizeUnderflow { t: f64 },
    MaxStepsExceeded { t: f64 },
    NonFiniteState { t: f64 },
}

impl std::fmt::Display for OdeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OdeError::StepSizeUnderflow { t } => write!(f, "step size underflow at t = {t}"),
            OdeError::MaxStepsExceeded { t } => write!(f, "max step count exceeded at t = {t}"),
            OdeError::NonFiniteState { t } => write!(f, "non-finite state at t = {t}"),
        }
    }
}

impl std::error::Error for OdeError {}

/// What the per-step observer wants the driver to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    /// Stop now; the observer has what it needs.
    Stop,
}

pub struct Rkf78<const N: usize> {
    pub opts: OdeOptions,
    k: [[f64; N]; STAGES],
    pub fn_evals: u64,
    pub accepted: u64,
    pub rejected: u64,
}

impl<const N: usize> Rkf78<N> {
    pub fn new(opts: OdeOptions) -> Self {
        Self {
            opts,
            k: [[0.0; N]; STAGES],
            fn_evals: 0,
            accepted: 0,
            rejected: 0,
        }
    }

    /// One embedded step of signed size h: returns the 8th-order solution
    /// and the normalized error estimate (accept when <= 1).
    pub fn try_step<S: OdeSystem<N>>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[f64; N],
        h: f64,
    ) -> ([f64; N], f64) {
        sys.rhs(t, y, &mut self.k[0]);
        let mut y_tmp = [0.0; N];
        for i in 1..STAGES {
            for n in 0..N {
                let mut acc = 0.0;
                for j in 0..i {
                    if A[i][j] != 0.0 {
                        acc += A[i][j] * self.k[j][n];
                    }
                }
                y_tmp[n] = y[n] + h * acc;
            }
            sys.rhs(t + C[i] * h, &y_tmp, &mut self.k[i]);
        }
        self.fn_evals += STAGES as u64;

        let mut y8 = [0.0; N];
        for n in 0..N {
            let mut acc = 0.0;
            for i in 0..STAGES {
                if B8[i] != 0.0 {
                    acc += B8[i] * self.k[i][n];
                }
            }
            y8[n] = y[n] + h * acc;
        }

        // Fehlberg error: y8 - y7 = h * 41/840 * (k0 + k10 - k11 - k12).
        let mut err: f64 = 0.0;
        for n in 0..N {
            let e = h * (41.0 / 840.0)
                * (self.k[0][n] + self.k[10][n] - self.k[11][n] - self.k[12][n]);
            let scale = self.opts.atol + self.opts.rtol * y8[n].abs().max(y[n].abs());
            err = err.max((e / scale).abs());
        }
        (y8, err)
    }

    /// Drive from (t0, y0) toward tf, invoking `observer` after every
    /// accepted step with (t_prev, y_prev, t_new, y_new, h_taken).
    pub fn drive<S: OdeSystem<N>>(
        &mut self,
        sys: &S,
        t0: f64,
        y0: &[f64; N],
        tf: f64,
        observer: &mut dyn FnMut(f64, &[f64; N], f64, &[f64; N], f64) -> StepControl,
    ) -> Result<(f64, [f64; N]), OdeError> {
        let mut t = t0;
        let mut y = *y0;
        if t0 == tf {
            return Ok((t, y));
        }
        let dir = (tf - t0).signum();
        let mut h = self.opts.h_init.abs().min(self.opts.h_max) * dir;
        let mut steps = 0u64;

        while (tf - t) * dir > 0.0 {
            if (t + h - tf) * dir > 0.0 {
                h = tf - t;
            }
            let (y_new, err) = self.try_step(sys, t, &y, h);
            let accepted = err <= 1.0 || self.opts.force_accept;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-1.0 / 8.0)).clamp(0.2, 5.0)
            };
            if accepted {
                self.accepted += 1;
                if !y_new.iter().all(|v| v.is_finite()) {
                    return Err(OdeError::NonFiniteState { t });
                }
                let t_new = t + h;
                let control = observer(t, &y, t_new, &y_new, h);
                t = t_new;
                y = y_new;
                if control == StepControl::Stop {
                    return Ok((t, y));
                }
            } else {
                self.rejected += 1;
                if h.abs() <= self.opts.h_min {
                    return Err(OdeError::StepSizeUnderflow { t });
                }
            }
            h = (h.abs() * factor).clamp(self.opts.h_min, self.opts.h_max) * dir;
            steps += 1;
            if steps > self.opts.max_steps {
                return Err(OdeError::MaxStepsExceeded { t });
            }
        }
        Ok((t, y))
    }

    /// Plain integration to tf.
    pub fn integrate<S: OdeSystem<N>>(
        &mut self,
        sys: &S,
        t0: f64,
        y0: &[f64; N],
        tf: f64,
    ) -> Result<(f64, [f64; N]), OdeError> {
        self.drive(sys, t0, y0, tf, &mut |_, _, _, _, _| StepControl::Continue)
    }

    /// Locate the zero of `g` inside an accepted step [t_a, t_a + h] by
    /// bisection on the sub-step size; every candidate is a genuine RK step
    /// from (t_a, y_a), so the returned state has integration accuracy.
    /// `g(t_a + h)` must differ in sign from `g_a = g(t_a, y_a)`.
    pub fn locate_event<S: OdeSystem<N>>(
        &mut self,
        sys: &S,
        t_a: f64,
        y_a: &[f64; N],
        h: f64,
        g_a: f64,
        g: &dyn Fn(f64, &[f64; N]) -> f64,
        t_tol: f64,
    ) -> (f64, [f64; N]) {
        let mut lo = 0.0f64;
        let mut hi = h;
        let mut y_hi = {
            let (y, _) = self.try_step(sys, t_a, y_a, h);
            y
        };
        let mut y_lo = *y_a;
        for _ in 0..200 {
            if (hi - lo).abs() <= t_tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let (y_mid, _) = self.try_step(sys, t_a, y_a, mid);
            let g_mid = g(t_a + mid, &y_mid);
            if (g_mid >= 0.0) == (g_a >= 0.0) {
                lo = mid;
                y_lo = y_mid;
            } else {
                hi = mid;
                y_hi = y_mid;
            }
        }
        // Report the side with the smaller |g| among the final bracket ends.
        let g_lo = g(t_a + lo, &y_lo);
        let g_hi = g(t_a + hi, &y_hi);
        if lo > 0.0 && g_lo.abs() <= g_hi.abs() {
            (t_a + lo, y_lo)
        } else {
            (t_a + hi, y_hi)
        }
    }
}
