//! Density scan: for each probe and each mass ratio, the distance from
//! the probe to the nearest certified collision initial condition, with a
//! log-log fit of distance against mu.
//!
//! The shot search gets a time budget growing like mu^(-1/10), mirroring
//! the hitting-time scale of the mechanism under test: longer admissible
//! horizons at smaller mu are what make nearer collision initial
//! conditions reachable.

use super::shoot::shoot_collision;
use super::LabError;
use crate::config::ExperimentConfig;
use crate::kepler::DelaunayState;

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DensityRecord {
    pub mu: f64,
    pub probe: DelaunayState,
    /// Distance from the probe to the found collision initial condition
    /// (infinite when the shot failed).
    pub distance: f64,
    pub hit: bool,
    pub min_approach: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DensityFit {
    /// Fitted exponent of median distance against mu.
    pub exponent: f64,
    pub intercept: f64,
    /// Naive one-sigma band on the exponent from the residuals.
    pub exponent_band: (f64, f64),
    /// (mu, median distance) pairs that entered the fit.
    pub medians: Vec<(f64, f64)>,
}

fn median(sorted: &mut Vec<f64>) -> f64 {
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Run the scan over every (probe, mu) pair. Individual shot failures are
/// recorded, not fatal.
pub fn density_scan(
    mu_list: &[f64],
    probes: &[DelaunayState],
    cfg_base: &ExperimentConfig,
) -> Result<(Vec<DensityRecord>, DensityFit), LabError> {
    let mut records = Vec::new();
    let mut medians = Vec::new();
    for &mu in mu_list {
        let mut cfg = cfg_base.clone();
        cfg.mu = mu;
        // Hitting-time budget ~ mu^(-1/10), normalized at mu = 1e-3.
        cfg.max_periods = cfg_base.max_periods * (mu / 1e-3).powf(-0.1);
        let mut dists = Vec::new();
        for probe in probes {
            match shoot_collision(probe, &cfg) {
                Ok(out) if out.result.hit => {
                    let d = out.probe_distance.max(f64::EPSILON);
                    dists.push(d);
                    records.push(DensityRecord {
                        mu,
                        probe: *probe,
                        distance: d,
                        hit: true,
                        min_approach: out.result.min_distance,
                    });
                }
                Ok(out) => {
                    records.push(DensityRecord {
                        mu,
                        probe: *probe,
                        distance: f64::INFINITY,
                        hit: false,
                        min_approach: out.result.min_distance,
                    });
                }
                Err(e) => {
                    return Err(LabError::Other(format!(
                        "shot failed structurally at mu={mu}: {e}"
                    )))
                }
            }
        }
        if !dists.is_empty() {
            medians.push((mu, median(&mut dists)));
        }
    }

    // Least squares on log(distance) = intercept + exponent * log(mu).
    let fit = fit_loglog(&medians);
    Ok((records, fit))
}

pub(crate) fn fit_loglog(pairs: &[(f64, f64)]) -> DensityFit {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return DensityFit {
            exponent: f64::NAN,
            intercept: f64::NAN,
            exponent_band: (f64::NAN, f64::NAN),
            medians: pairs.to_vec(),
        };
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let dof = (pairs.len() as f64 - 2.0).max(1.0);
    let se = (rss / dof / sxx).sqrt();
    DensityFit {
        exponent: slope,
        intercept,
        exponent_band: (slope - se, slope + se),
        medians: pairs.to_vec(),
    }
}
