//! CSV and JSON-lines export with a versioned schema and deterministic
//! ordering. Every writer emits its header (CSV) or one JSON object per
//! line (JSONL) with a `schema` field, so downstream tooling can detect
//! format changes.

use crate::collision::CollisionGraphRow;
use crate::diophantine::{GapInterval, RotationOrbitStats};
use crate::dynamics::{jacobi_constant, Trajectory};
use crate::levi_civita::RegTrajectory;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

/// Bumped whenever any emitted column set or record layout changes.
pub const SCHEMA_VERSION: &str = "rcp3bp-export-v1";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

/// Trajectory as JSON-lines: a header record, one record per sample
/// {t, u1, u2, v1, v2, J}, then one per event {t, kind, state}.
pub fn write_trajectory_jsonl<W: Write>(
    out: &mut W,
    traj: &Trajectory,
) -> Result<(), ExportError> {
    writeln!(
        out,
        "{}",
        serde_json::json!({"schema": SCHEMA_VERSION, "record": "header", "kind": "trajectory", "mu": traj.mu})
    )?;
    for (t, s) in &traj.samples {
        let j = jacobi_constant(s, traj.mu).unwrap_or(f64::NAN);
        writeln!(
            out,
            "{}",
            serde_json::json!({
                "record": "sample",
                "t": t, "u1": s.u[0], "u2": s.u[1], "v1": s.v[0], "v2": s.v[1], "J": j
            })
        )?;
    }
    for ev in &traj.events {
        writeln!(
            out,
            "{}",
            serde_json::json!({
                "record": "event",
                "t": ev.t,
                "kind": ev.kind,
                "state": [ev.state.u[0], ev.state.u[1], ev.state.v[0], ev.state.v[1]]
            })
        )?;
    }
    Ok(())
}

/// Regularized trajectory as JSON-lines with the shared sample schema plus
/// z, w and the fictitious time sigma.
pub fn write_reg_trajectory_jsonl<W: Write>(
    out: &mut W,
    traj: &RegTrajectory,
    mu: f64,
) -> Result<(), ExportError> {
    writeln!(
        out,
        "{}",
        serde_json::json!({"schema": SCHEMA_VERSION, "record": "header", "kind": "regularized_trajectory", "mu": mu, "xi": traj.xi})
    )?;
    for s in &traj.samples {
        let lc = crate::levi_civita::LCState {
            z: s.z,
            w: s.w,
            xi: traj.xi,
        };
        let phys = crate::levi_civita::lc_inverse(&lc)
            .map(|sc| crate::levi_civita::unscale(&sc, mu));
        let (u, v) = match phys {
            Ok(p) => (p.u, p.v),
            Err(_) => ([0.0, 0.0], [f64::NAN, f64::NAN]),
        };
        writeln!(
            out,
            "{}",
            serde_json::json!({
                "record": "sample",
                "t": s.t_phys, "u1": u[0], "u2": u[1], "v1": v[0], "v2": v[1],
                "J": f64::NAN,
                "z": [s.z.re, s.z.im], "w": [s.w.re, s.w.im], "sigma": s.sigma
            })
        )?;
    }
    Ok(())
}

fn fmt_f64(x: f64) -> String {
    // Shortest round-trip representation keeps files byte-deterministic.
    format!("{x:?}")
}

/// Collision-graph table: columns L, G, branch, ell_col, g_col.
pub fn write_collision_graph_csv<W: Write>(
    out: &mut W,
    rows: &[CollisionGraphRow],
) -> Result<(), ExportError> {
    writeln!(out, "# schema: {SCHEMA_VERSION}")?;
    writeln!(out, "L,G,branch,ell_col,g_col")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(r.big_l),
            fmt_f64(r.big_g),
            r.branch,
            fmt_f64(r.ell_col),
            fmt_f64(r.g_col)
        )?;
    }
    Ok(())
}

/// Largest-gap table: (K, depth, gap_left, gap_right, width).
pub fn write_gap_table_csv<W: Write>(
    out: &mut W,
    rows: &[(u64, usize, GapInterval)],
) -> Result<(), ExportError> {
    writeln!(out, "# schema: {SCHEMA_VERSION}")?;
    writeln!(out, "K,depth,gap_left,gap_right,width")?;
    for (k, depth, gap) in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            k,
            depth,
            fmt_f64(gap.left),
            fmt_f64(gap.right),
            fmt_f64(gap.width())
        )?;
    }
    Ok(())
}

/// Rotation-orbit table: (mu, gamma, q_star, max_gap).
pub fn write_orbit_stats_csv<W: Write>(
    out: &mut W,
    rows: &[(f64, f64, RotationOrbitStats)],
) -> Result<(), ExportError> {
    writeln!(out, "# schema: {SCHEMA_VERSION}")?;
    writeln!(out, "mu,gamma,q_star,max_gap,min_collision_clearance")?;
    for (mu, gamma, st) in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(*mu),
            fmt_f64(*gamma),
            st.q_star,
            fmt_f64(st.max_gap),
            fmt_f64(st.min_collision_clearance)
        )?;
    }
    Ok(())
}

/// Write any serializable record list as JSONL with a schema header.
pub fn write_records_jsonl<W: Write, T: serde::Serialize>(
    out: &mut W,
    kind: &str,
    records: &[T],
) -> Result<(), ExportError> {
    writeln!(
        out,
        "{}",
        serde_json::json!({"schema": SCHEMA_VERSION, "record": "header", "kind": kind})
    )?;
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

/// Generic CSV writer for rows already rendered to strings.
pub fn write_csv<W: Write>(
    out: &mut W,
    header: &str,
    rows: &[Vec<String>],
) -> Result<(), ExportError> {
    writeln!(out, "# schema: {SCHEMA_VERSION}")?;
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Write to a file path, creating parent directories.
pub fn to_file<F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<(), ExportError>>(
    path: &Path,
    write: F,
) -> Result<(), ExportError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write(&mut buf)?;
    Ok(())
}
