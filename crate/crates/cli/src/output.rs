//! CSV and JSON artifacts.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use stochreach::monte_carlo::TrajectoryEnsemble;
use stochreach::{IntervalVector, ReachStep, ReachTube};

use crate::error::CliError;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::File::create(path).map_err(|e| io_err(path, e))
}

/// Tube CSV header for state dimension `n`.
///
/// `k, t, delta, prob_lower_bound, lower_1..n, upper_1..n, nominal_1..n`,
/// followed by `theta_lo, theta_hi` when `with_theta` is set.
pub fn tube_header(n: usize, with_theta: bool) -> Vec<String> {
    let mut h: Vec<String> = ["k", "t", "delta", "prob_lower_bound"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for prefix in ["lower", "upper", "nominal"] {
        h.extend((1..=n).map(|i| format!("{prefix}_{i}")));
    }
    if with_theta {
        h.push("theta_lo".into());
        h.push("theta_hi".into());
    }
    h
}

pub fn write_tube_csv(
    path: &Path,
    tube: &ReachTube,
    theta: Option<&[(f64, f64)]>,
) -> Result<(), CliError> {
    let n = tube.steps.first().map_or(0, |s| s.bounds.dim());
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(tube_header(n, theta.is_some()))
        .map_err(|e| io_err(path, e))?;
    for (i, s) in tube.steps.iter().enumerate() {
        let mut row = vec![
            s.k.to_string(),
            fmt_f64(s.time),
            fmt_f64(s.delta),
            fmt_f64(s.probability_lower_bound()),
        ];
        row.extend(s.bounds.lower().iter().map(|v| fmt_f64(*v)));
        row.extend(s.bounds.upper().iter().map(|v| fmt_f64(*v)));
        row.extend(s.nominal.iter().map(|v| fmt_f64(*v)));
        if let Some(t) = theta {
            row.push(fmt_f64(t[i].0));
            row.push(fmt_f64(t[i].1));
        }
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a tube written by [`write_tube_csv`]. Theta columns are ignored.
pub fn read_tube_csv(path: &Path) -> Result<ReachTube, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| io_err(path, e))?.clone();
    let n = header.iter().filter(|h| h.starts_with("lower_")).count();
    let with_theta = header.iter().any(|h| h == "theta_lo");
    let expected = tube_header(n, with_theta);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(bad("unexpected tube header".into()));
    }
    let mut steps = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| io_err(path, e))?;
        let num = |i: usize| -> Result<f64, CliError> {
            record[i].parse::<f64>().map_err(|e| {
                bad(format!(
                    "row {}, column {}: {e}",
                    line + 1,
                    &header[i]
                ))
            })
        };
        let k = record[0]
            .parse::<usize>()
            .map_err(|e| bad(format!("row {}, column k: {e}", line + 1)))?;
        let col = |offset: usize| {
            (0..n)
                .map(|i| num(4 + offset + i))
                .collect::<Result<Vec<_>, _>>()
        };
        let bounds = IntervalVector::new(col(0)?, col(n)?)
            .map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
        steps.push(ReachStep {
            k,
            time: num(1)?,
            delta: num(2)?,
            bounds,
            nominal: col(2 * n)?,
        });
    }
    Ok(ReachTube { steps })
}

/// Long format: `trajectory, k, t, x_1..n`.
pub fn write_trajectories_csv(
    path: &Path,
    e: &TrajectoryEnsemble,
    sample_time: f64,
) -> Result<(), CliError> {
    let n = e
        .trajectories
        .first()
        .and_then(|p| p.first())
        .map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["trajectory".to_string(), "k".into(), "t".into()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for (m, path_m) in e.trajectories.iter().enumerate() {
        for (k, x) in path_m.iter().enumerate() {
            let mut row = vec![
                m.to_string(),
                k.to_string(),
                fmt_f64(k as f64 * sample_time),
            ];
            row.extend(x.iter().map(|v| fmt_f64(*v)));
            w.write_record(&row).map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize infallibly")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = create(path)?;
    writeln!(f, "{}", to_json(value)).map_err(|e| io_err(path, e))
}
