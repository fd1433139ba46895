//! Deterministic CSV export. Floats are written with 17 significant digits so
//! that parsing them back reproduces the exact bit pattern.

use std::path::Path;

use nalgebra::DVector;

use super::closed_loop::TimeSeriesRecord;
use super::sweep::SweepReport;
use crate::baselines::DescentTrajectory;
use crate::error::{Error, Result};
use crate::rcpe::format_tuple;

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Column names for records with the given dimensions.
pub fn record_header(l_y: usize, l_mu: usize, l_theta: usize) -> Vec<String> {
    let mut h = vec!["k".to_string()];
    h.extend((1..=l_y).map(|i| format!("z_{i}")));
    h.push("znorm".into());
    h.extend((1..=l_mu).map(|i| format!("nu_{i}")));
    h.extend((1..=l_mu).map(|i| format!("muhat_{i}")));
    h.push("muerr".into());
    h.extend((1..=l_theta).map(|i| format!("theta_{i}")));
    h.push("diverged".into());
    h
}

fn record_row(r: &TimeSeriesRecord) -> Vec<String> {
    let mut row = vec![r.k.to_string()];
    row.extend(r.z.iter().map(|&v| format_float(v)));
    row.push(format_float(r.znorm));
    row.extend(r.nu.iter().map(|&v| format_float(v)));
    row.extend(r.mu_hat.iter().map(|&v| format_float(v)));
    row.push(format_float(r.muerr));
    row.extend(r.theta.iter().map(|&v| format_float(v)));
    row.push(u8::from(r.diverged).to_string());
    row
}

/// Writes records to any writer; dimensions fix the header even when `records` is empty.
pub fn write_records<W: std::io::Write>(
    out: W,
    records: &[TimeSeriesRecord],
    dims: (usize, usize, usize),
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(record_header(dims.0, dims.1, dims.2))?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes records as CSV with dimensions `(l_y, l_mu, l_theta)`.
pub fn export_records_csv(
    path: &Path,
    records: &[TimeSeriesRecord],
    dims: (usize, usize, usize),
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_records(std::io::BufWriter::new(file), records, dims).map_err(|e| io_err(path, e))
}

/// Parses a records CSV written by [`export_records_csv`].
///
/// `y`, `yhat` and `saturated` are not part of the file; they come back empty/false.
pub fn read_records_csv(path: &Path) -> Result<Vec<TimeSeriesRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = rdr.headers().map_err(|e| io_err(path, e))?.clone();
    let count = |prefix: &str| header.iter().filter(|h| h.starts_with(prefix)).count();
    let (l_y, l_mu, l_theta) = (count("z_"), count("nu_"), count("theta_"));
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| io_err(path, e))?;
        let f = |i: usize| -> Result<f64> {
            row.get(i)
                .ok_or_else(|| io_err(path, format!("missing column {i}")))?
                .parse::<f64>()
                .map_err(|e| io_err(path, e))
        };
        let vec = |start: usize, len: usize| -> Result<DVector<f64>> {
            (start..start + len)
                .map(f)
                .collect::<Result<Vec<_>>>()
                .map(DVector::from_vec)
        };
        let k = row
            .get(0)
            .unwrap_or_default()
            .parse::<usize>()
            .map_err(|e| io_err(path, e))?;
        let mut c = 1;
        let z = vec(c, l_y)?;
        c += l_y;
        let znorm = f(c)?;
        c += 1;
        let nu = vec(c, l_mu)?;
        c += l_mu;
        let mu_hat = vec(c, l_mu)?;
        c += l_mu;
        let muerr = f(c)?;
        c += 1;
        let theta = vec(c, l_theta)?;
        c += l_theta;
        let diverged = row.get(c) == Some("1");
        out.push(TimeSeriesRecord {
            k,
            y: DVector::zeros(0),
            yhat: DVector::zeros(0),
            z,
            znorm,
            nu,
            mu_hat,
            muerr,
            theta,
            diverged,
            saturated: false,
        });
    }
    Ok(out)
}

pub const SWEEP_HEADER: [&str; 6] = [
    "case_id",
    "permutation",
    "signs",
    "verdict",
    "final_muerr",
    "diverge_step",
];

pub fn write_sweep<W: std::io::Write>(
    out: W,
    report: &SweepReport,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for c in &report.cases {
        let signs = if c.signs.is_empty() {
            String::new()
        } else {
            let s: Vec<String> = c.signs.iter().map(|s| format!("{s:+}")).collect();
            format!("({})", s.join(","))
        };
        w.write_record([
            c.case_id.clone(),
            format_tuple(&c.permutation),
            signs,
            c.verdict.as_str().to_string(),
            format_float(c.final_muerr),
            c.diverge_step.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_sweep_csv(path: &Path, report: &SweepReport) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_sweep(std::io::BufWriter::new(file), report).map_err(|e| io_err(path, e))
}

/// Writes a descent trajectory as `iter, cost, muhat_1.., muerr`.
pub fn write_descent<W: std::io::Write>(
    out: W,
    traj: &DescentTrajectory,
    mu_true: &DVector<f64>,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iter".to_string(), "cost".to_string()];
    header.extend((1..=mu_true.len()).map(|i| format!("muhat_{i}")));
    header.push("muerr".into());
    w.write_record(&header)?;
    for (j, (mu, cost)) in traj.estimates.iter().zip(&traj.costs).enumerate() {
        let mut row = vec![j.to_string(), format_float(*cost)];
        row.extend(mu.iter().map(|&v| format_float(v)));
        row.push(format_float((mu - mu_true).norm()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_descent_csv(
    path: &Path,
    traj: &DescentTrajectory,
    mu_true: &DVector<f64>,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_descent(std::io::BufWriter::new(file), traj, mu_true).map_err(|e| io_err(path, e))
}
