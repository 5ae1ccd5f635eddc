//! CSV result tables.
//!
//! Floating-point cells are printed with 17 significant digits so that a
//! parsed file reproduces the in-memory values exactly.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use super::sweep::SweepResult;
use crate::{Error, Result};

pub const SUMMARY_HEADER: [&str; 7] = [
    "mode",
    "sweep_variable",
    "sweep_value",
    "mean_sum_rate_bps_hz",
    "std_err",
    "n_realizations",
    "n_failed",
];

pub const REALIZATION_HEADER: [&str; 15] = [
    "mode",
    "sweep_variable",
    "sweep_value",
    "point_index",
    "realization",
    "seed",
    "sum_rate_bps_hz",
    "design_sum_rate_bps_hz",
    "converged",
    "iterations",
    "interval_feasible",
    "linear_fraction",
    "saturated_fraction",
    "reflect_only_fraction",
    "error",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Summary table: one row per (mode, sweep value).
pub fn write_summary<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in &result.summaries {
        w.write_record([
            s.mode.name().to_string(),
            result.sweep_variable.name().to_string(),
            num(s.sweep_value),
            num(s.mean_sum_rate),
            num(s.std_err),
            s.n_ok.to_string(),
            s.n_failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long table: one row per (cell, mode). Failed runs leave the rate cells
/// empty and carry the reason in the last column.
pub fn write_realization_table<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REALIZATION_HEADER)?;
    for r in &result.records {
        w.write_record([
            r.mode.name().to_string(),
            result.sweep_variable.name().to_string(),
            num(r.sweep_value),
            r.point_index.to_string(),
            r.realization.to_string(),
            r.seed.to_string(),
            opt(r.sum_rate),
            opt(r.design_sum_rate),
            r.converged.to_string(),
            r.iterations.to_string(),
            r.interval_feasible.to_string(),
            num(r.region_fractions[0]),
            num(r.region_fractions[1]),
            num(r.region_fractions[2]),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn to_file(path: &Path, f: impl FnOnce(File) -> csv::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f(file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_results(result: &SweepResult, path: &Path) -> Result<()> {
    to_file(path, |f| write_summary(result, io::BufWriter::new(f)))
}

pub fn write_realizations(result: &SweepResult, path: &Path) -> Result<()> {
    to_file(path, |f| write_realization_table(result, io::BufWriter::new(f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::SweepVariable;
    use crate::harness::sweep::PointSummary;
    use crate::solver::Mode;

    fn result(summaries: Vec<PointSummary>) -> SweepResult {
        SweepResult {
            sweep_variable: SweepVariable::PBsDbm,
            sweep_values: vec![6.0],
            modes: vec![Mode::Passive],
            summaries,
            records: vec![],
        }
    }

    fn summary(mean: f64) -> PointSummary {
        PointSummary {
            mode: Mode::Passive,
            point_index: 0,
            sweep_value: 6.0,
            mean_sum_rate: mean,
            std_err: 0.1 / 3.0,
            min_sum_rate: mean,
            max_sum_rate: mean,
            n_ok: 3,
            n_failed: 1,
            converged_fraction: 1.0,
            mean_iterations: 2.0,
            region_fractions: [1.0, 0.0, 0.0],
        }
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut buf = Vec::new();
        write_summary(&result(vec![]), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "mode,sweep_variable,sweep_value,mean_sum_rate_bps_hz,std_err,n_realizations,n_failed\n"
        );
    }

    #[test]
    fn values_round_trip_exactly() {
        let mean = std::f64::consts::PI / 7.0;
        let mut buf = Vec::new();
        write_summary(&result(vec![summary(mean)]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let row = rd.records().next().unwrap().unwrap();
        assert_eq!(&row[0], "passive");
        assert_eq!(&row[1], "p_bs_dbm");
        assert_eq!(row[3].parse::<f64>().unwrap(), mean);
        assert_eq!(row[4].parse::<f64>().unwrap(), 0.1 / 3.0);
        assert_eq!((&row[5], &row[6]), ("3", "1"));
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let path = Path::new("/nonexistent-dir/results.csv");
        let err = write_results(&result(vec![]), path).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/results.csv"));
    }
}
