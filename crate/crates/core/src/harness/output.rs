use std::io::Write;

use crate::error::Result;

use super::bounds::BoundsRow;
use super::experiment::ResultRow;

pub const RESULTS_HEADER: [&str; 9] = [
    "sweep_variable",
    "sweep_value",
    "method",
    "ser",
    "ser_stderr",
    "mean_sinr_db",
    "mean_mult_count",
    "trials",
    "symbols",
];

pub const BOUNDS_HEADER: [&str; 6] = ["u", "n_star", "n_ports", "m", "asep_lower", "asep_upper"];

pub fn write_results_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bounds_csv<W: Write>(rows: &[BoundsRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(BOUNDS_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
