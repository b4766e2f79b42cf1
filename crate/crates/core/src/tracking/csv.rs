//! Tracking record CSV format.
//!
//! One header line followed by one record per line. Doubles are written with
//! 17 significant digits; the fractional Doppler column carries 34.

use std::io::{Read, Write};

use super::TrackingRecord;
use crate::error::{Error, Result};
use crate::extended::DoubleDouble;

pub const CSV_HEADER: &str = "epoch_s,range_m,range_rate_mps,range_meas_m,doppler_frac,sigma_frac";

fn sci17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(mut out: W, records: &[TrackingRecord]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            sci17(r.epoch),
            sci17(r.range_true),
            sci17(r.range_rate_true),
            sci17(r.range_meas),
            r.doppler_frac_meas,
            sci17(r.sigma_frac),
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrackingRecord>> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| Error::MalformedCsv {
        line: 1,
        reason: e.to_string(),
    })?;
    let found: Vec<&str> = header.iter().collect();
    let expected: Vec<&str> = CSV_HEADER.split(',').collect();
    if found != expected {
        return Err(Error::MalformedCsv {
            line: 1,
            reason: format!("header must be `{CSV_HEADER}`, found `{}`", found.join(",")),
        });
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::MalformedCsv {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64> {
            let text = &row[i];
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::MalformedCsv {
                    line,
                    reason: format!("column `{}`: not a finite number: `{text}`", expected[i]),
                })
        };
        let doppler = row[4]
            .parse::<DoubleDouble>()
            .map_err(|_| Error::MalformedCsv {
                line,
                reason: format!("column `doppler_frac`: not a finite number: `{}`", &row[4]),
            })?;
        records.push(TrackingRecord {
            epoch: field(0)?,
            range_true: field(1)?,
            range_rate_true: field(2)?,
            range_meas: field(3)?,
            doppler_frac_meas: doppler,
            sigma_frac: field(5)?,
        });
    }
    Ok(records)
}
