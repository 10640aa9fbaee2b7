//! CSV artifacts: a schema line, a timestamp comment, then RFC 4180 rows.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::Result;

pub const LEG_TERMS_SCHEMA: &str = "quanto-cds/leg-terms/v1";
pub const SWEEP_SCHEMA: &str = "quanto-cds/sweep/v1";
pub const BENCHMARK_SCHEMA: &str = "quanto-cds/benchmark/v1";
pub const MC_CHECK_SCHEMA: &str = "quanto-cds/mc-check/v1";

/// `x` with 10 significant digits.
pub fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-5..15).contains(&magnitude) {
        let decimals = (9 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.9e}")
    }
}

/// Writes a CSV file. Row 1 names the schema, row 2 carries the generation
/// time, and everything after it depends only on the inputs.
pub fn write_csv(path: &Path, schema: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut file = File::create(path)?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    writeln!(file, "# schema: {schema}")?;
    writeln!(file, "# generated_unix: {stamp}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
