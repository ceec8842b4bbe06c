//! CSV and JSON helpers shared by the experiment runner.

use crate::error::Result;
use serde::Serialize;
use std::fs;
use std::path::Path;

/// 17 significant digits, round-trip exact.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a CSV table with a header row; every cell is a float.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_rows(fs::File::create(path)?, header, rows)
}

pub fn write_rows<W: std::io::Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| fmt17(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_roundtrips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 123456.789] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
