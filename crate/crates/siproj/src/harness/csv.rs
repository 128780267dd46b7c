//! Trajectory CSV artifacts.
//!
//! Floats are rendered with 17 significant digits so a written file parses
//! back to the exact same bit patterns.

use crate::analysis::TrajectoryRecord;
use crate::error::{Error, Result};
use std::fs;
use std::io::Write;
use std::path::Path;

pub const TRAJECTORY_HEADER: &str =
    "step,weight_norm,effective_step,cosine_wg,objective,projected,raw_update_norm,applied_update_norm";

/// 17-significant-digit rendering, enough to round-trip any f64.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv(records: &[TrajectoryRecord], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.step,
            format_f64(r.weight_norm),
            format_f64(r.effective_step),
            format_f64(r.cosine_wg),
            format_f64(r.objective),
            r.projected,
            format_f64(r.raw_update_norm),
            format_f64(r.applied_update_norm),
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == TRAJECTORY_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "unexpected trajectory header: {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Config(format!(
                "row {}: expected 8 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let float = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("row {}: bad float '{}'", lineno + 2, fields[i])))
        };
        records.push(TrajectoryRecord {
            step: fields[0]
                .parse()
                .map_err(|_| Error::Config(format!("row {}: bad step", lineno + 2)))?,
            weight_norm: float(1)?,
            effective_step: float(2)?,
            cosine_wg: float(3)?,
            objective: float(4)?,
            projected: match fields[5] {
                "true" => true,
                "false" => false,
                other => {
                    return Err(Error::Config(format!(
                        "row {}: bad projected flag '{other}'",
                        lineno + 2
                    )))
                }
            },
            raw_update_norm: float(6)?,
            applied_update_norm: float(7)?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(step: u64, cosine: f64) -> TrajectoryRecord {
        TrajectoryRecord {
            step,
            weight_norm: 1.0 + step as f64 * 0.1,
            effective_step: 0.01 / (step + 1) as f64,
            cosine_wg: cosine,
            objective: (step as f64).sin(),
            projected: step.is_multiple_of(2),
            raw_update_norm: 0.3,
            applied_update_norm: 0.2999999999999999,
        }
    }

    #[test]
    fn empty_record_list_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trajectory_csv(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{TRAJECTORY_HEADER}\n"));
    }

    #[test]
    fn three_records_make_four_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let records: Vec<_> = (0..3).map(|s| sample(s, 0.5)).collect();
        write_trajectory_csv(&records, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut records: Vec<_> = (0..5).map(|s| sample(s, 1.0 / 3.0)).collect();
        // Untestable cosine is carried as NaN and must survive the trip.
        records.push(sample(5, f64::NAN));
        write_trajectory_csv(&records, &path).unwrap();
        let back = read_trajectory_csv(&path).unwrap();
        assert_eq!(records.len(), back.len());
        for (a, b) in records.iter().zip(&back) {
            assert_eq!(a.step, b.step);
            assert_eq!(a.projected, b.projected);
            for (x, y) in [
                (a.weight_norm, b.weight_norm),
                (a.effective_step, b.effective_step),
                (a.cosine_wg, b.cosine_wg),
                (a.objective, b.objective),
                (a.raw_update_norm, b.raw_update_norm),
                (a.applied_update_norm, b.applied_update_norm),
            ] {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn rejects_malformed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, format!("{TRAJECTORY_HEADER}\n1,2,3\n")).unwrap();
        assert!(read_trajectory_csv(&path).is_err());
        std::fs::write(&path, "step,foo\n").unwrap();
        assert!(read_trajectory_csv(&path).is_err());
    }
}
