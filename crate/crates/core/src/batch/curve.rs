//! Certified-accuracy curves: the fraction of inputs whose certified radius
//! covers each grid radius, per (measure, method, bound, threshold).

use std::io::{self, BufRead, Write};

use crate::batch::BatchError;
use crate::certify::{BoundSide, Certificate, Method};
use crate::measures::MeasureKind;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub measure: MeasureKind,
    pub method: Method,
    pub bound: BoundSide,
    pub threshold: f64,
    pub radius: f64,
    pub certified_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
}

pub const CURVE_HEADER: &str = "measure,method,bound,threshold,radius,certified_fraction";

impl CurveTable {
    pub fn write_csv<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writeln!(writer, "{CURVE_HEADER}")?;
        for row in &self.rows {
            let bound = match row.bound {
                BoundSide::Lower => "lower",
                BoundSide::Upper => "upper",
            };
            writeln!(
                writer,
                "{},{},{},{},{},{}",
                row.measure, row.method, bound, row.threshold, row.radius, row.certified_fraction
            )?;
        }
        writer.flush()
    }
}

/// Groups appear in order of first occurrence; rows within a group follow
/// the grid.
pub fn curve(certificates: &[Certificate], grid: &[f64]) -> Result<CurveTable, BatchError> {
    if certificates.is_empty() {
        return Err(BatchError::NoInputs);
    }
    check_grid(grid)?;

    type Key = (MeasureKind, Method, BoundSide, u64);
    let mut groups: Vec<(Key, Vec<&Certificate>)> = Vec::new();
    for cert in certificates {
        let key = (
            cert.measure,
            cert.method,
            cert.bound,
            cert.threshold.to_bits(),
        );
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(cert),
            None => groups.push((key, vec![cert])),
        }
    }

    let mut rows = Vec::with_capacity(groups.len() * grid.len());
    for ((measure, method, bound, threshold), members) in groups {
        let total = members.len() as f64;
        for &r in grid {
            let covered = members.iter().filter(|c| c.certifies(r)).count();
            rows.push(CurveRow {
                measure,
                method,
                bound,
                threshold: f64::from_bits(threshold),
                radius: r,
                certified_fraction: covered as f64 / total,
            });
        }
    }
    Ok(CurveTable { rows })
}

fn check_grid(grid: &[f64]) -> Result<(), BatchError> {
    if grid.is_empty() {
        return Err(BatchError::Config("empty radius grid".into()));
    }
    if grid.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(BatchError::Config(
            "grid radii must be finite and non-negative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(BatchError::Config("grid radii must be sorted".into()));
    }
    Ok(())
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or a
/// comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, BatchError> {
    let bad = |what: &str| BatchError::Config(format!("grid {text:?}: {what}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(bad("expected start:stop:step"));
        };
        let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // Snap to 12 decimals against step accumulation error.
        (0..=count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    check_grid(&grid)?;
    Ok(grid)
}

/// Reads a JSON-lines certificate file, skipping blank lines.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Certificate>, BatchError> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| BatchError::Config(format!("reading certificates: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
