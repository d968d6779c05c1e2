//! CSV ingestion of point sets and CSV emission of iterate traces.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::geometry::PointSet;
use crate::linalg::Vec2;
use crate::solver::TraceRow;

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("record {record}: expected two numeric columns `x,y`")]
    Malformed { record: usize },
    #[error("invalid point data: {0}")]
    Invalid(&'static str),
}

/// Reads a two-column `x,y` CSV into a point set. A non-numeric first record
/// is treated as a header; decimal separator is `.`.
pub fn read_points_csv<R: Read>(reader: R) -> Result<PointSet, ReadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut points = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(ReadError::Malformed { record: idx + 1 });
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => points.push(Vec2::new(x, y)),
            _ if idx == 0 => continue, // header row
            _ => return Err(ReadError::Malformed { record: idx + 1 }),
        }
    }
    PointSet::new(points).map_err(|_| ReadError::Invalid("non-finite coordinate"))
}

pub fn read_points_csv_path(path: &Path) -> Result<PointSet, ReadError> {
    read_points_csv(File::open(path)?)
}

/// Writes an iterate trace as CSV rows
/// `iter,a,b,value,grad_norm,lambda,phase,evaluator,step_norm,h_max,restarted`.
pub fn write_trace_csv<W: Write>(mut w: W, rows: &[TraceRow]) -> io::Result<()> {
    writeln!(
        w,
        "iter,a,b,value,grad_norm,lambda,phase,evaluator,step_norm,h_max,restarted"
    )?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.iter,
            row.center.x,
            row.center.y,
            row.value,
            row.grad_norm,
            row.lambda,
            row.phase,
            row.evaluator,
            row.step_norm,
            row.h_max,
            row.restarted
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_with_and_without_header() {
        let with = "x,y\n1.0,2.0\n-0.5,0.25\n3,4\n";
        let pts = read_points_csv(with.as_bytes()).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts.points()[0], Vec2::new(1.0, 2.0));

        let without = "1.0,2.0\n-0.5,0.25\n3,4\n";
        let pts2 = read_points_csv(without.as_bytes()).unwrap();
        assert_eq!(pts.points(), pts2.points());
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(matches!(
            read_points_csv("x,y\n1.0,2.0\n1.0,oops\n".as_bytes()),
            Err(ReadError::Malformed { record: 3 })
        ));
        assert!(matches!(
            read_points_csv("1,2,3\n".as_bytes()),
            Err(ReadError::Malformed { record: 1 })
        ));
    }

    #[test]
    fn empty_input_gives_empty_set() {
        let pts = read_points_csv("".as_bytes()).unwrap();
        assert!(pts.is_empty());
    }
}
