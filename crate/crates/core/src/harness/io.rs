//! CSV and JSON formats.
//!
//! Series files have the header `t,x,u,y`; the `x` and `u` cells are left
//! empty for observed data. Floats are written with 17 significant digits
//! so a read-back path is bitwise identical to the one written.

use std::io::{Read, Write};

use serde::Serialize;

use super::study::{StudyReport, TABLE1_ESTIMATORS};
use super::FORMAT_VERSION;
use crate::clock::StoppedClockPath;
use crate::error::{Error, Result};
use crate::processes::{max_zero_run, BinarySeries, Marginal, SeriesPath};

pub const SERIES_HEADER: [&str; 4] = ["t", "x", "u", "y"];
pub const STUDY_HEADER: [&str; 6] = ["estimator", "m", "abias", "rmse", "truth", "replicas"];

/// 17 significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_series_csv<W: Write>(path: &StoppedClockPath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    let y = path.y().values();
    let x = path.x().map(SeriesPath::values);
    let u = path.u().map(BinarySeries::values);
    for t in 0..y.len() {
        let x_cell = x.map(|v| format_float(v[t])).unwrap_or_default();
        let u_cell = u.map(|v| v[t].to_string()).unwrap_or_default();
        w.write_record([(t + 1).to_string(), x_cell, u_cell, format_float(y[t])])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_float(cell: &str, row: usize, column: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("row {row}: bad {column} value {cell:?}")))
}

/// Reads a series file. The `y` column is required; `x` and `u` are used
/// when every row fills them.
pub fn read_series_csv<R: Read>(input: R) -> Result<StoppedClockPath> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let y_col = column("y").ok_or_else(|| Error::Format("missing y column".into()))?;
    let (x_col, u_col) = (column("x"), column("u"));

    let (mut y, mut x, mut u) = (Vec::new(), Vec::new(), Vec::new());
    let (mut has_x, mut has_u) = (x_col.is_some(), u_col.is_some());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let cell = |c: Option<usize>| c.and_then(|c| record.get(c)).unwrap_or("");
        y.push(parse_float(cell(Some(y_col)), row, "y")?);
        let xs = cell(x_col);
        if xs.is_empty() {
            has_x = false;
        } else if has_x {
            x.push(parse_float(xs, row, "x")?);
        }
        let us = cell(u_col);
        if us.is_empty() {
            has_u = false;
        } else if has_u {
            match us {
                "0" => u.push(0),
                "1" => u.push(1),
                other => return Err(Error::Format(format!("row {row}: bad u value {other:?}"))),
            }
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyPath);
    }
    let marginal = Marginal::Unknown;
    let y = SeriesPath::new(y, marginal)?;
    let x = if has_x {
        Some(SeriesPath::new(x, marginal)?)
    } else {
        None
    };
    let u = if has_u {
        let kappa = max_zero_run(&u) + 1;
        Some(BinarySeries::new(u, kappa)?)
    } else {
        None
    };
    StoppedClockPath::from_columns(y, x, u)
}

pub fn write_study_csv<W: Write>(report: &StudyReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STUDY_HEADER)?;
    for name in TABLE1_ESTIMATORS {
        for cell in report.cells.iter().filter(|c| c.estimator == name) {
            w.write_record([
                cell.estimator.clone(),
                cell.m.to_string(),
                format_float(cell.abias),
                format_float(cell.rmse),
                format_float(cell.truth),
                cell.replicas.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    spec: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with the format version as the first key, newline-terminated.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&Versioned {
        spec: FORMAT_VERSION,
        body: value,
    })?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{simulate, BaseProcess};
    use crate::processes::{SeedStream, WindowRuleParams};

    #[test]
    fn series_round_trip_is_bitwise() {
        let path = simulate(
            BaseProcess::IidFrechet,
            WindowRuleParams::table1_default(),
            200,
            &SeedStream::new(8),
            0,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_series_csv(&path, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x,u,y\n1,"));
        let back = read_series_csv(buf.as_slice()).unwrap();
        assert_eq!(back.y().values(), path.y().values());
        assert_eq!(back.x().unwrap().values(), path.x().unwrap().values());
        assert_eq!(back.u().unwrap().values(), path.u().unwrap().values());
    }

    #[test]
    fn observed_only_series() {
        let text = "t,x,u,y\n1,,,1.5\n2,,,1.5\n3,,,2.0\n";
        let path = read_series_csv(text.as_bytes()).unwrap();
        assert_eq!(path.y().values(), &[1.5, 1.5, 2.0]);
        assert!(path.x().is_none() && path.u().is_none());
        let minimal = read_series_csv("y\n3\n4\n".as_bytes()).unwrap();
        assert_eq!(minimal.len(), 2);
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let text = "t,x,u,y\n1,1.0,1,1.0\n2,2.0,0,2.0\n";
        assert!(read_series_csv(text.as_bytes()).is_err());
        assert!(read_series_csv("t,y\n1,abc\n".as_bytes()).is_err());
        assert!(read_series_csv("t,x\n1,2\n".as_bytes()).is_err());
        assert!(read_series_csv("t,y\n".as_bytes()).is_err());
    }

    #[test]
    fn json_carries_version_first() {
        #[derive(Serialize)]
        struct Body {
            value: f64,
        }
        let text = to_json(&Body { value: 0.5 }).unwrap();
        assert!(text.starts_with("{\n  \"spec\": \"stopped-clock/1\",\n  \"value\": 0.5"));
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
