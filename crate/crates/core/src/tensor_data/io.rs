//! Long-format CSV: header `t,i,j,value`, one row per cell, 1-based indices,
//! rows in any order but covering the full `T x p1 x p2` grid.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::MatrixSeries;
use crate::error::{Error, Result};

const HEADER: [&str; 4] = ["t", "i", "j", "value"];

pub fn write_series<W: Write>(series: &MatrixSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::parse(None, e.to_string());
    w.write_record(HEADER).map_err(to_err)?;
    for (t, frame) in series.frames().iter().enumerate() {
        for i in 0..series.p1() {
            for j in 0..series.p2() {
                // `{:?}` is the shortest representation that round-trips.
                w.write_record(&[
                    (t + 1).to_string(),
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    format!("{:?}", frame[(i, j)]),
                ])
                .map_err(to_err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::parse(None, e.to_string()))
}

pub fn save_series(series: &MatrixSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut buf = BufWriter::new(file);
    write_series(series, &mut buf)?;
    buf.flush().map_err(io_err)
}

pub fn load_series(path: impl AsRef<Path>) -> Result<MatrixSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_series(file)
}

fn parse_index(field: &str, name: &str, line: u64) -> Result<usize> {
    match field.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(Error::parse(
            Some(line),
            format!("{name} must be a positive integer, got {field:?}"),
        )),
    }
}

pub fn read_series<R: Read>(reader: R) -> Result<MatrixSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let csv_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line());
        Error::parse(line, e.to_string())
    };

    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::parse(Some(1), "no data rows"));
    }
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::parse(
            Some(1),
            format!("expected header `t,i,j,value`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut cells: Vec<(usize, usize, usize, f64, u64)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let t = parse_index(&record[0], "t", line)?;
        let i = parse_index(&record[1], "i", line)?;
        let j = parse_index(&record[2], "j", line)?;
        let value: f64 = record[3].parse().map_err(|_| {
            Error::parse(Some(line), format!("value {:?} is not a number", &record[3]))
        })?;
        if !value.is_finite() {
            return Err(Error::parse(Some(line), format!("value {value} is not finite")));
        }
        cells.push((t, i, j, value, line));
    }
    if cells.is_empty() {
        return Err(Error::parse(None, "no data rows"));
    }

    let t_len = cells.iter().map(|c| c.0).max().unwrap_or(0);
    let p1 = cells.iter().map(|c| c.1).max().unwrap_or(0);
    let p2 = cells.iter().map(|c| c.2).max().unwrap_or(0);
    let mut grid: Vec<Option<(f64, u64)>> = vec![None; t_len * p1 * p2];
    let slot = |t: usize, i: usize, j: usize| ((t - 1) * p1 + (i - 1)) * p2 + (j - 1);
    for &(t, i, j, v, line) in &cells {
        let cell = &mut grid[slot(t, i, j)];
        if let Some((_, first)) = cell {
            return Err(Error::parse(
                Some(line),
                format!("duplicate cell (t={t}, i={i}, j={j}), first seen at line {first}"),
            ));
        }
        *cell = Some((v, line));
    }
    let mut frames = Vec::with_capacity(t_len);
    for t in 1..=t_len {
        let mut frame = DMatrix::zeros(p1, p2);
        for i in 1..=p1 {
            for j in 1..=p2 {
                match grid[slot(t, i, j)] {
                    Some((v, _)) => frame[(i - 1, j - 1)] = v,
                    None => {
                        return Err(Error::parse(
                            None,
                            format!("incomplete grid: missing cell (t={t}, i={i}, j={j})"),
                        ))
                    }
                }
            }
        }
        frames.push(frame);
    }
    MatrixSeries::new(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_data::{simulate, DgpSpec};

    fn read_str(s: &str) -> Result<MatrixSeries> {
        read_series(s.as_bytes())
    }

    #[test]
    fn round_trip_simulated_series() {
        let spec = DgpSpec { p1: 2, p2: 2, t: 3, k1: 1, k2: 1, seed: 9, ..DgpSpec::default() };
        let series = simulate(&spec).unwrap();
        let mut buf = Vec::new();
        write_series(&series, &mut buf).unwrap();
        let back = read_series(buf.as_slice()).unwrap();
        assert_eq!(back, series);
    }

    #[test]
    fn rows_in_any_order() {
        let s = read_str("t,i,j,value\n2,1,1,4\n1,1,2,2\n1,1,1,1\n2,1,2,8\n").unwrap();
        assert_eq!((s.t_len(), s.p1(), s.p2()), (2, 1, 2));
        assert_eq!(s.frame(1)[(0, 1)], 8.0);
        assert_eq!(s.frame(0)[(0, 0)], 1.0);
    }

    #[test]
    fn missing_cell_is_named() {
        let csv = "t,i,j,value\n1,1,1,0\n1,2,2,0\n1,1,2,0\n";
        let err = read_str(csv).unwrap_err().to_string();
        assert!(err.contains("missing cell (t=1, i=2, j=1)"), "{err}");
    }

    #[test]
    fn empty_input() {
        for input in ["", "t,i,j,value\n"] {
            let err = read_str(input).unwrap_err().to_string();
            assert!(err.contains("no data rows"), "{err}");
        }
    }

    #[test]
    fn bad_header_and_values_report_lines() {
        let err = read_str("t,row,j,value\n1,1,1,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(1), .. }), "{err}");

        let err = read_str("t,i,j,value\n1,1,1,0\n1,1,2,abc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(3), .. }), "{err}");

        let err = read_str("t,i,j,value\n1,1,1,0\n0,1,2,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(3), .. }), "{err}");

        let err = read_str("t,i,j,value\n1,1,1,0\n1,1,1,1\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");

        let err = read_str("t,i,j,value\n1,1,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(2), .. }), "{err}");
    }
}
