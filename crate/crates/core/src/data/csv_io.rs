//! Comma-separated numeric matrices, one file per view.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use super::ViewDataset;
use crate::error::{Error, Result};

fn reader(path: &Path, header: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .comment(None)
        .from_reader(file))
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => parse_error(
            path,
            line,
            format!("ragged row: {len} fields, expected {expected_len}"),
        ),
        _ => parse_error(path, line, err.to_string()),
    }
}

/// Reads an `N × d` matrix. Blank lines are skipped.
pub fn read_matrix_csv(path: impl AsRef<Path>, header: bool) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let mut rdr = reader(path, header)?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if cols.is_none() {
            cols = Some(record.len());
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                parse_error(
                    path,
                    line,
                    format!("column {}: `{field}` is not a number", c + 1),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_error(
                    path,
                    line,
                    format!("column {}: non-finite value", c + 1),
                ));
            }
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_error(path, 1, "no data rows"))?;
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Internal(e.to_string()))
}

/// Reads one non-negative integer label per row.
pub fn read_labels_csv(path: impl AsRef<Path>, header: bool) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let mut rdr = reader(path, header)?;
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 1 {
            return Err(parse_error(
                path,
                line,
                format!("expected 1 label, got {} fields", record.len()),
            ));
        }
        let label = record[0]
            .parse()
            .map_err(|_| parse_error(path, line, format!("`{}` is not a label", &record[0])))?;
        labels.push(label);
    }
    Ok(labels)
}

/// Loads one matrix per file; rows are aligned by position.
pub fn load_csv_views<P: AsRef<Path>>(
    paths: &[P],
    label_path: Option<&Path>,
    header: bool,
) -> Result<ViewDataset> {
    if paths.is_empty() {
        return Err(Error::Config("no view files given".into()));
    }
    let views = paths
        .iter()
        .map(|p| read_matrix_csv(p, header))
        .collect::<Result<Vec<_>>>()?;
    let n = views[0].nrows();
    for (p, x) in paths.iter().zip(&views).skip(1) {
        if x.nrows() != n {
            return Err(parse_error(
                p.as_ref(),
                x.nrows() as u64 + u64::from(header),
                format!("{} rows, first view has {n}", x.nrows()),
            ));
        }
    }
    let labels = match label_path {
        Some(lp) => {
            let l = read_labels_csv(lp, header)?;
            if l.len() != n {
                return Err(parse_error(
                    lp,
                    l.len() as u64,
                    format!("{} labels for {n} samples", l.len()),
                ));
            }
            Some(l)
        }
        None => None,
    };
    let names = paths
        .iter()
        .map(|p| {
            p.as_ref()
                .file_stem()
                .map_or_else(|| "view".to_string(), |s| s.to_string_lossy().into_owned())
        })
        .collect();
    ViewDataset::with_names(views, labels, names)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

/// Writes a matrix with shortest round-trip float formatting.
pub fn write_matrix_csv(
    path: impl AsRef<Path>,
    x: &Array2<f64>,
    header: Option<&[String]>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    if let Some(h) = header {
        writeln!(w, "{}", h.join(",")).map_err(io)?;
    }
    for row in x.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_labels_csv(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    for l in labels {
        writeln!(w, "{l}").map_err(io)?;
    }
    w.flush().map_err(io)
}
