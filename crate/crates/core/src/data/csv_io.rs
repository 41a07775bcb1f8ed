use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

fn expected_header(k: usize, l: usize) -> Vec<String> {
    (1..=k)
        .map(|i| format!("u_{i}"))
        .chain((1..=l).map(|i| format!("t_{i}")))
        .collect()
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn read_header(reader: &mut csv::Reader<File>, path: &Path) -> Result<Vec<String>> {
    let header = reader.headers().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        row: 0,
        column: 0,
        message: e.to_string(),
    })?;
    Ok(header.iter().map(str::to_owned).collect())
}

/// Reads a dataset whose header is exactly `u_1,…,u_K,t_1,…,t_L`.
///
/// Rows and columns in error messages are 1-based; row 1 is the first data row after the header.
pub fn load_csv(path: impl AsRef<Path>, k: usize, l: usize, washout: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let header = read_header(&mut reader, path)?;
    let expected = expected_header(k, l);
    if header != expected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!(
                "header must be '{}', found '{}'",
                expected.join(","),
                header.join(",")
            ),
        });
    }
    read_body(reader, path, k, l, washout)
}

/// Reads a dataset, taking `K` and `L` from the number of `u_` and `t_` header fields.
pub fn load_csv_auto(path: impl AsRef<Path>, washout: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let header = read_header(&mut reader, path)?;
    let k = header.iter().take_while(|h| h.starts_with("u_")).count();
    let l = header.len() - k;
    if header != expected_header(k, l) || k == 0 || l == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!(
                "header must be 'u_1,…,u_K,t_1,…,t_L', found '{}'",
                header.join(",")
            ),
        });
    }
    read_body(reader, path, k, l, washout)
}

fn read_body(
    mut reader: csv::Reader<File>,
    path: &Path,
    k: usize,
    l: usize,
    washout: usize,
) -> Result<Dataset> {
    let width = k + l;
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.len() != width {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                column: record.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row,
                column: c + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    column: c + 1,
                    message: format!("'{cell}' is not finite"),
                });
            }
            columns[c].push(value);
        }
    }
    let n = columns[0].len();
    if n == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    let u = Matrix::from_vec(k, n, columns[..k].concat())?;
    let t = Matrix::from_vec(l, n, columns[k..].concat())?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(u, t, washout, name)
}

/// Writes `dataset` with the `u_1,…,t_L` header. Values use the shortest representation that
/// parses back to the same double.
pub fn write_csv(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(
        w,
        "{}",
        expected_header(dataset.input_dim(), dataset.output_dim()).join(",")
    )
    .map_err(io)?;
    for c in 0..dataset.len() {
        let cells: Vec<String> = dataset
            .u
            .column(c)
            .into_iter()
            .chain(dataset.t.column(c))
            .map(|v| v.to_string())
            .collect();
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}
