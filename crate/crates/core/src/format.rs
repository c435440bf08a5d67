//! Columnar text format for matrices and vectors.
//!
//! ```text
//! rows cols
//! a11 a12 ...
//! a21 a22 ...
//! ```
//!
//! Entries are whitespace separated; the writer emits one matrix row per
//! line in round-trip scientific notation. A vector is an `n × 1` matrix;
//! the reader also accepts `1 × n`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Signal};

pub fn write_matrix<W: Write>(mut w: W, a: &DenseMatrix) -> std::io::Result<()> {
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for i in 0..a.rows() {
        let line: Vec<String> = a.row(i).iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_signal<W: Write>(mut w: W, x: &[f64]) -> std::io::Result<()> {
    writeln!(w, "{} 1", x.len())?;
    for v in x {
        writeln!(w, "{v:.17e}")?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<DenseMatrix> {
    let mut tokens = Vec::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    let mut it = tokens.into_iter();
    let mut dim = |what: &str| -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("missing {what} in header")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad {what} in header")))
    };
    let rows = dim("rows")?;
    let cols = dim("cols")?;
    let data = it
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad entry `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "header says {rows}x{cols} but found {} entries",
            data.len()
        )));
    }
    DenseMatrix::from_row_major(rows, cols, data)
}

pub fn read_signal<R: BufRead>(r: R) -> Result<Signal> {
    let a = read_matrix(r)?;
    if a.cols() != 1 && a.rows() != 1 {
        return Err(Error::Parse(format!("expected a vector, got {}x{}", a.rows(), a.cols())));
    }
    Ok(a.as_slice().to_vec())
}
