//! Text matrix files.
//!
//! ```text
//! MPC1 <rows> <cols> <modulus>
//! <rows> lines of <cols> space-separated decimal values
//! ```
//!
//! Modulus 0 means wrapping `u64` arithmetic. Lines end in LF.

use std::fmt::Write as _;
use std::path::Path;

use crate::matrix::Matrix;
use crate::ring::{Ring, RingContext};

const MAGIC: &str = "MPC1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn bad(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

pub fn serialize(m: &Matrix<RingContext>) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 8 + 32);
    writeln!(out, "{MAGIC} {} {} {}", m.rows(), m.cols(), m.ring().file_modulus()).expect("write to string");
    for i in 0..m.rows() {
        let mut first = true;
        for &v in m.row(i) {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{v}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn parse(text: &str) -> Result<Matrix<RingContext>, FormatError> {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or_default();
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 4 || fields[0] != MAGIC {
        return Err(bad(1, format!("expected \"{MAGIC} <rows> <cols> <modulus>\"")));
    }
    let num = |s: &str, what: &str| s.parse::<u64>().map_err(|_| bad(1, format!("bad {what} {s:?}")));
    let rows = num(fields[1], "row count")? as usize;
    let cols = num(fields[2], "column count")? as usize;
    let ring = RingContext::from_modulus(num(fields[3], "modulus")?).map_err(|e| bad(1, e.to_string()))?;

    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line_no = r + 2;
        let line = lines.next().ok_or_else(|| bad(line_no, "missing row"))?;
        let before = data.len();
        if cols > 0 {
            for tok in line.split(' ') {
                let v: u64 = tok.parse().map_err(|_| bad(line_no, format!("bad value {tok:?}")))?;
                if !ring.is_canonical(v) {
                    return Err(bad(line_no, format!("value {v} not below the modulus")));
                }
                data.push(v);
            }
        } else if !line.is_empty() {
            return Err(bad(line_no, "expected an empty row"));
        }
        if data.len() - before != cols {
            return Err(bad(line_no, format!("expected {cols} values, found {}", data.len() - before)));
        }
    }
    match (lines.next(), lines.next()) {
        (Some(""), None) => {}
        _ => return Err(bad(rows + 2, "expected end of file after the last row")),
    }
    Matrix::new(ring, rows, cols, data).map_err(|e| bad(1, e.to_string()))
}

pub fn read_matrix(path: &Path) -> Result<Matrix<RingContext>, FormatError> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &Matrix<RingContext>) -> Result<(), FormatError> {
    std::fs::write(path, serialize(m))?;
    Ok(())
}
