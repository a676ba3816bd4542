//! Plain-text checkpoints.
//!
//! ```text
//! vgib-checkpoint v1
//! <name> <rows> <cols>
//! <row 0: cols whitespace-separated f64>
//! ...
//! <name> <rows> <cols>
//! ...
//! ```
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::layer::Parameter;
use super::NetsError;

const MAGIC: &str = "vgib-checkpoint v1";

pub fn write_checkpoint(params: &[&Parameter]) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    for p in params {
        let (rows, cols) = p.value.dim();
        let _ = writeln!(out, "{} {rows} {cols}", p.name);
        for row in p.value.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn save_checkpoint(path: &Path, params: &[&Parameter]) -> Result<(), NetsError> {
    fs::write(path, write_checkpoint(params))?;
    Ok(())
}

pub fn parse_checkpoint(text: &str) -> Result<Vec<Parameter>, NetsError> {
    let err = |line: usize, message: String| NetsError::Checkpoint { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(err(1, format!("expected header `{MAGIC}`"))),
    }
    let mut params = Vec::new();
    while let Some((no, header)) = lines.next() {
        if header.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [name, rows, cols] = fields[..] else {
            return Err(err(no, "expected `<name> <rows> <cols>`".into()));
        };
        let parse_dim = |s: &str| s.parse::<usize>().map_err(|e| err(no, format!("bad dimension `{s}`: {e}")));
        let (rows, cols) = (parse_dim(rows)?, parse_dim(cols)?);
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (no, line) = lines
                .next()
                .ok_or_else(|| err(no, format!("parameter `{name}` truncated")))?;
            let before = data.len();
            for tok in line.split_whitespace() {
                data.push(tok.parse::<f64>().map_err(|e| err(no, format!("bad value `{tok}`: {e}")))?);
            }
            if data.len() - before != cols {
                return Err(err(no, format!("expected {cols} values, found {}", data.len() - before)));
            }
        }
        let value = Array2::from_shape_vec((rows, cols), data).expect("row-major data of checked length");
        params.push(Parameter::new(name, value));
    }
    Ok(params)
}

pub fn load_checkpoint(path: &Path) -> Result<Vec<Parameter>, NetsError> {
    parse_checkpoint(&fs::read_to_string(path)?)
}
