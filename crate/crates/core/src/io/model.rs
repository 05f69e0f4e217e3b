//! Reduced-model serialization: a text format carrying the dimensions, the
//! regularization that produced the model, the basis identifier and the
//! dense operator blocks, so a learned or intrusively projected model can be
//! simulated later without re-running the pipeline.

use std::fs;
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};
use crate::io::format_float;
use crate::opinf::{compact_len, ModelSource, ReducedQuadraticModel};

/// Writes a reduced model. `mu` records the regularization used during
/// learning (zero for intrusive models).
pub fn write_model(path: impl AsRef<Path>, model: &ReducedQuadraticModel, mu: f64) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!("kind = {}\n", model.source().as_str()));
    out.push_str(&format!("r = {}\n", model.r()));
    out.push_str(&format!("q = {}\n", model.q()));
    out.push_str(&format!("p = {}\n", model.p()));
    out.push_str(&format!("mu = {}\n", format_float(mu)));
    out.push_str(&format!("basis = {}\n", model.basis_ref()));
    for (name, m) in [
        ("a", model.a()),
        ("h_compact", model.h_compact()),
        ("b", model.b()),
        ("c", model.c()),
    ] {
        out.push_str(&format!("{name} = dense\n"));
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format_float(m[(i, j)])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// A deserialized model plus the regularization recorded alongside it.
#[derive(Debug, Clone)]
pub struct StoredModel {
    pub model: ReducedQuadraticModel,
    pub mu: f64,
}

/// Reads a model written by [`write_model`].
pub fn read_model(path: impl AsRef<Path>) -> Result<StoredModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut kind: Option<ModelSource> = None;
    let mut r: Option<usize> = None;
    let mut q: Option<usize> = None;
    let mut p: Option<usize> = None;
    let mut mu: Option<f64> = None;
    let mut basis: Option<String> = None;
    let mut blocks: Vec<(String, Mat<f64>)> = Vec::new();

    while let Some((line_no, line)) = lines.next() {
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(path, line_no, format!("expected `key = value`, got {line:?}")));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "kind" => kind = Some(value.parse()?),
            "r" | "q" | "p" => {
                let v = value.parse::<usize>().map_err(|_| {
                    Error::parse(path, line_no, format!("field {key}: bad integer {value:?}"))
                })?;
                match key {
                    "r" => r = Some(v),
                    "q" => q = Some(v),
                    _ => p = Some(v),
                }
            }
            "mu" => {
                mu = Some(value.parse::<f64>().map_err(|_| {
                    Error::parse(path, line_no, format!("field mu: bad number {value:?}"))
                })?)
            }
            "basis" => basis = Some(value.to_string()),
            "a" | "h_compact" | "b" | "c" => {
                if value != "dense" {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("field {key}: only dense blocks are supported"),
                    ));
                }
                let (r, q, p) = (
                    r.ok_or_else(|| Error::parse(path, line_no, "r must precede operator blocks"))?,
                    q.unwrap_or(1),
                    p.unwrap_or(1),
                );
                let (rows, cols) = match key {
                    "a" => (r, r),
                    "h_compact" => (r, compact_len(r)),
                    "b" => (r, q),
                    _ => (p, r),
                };
                let mut m = Mat::zeros(rows, cols);
                for i in 0..rows {
                    let (row_no, row) = lines.next().ok_or_else(|| {
                        Error::parse(path, line_no, format!("field {key}: missing row {i}"))
                    })?;
                    let tokens: Vec<&str> = row.split_whitespace().collect();
                    if tokens.len() != cols {
                        return Err(Error::parse(
                            path,
                            row_no,
                            format!("field {key}: expected {cols} values, got {}", tokens.len()),
                        ));
                    }
                    for (j, t) in tokens.iter().enumerate() {
                        m[(i, j)] = t.parse::<f64>().map_err(|_| {
                            Error::parse(path, row_no, format!("field {key}: bad number {t:?}"))
                        })?;
                    }
                }
                match lines.next() {
                    Some((_, "end")) => {}
                    other => {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!("field {key}: expected `end`, got {other:?}"),
                        ))
                    }
                }
                blocks.push((key.to_string(), m));
            }
            other => return Err(Error::parse(path, line_no, format!("unknown field {other:?}"))),
        }
    }

    let missing = |field: &str| Error::parse(path, 0, format!("missing field {field}"));
    let take = |name: &str| -> Result<Mat<f64>> {
        blocks
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, m)| m.clone())
            .ok_or_else(|| missing(name))
    };
    let model = ReducedQuadraticModel::new(
        take("a")?,
        take("h_compact")?,
        take("b")?,
        take("c")?,
        basis.ok_or_else(|| missing("basis"))?,
        kind.ok_or_else(|| missing("kind"))?,
    )?;
    Ok(StoredModel {
        model,
        mu: mu.ok_or_else(|| missing("mu"))?,
    })
}
