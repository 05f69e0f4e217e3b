//! Reduction-basis serialization, so a stored model can be re-simulated from
//! new initial conditions (projecting them needs `Φ_r`).

use std::fs;
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};
use crate::io::format_float;
use crate::pod::PodBasis;

pub fn write_basis(path: impl AsRef<Path>, basis: &PodBasis) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!("d = {}\n", basis.dim()));
    out.push_str(&format!("r = {}\n", basis.r()));
    out.push_str(&format!("tol = {}\n", format_float(basis.tolerance())));
    let sigma: Vec<String> = basis.singular_values().iter().map(|&s| format_float(s)).collect();
    out.push_str(&format!("sigma = {}\n", sigma.join(" ")));
    out.push_str("basis = dense\n");
    for i in 0..basis.dim() {
        let row: Vec<String> = (0..basis.r())
            .map(|j| format_float(basis.basis()[(i, j)]))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str("end\n");
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_basis(path: impl AsRef<Path>) -> Result<PodBasis> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut d: Option<usize> = None;
    let mut r: Option<usize> = None;
    let mut tol: Option<f64> = None;
    let mut sigma: Option<Vec<f64>> = None;
    let mut matrix: Option<Mat<f64>> = None;

    while let Some((line_no, line)) = lines.next() {
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(path, line_no, format!("expected `key = value`, got {line:?}")));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "d" | "r" => {
                let v = value.parse::<usize>().map_err(|_| {
                    Error::parse(path, line_no, format!("field {key}: bad integer {value:?}"))
                })?;
                if key == "d" {
                    d = Some(v)
                } else {
                    r = Some(v)
                }
            }
            "tol" => {
                tol = Some(value.parse::<f64>().map_err(|_| {
                    Error::parse(path, line_no, format!("field tol: bad number {value:?}"))
                })?)
            }
            "sigma" => {
                sigma = Some(
                    value
                        .split_whitespace()
                        .map(|t| {
                            t.parse::<f64>().map_err(|_| {
                                Error::parse(path, line_no, format!("field sigma: bad number {t:?}"))
                            })
                        })
                        .collect::<Result<_>>()?,
                )
            }
            "basis" => {
                let (d, r) = (
                    d.ok_or_else(|| Error::parse(path, line_no, "d must precede the basis block"))?,
                    r.ok_or_else(|| Error::parse(path, line_no, "r must precede the basis block"))?,
                );
                let mut m = Mat::zeros(d, r);
                for i in 0..d {
                    let (row_no, row) = lines.next().ok_or_else(|| {
                        Error::parse(path, line_no, format!("missing basis row {i}"))
                    })?;
                    let tokens: Vec<&str> = row.split_whitespace().collect();
                    if tokens.len() != r {
                        return Err(Error::parse(
                            path,
                            row_no,
                            format!("basis row {i}: expected {r} values, got {}", tokens.len()),
                        ));
                    }
                    for (j, t) in tokens.iter().enumerate() {
                        m[(i, j)] = t.parse::<f64>().map_err(|_| {
                            Error::parse(path, row_no, format!("basis row {i}: bad number {t:?}"))
                        })?;
                    }
                }
                match lines.next() {
                    Some((_, "end")) => {}
                    other => {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!("basis block: expected `end`, got {other:?}"),
                        ))
                    }
                }
                matrix = Some(m);
            }
            other => return Err(Error::parse(path, line_no, format!("unknown field {other:?}"))),
        }
    }

    let missing = |field: &str| Error::parse(path, 0, format!("missing field {field}"));
    PodBasis::from_parts(
        matrix.ok_or_else(|| missing("basis"))?,
        sigma.ok_or_else(|| missing("sigma"))?,
        tol.ok_or_else(|| missing("tol"))?,
    )
}
