//! Network parameter files.
//!
//! A declarative key–value format with one field per line:
//!
//! ```text
//! # synthetic ring, see networks/README
//! n = 4
//! omega_r = 3.7699111843077515e2
//! inertia = 18.85 18.85 18.85 18.85
//! damping = 20.7 20.7 20.7 20.7
//! power = 0.0 0.06 0.0 -0.06
//! coupling = sparse
//! 0 1 8.5e-1
//! 1 0 8.5e-1
//! end
//! phase_shift = zero
//! output_weights = mean
//! ```
//!
//! Matrices are written as `dense` (n rows of n values, then `end`),
//! `sparse` (`row col value` triplets, then `end`) or `zero`.
//! `output_weights` additionally accepts `mean` for the arithmetic-mean row.
//! `n` must be declared before any array field. Parse errors carry the file
//! path, line number and offending field.

use std::fs;
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};
use crate::io::format_float;
use crate::swing::SwingNetwork;

struct Cursor<'a> {
    path: &'a Path,
    lines: Vec<(usize, String)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, text: &str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim().to_string()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Self { path, lines, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, String)> {
        let item = self.lines.get(self.pos)?;
        self.pos += 1;
        Some((item.0, item.1.clone()))
    }

    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::parse(self.path, line, message)
    }
}

fn parse_f64(cursor: &Cursor, line: usize, field: &str, token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| cursor.error(line, format!("field {field}: expected a number, got {token:?}")))
}

fn parse_vector(cursor: &Cursor, line: usize, field: &str, value: &str, n: usize) -> Result<Vec<f64>> {
    let values: Vec<&str> = value.split_whitespace().collect();
    if values.len() != n {
        return Err(cursor.error(
            line,
            format!("field {field}: expected {n} values, got {}", values.len()),
        ));
    }
    values
        .iter()
        .map(|t| parse_f64(cursor, line, field, t))
        .collect()
}

fn parse_matrix(
    cursor: &mut Cursor,
    line: usize,
    field: &str,
    layout: &str,
    rows: usize,
    cols: usize,
) -> Result<Mat<f64>> {
    match layout {
        "zero" => Ok(Mat::zeros(rows, cols)),
        "dense" => {
            let mut m = Mat::zeros(rows, cols);
            for i in 0..rows {
                let Some((row_line, row)) = cursor.next() else {
                    return Err(cursor.error(line, format!("field {field}: missing dense row {i}")));
                };
                let values = parse_vector(cursor, row_line, field, &row, cols)?;
                for (j, v) in values.into_iter().enumerate() {
                    m[(i, j)] = v;
                }
            }
            expect_end(cursor, field)?;
            Ok(m)
        }
        "sparse" => {
            let mut m = Mat::zeros(rows, cols);
            loop {
                let Some((entry_line, entry)) = cursor.next() else {
                    return Err(cursor.error(line, format!("field {field}: missing end marker")));
                };
                if entry == "end" {
                    break;
                }
                let tokens: Vec<&str> = entry.split_whitespace().collect();
                if tokens.len() != 3 {
                    return Err(cursor.error(
                        entry_line,
                        format!("field {field}: expected `row col value`, got {entry:?}"),
                    ));
                }
                let parse_idx = |t: &str, bound: usize| -> Result<usize> {
                    let idx = t.parse::<usize>().map_err(|_| {
                        cursor.error(entry_line, format!("field {field}: bad index {t:?}"))
                    })?;
                    if idx >= bound {
                        return Err(cursor.error(
                            entry_line,
                            format!("field {field}: index {idx} out of range (max {})", bound - 1),
                        ));
                    }
                    Ok(idx)
                };
                let i = parse_idx(tokens[0], rows)?;
                let j = parse_idx(tokens[1], cols)?;
                m[(i, j)] = parse_f64(cursor, entry_line, field, tokens[2])?;
            }
            Ok(m)
        }
        other => Err(cursor.error(
            line,
            format!("field {field}: unknown layout {other:?} (use dense, sparse or zero)"),
        )),
    }
}

fn expect_end(cursor: &mut Cursor, field: &str) -> Result<()> {
    match cursor.next() {
        Some((_, ref l)) if l == "end" => Ok(()),
        Some((line, other)) => {
            let msg = format!("field {field}: expected `end`, got {other:?}");
            Err(cursor.error(line, msg))
        }
        None => Err(cursor.error(0, format!("field {field}: missing end marker"))),
    }
}

/// Reads a [`SwingNetwork`] from a parameter file.
pub fn read_network(path: impl AsRef<Path>) -> Result<SwingNetwork> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cursor = Cursor::new(path, &text);

    let mut n: Option<usize> = None;
    let mut omega_r: Option<f64> = None;
    let mut inertia: Option<Vec<f64>> = None;
    let mut damping: Option<Vec<f64>> = None;
    let mut power: Option<Vec<f64>> = None;
    let mut coupling: Option<Mat<f64>> = None;
    let mut phase_shift: Option<Mat<f64>> = None;
    let mut output_weights: Option<Mat<f64>> = None;

    while let Some((line, raw)) = cursor.next() {
        let Some((key, value)) = raw.split_once('=') else {
            return Err(cursor.error(line, format!("expected `key = value`, got {raw:?}")));
        };
        let key = key.trim();
        let value = value.trim().to_owned();
        let need_n = |cursor: &Cursor| -> Result<usize> {
            n.ok_or_else(|| cursor.error(line, format!("field {key}: n must be declared first")))
        };
        match key {
            "n" => {
                let parsed = value.parse::<usize>().map_err(|_| {
                    cursor.error(line, format!("field n: expected a positive integer, got {value:?}"))
                })?;
                if parsed == 0 {
                    return Err(cursor.error(line, "field n: must be at least 1"));
                }
                n = Some(parsed);
            }
            "omega_r" => omega_r = Some(parse_f64(&cursor, line, "omega_r", &value)?),
            "inertia" => {
                let n = need_n(&cursor)?;
                inertia = Some(parse_vector(&cursor, line, "inertia", &value, n)?);
            }
            "damping" => {
                let n = need_n(&cursor)?;
                damping = Some(parse_vector(&cursor, line, "damping", &value, n)?);
            }
            "power" => {
                let n = need_n(&cursor)?;
                power = Some(parse_vector(&cursor, line, "power", &value, n)?);
            }
            "coupling" => {
                let n = need_n(&cursor)?;
                coupling = Some(parse_matrix(&mut cursor, line, "coupling", &value, n, n)?);
            }
            "phase_shift" => {
                let n = need_n(&cursor)?;
                phase_shift = Some(parse_matrix(&mut cursor, line, "phase_shift", &value, n, n)?);
            }
            "output_weights" => {
                let n = need_n(&cursor)?;
                if value == "mean" {
                    output_weights = Some(SwingNetwork::mean_output_row(n));
                } else {
                    let tokens: Vec<&str> = value.split_whitespace().collect();
                    let (layout, p) = match tokens.as_slice() {
                        [layout] => (*layout, 1),
                        [layout, rows] => {
                            let p = rows.parse::<usize>().map_err(|_| {
                                cursor.error(
                                    line,
                                    format!("field output_weights: bad row count {rows:?}"),
                                )
                            })?;
                            (*layout, p)
                        }
                        _ => {
                            return Err(cursor.error(
                                line,
                                "field output_weights: expected `mean`, `dense [p]`, `sparse [p]` or `zero [p]`",
                            ))
                        }
                    };
                    output_weights =
                        Some(parse_matrix(&mut cursor, line, "output_weights", layout, p, n)?);
                }
            }
            other => {
                return Err(cursor.error(line, format!("unknown field {other:?}")));
            }
        }
    }

    let line = 0;
    let missing = |field: &str| Error::parse(path, line, format!("missing field {field}"));
    let n = n.ok_or_else(|| missing("n"))?;
    SwingNetwork::new(
        omega_r.ok_or_else(|| missing("omega_r"))?,
        inertia.ok_or_else(|| missing("inertia"))?,
        damping.ok_or_else(|| missing("damping"))?,
        coupling.ok_or_else(|| missing("coupling"))?,
        phase_shift.unwrap_or_else(|| Mat::zeros(n, n)),
        power.ok_or_else(|| missing("power"))?,
        output_weights.unwrap_or_else(|| SwingNetwork::mean_output_row(n)),
    )
}

fn write_matrix(out: &mut String, field: &str, m: &Mat<f64>) {
    let nnz = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .filter(|&(i, j)| m[(i, j)] != 0.0)
        .count();
    if nnz == 0 {
        out.push_str(&format!("{field} = zero\n"));
    } else if 4 * nnz <= m.nrows() * m.ncols() {
        out.push_str(&format!("{field} = sparse\n"));
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    out.push_str(&format!("{i} {j} {}\n", format_float(m[(i, j)])));
                }
            }
        }
        out.push_str("end\n");
    } else {
        out.push_str(&format!("{field} = dense\n"));
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format_float(m[(i, j)])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
    }
}

/// Writes a network parameter file that [`read_network`] parses back to an
/// identical network.
pub fn write_network(path: impl AsRef<Path>, net: &SwingNetwork, comment: &str) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for line in comment.lines() {
        out.push_str(&format!("# {line}\n"));
    }
    out.push_str(&format!("n = {}\n", net.n()));
    out.push_str(&format!("omega_r = {}\n", format_float(net.omega_r())));
    for (field, values) in [
        ("inertia", net.inertia()),
        ("damping", net.damping()),
        ("power", net.power()),
    ] {
        let row: Vec<String> = values.iter().map(|&v| format_float(v)).collect();
        out.push_str(&format!("{field} = {}\n", row.join(" ")));
    }
    write_matrix(&mut out, "coupling", net.coupling());
    write_matrix(&mut out, "phase_shift", net.phase_shift());

    let mean = SwingNetwork::mean_output_row(net.n());
    let is_mean = net.p() == 1
        && (0..net.n()).all(|j| net.output_weights()[(0, j)] == mean[(0, j)]);
    if is_mean {
        out.push_str("output_weights = mean\n");
    } else {
        out.push_str(&format!("output_weights = dense {}\n", net.p()));
        for i in 0..net.p() {
            let row: Vec<String> = (0..net.n())
                .map(|j| format_float(net.output_weights()[(i, j)]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
    }

    fs::write(path, out).map_err(|e| Error::io(path, e))
}
