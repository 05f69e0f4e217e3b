//! Snapshot import/export: a CSV form for inspection and plotting, and a
//! compact binary form for large runs.
//!
//! CSV layout: one column per sample; the header row carries the sample
//! times, subsequent rows are tagged `state`, `deriv` or `input`:
//!
//! ```text
//! time,0.0000000000000000e0,1.0000000000000000e-3
//! state,...,...
//! input,...,...
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};
use crate::io::format_float;
use crate::simulate::SnapshotSet;

/// Writes a snapshot set as CSV with 17-significant-digit values, so reading
/// it back is lossless.
pub fn write_csv(path: impl AsRef<Path>, snap: &SnapshotSet) -> Result<()> {
    let path = path.as_ref();
    let samples = snap.len();
    let mut out = String::new();

    let push_row = |out: &mut String, tag: &str, values: &mut dyn Iterator<Item = f64>| {
        out.push_str(tag);
        for v in values {
            out.push(',');
            out.push_str(&format_float(v));
        }
        out.push('\n');
    };

    push_row(&mut out, "time", &mut snap.times().iter().copied());
    for row in 0..snap.dim() {
        push_row(&mut out, "state", &mut (0..samples).map(|k| snap.states()[(row, k)]));
    }
    if let Some(deriv) = snap.derivatives() {
        for row in 0..snap.dim() {
            push_row(&mut out, "deriv", &mut (0..samples).map(|k| deriv[(row, k)]));
        }
    }
    for row in 0..snap.input_dim() {
        push_row(&mut out, "input", &mut (0..samples).map(|k| snap.inputs()[(row, k)]));
    }

    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a snapshot set written by [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<SnapshotSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut times: Option<Vec<f64>> = None;
    let mut state_rows: Vec<Vec<f64>> = Vec::new();
    let mut deriv_rows: Vec<Vec<f64>> = Vec::new();
    let mut input_rows: Vec<Vec<f64>> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let tag = fields.next().unwrap_or_default();
        let values: Vec<f64> = fields
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(path, line_no, format!("bad number {t:?}")))
            })
            .collect::<Result<_>>()?;
        match tag {
            "time" => times = Some(values),
            "state" => state_rows.push(values),
            "deriv" => deriv_rows.push(values),
            "input" => input_rows.push(values),
            other => {
                return Err(Error::parse(path, line_no, format!("unknown row tag {other:?}")));
            }
        }
    }

    let times = times.ok_or_else(|| Error::parse(path, 1, "missing time header row"))?;
    let samples = times.len();
    let to_matrix = |rows: &[Vec<f64>], what: &str| -> Result<Mat<f64>> {
        for r in rows {
            if r.len() != samples {
                return Err(Error::parse(
                    path,
                    0,
                    format!("{what} row has {} values, expected {samples}", r.len()),
                ));
            }
        }
        Ok(Mat::from_fn(rows.len(), samples, |i, j| rows[i][j]))
    };
    let states = to_matrix(&state_rows, "state")?;
    let derivatives = if deriv_rows.is_empty() {
        None
    } else {
        Some(to_matrix(&deriv_rows, "deriv")?)
    };
    let inputs = to_matrix(&input_rows, "input")?;
    SnapshotSet::new(times, states, derivatives, inputs)
}

const BINARY_MAGIC: &[u8; 4] = b"GRSN";

/// Compact binary snapshot form: magic, version, flags, dimensions, then
/// little-endian `f64` payloads (times, states, derivatives, inputs).
pub fn write_binary(path: impl AsRef<Path>, snap: &SnapshotSet) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&1u32.to_le_bytes());
    buf.extend_from_slice(&(snap.derivatives().is_some() as u32).to_le_bytes());
    buf.extend_from_slice(&(snap.dim() as u64).to_le_bytes());
    buf.extend_from_slice(&(snap.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(snap.input_dim() as u64).to_le_bytes());
    for &t in snap.times() {
        buf.extend_from_slice(&t.to_le_bytes());
    }
    let push_matrix = |buf: &mut Vec<u8>, m: &Mat<f64>| {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                buf.extend_from_slice(&m[(i, j)].to_le_bytes());
            }
        }
    };
    push_matrix(&mut buf, snap.states());
    if let Some(deriv) = snap.derivatives() {
        push_matrix(&mut buf, deriv);
    }
    push_matrix(&mut buf, snap.inputs());
    file.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Reads a snapshot set written by [`write_binary`].
pub fn read_binary(path: impl AsRef<Path>) -> Result<SnapshotSet> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;

    let bad = |msg: &str| Error::parse(path, 0, msg);
    if bytes.len() < 36 || &bytes[..4] != BINARY_MAGIC {
        return Err(bad("not a snapshot binary (bad magic)"));
    }
    let read_u32 = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let read_u64 = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()) as usize;
    if read_u32(4) != 1 {
        return Err(bad("unsupported snapshot binary version"));
    }
    let has_deriv = read_u32(8) != 0;
    let dim = read_u64(12);
    let samples = read_u64(20);
    let inputs_dim = read_u64(28);

    let matrices = 1 + usize::from(has_deriv);
    let expected = 36 + 8 * (samples + matrices * dim * samples + inputs_dim * samples);
    if bytes.len() != expected {
        return Err(bad("truncated snapshot binary"));
    }

    let mut off = 36;
    let mut read_f64 = || {
        let v = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        off += 8;
        v
    };
    let times: Vec<f64> = (0..samples).map(|_| read_f64()).collect();
    let mut read_matrix = |rows: usize| {
        let mut m = Mat::zeros(rows, samples);
        for j in 0..samples {
            for i in 0..rows {
                m[(i, j)] = read_f64();
            }
        }
        m
    };
    let states = read_matrix(dim);
    let derivatives = has_deriv.then(|| read_matrix(dim));
    let inputs = read_matrix(inputs_dim);
    SnapshotSet::new(times, states, derivatives, inputs)
}
