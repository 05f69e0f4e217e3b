//! Plot-ready and inspection exports: singular-value spectra, error-report
//! series, and the sparse lifted operators.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::format_float;
use crate::lift::LiftedOperators;
use crate::pod::PodBasis;
use crate::rom::ErrorReport;

/// Writes the singular-value spectrum as `index,sigma,sigma_normalized`,
/// both raw and relative to `σ₁`.
pub fn write_spectrum(path: impl AsRef<Path>, basis: &PodBasis) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("index,sigma,sigma_normalized\n");
    let normalized = basis.normalized_singular_values();
    for (i, (s, sn)) in basis.singular_values().iter().zip(&normalized).enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, format_float(*s), format_float(*sn)));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes the output comparison and relative-error series as
/// `t,y,y_r,e` rows.
pub fn write_error_report(
    path: impl AsRef<Path>,
    times: &[f64],
    y_full: &[f64],
    y_rom: &[f64],
    report: &ErrorReport,
) -> Result<()> {
    let path = path.as_ref();
    if times.len() != report.rel_error_series.len() {
        return Err(Error::DimensionMismatch {
            context: "write_error_report series length",
            expected: times.len(),
            got: report.rel_error_series.len(),
        });
    }
    let mut out = String::from("t,y,y_r,e\n");
    for k in 0..times.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_float(times[k]),
            format_float(y_full[k]),
            format_float(y_rom[k]),
            format_float(report.rel_error_series[k]),
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Exports the lifted operators for external inspection: `A`, `B` and `C`
/// as sparse `index value` lists and `H` as `row left right value` terms.
pub fn write_lifted_operators(path: impl AsRef<Path>, ops: &LiftedOperators) -> Result<()> {
    let path = path.as_ref();
    let d = ops.dim();
    let mut out = String::new();
    out.push_str(&format!("dim = {d}\n"));
    out.push_str(&format!("outputs = {}\n", ops.c().nrows()));

    out.push_str("a = sparse\n");
    for i in 0..d {
        for j in 0..d {
            if ops.a()[(i, j)] != 0.0 {
                out.push_str(&format!("{i} {j} {}\n", format_float(ops.a()[(i, j)])));
            }
        }
    }
    out.push_str("end\n");

    out.push_str("h = sparse\n");
    for t in ops.h().terms() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            t.row,
            t.left,
            t.right,
            format_float(t.coeff)
        ));
    }
    out.push_str("end\n");

    out.push_str("b = sparse\n");
    for (i, &v) in ops.b().iter().enumerate() {
        if v != 0.0 {
            out.push_str(&format!("{i} {}\n", format_float(v)));
        }
    }
    out.push_str("end\n");

    out.push_str("c = sparse\n");
    for row in 0..ops.c().nrows() {
        for j in 0..d {
            if ops.c()[(row, j)] != 0.0 {
                out.push_str(&format!("{row} {j} {}\n", format_float(ops.c()[(row, j)])));
            }
        }
    }
    out.push_str("end\n");

    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::assemble_lifted_operators;
    use crate::pod::compute_pod;
    use crate::rom::evaluate;
    use crate::synthetic;
    use faer::Mat;

    #[test]
    fn spectrum_lists_every_singular_value() {
        let x = Mat::from_fn(4, 9, |i, j| ((i * 7 + j) as f64 * 0.37).sin());
        let pod = compute_pod(&x, 1e-10, None).unwrap();
        let dir = std::env::temp_dir().join(format!("gridrom-spec-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("spectrum.csv");
        write_spectrum(&path, &pod).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + pod.singular_values().len());
        assert!(text.starts_with("index,sigma,sigma_normalized"));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn error_report_rows_parse_back() {
        let times = [0.0, 0.1, 0.2];
        let y = [1.0, 2.0, -1.0];
        let y_rom = [1.0, 1.9, -1.05];
        let report = evaluate(&y, &y_rom, &times).unwrap();
        let dir = std::env::temp_dir().join(format!("gridrom-err-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("error.csv");
        write_error_report(&path, &times, &y, &y_rom, &report).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let last = text.lines().last().unwrap();
        let fields: Vec<f64> = last.split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(fields[0], 0.2);
        assert!((fields[3] - 0.05 / 2.0).abs() < 1e-15);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn lifted_export_counts_match_the_operators() {
        let net = synthetic::ring_network(3).unwrap();
        let ops = assemble_lifted_operators(&net);
        let dir = std::env::temp_dir().join(format!("gridrom-lift-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("lifted.txt");
        write_lifted_operators(&path, &ops).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let h_lines = text
            .lines()
            .skip_while(|l| *l != "h = sparse")
            .skip(1)
            .take_while(|l| *l != "end")
            .count();
        assert_eq!(h_lines, ops.h().terms().len());
        std::fs::remove_file(&path).unwrap();
    }
}
