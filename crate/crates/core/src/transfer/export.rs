//! JSONL records: one Prüfer cell or one resultant instance per line.

use std::io::Write;

use serde::Serialize;

use super::pruefer::PrueferTrace;
use super::resultant::ResultantCoeffs;
use crate::error::Result;

#[derive(Debug, Serialize)]
struct CellRecord {
    which: usize,
    eigenvalue: f64,
    cell: i64,
    a: f64,
    b: f64,
    r: f64,
    theta: f64,
    t: f64,
    tan_branch: bool,
    normalization: f64,
    eps_residual: f64,
    mass_residual: f64,
}

pub fn write_pruefer_jsonl<W: Write>(trace: &PrueferTrace, mut w: W) -> Result<()> {
    for k in 0..trace.len() {
        let rec = CellRecord {
            which: trace.which,
            eigenvalue: trace.eigenvalue,
            cell: trace.cells[k],
            a: trace.coeffs[k].0,
            b: trace.coeffs[k].1,
            r: trace.radii[k],
            theta: trace.theta[k],
            t: trace.reduced_tangent[k],
            tan_branch: trace.tan_branch[k],
            normalization: trace.normalization,
            eps_residual: trace.eps_residual[k],
            mass_residual: trace.mass_residual[k],
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// One line per `(label, coefficients)`.
pub fn write_resultants_jsonl<W: Write>(items: &[(String, ResultantCoeffs)], mut w: W) -> Result<()> {
    #[derive(Serialize)]
    struct Rec<'a> {
        instance: &'a str,
        #[serde(flatten)]
        coeffs: &'a ResultantCoeffs,
    }
    for (label, coeffs) in items {
        serde_json::to_writer(&mut w, &Rec { instance: label, coeffs })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_record_per_line() {
        let trace = PrueferTrace {
            which: 3,
            eigenvalue: 0.5,
            basis_energy: 0.5,
            cells: vec![1, 2],
            coeffs: vec![(0.1, 0.2), (0.3, -0.4)],
            radii: vec![0.2, 0.5],
            theta: vec![0.4, 2.5],
            reduced_tangent: vec![0.5, -0.75],
            tan_branch: vec![true, true],
            normalization: 1.0,
            eps_residual: vec![0.0, 1e-12],
            mass_residual: vec![1e-9, 0.0],
        };
        let mut buf = Vec::new();
        write_pruefer_jsonl(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(v["cell"], 2);
        assert_eq!(v["b"], -0.4);

        let r = ResultantCoeffs { c: [1.0; 9], mirrored: false, degenerate: false, vanishing: false, scale: 1.0 };
        let mut buf = Vec::new();
        write_resultants_jsonl(&[("x".into(), r)], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["instance"], "x");
        assert_eq!(v["c"].as_array().unwrap().len(), 9);
    }
}
