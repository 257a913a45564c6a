//! CSV and JSON output. Numbers are written with 12 significant digits so
//! that identical runs give byte-identical files.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::iterate::{BoundaryCondition, SolveResult};
use crate::model::{Table1Comparison, TrialFunction};
use crate::oracle::{BoundReport, PrototypeResult};

pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("output error: {e}"))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

#[derive(Debug, Serialize)]
pub struct Record<'a, T: Serialize> {
    pub schema_version: u32,
    pub kind: &'a str,
    pub data: &'a T,
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, kind: &str, data: &T) -> Result<()> {
    let rec = Record {
        schema_version: SCHEMA_VERSION,
        kind,
        data,
    };
    serde_json::to_writer_pretty(&mut w, &rec).map_err(io)?;
    w.write_all(b"\n").map_err(io)
}

/// One row per iteration m.
pub fn write_iterations_csv<W: Write>(w: W, res: &SolveResult, oracle: Option<f64>) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec![
        "m",
        "energy",
        "shift",
        "f_boundary",
        "charge_residue",
        "head_tail_residue",
        "contraction_ratio",
    ];
    if oracle.is_some() {
        header.push("oracle_energy");
    }
    out.write_record(&header).map_err(io)?;
    for (i, e) in res.energies.iter().enumerate() {
        // a breakdown leaves the last iteration without boundary data
        let opt = |v: &[f64], j: Option<usize>| j.and_then(|j| v.get(j)).map_or_else(String::new, |x| fmt_num(*x));
        let mut row = vec![
            (i + 1).to_string(),
            fmt_num(*e),
            opt(&res.shifts, Some(i)),
            opt(&res.f_boundary, Some(i)),
            opt(&res.charge_residues, Some(i)),
            opt(&res.head_tail_residues, Some(i)),
            opt(&res.contraction_ratios, i.checked_sub(2)),
        ];
        if let Some(o) = oracle {
            row.push(fmt_num(o));
        }
        out.write_record(&row).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Samples of f, phi, psi = phi f and R = r^{-K} psi on the solver grid.
///
/// f is rescaled so that its far value equals `f_inf`.
pub fn write_profile_csv<W: Write>(w: W, res: &SolveResult, f_inf: f64, emit_r: bool) -> Result<()> {
    let trial = TrialFunction::new(res.constants);
    let scale = match res.final_f.last() {
        Some(&far) if far != 0.0 => f_inf / far,
        _ => return Err(Error::NonFinite { context: "far value of f" }),
    };
    let big_k = res.constants.big_k;
    let l = res.params.l;
    let mut out = writer(w);
    let mut header = vec!["r", "f", "phi", "psi"];
    if emit_r {
        header.push("R");
    }
    out.write_record(&header).map_err(io)?;
    let f_origin = match res.bc {
        BoundaryCondition::A => res.f_boundary.last().copied().unwrap_or(f64::NAN),
        BoundaryCondition::B => 1.0,
    };
    let samples = std::iter::once((0.0, f_origin)).chain(res.nodes.iter().copied().zip(res.final_f.iter().copied()));
    for (r, f) in samples {
        let f = f * scale;
        let phi = trial.eval_phi(r)?;
        let phi_v = phi.sign * phi.log_magnitude.exp();
        let mut row = vec![fmt_num(r), fmt_num(f), fmt_num(phi_v), fmt_num(phi_v * f)];
        if emit_r {
            let big_r = if r == 0.0 {
                if l == 0 {
                    trial.log_origin_amplitude().exp() * f
                } else {
                    0.0
                }
            } else {
                phi.sign * (phi.log_magnitude - big_k * r.ln()).exp() * f
            };
            row.push(fmt_num(big_r));
        }
        out.write_record(&row).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_table1_csv<W: Write>(w: W, rows: &[Table1Comparison]) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "k", "a", "a_max", "a_min", "g2_max", "g2_min", "ref_a_max", "ref_a_min", "ref_g2_max", "ref_g2_min",
        "max_abs_dev", "pass",
    ])
    .map_err(io)?;
    for c in rows {
        let (x, y) = (&c.computed, &c.golden);
        out.write_record([
            fmt_num(x.k),
            fmt_num(x.a),
            fmt_num(x.a_max),
            fmt_num(x.a_min),
            fmt_num(x.g2_max),
            fmt_num(x.g2_min),
            fmt_num(y.a_max),
            fmt_num(y.a_min),
            fmt_num(y.g2_max),
            fmt_num(y.g2_min),
            fmt_num(c.max_abs_dev),
            c.pass.to_string(),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_prototype_csv<W: Write>(w: W, res: &PrototypeResult, bounds: &BoundReport) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["n", "shift", "gap", "bound", "margin", "g0", "g0_bound", "charge_residue"])
        .map_err(io)?;
    for (row, charge) in bounds.rows.iter().zip(&res.charge_residues) {
        out.write_record([
            row.n.to_string(),
            fmt_num(row.shift),
            fmt_num(row.gap),
            fmt_num(row.bound),
            fmt_num(row.margin),
            fmt_num(row.g0),
            fmt_num(row.g0_bound),
            fmt_num(*charge),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::regenerate_table1;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-0.000123456789012345), "-1.23456789012e-4");
    }

    #[test]
    fn table_csv_is_lf_only() {
        let mut buf = Vec::new();
        write_table1_csv(&mut buf, &regenerate_table1().unwrap()).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(!s.contains('\r'));
        assert_eq!(s.lines().count(), 9);
    }

    #[test]
    fn json_has_schema_version() {
        let mut buf = Vec::new();
        write_json(&mut buf, "table1", &regenerate_table1().unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["data"].as_array().unwrap().len(), 8);
    }
}
