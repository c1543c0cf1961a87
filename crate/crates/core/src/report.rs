//! CSV and JSON artifacts. Floats are written in Rust's shortest
//! round-trip form, so equal inputs give byte-identical files.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flat_sets::{FlatSetDescriptor, HeightEstimate};
use crate::nearest_point::DivergenceRow;
use crate::nets::NetLevel;
use crate::retraction::ModulusTable;
use crate::whitney::PartitionEval;

fn f(v: f64) -> String {
    format!("{v}")
}

pub fn write_heights<W: Write>(out: W, set: &FlatSetDescriptor, rows: &[HeightEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "r_n", "height_lower_bound", "budget", "seed"])?;
    for h in rows {
        let r = set.profile().r_value(h.n)?;
        w.write_record([h.n.to_string(), f(r), f(h.lower_bound), h.budget.to_string(), h.seed.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_net<W: Write>(out: W, net: &NetLevel) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = net.ambient_dim();
    let mut header = vec!["level".to_string(), "eps".into(), "section_dim".into(), "point_index".into()];
    header.extend((0..dim).map(|i| format!("coord_{i}")));
    w.write_record(&header)?;
    for (j, c) in net.points().enumerate() {
        let mut rec = vec![net.level.to_string(), f(net.eps), net.section_dim.to_string(), j.to_string()];
        rec.extend(c.iter().map(|v| f(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Partition traces, one row per active cell.
pub fn write_partition_trace<W: Write>(out: W, evals: &[PartitionEval]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["query_id", "level", "cell_index", "psi", "phi", "center_dist"])?;
    for (q, e) in evals.iter().enumerate() {
        for entry in &e.entries {
            let d = crate::vector::dist2(&e.query, &entry.cell.center);
            w.write_record([
                q.to_string(),
                entry.cell.level.to_string(),
                entry.cell.index.to_string(),
                f(entry.psi),
                f(entry.phi),
                f(d),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_modulus<W: Write>(out: W, table: &ModulusTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "omega_hat", "pairs"])?;
    for r in &table.rows {
        w.write_record([f(r.t), f(r.omega_hat), r.pair_count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusSummary {
    pub alpha_profile: Option<f64>,
    pub fitted_exponent: f64,
    pub r_squared: f64,
    #[serde(rename = "C_impl")]
    pub c_impl: f64,
    pub seed: u64,
    pub pass: bool,
}

pub fn write_divergence<W: Write>(out: W, rows: &[DivergenceRow], eps: f64, delta: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "input_gap", "output_gap", "lower_bound", "upper_bound_input"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            f(r.input_gap),
            f(r.output_gap),
            f(DivergenceRow::lower_bound(eps, delta)),
            f(DivergenceRow::input_bound(eps, delta, r.n)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceVerdict {
    pub min_output_gap: f64,
    pub bound: f64,
    pub pass: bool,
}

/// One named entry of the verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub bound: f64,
    pub measured: f64,
    pub pass: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat_sets::{FlatnessProfile, Shape};
    use crate::retraction::ModulusRow;

    #[test]
    fn csv_headers_and_rows() {
        let seg = FlatSetDescriptor::new(Shape::Box, FlatnessProfile::explicit(vec![2.0, 0.0]).unwrap(), 2).unwrap();
        let net = NetLevel::build(&seg, 0).unwrap();
        let mut buf = Vec::new();
        write_net(&mut buf, &net).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "level,eps,section_dim,point_index,coord_0,coord_1\n0,1,1,0,-1,0\n0,1,1,1,0,0\n0,1,1,2,1,0\n"
        );

        let table = ModulusTable {
            rows: vec![ModulusRow { t: 0.5, omega_hat: 0.25, pair_count: 7 }],
            seed: 1,
            pair_budget: 100,
        };
        let mut buf = Vec::new();
        write_modulus(&mut buf, &table).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,omega_hat,pairs\n0.5,0.25,7\n");

        let h = seg.estimate_height(0, 50, 3).unwrap();
        let mut buf = Vec::new();
        write_heights(&mut buf, &seg, &[h]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,r_n,height_lower_bound,budget,seed\n0,2,1,50,3\n"), "{text}");
    }

    #[test]
    fn check_report_json_shape() {
        let r = CheckReport {
            check_name: "geo2".into(),
            bound: 1.0,
            measured: 0.5,
            pass: true,
            seed: 9,
            detail: None,
        };
        let v: serde_json::Value = serde_json::from_str(&to_json_pretty(&r).unwrap()).unwrap();
        for key in ["check_name", "bound", "measured", "pass", "seed"] {
            assert!(v.get(key).is_some());
        }
    }
}
