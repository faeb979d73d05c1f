//! Long-format CSV writers and the JSON run manifest.
//!
//! Floats are written in Rust's shortest round-trip form, so equal values
//! always produce equal bytes.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::circuit::GateBudget;
use crate::error::{Error, Result};
use crate::experiments::toy::{ToyPoint, ToyRow};
use crate::optim::RunRecord;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const RUN_RECORD_HEADER: [&str; 5] = ["iteration", "loss", "grad_norm", "test_error", "exact_loss"];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Data(format!("{other:?}")),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `iteration,loss,grad_norm,test_error,exact_loss`; absent values
/// are left blank.
pub fn write_run_records<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    write_rows(
        out,
        &RUN_RECORD_HEADER,
        records.iter().map(|r| {
            vec![r.iteration.to_string(), r.loss.to_string(), r.grad_norm.to_string(), opt(r.test_error), opt(r.exact_loss)]
        }),
    )
}

/// Several labelled traces in one file: the label columns come first.
pub fn write_labelled_records<W: Write>(
    label_names: &[&str],
    runs: &[(Vec<String>, &[RunRecord])],
    out: W,
) -> Result<()> {
    let header: Vec<&str> = label_names.iter().copied().chain(RUN_RECORD_HEADER).collect();
    write_rows(
        out,
        &header,
        runs.iter().flat_map(|(labels, records)| {
            records.iter().map(move |r| {
                let mut row = labels.clone();
                row.extend([
                    r.iteration.to_string(),
                    r.loss.to_string(),
                    r.grad_norm.to_string(),
                    opt(r.test_error),
                    opt(r.exact_loss),
                ]);
                row
            })
        }),
    )
}

pub fn write_toy_points<W: Write>(points: &[ToyPoint], out: W) -> Result<()> {
    write_rows(
        out,
        &["n", "ansatz", "init", "noise", "round", "f_sq", "grad_norm_sq"],
        points.iter().map(|p| {
            vec![
                p.n.to_string(),
                p.ansatz.to_string(),
                p.init.to_string(),
                opt(p.noise),
                p.round.to_string(),
                p.f_sq.to_string(),
                opt(p.grad_norm_sq),
            ]
        }),
    )
}

pub fn write_toy_rows<W: Write>(rows: &[ToyRow], out: W) -> Result<()> {
    write_rows(
        out,
        &[
            "n",
            "ansatz",
            "rounds",
            "mean_f_sq",
            "stderr_f_sq",
            "median_f_sq",
            "mean_grad_norm_sq",
            "stderr_grad_norm_sq",
            "median_grad_norm_sq",
            "bound_f_sq",
            "bound_grad_norm_sq",
        ],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.ansatz.to_string(),
                r.rounds.to_string(),
                r.mean_f_sq.to_string(),
                r.stderr_f_sq.to_string(),
                r.median_f_sq.to_string(),
                opt(r.mean_grad_norm_sq),
                opt(r.stderr_grad_norm_sq),
                opt(r.median_grad_norm_sq),
                opt(r.bound_f_sq),
                opt(r.bound_grad_norm_sq),
            ]
        }),
    )
}

pub fn write_bloch_csv<W: Write>(points: &[[f64; 3]], out: W) -> Result<()> {
    write_rows(out, &["x", "y", "z"], points.iter().map(|p| p.iter().map(f64::to_string).collect()))
}

/// Written next to every output. `config` is the fully resolved
/// subcommand configuration, enough to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    #[serde(default)]
    pub gate_budgets: BTreeMap<String, GateBudget>,
    #[serde(default)]
    pub layer_counts: BTreeMap<String, usize>,
    #[serde(default)]
    pub bounds: serde_json::Value,
    #[serde(default)]
    pub final_metrics: serde_json::Value,
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            seed,
            config,
            gate_budgets: BTreeMap::new(),
            layer_counts: BTreeMap::new(),
            bounds: serde_json::Value::Null,
            final_metrics: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_record_csv_blanks_missing_columns() {
        let recs = [
            RunRecord { iteration: 0, loss: 0.5, grad_norm: 0.25, test_error: None, exact_loss: Some(-0.125) },
            RunRecord { iteration: 1, loss: 0.1, grad_norm: 1.0, test_error: Some(0.5), exact_loss: None },
        ];
        let mut buf = Vec::new();
        write_run_records(&recs, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "iteration,loss,grad_norm,test_error,exact_loss\n0,0.5,0.25,,-0.125\n1,0.1,1,0.5,\n"
        );
    }

    #[test]
    fn manifest_round_trip() {
        let mut m = Manifest::new("toy", 7, serde_json::json!({"rounds": 2}));
        m.gate_budgets.insert("cl".into(), GateBudget { n_1q: 3, n_cz: 1, n_cnot: 0 });
        assert_eq!(Manifest::from_json(&m.to_json().unwrap()).unwrap(), m);
        assert!(Manifest::from_json(r#"{"command":"x","version":"0","seed":1,"config":{},"extra":1}"#).is_err());
    }
}
