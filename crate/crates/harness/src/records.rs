//! Trial records and their on-disk schemas.
//!
//! Every experiment writes the columns
//! `experiment,kind,N,trial,seed,statistic,value` followed by a fixed,
//! experiment-specific list of auxiliary columns. Floats carry 17
//! significant digits so a file parses back to the exact same values.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Experiment, OutputFormat};
use crate::error::{HarnessError, Result};

pub const BASE_COLUMNS: [&str; 7] = ["experiment", "kind", "N", "trial", "seed", "statistic", "value"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: Experiment,
    pub kind: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
    pub aux: BTreeMap<String, f64>,
}

impl TrialRecord {
    pub fn aux(&self, key: &str) -> Option<f64> {
        self.aux.get(key).copied()
    }
}

/// Auxiliary columns, in order, for each experiment.
pub fn aux_columns(experiment: Experiment) -> &'static [&'static str] {
    match experiment {
        Experiment::LowerBound => &["theta_star"],
        Experiment::UpperBound | Experiment::VarianceMax => {
            &["theta_star", "points_evaluated", "epsilon"]
        }
        Experiment::Clt => &["theta"],
        Experiment::GaussMax => &["threshold", "epsilon", "delta"],
        Experiment::Verify => &[],
    }
}

pub fn header(experiment: Experiment) -> Vec<&'static str> {
    BASE_COLUMNS
        .iter()
        .chain(aux_columns(experiment))
        .copied()
        .collect()
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Orders records by `(N, trial)`, keeping insertion order among equals.
pub fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by_key(|r| (r.n, r.trial));
}

pub fn write_csv<W: Write>(w: W, experiment: Experiment, records: &[TrialRecord]) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(header(experiment))?;
    let aux = aux_columns(experiment);
    for r in records {
        let mut row = vec![
            r.experiment.as_str().to_string(),
            r.kind.clone(),
            r.n.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.statistic.clone(),
            format_float(r.value),
        ];
        for key in aux {
            row.push(r.aux(key).map(format_float).unwrap_or_default());
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<(Experiment, Vec<TrialRecord>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let head: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut records = Vec::new();
    let mut experiment = None;
    for row in rdr.records() {
        let row = row?;
        let exp: Experiment = row[0].parse()?;
        if experiment.is_none() {
            let expected = header(exp);
            if head != expected {
                return Err(HarnessError::Config(format!(
                    "header {head:?} does not match the {exp} schema {expected:?}"
                )));
            }
            experiment = Some(exp);
        }
        let num = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad number {:?}", &row[i])))
        };
        let int = |i: usize| -> Result<u64> {
            row[i]
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad integer {:?}", &row[i])))
        };
        let mut aux = BTreeMap::new();
        for (k, name) in head.iter().enumerate().skip(BASE_COLUMNS.len()) {
            if !row[k].is_empty() {
                aux.insert(name.clone(), num(k)?);
            }
        }
        records.push(TrialRecord {
            experiment: exp,
            kind: row[1].to_string(),
            n: int(2)? as usize,
            trial: int(3)? as usize,
            seed: int(4)?,
            statistic: row[5].to_string(),
            value: num(6)?,
            aux,
        });
    }
    let experiment = match experiment {
        Some(e) => e,
        None => {
            return Err(HarnessError::Config("no records".into()));
        }
    };
    Ok((experiment, records))
}

pub fn write_records(
    path: &Path,
    format: OutputFormat,
    experiment: Experiment,
    records: &[TrialRecord],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(&mut w, experiment, records)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, records)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
