//! Summary CSV files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{BanditError, Result};

use super::aggregate::{AlgorithmSummary, SummaryRow};

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "algorithm",
    "replications",
    "checkpoint_t",
    "seed",
    "pseudo_regret_mean",
    "pseudo_regret_std",
    "expected_regret_mean",
    "expected_regret_std",
    "norm_variance_mean",
    "norm_variance_std",
    "subopt_pulls_mean",
    "theorem2_bound",
    "theorem3_bound",
    "eq5_satisfied",
];

pub const ARM_COLUMNS: [&str; 5] = ["algorithm", "checkpoint_t", "arm", "norm_variance_mean", "policy_mean"];

/// One line of the summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub algorithm: String,
    pub replications: u64,
    pub seed: u64,
    pub row: SummaryRow,
}

/// Flattens summaries in the given algorithm order.
pub fn records(summaries: &[AlgorithmSummary]) -> Vec<SummaryRecord> {
    summaries
        .iter()
        .flat_map(|s| {
            s.rows.iter().map(move |row| SummaryRecord {
                algorithm: s.algorithm.clone(),
                replications: s.replications,
                seed: s.seed,
                row: *row,
            })
        })
        .collect()
}

// 17 significant digits: parses back to the same bits.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path, e: csv::Error) -> BanditError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => BanditError::io(path, io),
        other => BanditError::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_summary_csv<W: Write>(out: W, records: &[SummaryRecord]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in records {
        let x = &r.row;
        w.write_record([
            r.algorithm.clone(),
            r.replications.to_string(),
            x.checkpoint_t.to_string(),
            r.seed.to_string(),
            float(x.pseudo_regret_mean),
            float(x.pseudo_regret_std),
            float(x.expected_regret_mean),
            float(x.expected_regret_std),
            float(x.norm_variance_mean),
            float(x.norm_variance_std),
            float(x.subopt_pulls_mean),
            float(x.theorem2_bound),
            float(x.theorem3_bound),
            x.eq5_satisfied.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(summaries: &[AlgorithmSummary], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| BanditError::io(path, e))?;
    write_summary_csv(BufWriter::new(file), &records(summaries)).map_err(|e| csv_err(path, e))
}

/// Per-arm diagnostics: normalized variance and mean policy per checkpoint.
pub fn emit_arm_csv(summaries: &[AlgorithmSummary], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| BanditError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let run = |w: &mut csv::Writer<_>| -> std::result::Result<(), csv::Error> {
        w.write_record(ARM_COLUMNS)?;
        for s in summaries {
            for (i, row) in s.rows.iter().enumerate() {
                let (var, pol) = (s.arm_norm_variance_at(i), s.arm_policy_at(i));
                for a in 0..s.num_arms {
                    w.write_record([
                        s.algorithm.clone(),
                        row.checkpoint_t.to_string(),
                        a.to_string(),
                        float(var[a]),
                        float(pol[a]),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    };
    run(&mut w).map_err(|e| csv_err(path, e))
}

pub fn read_summary_csv<R: std::io::Read>(input: R) -> std::result::Result<Vec<SummaryRecord>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    if !header.iter().eq(SUMMARY_COLUMNS.iter().copied()) {
        return Err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i + 2;
        let f = |j: usize| -> std::result::Result<f64, String> {
            rec[j]
                .parse()
                .map_err(|e| format!("line {line}, column {}: {e}", SUMMARY_COLUMNS[j]))
        };
        let u = |j: usize| -> std::result::Result<u64, String> {
            rec[j]
                .parse()
                .map_err(|e| format!("line {line}, column {}: {e}", SUMMARY_COLUMNS[j]))
        };
        out.push(SummaryRecord {
            algorithm: rec[0].to_string(),
            replications: u(1)?,
            seed: u(3)?,
            row: SummaryRow {
                checkpoint_t: u(2)?,
                pseudo_regret_mean: f(4)?,
                pseudo_regret_std: f(5)?,
                expected_regret_mean: f(6)?,
                expected_regret_std: f(7)?,
                norm_variance_mean: f(8)?,
                norm_variance_std: f(9)?,
                subopt_pulls_mean: f(10)?,
                theorem2_bound: f(11)?,
                theorem3_bound: f(12)?,
                eq5_satisfied: rec[13]
                    .parse()
                    .map_err(|e| format!("line {line}, column eq5_satisfied: {e}"))?,
            },
        });
    }
    Ok(out)
}

pub fn load_csv(path: &Path) -> Result<Vec<SummaryRecord>> {
    let file = File::open(path).map_err(|e| BanditError::io(path, e))?;
    read_summary_csv(std::io::BufReader::new(file)).map_err(|message| BanditError::Format {
        path: path.to_path_buf(),
        message,
    })
}

/// Groups records by algorithm, keeping first-appearance order.
pub fn group_by_algorithm(records: &[SummaryRecord]) -> Vec<(String, Vec<SummaryRow>)> {
    let mut groups: Vec<(String, Vec<SummaryRow>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(name, _)| *name == r.algorithm) {
            Some((_, rows)) => rows.push(r.row),
            None => groups.push((r.algorithm.clone(), vec![r.row])),
        }
    }
    groups
}
