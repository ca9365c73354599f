//! CSV emission. Floats are written with 17 significant digits so that
//! files round-trip bit-exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::coverage::{CoverageRecord, CoverageSummary};
use super::infogain::InfoGainRow;
use super::regret::RunRecord;
use crate::error::{Error, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const RUN_HEADER: [&str; 7] = [
    "policy",
    "seed",
    "t",
    "arm",
    "reward",
    "instant_regret",
    "cumulative_regret",
];

pub const COVERAGE_HEADER: [&str; 8] = ["family", "seed", "t", "arm", "lower", "upper", "contains_f", "width"];

pub const SUMMARY_HEADER: [&str; 7] = [
    "family",
    "seed",
    "arm",
    "rounds",
    "violation_rounds",
    "any_violation",
    "any_upper_violation",
];

pub const INFOGAIN_HEADER: [&str; 5] = ["seed", "t", "greedy_gamma", "observed_gain", "inverted"];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: "<csv>".into(),
            source,
        },
        other => Error::Numeric(format!("csv: {other:?}")),
    }
}

fn write_rows<W: Write, const N: usize>(
    out: W,
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv>".into(),
        source,
    })
}

pub fn write_run_records<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    write_rows(
        out,
        RUN_HEADER,
        records.iter().map(|r| {
            [
                r.policy.to_string(),
                r.seed.to_string(),
                r.t.to_string(),
                r.arm.to_string(),
                r.reward.to_string(),
                fmt_f64(r.instant_regret),
                fmt_f64(r.cumulative_regret),
            ]
        }),
    )
}

pub fn write_coverage_records<W: Write>(out: W, records: &[CoverageRecord]) -> Result<()> {
    write_rows(
        out,
        COVERAGE_HEADER,
        records.iter().map(|r| {
            [
                r.family.as_str().to_string(),
                r.seed.to_string(),
                r.t.to_string(),
                r.arm.to_string(),
                fmt_f64(r.lower),
                fmt_f64(r.upper),
                r.contains_f.to_string(),
                fmt_f64(r.width),
            ]
        }),
    )
}

pub fn write_coverage_summaries<W: Write>(out: W, rows: &[CoverageSummary]) -> Result<()> {
    write_rows(
        out,
        SUMMARY_HEADER,
        rows.iter().map(|r| {
            [
                r.family.as_str().to_string(),
                r.seed.to_string(),
                r.arm.map_or_else(|| "all".to_string(), |a| a.to_string()),
                r.rounds.to_string(),
                r.violation_rounds.to_string(),
                r.any_violation.to_string(),
                r.any_upper_violation.to_string(),
            ]
        }),
    )
}

pub fn write_infogain_rows<W: Write>(out: W, rows: &[InfoGainRow]) -> Result<()> {
    write_rows(
        out,
        INFOGAIN_HEADER,
        rows.iter().map(|r| {
            [
                r.seed.to_string(),
                r.t.to_string(),
                fmt_f64(r.greedy_gamma),
                fmt_f64(r.observed_gain),
                r.inverted.to_string(),
            ]
        }),
    )
}

/// `runs.csv` -> `runs.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

pub fn write_file(path: &Path, emit: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    emit(&mut buf)?;
    std::fs::write(path, buf).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
