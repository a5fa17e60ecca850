//! Check reports: a schema-versioned JSON form and a fixed-width table.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::time::Duration;

use atomicity_core::{AtomicOutcomeSet, EnumParams, Family, Outcome};
use serde::{Deserialize, Serialize};

use crate::executor::OutcomeHistogram;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessRecord {
    pub params: EnumParams,
    /// Position in the shuffled round.
    pub index: usize,
    pub round_total: usize,
    pub harness: String,
    pub histogram: OutcomeHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReportVerdict {
    NonAtomic {
        params: EnumParams,
        harness: String,
        outcome: Outcome,
        frequency: u64,
        trials: u64,
        /// Harnesses tested over all rounds.
        harnesses_tested: usize,
        /// Harnesses tested in the violating round, and that round's size.
        round_tested: usize,
        round_total: usize,
        total_time: Duration,
    },
    /// Every harness within the bounds was tested without a violation.
    Exhausted,
    /// The global timeout ended the run first.
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub family: Family,
    pub core: Vec<String>,
    pub method: String,
    pub sut: String,
    pub seed: u64,
    pub bounds: EnumParams,
    pub records: Vec<HarnessRecord>,
    pub verdict: ReportVerdict,
    pub harnesses_tested: usize,
    pub total_time: Duration,
}

impl CheckReport {
    pub fn is_non_atomic(&self) -> bool {
        matches!(self.verdict, ReportVerdict::NonAtomic { .. })
    }

    pub fn non_atomic_outcomes(&self) -> usize {
        self.records
            .iter()
            .map(|r| r.histogram.non_atomic().count())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Json,
    Table,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "table" => Ok(ReportFormat::Table),
            other => Err(format!(
                "unknown report format `{other}` (expected json or table)"
            )),
        }
    }
}

pub fn write_report(r: &CheckReport, format: ReportFormat, out: &mut impl Write) -> io::Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, r)?;
            writeln!(out)
        }
        ReportFormat::Table => out.write_all(report_table(r).as_bytes()),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

/// Verdict row in the column layout
/// `params | tested/total | harness | outcome | frequency | total | time`.
pub fn report_table(r: &CheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "method {} of {} against core {{{}}} on {} (seed {})",
        r.method,
        r.family,
        r.core.join(", "),
        r.sut,
        r.seed
    );
    match &r.verdict {
        ReportVerdict::NonAtomic {
            params,
            harness,
            outcome,
            frequency,
            trials,
            round_tested,
            round_total,
            total_time,
            ..
        } => {
            let rows = [
                [
                    "params",
                    "tested/total",
                    "harness",
                    "outcome",
                    "frequency",
                    "total",
                    "time",
                ]
                .map(String::from),
                [
                    params.to_string(),
                    format!("{round_tested}/{round_total}"),
                    harness.clone(),
                    outcome.to_string(),
                    frequency.to_string(),
                    trials.to_string(),
                    secs(*total_time),
                ],
            ];
            let widths: Vec<usize> = (0..7)
                .map(|c| {
                    rows.iter()
                        .map(|row| row[c].chars().count())
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            for row in &rows {
                let cells: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                let _ = writeln!(s, "{}", cells.join(" | ").trim_end());
            }
            let _ = writeln!(s, "NON-ATOMIC");
        }
        ReportVerdict::Exhausted => {
            let _ = writeln!(
                s,
                "EXHAUSTED: {} harnesses within {} tested in {}, no non-atomic outcome",
                r.harnesses_tested,
                r.bounds,
                secs(r.total_time)
            );
        }
        ReportVerdict::Timeout => {
            let _ = writeln!(
                s,
                "TIMEOUT: {} harnesses tested in {}, no non-atomic outcome",
                r.harnesses_tested,
                secs(r.total_time)
            );
        }
    }
    s
}

/// Outcome, atomic flag and frequency, one row per observed outcome.
pub fn histogram_table(h: &OutcomeHistogram) -> String {
    let width = h
        .entries
        .iter()
        .map(|e| e.outcome.to_string().len())
        .max()
        .unwrap_or(7)
        .max(7);
    let mut s = format!("{:<width$} | atomic | frequency\n", "outcome");
    for e in &h.entries {
        let _ = writeln!(
            s,
            "{:<width$} | {:<6} | {}",
            e.outcome.to_string(),
            if e.atomic { "yes" } else { "NO" },
            e.count
        );
    }
    let _ = writeln!(
        s,
        "{} trials in {} ({:.0} trials/s)",
        h.total,
        secs(h.elapsed),
        h.trials_per_second()
    );
    s
}

/// The atomic outcomes of a harness, one per line.
pub fn outcomes_table(set: &AtomicOutcomeSet) -> String {
    let mut s = format!("{}\n", set.harness);
    for o in set.outcomes() {
        let _ = writeln!(s, "  {o}");
    }
    s
}
