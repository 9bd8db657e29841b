//! Mean throughput and relative-error tables.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use chanocc_core::sim::ThroughputSeries;

use crate::error::{Error, Result};
use crate::io;
use crate::preset::{Direction, Variant};

/// Cells whose recomputed value differs from the stated one by more than
/// this many percentage points are flagged.
pub const STATED_TOLERANCE_PTS: f64 = 0.2;

/// Arithmetic mean of the intervals in `range` (all intervals by default).
pub fn summarize(series: &ThroughputSeries, range: Option<Range<usize>>) -> Result<f64> {
    let range = range.unwrap_or(0..series.mbps.len());
    let values = series
        .mbps
        .get(range.clone())
        .filter(|v| !v.is_empty())
        .ok_or_else(|| Error::Invalid(format!("flow {}: empty interval range {range:?}", series.flow)))?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn relative_error_pct(reference: f64, candidate: f64) -> Result<f64> {
    if reference == 0.0 || !reference.is_finite() {
        return Err(Error::Invalid(format!("reference mean {reference} cannot anchor a relative error")));
    }
    Ok((candidate - reference).abs() / reference * 100.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub experiment: String,
    pub flow: String,
    pub reference: f64,
    pub candidate: f64,
    pub error_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeErrorReport {
    pub rows: Vec<ErrorRow>,
    pub average_pct: f64,
}

/// `(experiment, flow, reference, candidate)` rows to a report.
pub fn relative_error_report(rows: &[(&str, &str, f64, f64)]) -> Result<RelativeErrorReport> {
    if rows.is_empty() {
        return Err(Error::Invalid("relative error report needs at least one row".into()));
    }
    let rows = rows
        .iter()
        .map(|&(experiment, flow, reference, candidate)| {
            Ok(ErrorRow {
                experiment: experiment.into(),
                flow: flow.into(),
                reference,
                candidate,
                error_pct: relative_error_pct(reference, candidate)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let average_pct = rows.iter().map(|r| r.error_pct).sum::<f64>() / rows.len() as f64;
    Ok(RelativeErrorReport { rows, average_pct })
}

pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// One experiment of the three-way comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub experiment: String,
    pub flow: String,
    pub reference: f64,
    pub occupancy: f64,
    pub baseline: f64,
}

/// Error percentages as stated alongside a table, for cross-checking.
#[derive(Debug, Clone, PartialEq)]
pub struct StatedErrors {
    pub occupancy: Vec<f64>,
    pub baseline: Vec<f64>,
    pub occupancy_average: f64,
    pub baseline_average: f64,
}

/// A recomputed cell next to its stated value.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCheck {
    pub cell: String,
    pub computed: f64,
    pub stated: f64,
    pub divergent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub rows: Vec<TableRow>,
    pub occupancy: RelativeErrorReport,
    pub baseline: RelativeErrorReport,
    pub stated: Option<StatedErrors>,
}

impl Table {
    pub fn new(rows: Vec<TableRow>, stated: Option<StatedErrors>) -> Result<Self> {
        let pick = |f: fn(&TableRow) -> f64| -> Vec<(&str, &str, f64, f64)> {
            rows.iter().map(|r| (r.experiment.as_str(), r.flow.as_str(), r.reference, f(r))).collect()
        };
        let occupancy = relative_error_report(&pick(|r| r.occupancy))?;
        let baseline = relative_error_report(&pick(|r| r.baseline))?;
        if let Some(p) = &stated {
            if p.occupancy.len() != rows.len() || p.baseline.len() != rows.len() {
                return Err(Error::Invalid("stated errors do not match the table rows".into()));
            }
        }
        Ok(Table { rows, occupancy, baseline, stated })
    }

    /// The testbed table: measured means and their stated errors.
    pub fn testbed_fixture() -> Self {
        let row = |experiment: &str, flow: &str, reference, occupancy, baseline| TableRow {
            experiment: experiment.into(),
            flow: flow.into(),
            reference,
            occupancy,
            baseline,
        };
        Table::new(
            vec![
                row("1", "A->B", 17.92, 16.67, 29.26),
                row("2", "B->A", 18.05, 14.29, 29.25),
                row("3", "A<->B", 8.55, 9.90, 13.48),
            ],
            Some(StatedErrors {
                occupancy: vec![6.96, 20.98, 7.53],
                baseline: vec![63.28, 65.50, 27.57],
                occupancy_average: 11.83,
                baseline_average: 51.12,
            }),
        )
        .expect("fixture table is well formed")
    }

    /// Every stated cell against the recomputed value, rounded to two
    /// decimals.
    pub fn checks(&self) -> Vec<CellCheck> {
        let Some(p) = &self.stated else { return Vec::new() };
        let mut out = Vec::new();
        let mut check = |cell: String, computed: f64, stated: f64| {
            let computed = round2(computed);
            out.push(CellCheck {
                cell,
                computed,
                stated,
                divergent: (computed - stated).abs() > STATED_TOLERANCE_PTS,
            });
        };
        for (i, r) in self.rows.iter().enumerate() {
            check(format!("{} occupancy", r.experiment), self.occupancy.rows[i].error_pct, p.occupancy[i]);
            check(format!("{} baseline", r.experiment), self.baseline.rows[i].error_pct, p.baseline[i]);
        }
        check("average occupancy".into(), self.occupancy.average_pct, p.occupancy_average);
        check("average baseline".into(), self.baseline.average_pct, p.baseline_average);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "experiment,flow,reference_mbps,occupancy_mbps,baseline_mbps,occupancy_error_pct,baseline_error_pct,stated_occupancy_pct,stated_baseline_pct,flag\n",
        );
        let checks = self.checks();
        let flag = |prefix: &str| -> String {
            let bad: Vec<&str> = checks
                .iter()
                .filter(|c| c.divergent && c.cell.starts_with(prefix))
                .map(|c| c.cell.rsplit(' ').next().unwrap_or(""))
                .collect();
            if self.stated.is_none() {
                String::new()
            } else if bad.is_empty() {
                "ok".into()
            } else {
                format!("divergent:{}", bad.join("+"))
            }
        };
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.2}")).unwrap_or_default();
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(
                s,
                "{},{},{:.2},{:.2},{:.2},{:.2},{:.2},{},{},{}",
                r.experiment,
                r.flow,
                r.reference,
                r.occupancy,
                r.baseline,
                self.occupancy.rows[i].error_pct,
                self.baseline.rows[i].error_pct,
                opt(self.stated.as_ref().map(|p| p.occupancy[i])),
                opt(self.stated.as_ref().map(|p| p.baseline[i])),
                flag(&format!("{} ", r.experiment)),
            )
            .unwrap();
        }
        writeln!(
            s,
            "average,,,,,{:.2},{:.2},{},{},{}",
            self.occupancy.average_pct,
            self.baseline.average_pct,
            opt(self.stated.as_ref().map(|p| p.occupancy_average)),
            opt(self.stated.as_ref().map(|p| p.baseline_average)),
            flag("average "),
        )
        .unwrap();
        s
    }
}

/// Per-direction mean of the measured flows over the whole run.
pub fn per_direction_mean(series: &[ThroughputSeries]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Invalid("no throughput series".into()));
    }
    let means = series.iter().map(|s| summarize(s, None)).collect::<Result<Vec<_>>>()?;
    Ok(means.iter().sum::<f64>() / means.len() as f64)
}

fn read_series(path: &Path) -> Result<Vec<ThroughputSeries>> {
    io::parse_throughput_csv(&io::read_text(path)?, path)
}

/// Builds the table from controlled-interference outputs laid out as
/// `root/<direction>/{reference,<candidate>,baseline}/throughput.csv`.
pub fn table_from_runs(root: &Path, candidate: Variant) -> Result<Table> {
    let mut rows = Vec::new();
    for (i, direction) in Direction::ALL.iter().enumerate() {
        let dir = root.join(direction.as_str());
        let mean = |sub: &str| per_direction_mean(&read_series(&dir.join(sub).join("throughput.csv"))?);
        let flow = match direction {
            Direction::AtoB => "A->B",
            Direction::BtoA => "B->A",
            Direction::Bidirectional => "A<->B per direction",
        };
        rows.push(TableRow {
            experiment: (i + 1).to_string(),
            flow: flow.into(),
            reference: mean("reference")?,
            occupancy: mean(candidate.as_str())?,
            baseline: mean(Variant::Baseline.as_str())?,
        });
    }
    Table::new(rows, None)
}
