//! Benchmark matrix: datasets x k values x repetitions, optionally for several
//! engine variants, written as CSV.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::dataset_io::OnShelfDatabase;
use crate::search::{mine_top_k, MineError, MineOptions};
use crate::toolkit::memory::peak_rss_kib;

/// A named engine configuration.
#[derive(Debug, Clone)]
pub struct Variant {
    pub name: String,
    pub options: MineOptions,
}

impl Variant {
    pub fn default_engine() -> Variant {
        Variant { name: "default".into(), options: MineOptions::default() }
    }

    /// The default engine followed by each pruning ablation.
    pub fn ablations() -> Vec<Variant> {
        let base = MineOptions::default();
        vec![
            Variant::default_engine(),
            Variant { name: "no-su-prune".into(), options: MineOptions { su_prune: false, ..base } },
            Variant { name: "no-lu-prune".into(), options: MineOptions { lu_prune: false, ..base } },
            Variant { name: "no-pruning".into(), options: MineOptions { su_prune: false, lu_prune: false, ..base } },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub variant: String,
    pub k: usize,
    pub periods: usize,
    pub repetition: usize,
    pub elapsed_ms: u128,
    /// Process-wide high-water mark, so an upper bound for this cell.
    pub peak_rss_kib_estimate: Option<u64>,
    pub candidates_evaluated: Option<u64>,
    pub patterns_emitted: Option<u64>,
    pub timed_out: bool,
}

#[derive(Debug, Clone)]
pub struct BenchMatrix<'a> {
    pub datasets: Vec<(String, &'a OnShelfDatabase)>,
    pub k_list: Vec<usize>,
    pub repeats: usize,
    pub variants: Vec<Variant>,
    /// Per-cell limit; a cell that exceeds it is recorded as timed out.
    pub time_limit: Option<Duration>,
}

/// Runs every cell in order: dataset, variant, k, repetition. Parsing is the
/// caller's job and is not timed.
pub fn run_bench(matrix: &BenchMatrix<'_>) -> Result<Vec<BenchRecord>, MineError> {
    let mut records = Vec::new();
    for (name, db) in &matrix.datasets {
        for variant in &matrix.variants {
            for &k in &matrix.k_list {
                for repetition in 0..matrix.repeats {
                    let options = MineOptions { time_limit: matrix.time_limit, ..variant.options };
                    let started = Instant::now();
                    let outcome = mine_top_k(db, k, &options);
                    let elapsed_ms = started.elapsed().as_millis();
                    let (stats, timed_out) = match outcome {
                        Ok((_, stats)) => (Some(stats), false),
                        Err(MineError::Timeout) => (None, true),
                        Err(e) => return Err(e),
                    };
                    records.push(BenchRecord {
                        dataset: name.clone(),
                        variant: variant.name.clone(),
                        k,
                        periods: db.period_totals().len(),
                        repetition,
                        elapsed_ms,
                        peak_rss_kib_estimate: peak_rss_kib(),
                        candidates_evaluated: stats.as_ref().map(|s| s.candidates_evaluated),
                        patterns_emitted: stats.as_ref().map(|s| s.patterns_emitted),
                        timed_out,
                    });
                }
            }
        }
    }
    Ok(records)
}

pub fn write_csv<W: Write>(records: &[BenchRecord], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::parse_database_str;

    #[test]
    fn one_row_per_cell() {
        let db = parse_database_str("1 2:5:2 3:0\n2 3:7:4 3:1\n1 3:2:1 1:1\n").unwrap();
        let matrix = BenchMatrix {
            datasets: vec![("toy".into(), &db)],
            k_list: vec![10, 50, 100],
            repeats: 3,
            variants: vec![Variant::default_engine()],
            time_limit: None,
        };
        let records = run_bench(&matrix).unwrap();
        assert_eq!(records.len(), 9);
        assert!(records.iter().all(|r| !r.timed_out && r.periods == 2));

        let mut out = Vec::new();
        write_csv(&records, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("dataset,variant,k,periods,repetition,elapsed_ms,"));
        assert_eq!(text.lines().count(), 10);
    }

    #[test]
    fn timeouts_are_recorded_not_fatal() {
        let db = parse_database_str("1 2:5:2 3:0\n").unwrap();
        let matrix = BenchMatrix {
            datasets: vec![("toy".into(), &db)],
            k_list: vec![1],
            repeats: 1,
            variants: Variant::ablations(),
            time_limit: Some(Duration::ZERO),
        };
        let records = run_bench(&matrix).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records.iter().all(|r| r.timed_out && r.candidates_evaluated.is_none()));
    }
}
