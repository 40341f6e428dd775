use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use onshelf::dataset_io::{format_pattern, parse_database, write_patterns};
use onshelf::oracle::{oracle_top_k, OracleError, OracleLimits};
use onshelf::toolkit::bench::{run_bench, write_csv, BenchMatrix, Variant};
use onshelf::toolkit::generator::{generate, GenerateError, GeneratorParams};
use onshelf::toolkit::memory::peak_rss_kib;
use onshelf::{mine_top_k, MineError, MineOptions, OnShelfDatabase, ParseError};
use serde_json::json;

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_ORACLE_REFUSED: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;

#[derive(Parser)]
#[command(name = "onshelf", version, about = "Top-k on-shelf itemset mining with negative profits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine the k itemsets of highest relative utility.
    Mine {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(short, long)]
        output: PathBuf,
        /// Write run statistics as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        no_merge: bool,
        #[arg(long)]
        no_su_prune: bool,
        #[arg(long)]
        no_lu_prune: bool,
        /// Explore first-level items on all cores.
        #[arg(long)]
        parallel: bool,
        #[arg(long, value_name = "MS")]
        timeout_ms: Option<u64>,
    },
    /// Compare the engine with brute-force enumeration.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        max_items: usize,
    },
    /// Write a seeded synthetic database.
    Gen {
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        transactions: usize,
        #[arg(long)]
        items: usize,
        #[arg(long)]
        periods: u32,
        #[arg(long)]
        avg_len: usize,
        #[arg(long, default_value_t = 0.2)]
        neg_frac: f64,
        #[arg(long, default_value_t = 5)]
        max_qty: u32,
        #[arg(long, default_value_t = 10)]
        max_profit: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time the engine over datasets and k values, writing CSV.
    Bench {
        /// Comma-separated database paths.
        #[arg(short, long, value_delimiter = ',', required = true)]
        input: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        k_list: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        /// Reassign periods round-robin over N periods before timing.
        #[arg(long, value_name = "N")]
        reperiod: Option<u32>,
        /// Also run each pruning ablation.
        #[arg(long)]
        ablate: bool,
        #[arg(long, value_name = "MS")]
        timeout_ms: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure { code: EXIT_FAIL, error: e.into() }
    }
}

fn fail(code: u8, error: impl Into<anyhow::Error>) -> Failure {
    Failure { code, error: error.into() }
}

fn load(path: &Path) -> Result<OnShelfDatabase, Failure> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display())).map_err(|e| fail(EXIT_INVALID, e))?;
    parse_database(BufReader::new(file)).map_err(|e: ParseError| fail(EXIT_INVALID, anyhow!("{}: {e}", path.display())))
}

fn mine_error(e: MineError) -> Failure {
    match e {
        MineError::InvalidK => fail(EXIT_INVALID, e),
        MineError::Timeout => fail(EXIT_TIMEOUT, e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Mine { input, k, output, stats, no_merge, no_su_prune, no_lu_prune, parallel, timeout_ms } => {
            let db = load(&input)?;
            let options = MineOptions {
                merge: !no_merge,
                su_prune: !no_su_prune,
                lu_prune: !no_lu_prune,
                parallel,
                time_limit: timeout_ms.map(Duration::from_millis),
            };
            let (patterns, s) = mine_top_k(&db, k, &options).map_err(mine_error)?;
            let out = File::create(&output).with_context(|| format!("creating {}", output.display()))?;
            write_patterns(&patterns, BufWriter::new(out))?;
            if let Some(path) = stats {
                let doc = json!({
                    "k": k,
                    "patterns": patterns.len(),
                    "interutil_num": s.final_interutil.numer(),
                    "interutil_den": s.final_interutil.denom(),
                    "candidates": s.candidates_evaluated,
                    "projections": s.projections_built,
                    "merges": s.merges_performed,
                    "max_depth": s.max_depth,
                    "elapsed_ms": s.elapsed.as_millis() as u64,
                    "peak_rss_kib_estimate": peak_rss_kib(),
                });
                std::fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(0)
        }
        Command::Verify { input, k, max_items } => {
            let db = load(&input)?;
            let limits = OracleLimits { max_items, ..OracleLimits::default() };
            let expected = oracle_top_k(&db, k, &limits).map_err(|e| match e {
                OracleError::TooLargeForOracle { .. } => fail(EXIT_ORACLE_REFUSED, e),
                OracleError::InvalidK => fail(EXIT_INVALID, e),
            })?;
            let (got, _) = mine_top_k(&db, k, &MineOptions::default()).map_err(mine_error)?;
            let first_diff = (0..got.len().max(expected.len())).find(|&i| match (got.get(i), expected.get(i)) {
                (Some(a), Some(b)) => !a.identical(b),
                _ => true,
            });
            match first_diff {
                None => {
                    println!("PASS k={k} patterns={}", got.len());
                    Ok(0)
                }
                Some(i) => {
                    let show = |p: Option<&onshelf::Pattern>| p.map_or("<none>".to_string(), format_pattern);
                    println!(
                        "FAIL k={k} rank={} engine=[{}] oracle=[{}]",
                        i + 1,
                        show(got.get(i)),
                        show(expected.get(i))
                    );
                    Ok(EXIT_FAIL)
                }
            }
        }
        Command::Gen { output, transactions, items, periods, avg_len, neg_frac, max_qty, max_profit, seed } => {
            let params = GeneratorParams {
                n_transactions: transactions,
                n_items: items,
                n_periods: periods,
                avg_transaction_length: avg_len,
                negative_item_fraction: neg_frac,
                max_quantity: max_qty,
                max_profit,
                seed,
            };
            let text = generate(&params).map_err(|e| match e {
                GenerateError::InvalidParams(_) | GenerateError::InfeasibleParams => fail(EXIT_INVALID, e),
            })?;
            std::fs::write(&output, text).with_context(|| format!("writing {}", output.display()))?;
            Ok(0)
        }
        Command::Bench { input, k_list, repeat, reperiod, ablate, timeout_ms, out } => {
            let mut dbs = Vec::with_capacity(input.len());
            for path in &input {
                let mut db = load(path)?;
                if let Some(n) = reperiod {
                    db = db.reperiod(n).map_err(|e| fail(EXIT_INVALID, e))?;
                }
                dbs.push((path.display().to_string(), db));
            }
            let matrix = BenchMatrix {
                datasets: dbs.iter().map(|(name, db)| (name.clone(), db)).collect(),
                k_list,
                repeats: repeat,
                variants: if ablate { Variant::ablations() } else { vec![Variant::default_engine()] },
                time_limit: timeout_ms.map(Duration::from_millis),
            };
            let records = run_bench(&matrix).map_err(mine_error)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut sink = BufWriter::new(file);
            write_csv(&records, &mut sink)?;
            sink.flush()?;
            Ok(0)
        }
    }
}
