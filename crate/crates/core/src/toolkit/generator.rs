//! Seeded synthetic databases.
//!
//! Output depends only on the parameters: ChaCha8 is seeded directly from
//! `seed`, so the same parameters give the same bytes everywhere.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset_io::{write_database, OnShelfDatabase};
use crate::domain::{ItemId, Period};

/// Period assignments tried per drawn set of transactions.
const PERIOD_RETRIES: usize = 100;
/// Profit tables and transaction sets drawn before giving up.
const CONTENT_RETRIES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_transactions: usize,
    pub n_items: usize,
    pub n_periods: u32,
    pub avg_transaction_length: usize,
    /// Probability that an item's unit profit is negative; must be `< 1`.
    pub negative_item_fraction: f64,
    pub max_quantity: u32,
    pub max_profit: i64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> GeneratorParams {
        GeneratorParams {
            n_transactions: 100,
            n_items: 20,
            n_periods: 3,
            avg_transaction_length: 5,
            negative_item_fraction: 0.2,
            max_quantity: 5,
            max_profit: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("could not draw a database whose period totals are all positive")]
    InfeasibleParams,
}

impl GeneratorParams {
    fn validate(&self) -> Result<(), GenerateError> {
        let bad = |msg: &str| Err(GenerateError::InvalidParams(msg.to_string()));
        if self.n_transactions == 0 {
            return bad("at least one transaction is required");
        }
        if self.n_items == 0 || self.n_items > u32::MAX as usize {
            return bad("item count out of range");
        }
        if self.n_periods == 0 {
            return bad("at least one period is required");
        }
        if self.avg_transaction_length == 0 {
            return bad("average transaction length must be positive");
        }
        if !(0.0..1.0).contains(&self.negative_item_fraction) {
            return bad("negative item fraction must be in [0, 1)");
        }
        if self.max_quantity == 0 || self.max_profit <= 0 {
            return bad("quantity and profit ranges must be positive");
        }
        Ok(())
    }
}

/// Generates a database that passes full validation.
pub fn generate_database(params: &GeneratorParams) -> Result<OnShelfDatabase, GenerateError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let max_len = (2 * params.avg_transaction_length - 1).min(params.n_items);
    for _ in 0..CONTENT_RETRIES {
        let mut profits: Vec<i64> = (0..params.n_items)
            .map(|_| {
                let magnitude = rng.gen_range(1..=params.max_profit);
                if rng.gen_bool(params.negative_item_fraction) {
                    -magnitude
                } else {
                    magnitude
                }
            })
            .collect();
        if profits.iter().all(|&p| p < 0) {
            profits[0] = -profits[0];
        }
        let rows: Vec<Vec<(ItemId, i64)>> = (0..params.n_transactions)
            .map(|_| {
                let len = rng.gen_range(1..=max_len);
                let mut picked = sample(&mut rng, params.n_items, len).into_vec();
                picked.sort_unstable();
                picked
                    .into_iter()
                    .map(|slot| {
                        let qty = rng.gen_range(1..=params.max_quantity) as i64;
                        (slot as ItemId + 1, profits[slot] * qty)
                    })
                    .collect()
            })
            .collect();
        let tu: Vec<i64> = rows.iter().map(|r| r.iter().map(|&(_, u)| u).sum()).collect();
        if tu.iter().sum::<i64>() <= 0 {
            continue;
        }
        if let Some(periods) = assign_periods(&mut rng, &tu, params.n_periods) {
            let framed: Vec<(Period, &[(ItemId, i64)])> =
                periods.iter().zip(&rows).map(|(&h, r)| (h, r.as_slice())).collect();
            return OnShelfDatabase::from_utilities(&framed).map_err(|_| GenerateError::InfeasibleParams);
        }
    }
    Err(GenerateError::InfeasibleParams)
}

/// Draws period labels `1..=n_periods` until every non-empty period has a
/// positive total.
fn assign_periods(rng: &mut ChaCha8Rng, tu: &[i64], n_periods: u32) -> Option<Vec<Period>> {
    let mut totals = vec![0i64; n_periods as usize + 1];
    let mut used = vec![false; n_periods as usize + 1];
    for _ in 0..PERIOD_RETRIES {
        totals.fill(0);
        used.fill(false);
        let periods: Vec<Period> = tu.iter().map(|_| rng.gen_range(1..=n_periods)).collect();
        for (&h, &u) in periods.iter().zip(tu) {
            totals[h as usize] += u;
            used[h as usize] = true;
        }
        if totals.iter().zip(&used).all(|(&t, &u)| !u || t > 0) {
            return Some(periods);
        }
    }
    None
}

/// Parameters of the `index`-th database in a family of small databases
/// (at most 12 items, 30 transactions and 4 periods) cycling through
/// negative-item fractions 0, 0.2 and 0.4. Small enough for the oracle.
pub fn small_corpus_params(index: u64) -> GeneratorParams {
    GeneratorParams {
        n_transactions: 5 + (index % 26) as usize,
        n_items: 3 + (index % 10) as usize,
        n_periods: 1 + (index % 4) as u32,
        avg_transaction_length: 1 + (index % 4) as usize,
        negative_item_fraction: [0.0, 0.2, 0.4][(index % 3) as usize],
        max_quantity: 1 + (index % 5) as u32,
        max_profit: 10,
        seed: index,
    }
}

/// Generates a database in the text input format.
pub fn generate(params: &GeneratorParams) -> Result<String, GenerateError> {
    let db = generate_database(params)?;
    let mut out = Vec::new();
    write_database(&db, &mut out).expect("writing to memory");
    Ok(String::from_utf8(out).expect("ascii output"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::parse_database_str;

    fn small(seed: u64) -> GeneratorParams {
        GeneratorParams { n_transactions: 10, n_items: 5, n_periods: 2, seed, ..GeneratorParams::default() }
    }

    #[test]
    fn same_seed_same_bytes() {
        assert_eq!(generate(&small(42)).unwrap(), generate(&small(42)).unwrap());
        assert_ne!(generate(&small(42)).unwrap(), generate(&small(43)).unwrap());
    }

    #[test]
    fn no_negative_fraction_means_positive_utilities() {
        let params = GeneratorParams { negative_item_fraction: 0.0, n_transactions: 200, ..small(7) };
        let db = generate_database(&params).unwrap();
        assert!(db.transactions().iter().flat_map(|t| &t.entries).all(|e| e.utility.is_positive()));
    }

    #[test]
    fn output_parses() {
        for seed in 0..20 {
            let params = GeneratorParams { negative_item_fraction: 0.4, ..small(seed) };
            let text = generate(&params).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            let db = parse_database_str(&text).unwrap();
            assert_eq!(db.transactions().len(), 10);
        }
    }

    #[test]
    fn rejects_invalid_params() {
        let params = GeneratorParams { negative_item_fraction: 1.0, ..small(0) };
        assert!(matches!(generate(&params), Err(GenerateError::InvalidParams(_))));
    }

    #[test]
    fn reports_infeasible_totals() {
        // Nearly every item loses money, so some period ends up with a
        // non-positive total whatever the assignment.
        let params = GeneratorParams {
            n_transactions: 40,
            n_items: 40,
            n_periods: 8,
            avg_transaction_length: 1,
            negative_item_fraction: 0.999,
            max_quantity: 1,
            max_profit: 10,
            seed: 3,
        };
        assert_eq!(generate(&params), Err(GenerateError::InfeasibleParams));
    }
}
