//! Brute-force reference results computed straight from the definitions.
//!
//! Nothing here uses the engine's preprocessing, ordering or bounds; the only
//! shared pieces are the value types and the result order.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dataset_io::OnShelfDatabase;
use crate::domain::{rank_order, ItemId, Money, Pattern, Period, Rational, Transaction};

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_items: usize,
    /// Largest itemset enumerated; `None` means no limit.
    pub max_itemset_size: Option<usize>,
}

impl Default for OracleLimits {
    fn default() -> OracleLimits {
        OracleLimits { max_items: 20, max_itemset_size: None }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("database has {items} distinct items; the oracle enumerates at most {limit}")]
    TooLargeForOracle { items: usize, limit: usize },
    #[error("k must be at least 1")]
    InvalidK,
}

/// Every itemset contained in at least one transaction, with its utility,
/// periods and relative utility.
pub fn enumerate_all(db: &OnShelfDatabase, limits: &OracleLimits) -> Result<Vec<Pattern>, OracleError> {
    let ids: Vec<ItemId> = {
        let mut v: Vec<ItemId> = db.transactions().iter().flat_map(|t| t.entries.iter().map(|e| e.item)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    if ids.len() > limits.max_items || ids.len() >= 64 {
        return Err(OracleError::TooLargeForOracle { items: ids.len(), limit: limits.max_items });
    }
    let defs = Definitions::new(db);
    let rows: Vec<(u64, &Transaction)> = db
        .transactions()
        .iter()
        .map(|t| {
            let mask = t.entries.iter().fold(0u64, |m, e| m | 1 << ids.binary_search(&e.item).unwrap());
            (mask, t)
        })
        .collect();
    let max_size = limits.max_itemset_size.unwrap_or(ids.len());

    let mut out = Vec::new();
    for mask in 1u64..(1u64 << ids.len()) {
        if mask.count_ones() as usize > max_size {
            continue;
        }
        let items: Vec<ItemId> = (0..ids.len()).filter(|b| mask >> b & 1 == 1).map(|b| ids[b]).collect();
        let mut utility = Money::ZERO;
        let mut periods: Vec<Period> = Vec::new();
        let mut seen = false;
        for &(tmask, t) in &rows {
            if tmask & mask != mask {
                continue;
            }
            seen = true;
            utility += items.iter().map(|&i| t.utility_of(i).unwrap()).sum::<Money>();
            if !periods.contains(&t.period) {
                periods.push(t.period);
            }
        }
        if !seen {
            continue;
        }
        let to: Money = periods.iter().map(|&h| defs.pto(h)).sum();
        out.push(Pattern::new(items, utility, periods, to));
    }
    Ok(out)
}

/// The `k` best itemsets with non-negative relative utility.
pub fn oracle_top_k(db: &OnShelfDatabase, k: usize, limits: &OracleLimits) -> Result<Vec<Pattern>, OracleError> {
    if k == 0 {
        return Err(OracleError::InvalidK);
    }
    let mut all: Vec<Pattern> =
        enumerate_all(db, limits)?.into_iter().filter(|p| !p.relative_utility.is_negative()).collect();
    all.sort_by(rank_order);
    all.truncate(k);
    Ok(all)
}

/// Direct evaluation of the utility measures for a single itemset, by
/// scanning the whole database every time.
///
/// Measures that depend on an item order take it explicitly as a slice of
/// external ids, first to last.
#[derive(Debug, Clone)]
pub struct Definitions<'a> {
    db: &'a OnShelfDatabase,
    pto: BTreeMap<Period, Money>,
}

impl<'a> Definitions<'a> {
    pub fn new(db: &'a OnShelfDatabase) -> Definitions<'a> {
        let mut pto = BTreeMap::new();
        for t in db.transactions() {
            *pto.entry(t.period).or_insert(Money::ZERO) += t.entries.iter().map(|e| e.utility).sum::<Money>();
        }
        Definitions { db, pto }
    }

    fn transaction(&self, tid: usize) -> &'a Transaction {
        &self.db.transactions()[tid - 1]
    }

    fn containing(&self, items: &[ItemId]) -> impl Iterator<Item = &'a Transaction> + '_ {
        let items = items.to_vec();
        self.db.transactions().iter().filter(move |t| items.iter().all(|&i| t.contains(i)))
    }

    /// `pto(h)`: the signed total of every transaction in period `h`.
    pub fn pto(&self, period: Period) -> Money {
        self.pto.get(&period).copied().unwrap_or(Money::ZERO)
    }

    /// `TU(T)` for a 1-based tid.
    pub fn tu(&self, tid: usize) -> Money {
        self.transaction(tid).entries.iter().map(|e| e.utility).sum()
    }

    /// `PTU(T)` for a 1-based tid.
    pub fn ptu(&self, tid: usize) -> Money {
        self.transaction(tid).entries.iter().filter(|e| e.utility.is_positive()).map(|e| e.utility).sum()
    }

    /// `u(X, T)`, or `None` when `T` does not contain `X`.
    pub fn utility_in(&self, items: &[ItemId], tid: usize) -> Option<Money> {
        let t = self.transaction(tid);
        items.iter().map(|&i| t.utility_of(i)).sum()
    }

    /// `u(X)`.
    pub fn utility(&self, items: &[ItemId]) -> Money {
        self.containing(items).map(|t| items.iter().map(|&i| t.utility_of(i).unwrap()).sum::<Money>()).sum()
    }

    /// `u(X, h)`.
    pub fn utility_in_period(&self, items: &[ItemId], period: Period) -> Money {
        self.containing(items)
            .filter(|t| t.period == period)
            .map(|t| items.iter().map(|&i| t.utility_of(i).unwrap()).sum::<Money>())
            .sum()
    }

    /// `pi(X)`, ascending.
    pub fn periods(&self, items: &[ItemId]) -> Vec<Period> {
        let mut v: Vec<Period> = self.containing(items).map(|t| t.period).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `to(X)`.
    pub fn period_total(&self, items: &[ItemId]) -> Money {
        self.periods(items).into_iter().map(|h| self.pto(h)).sum()
    }

    /// `ru(X)`; `None` if `X` occurs nowhere.
    pub fn relative_utility(&self, items: &[ItemId]) -> Option<Rational> {
        let to = self.period_total(items);
        (to != Money::ZERO).then(|| Rational::from_money(self.utility(items), to))
    }

    /// `u(X, h) / pto(h)`.
    pub fn relative_utility_in_period(&self, items: &[ItemId], period: Period) -> Rational {
        Rational::from_money(self.utility_in_period(items, period), self.pto(period))
    }

    /// `TWU(X, h)`: the positive transaction utilities of period-`h`
    /// transactions containing `X`.
    pub fn twu_in_period(&self, items: &[ItemId], period: Period) -> Money {
        self.containing(items)
            .filter(|t| t.period == period)
            .map(|t| t.entries.iter().filter(|e| e.utility.is_positive()).map(|e| e.utility).sum::<Money>())
            .sum()
    }

    fn after_last<'o>(&self, items: &[ItemId], order: &'o [ItemId]) -> &'o [ItemId] {
        let last = items
            .iter()
            .map(|i| order.iter().position(|o| o == i).expect("item missing from order"))
            .max()
            .expect("non-empty itemset");
        &order[last + 1..]
    }

    /// `re(X, h)`: utility of the items after `X`'s last item in `order`.
    pub fn remaining_in_period(&self, items: &[ItemId], order: &[ItemId], period: Period) -> Money {
        let after = self.after_last(items, order);
        self.containing(items)
            .filter(|t| t.period == period)
            .flat_map(|t| t.entries.iter().filter(|e| after.contains(&e.item)).map(|e| e.utility))
            .sum()
    }

    /// `pre(X, h)`: as [`remaining_in_period`](Self::remaining_in_period),
    /// positive utilities only.
    pub fn positive_remaining_in_period(&self, items: &[ItemId], order: &[ItemId], period: Period) -> Money {
        let after = self.after_last(items, order);
        self.containing(items)
            .filter(|t| t.period == period)
            .flat_map(|t| {
                t.entries.iter().filter(|e| e.utility.is_positive() && after.contains(&e.item)).map(|e| e.utility)
            })
            .sum()
    }

    /// `reu(X, h) = u(X, h) + pre(X, h)`.
    pub fn remaining_utility_bound(&self, items: &[ItemId], order: &[ItemId], period: Period) -> Money {
        self.utility_in_period(items, period) + self.positive_remaining_in_period(items, order, period)
    }
}
