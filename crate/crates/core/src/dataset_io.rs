//! Reading and writing period-annotated transaction databases and mined
//! pattern lists.
//!
//! Input lines have four colon-separated fields:
//!
//! ```text
//! <item ids> : <transaction utility> : <item utilities> : <period>
//! ```
//!
//! e.g. `1 2 4 5:21:5 -6 12 10:1`. Lines starting with `#`, `%` or `@` are
//! comments.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::domain::{
    item_utility, transaction_utility, Entry, Item, ItemId, Money, Pattern, Period, Transaction,
};

/// Upper bound on distinct items; recursion depth is bounded by it.
pub const MAX_DISTINCT_ITEMS: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed input ({reason})")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: item {item} appears more than once")]
    DuplicateItemInTransaction { line: usize, item: ItemId },
    #[error("line {line}: declared transaction utility {declared} but item utilities sum to {actual}")]
    TuChecksumMismatch { line: usize, declared: i64, actual: i64 },
    #[error("line {line}: item {item} has a utility whose sign differs from earlier occurrences")]
    InconsistentProfitSign { line: usize, item: ItemId },
    #[error("line {line}: item {item} has zero utility")]
    ZeroUtility { line: usize, item: ItemId },
    #[error("line {line}: transaction has no items")]
    EmptyTransaction { line: usize },
    #[error("period {period} has non-positive total utility {total}")]
    NonPositivePeriodTotal { period: Period, total: i64 },
    #[error("database contains no transactions")]
    EmptyDatabase,
    #[error("database has {count} distinct items, more than the supported {MAX_DISTINCT_ITEMS}")]
    TooManyItems { count: usize },
    #[error("reperiod count must be at least 1")]
    InvalidPeriodCount,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A validated, immutable on-shelf transaction database.
#[derive(Debug, Clone)]
pub struct OnShelfDatabase {
    transactions: Vec<Transaction>,
    /// Sorted by external id.
    items: Vec<Item>,
    /// `(period, pto(period))`, ascending by period.
    period_totals: Vec<(Period, Money)>,
    tu: Vec<Money>,
}

struct RawTransaction {
    line: usize,
    period: Period,
    entries: Vec<Entry>,
    declared_tu: Option<i64>,
}

impl OnShelfDatabase {
    /// Builds a database from unit profits and per-transaction quantities,
    /// i.e. the `(item, quantity)` form plus a profit table.
    pub fn from_quantities(
        profits: &[(ItemId, i64)],
        rows: &[(Period, &[(ItemId, u32)])],
    ) -> Result<OnShelfDatabase, ParseError> {
        let profit: HashMap<ItemId, i64> = profits.iter().copied().collect();
        let mut raw = Vec::with_capacity(rows.len());
        for (idx, (period, row)) in rows.iter().enumerate() {
            let mut entries = Vec::with_capacity(row.len());
            for &(item, qty) in row.iter() {
                let p = *profit.get(&item).ok_or_else(|| ParseError::MalformedLine {
                    line: idx + 1,
                    reason: format!("item {item} has no profit"),
                })?;
                if qty == 0 {
                    return Err(ParseError::MalformedLine {
                        line: idx + 1,
                        reason: format!("item {item} has zero quantity"),
                    });
                }
                entries.push(Entry { item, utility: item_utility(Money(p), qty) });
            }
            raw.push(RawTransaction { line: idx + 1, period: *period, entries, declared_tu: None });
        }
        Self::from_raw(raw)
    }

    /// Builds a database from already multiplied-out item utilities.
    pub fn from_utilities(rows: &[(Period, &[(ItemId, i64)])]) -> Result<OnShelfDatabase, ParseError> {
        let raw = rows
            .iter()
            .enumerate()
            .map(|(idx, (period, row))| RawTransaction {
                line: idx + 1,
                period: *period,
                entries: row.iter().map(|&(item, u)| Entry { item, utility: Money(u) }).collect(),
                declared_tu: None,
            })
            .collect();
        Self::from_raw(raw)
    }

    fn from_raw(raw: Vec<RawTransaction>) -> Result<OnShelfDatabase, ParseError> {
        if raw.is_empty() {
            return Err(ParseError::EmptyDatabase);
        }
        let mut signs: HashMap<ItemId, bool> = HashMap::new();
        let mut pto: BTreeMap<Period, Money> = BTreeMap::new();
        let mut transactions = Vec::with_capacity(raw.len());
        let mut tu = Vec::with_capacity(raw.len());
        let mut seen = HashSet::new();

        for (idx, rt) in raw.into_iter().enumerate() {
            if rt.entries.is_empty() {
                return Err(ParseError::EmptyTransaction { line: rt.line });
            }
            seen.clear();
            for e in &rt.entries {
                if !seen.insert(e.item) {
                    return Err(ParseError::DuplicateItemInTransaction { line: rt.line, item: e.item });
                }
                if e.utility == Money::ZERO {
                    return Err(ParseError::ZeroUtility { line: rt.line, item: e.item });
                }
                let positive = e.utility.is_positive();
                if *signs.entry(e.item).or_insert(positive) != positive {
                    return Err(ParseError::InconsistentProfitSign { line: rt.line, item: e.item });
                }
            }
            let t = Transaction { tid: idx + 1, period: rt.period, entries: rt.entries, weight: 1 };
            let total = transaction_utility(&t);
            if let Some(declared) = rt.declared_tu {
                if declared != total.0 {
                    return Err(ParseError::TuChecksumMismatch { line: rt.line, declared, actual: total.0 });
                }
            }
            *pto.entry(t.period).or_default() += total;
            tu.push(total);
            transactions.push(t);
        }

        if signs.len() > MAX_DISTINCT_ITEMS {
            return Err(ParseError::TooManyItems { count: signs.len() });
        }
        if let Some((&period, &total)) = pto.iter().find(|(_, total)| total.0 <= 0) {
            return Err(ParseError::NonPositivePeriodTotal { period, total: total.0 });
        }

        let mut items: Vec<Item> =
            signs.into_iter().map(|(external_id, positive)| Item { external_id, positive }).collect();
        items.sort_unstable_by_key(|i| i.external_id);

        Ok(OnShelfDatabase { transactions, items, period_totals: pto.into_iter().collect(), tu })
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    /// Distinct items, ascending by external id.
    pub fn items(&self) -> &[Item] {
        &self.items
    }

    /// Position of `item` in [`items`](Self::items).
    pub fn item_slot(&self, item: ItemId) -> Option<usize> {
        self.items.binary_search_by_key(&item, |i| i.external_id).ok()
    }

    pub fn is_positive(&self, item: ItemId) -> Option<bool> {
        self.item_slot(item).map(|s| self.items[s].positive)
    }

    /// `PE`, ascending.
    pub fn periods(&self) -> Vec<Period> {
        self.period_totals.iter().map(|&(p, _)| p).collect()
    }

    /// `(h, pto(h))` pairs, ascending by `h`.
    pub fn period_totals(&self) -> &[(Period, Money)] {
        &self.period_totals
    }

    /// Position of `period` in [`period_totals`](Self::period_totals).
    pub fn period_slot(&self, period: Period) -> Option<usize> {
        self.period_totals.binary_search_by_key(&period, |&(p, _)| p).ok()
    }

    /// `pto(h)`; zero for a period that does not occur.
    pub fn pto(&self, period: Period) -> Money {
        self.period_slot(period).map_or(Money::ZERO, |s| self.period_totals[s].1)
    }

    /// `TU` of the transaction with the given (1-based) tid.
    pub fn tu(&self, tid: usize) -> Money {
        self.tu[tid - 1]
    }

    /// Reassigns periods round-robin by transaction index (`index % n`).
    pub fn reperiod(&self, n: u32) -> Result<OnShelfDatabase, ParseError> {
        if n == 0 {
            return Err(ParseError::InvalidPeriodCount);
        }
        let raw = self
            .transactions
            .iter()
            .enumerate()
            .map(|(idx, t)| RawTransaction {
                line: idx + 1,
                period: idx as u32 % n,
                entries: t.entries.clone(),
                declared_tu: None,
            })
            .collect();
        Self::from_raw(raw)
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError::MalformedLine { line, reason: reason.into() }
}

fn parse_line(line_no: usize, line: &str) -> Result<RawTransaction, ParseError> {
    let fields: Vec<&str> = line.split(':').collect();
    if fields.len() != 4 {
        return Err(malformed(line_no, format!("expected 4 ':'-separated fields, found {}", fields.len())));
    }
    let items = fields[0]
        .split_whitespace()
        .map(|tok| match tok.parse::<ItemId>() {
            Ok(0) => Err(malformed(line_no, "item ids must be positive")),
            Ok(id) => Ok(id),
            Err(_) => Err(malformed(line_no, format!("bad item id {tok:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let declared = fields[1]
        .trim()
        .parse::<i64>()
        .map_err(|_| malformed(line_no, format!("bad transaction utility {:?}", fields[1].trim())))?;
    let utilities = fields[2]
        .split_whitespace()
        .map(|tok| tok.parse::<i64>().map_err(|_| malformed(line_no, format!("bad item utility {tok:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let period = fields[3]
        .trim()
        .parse::<Period>()
        .map_err(|_| malformed(line_no, format!("bad period {:?}", fields[3].trim())))?;
    if items.len() != utilities.len() {
        return Err(malformed(
            line_no,
            format!("{} item ids but {} item utilities", items.len(), utilities.len()),
        ));
    }
    let entries = items
        .into_iter()
        .zip(utilities)
        .map(|(item, u)| Entry { item, utility: Money(u) })
        .collect();
    Ok(RawTransaction { line: line_no, period, entries, declared_tu: Some(declared) })
}

/// Parses and validates a database.
pub fn parse_database<R: BufRead>(reader: R) -> Result<OnShelfDatabase, ParseError> {
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(['#', '%', '@']) {
            continue;
        }
        raw.push(parse_line(idx + 1, trimmed)?);
    }
    OnShelfDatabase::from_raw(raw)
}

pub fn parse_database_str(text: &str) -> Result<OnShelfDatabase, ParseError> {
    parse_database(text.as_bytes())
}

pub fn write_database<W: Write>(db: &OnShelfDatabase, mut sink: W) -> io::Result<()> {
    for t in db.transactions() {
        let mut line = String::new();
        push_joined(&mut line, t.entries.iter().map(|e| e.item as i64));
        line.push(':');
        line.push_str(&transaction_utility(t).to_string());
        line.push(':');
        push_joined(&mut line, t.entries.iter().map(|e| e.utility.0));
        line.push(':');
        line.push_str(&t.period.to_string());
        line.push('\n');
        sink.write_all(line.as_bytes())?;
    }
    Ok(())
}

fn push_joined(out: &mut String, values: impl Iterator<Item = i64>) {
    for (i, v) in values.enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&v.to_string());
    }
}

/// One line per pattern: `<ids> #UTIL: <u> #TO: <to> #RU: <num>/<den>`.
pub fn format_pattern(p: &Pattern) -> String {
    let mut line = String::new();
    push_joined(&mut line, p.items.iter().map(|&i| i as i64));
    line.push_str(&format!(" #UTIL: {} #TO: {} #RU: {}", p.utility, p.period_total, p.relative_utility));
    line
}

pub fn write_patterns<W: Write>(patterns: &[Pattern], mut sink: W) -> io::Result<()> {
    for p in patterns {
        sink.write_all(format_pattern(p).as_bytes())?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}
