//! Everything that happens before the depth-first search: per-period TWU,
//! the single-item threshold raise, the processing order of items, and the
//! trimmed, sorted, merged working database.

use std::collections::HashMap;

use crate::bounds::{BoundArray, BoundKind};
use crate::dataset_io::OnShelfDatabase;
use crate::domain::{positive_transaction_utility, Item, ItemId, Money, Period, Rational};

/// The processing order of retained items.
///
/// Positive-profit items come first, then negative ones; within each group
/// items are sorted by ascending total TWU, ties by external id. An item's
/// dense index is its position in this order.
#[derive(Debug, Clone)]
pub struct ItemOrder {
    items: Vec<ItemId>,
    boundary: usize,
    twu: Vec<Money>,
    dense: HashMap<ItemId, u32>,
}

impl ItemOrder {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Dense index of the first negative item (== number of positive items).
    pub fn boundary(&self) -> usize {
        self.boundary
    }

    /// External ids in processing order.
    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn external(&self, dense: u32) -> ItemId {
        self.items[dense as usize]
    }

    pub fn dense_index(&self, item: ItemId) -> Option<u32> {
        self.dense.get(&item).copied()
    }

    #[inline]
    pub fn is_positive(&self, dense: u32) -> bool {
        (dense as usize) < self.boundary
    }

    /// Total TWU (summed over periods) of the item at `dense`.
    pub fn total_twu(&self, dense: u32) -> Money {
        self.twu[dense as usize]
    }
}

/// `U[h][i] = TWU(i, h)`, with columns indexed by [`OnShelfDatabase::item_slot`]
/// and rows by [`OnShelfDatabase::period_slot`].
pub fn compute_period_twu(db: &OnShelfDatabase) -> BoundArray {
    let mut twu = BoundArray::new(BoundKind::Twu, db.period_totals().len(), db.items().len());
    for t in db.transactions() {
        let h = db.period_slot(t.period).expect("period of a parsed transaction");
        let ptu = positive_transaction_utility(t);
        for e in &t.entries {
            let slot = db.item_slot(e.item).expect("item of a parsed transaction");
            twu.add(slot, h, ptu);
        }
    }
    twu
}

/// The single-item threshold raise.
///
/// Computes `ru({i})` for every item. If at least `k` of them are `>= 0`,
/// returns the `k`-th largest; otherwise returns `0`.
pub fn riu_threshold(db: &OnShelfDatabase, k: usize) -> Rational {
    assert!(k >= 1, "k must be at least 1");
    let n_items = db.items().len();
    let mut utility = vec![Money::ZERO; n_items];
    let mut periods: Vec<Vec<usize>> = vec![Vec::new(); n_items];
    for t in db.transactions() {
        let h = db.period_slot(t.period).expect("period of a parsed transaction");
        for e in &t.entries {
            let slot = db.item_slot(e.item).expect("item of a parsed transaction");
            utility[slot] += e.utility;
            periods[slot].push(h);
        }
    }
    let pto = db.period_totals();
    let mut ratios: Vec<Rational> = utility
        .iter()
        .zip(periods.iter_mut())
        .map(|(&u, ps)| {
            ps.sort_unstable();
            ps.dedup();
            let to: Money = ps.iter().map(|&h| pto[h].1).sum();
            Rational::from_money(u, to)
        })
        .filter(|r| !r.is_negative())
        .collect();
    if ratios.len() < k {
        return Rational::ZERO;
    }
    ratios.sort_unstable_by(|a, b| b.cmp(a));
    ratios[k - 1]
}

/// Positive items that reach `interutil` in at least one period when their
/// TWU is used as the bound. At the root the local utility of an item equals
/// its TWU.
pub fn initial_secondary(
    twu: &BoundArray,
    pto: &[(Period, Money)],
    items: &[Item],
    interutil: Rational,
) -> Vec<ItemId> {
    let totals: Vec<Money> = pto.iter().map(|&(_, m)| m).collect();
    items
        .iter()
        .enumerate()
        .filter(|(slot, item)| {
            item.positive && twu.occurs(*slot) && twu.any_period_reaches(*slot, &totals, interutil)
        })
        .map(|(_, item)| item.external_id)
        .collect()
}

/// Negative items that share a transaction with at least one retained
/// positive item. Negative items anywhere else can never be part of a pattern
/// with non-negative relative utility.
pub fn negative_kept(db: &OnShelfDatabase, secondary: &[ItemId]) -> Vec<ItemId> {
    let mut retained = vec![false; db.items().len()];
    for &i in secondary {
        if let Some(slot) = db.item_slot(i) {
            retained[slot] = true;
        }
    }
    let mut kept = vec![false; db.items().len()];
    for t in db.transactions() {
        let slots: Vec<usize> = t.entries.iter().filter_map(|e| db.item_slot(e.item)).collect();
        if slots.iter().any(|&s| retained[s]) {
            for s in slots {
                if !db.items()[s].positive {
                    kept[s] = true;
                }
            }
        }
    }
    db.items()
        .iter()
        .enumerate()
        .filter(|&(s, _)| kept[s])
        .map(|(_, item)| item.external_id)
        .collect()
}

/// Orders `retained` items: positives before negatives, each group by
/// ascending total TWU, ties by ascending external id.
pub fn build_item_order(twu: &BoundArray, items: &[Item], retained: &[ItemId]) -> ItemOrder {
    let mut keyed: Vec<(bool, Money, ItemId)> = retained
        .iter()
        .filter_map(|&id| {
            let slot = items.binary_search_by_key(&id, |i| i.external_id).ok()?;
            Some((!items[slot].positive, twu.column_total(slot), id))
        })
        .collect();
    keyed.sort_unstable();
    keyed.dedup();
    let boundary = keyed.iter().take_while(|(neg, _, _)| !neg).count();
    let dense = keyed.iter().enumerate().map(|(i, &(_, _, id))| (id, i as u32)).collect();
    ItemOrder {
        items: keyed.iter().map(|&(_, _, id)| id).collect(),
        boundary,
        twu: keyed.iter().map(|&(_, t, _)| t).collect(),
        dense,
    }
}

/// An item occurrence in the working database, keyed by dense index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseEntry {
    pub item: u32,
    pub utility: Money,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkingTransaction {
    start: u32,
    len: u32,
    /// Index into the working database's period table.
    pub period: u32,
    pub weight: u32,
}

/// Trimmed, sorted, merged transactions with dense item indices.
///
/// Transactions are grouped by period and, within a period, ordered by the
/// backward lexicographic order on their dense item sequences, so identical
/// transactions (and identical suffixes of transactions that contain the same
/// item) are adjacent.
#[derive(Debug, Clone)]
pub struct WorkingDatabase {
    entries: Vec<DenseEntry>,
    transactions: Vec<WorkingTransaction>,
    periods: Vec<Period>,
    pto: Vec<Money>,
    order: ItemOrder,
    merges: usize,
}

impl WorkingDatabase {
    pub fn transactions(&self) -> &[WorkingTransaction] {
        &self.transactions
    }

    pub fn entries_of(&self, t: &WorkingTransaction) -> &[DenseEntry] {
        &self.entries[t.start as usize..(t.start + t.len) as usize]
    }

    pub fn order(&self) -> &ItemOrder {
        &self.order
    }

    /// Period labels, indexed like [`pto`](Self::pto).
    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    /// Period totals frozen from the source database (not recomputed after
    /// trimming).
    pub fn pto(&self) -> &[Money] {
        &self.pto
    }

    /// Number of transactions folded away by merging identical ones.
    pub fn merges(&self) -> usize {
        self.merges
    }
}

/// Backward lexicographic comparison of two dense item sequences.
///
/// The transaction with the larger last item is larger; on equality the
/// previous items decide; if one runs out first, the longer one is larger.
pub fn compare_backward(a: &[DenseEntry], b: &[DenseEntry]) -> std::cmp::Ordering {
    a.iter().rev().map(|e| e.item).cmp(b.iter().rev().map(|e| e.item))
}

fn same_items(a: &[DenseEntry], b: &[DenseEntry]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.item == y.item)
}

/// Trims every item not in `order`, drops transactions with no positive item
/// left, sorts, and (when `merge` is set) merges identical transactions
/// within each period.
pub fn build_working_database(db: &OnShelfDatabase, order: &ItemOrder, merge: bool) -> WorkingDatabase {
    let periods = db.periods();
    let pto: Vec<Money> = db.period_totals().iter().map(|&(_, m)| m).collect();

    let mut staged: Vec<(u32, usize, Vec<DenseEntry>)> = Vec::with_capacity(db.transactions().len());
    for t in db.transactions() {
        let mut row: Vec<DenseEntry> = t
            .entries
            .iter()
            .filter_map(|e| order.dense_index(e.item).map(|item| DenseEntry { item, utility: e.utility }))
            .collect();
        if !row.iter().any(|e| order.is_positive(e.item)) {
            continue;
        }
        row.sort_unstable_by_key(|e| e.item);
        let h = db.period_slot(t.period).expect("period of a parsed transaction") as u32;
        staged.push((h, t.tid, row));
    }
    staged.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| compare_backward(&a.2, &b.2)).then(a.1.cmp(&b.1)));

    let mut entries = Vec::with_capacity(staged.iter().map(|s| s.2.len()).sum());
    let mut transactions: Vec<WorkingTransaction> = Vec::with_capacity(staged.len());
    let mut merges = 0;
    for (h, _, row) in staged {
        if merge {
            if let Some(last) = transactions.last_mut() {
                let tail = &mut entries[last.start as usize..];
                if last.period == h && same_items(tail, &row) {
                    for (dst, src) in tail.iter_mut().zip(&row) {
                        dst.utility += src.utility;
                    }
                    last.weight += 1;
                    merges += 1;
                    continue;
                }
            }
        }
        transactions.push(WorkingTransaction {
            start: entries.len() as u32,
            len: row.len() as u32,
            period: h,
            weight: 1,
        });
        entries.extend_from_slice(&row);
    }

    WorkingDatabase { entries, transactions, periods, pto, order: order.clone(), merges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::parse_database_str;

    fn running_example() -> OnShelfDatabase {
        // a=1 b=2 c=3 d=4 e=5; p = 5, -3, -2, 3, 10
        let profits = [(1, 5), (2, -3), (3, -2), (4, 3), (5, 10)];
        let rows: Vec<(Period, &[(ItemId, u32)])> = vec![
            (1, &[(1, 1), (2, 2), (4, 4), (5, 1)]),
            (0, &[(2, 1), (3, 2), (4, 12)]),
            (1, &[(1, 3), (4, 10)]),
            (2, &[(1, 1), (5, 1)]),
            (2, &[(2, 1), (3, 2), (4, 12), (5, 1)]),
            (2, &[(2, 1), (3, 1), (5, 2)]),
            (0, &[(1, 2)]),
            (1, &[(2, 1), (3, 1), (4, 8)]),
        ];
        OnShelfDatabase::from_quantities(&profits, &rows).unwrap()
    }

    #[test]
    fn period_twu_of_running_example() {
        let db = running_example();
        let twu = compute_period_twu(&db);
        let c = db.item_slot(3).unwrap();
        let e = db.item_slot(5).unwrap();
        let p2 = db.period_slot(2).unwrap();
        assert_eq!(twu.get(p2, c), Money(66));
        // T_4 also contains e
        assert_eq!(twu.get(p2, e), Money(15 + 66));
        // e occurs in period 1 only in T_1
        assert_eq!(twu.get(db.period_slot(1).unwrap(), db.item_slot(5).unwrap()), Money(27));
        // b: PTU of T1, T2, T5, T6, T8 = 27 + 36 + 46 + 20 + 24
        assert_eq!(twu.column_total(db.item_slot(2).unwrap()), Money(153));
    }

    #[test]
    fn riu_matches_enumerated_single_items() {
        let db = running_example();
        // ru of singletons by direct summation:
        // a: 5+15+5+10 = 35 over pto(0)+pto(1)+pto(2) = 39+85+69 = 193
        // d: 12+36+30+36+24 = 138 over 193
        // e: 10+10+10+20 = 50 over pto(1)+pto(2) = 154
        // b, c negative.
        assert_eq!(riu_threshold(&db, 1), Rational::new(138, 193));
        assert_eq!(riu_threshold(&db, 2), Rational::new(50, 154));
        assert_eq!(riu_threshold(&db, 3), Rational::new(35, 193));
        assert_eq!(riu_threshold(&db, 4), Rational::ZERO);
        assert_eq!(riu_threshold(&db, 100), Rational::ZERO);
    }

    #[test]
    fn riu_singleton() {
        let db = parse_database_str("7:5:5:0\n").unwrap();
        assert_eq!(riu_threshold(&db, 1), Rational::new(5, 5));
    }

    #[test]
    fn item_order_positive_first_then_twu() {
        let db = parse_database_str("1 2:17:10 7:0\n3:-1:-1:0\n3 4:4:-1 5:1\n").unwrap();
        let twu = compute_period_twu(&db);
        let order = build_item_order(&twu, db.items(), &[1, 2, 3, 4]);
        // TWU: 1 -> 17, 2 -> 17, 4 -> 5; 3 negative
        assert_eq!(order.items(), &[4, 1, 2, 3]);
        assert_eq!(order.boundary(), 3);
        assert!(order.is_positive(2));
        assert!(!order.is_positive(3));
    }

    #[test]
    fn initial_secondary_filters_by_period_ratio() {
        // item 1 only in period 0 (pto 10), item 2 only in period 1 (pto 100)
        let db = parse_database_str("1:10:10:0\n2:5:5:1\n3:95:95:1\n").unwrap();
        let twu = compute_period_twu(&db);
        let all = initial_secondary(&twu, db.period_totals(), db.items(), Rational::ZERO);
        assert_eq!(all, vec![1, 2, 3]);
        let some = initial_secondary(&twu, db.period_totals(), db.items(), Rational::new(1, 10));
        assert_eq!(some, vec![1, 3]);
    }

    #[test]
    fn working_database_merges_identical_transactions() {
        let db = parse_database_str("1 2:5:2 3:0\n1 2:9:4 5:0\n1 2:9:4 5:1\n").unwrap();
        let twu = compute_period_twu(&db);
        let order = build_item_order(&twu, db.items(), &[1, 2]);
        let wdb = build_working_database(&db, &order, true);
        assert_eq!(wdb.transactions().len(), 2);
        assert_eq!(wdb.merges(), 1);
        let first = &wdb.transactions()[0];
        assert_eq!(first.weight, 2);
        let utils: Vec<i64> = wdb.entries_of(first).iter().map(|e| e.utility.0).collect();
        assert_eq!(utils.iter().sum::<i64>(), 14);
        assert_eq!(wdb.pto(), &[Money(14), Money(9)]);

        let unmerged = build_working_database(&db, &order, false);
        assert_eq!(unmerged.transactions().len(), 3);
        assert_eq!(unmerged.merges(), 0);
    }

    #[test]
    fn backward_order_puts_longer_after_prefix() {
        let e = |items: &[u32]| items.iter().map(|&item| DenseEntry { item, utility: Money(1) }).collect::<Vec<_>>();
        use std::cmp::Ordering::*;
        assert_eq!(compare_backward(&e(&[0, 1]), &e(&[0, 1, 2])), Less);
        assert_eq!(compare_backward(&e(&[1, 2]), &e(&[0, 1, 2])), Less);
        assert_eq!(compare_backward(&e(&[0, 3]), &e(&[1, 2])), Greater);
        assert_eq!(compare_backward(&e(&[0, 3]), &e(&[0, 3])), Equal);
    }

    #[test]
    fn trimming_drops_transactions_without_positive_items() {
        // item 9 is negative and only occurs with item 2, which is trimmed.
        let db = parse_database_str("1:10:10:0\n2 9:1:2 -1:0\n").unwrap();
        let twu = compute_period_twu(&db);
        let secondary = vec![1];
        let negs = negative_kept(&db, &secondary);
        assert!(negs.is_empty());
        let order = build_item_order(&twu, db.items(), &secondary);
        let wdb = build_working_database(&db, &order, true);
        assert_eq!(wdb.transactions().len(), 1);
        assert_eq!(wdb.pto(), &[Money(11)]);
    }
}
