//! Pseudo-projection of the working database onto a prefix itemset.
//!
//! A projected database is a list of views. Each view is a cursor into a
//! transaction's remaining entries (those after the prefix's last item in the
//! processing order) together with `u(prefix, T)`. Views borrow the parent's
//! storage; only views produced by merging own their entries.

use crate::domain::Money;
use crate::preprocess::{DenseEntry, WorkingDatabase};

#[derive(Debug, Clone, Copy)]
enum Suffix<'a> {
    Borrowed(&'a [DenseEntry]),
    Owned { start: u32, len: u32 },
}

#[derive(Debug, Clone, Copy)]
struct View<'a> {
    suffix: Suffix<'a>,
    prefix_utility: Money,
    period: u32,
    weight: u32,
}

/// Read-only handle on one view.
#[derive(Debug, Clone, Copy)]
pub struct ViewRef<'v> {
    /// Entries after the prefix, sorted by dense index.
    pub remaining: &'v [DenseEntry],
    /// `u(prefix, T)` (summed over merged transactions).
    pub prefix_utility: Money,
    pub period: u32,
    pub weight: u32,
}

#[derive(Debug, Clone)]
pub struct ProjectedDatabase<'a> {
    views: Vec<View<'a>>,
    buffer: Vec<DenseEntry>,
}

/// The result of extending a prefix by one item.
#[derive(Debug)]
pub struct Projection<'p> {
    /// Views with a non-empty remainder; views that end at the new item only
    /// contribute to `utility` and `period_total`.
    pub database: ProjectedDatabase<'p>,
    /// `u(prefix ∪ {item})`.
    pub utility: Money,
    /// `to(prefix ∪ {item})` against the frozen period totals.
    pub period_total: Money,
    /// Period indices of `pi(prefix ∪ {item})`, ascending.
    pub periods: Vec<u32>,
    pub merges: usize,
}

impl<'a> ProjectedDatabase<'a> {
    /// The projection on the empty prefix: every working transaction in full.
    pub fn root(wdb: &'a WorkingDatabase) -> ProjectedDatabase<'a> {
        let views = wdb
            .transactions()
            .iter()
            .map(|t| View {
                suffix: Suffix::Borrowed(wdb.entries_of(t)),
                prefix_utility: Money::ZERO,
                period: t.period,
                weight: t.weight,
            })
            .collect();
        ProjectedDatabase { views, buffer: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    #[inline]
    fn remaining<'s>(&'s self, v: &View<'a>) -> &'s [DenseEntry] {
        match v.suffix {
            Suffix::Borrowed(s) => s,
            Suffix::Owned { start, len } => &self.buffer[start as usize..(start + len) as usize],
        }
    }

    pub fn views(&self) -> impl Iterator<Item = ViewRef<'_>> + '_ {
        self.views.iter().map(move |v| ViewRef {
            remaining: self.remaining(v),
            prefix_utility: v.prefix_utility,
            period: v.period,
            weight: v.weight,
        })
    }

    /// Extends the prefix by `item`, which must come after every prefix item
    /// in the processing order. `pto` is indexed by period index.
    pub fn project(&self, item: u32, pto: &[Money], merge: bool) -> Projection<'_> {
        let mut views = Vec::new();
        let mut utility = Money::ZERO;
        let mut period_total = Money::ZERO;
        let mut periods: Vec<u32> = Vec::new();

        for v in &self.views {
            let rest = self.remaining(v);
            let Ok(pos) = rest.binary_search_by_key(&item, |e| e.item) else {
                continue;
            };
            let prefix_utility = v.prefix_utility + rest[pos].utility;
            utility += prefix_utility;
            // views are grouped by period, so a period change is a new period
            if periods.last() != Some(&v.period) {
                periods.push(v.period);
                period_total += pto[v.period as usize];
            }
            let tail = &rest[pos + 1..];
            if !tail.is_empty() {
                views.push(View {
                    suffix: Suffix::Borrowed(tail),
                    prefix_utility,
                    period: v.period,
                    weight: v.weight,
                });
            }
        }

        let mut database = ProjectedDatabase { views, buffer: Vec::new() };
        let merges = if merge { database.merge_adjacent() } else { 0 };
        Projection { database, utility, period_total, periods, merges }
    }

    /// Fuses adjacent views of the same period whose remaining entries have
    /// identical item sequences: utilities are summed element-wise, as are
    /// prefix utilities and weights. Returns the number of views folded away.
    ///
    /// Relies on the backward lexicographic ordering of the working database,
    /// which keeps identical remainders adjacent in every projection.
    pub fn merge_adjacent(&mut self) -> usize {
        if self.views.len() < 2 {
            return 0;
        }
        let mut merged = 0;
        let mut write = 0;
        for read in 1..self.views.len() {
            let cur = self.views[read];
            let prev = self.views[write];
            let same = prev.period == cur.period && {
                let a = self.remaining(&prev);
                let b = self.remaining(&cur);
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.item == y.item)
            };
            if !same {
                write += 1;
                self.views[write] = cur;
                continue;
            }
            merged += 1;
            let (start, len) = match prev.suffix {
                Suffix::Owned { start, len } => (start, len),
                Suffix::Borrowed(s) => {
                    let start = self.buffer.len() as u32;
                    self.buffer.extend_from_slice(s);
                    (start, s.len() as u32)
                }
            };
            match cur.suffix {
                Suffix::Borrowed(src) => {
                    for (dst, s) in self.buffer[start as usize..(start + len) as usize].iter_mut().zip(src) {
                        dst.utility += s.utility;
                    }
                }
                Suffix::Owned { start: src, .. } => {
                    for j in 0..len as usize {
                        let u = self.buffer[src as usize + j].utility;
                        self.buffer[start as usize + j].utility += u;
                    }
                }
            }
            self.views[write] = View {
                suffix: Suffix::Owned { start, len },
                prefix_utility: prev.prefix_utility + cur.prefix_utility,
                period: prev.period,
                weight: prev.weight + cur.weight,
            };
        }
        self.views.truncate(write + 1);
        merged
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::parse_database_str;
    use crate::preprocess::{build_item_order, build_working_database, compute_period_twu};

    fn working(text: &str, merge: bool) -> WorkingDatabase {
        let db = parse_database_str(text).unwrap();
        let twu = compute_period_twu(&db);
        let ids: Vec<u32> = db.items().iter().map(|i| i.external_id).collect();
        let order = build_item_order(&twu, db.items(), &ids);
        build_working_database(&db, &order, merge)
    }

    #[test]
    fn projection_accumulates_prefix_utility_and_periods() {
        // TWU: 1 -> 10, 2 -> 11, 3 -> 15, so the order is 1, 2, 3.
        let wdb = working("1 2 3:6:1 2 3:0\n1 3:4:1 3:1\n2 3:5:2 3:1\n", false);
        let order = wdb.order();
        let one = order.dense_index(1).unwrap();
        let three = order.dense_index(3).unwrap();
        let root = ProjectedDatabase::root(&wdb);
        let p1 = root.project(one, wdb.pto(), false);
        assert_eq!(p1.utility, Money(2));
        assert_eq!(p1.periods.len(), 2);
        assert_eq!(p1.period_total, Money(6 + 9));
        let p13 = p1.database.project(three, wdb.pto(), false);
        assert_eq!(p13.utility, Money(1 + 3 + 1 + 3));
        assert!(p13.database.is_empty());
    }

    #[test]
    fn absent_item_gives_empty_projection() {
        let wdb = working("1 2:3:1 2:0\n", false);
        let root = ProjectedDatabase::root(&wdb);
        let p = root.project(99, wdb.pto(), true);
        assert!(p.database.is_empty());
        assert_eq!(p.utility, Money::ZERO);
        assert!(p.periods.is_empty());
    }

    #[test]
    fn identical_remainders_merge() {
        // All three contain 1 followed by (3, 4) in the processing order.
        let text = "1 3 4:6:1 2 3:2\n1 2 3 4:10:1 2 3 4:2\n1 3 4:9:2 3 4:2\n";
        let wdb = working(text, false);
        let one = wdb.order().dense_index(1).unwrap();
        let root = ProjectedDatabase::root(&wdb);
        let plain = root.project(one, wdb.pto(), false);
        let merged = root.project(one, wdb.pto(), true);
        assert_eq!(plain.utility, merged.utility);
        assert!(merged.merges >= 1);
        assert!(merged.database.len() < plain.database.len());
        let total_weight: u32 = merged.database.views().map(|v| v.weight).sum();
        assert_eq!(total_weight as usize, plain.database.len());
        let sum = |pd: &ProjectedDatabase| -> i64 {
            pd.views().map(|v| v.prefix_utility.0 + v.remaining.iter().map(|e| e.utility.0).sum::<i64>()).sum()
        };
        assert_eq!(sum(&plain.database), sum(&merged.database));
    }

    #[test]
    fn distinct_remainders_are_untouched() {
        let wdb = working("1 2:3:1 2:0\n1 3:4:1 3:0\n", false);
        let mut root = ProjectedDatabase::root(&wdb);
        assert_eq!(root.merge_adjacent(), 0);
        assert_eq!(root.len(), 2);
    }
}
