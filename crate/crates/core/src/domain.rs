//! Value types shared by every stage of the miner: money, exact ratios,
//! transactions and mined patterns.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::Serialize;

/// A signed amount in the smallest currency unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Money(pub i64);

impl Money {
    pub const ZERO: Money = Money(0);

    #[inline]
    pub fn value(self) -> i64 {
        self.0
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    #[inline]
    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// `max(self, 0)`.
    #[inline]
    pub fn clamp_non_negative(self) -> Money {
        Money(self.0.max(0))
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Add for Money {
    type Output = Money;
    #[inline]
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    #[inline]
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    #[inline]
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    #[inline]
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    #[inline]
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Mul<i64> for Money {
    type Output = Money;
    #[inline]
    fn mul(self, rhs: i64) -> Money {
        Money(self.0 * rhs)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

/// An exact signed ratio `numer / denom` with `denom > 0`.
///
/// The fraction is kept as constructed (not reduced) so that a pattern's
/// relative utility prints as `utility/period_total`. Ordering and equality
/// are mathematical: `1/2 == 2/4`. Comparisons cross-multiply in 128 bits.
#[derive(Debug, Clone, Copy)]
pub struct Rational {
    numer: i64,
    denom: i64,
}

impl Rational {
    pub const ZERO: Rational = Rational { numer: 0, denom: 1 };

    /// Panics if `denom <= 0`.
    pub fn new(numer: i64, denom: i64) -> Rational {
        assert!(denom > 0, "rational denominator must be positive, got {denom}");
        Rational { numer, denom }
    }

    pub fn from_money(numer: Money, denom: Money) -> Rational {
        Rational::new(numer.0, denom.0)
    }

    #[inline]
    pub fn numer(self) -> i64 {
        self.numer
    }

    #[inline]
    pub fn denom(self) -> i64 {
        self.denom
    }

    pub fn is_negative(self) -> bool {
        self.numer < 0
    }

    /// `value / scale >= self`, with `scale > 0`. This is the shape of every
    /// pruning test: an accumulated bound over a period total.
    #[inline]
    pub fn is_reached_by(self, value: Money, scale: Money) -> bool {
        debug_assert!(scale.0 > 0);
        (value.0 as i128) * (self.denom as i128) >= (self.numer as i128) * (scale.0 as i128)
    }

    pub fn to_f64(self) -> f64 {
        self.numer as f64 / self.denom as f64
    }
}

impl Default for Rational {
    fn default() -> Rational {
        Rational::ZERO
    }
}

/// Exact comparison of two ratios.
pub fn compare_rational(a: Rational, b: Rational) -> Ordering {
    let lhs = (a.numer as i128) * (b.denom as i128);
    let rhs = (b.numer as i128) * (a.denom as i128);
    lhs.cmp(&rhs)
}

impl PartialEq for Rational {
    fn eq(&self, other: &Rational) -> bool {
        compare_rational(*self, *other) == Ordering::Equal
    }
}

impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Rational) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Rational) -> Ordering {
        compare_rational(*self, *other)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

/// External item identifier as it appears in the input file.
pub type ItemId = u32;

/// Period label as it appears in the input file.
pub type Period = u32;

/// A distinct item and the sign of its external utility `p(i)`.
///
/// Input files carry `u(i, T)` rather than quantities and unit profits, so
/// only the sign of `p(i)` is recoverable; it is all the miner needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Item {
    pub external_id: ItemId,
    pub positive: bool,
}

/// `u(i, T) = p(i) * q(i, T)`.
#[inline]
pub fn item_utility(profit: Money, quantity: u32) -> Money {
    debug_assert!(quantity >= 1);
    profit * quantity as i64
}

/// One item occurrence inside a transaction. `utility` is `u(i, T)`, already
/// multiplied out; the quantity itself is not retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub item: ItemId,
    pub utility: Money,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub tid: usize,
    pub period: Period,
    pub entries: Vec<Entry>,
    /// Number of source transactions folded into this one.
    pub weight: u32,
}

impl Transaction {
    pub fn contains(&self, item: ItemId) -> bool {
        self.entries.iter().any(|e| e.item == item)
    }

    pub fn utility_of(&self, item: ItemId) -> Option<Money> {
        self.entries.iter().find(|e| e.item == item).map(|e| e.utility)
    }
}

/// `TU(T)`: the signed sum of every item utility in `T`.
pub fn transaction_utility(t: &Transaction) -> Money {
    t.entries.iter().map(|e| e.utility).sum()
}

/// `PTU(T)`: the sum over positive-profit items only.
pub fn positive_transaction_utility(t: &Transaction) -> Money {
    t.entries
        .iter()
        .filter(|e| e.utility.is_positive())
        .map(|e| e.utility)
        .sum()
}

/// A mined itemset together with the quantities its rank is derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    /// External ids, ascending.
    pub items: Vec<ItemId>,
    /// `u(X)`.
    pub utility: Money,
    /// `pi(X)`, ascending.
    pub periods: Vec<Period>,
    /// `to(X)`.
    pub period_total: Money,
    /// `ru(X) = u(X) / to(X)`.
    pub relative_utility: Rational,
}

impl Pattern {
    pub fn new(mut items: Vec<ItemId>, utility: Money, mut periods: Vec<Period>, period_total: Money) -> Pattern {
        items.sort_unstable();
        periods.sort_unstable();
        Pattern {
            items,
            utility,
            periods,
            period_total,
            relative_utility: Rational::from_money(utility, period_total),
        }
    }

    /// Field-by-field identity, including the unreduced ratio.
    pub fn identical(&self, other: &Pattern) -> bool {
        self == other
            && self.relative_utility.numer() == other.relative_utility.numer()
            && self.relative_utility.denom() == other.relative_utility.denom()
    }
}

/// Result order: relative utility descending, then fewer items, then
/// lexicographically smaller item list.
pub fn rank_order(a: &Pattern, b: &Pattern) -> Ordering {
    b.relative_utility
        .cmp(&a.relative_utility)
        .then_with(|| a.items.len().cmp(&b.items.len()))
        .then_with(|| a.items.cmp(&b.items))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(entries: &[(ItemId, i64)]) -> Transaction {
        Transaction {
            tid: 0,
            period: 0,
            entries: entries.iter().map(|&(item, u)| Entry { item, utility: Money(u) }).collect(),
            weight: 1,
        }
    }

    #[test]
    fn item_utility_multiplies_signed_profit() {
        assert_eq!(item_utility(Money(5), 1), Money(5));
        assert_eq!(item_utility(Money(-3), 2), Money(-6));
    }

    #[test]
    fn transaction_utilities() {
        // (b,1)(c,2)(d,12) with p = -3, -2, 3
        let t2 = tx(&[(2, -3), (3, -4), (4, 36)]);
        assert_eq!(positive_transaction_utility(&t2), Money(36));
        assert_eq!(transaction_utility(&t2), Money(29));
        let t5 = tx(&[(2, -3), (3, -4), (4, 36), (5, 10)]);
        assert_eq!(positive_transaction_utility(&t5), Money(46));
        let t1 = tx(&[(1, 5), (2, -6), (4, 12), (5, 10)]);
        assert_eq!(transaction_utility(&t1), Money(21));

        assert_eq!(transaction_utility(&tx(&[])), Money(0));
        assert_eq!(positive_transaction_utility(&tx(&[(7, -2), (8, -9)])), Money(0));
    }

    #[test]
    fn rational_comparisons() {
        assert_eq!(compare_rational(Rational::new(28, 154), Rational::new(4, 85)), Ordering::Greater);
        assert_eq!(compare_rational(Rational::new(1, 2), Rational::new(2, 4)), Ordering::Equal);
        assert_eq!(compare_rational(Rational::new(-5, 10), Rational::ZERO), Ordering::Less);
        assert_eq!(Rational::new(28, 154).to_string(), "28/154");
    }

    #[test]
    fn rational_extremes_do_not_overflow() {
        let big = Rational::new(i64::MAX, 1);
        let tiny = Rational::new(1, i64::MAX);
        assert!(big > tiny);
        assert!(Rational::new(i64::MIN + 1, 1) < Rational::new(-1, i64::MAX));
        assert_eq!(Rational::new(i64::MAX - 1, i64::MAX), Rational::new(i64::MAX - 1, i64::MAX));
    }

    #[test]
    #[should_panic]
    fn rational_rejects_zero_denominator() {
        let _ = Rational::new(1, 0);
    }

    #[test]
    fn threshold_test_is_inclusive() {
        let t = Rational::new(1, 3);
        assert!(t.is_reached_by(Money(10), Money(30)));
        assert!(!t.is_reached_by(Money(9), Money(30)));
    }

    #[test]
    fn rank_order_breaks_ties_by_length_then_items() {
        let p = |items: Vec<ItemId>, u: i64, to: i64| Pattern::new(items, Money(u), vec![0], Money(to));
        let mut v = [p(vec![1, 2], 1, 2), p(vec![3], 2, 4), p(vec![1, 3], 1, 2), p(vec![4], 3, 4)];
        v.sort_by(rank_order);
        let items: Vec<_> = v.iter().map(|p| p.items.clone()).collect();
        assert_eq!(items, vec![vec![4], vec![3], vec![1, 2], vec![1, 3]]);
    }
}
