//! Period-by-item accumulators and the upper bounds computed with them.
//!
//! Three bounds share one array type: TWU at the root, subtree utility
//! `su(α, z, h)` and local utility `lu(α, z, h)` for every node. Each is
//! accumulated in a single pass over a projected database. Per-view
//! contributions are clamped at zero and remaining utility only counts
//! positive-profit candidate items; with negative items on either side of the
//! prefix this is what keeps both quantities upper bounds of every extension
//! they are used to prune.

use crate::domain::{Money, Rational};
use crate::projection::ProjectedDatabase;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Twu,
    Subtree,
    Local,
}

/// A `periods x items` matrix of money accumulators.
///
/// Only columns that received a value since the last [`reset`](Self::reset)
/// are non-zero; they are listed by [`touched`](Self::touched).
#[derive(Debug, Clone)]
pub struct BoundArray {
    kind: BoundKind,
    n_periods: usize,
    n_items: usize,
    // item-major: cells[item * n_periods + period]
    cells: Vec<Money>,
    touched: Vec<u32>,
    is_touched: Vec<bool>,
}

impl BoundArray {
    pub fn new(kind: BoundKind, n_periods: usize, n_items: usize) -> BoundArray {
        BoundArray {
            kind,
            n_periods,
            n_items,
            cells: vec![Money::ZERO; n_periods * n_items],
            touched: Vec::new(),
            is_touched: vec![false; n_items],
        }
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Zeroes every cell.
    pub fn reset(&mut self) {
        for &item in &self.touched {
            let base = item as usize * self.n_periods;
            self.cells[base..base + self.n_periods].fill(Money::ZERO);
            self.is_touched[item as usize] = false;
        }
        self.touched.clear();
    }

    #[inline]
    pub fn add(&mut self, item: usize, period: usize, value: Money) {
        if !self.is_touched[item] {
            self.is_touched[item] = true;
            self.touched.push(item as u32);
        }
        self.cells[item * self.n_periods + period] += value;
    }

    #[inline]
    pub fn get(&self, period: usize, item: usize) -> Money {
        self.cells[item * self.n_periods + period]
    }

    pub fn column(&self, item: usize) -> &[Money] {
        &self.cells[item * self.n_periods..(item + 1) * self.n_periods]
    }

    pub fn column_total(&self, item: usize) -> Money {
        self.column(item).iter().sum()
    }

    /// Whether `item` received any contribution since the last reset.
    pub fn occurs(&self, item: usize) -> bool {
        self.is_touched[item]
    }

    /// Items with a contribution, in first-touch order.
    pub fn touched(&self) -> &[u32] {
        &self.touched
    }

    /// Touched items in ascending index order.
    pub fn sorted_touched(&self) -> Vec<u32> {
        let mut v = self.touched.clone();
        v.sort_unstable();
        v
    }

    /// `∃h: U[h][item] / pto(h) >= interutil`.
    #[inline]
    pub fn any_period_reaches(&self, item: usize, pto: &[Money], interutil: Rational) -> bool {
        self.column(item).iter().zip(pto).any(|(&v, &total)| interutil.is_reached_by(v, total))
    }
}

/// Accumulates subtree and/or local utilities of the projected database's
/// prefix for every candidate item, after resetting the given arrays.
///
/// For a view with prefix utility `u(α, T)`, remaining candidate entries
/// `z_1 < ... < z_m` and positive candidate remainder `R(T)`:
///
/// * `su[h][z_j] += max(0, u(α,T) + u(z_j,T) + Σ_{i>j, p(z_i)>0} u(z_i,T))`
/// * `lu[h][z_j] += max(0, u(α,T) + R(T))`
///
/// Non-candidate entries are skipped entirely; they neither receive a value
/// nor count towards any remainder.
pub fn accumulate<F>(
    pd: &ProjectedDatabase<'_>,
    is_candidate: F,
    mut su: Option<&mut BoundArray>,
    mut lu: Option<&mut BoundArray>,
) where
    F: Fn(u32) -> bool,
{
    if let Some(a) = su.as_deref_mut() {
        a.reset();
    }
    if let Some(a) = lu.as_deref_mut() {
        a.reset();
    }
    for view in pd.views() {
        let h = view.period as usize;
        let prefix = view.prefix_utility;
        let local = lu.is_some().then(|| {
            let remainder: Money = view
                .remaining
                .iter()
                .filter(|e| e.utility.is_positive() && is_candidate(e.item))
                .map(|e| e.utility)
                .sum();
            (prefix + remainder).clamp_non_negative()
        });
        let mut after = Money::ZERO;
        for e in view.remaining.iter().rev() {
            if !is_candidate(e.item) {
                continue;
            }
            if let Some(a) = su.as_deref_mut() {
                a.add(e.item as usize, h, (prefix + e.utility + after).clamp_non_negative());
            }
            if let (Some(a), Some(l)) = (lu.as_deref_mut(), local) {
                a.add(e.item as usize, h, l);
            }
            if e.utility.is_positive() {
                after += e.utility;
            }
        }
    }
}

/// Subtree utilities of the prefix of `pd` for every candidate.
pub fn subtree_utilities<F: Fn(u32) -> bool>(pd: &ProjectedDatabase<'_>, is_candidate: F, out: &mut BoundArray) {
    accumulate(pd, is_candidate, Some(out), None);
}

/// Local utilities of the prefix of `pd` for every candidate.
pub fn local_utilities<F: Fn(u32) -> bool>(pd: &ProjectedDatabase<'_>, is_candidate: F, out: &mut BoundArray) {
    accumulate(pd, is_candidate, None, Some(out));
}

/// Candidates of the next level, both ascending by dense index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Candidates {
    /// Items whose subtree is explored.
    pub primary: Vec<u32>,
    /// Items that may still appear in some extension.
    pub secondary: Vec<u32>,
}

/// `Secondary = {z : ∃h lu/pto(h) >= interutil}` and
/// `Primary = {z ∈ Secondary : ∃h su/pto(h) >= interutil}` over the items
/// that occur in the arrays. Disabling a test keeps every occurring item.
pub fn primary_secondary(
    su: &BoundArray,
    lu: &BoundArray,
    pto: &[Money],
    interutil: Rational,
    su_prune: bool,
    lu_prune: bool,
) -> Candidates {
    let mut out = Candidates::default();
    for z in lu.sorted_touched() {
        let zi = z as usize;
        if lu_prune && !lu.any_period_reaches(zi, pto, interutil) {
            continue;
        }
        out.secondary.push(z);
        if !su_prune || su.any_period_reaches(zi, pto, interutil) {
            out.primary.push(z);
        }
    }
    out
}

/// Negative items whose subtree utility reaches `interutil` in some period.
/// `su_neg` must have been accumulated over negative candidates only.
pub fn negative_candidates(su_neg: &BoundArray, pto: &[Money], interutil: Rational, su_prune: bool) -> Vec<u32> {
    su_neg
        .sorted_touched()
        .into_iter()
        .filter(|&n| !su_prune || su_neg.any_period_reaches(n as usize, pto, interutil))
        .collect()
}
