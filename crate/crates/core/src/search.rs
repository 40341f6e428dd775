//! Depth-first top-k search over the set-enumeration tree of positive items,
//! with negative items appended only below positive prefixes.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{accumulate, negative_candidates, primary_secondary, subtree_utilities, BoundArray, BoundKind};
use crate::dataset_io::OnShelfDatabase;
use crate::domain::{rank_order, ItemId, Money, Pattern, Rational};
use crate::preprocess::{
    build_item_order, build_working_database, compute_period_twu, initial_secondary, negative_kept, riu_threshold,
    WorkingDatabase,
};
use crate::projection::ProjectedDatabase;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MineError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("mining did not finish within the time limit")]
    Timeout,
}

/// Engine switches. The defaults enable every optimisation; the pruning flags
/// exist for ablation and never change the result.
#[derive(Debug, Clone, Copy)]
pub struct MineOptions {
    pub merge: bool,
    pub su_prune: bool,
    pub lu_prune: bool,
    pub parallel: bool,
    pub time_limit: Option<Duration>,
}

impl Default for MineOptions {
    fn default() -> MineOptions {
        MineOptions { merge: true, su_prune: true, lu_prune: true, parallel: false, time_limit: None }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    /// Itemsets whose relative utility was computed.
    pub candidates_evaluated: u64,
    pub patterns_emitted: u64,
    pub projections_built: u64,
    /// Transactions folded at build time plus views folded during projection.
    pub merges_performed: u64,
    /// Size of the largest itemset evaluated.
    pub max_depth: usize,
    pub elapsed: Duration,
    /// Every value `interutil` took, in order, starting from the initial one.
    /// Empty in parallel mode, where there is no single sequence.
    pub interutil_trace: Vec<Rational>,
    pub final_interutil: Rational,
}

impl SearchStats {
    fn absorb(&mut self, other: &SearchStats) {
        self.candidates_evaluated += other.candidates_evaluated;
        self.projections_built += other.projections_built;
        self.merges_performed += other.merges_performed;
        self.max_depth = self.max_depth.max(other.max_depth);
    }
}

/// Keeps the best `k` patterns seen so far under [`rank_order`].
#[derive(Debug, Clone)]
pub struct TopKCollector {
    capacity: usize,
    // sorted best-first
    patterns: Vec<Pattern>,
    interutil: Rational,
    trace: Vec<Rational>,
}

impl TopKCollector {
    pub fn new(capacity: usize, interutil: Rational) -> TopKCollector {
        assert!(capacity >= 1);
        TopKCollector { capacity, patterns: Vec::with_capacity(capacity + 1), interutil, trace: vec![interutil] }
    }

    pub fn interutil(&self) -> Rational {
        self.interutil
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn trace(&self) -> &[Rational] {
        &self.trace
    }

    pub fn into_patterns(self) -> Vec<Pattern> {
        self.patterns
    }

    /// Whether a pattern with relative utility `ru` could be accepted.
    #[inline]
    pub fn admits(&self, ru: Rational) -> bool {
        ru >= self.interutil && !ru.is_negative()
    }

    /// Raises `interutil` to `floor` if that is higher.
    pub fn raise_to(&mut self, floor: Rational) {
        if floor > self.interutil {
            self.interutil = floor;
            self.trace.push(floor);
        }
    }

    pub fn offer(&mut self, pattern: Pattern) -> bool {
        if !self.admits(pattern.relative_utility) {
            return false;
        }
        if self.patterns.len() == self.capacity
            && rank_order(&pattern, self.patterns.last().expect("full collector")) != std::cmp::Ordering::Less
        {
            return false;
        }
        let pos = self.patterns.partition_point(|p| rank_order(p, &pattern) == std::cmp::Ordering::Less);
        self.patterns.insert(pos, pattern);
        self.patterns.truncate(self.capacity);
        if self.patterns.len() == self.capacity {
            let kth = self.patterns[self.capacity - 1].relative_utility;
            self.raise_to(kth);
        }
        true
    }
}

/// Mines the `k` itemsets of highest relative utility.
pub fn mine_top_k(db: &OnShelfDatabase, k: usize, options: &MineOptions) -> Result<(Vec<Pattern>, SearchStats), MineError> {
    if k == 0 {
        return Err(MineError::InvalidK);
    }
    let started = Instant::now();
    let deadline = options.time_limit.map(|d| started + d);

    let riu = riu_threshold(db, k);
    let twu = compute_period_twu(db);
    let secondary: Vec<ItemId> = if options.lu_prune {
        initial_secondary(&twu, db.period_totals(), db.items(), riu)
    } else {
        db.items().iter().filter(|i| i.positive).map(|i| i.external_id).collect()
    };
    let mut retained = negative_kept(db, &secondary);
    retained.extend_from_slice(&secondary);
    let order = build_item_order(&twu, db.items(), &retained);
    let wdb = build_working_database(db, &order, options.merge);

    let mut stats = SearchStats { merges_performed: wdb.merges() as u64, ..SearchStats::default() };
    let root = ProjectedDatabase::root(&wdb);
    let boundary = order.boundary() as u32;
    let n_periods = wdb.pto().len();
    let mut su = BoundArray::new(BoundKind::Subtree, n_periods, order.len());
    let mut lu = BoundArray::new(BoundKind::Local, n_periods, order.len());
    accumulate(&root, |z| z < boundary, Some(&mut su), Some(&mut lu));
    let cands = primary_secondary(&su, &lu, wdb.pto(), riu, options.su_prune, options.lu_prune);

    let patterns = if options.parallel {
        let floor = Mutex::new(riu);
        let outcomes: Vec<Result<(Vec<Pattern>, SearchStats), MineError>> = cands
            .primary
            .par_iter()
            .map(|&i| {
                let mut ctx = Context::new(&wdb, k, riu, options, deadline, Some(&floor));
                ctx.extend(&root, &[], &[i], &cands.secondary)?;
                Ok((ctx.collector.into_patterns(), ctx.stats))
            })
            .collect();
        let mut all = Vec::new();
        for outcome in outcomes {
            let (found, s) = outcome?;
            stats.absorb(&s);
            all.extend(found);
        }
        all.sort_by(rank_order);
        all.truncate(k);
        all
    } else {
        let mut ctx = Context::new(&wdb, k, riu, options, deadline, None);
        ctx.extend(&root, &[], &cands.primary, &cands.secondary)?;
        stats.absorb(&ctx.stats);
        stats.interutil_trace = ctx.collector.trace().to_vec();
        ctx.collector.into_patterns()
    };

    stats.final_interutil = if patterns.len() == k { riu.max(patterns[k - 1].relative_utility) } else { riu };
    stats.patterns_emitted = patterns.len() as u64;
    stats.elapsed = started.elapsed();
    Ok((patterns, stats))
}

/// Per-job search state: the collector plus scratch arrays reused at every
/// node (they are consumed before recursing).
struct Context<'w> {
    wdb: &'w WorkingDatabase,
    options: MineOptions,
    deadline: Option<Instant>,
    collector: TopKCollector,
    stats: SearchStats,
    su: BoundArray,
    lu: BoundArray,
    mark: Vec<u32>,
    stamp: u32,
    shared_floor: Option<&'w Mutex<Rational>>,
}

impl<'w> Context<'w> {
    fn new(
        wdb: &'w WorkingDatabase,
        k: usize,
        riu: Rational,
        options: &MineOptions,
        deadline: Option<Instant>,
        shared_floor: Option<&'w Mutex<Rational>>,
    ) -> Context<'w> {
        let n_items = wdb.order().len();
        let n_periods = wdb.pto().len();
        Context {
            wdb,
            options: *options,
            deadline,
            collector: TopKCollector::new(k, riu),
            stats: SearchStats::default(),
            su: BoundArray::new(BoundKind::Subtree, n_periods, n_items),
            lu: BoundArray::new(BoundKind::Local, n_periods, n_items),
            mark: vec![0; n_items],
            stamp: 0,
            shared_floor,
        }
    }

    fn check_deadline(&self) -> Result<(), MineError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(MineError::Timeout),
            _ => Ok(()),
        }
    }

    /// Current threshold; in parallel mode also picks up what other workers
    /// have proven.
    fn interutil(&mut self) -> Rational {
        if let Some(floor) = self.shared_floor {
            let f = *floor.lock().expect("floor lock");
            self.collector.raise_to(f);
        }
        self.collector.interutil()
    }

    fn offer(&mut self, prefix: &[u32], utility: Money, period_total: Money, periods: &[u32]) {
        let ru = Rational::from_money(utility, period_total);
        if !self.collector.admits(ru) {
            return;
        }
        let order = self.wdb.order();
        let labels = self.wdb.periods();
        let pattern = Pattern::new(
            prefix.iter().map(|&d| order.external(d)).collect(),
            utility,
            periods.iter().map(|&h| labels[h as usize]).collect(),
            period_total,
        );
        let before = self.collector.interutil();
        self.collector.offer(pattern);
        if let Some(floor) = self.shared_floor {
            let now = self.collector.interutil();
            if now > before {
                let mut f = floor.lock().expect("floor lock");
                if now > *f {
                    *f = now;
                }
            }
        }
    }

    /// Explores `prefix ∪ {i}` for every `i` in `primary`, in order.
    fn extend(
        &mut self,
        pd: &ProjectedDatabase<'_>,
        prefix: &[u32],
        primary: &[u32],
        secondary: &[u32],
    ) -> Result<(), MineError> {
        let pto = self.wdb.pto();
        let boundary = self.wdb.order().boundary() as u32;
        let mut beta = Vec::with_capacity(prefix.len() + 1);
        beta.extend_from_slice(prefix);
        beta.push(0);
        for &i in primary {
            self.check_deadline()?;
            *beta.last_mut().expect("non-empty") = i;
            let proj = pd.project(i, pto, self.options.merge);
            self.stats.projections_built += 1;
            self.stats.merges_performed += proj.merges as u64;
            self.stats.candidates_evaluated += 1;
            self.stats.max_depth = self.stats.max_depth.max(beta.len());
            self.offer(&beta, proj.utility, proj.period_total, &proj.periods);
            if proj.database.is_empty() {
                continue;
            }

            let interutil = self.interutil();
            subtree_utilities(&proj.database, |z| z >= boundary, &mut self.su);
            let negatives = negative_candidates(&self.su, pto, interutil, self.options.su_prune);
            if !negatives.is_empty() {
                self.negative_search(&proj.database, &mut beta, &negatives)?;
            }

            let tail = &secondary[secondary.partition_point(|&z| z <= i)..];
            if tail.is_empty() {
                continue;
            }
            self.stamp += 1;
            for &z in tail {
                self.mark[z as usize] = self.stamp;
            }
            let (mark, stamp) = (&self.mark, self.stamp);
            accumulate(&proj.database, |z| mark[z as usize] == stamp, Some(&mut self.su), Some(&mut self.lu));
            let interutil = self.interutil();
            let next = primary_secondary(&self.su, &self.lu, pto, interutil, self.options.su_prune, self.options.lu_prune);
            if !next.primary.is_empty() {
                self.extend(&proj.database, &beta, &next.primary, &next.secondary)?;
            }
        }
        Ok(())
    }

    /// Appends each of `negatives` to `prefix` (which ends in a positive or
    /// negative item and already has `pd` as its projection).
    fn negative_search(
        &mut self,
        pd: &ProjectedDatabase<'_>,
        prefix: &mut Vec<u32>,
        negatives: &[u32],
    ) -> Result<(), MineError> {
        let pto = self.wdb.pto();
        for (idx, &n) in negatives.iter().enumerate() {
            self.check_deadline()?;
            prefix.push(n);
            let proj = pd.project(n, pto, self.options.merge);
            self.stats.projections_built += 1;
            self.stats.merges_performed += proj.merges as u64;
            self.stats.candidates_evaluated += 1;
            self.stats.max_depth = self.stats.max_depth.max(prefix.len());
            self.offer(prefix, proj.utility, proj.period_total, &proj.periods);

            let rest = &negatives[idx + 1..];
            if !proj.database.is_empty() && !rest.is_empty() {
                self.stamp += 1;
                for &z in rest {
                    self.mark[z as usize] = self.stamp;
                }
                let (mark, stamp) = (&self.mark, self.stamp);
                subtree_utilities(&proj.database, |z| mark[z as usize] == stamp, &mut self.su);
                let interutil = self.interutil();
                let next = negative_candidates(&self.su, pto, interutil, self.options.su_prune);
                if !next.is_empty() {
                    self.negative_search(&proj.database, prefix, &next)?;
                }
            }
            prefix.pop();
        }
        Ok(())
    }
}
