use onshelf::oracle::{oracle_top_k, OracleLimits};
use onshelf::preprocess::riu_threshold;
use onshelf::toolkit::generator::{generate_database, small_corpus_params};
use onshelf::{mine_top_k, MineOptions, OnShelfDatabase, Pattern};

fn corpus(n: u64) -> Vec<OnShelfDatabase> {
    (0..n).filter_map(|i| generate_database(&small_corpus_params(i)).ok()).collect()
}

fn same(a: &[Pattern], b: &[Pattern]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.identical(y))
}

#[test]
fn pruning_flags_change_only_the_work_done() {
    let base = MineOptions::default();
    let ablations = [
        MineOptions { su_prune: false, ..base },
        MineOptions { lu_prune: false, ..base },
        MineOptions { su_prune: false, lu_prune: false, ..base },
    ];
    for (i, db) in corpus(120).iter().enumerate() {
        for k in [1, 5, 20] {
            let (want, stats) = mine_top_k(db, k, &base).unwrap();
            for opts in &ablations {
                let (got, ablated) = mine_top_k(db, k, opts).unwrap();
                assert!(same(&got, &want), "db {i} k {k} {opts:?}");
                assert!(stats.candidates_evaluated <= ablated.candidates_evaluated, "db {i} k {k} {opts:?}");
            }
        }
    }
}

#[test]
fn merging_and_parallelism_do_not_change_results() {
    let mut merged_somewhere = false;
    for (i, db) in corpus(120).iter().enumerate() {
        for k in [1, 4, 50] {
            let (want, stats) = mine_top_k(db, k, &MineOptions::default()).unwrap();
            merged_somewhere |= stats.merges_performed > 0;
            let (plain, plain_stats) = mine_top_k(db, k, &MineOptions { merge: false, ..MineOptions::default() }).unwrap();
            assert_eq!(plain_stats.merges_performed, 0);
            assert!(same(&plain, &want), "db {i} k {k} merge");
            let (par, par_stats) = mine_top_k(db, k, &MineOptions { parallel: true, ..MineOptions::default() }).unwrap();
            assert!(same(&par, &want), "db {i} k {k} parallel");
            assert_eq!(par_stats.final_interutil, stats.final_interutil);
        }
    }
    assert!(merged_somewhere);
}

#[test]
fn interutil_never_decreases_and_starts_at_riu() {
    for db in corpus(80) {
        for k in [1, 3, 10] {
            let (_, stats) = mine_top_k(&db, k, &MineOptions::default()).unwrap();
            assert_eq!(stats.interutil_trace[0], riu_threshold(&db, k));
            assert!(stats.interutil_trace.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(*stats.interutil_trace.last().unwrap(), stats.final_interutil);
        }
    }
}

#[test]
fn riu_never_exceeds_the_kth_answer() {
    for db in corpus(200) {
        for k in [1, 2, 3, 5, 10] {
            let top = oracle_top_k(&db, k, &OracleLimits::default()).unwrap();
            if top.len() == k {
                assert!(riu_threshold(&db, k) <= top[k - 1].relative_utility);
            }
        }
    }
}

#[test]
fn emitted_counters_are_consistent() {
    for db in corpus(40) {
        let (patterns, stats) = mine_top_k(&db, 7, &MineOptions::default()).unwrap();
        assert_eq!(stats.patterns_emitted as usize, patterns.len());
        assert!(stats.candidates_evaluated >= stats.patterns_emitted);
        assert!(stats.projections_built >= stats.candidates_evaluated);
        assert!(patterns.iter().all(|p| p.items.len() <= stats.max_depth));
    }
}
