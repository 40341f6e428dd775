//! Top-k on-shelf itemset mining with positive and negative unit profits.
//!
//! The miner ranks itemsets by relative utility: the utility an itemset
//! earned divided by the total utility of the periods in which it was sold.
//! [`mine_top_k`] returns the `k` best; [`oracle::oracle_top_k`] computes the
//! same answer by enumeration for small inputs.

pub mod bounds;
pub mod dataset_io;
pub mod domain;
pub mod oracle;
pub mod preprocess;
pub mod projection;
pub mod search;
pub mod toolkit;

pub use dataset_io::{parse_database, parse_database_str, write_patterns, OnShelfDatabase, ParseError};
pub use domain::{rank_order, ItemId, Money, Pattern, Period, Rational};
pub use search::{mine_top_k, MineError, MineOptions, SearchStats, TopKCollector};
