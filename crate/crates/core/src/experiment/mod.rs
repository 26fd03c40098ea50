//! Grid runner over subjects × combinations, the results store and the
//! aggregations behind the report tables.

pub mod aggregate;
pub mod report;
pub mod runner;
pub mod stats;
pub mod store;

pub use aggregate::{
    best_table, method_means, pairwise_tests, rank_items, rank_scores, BestRow, MethodMean,
    PairwiseTest, RankBounds, RankRow, RankTable, RANKED_STEPS,
};
pub use stats::{bonferroni, cohens_d_paired, paired_t_test, TTest};
pub use store::{FoldId, ResultRow, ResultsStore, RESULTS_FILE, RESULTS_HEADER};
pub use runner::{run_grid, subject_seed, RunConfig, RunSummary, TaskFailure};
pub use report::{write_report, ReportOptions, ReportOutcome};
