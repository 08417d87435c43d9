//! Human judgments, agreement, and correlation statistics.

mod alpha;
mod groups;
mod judgments;
mod pearson;
mod ranksum;
mod report;
pub mod special;

pub use alpha::{krippendorff_alpha, Agreement};
pub use groups::{group_stats, GroupStat, SdKind};
pub use judgments::{shift_index, JudgmentTable, ShiftIndex};
pub use pearson::{pearson, Correlation};
pub use ranksum::{auc, rank_sum_test, RankSum};
pub use report::{evaluate, EvalReport, ScatterRow};

