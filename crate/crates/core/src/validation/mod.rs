//! External validation of ratings and goodness of fit of the multinomial
//! model.
//!
//! The four criteria compare rating rankings against lists that do not
//! depend on the play-by-play data: All-NBA selections, the least-used
//! players, per-team starters and per-game box-score leaders. All of them
//! depend only on rank order, so any strictly increasing transform of the
//! ratings leaves them unchanged.

mod criteria;
mod gof;
mod inputs;
mod report;

pub use criteria::{criterion_all_nba, criterion_box_score, criterion_low_time, criterion_starters, BoxScoreCriterion};
pub use gof::{goodness_of_fit, model_rmse, GofResult};
pub use inputs::{read_all_nba, PlayerInfo, ValidationInputs};
pub use report::{comparison_table, validate, ValidationConfig, ValidationReport};
