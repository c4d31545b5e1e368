//! Possession ingestion, the player registry, low-time-player filtering and
//! design-matrix encoding.

mod boxscore;
mod design;
mod possession;
mod registry;

pub use boxscore::{parse_boxscore, write_boxscore, BoxScoreRow, Position, STAT_COLUMNS};
pub use design::{category_of, encode_design, CategorySubset, ColumnKind, CovariateSpec, DesignMatrix, ResponseSet};
pub use possession::{
    parse_possessions, read_possessions, team_of, write_possessions, Possession, SeasonType, POSSESSION_HEADER,
};
pub use registry::{build_registry, filter_low_time, LowTimeRule, LtpSplit, PlayerEntry, PlayerRegistry, Side};
