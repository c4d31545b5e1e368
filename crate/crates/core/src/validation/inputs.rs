use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};

use crate::data::{BoxScoreRow, Position};
use crate::error::{Error, Result};

/// Box-score facts about one player key.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerInfo {
    pub team: String,
    pub minutes: f64,
    pub position: Option<Position>,
    /// Per-game stats keyed by column name (`pts_pg`, ...).
    pub stats: BTreeMap<&'static str, f64>,
}

/// Everything the criteria need besides the ratings themselves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationInputs {
    /// All-NBA selections (15 keys), empty when not supplied.
    pub all_nba: Vec<String>,
    pub players: BTreeMap<String, PlayerInfo>,
    /// Stat columns present in the box-score file.
    pub stat_columns: BTreeSet<&'static str>,
}

impl ValidationInputs {
    pub fn new(rows: &[BoxScoreRow], all_nba: Option<Vec<String>>) -> Result<Self> {
        let all_nba = all_nba.unwrap_or_default();
        if !all_nba.is_empty() && all_nba.len() != 15 {
            return Err(Error::Input(format!(
                "All-NBA list must have 15 players, got {}",
                all_nba.len()
            )));
        }
        let mut players = BTreeMap::new();
        let mut stat_columns = BTreeSet::new();
        for row in rows {
            let mut stats = BTreeMap::new();
            for (name, value) in [
                ("pts_pg", row.pts_pg),
                ("ast_pg", row.ast_pg),
                ("oreb_pg", row.oreb_pg),
                ("dreb_pg", row.dreb_pg),
                ("stl_pg", row.stl_pg),
                ("blk_pg", row.blk_pg),
            ] {
                if let Some(v) = value {
                    stats.insert(name, v);
                    stat_columns.insert(name);
                }
            }
            let info = PlayerInfo {
                team: row.team.clone(),
                minutes: row.minutes,
                position: row.position,
                stats,
            };
            if players.insert(row.key.clone(), info).is_some() {
                return Err(Error::Input(format!("box-score file lists {} twice", row.key)));
            }
        }
        Ok(ValidationInputs {
            all_nba,
            players,
            stat_columns,
        })
    }

    /// The six players with the most minutes on each team (fewer when a
    /// team has fewer players). Ties go to the smaller key.
    pub fn starters(&self) -> BTreeSet<String> {
        let mut by_team: BTreeMap<&str, Vec<(&String, f64)>> = BTreeMap::new();
        for (key, info) in &self.players {
            by_team.entry(&info.team).or_default().push((key, info.minutes));
        }
        let mut out = BTreeSet::new();
        for (_, mut list) in by_team {
            list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            out.extend(list.into_iter().take(6).map(|(k, _)| k.clone()));
        }
        out
    }
}

/// Read an All-NBA list: one player key per line; blank lines and lines
/// starting with `#` are skipped.
pub fn read_all_nba<R: Read>(source: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in BufReader::new(source).lines() {
        let line = line.map_err(|e| Error::Format(format!("reading All-NBA list: {e}")))?;
        let key = line.trim();
        if key.is_empty() || key.starts_with('#') {
            continue;
        }
        out.push(key.to_string());
    }
    Ok(out)
}
