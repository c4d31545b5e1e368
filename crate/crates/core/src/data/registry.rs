use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::boxscore::{BoxScoreRow, Position};
use super::possession::Possession;
use crate::error::{Error, Result};

/// Offensive or defensive role of a player within a possession.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "o")]
    Offense,
    #[serde(rename = "d")]
    Defense,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Offense, Side::Defense];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Offense => "o",
            Side::Defense => "d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "o" | "O" | "offense" => Some(Side::Offense),
            "d" | "D" | "defense" => Some(Side::Defense),
            _ => None,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerEntry {
    pub key: Arc<str>,
    pub team: Arc<str>,
    pub offense_possessions: u64,
    pub defense_possessions: u64,
    pub minutes: Option<f64>,
    pub position: Option<Position>,
}

impl PlayerEntry {
    pub fn possessions(&self, side: Side) -> u64 {
        match side {
            Side::Offense => self.offense_possessions,
            Side::Defense => self.defense_possessions,
        }
    }
}

/// Every player key seen in the possession data, in sorted key order.
///
/// Player `k` owns offensive block column `k` and defensive block column
/// `len() + k`; the design matrix shifts both blocks past any extra
/// covariate columns.
#[derive(Debug, Clone, Default)]
pub struct PlayerRegistry {
    players: Vec<PlayerEntry>,
    index: HashMap<Arc<str>, usize>,
    team_possessions: BTreeMap<Arc<str>, [u64; 2]>,
}

impl PlayerRegistry {
    fn from_entries(players: Vec<PlayerEntry>, team_possessions: BTreeMap<Arc<str>, [u64; 2]>) -> Self {
        let index = players.iter().enumerate().map(|(k, p)| (p.key.clone(), k)).collect();
        PlayerRegistry {
            players,
            index,
            team_possessions,
        }
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn players(&self) -> &[PlayerEntry] {
        &self.players
    }

    pub fn entry(&self, k: usize) -> &PlayerEntry {
        &self.players[k]
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn offense_column(&self, k: usize) -> usize {
        k
    }

    pub fn defense_column(&self, k: usize) -> usize {
        self.players.len() + k
    }

    /// Number of possessions in which `team` was on the given side.
    pub fn team_possessions(&self, team: &str, side: Side) -> u64 {
        self.team_possessions.get(team).map_or(0, |c| c[side.slot()])
    }

    pub fn teams(&self) -> impl Iterator<Item = &str> {
        self.team_possessions.keys().map(|t| &**t)
    }

    /// Attach minutes and positions from box-score rows. Returns the keys
    /// of rows that match no registered player.
    pub fn attach_boxscore(&mut self, rows: &[BoxScoreRow]) -> Vec<String> {
        let mut unknown = Vec::new();
        for row in rows {
            match self.index.get(row.key.as_str()) {
                Some(&k) => {
                    self.players[k].minutes = Some(row.minutes);
                    self.players[k].position = row.position;
                }
                None => unknown.push(row.key.clone()),
            }
        }
        unknown
    }
}

/// Tally every player key in `possessions`, optionally attaching minutes
/// from the box-score rows. Box-score rows naming unknown players come back
/// as warnings.
pub fn build_registry(
    possessions: &[Possession],
    boxscore: Option<&[BoxScoreRow]>,
) -> Result<(PlayerRegistry, Vec<String>)> {
    if possessions.is_empty() {
        return Err(Error::Input("no possessions to build a registry from".into()));
    }
    let mut counts: BTreeMap<Arc<str>, (Arc<str>, [u64; 2])> = BTreeMap::new();
    let mut teams: BTreeMap<Arc<str>, [u64; 2]> = BTreeMap::new();
    for p in possessions {
        for (side, lineup, team) in [
            (Side::Offense, &p.offense, &p.offense_team),
            (Side::Defense, &p.defense, &p.defense_team),
        ] {
            teams.entry(team.clone()).or_default()[side.slot()] += 1;
            for player in lineup {
                counts.entry(player.clone()).or_insert_with(|| (team.clone(), [0, 0])).1[side.slot()] += 1;
            }
        }
    }
    let players = counts
        .into_iter()
        .map(|(key, (team, c))| PlayerEntry {
            key,
            team,
            offense_possessions: c[0],
            defense_possessions: c[1],
            minutes: None,
            position: None,
        })
        .collect();
    let mut registry = PlayerRegistry::from_entries(players, teams);
    let warnings = match boxscore {
        Some(rows) => registry
            .attach_boxscore(rows)
            .into_iter()
            .map(|k| format!("box-score player `{k}` does not appear in the possession data"))
            .collect(),
        None => Vec::new(),
    };
    Ok((registry, warnings))
}

/// Threshold used to flag low-time players.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowTimeRule {
    /// Remove players with fewer minutes than this over the season.
    Minutes(f64),
    /// Remove players on court for fewer possessions (offense + defense)
    /// than this. Stands in for minutes when no box score is available.
    Possessions(u64),
}

#[derive(Debug, Clone)]
pub struct LtpSplit {
    pub kept: PlayerRegistry,
    pub removed: Vec<PlayerEntry>,
}

/// Split the registry into kept and low-time players. Kept players are
/// re-indexed contiguously in key order; team possession counts are
/// unchanged since they describe the full data.
pub fn filter_low_time(registry: &PlayerRegistry, rule: LowTimeRule) -> Result<LtpSplit> {
    if let LowTimeRule::Minutes(_) = rule {
        let missing: Vec<&str> = registry
            .players
            .iter()
            .filter(|p| p.minutes.is_none())
            .map(|p| &*p.key)
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "minutes threshold needs minutes for every player; {} missing (first: `{}`); \
                 supply a box-score file or use a possession-count threshold",
                missing.len(),
                missing[0]
            )));
        }
    }
    let is_low = |p: &PlayerEntry| match rule {
        LowTimeRule::Minutes(t) => p.minutes.unwrap_or(0.0) < t,
        LowTimeRule::Possessions(t) => p.offense_possessions + p.defense_possessions < t,
    };
    let (removed, kept): (Vec<PlayerEntry>, Vec<PlayerEntry>) =
        registry.players.iter().cloned().partition(|p| is_low(p));
    Ok(LtpSplit {
        kept: PlayerRegistry::from_entries(kept, registry.team_possessions.clone()),
        removed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_possessions;

    fn sample() -> Vec<Possession> {
        let text = "home_off,pts,season_type,O1,O2,O3,O4,O5,D1,D2,D3,D4,D5\n\
            1,2,regular,A a1,A a2,A a3,A a4,A a5,B b1,B b2,B b3,B b4,B b5\n\
            0,0,regular,B b1,B b2,B b3,B b4,B b6,A a1,A a2,A a3,A a4,A a6\n\
            1,3,playoffs,A a1,A a2,A a3,A a4,A a6,B b1,B b2,B b3,B b4,B b5\n";
        parse_possessions(text.as_bytes()).unwrap()
    }

    #[test]
    fn single_possession_counts() {
        let poss = &sample()[..1];
        let (reg, _) = build_registry(poss, None).unwrap();
        assert_eq!(reg.len(), 10);
        for p in reg.players() {
            assert_eq!(p.offense_possessions + p.defense_possessions, 1);
        }
        assert_eq!(reg.team_possessions("A", Side::Offense), 1);
        assert_eq!(reg.team_possessions("A", Side::Defense), 0);
    }

    #[test]
    fn columns_are_contiguous_per_block() {
        let (reg, _) = build_registry(&sample(), None).unwrap();
        let k = reg.len();
        let mut off: Vec<usize> = (0..k).map(|i| reg.offense_column(i)).collect();
        let mut def: Vec<usize> = (0..k).map(|i| reg.defense_column(i)).collect();
        off.sort();
        def.sort();
        assert_eq!(off, (0..k).collect::<Vec<_>>());
        assert_eq!(def, (k..2 * k).collect::<Vec<_>>());
        let a1 = reg.entry(reg.index_of("A a1").unwrap());
        assert_eq!((a1.offense_possessions, a1.defense_possessions), (2, 1));
    }

    #[test]
    fn empty_possessions_rejected() {
        assert!(build_registry(&[], None).is_err());
    }

    #[test]
    fn unknown_boxscore_players_are_warnings() {
        let rows = vec![BoxScoreRow {
            key: "Z nobody".into(),
            team: "Z".into(),
            minutes: 10.0,
            position: None,
            pts_pg: None,
            ast_pg: None,
            oreb_pg: None,
            dreb_pg: None,
            stl_pg: None,
            blk_pg: None,
            games_started_rank: None,
        }];
        let (_, warnings) = build_registry(&sample(), Some(&rows)).unwrap();
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn minutes_rule_without_minutes_is_config_error() {
        let (reg, _) = build_registry(&sample(), None).unwrap();
        assert!(matches!(
            filter_low_time(&reg, LowTimeRule::Minutes(200.0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn possession_proxy_threshold() {
        let (reg, _) = build_registry(&sample(), None).unwrap();
        let none = filter_low_time(&reg, LowTimeRule::Possessions(0)).unwrap();
        assert!(none.removed.is_empty());
        let split = filter_low_time(&reg, LowTimeRule::Possessions(2)).unwrap();
        let removed: Vec<&str> = split.removed.iter().map(|p| &*p.key).collect();
        assert_eq!(removed, vec!["A a5", "B b6"]);
        assert_eq!(split.kept.len() + split.removed.len(), reg.len());
        assert_eq!(split.kept.team_possessions("A", Side::Offense), 2);
    }
}
