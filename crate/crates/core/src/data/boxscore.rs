use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, RowError};

/// Positional group used by the All-NBA criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Position {
    G,
    F,
    C,
}

impl Position {
    /// Collapse a listed position to G/F/C. Hybrid listings such as `G-F`
    /// take their first component; `PG`/`SG` map to G and `SF`/`PF` to F.
    pub fn collapse(raw: &str) -> Option<Self> {
        let first = raw.trim().split(['-', '/']).next()?.trim().to_ascii_uppercase();
        match first.as_str() {
            "G" | "PG" | "SG" | "GUARD" => Some(Position::G),
            "F" | "SF" | "PF" | "FORWARD" => Some(Position::F),
            "C" | "CENTER" | "CENTRE" => Some(Position::C),
            _ => None,
        }
    }
}

/// One line of the auxiliary box-score file.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxScoreRow {
    /// Full player key (`"TEAM Name"`), matching the possession file.
    pub key: String,
    pub team: String,
    pub minutes: f64,
    pub position: Option<Position>,
    pub pts_pg: Option<f64>,
    pub ast_pg: Option<f64>,
    pub oreb_pg: Option<f64>,
    pub dreb_pg: Option<f64>,
    pub stl_pg: Option<f64>,
    pub blk_pg: Option<f64>,
    pub games_started_rank: Option<f64>,
}

pub const STAT_COLUMNS: [&str; 6] = ["pts_pg", "ast_pg", "oreb_pg", "dreb_pg", "stl_pg", "blk_pg"];

impl Position {
    pub fn as_str(self) -> &'static str {
        match self {
            Position::G => "G",
            Position::F => "F",
            Position::C => "C",
        }
    }
}

/// Write rows in the format read by [`parse_boxscore`], with the full key
/// in the `player` column.
pub fn write_boxscore<W: Write>(out: W, rows: &[BoxScoreRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "player",
        "team",
        "minutes",
        "position",
        "pts_pg",
        "ast_pg",
        "oreb_pg",
        "dreb_pg",
        "stl_pg",
        "blk_pg",
        "games_started_rank",
    ])?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
    for r in rows {
        w.write_record([
            r.key.clone(),
            r.team.clone(),
            r.minutes.to_string(),
            r.position.map_or("", Position::as_str).to_string(),
            opt(r.pts_pg),
            opt(r.ast_pg),
            opt(r.oreb_pg),
            opt(r.dreb_pg),
            opt(r.stl_pg),
            opt(r.blk_pg),
            opt(r.games_started_rank),
        ])?;
    }
    w.flush()
        .map_err(|e| Error::Format(format!("writing box scores: {e}")))?;
    Ok(())
}

/// Player key for a box-score line. The `player` column may already carry
/// the team prefix (`"LAC22 Ivica-Zubac"`); otherwise it is prepended.
fn player_key(player: &str, team: &str) -> String {
    match player.split_once(' ') {
        Some((prefix, _)) if prefix == team => player.to_string(),
        _ => format!("{team} {player}"),
    }
}

/// Parse the box-score CSV. `player`, `team` and `minutes` are required;
/// position and per-game stat columns may be absent or empty.
pub fn parse_boxscore<R: Read>(source: R) -> Result<Vec<BoxScoreRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required =
        |name: &str| col(name).ok_or_else(|| Error::Format(format!("box-score file is missing column `{name}`")));
    let player_i = required("player")?;
    let team_i = required("team")?;
    let minutes_i = required("minutes")?;
    let position_i = col("position");
    let stat_i: Vec<Option<usize>> = STAT_COLUMNS.iter().map(|s| col(s)).collect();
    let gs_i = col("games_started_rank");

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let get = |i: Option<usize>| i.and_then(|i| record.get(i)).filter(|s| !s.is_empty());
        let num = |i: Option<usize>, name: &str| -> std::result::Result<Option<f64>, String> {
            get(i)
                .map(|s| s.parse::<f64>().map_err(|_| format!("`{name}` is not a number: `{s}`")))
                .transpose()
        };
        let parsed = (|| {
            let player = get(Some(player_i)).ok_or("empty player")?;
            let team = get(Some(team_i)).ok_or("empty team")?;
            let minutes = num(Some(minutes_i), "minutes")?.ok_or("empty minutes")?;
            if !(minutes.is_finite() && minutes >= 0.0) {
                return Err(format!("minutes must be nonnegative, got {minutes}"));
            }
            let position = match get(position_i) {
                Some(p) => Some(Position::collapse(p).ok_or_else(|| format!("unknown position `{p}`"))?),
                None => None,
            };
            let mut stats = [None; 6];
            for (k, name) in STAT_COLUMNS.iter().enumerate() {
                stats[k] = num(stat_i[k], name)?;
            }
            Ok::<_, String>(BoxScoreRow {
                key: player_key(player, team),
                team: team.to_string(),
                minutes,
                position,
                pts_pg: stats[0],
                ast_pg: stats[1],
                oreb_pg: stats[2],
                dreb_pg: stats[3],
                stl_pg: stats[4],
                blk_pg: stats[5],
                games_started_rank: num(gs_i, "games_started_rank")?,
            })
        })();
        match parsed {
            Ok(r) => rows.push(r),
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(rows)
    } else {
        Err(Error::Rows(errors))
    }
}
