use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::data::{Position, Side};
use crate::error::{Error, Result};
use crate::ratings::{RatingKind, RatingTable};

use super::inputs::ValidationInputs;

/// Stats compared against the offensive and defensive top lists.
const OFFENSIVE_STATS: [&str; 3] = ["pts_pg", "ast_pg", "oreb_pg"];
const DEFENSIVE_STATS: [&str; 3] = ["dreb_pg", "stl_pg", "blk_pg"];

fn pct(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * hits as f64 / total as f64
    }
}

/// Best `n` keys on `side`.
fn top(table: &RatingTable, kind: RatingKind, side: Side, n: usize) -> Vec<&str> {
    table
        .ranking(kind, side)
        .into_iter()
        .take(n)
        .map(|r| r.player.as_str())
        .collect()
}

/// Worst `n` keys on `side`.
fn bottom(table: &RatingTable, kind: RatingKind, side: Side, n: usize) -> Vec<&str> {
    let ranked = table.ranking(kind, side);
    let skip = ranked.len().saturating_sub(n);
    ranked.into_iter().skip(skip).map(|r| r.player.as_str()).collect()
}

/// Rated player keys.
fn rated(table: &RatingTable, kind: RatingKind) -> BTreeSet<&str> {
    table
        .rows
        .iter()
        .filter(|r| kind.value(r).is_some())
        .map(|r| r.player.as_str())
        .collect()
}

fn list_preview(keys: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut s = keys.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if keys.len() > SHOWN {
        s.push_str(&format!(" and {} more", keys.len() - SHOWN));
    }
    s
}

/// Share of the All-NBA list among the six best guards, six best forwards
/// and three best centers. Players are scored by offensive plus defensive
/// rating (each oriented so larger is better), or by offense alone.
pub fn criterion_all_nba(
    table: &RatingTable,
    kind: RatingKind,
    inputs: &ValidationInputs,
    offense_only: bool,
) -> Result<f64> {
    if inputs.all_nba.is_empty() {
        return Err(Error::Input("no All-NBA list supplied".into()));
    }
    let mut score: BTreeMap<&str, f64> = BTreeMap::new();
    for row in &table.rows {
        if offense_only && row.side == Side::Defense {
            continue;
        }
        if let Some(v) = kind.value(row) {
            *score.entry(row.player.as_str()).or_insert(0.0) += kind.oriented(row.side, v);
        }
    }
    let mut missing = Vec::new();
    let mut groups: BTreeMap<Position, Vec<(&str, f64)>> = BTreeMap::new();
    for (&key, &s) in &score {
        match inputs.players.get(key).and_then(|p| p.position) {
            Some(pos) => groups.entry(pos).or_default().push((key, s)),
            None => missing.push(key.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Input(format!(
            "no position for {} rated players: {}",
            missing.len(),
            list_preview(&missing)
        )));
    }
    let mut selection = HashSet::new();
    for (pos, n) in [(Position::G, 6), (Position::F, 6), (Position::C, 3)] {
        let mut list = groups.remove(&pos).unwrap_or_default();
        list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        selection.extend(list.into_iter().take(n).map(|(k, _)| k));
    }
    let hits = inputs.all_nba.iter().filter(|k| selection.contains(k.as_str())).count();
    Ok(pct(hits, inputs.all_nba.len()))
}

/// Keys of the `n` rated players with the fewest minutes.
fn low_minutes(table: &RatingTable, kind: RatingKind, inputs: &ValidationInputs, n: usize) -> Result<HashSet<String>> {
    let mut list: Vec<(&str, f64)> = Vec::new();
    let mut missing = Vec::new();
    for key in rated(table, kind) {
        match inputs.players.get(key) {
            Some(p) => list.push((key, p.minutes)),
            None => missing.push(key.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Input(format!(
            "no minutes for {} rated players: {}",
            missing.len(),
            list_preview(&missing)
        )));
    }
    list.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    Ok(list.into_iter().take(n).map(|(k, _)| k.to_string()).collect())
}

/// Share of the top `top_n` offensive plus top `top_n` defensive players
/// who are among the `bottom_minutes_n` least-used rated players.
pub fn criterion_low_time(
    table: &RatingTable,
    kind: RatingKind,
    inputs: &ValidationInputs,
    top_n: usize,
    bottom_minutes_n: usize,
) -> Result<f64> {
    let low = low_minutes(table, kind, inputs, bottom_minutes_n)?;
    let mut hits = 0;
    let mut total = 0;
    for side in Side::BOTH {
        for key in top(table, kind, side, top_n) {
            total += 1;
            hits += usize::from(low.contains(key));
        }
    }
    Ok(pct(hits, total))
}

/// Share of starters among the top `n` per side, and among the bottom `n`
/// per side.
pub fn criterion_starters(
    table: &RatingTable,
    kind: RatingKind,
    inputs: &ValidationInputs,
    n: usize,
) -> Result<(f64, f64)> {
    if inputs.players.is_empty() {
        return Err(Error::Input("starters need minutes from a box-score file".into()));
    }
    let starters = inputs.starters();
    let share = |lists: [Vec<&str>; 2]| {
        let total: usize = lists.iter().map(Vec::len).sum();
        let hits = lists.iter().flatten().filter(|k| starters.contains(**k)).count();
        pct(hits, total)
    };
    let top_pct = share([top(table, kind, Side::Offense, n), top(table, kind, Side::Defense, n)]);
    let bottom_pct = share([
        bottom(table, kind, Side::Offense, n),
        bottom(table, kind, Side::Defense, n),
    ]);
    Ok((top_pct, bottom_pct))
}

/// Per-stat overlap between box-score leaders and rating leaders.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoxScoreCriterion {
    /// Percentage per stat column (`pts_pg`, ...).
    pub pct: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

/// Overlap of the top `top_n` players by each per-game stat with the top
/// `top_n` ratings: offensive ratings for points, assists and offensive
/// rebounds; defensive ratings for defensive rebounds, steals and blocks.
/// Only rated players are ranked by stat.
pub fn criterion_box_score(
    table: &RatingTable,
    kind: RatingKind,
    inputs: &ValidationInputs,
    top_n: usize,
) -> BoxScoreCriterion {
    let mut out = BoxScoreCriterion::default();
    let rated = rated(table, kind);
    for (stats, side) in [(OFFENSIVE_STATS, Side::Offense), (DEFENSIVE_STATS, Side::Defense)] {
        let best: HashSet<&str> = top(table, kind, side, top_n).into_iter().collect();
        for stat in stats {
            if !inputs.stat_columns.contains(stat) {
                out.warnings.push(format!("box-score column `{stat}` missing; skipped"));
                continue;
            }
            let mut leaders: Vec<(&str, f64)> = inputs
                .players
                .iter()
                .filter(|(k, _)| rated.contains(k.as_str()))
                .filter_map(|(k, p)| p.stats.get(stat).map(|&v| (k.as_str(), v)))
                .collect();
            leaders.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            leaders.truncate(top_n);
            let hits = leaders.iter().filter(|(k, _)| best.contains(k)).count();
            out.pct.insert(stat.to_string(), pct(hits, leaders.len()));
        }
    }
    out
}
