use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::data::{DesignMatrix, PlayerRegistry, Side};
use crate::error::{Error, Result};
use crate::glm::{Family, FitResult};

use super::multinomial::{epts_player, epts_reference, MultinomialFit, SignConvention};
use super::weights::{participation_weight, wepts};

/// Which column of a [`RatingTable`] a ranking is based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingKind {
    Rapm,
    RapmBinomial,
    Epts,
    Wepts,
}

impl std::str::FromStr for RatingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rapm" => Ok(RatingKind::Rapm),
            "rapm_binomial" => Ok(RatingKind::RapmBinomial),
            "epts" => Ok(RatingKind::Epts),
            "wepts" => Ok(RatingKind::Wepts),
            other => Err(Error::Config(format!(
                "unknown rating `{other}` (rapm|rapm_binomial|epts|wepts)"
            ))),
        }
    }
}

impl RatingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RatingKind::Rapm => "rapm",
            RatingKind::RapmBinomial => "rapm_binomial",
            RatingKind::Epts => "epts",
            RatingKind::Wepts => "wepts",
        }
    }

    pub fn value(self, row: &RatingRow) -> Option<f64> {
        match self {
            RatingKind::Rapm => row.rapm,
            RatingKind::RapmBinomial => row.rapm_binomial,
            RatingKind::Epts => row.epts,
            RatingKind::Wepts => row.wepts,
        }
    }

    /// Whether larger values rank first. Coefficients are oriented so that
    /// larger is better on both sides; conceded expected points are ranked
    /// ascending.
    pub fn descending(self, side: Side) -> bool {
        match self {
            RatingKind::Rapm | RatingKind::RapmBinomial => true,
            RatingKind::Epts | RatingKind::Wepts => side == Side::Offense,
        }
    }

    /// The value mapped so that larger is always better.
    pub fn oriented(self, side: Side, value: f64) -> f64 {
        if self.descending(side) {
            value
        } else {
            -value
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRow {
    pub player: String,
    pub team: String,
    pub side: Side,
    pub rapm: Option<f64>,
    pub rapm_binomial: Option<f64>,
    pub epts: Option<f64>,
    pub wepts: Option<f64>,
    pub weight: Option<f64>,
    pub is_reference: bool,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingMeta {
    /// `normal`, `binomial` or `multinomial`: the model behind `rank`.
    pub model: String,
    pub rank_by: RatingKind,
    /// λ per fitted component.
    pub lambdas: BTreeMap<String, f64>,
    pub sign_convention: Option<SignConvention>,
    pub c3: Option<f64>,
    pub epts_reference: Option<f64>,
    /// Factor applied to `rapm` and `rapm_binomial` for display.
    pub rapm_scale: f64,
}

/// Per-player, per-side ratings. Rows are ordered offense first, then by
/// rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTable {
    pub meta: RatingMeta,
    pub rows: Vec<RatingRow>,
}

impl RatingTable {
    /// Assemble ratings from whichever fits are available. The ranking uses
    /// wEPTS when a multinomial fit is given, otherwise normal RAPM, otherwise
    /// binomial RAPM.
    pub fn build(
        x: &DesignMatrix,
        registry: &PlayerRegistry,
        normal: Option<&FitResult>,
        binomial: Option<&FitResult>,
        multinomial: Option<(&MultinomialFit, SignConvention)>,
    ) -> Result<Self> {
        if x.n_players() != registry.len() {
            return Err(Error::Input("design and registry are not aligned".into()));
        }
        for fit in normal.iter().chain(binomial.iter()) {
            if fit.coefficients.len() != x.n_cols() {
                return Err(Error::Input("fit and design are not aligned".into()));
            }
        }
        let (model, rank_by) = match (multinomial.is_some(), normal.is_some(), binomial.is_some()) {
            (true, _, _) => ("multinomial", RatingKind::Wepts),
            (false, true, _) => ("normal", RatingKind::Rapm),
            (false, false, true) => ("binomial", RatingKind::RapmBinomial),
            _ => return Err(Error::Input("no fitted model to rate players from".into())),
        };
        let mut lambdas = BTreeMap::new();
        if let Some(f) = normal {
            lambdas.insert(family_label(f.family).to_string(), f.lambda);
        }
        if let Some(f) = binomial {
            lambdas.insert(family_label(f.family).to_string(), f.lambda);
        }
        if let Some((m, _)) = multinomial {
            for (l, c) in m.components.iter().enumerate() {
                if let Some(f) = c {
                    lambdas.insert(format!("category{}", l + 1), f.lambda);
                }
            }
        }
        let epts0 = multinomial.map(|(m, _)| epts_reference(m));

        let mut rows = Vec::with_capacity(2 * registry.len());
        for side in Side::BOTH {
            for (k, entry) in registry.players().iter().enumerate() {
                let (o, d) = x.player_columns(k).expect("aligned design");
                let col = if side == Side::Offense { o } else { d };
                let weight = participation_weight(registry, k, side).ok();
                let (epts, wepts_value, mref) = match multinomial {
                    Some((m, conv)) => {
                        let e = epts_player(m, x, k, side, conv)?;
                        let w = weight.map(|w| wepts(w, e, epts0.unwrap_or(e)));
                        (Some(e), w, Some(m.column_coefficients(col).iter().all(|&b| b == 0.0)))
                    }
                    None => (None, None, None),
                };
                let rapm = normal.map(|f| f.coefficients[col]);
                let rapm_binomial = binomial.map(|f| f.coefficients[col]);
                let is_reference = mref.unwrap_or_else(|| rapm.or(rapm_binomial).is_some_and(|b| b == 0.0));
                rows.push(RatingRow {
                    player: entry.key.to_string(),
                    team: entry.team.to_string(),
                    side,
                    rapm,
                    rapm_binomial,
                    epts,
                    wepts: wepts_value,
                    weight,
                    is_reference,
                    rank: 0,
                });
            }
        }
        let meta = RatingMeta {
            model: model.to_string(),
            rank_by,
            lambdas,
            sign_convention: multinomial.map(|(_, c)| c),
            c3: multinomial.map(|(m, _)| m.c3),
            epts_reference: epts0,
            rapm_scale: 1.0,
        };
        let mut table = RatingTable { meta, rows };
        table.rerank(rank_by);
        Ok(table)
    }

    /// Recompute `rank` from `kind` and reorder rows.
    pub fn rerank(&mut self, kind: RatingKind) {
        self.meta.rank_by = kind;
        let mut ordered = Vec::with_capacity(self.rows.len());
        for side in Side::BOTH {
            let ranked: Vec<RatingRow> = self.ranking(kind, side).into_iter().cloned().collect();
            let unranked: Vec<RatingRow> = self
                .rows
                .iter()
                .filter(|r| r.side == side && kind.value(r).is_none())
                .cloned()
                .collect();
            for (i, mut row) in ranked.into_iter().enumerate() {
                row.rank = i + 1;
                ordered.push(row);
            }
            for mut row in unranked {
                row.rank = 0;
                ordered.push(row);
            }
        }
        self.rows = ordered;
    }

    /// Rows of `side` with a `kind` value, best first. Ties are broken by
    /// player key.
    pub fn ranking(&self, kind: RatingKind, side: Side) -> Vec<&RatingRow> {
        let mut rows: Vec<(&RatingRow, f64)> = self
            .rows
            .iter()
            .filter(|r| r.side == side)
            .filter_map(|r| kind.value(r).map(|v| (r, kind.oriented(side, v))))
            .collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.player.cmp(&b.0.player)));
        rows.into_iter().map(|(r, _)| r).collect()
    }

    /// Multiply the RAPM columns by `factor` (100 gives points per 100
    /// possessions).
    pub fn with_rapm_scale(mut self, factor: f64) -> Self {
        for row in &mut self.rows {
            row.rapm = row.rapm.map(|v| v * factor);
            row.rapm_binomial = row.rapm_binomial.map(|v| v * factor);
        }
        self.meta.rapm_scale *= factor;
        self
    }

    pub fn rows_for(&self, side: Side) -> impl Iterator<Item = &RatingRow> {
        self.rows.iter().filter(move |r| r.side == side)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::Format(format!("writing ratings: {e}")))?;
        Ok(())
    }

    /// Read a table written by [`RatingTable::write_csv`]. The metadata is
    /// reconstructed from the columns present.
    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(source);
        let mut rows = Vec::new();
        for record in reader.deserialize() {
            let row: RatingRow = record?;
            rows.push(row);
        }
        let has = |kind: RatingKind| rows.iter().any(|r| kind.value(r).is_some());
        let rank_by = [
            RatingKind::Wepts,
            RatingKind::Epts,
            RatingKind::Rapm,
            RatingKind::RapmBinomial,
        ]
        .into_iter()
        .find(|&k| has(k))
        .ok_or_else(|| Error::Format("ratings file has no rating values".into()))?;
        let model = match rank_by {
            RatingKind::Wepts | RatingKind::Epts => "multinomial",
            RatingKind::Rapm => "normal",
            RatingKind::RapmBinomial => "binomial",
        };
        Ok(RatingTable {
            meta: RatingMeta {
                model: model.into(),
                rank_by,
                lambdas: BTreeMap::new(),
                sign_convention: None,
                c3: None,
                epts_reference: None,
                rapm_scale: 1.0,
            },
            rows,
        })
    }
}

fn family_label(f: Family) -> &'static str {
    match f {
        Family::Gaussian => "normal",
        Family::Binomial => "binomial",
    }
}

/// One player's ratings merged across team keys.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergedRating {
    pub name: String,
    pub side: Side,
    pub teams: Vec<String>,
    pub possessions: u64,
    pub epts: Option<f64>,
    pub wepts: Option<f64>,
}

/// Average EPTS and wEPTS over the team keys of each player name, weighted
/// by per-team possessions on that side.
pub fn merged_by_name(table: &RatingTable, registry: &PlayerRegistry) -> Vec<MergedRating> {
    let mut groups: BTreeMap<(String, Side), Vec<(&RatingRow, u64)>> = BTreeMap::new();
    for row in &table.rows {
        let n = registry
            .index_of(&row.player)
            .map_or(0, |k| registry.entry(k).possessions(row.side));
        let name = row
            .player
            .strip_prefix(row.team.as_str())
            .map(str::trim_start)
            .unwrap_or(&row.player)
            .to_string();
        groups.entry((name, row.side)).or_default().push((row, n));
    }
    groups
        .into_iter()
        .map(|((name, side), rows)| {
            let total: u64 = rows.iter().map(|(_, n)| n).sum();
            let avg = |f: fn(&RatingRow) -> Option<f64>| -> Option<f64> {
                if total == 0 {
                    return None;
                }
                let mut acc = 0.0;
                for (r, n) in &rows {
                    acc += f(r)? * *n as f64;
                }
                Some(acc / total as f64)
            };
            MergedRating {
                name,
                side,
                teams: rows.iter().map(|(r, _)| r.team.clone()).collect(),
                possessions: total,
                epts: avg(|r| r.epts),
                wepts: avg(|r| r.wepts),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(player: &str, side: Side, epts: f64) -> RatingRow {
        RatingRow {
            player: player.into(),
            team: "T".into(),
            side,
            rapm: None,
            rapm_binomial: None,
            epts: Some(epts),
            wepts: Some(epts),
            weight: Some(0.5),
            is_reference: false,
            rank: 0,
        }
    }

    fn table(rows: Vec<RatingRow>) -> RatingTable {
        RatingTable {
            meta: RatingMeta {
                model: "multinomial".into(),
                rank_by: RatingKind::Wepts,
                lambdas: BTreeMap::new(),
                sign_convention: None,
                c3: None,
                epts_reference: None,
                rapm_scale: 1.0,
            },
            rows,
        }
    }

    #[test]
    fn defense_ranks_ascending() {
        let mut t = table(vec![
            row("T a", Side::Defense, 1.2),
            row("T b", Side::Defense, 0.9),
            row("T a", Side::Offense, 1.2),
            row("T b", Side::Offense, 0.9),
        ]);
        t.rerank(RatingKind::Epts);
        let order: Vec<(&str, Side, usize)> = t.rows.iter().map(|r| (r.player.as_str(), r.side, r.rank)).collect();
        assert_eq!(
            order,
            vec![
                ("T a", Side::Offense, 1),
                ("T b", Side::Offense, 2),
                ("T b", Side::Defense, 1),
                ("T a", Side::Defense, 2),
            ]
        );
    }

    #[test]
    fn csv_round_trip() {
        let mut t = table(vec![row("T a", Side::Offense, 1.25), row("T b", Side::Defense, 0.5)]);
        t.rows[1].epts = None;
        t.rows[1].wepts = None;
        t.rows[1].rapm = Some(-0.125);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("player,team,side,rapm,rapm_binomial,epts,wepts,weight,is_reference,rank\n"));
        let back = RatingTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.rows, t.rows);
        assert_eq!(back.meta.rank_by, RatingKind::Wepts);
    }
}
