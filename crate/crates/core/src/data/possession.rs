use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result, RowError};

pub const POSSESSION_HEADER: [&str; 13] = [
    "home_off",
    "pts",
    "season_type",
    "O1",
    "O2",
    "O3",
    "O4",
    "O5",
    "D1",
    "D2",
    "D3",
    "D4",
    "D5",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeasonType {
    Regular,
    Playoff,
}

impl SeasonType {
    fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "regular" | "regular season" | "regular_season" => Some(SeasonType::Regular),
            "playoff" | "playoffs" => Some(SeasonType::Playoff),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SeasonType::Regular => "regular",
            SeasonType::Playoff => "playoffs",
        }
    }
}

/// One offensive possession.
///
/// Player keys are the raw strings from the file (e.g. `"LAC22 Ivica-Zubac"`),
/// so a player traded mid-season appears under one key per team.
#[derive(Debug, Clone, PartialEq)]
pub struct Possession {
    pub offense_is_home: bool,
    pub points: u8,
    pub season_type: SeasonType,
    pub offense: [Arc<str>; 5],
    pub defense: [Arc<str>; 5],
    pub offense_team: Arc<str>,
    pub defense_team: Arc<str>,
}

/// Team key of a player string: the leading token before the first space.
pub fn team_of(player: &str) -> Option<&str> {
    let (team, rest) = player.split_once(' ')?;
    (!team.is_empty() && !rest.trim().is_empty()).then_some(team)
}

#[derive(Default)]
struct Interner(HashMap<String, Arc<str>>);

impl Interner {
    fn get(&mut self, s: &str) -> Arc<str> {
        if let Some(a) = self.0.get(s) {
            return a.clone();
        }
        let a: Arc<str> = Arc::from(s);
        self.0.insert(s.to_string(), a.clone());
        a
    }
}

/// Parse a possession CSV.
///
/// All malformed rows are collected and returned together in
/// [`Error::Rows`]; a missing header column is a [`Error::Format`].
pub fn parse_possessions<R: Read>(source: R) -> Result<Vec<Possession>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 13];
    for (slot, name) in idx.iter_mut().zip(POSSESSION_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("possession file is missing column `{name}`")))?;
    }

    let mut interner = Interner::default();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        match parse_row(&record, &idx, &mut interner) {
            Ok(p) => out.push(p),
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Error::Rows(errors))
    }
}

pub fn read_possessions(path: &Path) -> Result<Vec<Possession>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_possessions(std::io::BufReader::new(file))
}

/// Write possessions in the format read by [`parse_possessions`].
pub fn write_possessions<W: Write>(out: W, possessions: &[Possession]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POSSESSION_HEADER)?;
    for p in possessions {
        let home = if p.offense_is_home { "1" } else { "0" };
        let pts = p.points.to_string();
        let mut record: Vec<&str> = vec![home, &pts, p.season_type.as_str()];
        record.extend(p.offense.iter().map(|s| &**s));
        record.extend(p.defense.iter().map(|s| &**s));
        w.write_record(&record)?;
    }
    w.flush()
        .map_err(|e| Error::Format(format!("writing possessions: {e}")))?;
    Ok(())
}

fn parse_row(
    record: &csv::StringRecord,
    idx: &[usize; 13],
    interner: &mut Interner,
) -> std::result::Result<Possession, String> {
    let field = |i: usize| {
        record
            .get(idx[i])
            .ok_or_else(|| format!("missing field `{}`", POSSESSION_HEADER[i]))
    };

    let offense_is_home = match field(0)? {
        "0" => false,
        "1" => true,
        other => return Err(format!("home_off must be 0 or 1, got `{other}`")),
    };
    let raw_pts = field(1)?;
    let points: u8 = raw_pts
        .parse()
        .map_err(|_| format!("pts is not an integer: `{raw_pts}`"))?;
    if points > 6 {
        return Err(format!("pts outside 0-6: {points}"));
    }
    let raw_season = field(2)?;
    let season_type = SeasonType::parse(raw_season).ok_or_else(|| format!("unknown season_type `{raw_season}`"))?;

    let mut players: Vec<&str> = Vec::with_capacity(10);
    for i in 3..13 {
        let p = field(i)?;
        if p.is_empty() {
            return Err(format!("empty player in `{}`", POSSESSION_HEADER[i]));
        }
        players.push(p);
    }
    for (a, pa) in players.iter().enumerate() {
        if players[a + 1..].contains(pa) {
            return Err(format!("duplicate player `{pa}` in one possession"));
        }
    }

    let side_team = |side: &[&str]| -> std::result::Result<String, String> {
        let team = team_of(side[0]).ok_or_else(|| format!("player `{}` has no team prefix", side[0]))?;
        for p in &side[1..] {
            match team_of(p) {
                Some(t) if t == team => {}
                Some(t) => return Err(format!("player `{p}` is on team `{t}`, expected `{team}`")),
                None => return Err(format!("player `{p}` has no team prefix")),
            }
        }
        Ok(team.to_string())
    };
    let offense_team = side_team(&players[..5])?;
    let defense_team = side_team(&players[5..])?;
    if offense_team == defense_team {
        return Err(format!("offense and defense are both `{offense_team}`"));
    }

    let offense = std::array::from_fn(|i| interner.get(players[i]));
    let defense = std::array::from_fn(|i| interner.get(players[5 + i]));
    Ok(Possession {
        offense_is_home,
        points,
        season_type,
        offense,
        defense,
        offense_team: interner.get(&offense_team),
        defense_team: interner.get(&defense_team),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "home_off,pts,season_type,O1,O2,O3,O4,O5,D1,D2,D3,D4,D5\n";

    fn row(pts: &str) -> String {
        format!(
            "1,{pts},regular,LAC22 Ivica-Zubac,LAC22 Paul-George,LAC22 Reggie-Jackson,LAC22 Marcus-Morris,LAC22 Nicolas-Batum,\
             BOS22 Al-Horford,BOS22 Jayson-Tatum,BOS22 Jaylen-Brown,BOS22 Marcus-Smart,BOS22 Robert-Williams\n"
        )
    }

    #[test]
    fn empty_file_with_header() {
        let parsed = parse_possessions(HEADER.as_bytes()).unwrap();
        assert!(parsed.is_empty());
    }

    #[test]
    fn six_point_possession_is_accepted() {
        let text = format!("{HEADER}{}", row("6"));
        let parsed = parse_possessions(text.as_bytes()).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].points, 6);
        assert_eq!(&*parsed[0].offense_team, "LAC22");
        assert_eq!(&*parsed[0].defense_team, "BOS22");
        assert!(parsed[0].offense_is_home);
    }

    #[test]
    fn team_prefix_is_leading_token() {
        assert_eq!(team_of("LAC22 Ivica-Zubac"), Some("LAC22"));
        assert_eq!(team_of("NoSpace"), None);
    }

    #[test]
    fn out_of_range_points_report_line_numbers() {
        let text = format!("{HEADER}{}{}{}", row("2"), row("7"), row("x"));
        match parse_possessions(text.as_bytes()) {
            Err(Error::Rows(errs)) => {
                assert_eq!(errs.len(), 2);
                assert_eq!(errs[0].line, 3);
                assert!(errs[0].message.contains("0-6"));
                assert_eq!(errs[1].line, 4);
            }
            other => panic!("expected row errors, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_player_is_a_row_error() {
        let text = format!("{HEADER}0,0,regular,A1 a,A1 b,A1 c,A1 d,A1 a,B1 f,B1 g,B1 h,B1 i,B1 j\n");
        assert!(matches!(parse_possessions(text.as_bytes()), Err(Error::Rows(_))));
    }

    #[test]
    fn mixed_team_lineup_is_a_row_error() {
        let text = format!("{HEADER}0,0,regular,A1 a,A1 b,A1 c,A1 d,C1 e,B1 f,B1 g,B1 h,B1 i,B1 j\n");
        assert!(matches!(parse_possessions(text.as_bytes()), Err(Error::Rows(_))));
    }

    #[test]
    fn missing_column_is_a_format_error() {
        let text = "home_off,pts,O1,O2,O3,O4,O5,D1,D2,D3,D4,D5\n";
        assert!(matches!(parse_possessions(text.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn season_type_spellings() {
        assert_eq!(SeasonType::parse("playoffs"), Some(SeasonType::Playoff));
        assert_eq!(SeasonType::parse("Regular"), Some(SeasonType::Regular));
        assert_eq!(SeasonType::parse("preseason"), None);
    }
}
