use std::collections::BTreeMap;

use proptest::prelude::*;

use rapm::data::{BoxScoreRow, Position, Side};
use rapm::ratings::{RatingKind, RatingMeta, RatingRow, RatingTable};
use rapm::validation::{
    criterion_all_nba, criterion_box_score, criterion_low_time, criterion_starters, validate, ValidationConfig,
    ValidationInputs,
};

const TEAMS: usize = 3;
const PER_TEAM: usize = 10;

fn key(t: usize, i: usize) -> String {
    format!("T{t} P{i:02}")
}

/// Starters (the first six per team) all play more than any bench player.
fn minutes(t: usize, i: usize) -> f64 {
    if i < 6 {
        2000.0 + 37.0 * i as f64 + 11.0 * t as f64
    } else {
        900.0 - 41.0 * i as f64 - 7.0 * t as f64
    }
}

fn position(i: usize) -> Position {
    [Position::G, Position::F, Position::C][i % 3]
}

fn boxscore() -> Vec<BoxScoreRow> {
    let mut rows = Vec::new();
    for t in 0..TEAMS {
        for i in 0..PER_TEAM {
            let m = minutes(t, i);
            rows.push(BoxScoreRow {
                key: key(t, i),
                team: format!("T{t}"),
                minutes: m,
                position: Some(position(i)),
                pts_pg: Some(m / 100.0),
                ast_pg: Some(m / 300.0),
                oreb_pg: None,
                dreb_pg: Some(m / 200.0),
                stl_pg: Some(m / 900.0),
                blk_pg: Some(m / 1000.0),
                games_started_rank: None,
            });
        }
    }
    rows
}

fn table(value: impl Fn(&str, Side) -> f64) -> RatingTable {
    let mut rows = Vec::new();
    for side in [Side::Offense, Side::Defense] {
        for t in 0..TEAMS {
            for i in 0..PER_TEAM {
                let k = key(t, i);
                rows.push(RatingRow {
                    rapm: Some(value(&k, side)),
                    player: k,
                    team: format!("T{t}"),
                    side,
                    rapm_binomial: None,
                    epts: None,
                    wepts: None,
                    weight: None,
                    is_reference: false,
                    rank: 0,
                });
            }
        }
    }
    let mut table = RatingTable {
        meta: RatingMeta {
            model: "normal".into(),
            rank_by: RatingKind::Rapm,
            lambdas: BTreeMap::new(),
            sign_convention: None,
            c3: None,
            epts_reference: None,
            rapm_scale: 1.0,
        },
        rows,
    };
    table.rerank(RatingKind::Rapm);
    table
}

fn minutes_of(k: &str) -> f64 {
    let (t, i) = k.split_once(" P").unwrap();
    minutes(t[1..].parse().unwrap(), i.parse().unwrap())
}

/// Best 6 guards, 6 forwards and 3 centers by total minutes.
fn all_nba_by_minutes() -> Vec<String> {
    let mut out = Vec::new();
    for (pos, n) in [(Position::G, 6), (Position::F, 6), (Position::C, 3)] {
        let mut list: Vec<(String, f64)> = (0..TEAMS)
            .flat_map(|t| (0..PER_TEAM).map(move |i| (t, i)))
            .filter(|&(_, i)| position(i) == pos)
            .map(|(t, i)| (key(t, i), minutes(t, i)))
            .collect();
        list.sort_by(|a, b| b.1.total_cmp(&a.1));
        out.extend(list.into_iter().take(n).map(|(k, _)| k));
    }
    out
}

fn inputs() -> ValidationInputs {
    ValidationInputs::new(&boxscore(), Some(all_nba_by_minutes())).unwrap()
}

#[test]
fn minutes_as_rating_scores_perfectly() {
    let inputs = inputs();
    let t = table(|k, _| minutes_of(k));
    assert_eq!(criterion_all_nba(&t, RatingKind::Rapm, &inputs, false).unwrap(), 100.0);
    assert_eq!(criterion_low_time(&t, RatingKind::Rapm, &inputs, 5, 5).unwrap(), 0.0);
    assert_eq!(
        criterion_starters(&t, RatingKind::Rapm, &inputs, 10).unwrap(),
        (100.0, 0.0)
    );
    let c4 = criterion_box_score(&t, RatingKind::Rapm, &inputs, 8);
    for stat in ["pts_pg", "ast_pg", "dreb_pg", "stl_pg", "blk_pg"] {
        assert_eq!(c4.pct[stat], 100.0, "{stat}");
    }
    assert!(!c4.pct.contains_key("oreb_pg"));
    assert_eq!(c4.warnings.len(), 1);
}

#[test]
fn reversed_rating_scores_the_opposite() {
    let inputs = inputs();
    let t = table(|k, _| -minutes_of(k));
    assert_eq!(criterion_low_time(&t, RatingKind::Rapm, &inputs, 5, 10).unwrap(), 100.0);
    assert_eq!(
        criterion_starters(&t, RatingKind::Rapm, &inputs, 10).unwrap(),
        (0.0, 100.0)
    );
    // Nine forwards: the best six and the worst six share three.
    assert_eq!(criterion_all_nba(&t, RatingKind::Rapm, &inputs, false).unwrap(), 20.0);
}

#[test]
fn report_marks_missing_inputs() {
    let rows = boxscore();
    let no_list = ValidationInputs::new(&rows, None).unwrap();
    let t = table(|k, _| minutes_of(k));
    let r = validate("m", &t, RatingKind::Rapm, &no_list, &ValidationConfig::default());
    assert_eq!(r.criterion1_pct, None);
    assert!(r.criterion2_pct.is_some() && r.criterion3a_pct.is_some());
    assert!(r.warnings.iter().any(|w| w.contains("All-NBA")));
}

#[test]
fn wrong_list_size_is_rejected() {
    let mut list = all_nba_by_minutes();
    list.pop();
    assert!(ValidationInputs::new(&boxscore(), Some(list)).is_err());
}

proptest! {
    #[test]
    fn criteria_ignore_monotone_transforms(
        seed in prop::collection::vec(-3.0f64..3.0, TEAMS * PER_TEAM * 2),
        a in 0.1f64..5.0,
        b in -10.0f64..10.0,
    ) {
        let inputs = inputs();
        let raw = |k: &str, side: Side| {
            let (t, i) = k.split_once(" P").unwrap();
            let idx = t[1..].parse::<usize>().unwrap() * PER_TEAM + i.parse::<usize>().unwrap();
            seed[idx + usize::from(side == Side::Defense) * TEAMS * PER_TEAM]
        };
        let base = table(raw);
        let moved = table(|k, s| (a * raw(k, s)).exp() + b);
        let cfg = ValidationConfig { top_n: 7, bottom_minutes_n: 9, offense_only: true };
        let r0 = validate("x", &base, RatingKind::Rapm, &inputs, &cfg);
        let r1 = validate("x", &moved, RatingKind::Rapm, &inputs, &cfg);
        prop_assert_eq!(r0.criterion1_pct, r1.criterion1_pct);
        prop_assert_eq!(r0.criterion2_pct, r1.criterion2_pct);
        prop_assert_eq!(r0.criterion3a_pct, r1.criterion3a_pct);
        prop_assert_eq!(r0.criterion3b_pct, r1.criterion3b_pct);
        prop_assert_eq!(r0.criterion4, r1.criterion4);
    }

    #[test]
    fn percentages_stay_in_range(seed in prop::collection::vec(-3.0f64..3.0, TEAMS * PER_TEAM), n in 1usize..40) {
        let inputs = inputs();
        let t = table(|k, _| {
            let (tm, i) = k.split_once(" P").unwrap();
            seed[tm[1..].parse::<usize>().unwrap() * PER_TEAM + i.parse::<usize>().unwrap()]
        });
        let r = validate("x", &t, RatingKind::Rapm, &inputs, &ValidationConfig { top_n: n, bottom_minutes_n: n, offense_only: false });
        for v in [r.criterion1_pct, r.criterion2_pct, r.criterion3a_pct, r.criterion3b_pct].into_iter().flatten() {
            prop_assert!((0.0..=100.0).contains(&v));
        }
        for v in r.criterion4.values() {
            prop_assert!((0.0..=100.0).contains(v));
        }
    }
}
