//! Synthetic seasons with a known ground truth.
//!
//! Each team has a fixed rotation: five starters, a group of rotation
//! players, a deep bench and a few planted low-time players (LTPs) who are
//! almost never on court. Lineups are redrawn at random stint boundaries by
//! weighted sampling without replacement. Every possession's outcome is
//! drawn from the multinomial model with the true coefficients, so the
//! ledger can be compared with what the fitting pipeline recovers.
//!
//! Randomness is derived from the single `seed`: the coefficient draw uses
//! `seed`, the games use `seed + 1` and the box-score noise `seed + 2`.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{BoxScoreRow, Position, Possession, SeasonType};
use crate::error::{Error, Result};
use crate::ratings::{category_probs, epts_from_predictors, wepts};

/// Minutes in a game.
const GAME_MINUTES: f64 = 48.0;
/// Games in a full regular season; box-score minutes are scaled to it.
const SEASON_GAMES: f64 = 82.0;
/// Mean number of possessions between lineup changes.
const STINT_LENGTH: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_teams: usize,
    pub players_per_team: usize,
    pub n_possessions: usize,
    /// Fraction of players with a nonzero true coefficient, per side and
    /// scoring category.
    pub sparsity: f64,
    /// Smallest magnitude of a planted offensive two-point coefficient;
    /// these lie in `[scale, 2·scale]`.
    pub coef_scale: f64,
    /// Defensive two-point coefficients lie in `[f·scale, 2f·scale]`.
    pub defense_factor: f64,
    /// Coefficients of the one-point and 3+ components, both sides, lie in
    /// `[f·scale, 2f·scale]`; 0 leaves those components intercept-only.
    pub other_factor: f64,
    /// Fraction of each roster planted as low-time players.
    pub ltp_fraction: f64,
    /// Possessions per game, both teams together.
    pub possessions_per_game: usize,
    /// Fraction of games, at the end of the season, marked as playoffs.
    pub playoff_fraction: f64,
    /// Marginal probabilities of 0, 1, 2 and 3+ points for an all-reference
    /// lineup; they fix the intercepts.
    pub base_probs: [f64; 4],
    /// Probability that a 3+ outcome is worth 4 points.
    pub four_point_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_teams: 30,
            players_per_team: 13,
            n_possessions: 20_000,
            sparsity: 0.15,
            coef_scale: 0.3,
            defense_factor: 0.5,
            other_factor: 0.0,
            ltp_fraction: 0.1,
            possessions_per_game: 200,
            playoff_fraction: 0.0,
            base_probs: [0.596, 0.025, 0.262, 0.117],
            four_point_rate: 0.01,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_teams < 2 {
            return bad(format!("need at least 2 teams, got {}", self.n_teams));
        }
        let ltp = self.ltp_per_team();
        if self.players_per_team < 5 + ltp {
            return bad(format!(
                "{} players per team leaves fewer than 5 besides {ltp} low-time players",
                self.players_per_team
            ));
        }
        if !(0.0..=1.0).contains(&self.sparsity) || !(0.0..=1.0).contains(&self.ltp_fraction) {
            return bad("sparsity and ltp_fraction must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.playoff_fraction) || !(0.0..=1.0).contains(&self.four_point_rate) {
            return bad("playoff_fraction and four_point_rate must lie in [0, 1]".into());
        }
        for (name, v) in [
            ("coef_scale", self.coef_scale),
            ("defense_factor", self.defense_factor),
            ("other_factor", self.other_factor),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and nonnegative"));
            }
        }
        if self.possessions_per_game < 2 {
            return bad("possessions_per_game must be at least 2".into());
        }
        let total: f64 = self.base_probs.iter().sum();
        if self.base_probs.iter().any(|p| !(*p > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return bad("base_probs must be positive and sum to 1".into());
        }
        Ok(())
    }

    fn ltp_per_team(&self) -> usize {
        (self.ltp_fraction * self.players_per_team as f64).round() as usize
    }

    /// Intercepts `ln(p_ℓ / p_0)` implied by `base_probs`.
    pub fn intercepts(&self) -> [f64; 3] {
        let p = self.base_probs;
        [(p[1] / p[0]).ln(), (p[2] / p[0]).ln(), (p[3] / p[0]).ln()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Starter,
    Rotation,
    Bench,
    Ltp,
}

impl Role {
    /// Relative weight in lineup sampling.
    fn weight(self) -> f64 {
        match self {
            Role::Starter => 1.0,
            Role::Rotation => 0.4,
            Role::Bench => 0.15,
            Role::Ltp => 0.01,
        }
    }
}

/// Ground truth for one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruePlayer {
    pub key: String,
    pub team: String,
    pub role: Role,
    pub position: Position,
    /// True offensive coefficients for the 1, 2 and 3+ point components.
    pub offense: [f64; 3],
    pub defense: [f64; 3],
    pub epts_offense: f64,
    /// Expected points conceded, with the defender entering as −1.
    pub epts_defense: f64,
    pub offense_possessions: u64,
    pub defense_possessions: u64,
    pub weight_offense: f64,
    pub weight_defense: f64,
    pub wepts_offense: f64,
    pub wepts_defense: f64,
    pub minutes: f64,
}

/// Everything the generator knows about the season it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub config: SynthConfig,
    pub intercepts: [f64; 3],
    pub epts_reference: f64,
    /// Expected point value of a 3+ outcome.
    pub c3_expected: f64,
    pub n_possessions: usize,
    /// Possessions ending with 0..=6 points.
    pub pts_counts: [u64; 7],
    /// Offensive and defensive possessions per team.
    pub team_possessions: BTreeMap<String, [u64; 2]>,
    pub team_games: BTreeMap<String, u64>,
    pub ltp_players: Vec<String>,
    /// A minutes threshold that separates the planted LTPs from everyone
    /// else in this season.
    pub ltp_minutes_threshold: f64,
    pub players: Vec<TruePlayer>,
}

/// A generated season: possessions, ground truth and auxiliary files.
#[derive(Debug, Clone)]
pub struct SyntheticSeason {
    pub possessions: Vec<Possession>,
    pub ledger: Ledger,
    pub boxscore: Vec<BoxScoreRow>,
    /// The 15 best players by true net wEPTS: 6 guards, 6 forwards and 3
    /// centers.
    pub all_nba: Vec<String>,
}

struct Roster {
    keys: Vec<Arc<str>>,
    team: Arc<str>,
    weights: Vec<f64>,
    first_player: usize,
}

/// `k` distinct indices drawn with probability proportional to `weights`
/// (Efraimidis–Spirakis keys), in ascending order.
fn weighted_sample(weights: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            (u.ln() / w, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<usize> = keyed.into_iter().take(k).map(|(_, i)| i).collect();
    out.sort_unstable();
    out
}

fn draw_coefficients(config: &SynthConfig, n_players: usize, rng: &mut ChaCha8Rng) -> Vec<[[f64; 3]; 2]> {
    let mut coefs = vec![[[0.0; 3]; 2]; n_players];
    let n_nonzero = (config.sparsity * n_players as f64).round() as usize;
    let scale = config.coef_scale;
    for side in 0..2 {
        for l in 0..3 {
            let f = match (side, l) {
                (0, 1) => 1.0,
                (1, 1) => config.defense_factor,
                _ => config.other_factor,
            };
            if f == 0.0 {
                continue;
            }
            let (lo, hi) = (f * scale, 2.0 * f * scale);
            let mut idx: Vec<usize> = (0..n_players).collect();
            idx.shuffle(rng);
            for &k in idx.iter().take(n_nonzero) {
                let magnitude = lo + (hi - lo) * rng.random::<f64>();
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                coefs[k][side][l] = sign * magnitude;
            }
        }
    }
    coefs
}

fn roles(config: &SynthConfig) -> Vec<Role> {
    let n = config.players_per_team;
    let ltp = config.ltp_per_team();
    let rotation = 6.min(n - 5 - ltp);
    (0..n)
        .map(|i| {
            if i < 5 {
                Role::Starter
            } else if i < 5 + rotation {
                Role::Rotation
            } else if i < n - ltp {
                Role::Bench
            } else {
                Role::Ltp
            }
        })
        .collect()
}

fn position_of(i: usize) -> Position {
    const STARTERS: [Position; 5] = [Position::G, Position::G, Position::F, Position::F, Position::C];
    const CYCLE: [Position; 3] = [Position::G, Position::F, Position::C];
    if i < 5 {
        STARTERS[i]
    } else {
        CYCLE[(i - 5) % 3]
    }
}

/// Generate a season. The same config always produces the same season.
pub fn generate(config: &SynthConfig) -> Result<SyntheticSeason> {
    config.validate()?;
    let n_players = config.n_teams * config.players_per_team;
    let b0 = config.intercepts();
    let coefs = draw_coefficients(config, n_players, &mut ChaCha8Rng::seed_from_u64(config.seed));
    let roles = roles(config);

    let rosters: Vec<Roster> = (0..config.n_teams)
        .map(|t| {
            let team: Arc<str> = Arc::from(format!("T{:02}", t + 1));
            let keys = (0..config.players_per_team)
                .map(|i| Arc::from(format!("{team} Player-{:02}", i + 1)))
                .collect();
            Roster {
                keys,
                team,
                weights: roles.iter().map(|r| r.weight()).collect(),
                first_player: t * config.players_per_team,
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let n_games = config.n_possessions.div_ceil(config.possessions_per_game);
    let playoff_from = n_games - (config.playoff_fraction * n_games as f64).round() as usize;
    let mut possessions = Vec::with_capacity(config.n_possessions);
    let mut points_for = vec![[0u64; 2]; n_players];
    let mut team_games = vec![0u64; config.n_teams];
    let mut pairs: VecDeque<(usize, usize)> = VecDeque::new();
    let mut order: Vec<usize> = (0..config.n_teams).collect();
    let mut game = 0;
    while possessions.len() < config.n_possessions {
        if pairs.is_empty() {
            order.shuffle(&mut rng);
            pairs.extend(order.chunks_exact(2).map(|c| (c[0], c[1])));
        }
        let (home, away) = pairs.pop_front().expect("refilled above");
        team_games[home] += 1;
        team_games[away] += 1;
        let season_type = if game >= playoff_from {
            SeasonType::Playoff
        } else {
            SeasonType::Regular
        };
        let mut lineups = [
            weighted_sample(&rosters[home].weights, 5, &mut rng),
            weighted_sample(&rosters[away].weights, 5, &mut rng),
        ];
        for t in 0..config.possessions_per_game {
            if possessions.len() == config.n_possessions {
                break;
            }
            for (side, team) in [home, away].into_iter().enumerate() {
                if rng.random::<f64>() < 1.0 / STINT_LENGTH {
                    lineups[side] = weighted_sample(&rosters[team].weights, 5, &mut rng);
                }
            }
            let (o, d) = if t % 2 == 0 { (0, 1) } else { (1, 0) };
            let (ot, dt) = if o == 0 { (home, away) } else { (away, home) };
            let off: Vec<usize> = lineups[o].iter().map(|&i| rosters[ot].first_player + i).collect();
            let def: Vec<usize> = lineups[d].iter().map(|&i| rosters[dt].first_player + i).collect();
            let mut mu = b0;
            for l in 0..3 {
                mu[l] += off.iter().map(|&k| coefs[k][0][l]).sum::<f64>();
                mu[l] -= def.iter().map(|&k| coefs[k][1][l]).sum::<f64>();
            }
            let probs = category_probs(mu[0], mu[1], mu[2]);
            let u: f64 = rng.random();
            let mut cat = 3;
            let mut acc = 0.0;
            for (c, p) in probs.iter().enumerate().take(3) {
                acc += p;
                if u < acc {
                    cat = c;
                    break;
                }
            }
            let points = match cat {
                3 if rng.random::<f64>() < config.four_point_rate => 4,
                c => c as u8,
            };
            for &k in &off {
                points_for[k][0] += points as u64;
            }
            for &k in &def {
                points_for[k][1] += points as u64;
            }
            let keys = |roster: &Roster, lineup: &[usize]| -> [Arc<str>; 5] {
                std::array::from_fn(|j| roster.keys[lineup[j]].clone())
            };
            possessions.push(Possession {
                offense_is_home: o == 0,
                points,
                season_type,
                offense: keys(&rosters[ot], &lineups[o]),
                defense: keys(&rosters[dt], &lineups[d]),
                offense_team: rosters[ot].team.clone(),
                defense_team: rosters[dt].team.clone(),
            });
        }
        game += 1;
    }

    let mut counts = vec![[0u64; 2]; n_players];
    let mut team_poss = vec![[0u64; 2]; config.n_teams];
    let mut pts_counts = [0u64; 7];
    let team_index = |key: &str| key[1..].parse::<usize>().expect("generated team key") - 1;
    for p in &possessions {
        pts_counts[p.points as usize] += 1;
        team_poss[team_index(&p.offense_team)][0] += 1;
        team_poss[team_index(&p.defense_team)][1] += 1;
        for (side, lineup) in [&p.offense, &p.defense].into_iter().enumerate() {
            for key in lineup {
                let t = team_index(team_of_key(key));
                let i = key
                    .rsplit('-')
                    .next()
                    .and_then(|s| s.parse::<usize>().ok())
                    .expect("generated key")
                    - 1;
                counts[t * config.players_per_team + i][side] += 1;
            }
        }
    }

    let epts0 = epts_from_predictors(b0, 3.0 + config.four_point_rate);
    let c3 = 3.0 + config.four_point_rate;
    let mut players = Vec::with_capacity(n_players);
    for (t, roster) in rosters.iter().enumerate() {
        let scale = if team_games[t] > 0 {
            SEASON_GAMES / team_games[t] as f64
        } else {
            0.0
        };
        for (i, key) in roster.keys.iter().enumerate() {
            let k = roster.first_player + i;
            let [o, d] = coefs[k];
            let epts_o = epts_from_predictors(std::array::from_fn(|l| b0[l] + o[l]), c3);
            let epts_d = epts_from_predictors(std::array::from_fn(|l| b0[l] - d[l]), c3);
            let weight = |side: usize| {
                let team = team_poss[t][side];
                if team == 0 {
                    0.0
                } else {
                    counts[k][side] as f64 / team as f64
                }
            };
            let (wo, wd) = (weight(0), weight(1));
            let on_court = (counts[k][0] + counts[k][1]) as f64;
            players.push(TruePlayer {
                key: key.to_string(),
                team: roster.team.to_string(),
                role: roles[i],
                position: position_of(i),
                offense: o,
                defense: d,
                epts_offense: epts_o,
                epts_defense: epts_d,
                offense_possessions: counts[k][0],
                defense_possessions: counts[k][1],
                weight_offense: wo,
                weight_defense: wd,
                wepts_offense: wepts(wo, epts_o, epts0),
                wepts_defense: wepts(wd, epts_d, epts0),
                minutes: on_court * GAME_MINUTES / config.possessions_per_game as f64 * scale,
            });
        }
    }

    let ltp_players: Vec<String> = players
        .iter()
        .filter(|p| p.role == Role::Ltp)
        .map(|p| p.key.clone())
        .collect();
    let boxscore = box_scores(&players, &points_for, &team_games, config, epts0);
    let all_nba = all_nba(&players);
    let ledger = Ledger {
        config: config.clone(),
        intercepts: b0,
        epts_reference: epts0,
        c3_expected: c3,
        n_possessions: possessions.len(),
        pts_counts,
        team_possessions: rosters
            .iter()
            .zip(&team_poss)
            .map(|(r, c)| (r.team.to_string(), *c))
            .collect(),
        team_games: rosters
            .iter()
            .zip(&team_games)
            .map(|(r, g)| (r.team.to_string(), *g))
            .collect(),
        ltp_players,
        ltp_minutes_threshold: ltp_threshold(&players),
        players,
    };
    Ok(SyntheticSeason {
        possessions,
        ledger,
        boxscore,
        all_nba,
    })
}

fn team_of_key(key: &str) -> &str {
    key.split_once(' ').map_or(key, |(t, _)| t)
}

/// 200 minutes when that separates the LTPs from everyone else, otherwise
/// the midpoint of the gap between the two groups.
fn ltp_threshold(players: &[TruePlayer]) -> f64 {
    let ltp_max = players
        .iter()
        .filter(|p| p.role == Role::Ltp)
        .map(|p| p.minutes)
        .fold(f64::NEG_INFINITY, f64::max);
    let other_min = players
        .iter()
        .filter(|p| p.role != Role::Ltp)
        .map(|p| p.minutes)
        .fold(f64::INFINITY, f64::min);
    if ltp_max < 200.0 && 200.0 <= other_min {
        200.0
    } else if ltp_max < other_min {
        0.5 * (ltp_max + other_min)
    } else {
        200.0
    }
}

fn box_scores(
    players: &[TruePlayer],
    points_for: &[[u64; 2]],
    team_games: &[u64],
    config: &SynthConfig,
    epts0: f64,
) -> Vec<BoxScoreRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(2));
    let noise = Normal::<f64>::new(0.0, 0.2).expect("valid sd");
    let round = |v: f64| (v * 10.0).round() / 10.0;
    let mut rows = Vec::with_capacity(players.len());
    for (t, team_players) in players.chunks(config.players_per_team).enumerate() {
        let games = team_games[t].max(1) as f64;
        let mut order: Vec<usize> = (0..team_players.len()).collect();
        order.sort_by_key(|&i| {
            let p = &team_players[i];
            (std::cmp::Reverse(p.offense_possessions + p.defense_possessions), i)
        });
        let mut rank = vec![0usize; team_players.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r + 1;
        }
        for (i, p) in team_players.iter().enumerate() {
            let k = t * config.players_per_team + i;
            let o_pg = p.offense_possessions as f64 / games;
            let d_pg = p.defense_possessions as f64 / games;
            let off_q = p.epts_offense - epts0;
            let def_q = epts0 - p.epts_defense;
            let mut jitter = || noise.sample(&mut rng).exp();
            let big: f64 = match p.position {
                Position::G => 0.6,
                Position::F => 1.2,
                Position::C => 2.5,
            };
            let pts = points_for[k][0] as f64 / games / 5.0 * (3.0 * off_q).exp() * jitter();
            let ast = 0.25 * pts * (2.0 - big / 1.5).max(0.3) * jitter();
            let oreb = 0.02 * o_pg * big * (2.0 * off_q).exp() * jitter();
            let dreb = 0.08 * d_pg * big * (2.0 * def_q).exp() * jitter();
            let stl = 0.015 * d_pg * (3.0 * def_q).exp() * jitter();
            let blk = 0.006 * d_pg * big * (3.0 * def_q).exp() * jitter();
            rows.push(BoxScoreRow {
                key: p.key.clone(),
                team: p.team.clone(),
                minutes: round(p.minutes),
                position: Some(p.position),
                pts_pg: Some(round(pts)),
                ast_pg: Some(round(ast)),
                oreb_pg: Some(round(oreb)),
                dreb_pg: Some(round(dreb)),
                stl_pg: Some(round(stl)),
                blk_pg: Some(round(blk)),
                games_started_rank: Some(rank[i] as f64),
            });
        }
    }
    rows
}

fn all_nba(players: &[TruePlayer]) -> Vec<String> {
    let mut out = Vec::with_capacity(15);
    for (pos, n) in [(Position::G, 6), (Position::F, 6), (Position::C, 3)] {
        let mut list: Vec<(&TruePlayer, f64)> = players
            .iter()
            .filter(|p| p.position == pos && p.role != Role::Ltp)
            .map(|p| (p, p.wepts_offense - p.wepts_defense))
            .collect();
        list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.key.cmp(&b.0.key)));
        out.extend(list.into_iter().take(n).map(|(p, _)| p.key.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_season_has_requested_size() {
        let config = SynthConfig {
            n_possessions: 10,
            ..SynthConfig::default()
        };
        let s = generate(&config).unwrap();
        assert_eq!(s.possessions.len(), 10);
        assert_eq!(s.ledger.pts_counts.iter().sum::<u64>(), 10);
        let on_court: u64 = s.ledger.players.iter().map(|p| p.offense_possessions).sum();
        assert_eq!(on_court, 50);
    }

    #[test]
    fn roles_per_team() {
        let r = roles(&SynthConfig::default());
        let count = |role| r.iter().filter(|&&x| x == role).count();
        assert_eq!(
            (
                count(Role::Starter),
                count(Role::Rotation),
                count(Role::Bench),
                count(Role::Ltp)
            ),
            (5, 6, 1, 1)
        );
    }

    #[test]
    fn invalid_configs() {
        let small = SynthConfig {
            players_per_team: 4,
            ..SynthConfig::default()
        };
        assert!(generate(&small).is_err());
        let probs = SynthConfig {
            base_probs: [0.5, 0.5, 0.5, 0.5],
            ..SynthConfig::default()
        };
        assert!(generate(&probs).is_err());
    }

    #[test]
    fn weighted_sample_is_distinct_and_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let s = weighted_sample(&[1.0, 1.0, 0.4, 0.4, 0.4, 0.1, 0.01], 5, &mut rng);
            assert_eq!(s.len(), 5);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
