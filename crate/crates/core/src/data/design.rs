use std::collections::HashMap;

use super::possession::{Possession, SeasonType};
use super::registry::PlayerRegistry;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Covariate,
    /// Offensive indicator (0/+1) of registry player `k`.
    Offense(usize),
    /// Defensive indicator (0/-1) of registry player `k`.
    Defense(usize),
}

/// Column-compressed sparse design matrix with per-column metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n_rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
    penalized: Vec<bool>,
    by_name: HashMap<String, usize>,
    /// (offense column, defense column) per registry player, when encoded
    /// from possessions.
    player_columns: Vec<(usize, usize)>,
}

impl DesignMatrix {
    /// Build from sparse columns `(row indices ascending, values)`.
    pub fn from_columns(
        n_rows: usize,
        columns: Vec<(Vec<u32>, Vec<f64>)>,
        names: Vec<String>,
        kinds: Vec<ColumnKind>,
    ) -> Result<Self> {
        if names.len() != columns.len() || kinds.len() != columns.len() {
            return Err(Error::Input("column metadata length mismatch".into()));
        }
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        let nnz = columns.iter().map(|c| c.0.len()).sum();
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        for (rows, vals) in columns {
            if rows.len() != vals.len() {
                return Err(Error::Input("column index/value length mismatch".into()));
            }
            if rows.windows(2).any(|w| w[0] >= w[1]) || rows.last().is_some_and(|&r| r as usize >= n_rows) {
                return Err(Error::Input("column row indices must be ascending and in range".into()));
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input("non-finite design entry".into()));
            }
            row_idx.extend(rows);
            values.extend(vals);
            col_ptr.push(row_idx.len());
        }
        let by_name = names.iter().enumerate().map(|(j, n)| (n.clone(), j)).collect();
        let penalized = vec![true; names.len()];
        Ok(DesignMatrix {
            n_rows,
            col_ptr,
            row_idx,
            values,
            names,
            kinds,
            penalized,
            by_name,
            player_columns: Vec::new(),
        })
    }

    /// Dense row-major constructor for small problems. Columns are named
    /// `x0, x1, ...` and all penalized.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Input("ragged dense matrix".into()));
        }
        let columns = (0..p)
            .map(|j| {
                let mut idx = Vec::new();
                let mut val = Vec::new();
                for (i, r) in rows.iter().enumerate() {
                    if r[j] != 0.0 {
                        idx.push(i as u32);
                        val.push(r[j]);
                    }
                }
                (idx, val)
            })
            .collect();
        let names = (0..p).map(|j| format!("x{j}")).collect();
        Self::from_columns(n, columns, names, vec![ColumnKind::Covariate; p])
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[a..b], &self.values[a..b])
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kind(&self, j: usize) -> ColumnKind {
        self.kinds[j]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn is_penalized(&self, j: usize) -> bool {
        self.penalized[j]
    }

    pub fn penalty_mask(&self) -> &[bool] {
        &self.penalized
    }

    pub fn set_penalized(&mut self, j: usize, penalized: bool) {
        self.penalized[j] = penalized;
    }

    /// Offensive and defensive column of registry player `k`, if encoded.
    pub fn player_columns(&self, k: usize) -> Option<(usize, usize)> {
        self.player_columns.get(k).copied()
    }

    pub fn n_players(&self) -> usize {
        self.player_columns.len()
    }

    /// `X β` (no intercept).
    pub fn mul_vec(&self, beta: &[f64]) -> Vec<f64> {
        assert_eq!(beta.len(), self.n_cols(), "coefficient length mismatch");
        let mut out = vec![0.0; self.n_rows];
        for (j, &b) in beta.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                out[i as usize] += v * b;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols()]; self.n_rows];
        for j in 0..self.n_cols() {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                out[i as usize][j] = v;
            }
        }
        out
    }

    /// Sub-matrix keeping only `cols` (in the given order). Penalty flags
    /// carry over; player column bookkeeping does not.
    pub fn select_columns(&self, cols: &[usize]) -> DesignMatrix {
        let columns = cols
            .iter()
            .map(|&j| {
                let (r, v) = self.column(j);
                (r.to_vec(), v.to_vec())
            })
            .collect();
        let mut out = DesignMatrix::from_columns(
            self.n_rows,
            columns,
            cols.iter().map(|&j| self.names[j].clone()).collect(),
            cols.iter().map(|&j| self.kinds[j]).collect(),
        )
        .expect("columns of a valid matrix are valid");
        out.penalized = cols.iter().map(|&j| self.penalized[j]).collect();
        out
    }
}

/// Which extra covariates to add ahead of the player columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CovariateSpec {
    /// `home_off` as 0/1.
    pub home_off: bool,
    /// `season_type` as 0 (regular) / 1 (playoffs).
    pub season_type: bool,
    /// Whether the covariates are penalized.
    pub penalize: bool,
}

/// Responses derived from possession points.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSet {
    pub pts: Vec<u8>,
    /// `I(pts > 0)`.
    pub binary: Vec<f64>,
    /// Category subsets for ℓ = 1, 2, 3+ (index 0, 1, 2).
    pub categories: [CategorySubset; 3],
}

/// Rows where `pts ∈ {0, ℓ}` (ℓ = 3 meaning `pts ≥ 3`) and the indicator of
/// a score of ℓ on those rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CategorySubset {
    pub rows: Vec<usize>,
    pub indicator: Vec<f64>,
}

/// Merged scoring category of a points value: 0, 1, 2 or 3 (three or more).
pub fn category_of(pts: u8) -> usize {
    (pts as usize).min(3)
}

impl ResponseSet {
    pub fn from_points(pts: Vec<u8>) -> Self {
        let binary = pts.iter().map(|&p| f64::from(u8::from(p > 0))).collect();
        let categories = std::array::from_fn(|c| {
            let level = c + 1;
            let mut sub = CategorySubset::default();
            for (i, &p) in pts.iter().enumerate() {
                let cat = category_of(p);
                if cat == 0 || cat == level {
                    sub.rows.push(i);
                    sub.indicator.push(f64::from(u8::from(cat == level)));
                }
            }
            sub
        });
        ResponseSet {
            pts,
            binary,
            categories,
        }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn points_f64(&self) -> Vec<f64> {
        self.pts.iter().map(|&p| f64::from(p)).collect()
    }

    /// Full-length response and 0/1 row weights for category `level`
    /// (1, 2 or 3). Rows outside the subset get weight 0.
    pub fn category_problem(&self, level: usize) -> (Vec<f64>, Vec<f64>) {
        assert!((1..=3).contains(&level), "category must be 1, 2 or 3");
        let sub = &self.categories[level - 1];
        let mut y = vec![0.0; self.len()];
        let mut w = vec![0.0; self.len()];
        for (&i, &ind) in sub.rows.iter().zip(&sub.indicator) {
            y[i] = ind;
            w[i] = 1.0;
        }
        (y, w)
    }

    /// Point value of the merged top category: the mean of `pts` over rows
    /// with `pts ≥ 3`, or 3.01 when there are none.
    pub fn top_category_value(&self) -> f64 {
        let (sum, count) = self
            .pts
            .iter()
            .filter(|&&p| p >= 3)
            .fold((0u64, 0u64), |(s, c), &p| (s + u64::from(p), c + 1));
        if count == 0 {
            3.01
        } else {
            sum as f64 / count as f64
        }
    }

    /// Counts of categories 0, 1, 2, 3+.
    pub fn category_counts(&self) -> [u64; 4] {
        let mut out = [0; 4];
        for &p in &self.pts {
            out[category_of(p)] += 1;
        }
        out
    }
}

/// Encode possessions into the sparse design and its responses.
///
/// Players missing from `registry` (filtered low-time players) contribute no
/// entries, which places them in the reference group.
pub fn encode_design(
    possessions: &[Possession],
    registry: &PlayerRegistry,
    covariates: CovariateSpec,
) -> (DesignMatrix, ResponseSet) {
    let n = possessions.len();
    let k = registry.len();
    let mut names = Vec::new();
    let mut kinds = Vec::new();
    let mut columns: Vec<(Vec<u32>, Vec<f64>)> = Vec::new();

    if covariates.home_off {
        let rows: Vec<u32> = (0..n)
            .filter(|&i| possessions[i].offense_is_home)
            .map(|i| i as u32)
            .collect();
        let vals = vec![1.0; rows.len()];
        columns.push((rows, vals));
        names.push("home_off".to_string());
        kinds.push(ColumnKind::Covariate);
    }
    if covariates.season_type {
        let rows: Vec<u32> = (0..n)
            .filter(|&i| possessions[i].season_type == SeasonType::Playoff)
            .map(|i| i as u32)
            .collect();
        let vals = vec![1.0; rows.len()];
        columns.push((rows, vals));
        names.push("season_type".to_string());
        kinds.push(ColumnKind::Covariate);
    }
    let extra = columns.len();

    let mut off_rows: Vec<Vec<u32>> = vec![Vec::new(); k];
    let mut def_rows: Vec<Vec<u32>> = vec![Vec::new(); k];
    for (i, p) in possessions.iter().enumerate() {
        for key in &p.offense {
            if let Some(kk) = registry.index_of(key) {
                off_rows[kk].push(i as u32);
            }
        }
        for key in &p.defense {
            if let Some(kk) = registry.index_of(key) {
                def_rows[kk].push(i as u32);
            }
        }
    }
    for (kk, rows) in off_rows.into_iter().enumerate() {
        let vals = vec![1.0; rows.len()];
        columns.push((rows, vals));
        names.push(format!("O:{}", registry.entry(kk).key));
        kinds.push(ColumnKind::Offense(kk));
    }
    for (kk, rows) in def_rows.into_iter().enumerate() {
        let vals = vec![-1.0; rows.len()];
        columns.push((rows, vals));
        names.push(format!("D:{}", registry.entry(kk).key));
        kinds.push(ColumnKind::Defense(kk));
    }

    let mut design = DesignMatrix::from_columns(n, columns, names, kinds).expect("encoded columns are well formed");
    for j in 0..extra {
        design.penalized[j] = covariates.penalize;
    }
    design.player_columns = (0..k)
        .map(|kk| (extra + registry.offense_column(kk), extra + registry.defense_column(kk)))
        .collect();
    let response = ResponseSet::from_points(possessions.iter().map(|p| p.points).collect());
    (design, response)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_registry, parse_possessions};

    const TEXT: &str = "home_off,pts,season_type,O1,O2,O3,O4,O5,D1,D2,D3,D4,D5\n\
        1,2,regular,A a1,A a2,A a3,A a4,A a5,B b1,B b2,B b3,B b4,B b5\n\
        0,0,playoffs,B b1,B b2,B b3,B b4,B b6,A a1,A a2,A a3,A a4,A a6\n\
        1,4,regular,A a1,A a2,A a3,A a4,A a6,B b1,B b2,B b3,B b4,B b5\n\
        0,1,regular,B b1,B b2,B b3,B b4,B b5,A a1,A a2,A a3,A a4,A a5\n";

    #[test]
    fn single_possession_row() {
        let poss = parse_possessions(TEXT.as_bytes()).unwrap();
        let (reg, _) = build_registry(&poss[..1], None).unwrap();
        let (x, _) = encode_design(&poss[..1], &reg, CovariateSpec::default());
        let dense = x.to_dense();
        assert_eq!(dense.len(), 1);
        assert_eq!(dense[0].iter().filter(|&&v| v == 1.0).count(), 5);
        assert_eq!(dense[0].iter().filter(|&&v| v == -1.0).count(), 5);
    }

    #[test]
    fn covariates_and_masks() {
        let poss = parse_possessions(TEXT.as_bytes()).unwrap();
        let (reg, _) = build_registry(&poss, None).unwrap();
        let cov = CovariateSpec {
            home_off: true,
            season_type: true,
            penalize: false,
        };
        let (x, _) = encode_design(&poss, &reg, cov);
        assert_eq!(x.n_cols(), 2 + 2 * reg.len());
        assert_eq!(x.name(0), "home_off");
        assert!(!x.is_penalized(0) && !x.is_penalized(1) && x.is_penalized(2));
        let dense = x.to_dense();
        assert_eq!(dense.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(dense.iter().map(|r| r[1]).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0, 0.0]);
        let (o, d) = x.player_columns(reg.index_of("A a1").unwrap()).unwrap();
        assert_eq!(x.name(o), "O:A a1");
        assert_eq!(x.name(d), "D:A a1");
    }

    #[test]
    fn responses_follow_categories() {
        let r = ResponseSet::from_points(vec![0, 1, 2, 3, 4, 0, 6]);
        assert_eq!(r.binary, vec![0., 1., 1., 1., 1., 0., 1.]);
        assert_eq!(r.categories[0].rows, vec![0, 1, 5]);
        assert_eq!(r.categories[0].indicator, vec![0., 1., 0.]);
        assert_eq!(r.categories[2].rows, vec![0, 3, 4, 5, 6]);
        assert_eq!(r.categories[2].indicator, vec![0., 1., 1., 0., 1.]);
        assert!((r.top_category_value() - 13.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.category_counts(), [2, 1, 1, 3]);
        let (y, w) = r.category_problem(2);
        assert_eq!(w, vec![1., 0., 1., 0., 0., 1., 0.]);
        assert_eq!(y, vec![0., 0., 1., 0., 0., 0., 0.]);
    }

    #[test]
    fn top_category_defaults_without_scores_of_three() {
        assert_eq!(ResponseSet::from_points(vec![0, 2, 1]).top_category_value(), 3.01);
    }

    #[test]
    fn filtered_players_drop_out() {
        let poss = parse_possessions(TEXT.as_bytes()).unwrap();
        let (reg, _) = build_registry(&poss, None).unwrap();
        let split = crate::data::filter_low_time(&reg, crate::data::LowTimeRule::Possessions(3)).unwrap();
        let (x, _) = encode_design(&poss, &split.kept, CovariateSpec::default());
        assert_eq!(x.n_cols(), 2 * split.kept.len());
        let dense = x.to_dense();
        // b6 and a6 are removed; row 1 loses one offensive and one defensive entry
        assert_eq!(dense[1].iter().filter(|&&v| v != 0.0).count(), 8);
    }
}
