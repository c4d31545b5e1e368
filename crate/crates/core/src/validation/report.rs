use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::ratings::{RatingKind, RatingTable};

use super::criteria::{criterion_all_nba, criterion_box_score, criterion_low_time, criterion_starters};
use super::inputs::ValidationInputs;

/// List sizes used by the criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Players per side taken from the top (and bottom) of the rankings.
    pub top_n: usize,
    /// Size of the least-used set for the low-time criterion.
    pub bottom_minutes_n: usize,
    /// Use offensive ratings alone for the All-NBA criterion.
    pub offense_only: bool,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            top_n: 50,
            bottom_minutes_n: 50,
            offense_only: false,
        }
    }
}

/// Criteria for one rating method. A criterion whose inputs are missing is
/// `None`, with the reason in `warnings`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub method: String,
    pub rating: RatingKind,
    pub config: ValidationConfig,
    pub all_nba_size: usize,
    pub criterion1_pct: Option<f64>,
    pub criterion2_pct: Option<f64>,
    pub criterion3a_pct: Option<f64>,
    pub criterion3b_pct: Option<f64>,
    pub criterion4: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

/// Run every criterion that the inputs allow.
pub fn validate(
    method: &str,
    table: &RatingTable,
    kind: RatingKind,
    inputs: &ValidationInputs,
    config: &ValidationConfig,
) -> ValidationReport {
    let mut warnings = Vec::new();
    let mut keep = |r: crate::Result<f64>, name: &str| match r {
        Ok(v) => Some(v),
        Err(e) => {
            warnings.push(format!("{name}: {e}"));
            None
        }
    };
    let c1 = keep(
        criterion_all_nba(table, kind, inputs, config.offense_only),
        "criterion 1",
    );
    let c2 = keep(
        criterion_low_time(table, kind, inputs, config.top_n, config.bottom_minutes_n),
        "criterion 2",
    );
    let (c3a, c3b) = match criterion_starters(table, kind, inputs, config.top_n) {
        Ok((a, b)) => (Some(a), Some(b)),
        Err(e) => {
            warnings.push(format!("criterion 3: {e}"));
            (None, None)
        }
    };
    let c4 = criterion_box_score(table, kind, inputs, config.top_n);
    warnings.extend(c4.warnings);
    ValidationReport {
        method: method.to_string(),
        rating: kind,
        config: *config,
        all_nba_size: inputs.all_nba.len(),
        criterion1_pct: c1,
        criterion2_pct: c2,
        criterion3a_pct: c3a,
        criterion3b_pct: c3b,
        criterion4: c4.pct,
        warnings,
    }
}

/// Aligned text table: one row per method, one column per criterion.
pub fn comparison_table(reports: &[ValidationReport]) -> String {
    const STATS: [(&str, &str); 6] = [
        ("PTS", "pts_pg"),
        ("AST", "ast_pg"),
        ("OREB", "oreb_pg"),
        ("DREB", "dreb_pg"),
        ("STL", "stl_pg"),
        ("BLK", "blk_pg"),
    ];
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"));
    let width = reports.iter().map(|r| r.method.len()).max().unwrap_or(0).max(6);
    let mut out = format!("{:<width$}", "method");
    for h in ["C1", "C2", "C3a", "C3b"].into_iter().chain(STATS.iter().map(|s| s.0)) {
        write!(out, " {h:>6}").unwrap();
    }
    out.push('\n');
    for r in reports {
        write!(out, "{:<width$}", r.method).unwrap();
        let mut cells = vec![r.criterion1_pct, r.criterion2_pct, r.criterion3a_pct, r.criterion3b_pct];
        cells.extend(STATS.iter().map(|(_, col)| r.criterion4.get(*col).copied()));
        for c in cells {
            write!(out, " {:>6}", fmt(c)).unwrap();
        }
        out.push('\n');
    }
    out
}
