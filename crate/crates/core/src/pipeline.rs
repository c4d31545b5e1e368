//! End-to-end runs behind the `rapm` command line tool.
//!
//! Each `cmd_*` function reads its inputs, runs the analysis and writes its
//! artifacts to the output directory. Outputs are written atomically and
//! removed again if the command fails part way.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{
    build_registry, encode_design, filter_low_time, parse_boxscore, parse_possessions, write_boxscore,
    write_possessions, BoxScoreRow, CovariateSpec, DesignMatrix, LowTimeRule, PlayerEntry, PlayerRegistry, Possession,
    ResponseSet,
};
use crate::error::{Error, Result};
use crate::glm::{Control, Family, FitDocument, FitResult, GlmProblem};
use crate::io::{open, read_to_string, Outputs};
use crate::ratings::{after_lasso_refit, MultinomialDocument, MultinomialFit, RatingKind, RatingTable, SignConvention};
use crate::selection::{cross_validate, kfold_split, CvConfig, CvMetric, CvResult, LambdaPath};
use crate::synth::{generate, SynthConfig};
use crate::validation::{
    comparison_table, goodness_of_fit, model_rmse, read_all_nba, validate, GofResult, ValidationConfig,
    ValidationInputs, ValidationReport,
};

/// Which point of the CV curve to fit at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaRule {
    #[default]
    Min,
    #[serde(rename = "1se")]
    OneSe,
}

impl std::str::FromStr for LambdaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(LambdaRule::Min),
            "1se" => Ok(LambdaRule::OneSe),
            other => Err(Error::Config(format!("unknown lambda rule `{other}` (min|1se)"))),
        }
    }
}

/// Settings for a run. Loaded from a TOML file and overridden by command
/// line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub possessions: Option<PathBuf>,
    pub boxscore: Option<PathBuf>,
    pub all_nba: Option<PathBuf>,
    pub family: Family,
    pub alpha: f64,
    /// Fixed λ; when absent λ is chosen by cross-validation.
    pub lambda: Option<f64>,
    pub lambda_rule: LambdaRule,
    pub n_lambda: usize,
    pub lambda_ratio: f64,
    pub folds: usize,
    pub seed: u64,
    pub metric: CvMetric,
    /// Drop players with fewer minutes (needs a box score).
    pub ltp_minutes: Option<f64>,
    /// Drop players on court for fewer possessions.
    pub ltp_possessions: Option<u64>,
    pub standardize: bool,
    pub home_off: bool,
    pub season_type: bool,
    pub penalize_covariates: bool,
    pub sign_convention: SignConvention,
    /// Also refit without penalty on each lasso support.
    pub after_lasso: bool,
    pub rapm_scale: f64,
    pub gof_sims: usize,
    pub tol: f64,
    pub max_outer_iters: usize,
    pub max_cd_sweeps: usize,
    pub top_n: usize,
    pub bottom_minutes_n: usize,
    pub offense_only: bool,
    pub out: PathBuf,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let control = Control::default();
        let validation = ValidationConfig::default();
        RunConfig {
            possessions: None,
            boxscore: None,
            all_nba: None,
            family: Family::Gaussian,
            alpha: 1.0,
            lambda: None,
            lambda_rule: LambdaRule::Min,
            n_lambda: LambdaPath::DEFAULT_LEN,
            lambda_ratio: LambdaPath::DEFAULT_RATIO,
            folds: 10,
            seed: 0,
            metric: CvMetric::Rmse,
            ltp_minutes: None,
            ltp_possessions: None,
            standardize: true,
            home_off: false,
            season_type: false,
            penalize_covariates: false,
            sign_convention: SignConvention::Model,
            after_lasso: false,
            rapm_scale: 1.0,
            gof_sims: 1000,
            tol: control.tol,
            max_outer_iters: control.max_outer_iters,
            max_cd_sweeps: control.max_cd_sweeps,
            top_n: validation.top_n,
            bottom_minutes_n: validation.bottom_minutes_n,
            offense_only: validation.offense_only,
            out: PathBuf::from("out"),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_to_string(path)?)
    }

    pub fn control(&self) -> Control {
        Control {
            tol: self.tol,
            max_outer_iters: self.max_outer_iters,
            max_cd_sweeps: self.max_cd_sweeps,
        }
    }

    fn covariates(&self) -> CovariateSpec {
        CovariateSpec {
            home_off: self.home_off,
            season_type: self.season_type,
            penalize: self.penalize_covariates,
        }
    }

    fn low_time_rule(&self) -> Result<Option<LowTimeRule>> {
        match (self.ltp_minutes, self.ltp_possessions) {
            (Some(_), Some(_)) => Err(Error::Config(
                "give either a minutes or a possessions threshold, not both".into(),
            )),
            (Some(m), None) => Ok(Some(LowTimeRule::Minutes(m))),
            (None, Some(p)) => Ok(Some(LowTimeRule::Possessions(p))),
            (None, None) => Ok(None),
        }
    }

    fn cv_config(&self) -> CvConfig {
        CvConfig {
            folds: self.folds,
            seed: self.seed,
            metric: self.metric,
            control: self.control(),
        }
    }

    fn validation(&self) -> ValidationConfig {
        ValidationConfig {
            top_n: self.top_n,
            bottom_minutes_n: self.bottom_minutes_n,
            offense_only: self.offense_only,
        }
    }

    fn require(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
        path.clone()
            .ok_or_else(|| Error::Config(format!("no {what} file given")))
    }
}

/// Parsed inputs, the filtered registry and the encoded design.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub possessions: Vec<Possession>,
    /// Every player in the possession file.
    pub full_registry: PlayerRegistry,
    /// Players kept after low-time filtering; the design's player columns.
    pub registry: PlayerRegistry,
    pub removed: Vec<PlayerEntry>,
    pub design: DesignMatrix,
    pub response: ResponseSet,
    pub boxscore: Option<Vec<BoxScoreRow>>,
    pub warnings: Vec<String>,
}

/// Build registry, filter and encode already-parsed inputs.
pub fn prepare_from(
    possessions: Vec<Possession>,
    boxscore: Option<Vec<BoxScoreRow>>,
    config: &RunConfig,
) -> Result<Prepared> {
    let (full_registry, warnings) = build_registry(&possessions, boxscore.as_deref())?;
    let (registry, removed) = match config.low_time_rule()? {
        Some(rule) => {
            let split = filter_low_time(&full_registry, rule)?;
            (split.kept, split.removed)
        }
        None => (full_registry.clone(), Vec::new()),
    };
    if registry.is_empty() {
        return Err(Error::Input("low-time filtering removed every player".into()));
    }
    let (design, response) = encode_design(&possessions, &registry, config.covariates());
    Ok(Prepared {
        possessions,
        full_registry,
        registry,
        removed,
        design,
        response,
        boxscore,
        warnings,
    })
}

/// Read the possession (and optional box-score) files named in `config`.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let path = RunConfig::require(&config.possessions, "possessions")?;
    let possessions = parse_possessions(open(&path)?)?;
    let boxscore = match &config.boxscore {
        Some(p) => Some(parse_boxscore(open(p)?)?),
        None => None,
    };
    prepare_from(possessions, boxscore, config)
}

/// A single penalized fit, with its CV curve when λ was selected.
#[derive(Debug, Clone)]
pub struct ModelRun {
    pub fit: FitResult,
    pub cv: Option<CvResult>,
    pub after_lasso: Option<FitResult>,
    pub warnings: Vec<String>,
}

/// Fit `problem` at the configured λ, or at the CV-selected λ on a path
/// built for it.
pub fn select_and_fit(problem: &GlmProblem<'_>, fold_ids: &[usize], config: &RunConfig) -> Result<ModelRun> {
    let control = config.control();
    let mut warnings = Vec::new();
    let (fit, cv) = match config.lambda {
        Some(lambda) => (problem.fit(lambda, &control, None)?, None),
        None => {
            let path = LambdaPath::for_problem(problem, config.n_lambda, config.lambda_ratio)?;
            let cv = cross_validate(problem, &path, fold_ids, &config.cv_config())?;
            warnings.extend(cv.warnings.iter().cloned());
            let target = match config.lambda_rule {
                LambdaRule::Min => cv.lambda_min,
                LambdaRule::OneSe => cv.lambda_1se,
            };
            let upto: Vec<f64> = path.values().iter().copied().take_while(|&l| l >= target).collect();
            let fits = problem.fit_path(&upto, &control)?;
            (fits.into_iter().last().expect("target lies on the path"), Some(cv))
        }
    };
    if !fit.converged {
        warnings.push(format!("fit at lambda {:e} did not converge", fit.lambda));
    }
    let after_lasso = if config.after_lasso {
        let (refit, w) = after_lasso_refit(problem, &fit.support(), &control)?;
        warnings.extend(w);
        Some(refit)
    } else {
        None
    };
    Ok(ModelRun {
        fit,
        cv,
        after_lasso,
        warnings,
    })
}

/// Fit the Gaussian (points) or binomial (any score) model.
pub fn fit_single(prepared: &Prepared, config: &RunConfig) -> Result<ModelRun> {
    let y = match config.family {
        Family::Gaussian => prepared.response.points_f64(),
        Family::Binomial => prepared.response.binary.clone(),
    };
    let problem = GlmProblem::new(
        &prepared.design,
        &y,
        None,
        config.family,
        config.alpha,
        config.standardize,
    )?;
    let folds = fold_ids(prepared, config)?;
    select_and_fit(&problem, &folds, config)
}

fn fold_ids(prepared: &Prepared, config: &RunConfig) -> Result<Vec<usize>> {
    if config.lambda.is_some() {
        return Ok(Vec::new());
    }
    kfold_split(prepared.design.n_rows(), config.folds, config.seed)
}

/// The three binomial components and the assembled multinomial model.
#[derive(Debug, Clone)]
pub struct MultinomialRun {
    pub components: [Option<ModelRun>; 3],
    pub fit: MultinomialFit,
    /// The model assembled from after-lasso refits, when requested.
    pub after_lasso: Option<MultinomialFit>,
    pub warnings: Vec<String>,
}

/// Fit one binomial per scoring category (1, 2, 3+ points against no
/// score), each with its own λ, over one fold assignment shared by all
/// three. A category without any scoring rows is skipped and its
/// probability fixed at zero.
pub fn fit_multinomial(prepared: &Prepared, config: &RunConfig) -> Result<MultinomialRun> {
    let folds = fold_ids(prepared, config)?;
    let mut warnings = Vec::new();
    let mut runs: [Option<ModelRun>; 3] = Default::default();
    for (l, slot) in runs.iter_mut().enumerate() {
        let level = l + 1;
        let (y, w) = prepared.response.category_problem(level);
        let positives = y.iter().zip(&w).filter(|(y, w)| **y > 0.0 && **w > 0.0).count();
        if positives == 0 {
            warnings.push(format!(
                "no possessions in scoring category {level}; its probability is fixed at zero"
            ));
            continue;
        }
        let problem = GlmProblem::new(
            &prepared.design,
            &y,
            Some(&w),
            Family::Binomial,
            config.alpha,
            config.standardize,
        )?;
        let run = select_and_fit(&problem, &folds, config)?;
        warnings.extend(run.warnings.iter().map(|m| format!("category {level}: {m}")));
        *slot = Some(run);
    }
    let c3 = prepared.response.top_category_value();
    let fit = MultinomialFit::new(std::array::from_fn(|l| runs[l].as_ref().map(|r| r.fit.clone())), c3)?;
    let after_lasso = if config.after_lasso {
        Some(MultinomialFit::new(
            std::array::from_fn(|l| runs[l].as_ref().and_then(|r| r.after_lasso.clone())),
            c3,
        )?)
    } else {
        None
    };
    Ok(MultinomialRun {
        components: runs,
        fit,
        after_lasso,
        warnings,
    })
}

fn report_warnings(warnings: &[String]) {
    for w in warnings {
        warn!("{w}");
    }
}

fn write_table(out: &mut Outputs, stem: &str, table: &RatingTable) -> Result<()> {
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    out.write(&format!("{stem}.csv"), &csv)?;
    out.write_json(&format!("{stem}.json"), table)?;
    Ok(())
}

/// Summary of an ingested corpus.
#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub possessions: usize,
    pub players: usize,
    pub kept: usize,
    pub removed: Vec<String>,
    pub columns: usize,
    pub nonzeros: usize,
    /// Possessions ending with 0..=6 points.
    pub pts_counts: [u64; 7],
    pub c3: f64,
    pub teams: BTreeMap<String, [u64; 2]>,
    pub warnings: Vec<String>,
}

pub fn ingest_summary(prepared: &Prepared) -> IngestSummary {
    let mut pts_counts = [0u64; 7];
    for &p in &prepared.response.pts {
        pts_counts[p as usize] += 1;
    }
    let reg = &prepared.full_registry;
    IngestSummary {
        possessions: prepared.possessions.len(),
        players: reg.len(),
        kept: prepared.registry.len(),
        removed: prepared.removed.iter().map(|p| p.key.to_string()).collect(),
        columns: prepared.design.n_cols(),
        nonzeros: prepared.design.nnz(),
        pts_counts,
        c3: prepared.response.top_category_value(),
        teams: reg
            .teams()
            .map(|t| {
                let counts = [
                    reg.team_possessions(t, crate::data::Side::Offense),
                    reg.team_possessions(t, crate::data::Side::Defense),
                ];
                (t.to_string(), counts)
            })
            .collect(),
        warnings: prepared.warnings.clone(),
    }
}

/// Parse and encode; write `ingest.json` and `players.csv`.
pub fn cmd_ingest(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let prepared = prepare(config)?;
    report_warnings(&prepared.warnings);
    let mut out = Outputs::new(&config.out)?;
    out.write_json("ingest.json", &ingest_summary(&prepared))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "player",
        "team",
        "offense_possessions",
        "defense_possessions",
        "minutes",
        "kept",
    ])?;
    for p in prepared.full_registry.players() {
        w.write_record([
            p.key.to_string(),
            p.team.to_string(),
            p.offense_possessions.to_string(),
            p.defense_possessions.to_string(),
            p.minutes.map_or_else(String::new, |m| m.to_string()),
            prepared.registry.index_of(&p.key).is_some().to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    out.write("players.csv", &bytes)?;
    Ok(out.commit())
}

/// Fit one Gaussian or binomial model; write the fit, the CV curve and
/// RAPM ratings.
pub fn cmd_fit(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let prepared = prepare(config)?;
    report_warnings(&prepared.warnings);
    let run = fit_single(&prepared, config)?;
    report_warnings(&run.warnings);
    let mut out = Outputs::new(&config.out)?;
    out.write_json("fit.json", &run.fit.to_document(&prepared.design))?;
    if let Some(cv) = &run.cv {
        out.write_json("cv.json", cv)?;
        out.write("cv.txt", cv.to_text().as_bytes())?;
    }
    let (normal, binomial) = match config.family {
        Family::Gaussian => (Some(&run.fit), None),
        Family::Binomial => (None, Some(&run.fit)),
    };
    let table = RatingTable::build(&prepared.design, &prepared.registry, normal, binomial, None)?
        .with_rapm_scale(config.rapm_scale);
    write_table(&mut out, "ratings", &table)?;
    if let Some(refit) = &run.after_lasso {
        out.write_json("fit_after_lasso.json", &refit.to_document(&prepared.design))?;
        let (n, b) = match config.family {
            Family::Gaussian => (Some(refit), None),
            Family::Binomial => (None, Some(refit)),
        };
        let table =
            RatingTable::build(&prepared.design, &prepared.registry, n, b, None)?.with_rapm_scale(config.rapm_scale);
        write_table(&mut out, "ratings_after_lasso", &table)?;
    }
    Ok(out.commit())
}

/// Goodness of fit plus the RMSE of expected points.
#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    #[serde(flatten)]
    pub gof: GofResult,
    pub rmse: f64,
}

pub fn gof_report(mfit: &MultinomialFit, prepared: &Prepared, config: &RunConfig) -> Result<GofReport> {
    let probs = mfit.row_probabilities(&prepared.design);
    let gof = goodness_of_fit(&probs, &prepared.response.pts, config.gof_sims, config.seed)?;
    let rmse = model_rmse(&mfit.expected_points(&prepared.design), &prepared.response.points_f64())?;
    Ok(GofReport { gof, rmse })
}

/// Fit the three-component multinomial model; write the component fits,
/// CV curves, EPTS/wEPTS ratings and the goodness-of-fit report.
pub fn cmd_multinomial(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let prepared = prepare(config)?;
    report_warnings(&prepared.warnings);
    let run = fit_multinomial(&prepared, config)?;
    report_warnings(&run.warnings);
    let mut out = Outputs::new(&config.out)?;
    out.write_json("multinomial.json", &run.fit.to_document(&prepared.design))?;
    for (l, r) in run.components.iter().enumerate() {
        if let Some(cv) = r.as_ref().and_then(|r| r.cv.as_ref()) {
            out.write_json(&format!("cv_category{}.json", l + 1), cv)?;
            out.write(&format!("cv_category{}.txt", l + 1), cv.to_text().as_bytes())?;
        }
    }
    let conv = config.sign_convention;
    let table = RatingTable::build(&prepared.design, &prepared.registry, None, None, Some((&run.fit, conv)))?;
    write_table(&mut out, "ratings", &table)?;
    out.write_json("gof.json", &gof_report(&run.fit, &prepared, config)?)?;
    if let Some(m) = &run.after_lasso {
        out.write_json("multinomial_after_lasso.json", &m.to_document(&prepared.design))?;
        let table = RatingTable::build(&prepared.design, &prepared.registry, None, None, Some((m, conv)))?;
        write_table(&mut out, "ratings_after_lasso", &table)?;
    }
    Ok(out.commit())
}

/// A saved model: either a single fit or a multinomial document.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SavedModel {
    Multinomial(MultinomialDocument),
    Single(FitDocument),
}

fn load_model(path: &Path) -> Result<SavedModel> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Rate players from saved model files (a `fit.json` and/or a
/// `multinomial.json`) against the configured possessions.
pub fn cmd_rate(config: &RunConfig, models: &[PathBuf]) -> Result<Vec<PathBuf>> {
    if models.is_empty() {
        return Err(Error::Config("no model files given".into()));
    }
    let prepared = prepare(config)?;
    report_warnings(&prepared.warnings);
    let x = &prepared.design;
    let (mut normal, mut binomial, mut multinomial) = (None, None, None);
    for path in models {
        match load_model(path)? {
            SavedModel::Multinomial(doc) => multinomial = Some(doc.to_fit(x)?),
            SavedModel::Single(doc) => {
                let fit = doc.to_fit(x)?;
                match fit.family {
                    Family::Gaussian => normal = Some(fit),
                    Family::Binomial => binomial = Some(fit),
                }
            }
        }
    }
    let table = RatingTable::build(
        x,
        &prepared.registry,
        normal.as_ref(),
        binomial.as_ref(),
        multinomial.as_ref().map(|m| (m, config.sign_convention)),
    )?
    .with_rapm_scale(config.rapm_scale);
    let mut out = Outputs::new(&config.out)?;
    write_table(&mut out, "ratings", &table)?;
    if let Some(m) = &multinomial {
        out.write_json("gof.json", &gof_report(m, &prepared, config)?)?;
    }
    Ok(out.commit())
}

/// Goodness of fit of a saved multinomial model.
pub fn cmd_gof(config: &RunConfig, model: &Path) -> Result<Vec<PathBuf>> {
    let prepared = prepare(config)?;
    let mfit = match load_model(model)? {
        SavedModel::Multinomial(doc) => doc.to_fit(&prepared.design)?,
        SavedModel::Single(_) => return Err(Error::Input(format!("{} is not a multinomial model", model.display()))),
    };
    let report = gof_report(&mfit, &prepared, config)?;
    let mut out = Outputs::new(&config.out)?;
    out.write_json("gof.json", &report)?;
    Ok(out.commit())
}

/// One ratings file to validate, labelled for the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsSource {
    pub method: String,
    pub path: PathBuf,
}

impl std::str::FromStr for RatingsSource {
    type Err = Error;

    /// `method=path`, or a bare path labelled by its file stem.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('=') {
            Some((m, p)) if !m.is_empty() && !p.is_empty() => Ok(RatingsSource {
                method: m.to_string(),
                path: PathBuf::from(p),
            }),
            _ => {
                let path = PathBuf::from(s);
                let method = path
                    .file_stem()
                    .map_or_else(|| s.to_string(), |f| f.to_string_lossy().into_owned());
                Ok(RatingsSource { method, path })
            }
        }
    }
}

/// Validate rating files against the box score and All-NBA list; write a
/// JSON report and the comparison table.
pub fn cmd_validate(
    config: &RunConfig,
    sources: &[RatingsSource],
    kind: Option<RatingKind>,
) -> Result<(Vec<PathBuf>, Vec<ValidationReport>)> {
    if sources.is_empty() {
        return Err(Error::Config("no ratings files given".into()));
    }
    let boxscore = parse_boxscore(open(&RunConfig::require(&config.boxscore, "box-score")?)?)?;
    let all_nba = match &config.all_nba {
        Some(p) => Some(read_all_nba(open(p)?)?),
        None => None,
    };
    let inputs = ValidationInputs::new(&boxscore, all_nba)?;
    let mut reports = Vec::new();
    for src in sources {
        let table = RatingTable::read_csv(open(&src.path)?)?;
        let k = kind.unwrap_or(table.meta.rank_by);
        let report = validate(&src.method, &table, k, &inputs, &config.validation());
        report_warnings(&report.warnings);
        reports.push(report);
    }
    let mut out = Outputs::new(&config.out)?;
    out.write_json("validation.json", &reports)?;
    out.write("validation.txt", comparison_table(&reports).as_bytes())?;
    Ok((out.commit(), reports))
}

/// Generate a synthetic season: `possessions.csv`, `ledger.json`,
/// `boxscore.csv` and `all_nba.txt`.
pub fn cmd_synth(config: &SynthConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let season = generate(config)?;
    let mut out = Outputs::new(dir)?;
    let mut buf = Vec::new();
    write_possessions(&mut buf, &season.possessions)?;
    out.write("possessions.csv", &buf)?;
    out.write_json("ledger.json", &season.ledger)?;
    let mut buf = Vec::new();
    write_boxscore(&mut buf, &season.boxscore)?;
    out.write("boxscore.csv", &buf)?;
    let mut list = season.all_nba.join("\n");
    list.push('\n');
    out.write("all_nba.txt", list.as_bytes())?;
    Ok(out.commit())
}
