use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use rapm::glm::Family;
use rapm::pipeline::{self, LambdaRule, RatingsSource, RunConfig};
use rapm::ratings::{RatingKind, SignConvention};
use rapm::selection::CvMetric;
use rapm::{Error, Result};

/// Penalized-regression player ratings from possession data.
#[derive(Parser)]
#[command(name = "rapm", version, about)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse inputs and report the registry and design dimensions.
    Ingest(Common),
    /// Fit a Gaussian or binomial model and write RAPM ratings.
    Fit(Common),
    /// Fit the three-component multinomial model and write EPTS/wEPTS.
    Multinomial(Common),
    /// Rate players from saved model files.
    Rate {
        #[command(flatten)]
        common: Common,
        /// fit.json or multinomial.json; may be repeated.
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
    },
    /// Score ratings files against the box score and All-NBA list.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Ratings CSV, optionally labelled as `method=path`; may be repeated.
        #[arg(long = "ratings", required = true)]
        ratings: Vec<RatingsSource>,
        /// Rating column to rank by (default: the file's primary rating).
        #[arg(long)]
        rating: Option<RatingKind>,
    },
    /// Bootstrap goodness of fit of a saved multinomial model.
    Gof {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Generate a synthetic season with its ground-truth ledger.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        teams: Option<usize>,
        #[arg(long)]
        players_per_team: Option<usize>,
        #[arg(long)]
        n_possessions: Option<usize>,
        #[arg(long)]
        sparsity: Option<f64>,
        #[arg(long)]
        coef_scale: Option<f64>,
        #[arg(long)]
        ltp_fraction: Option<f64>,
    },
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    possessions: Option<PathBuf>,
    #[arg(long)]
    boxscore: Option<PathBuf>,
    #[arg(long)]
    all_nba: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixed λ; skips cross-validation.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    lambda_rule: Option<LambdaRule>,
    #[arg(long)]
    n_lambda: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    metric: Option<CvMetric>,
    #[arg(long)]
    ltp_minutes: Option<f64>,
    #[arg(long)]
    ltp_possessions: Option<u64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    standardize: Option<bool>,
    /// Add the home-offense indicator column.
    #[arg(long)]
    home_off: bool,
    /// Add the playoff indicator column.
    #[arg(long)]
    season_type: bool,
    #[arg(long)]
    penalize_covariates: bool,
    #[arg(long)]
    sign_convention: Option<SignConvention>,
    #[arg(long)]
    after_lasso: bool,
    /// Display factor for RAPM (100 gives points per 100 possessions).
    #[arg(long)]
    rapm_scale: Option<f64>,
    #[arg(long)]
    gof_sims: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    top_n: Option<usize>,
    #[arg(long)]
    offense_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone().into();
                }
            )*};
        }
        set!(possessions, boxscore, all_nba, lambda, ltp_minutes, ltp_possessions);
        set!(family, alpha, lambda_rule, n_lambda, folds, seed, metric, standardize);
        set!(sign_convention, rapm_scale, gof_sims, tol, top_n, out);
        c.home_off |= self.home_off;
        c.season_type |= self.season_type;
        c.penalize_covariates |= self.penalize_covariates;
        c.after_lasso |= self.after_lasso;
        c.offense_only |= self.offense_only;
        c.synth.seed = self.seed.unwrap_or(c.seed);
        Ok(c)
    }
}

fn print_curves(paths: &[PathBuf]) {
    for p in paths.iter().filter(|p| p.extension().is_some_and(|e| e == "txt")) {
        if let Ok(text) = std::fs::read_to_string(p) {
            println!("{}", file_name(p));
            print!("{text}");
        }
    }
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map_or_else(String::new, |f| f.to_string_lossy().into_owned())
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Ingest(common) => pipeline::cmd_ingest(&common.config()?),
        Command::Fit(common) => {
            let paths = pipeline::cmd_fit(&common.config()?)?;
            print_curves(&paths);
            Ok(paths)
        }
        Command::Multinomial(common) => {
            let paths = pipeline::cmd_multinomial(&common.config()?)?;
            print_curves(&paths);
            Ok(paths)
        }
        Command::Rate { common, models } => pipeline::cmd_rate(&common.config()?, &models),
        Command::Validate {
            common,
            ratings,
            rating,
        } => {
            let (paths, _) = pipeline::cmd_validate(&common.config()?, &ratings, rating)?;
            print_curves(&paths);
            Ok(paths)
        }
        Command::Gof { common, model } => pipeline::cmd_gof(&common.config()?, &model),
        Command::Synth {
            common,
            teams,
            players_per_team,
            n_possessions,
            sparsity,
            coef_scale,
            ltp_fraction,
        } => {
            let config = common.config()?;
            let mut s = config.synth.clone();
            s.n_teams = teams.unwrap_or(s.n_teams);
            s.players_per_team = players_per_team.unwrap_or(s.players_per_team);
            s.n_possessions = n_possessions.unwrap_or(s.n_possessions);
            s.sparsity = sparsity.unwrap_or(s.sparsity);
            s.coef_scale = coef_scale.unwrap_or(s.coef_scale);
            s.ltp_fraction = ltp_fraction.unwrap_or(s.ltp_fraction);
            pipeline::cmd_synth(&s, &config.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{e}");
            if let Error::Rows(rows) = &e {
                for r in rows.iter().skip(1).take(20) {
                    error!("{r}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
