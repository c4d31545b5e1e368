//! Player ratings from fitted models: RAPM, the three-binomial multinomial
//! assembly, EPTS, EPTS₀ and participation-weighted wEPTS.

mod multinomial;
mod rapm;
mod table;
mod weights;

pub use multinomial::{
    category_probs, epts_from_predictors, epts_player, epts_reference, MultinomialDocument, MultinomialFit,
    SignConvention,
};
pub use rapm::{after_lasso_refit, binomial_normal_map, extract_rapm, rating_correlation, LinearMap, RapmEntry};
pub use table::{merged_by_name, MergedRating, RatingKind, RatingMeta, RatingRow, RatingTable};
pub use weights::{participation_weight, wepts, wepts_player};
