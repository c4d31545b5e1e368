//! Sparse penalized generalized linear models and possession-level player
//! ratings for basketball.
//!
//! The crate is organised along the analysis pipeline:
//!
//! * [`data`] parses possession and box-score files, builds the player
//!   registry, filters low-time players and encodes the sparse design matrix.
//! * [`glm`] fits elastic-net penalized Gaussian and binomial models by
//!   coordinate descent (with an IRLS outer loop for the binomial family).
//! * [`selection`] builds λ paths and runs K-fold cross-validation.
//! * [`ratings`] turns fitted models into RAPM, EPTS and wEPTS ratings.
//! * [`validation`] scores ratings against external criteria and checks
//!   the multinomial fit with a parametric bootstrap.
//! * [`synth`] generates synthetic seasons with a known ground truth.
//! * [`pipeline`] ties the pieces together for the `rapm` command line tool.

pub mod data;
pub mod error;
pub mod glm;
pub mod io;
pub mod pipeline;
pub mod ratings;
pub mod selection;
pub mod synth;
pub mod validation;

pub use error::{Error, Result};
