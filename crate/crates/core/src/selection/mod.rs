//! λ paths and K-fold cross-validation.

mod cv;
mod path;

pub use cv::{cross_validate, kfold_split, CvConfig, CvMetric, CvPoint, CvResult};
pub use path::LambdaPath;
