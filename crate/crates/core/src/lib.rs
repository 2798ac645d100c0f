//! Question intimacy toolkit: question extraction, best-worst scaling with
//! spectral ranking, annotation reliability, baseline regressors, and the
//! pragmatic, gender, social-distance and anonymity analyses.
//!
//! Numerical code is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix it to `f64`, which is what the command-line tools use.

pub mod linalg;
pub mod scalar;
pub mod stats;
pub mod text;

pub mod analysis;
pub mod bws;
pub mod corpus;
pub mod graph;
pub mod models;
pub mod reliability;

pub use scalar::Scalar;

pub type Strengths = bws::BtlStrengths<f64>;
pub type Scores = bws::IntimacyScore<f64>;
pub type Ilsr = bws::IlsrParams<f64>;
pub type Ridge = models::RidgeModel<f64>;
pub type Topics = models::TopicModel<f64>;
pub type Model = models::ModelArtifact<f64>;
pub type Regression = analysis::RegressionResult<f64>;
pub type Contrast = analysis::MarkerContrast<f64>;
pub type DistanceBins = Vec<graph::DistanceBin<f64>>;
