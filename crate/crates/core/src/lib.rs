//! Trust-factor analysis for social-media profiles.
//!
//! The crate turns profile dumps and rater surveys into an eight-feature
//! table and majority-vote trust labels, checks the table is factorable,
//! extracts and varimax-rotates principal-component factors, and compares
//! logistic-regression trust classifiers trained on the raw features
//! against ones trained on the factor scores.

pub mod classify;
pub mod efa;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod matrix;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod special;
pub mod suitability;
pub mod synth;

pub use classify::{EvalReport, LogisticModel, PairedReport, TrainingSet, Variant};
pub use efa::{
    Assignment, EfaConfig, FactorModel, LoadingMatrix, Retention, ScoreMatrix, ScoreMethod,
};
pub use error::{Error, Result};
pub use ingest::{FeatureTable, FeatureVector, LabelSet, ProfileRecord, SurveyResponse};
pub use matrix::{DataMatrix, EigenDecomposition, Matrix, SymMatrix};
pub use pipeline::AnalysisConfig;
pub use suitability::SuitabilityReport;
