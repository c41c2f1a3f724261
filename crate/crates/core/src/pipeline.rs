//! End-to-end orchestration shared by the CLI, the benches and the
//! acceptance suite: features → suitability → factor model → classifiers.

use serde::{Deserialize, Serialize};

use crate::classify::{
    compare_variants, Averaging, CvOptions, PairedReport, DEFAULT_FOLDS, DEFAULT_L2,
};
use crate::efa::{EfaConfig, FactorModel, Retention, ScoreMatrix, ScoreMethod, DEFAULT_CUTOFF};
use crate::error::{Error, Result};
use crate::ingest::{
    aggregate_labels, FeatureTable, LabelSet, ProfileRecord, SurveyResponse, VoteMode, Warned,
    DEFAULT_WINDOW, N_QUESTIONS,
};
use crate::matrix::{standardize, DataMatrix, Matrix};
use crate::suitability::{assess, SuitabilityReport, Thresholds};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub window: usize,
    pub log1p: bool,
    pub efa: EfaConfig,
    pub thresholds: Thresholds,
    pub l2: f64,
    pub folds: usize,
    pub seed: u64,
    pub averaging: Averaging,
    pub lenient: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            log1p: false,
            efa: EfaConfig {
                retention: Retention::Kaiser,
                cutoff: DEFAULT_CUTOFF,
                kaiser_normalize: true,
                score_method: ScoreMethod::Regression,
            },
            thresholds: Thresholds::default(),
            l2: DEFAULT_L2,
            folds: DEFAULT_FOLDS,
            seed: 0,
            averaging: Averaging::Weighted,
            lenient: false,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::validation("--window must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.efa.cutoff) {
            return Err(Error::validation("--cutoff must lie in [0, 1]"));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::validation(
                "--l2 must be a finite non-negative number",
            ));
        }
        if self.folds < 2 {
            return Err(Error::validation("--folds must be at least 2"));
        }
        Ok(())
    }

    pub fn cv_options(&self) -> CvOptions {
        CvOptions {
            folds: self.folds,
            seed: self.seed,
            l2: self.l2,
            averaging: self.averaging,
        }
    }

    pub fn vote_mode(&self) -> VoteMode {
        if self.lenient {
            VoteMode::Lenient
        } else {
            VoteMode::Strict
        }
    }
}

/// Observed-variable matrix for analysis, optionally `ln(1+x)`-transformed.
pub fn analysis_matrix(features: &FeatureTable, log1p: bool) -> Result<DataMatrix> {
    let data = features.to_data_matrix()?;
    if log1p {
        data.log1p()
    } else {
        Ok(data)
    }
}

fn to_matrix(data: &DataMatrix) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = (0..data.n_rows()).map(|r| data.row(r).to_vec()).collect();
    Matrix::from_rows(&rows)
}

/// Standardized raw-feature design for the eight-feature classifier.
pub fn eight_feature_design(data: &DataMatrix) -> Result<Matrix> {
    to_matrix(&standardize(data)?)
}

/// Feature table plus majority labels from raw inputs.
pub fn ingest(
    profiles: &[ProfileRecord],
    survey: &[SurveyResponse],
    config: &AnalysisConfig,
) -> Result<Warned<(FeatureTable, LabelSet)>> {
    let features = FeatureTable::from_profiles(profiles, config.window)?;
    let labels = aggregate_labels(survey, config.vote_mode())?;
    let mut warnings = features.warnings;
    warnings.extend(labels.warnings);
    for (user, _) in &features.value.rows {
        if labels.value.get(user).is_none() {
            return Err(Error::validation(format!(
                "profile '{user}' has no survey responses"
            )));
        }
    }
    Ok(Warned {
        value: (features.value, labels.value),
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub suitability: SuitabilityReport,
    pub model: FactorModel,
    pub scores: ScoreMatrix,
}

/// Suitability tests, factor model and factor scores for a feature table.
pub fn analyse(features: &FeatureTable, config: &AnalysisConfig) -> Result<Analysis> {
    let data = analysis_matrix(features, config.log1p)?;
    let model = FactorModel::fit(&data, config.efa)?;
    let suitability = assess(&model.correlation, data.n_rows(), config.thresholds)?;
    let scores = model.scores(&data)?;
    Ok(Analysis {
        suitability,
        model,
        scores,
    })
}

/// Cross-validated comparison of raw features against factor scores for
/// each requested question (1-based).
pub fn evaluate(
    features: &FeatureTable,
    scores: &ScoreMatrix,
    labels: &LabelSet,
    questions: &[usize],
    config: &AnalysisConfig,
) -> Result<Vec<PairedReport>> {
    if scores.n_rows() != features.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            got: scores.n_rows(),
        });
    }
    let users = features.user_ids();
    let design8 = eight_feature_design(&analysis_matrix(features, config.log1p)?)?;
    let per_question = questions
        .iter()
        .map(|&q| {
            if !(1..=N_QUESTIONS).contains(&q) {
                return Err(Error::validation(format!("question {q} out of range 1..6")));
            }
            Ok((q, labels.column(q, &users)?))
        })
        .collect::<Result<Vec<_>>>()?;
    compare_variants(
        &design8,
        &scores.values,
        &per_question,
        &config.cv_options(),
    )
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub features: FeatureTable,
    pub labels: LabelSet,
    pub analysis: Analysis,
    pub reports: Vec<PairedReport>,
    pub warnings: Vec<String>,
}

/// Runs every stage on in-memory inputs.
pub fn run(
    profiles: &[ProfileRecord],
    survey: &[SurveyResponse],
    questions: &[usize],
    config: &AnalysisConfig,
) -> Result<PipelineOutcome> {
    config.validate()?;
    let ingested = ingest(profiles, survey, config)?;
    let (features, labels) = ingested.value;
    let analysis = analyse(&features, config)?;
    let reports = evaluate(&features, &analysis.scores, &labels, questions, config)?;
    Ok(PipelineOutcome {
        features,
        labels,
        analysis,
        reports,
        warnings: ingested.warnings,
    })
}
