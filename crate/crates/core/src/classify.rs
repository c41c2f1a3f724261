//! Logistic-regression trust classifiers and their cross-validated
//! evaluation, comparing raw features against factor scores.

use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eigen_sym, DataMatrix, Matrix, SymMatrix};
use crate::rng::seeded;

pub const DEFAULT_L2: f64 = 1e-4;
pub const DEFAULT_FOLDS: usize = 10;
pub const GRADIENT_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100;
const MAX_CONDITION: f64 = 1e12;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// The eight raw profile features.
    Eight,
    /// Factor scores from the rotated solution.
    Three,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Eight => "eight",
            Variant::Three => "three",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eight" => Ok(Variant::Eight),
            "three" => Ok(Variant::Three),
            _ => Err(Error::validation(format!("unknown variant '{s}'"))),
        }
    }
}

/// Design matrix (without intercept column) plus binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub question: usize,
    pub variant: Variant,
}

impl TrainingSet {
    pub fn new(
        features: Matrix,
        labels: Vec<u8>,
        question: usize,
        variant: Variant,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                got: labels.len(),
            });
        }
        if features.cols() == 0 {
            return Err(Error::validation("training set needs at least one feature"));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::validation(format!(
                "label must be 0 or 1, got {bad}"
            )));
        }
        Ok(Self {
            features,
            labels,
            question,
            variant,
        })
    }

    pub fn from_data(
        data: &DataMatrix,
        labels: Vec<u8>,
        question: usize,
        variant: Variant,
    ) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..data.n_rows()).map(|r| data.row(r).to_vec()).collect();
        Self::new(Matrix::from_rows(&rows)?, labels, question, variant)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Intercept first, then one weight per feature.
    pub weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub l2: f64,
    /// Penalised log-likelihood at the start and after every accepted step.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

// ln(1 + e^z) without overflow
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
fn linear(w: &[f64], x: &[f64]) -> f64 {
    w[0] + w[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}

/// Penalised log-likelihood; the intercept is not penalised.
pub fn objective(x: &Matrix, y: &[u8], w: &[f64], l2: f64) -> f64 {
    let ll: f64 = (0..x.rows())
        .map(|i| {
            let eta = linear(w, x.row(i));
            f64::from(y[i]) * eta - softplus(eta)
        })
        .sum();
    ll - 0.5 * l2 * w[1..].iter().map(|v| v * v).sum::<f64>()
}

/// Gradient of [`objective`].
pub fn gradient(x: &Matrix, y: &[u8], w: &[f64], l2: f64) -> Vec<f64> {
    let d = w.len();
    let mut g = vec![0.0; d];
    for i in 0..x.rows() {
        let row = x.row(i);
        let r = f64::from(y[i]) - sigmoid(linear(w, row));
        g[0] += r;
        for j in 1..d {
            g[j] += r * row[j - 1];
        }
    }
    for j in 1..d {
        g[j] -= l2 * w[j];
    }
    g
}

// Negative Hessian: Xᵀ W X + l2·I (intercept unpenalised).
fn neg_hessian(x: &Matrix, w: &[f64], l2: f64) -> SymMatrix {
    let d = w.len();
    let mut h = Matrix::zeros(d, d);
    let mut xi = vec![1.0; d];
    for i in 0..x.rows() {
        let row = x.row(i);
        xi[1..].copy_from_slice(row);
        let p = sigmoid(linear(w, row));
        let wt = p * (1.0 - p);
        for a in 0..d {
            for b in a..d {
                h[(a, b)] += wt * xi[a] * xi[b];
            }
        }
    }
    SymMatrix::from_fn(d, |a, b| h[(a, b)] + if a == b && a > 0 { l2 } else { 0.0 })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fits by Newton's method (IRLS) with step halving. Falls back to a scaled
/// gradient step when the Hessian is too ill-conditioned to trust.
pub fn fit_logistic_xy(x: &Matrix, y: &[u8], l2: f64) -> Result<LogisticModel> {
    fit_logistic_capped(x, y, l2, MAX_ITERATIONS)
}

const ROUNDING_SLACK: f64 = 1e-13;

/// [`fit_logistic_xy`] with an explicit Newton iteration budget.
pub fn fit_logistic_capped(
    x: &Matrix,
    y: &[u8],
    l2: f64,
    max_iterations: usize,
) -> Result<LogisticModel> {
    let n = x.rows();
    let d = x.cols() + 1;
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if n < d {
        return Err(Error::validation(format!(
            "need at least {d} observations for {} features, got {n}",
            d - 1
        )));
    }
    let positives = y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::validation(
            "logistic regression needs both classes present",
        ));
    }
    if !(l2 >= 0.0) {
        return Err(Error::validation("l2 must be non-negative"));
    }

    let mut w = vec![0.0; d];
    let mut obj = objective(x, y, &w, l2);
    let mut trace = vec![obj];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iterations {
        let g = gradient(x, y, &w, l2);
        if norm(&g) < GRADIENT_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let eig = eigen_sym(&neg_hessian(x, &w, l2))?;
        let lmax = eig.values[0];
        let lmin = *eig.values.last().expect("non-empty");
        let direction: Vec<f64> = if lmin > 0.0 && lmax / lmin <= MAX_CONDITION {
            // δ = V diag(1/λ) Vᵀ g
            let coeffs: Vec<f64> = (0..d)
                .map(|k| (0..d).map(|i| eig.vectors[(i, k)] * g[i]).sum::<f64>() / eig.values[k])
                .collect();
            (0..d)
                .map(|i| (0..d).map(|k| eig.vectors[(i, k)] * coeffs[k]).sum())
                .collect()
        } else {
            let scale = if lmax > 0.0 { 1.0 / lmax } else { 1.0 };
            g.iter().map(|v| v * scale).collect()
        };

        let g_norm = norm(&g);
        let noise = ROUNDING_SLACK * (1.0 + obj.abs());
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = w
                .iter()
                .zip(&direction)
                .map(|(a, b)| a + step * b)
                .collect();
            let trial_obj = objective(x, y, &trial, l2);
            // Near the optimum the gain drops below rounding; the gradient decides.
            let ok = trial_obj > obj
                || (trial_obj >= obj - noise && norm(&gradient(x, y, &trial, l2)) < g_norm);
            if trial_obj.is_finite() && ok {
                w = trial;
                obj = trial_obj;
                trace.push(obj);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no ascent possible at working precision
            converged = norm(&gradient(x, y, &w, l2)) < GRADIENT_TOL;
            break;
        }
    }
    if !converged && iterations == max_iterations {
        converged = norm(&gradient(x, y, &w, l2)) < GRADIENT_TOL;
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("logistic weights diverged".into()));
    }
    Ok(LogisticModel {
        weights: w,
        converged,
        iterations,
        l2,
        objective_trace: trace,
    })
}

pub fn fit_logistic(ts: &TrainingSet, l2: f64) -> Result<LogisticModel> {
    fit_logistic_xy(&ts.features, &ts.labels, l2)
}

/// Probability of the positive class and the thresholded label
/// (probability ≥ 0.5 is positive).
pub fn predict(m: &LogisticModel, x: &[f64]) -> Result<(f64, u8)> {
    if x.len() + 1 != m.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: m.weights.len() - 1,
            got: x.len(),
        });
    }
    let p = sigmoid(linear(&m.weights, x));
    Ok((p, u8::from(p >= 0.5)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_predictions(truth: &[u8], predicted: &[u8]) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (1, _) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn positive(&self) -> ClassMetrics {
        ClassMetrics::new(self.tp, self.fp, self.fn_)
    }

    pub fn negative(&self) -> ClassMetrics {
        ClassMetrics::new(self.tn, self.fn_, self.fp)
    }

    /// Per-class metrics averaged with class-support weights.
    pub fn weighted(&self) -> Metrics {
        let pos = self.positive();
        let neg = self.negative();
        let n = (pos.support + neg.support) as f64;
        let (wp, wn) = (pos.support as f64 / n, neg.support as f64 / n);
        Metrics {
            precision: wp * pos.precision + wn * neg.precision,
            recall: wp * pos.recall + wn * neg.recall,
            f_measure: wp * pos.f_measure + wn * neg.f_measure,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub support: usize,
}

impl ClassMetrics {
    /// Metrics for one class from its hits, false alarms and misses.
    /// Undefined ratios are reported as 0.
    fn new(hits: usize, false_alarms: usize, misses: usize) -> Self {
        let precision = ratio(hits, hits + false_alarms);
        let recall = ratio(hits, hits + misses);
        let f_measure = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f_measure,
            support: hits + misses,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    #[default]
    Weighted,
    PositiveOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub l2: f64,
    pub averaging: Averaging,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            seed: 0,
            l2: DEFAULT_L2,
            averaging: Averaging::Weighted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub question: usize,
    pub variant: Variant,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub folds: usize,
    pub seed: u64,
    pub confusion: Confusion,
    pub averaging: Averaging,
    pub positive: ClassMetrics,
    pub negative: ClassMetrics,
    pub l2: f64,
    pub n: usize,
    pub nonconverged_folds: usize,
    pub protocol: String,
    /// Reference figures for the same question and variant, for context only.
    pub reference_metrics: Option<Metrics>,
}

/// Reference precision/recall/F for questions 1-6: raw features, then factors.
pub const REFERENCE_EIGHT: [(f64, f64, f64); 6] = [
    (0.783, 0.790, 0.786),
    (0.782, 0.788, 0.782),
    (0.714, 0.730, 0.715),
    (0.609, 0.610, 0.609),
    (0.746, 0.760, 0.750),
    (0.700, 0.710, 0.699),
];
pub const REFERENCE_THREE: [(f64, f64, f64); 6] = [
    (0.846, 0.904, 0.874),
    (0.843, 0.868, 0.855),
    (0.797, 0.913, 0.851),
    (0.661, 0.750, 0.703),
    (0.823, 0.890, 0.855),
    (0.726, 0.828, 0.774),
];

pub fn reference_metrics(question: usize, variant: Variant) -> Option<Metrics> {
    let table = match variant {
        Variant::Eight => &REFERENCE_EIGHT,
        Variant::Three => &REFERENCE_THREE,
    };
    table
        .get(question.checked_sub(1)?)
        .map(|&(precision, recall, f_measure)| Metrics {
            precision,
            recall,
            f_measure,
        })
}

/// Stratified fold ids: each class is shuffled with the seeded generator and
/// dealt round-robin, continuing the deal from one class to the next.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    let mut out = vec![0; labels.len()];
    let mut dealt = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            out[i] = dealt % folds;
            dealt += 1;
        }
    }
    out
}

/// Stratified k-fold cross-validation with pooled out-of-fold predictions.
pub fn evaluate_cv(
    features: &Matrix,
    labels: &[u8],
    question: usize,
    variant: Variant,
    opts: &CvOptions,
) -> Result<EvalReport> {
    let n = labels.len();
    if features.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: features.rows(),
        });
    }
    if opts.folds < 2 {
        return Err(Error::validation("cross-validation needs at least 2 folds"));
    }
    if n < opts.folds {
        return Err(Error::validation(format!(
            "{n} observations cannot fill {} folds; use fewer folds",
            opts.folds
        )));
    }
    let fold_of = stratified_folds(labels, opts.folds, opts.seed);
    let totals = [
        labels.iter().filter(|&&y| y == 0).count(),
        labels.iter().filter(|&&y| y == 1).count(),
    ];
    for f in 0..opts.folds {
        for class in 0..2 {
            let inside = (0..n)
                .filter(|&i| fold_of[i] == f && labels[i] as usize == class)
                .count();
            if totals[class] == inside {
                return Err(Error::validation(format!(
                    "question {question}: training fold {} has no class-{class} examples \
                     ({} of that class overall); use fewer folds",
                    f + 1,
                    totals[class]
                )));
            }
        }
    }

    let mut predicted = vec![0u8; n];
    let mut nonconverged = 0;
    for f in 0..opts.folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
        let x_train = Matrix::from_fn(train.len(), features.cols(), |r, c| features[(train[r], c)]);
        let y_train: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
        let model = fit_logistic_xy(&x_train, &y_train, opts.l2)?;
        if !model.converged {
            nonconverged += 1;
        }
        for &i in &test {
            predicted[i] = predict(&model, features.row(i))?.1;
        }
    }

    let confusion = Confusion::from_predictions(labels, &predicted);
    let positive = confusion.positive();
    let metrics = match opts.averaging {
        Averaging::Weighted => confusion.weighted(),
        Averaging::PositiveOnly => Metrics {
            precision: positive.precision,
            recall: positive.recall,
            f_measure: positive.f_measure,
        },
    };
    Ok(EvalReport {
        question,
        variant,
        precision: metrics.precision,
        recall: metrics.recall,
        f_measure: metrics.f_measure,
        folds: opts.folds,
        seed: opts.seed,
        confusion,
        averaging: opts.averaging,
        positive,
        negative: confusion.negative(),
        l2: opts.l2,
        n,
        nonconverged_folds: nonconverged,
        protocol: format!(
            "stratified {}-fold cross-validation, single repetition, pooled out-of-fold predictions",
            opts.folds
        ),
        reference_metrics: reference_metrics(question, variant),
    })
}

/// One question's evaluation under both feature sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedReport {
    pub question: usize,
    pub eight: EvalReport,
    pub three: EvalReport,
}

/// Evaluates both variants on every `(question, labels)` pair. Fold
/// assignment depends only on labels and seed, so both variants share it.
pub fn compare_variants(
    features8: &Matrix,
    scores: &Matrix,
    questions: &[(usize, Vec<u8>)],
    opts: &CvOptions,
) -> Result<Vec<PairedReport>> {
    if features8.rows() != scores.rows() {
        return Err(Error::DimensionMismatch {
            expected: features8.rows(),
            got: scores.rows(),
        });
    }
    questions
        .iter()
        .map(|(q, y)| {
            Ok(PairedReport {
                question: *q,
                eight: evaluate_cv(features8, y, *q, Variant::Eight, opts)?,
                three: evaluate_cv(scores, y, *q, Variant::Three, opts)?,
            })
        })
        .collect()
}

/// Comparison table rows: `question,variant,precision,recall,f_measure`.
pub fn comparison_rows(reports: &[EvalReport]) -> Vec<(usize, Variant, f64, f64, f64)> {
    let mut rows: Vec<_> = reports
        .iter()
        .map(|r| (r.question, r.variant, r.precision, r.recall, r.f_measure))
        .collect();
    rows.sort_by_key(|r| (r.0, r.1 == Variant::Three));
    rows
}
