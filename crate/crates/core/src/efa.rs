//! Exploratory factor analysis: principal-component extraction, retention
//! rules, varimax rotation, variable assignment and factor scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    canonical_sign, correlation_matrix, eigen_sym, invert_spd, standardize, DataMatrix,
    EigenDecomposition, Matrix, SymMatrix,
};

pub const DEFAULT_CUTOFF: f64 = 0.36;
pub const DEFAULT_CUMVAR_PCT: f64 = 60.0;

const NEG_EIGEN_TOL: f64 = 1e-10;
const VARIMAX_GAIN_TOL: f64 = 1e-9;
const VARIMAX_MAX_SWEEPS: usize = 100;

/// Variables × factors loading matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingMatrix {
    variables: Vec<String>,
    values: Matrix,
}

impl LoadingMatrix {
    pub fn new(variables: Vec<String>, values: Matrix) -> Result<Self> {
        if variables.len() != values.rows() {
            return Err(Error::DimensionMismatch {
                expected: values.rows(),
                got: variables.len(),
            });
        }
        Ok(Self { variables, values })
    }

    pub fn from_rows(variables: &[&str], rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            variables.iter().map(|s| s.to_string()).collect(),
            Matrix::from_rows(rows)?,
        )
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn matrix(&self) -> &Matrix {
        &self.values
    }

    pub fn n_variables(&self) -> usize {
        self.values.rows()
    }

    pub fn n_factors(&self) -> usize {
        self.values.cols()
    }

    #[inline]
    pub fn get(&self, var: usize, factor: usize) -> f64 {
        self.values[(var, factor)]
    }

    /// Sum of squared loadings per factor (variance explained by each column).
    pub fn column_ss(&self) -> Vec<f64> {
        (0..self.n_factors())
            .map(|j| {
                (0..self.n_variables())
                    .map(|i| self.get(i, j).powi(2))
                    .sum()
            })
            .collect()
    }

    fn with_values(&self, values: Matrix) -> Self {
        Self {
            variables: self.variables.clone(),
            values,
        }
    }
}

/// Principal-component loadings: column j is eigenvector j scaled by √λ_j.
pub fn extract_pca_loadings(
    eig: &EigenDecomposition,
    k: usize,
    variables: &[String],
) -> Result<LoadingMatrix> {
    let p = eig.values.len();
    if k == 0 || k > p {
        return Err(Error::validation(format!(
            "number of factors must be in 1..={p}, got {k}"
        )));
    }
    let mut scale = Vec::with_capacity(k);
    for (j, &lambda) in eig.values.iter().take(k).enumerate() {
        if lambda < -NEG_EIGEN_TOL {
            return Err(Error::Numerical(format!(
                "eigenvalue {j} is negative ({lambda:.3e})"
            )));
        }
        scale.push(lambda.max(0.0).sqrt());
    }
    let values = Matrix::from_fn(p, k, |i, j| eig.vectors[(i, j)] * scale[j]);
    LoadingMatrix::new(variables.to_vec(), values)
}

/// Per-variable communality: row sum of squared loadings.
pub fn communalities(l: &LoadingMatrix) -> Vec<f64> {
    (0..l.n_variables())
        .map(|i| l.values.row(i).iter().map(|v| v * v).sum())
        .collect()
}

/// Kaiser criterion: number of eigenvalues strictly greater than one.
pub fn retain_kaiser(eigenvalues: &[f64]) -> usize {
    eigenvalues.iter().filter(|&&l| l > 1.0).count()
}

/// Smallest k whose cumulative explained variance reaches `threshold_pct`.
pub fn retain_cumvar(eigenvalues: &[f64], threshold_pct: f64) -> usize {
    let p = eigenvalues.len();
    let mut cum = 0.0;
    for (i, &l) in eigenvalues.iter().enumerate() {
        cum += l;
        // small slack so a 100% threshold is reachable despite rounding
        if 100.0 * cum / p as f64 >= threshold_pct - 1e-9 {
            return i + 1;
        }
    }
    p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreePoint {
    pub component: usize,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scree {
    pub points: Vec<ScreePoint>,
    /// 1-based component where the curve bends hardest; components up to
    /// and including it are the suggested retention.
    pub elbow: Option<usize>,
}

/// Scree data plus an elbow suggestion from the largest second difference
/// `λ_{i-1} - 2λ_i + λ_{i+1}`.
pub fn scree_series(eigenvalues: &[f64]) -> Scree {
    let points = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &eigenvalue)| ScreePoint {
            component: i + 1,
            eigenvalue,
        })
        .collect();
    let mut elbow = None;
    if eigenvalues.len() >= 3 {
        let scale = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut best: Option<(usize, f64)> = None;
        for i in 1..eigenvalues.len() - 1 {
            let acc = eigenvalues[i - 1] - 2.0 * eigenvalues[i] + eigenvalues[i + 1];
            if best.is_none_or(|(_, b)| acc > b) {
                best = Some((i, acc));
            }
        }
        if let Some((i, acc)) = best {
            if acc > 1e-12 * scale.max(1.0) {
                elbow = Some(i + 1);
            }
        }
    }
    Scree { points, elbow }
}

/// Raw varimax criterion: Σ_j [ mean_i(x_ij⁴) - mean_i(x_ij²)² ].
pub fn varimax_criterion(m: &Matrix) -> f64 {
    let p = m.rows() as f64;
    (0..m.cols())
        .map(|j| {
            let (s2, s4) = (0..m.rows()).fold((0.0, 0.0), |(s2, s4), i| {
                let x2 = m[(i, j)] * m[(i, j)];
                (s2 + x2, s4 + x2 * x2)
            });
            s4 / p - (s2 / p) * (s2 / p)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    pub loadings: LoadingMatrix,
    /// Orthogonal k×k matrix with `loadings = input · rotation`.
    pub rotation: Matrix,
    pub sweeps: usize,
    /// Criterion value before the first sweep and after each sweep.
    pub criterion_trace: Vec<f64>,
    pub converged: bool,
}

/// Orthogonal varimax rotation by pairwise planar rotations.
///
/// With `kaiser_normalize`, rows are scaled to unit length before rotating.
/// Output columns are ordered by descending sum of squared loadings, and
/// each column's largest-magnitude entry is positive.
pub fn varimax_rotate(l: &LoadingMatrix, kaiser_normalize: bool) -> Result<Rotation> {
    let p = l.n_variables();
    let k = l.n_factors();
    if k == 0 {
        return Err(Error::validation("varimax needs at least one factor"));
    }
    let mut work = l.values.clone();
    if kaiser_normalize {
        for (i, h2) in communalities(l).into_iter().enumerate() {
            let h = h2.sqrt();
            if h > 0.0 {
                for j in 0..k {
                    work[(i, j)] /= h;
                }
            }
        }
    }

    let mut rot = Matrix::identity(k);
    let mut trace = vec![varimax_criterion(&work)];
    let mut sweeps = 0;
    let mut converged = k == 1;
    let pf = p as f64;

    while !converged && sweeps < VARIMAX_MAX_SWEEPS {
        for a in 0..k {
            for b in a + 1..k {
                let (mut su, mut sv, mut suv2, mut sduv) = (0.0, 0.0, 0.0, 0.0);
                for i in 0..p {
                    let x = work[(i, a)];
                    let y = work[(i, b)];
                    let u = x * x - y * y;
                    let v = 2.0 * x * y;
                    su += u;
                    sv += v;
                    suv2 += u * u - v * v;
                    sduv += 2.0 * u * v;
                }
                let num = sduv - 2.0 * su * sv / pf;
                let den = suv2 - (su * su - sv * sv) / pf;
                let phi = 0.25 * num.atan2(den);
                if phi.abs() < 1e-15 {
                    continue;
                }
                let (s, c) = phi.sin_cos();
                for i in 0..p {
                    let x = work[(i, a)];
                    let y = work[(i, b)];
                    work[(i, a)] = c * x + s * y;
                    work[(i, b)] = -s * x + c * y;
                }
                for i in 0..k {
                    let x = rot[(i, a)];
                    let y = rot[(i, b)];
                    rot[(i, a)] = c * x + s * y;
                    rot[(i, b)] = -s * x + c * y;
                }
            }
        }
        sweeps += 1;
        let crit = varimax_criterion(&work);
        let gain = crit - trace[trace.len() - 1];
        trace.push(crit);
        if gain < VARIMAX_GAIN_TOL {
            converged = true;
        }
    }

    // Row scaling commutes with right-multiplication, so L·R is the
    // de-normalised rotated matrix in both modes.
    let rotated = l.values.matmul(&rot)?;
    let ss: Vec<f64> = (0..k)
        .map(|j| (0..p).map(|i| rotated[(i, j)].powi(2)).sum())
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| ss[y].total_cmp(&ss[x]).then(x.cmp(&y)));
    let signs: Vec<f64> = order
        .iter()
        .map(|&j| canonical_sign(&rotated.column(j)))
        .collect();
    let rotation = Matrix::from_fn(k, k, |i, j| rot[(i, order[j])] * signs[j]);
    let loadings = Matrix::from_fn(p, k, |i, j| rotated[(i, order[j])] * signs[j]);

    Ok(Rotation {
        loadings: l.with_values(loadings),
        rotation,
        sweeps,
        criterion_trace: trace,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub aligned: Matrix,
    /// `aligned` column j is candidate column `permutation[j]` times `signs[j]`.
    pub permutation: Vec<usize>,
    pub signs: Vec<f64>,
    pub distance: f64,
}

/// Finds the column permutation and sign pattern of `candidate` closest to
/// `reference` in Frobenius norm. Exhaustive over k!·2^k, so keep k small.
pub fn align_to_reference(candidate: &Matrix, reference: &Matrix) -> Result<Alignment> {
    if candidate.rows() != reference.rows() || candidate.cols() != reference.cols() {
        return Err(Error::DimensionMismatch {
            expected: reference.cols(),
            got: candidate.cols(),
        });
    }
    let k = candidate.cols();
    if k > 8 {
        return Err(Error::validation("alignment search limited to k <= 8"));
    }
    let p = candidate.rows();
    // cost of mapping candidate column c onto reference column r with sign s
    let cost = |c: usize, r: usize, s: f64| -> f64 {
        (0..p)
            .map(|i| (s * candidate[(i, c)] - reference[(i, r)]).powi(2))
            .sum()
    };

    let mut perm: Vec<usize> = (0..k).collect();
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    loop {
        // signs are independent per column once the permutation is fixed
        let mut total = 0.0;
        let mut signs = Vec::with_capacity(k);
        for (r, &c) in perm.iter().enumerate() {
            let plus = cost(c, r, 1.0);
            let minus = cost(c, r, -1.0);
            if minus < plus {
                total += minus;
                signs.push(-1.0);
            } else {
                total += plus;
                signs.push(1.0);
            }
        }
        if best.as_ref().is_none_or(|(b, _, _)| total < *b) {
            best = Some((total, perm.clone(), signs));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (dist2, permutation, signs) = best.expect("at least one permutation");
    let aligned = Matrix::from_fn(p, k, |i, j| candidate[(i, permutation[j])] * signs[j]);
    Ok(Alignment {
        aligned,
        permutation,
        signs,
        distance: dist2.sqrt(),
    })
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub variables: Vec<String>,
    /// Factor index per variable, `None` when no loading reaches the cutoff.
    pub factor: Vec<Option<usize>>,
    pub cross_loading: Vec<bool>,
    pub cutoff: f64,
}

impl Assignment {
    /// Variable names grouped per factor, in factor order.
    pub fn groups(&self, n_factors: usize) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); n_factors];
        for (name, f) in self.variables.iter().zip(&self.factor) {
            if let Some(f) = f {
                out[*f].push(name.clone());
            }
        }
        out
    }

    pub fn unassigned(&self) -> Vec<&str> {
        self.variables
            .iter()
            .zip(&self.factor)
            .filter(|(_, f)| f.is_none())
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

/// Assigns each variable to the factor with its largest absolute loading,
/// provided that loading reaches `cutoff`.
pub fn assign_variables(l: &LoadingMatrix, cutoff: f64) -> Assignment {
    let mut factor = Vec::with_capacity(l.n_variables());
    let mut cross_loading = Vec::with_capacity(l.n_variables());
    for i in 0..l.n_variables() {
        let row = l.values.row(i);
        let mut best = 0usize;
        for (j, v) in row.iter().enumerate() {
            if v.abs() > row[best].abs() {
                best = j;
            }
        }
        let above = row.iter().filter(|v| v.abs() >= cutoff).count();
        factor.push((!row.is_empty() && row[best].abs() >= cutoff).then_some(best));
        cross_loading.push(above >= 2);
    }
    Assignment {
        variables: l.variables.clone(),
        factor,
        cross_loading,
        cutoff,
    }
}

/// Per-observation factor values, n × k.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub factor_names: Vec<String>,
    pub values: Matrix,
}

impl ScoreMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.rows()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.values.rows() as f64;
        (0..self.values.cols())
            .map(|j| self.values.column(j).iter().sum::<f64>() / n)
            .collect()
    }

    pub fn to_data_matrix(&self) -> Result<DataMatrix> {
        DataMatrix::from_rows(self.factor_names.clone(), &self.values.to_rows())
    }
}

fn factor_names(k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("factor{j}")).collect()
}

fn data_as_matrix(z: &DataMatrix) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = (0..z.n_rows()).map(|r| z.row(r).to_vec()).collect();
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, z.n_cols()));
    }
    Matrix::from_rows(&rows)
}

/// Regression-method (Thomson) scores: `Z · R⁻¹ · L`.
pub fn factor_scores(
    standardized: &DataMatrix,
    r: &SymMatrix,
    rotated: &LoadingMatrix,
) -> Result<ScoreMatrix> {
    if standardized.n_cols() != r.dim() || r.dim() != rotated.n_variables() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            got: standardized.n_cols(),
        });
    }
    let weights = invert_spd(r)?.to_matrix().matmul(rotated.matrix())?;
    let values = data_as_matrix(standardized)?.matmul(&weights)?;
    Ok(ScoreMatrix {
        factor_names: factor_names(rotated.n_factors()),
        values,
    })
}

/// Alternative scoring: sum of the standardized variables assigned to each
/// factor. Unassigned variables contribute nothing.
pub fn sum_of_assigned_scores(
    standardized: &DataMatrix,
    assignment: &Assignment,
    k: usize,
) -> Result<ScoreMatrix> {
    if standardized.n_cols() != assignment.factor.len() {
        return Err(Error::DimensionMismatch {
            expected: assignment.factor.len(),
            got: standardized.n_cols(),
        });
    }
    let values = Matrix::from_fn(standardized.n_rows(), k, |r, j| {
        assignment
            .factor
            .iter()
            .enumerate()
            .filter(|(_, f)| **f == Some(j))
            .map(|(c, _)| standardized.get(r, c))
            .sum()
    });
    Ok(ScoreMatrix {
        factor_names: factor_names(k),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "kebab-case")]
pub enum Retention {
    Kaiser,
    Cumvar(f64),
    Fixed(usize),
}

impl std::fmt::Display for Retention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Retention::Kaiser => f.write_str("kaiser"),
            Retention::Cumvar(pct) => write!(f, "cumvar:{pct}"),
            Retention::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

impl std::str::FromStr for Retention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::validation(format!("invalid retention rule '{s}'"));
        match s.split_once(':') {
            None if s == "kaiser" => Ok(Retention::Kaiser),
            None if s == "cumvar" => Ok(Retention::Cumvar(DEFAULT_CUMVAR_PCT)),
            Some(("cumvar", pct)) => {
                let pct: f64 = pct.parse().map_err(|_| bad())?;
                if !(pct > 0.0 && pct <= 100.0) {
                    return Err(bad());
                }
                Ok(Retention::Cumvar(pct))
            }
            Some(("fixed", k)) => match k.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(Retention::Fixed(k)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMethod {
    Regression,
    SumOfAssigned,
}

impl std::str::FromStr for ScoreMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(ScoreMethod::Regression),
            "sum-of-assigned" => Ok(ScoreMethod::SumOfAssigned),
            _ => Err(Error::validation(format!("invalid score method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfaConfig {
    pub retention: Retention,
    pub cutoff: f64,
    pub kaiser_normalize: bool,
    pub score_method: ScoreMethod,
}

impl Default for EfaConfig {
    fn default() -> Self {
        Self {
            retention: Retention::Kaiser,
            cutoff: DEFAULT_CUTOFF,
            kaiser_normalize: true,
            score_method: ScoreMethod::Regression,
        }
    }
}

/// Result of a full extraction + rotation run.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub variables: Vec<String>,
    pub n_observations: usize,
    pub correlation: SymMatrix,
    pub eigenvalues: Vec<f64>,
    pub pct_variance: Vec<f64>,
    pub cumulative_pct: Vec<f64>,
    pub k: usize,
    pub loadings_unrotated: LoadingMatrix,
    pub loadings_rotated: LoadingMatrix,
    pub rotation: Matrix,
    pub rotation_ssl: Vec<f64>,
    pub communalities: Vec<f64>,
    pub assignment: Assignment,
    pub scree: Scree,
    pub retention_counts: RetentionCounts,
    pub config: EfaConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionCounts {
    pub kaiser: usize,
    pub cumvar_60: usize,
    pub scree_elbow: Option<usize>,
}

/// Percent of total variance per component, `100·λ_i / p`.
pub fn pct_variance(eigenvalues: &[f64]) -> Vec<f64> {
    let p = eigenvalues.len() as f64;
    eigenvalues.iter().map(|l| 100.0 * l / p).collect()
}

fn cumulative(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

impl FactorModel {
    /// Fits the model on raw observations (standardized internally).
    pub fn fit(data: &DataMatrix, config: EfaConfig) -> Result<Self> {
        let r = correlation_matrix(data)?;
        let eig = eigen_sym(&r)?;
        let p = eig.values.len();
        let scree = scree_series(&eig.values);
        let counts = RetentionCounts {
            kaiser: retain_kaiser(&eig.values),
            cumvar_60: retain_cumvar(&eig.values, DEFAULT_CUMVAR_PCT),
            scree_elbow: scree.elbow,
        };
        let k = match config.retention {
            Retention::Kaiser => counts.kaiser,
            Retention::Cumvar(pct) => retain_cumvar(&eig.values, pct),
            Retention::Fixed(k) => k,
        };
        if k == 0 {
            return Err(Error::Numerical(
                "retention rule kept no factors (no eigenvalue above 1)".into(),
            ));
        }
        if k > p {
            return Err(Error::validation(format!(
                "cannot retain {k} factors from {p} variables"
            )));
        }
        let unrotated = extract_pca_loadings(&eig, k, data.column_names())?;
        let rotated = varimax_rotate(&unrotated, config.kaiser_normalize)?;
        let pct = pct_variance(&eig.values);
        Ok(Self {
            variables: data.column_names().to_vec(),
            n_observations: data.n_rows(),
            correlation: r,
            cumulative_pct: cumulative(&pct),
            pct_variance: pct,
            k,
            communalities: communalities(&unrotated),
            rotation_ssl: rotated.loadings.column_ss(),
            assignment: assign_variables(&rotated.loadings, config.cutoff),
            loadings_unrotated: unrotated,
            loadings_rotated: rotated.loadings,
            rotation: rotated.rotation,
            eigenvalues: eig.values,
            scree,
            retention_counts: counts,
            config,
        })
    }

    /// Scores for `data`, standardized with its own moments.
    pub fn scores(&self, data: &DataMatrix) -> Result<ScoreMatrix> {
        let z = standardize(data)?;
        match self.config.score_method {
            ScoreMethod::Regression => factor_scores(&z, &self.correlation, &self.loadings_rotated),
            ScoreMethod::SumOfAssigned => sum_of_assigned_scores(&z, &self.assignment, self.k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn identity_loadings_are_unit_columns() {
        let eig = eigen_sym(&SymMatrix::identity(4)).unwrap();
        let l = extract_pca_loadings(&eig, 4, &names(4)).unwrap();
        for h in communalities(&l) {
            assert!((h - 1.0).abs() < 1e-12);
        }
        for j in 0..4 {
            let nonzero = l
                .matrix()
                .column(j)
                .iter()
                .filter(|v| v.abs() > 0.5)
                .count();
            assert_eq!(nonzero, 1);
        }
    }

    #[test]
    fn two_by_two_first_loading_closed_form() {
        for r in [0.2, 0.5, 0.8] {
            let m = SymMatrix::from_rows(&[vec![1.0, r], vec![r, 1.0]]).unwrap();
            let l = extract_pca_loadings(&eigen_sym(&m).unwrap(), 1, &names(2)).unwrap();
            // eigenpair (1 + r, (1, 1)/√2): loading = √(1+r)/√2
            let want = ((1.0 + r) / 2.0).sqrt();
            assert!((l.get(0, 0) - want).abs() < 1e-12);
            assert!((l.get(1, 0) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn extraction_rejects_bad_k_and_negative_eigenvalues() {
        let eig = eigen_sym(&SymMatrix::identity(3)).unwrap();
        assert!(extract_pca_loadings(&eig, 0, &names(3)).is_err());
        assert!(extract_pca_loadings(&eig, 4, &names(3)).is_err());
        let neg = EigenDecomposition {
            values: vec![2.0, -0.5],
            vectors: Matrix::identity(2),
        };
        assert!(matches!(
            extract_pca_loadings(&neg, 2, &names(2)),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn kaiser_boundary() {
        assert_eq!(retain_kaiser(&[1.0; 8]), 0);
        assert_eq!(retain_kaiser(&[5.0, 1.0 + 1e-9, 0.5]), 2);
    }

    #[test]
    fn cumvar_full_threshold_keeps_everything() {
        let eig = [2.5, 0.3, 0.1, 0.1];
        // sum is 3.0 here, not 4, so 100% is never reached: cap at p
        assert_eq!(retain_cumvar(&eig, 100.0), 4);
        let eig = [2.0, 1.0, 0.7, 0.3];
        assert_eq!(retain_cumvar(&eig, 100.0), 4);
        assert_eq!(retain_cumvar(&eig, 50.0), 1);
        assert_eq!(retain_cumvar(&eig, 75.0), 2);
    }

    #[test]
    fn scree_geometric_spectrum() {
        // second differences: 8-8+2=2, 4-4+1=1, 2-2+0.5=0.5, ... -> peak at component 2
        let s = scree_series(&[8.0, 4.0, 2.0, 1.0, 0.5, 0.25]);
        assert_eq!(s.points.len(), 6);
        assert_eq!(s.elbow, Some(2));
    }

    #[test]
    fn scree_flat_and_short() {
        assert_eq!(scree_series(&[1.0; 6]).elbow, None);
        let s = scree_series(&[1.5, 0.5]);
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.elbow, None);
    }

    #[test]
    fn varimax_keeps_simple_structure() {
        let l = LoadingMatrix::from_rows(
            &["a", "b", "c"],
            &[vec![0.9, 0.0], vec![0.0, 0.9], vec![0.8, 0.0]],
        )
        .unwrap();
        for norm in [true, false] {
            let rot = varimax_rotate(&l, norm).unwrap();
            let al = align_to_reference(rot.loadings.matrix(), l.matrix()).unwrap();
            assert!(al.aligned.max_abs_diff(l.matrix()) < 1e-8);
        }
    }

    #[test]
    fn varimax_single_factor_is_identity() {
        let l = LoadingMatrix::from_rows(&["a", "b"], &[vec![0.7], vec![0.4]]).unwrap();
        let rot = varimax_rotate(&l, true).unwrap();
        assert_eq!(rot.rotation, Matrix::identity(1));
        assert_eq!(rot.loadings, l);
        assert_eq!(rot.sweeps, 0);
    }

    #[test]
    fn alignment_recovers_permutation_and_signs() {
        let reference = Matrix::from_rows(&[
            vec![0.9, 0.1, 0.0],
            vec![0.2, 0.8, -0.1],
            vec![0.0, 0.3, 0.7],
        ])
        .unwrap();
        let candidate = Matrix::from_fn(3, 3, |i, j| match j {
            0 => -reference[(i, 2)],
            1 => reference[(i, 0)],
            _ => -reference[(i, 1)],
        });
        let al = align_to_reference(&candidate, &reference).unwrap();
        assert_eq!(al.permutation, vec![1, 2, 0]);
        assert_eq!(al.signs, vec![1.0, -1.0, -1.0]);
        assert!(al.distance < 1e-15);
    }

    #[test]
    fn assignment_edge_cases() {
        let l = LoadingMatrix::from_rows(
            &["weak", "split", "clean"],
            &[vec![0.2, 0.3], vec![0.50, 0.48], vec![-0.1, -0.7]],
        )
        .unwrap();
        let a = assign_variables(&l, DEFAULT_CUTOFF);
        assert_eq!(a.factor, vec![None, Some(0), Some(1)]);
        assert_eq!(a.cross_loading, vec![false, true, false]);
        assert_eq!(a.unassigned(), vec!["weak"]);
        assert_eq!(
            a.groups(2),
            vec![vec!["split".to_string()], vec!["clean".to_string()]]
        );
    }

    #[test]
    fn identity_scores_equal_data() {
        let z = standardize(
            &DataMatrix::from_rows(
                names(2),
                &[
                    vec![1.0, 5.0],
                    vec![2.0, 3.0],
                    vec![4.0, 4.0],
                    vec![7.0, 1.0],
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let l = LoadingMatrix::new(names(2), Matrix::identity(2)).unwrap();
        let s = factor_scores(&z, &SymMatrix::identity(2), &l).unwrap();
        for r in 0..4 {
            for c in 0..2 {
                assert!((s.values[(r, c)] - z.get(r, c)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn retention_parsing() {
        assert_eq!("kaiser".parse::<Retention>().unwrap(), Retention::Kaiser);
        assert_eq!(
            "cumvar:75".parse::<Retention>().unwrap(),
            Retention::Cumvar(75.0)
        );
        assert_eq!("fixed:3".parse::<Retention>().unwrap(), Retention::Fixed(3));
        for r in [
            Retention::Kaiser,
            Retention::Cumvar(62.5),
            Retention::Fixed(2),
        ] {
            assert_eq!(r.to_string().parse::<Retention>().unwrap(), r);
        }
        for bad in ["", "fixed:0", "cumvar:0", "cumvar:150", "scree", "fixed:x"] {
            assert!(bad.parse::<Retention>().is_err(), "{bad}");
        }
    }
}
