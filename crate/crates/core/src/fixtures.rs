//! Reference values for the eight-feature trust model, transcribed to three
//! decimals. The raw profiles behind them are not available, so these serve
//! as consistency fixtures rather than end-to-end targets.

use crate::efa::LoadingMatrix;
use crate::ingest::FEATURE_NAMES;

/// Initial eigenvalues of the 8×8 feature correlation matrix.
pub const EIGENVALUES: [f64; 8] = [3.202, 2.672, 1.051, 0.348, 0.324, 0.222, 0.145, 0.036];

/// "% of Variance" column accompanying [`EIGENVALUES`].
pub const PCT_VARIANCE: [f64; 8] = [40.030, 33.395, 13.138, 4.347, 4.048, 2.775, 1.818, 0.450];

/// Cumulative percent column accompanying [`EIGENVALUES`].
pub const CUMULATIVE_PCT: [f64; 8] = [
    40.030, 73.425, 86.563, 90.909, 94.957, 97.733, 99.550, 100.000,
];

/// Sums of squared loadings after varimax, in reference column order.
pub const ROTATION_SSL: [f64; 3] = [2.642, 2.554, 1.729];
pub const ROTATION_SSL_TOTAL: f64 = 6.925;

/// Extraction communalities with three retained components.
pub const COMMUNALITIES: [f64; 8] = [0.873, 0.884, 0.895, 0.861, 0.786, 0.763, 0.945, 0.918];

/// Unrotated principal-component loadings, three components.
pub const UNROTATED: [[f64; 3]; 8] = [
    [0.760, -0.106, -0.532],
    [0.847, -0.288, 0.288],
    [0.676, 0.115, -0.652],
    [0.763, -0.440, 0.293],
    [0.747, -0.334, 0.341],
    [0.251, 0.817, 0.180],
    [0.365, 0.894, 0.111],
    [0.338, 0.889, 0.110],
];

/// Varimax-rotated loadings.
pub const ROTATED: [[f64; 3]; 8] = [
    [0.018, 0.350, 0.886],
    [0.059, 0.909, 0.234],
    [0.170, 0.139, 0.920],
    [-0.107, 0.904, 0.181],
    [-0.003, 0.876, 0.133],
    [0.873, -0.025, 0.001],
    [0.965, -0.002, 0.123],
    [0.952, -0.021, 0.109],
];

/// Variable groups read off the rotated solution, one per factor.
pub const GROUPS: [&[&str]; 3] = [
    &["total_person", "pic_person", "self"],
    &["follower", "likes", "comments"],
    &["post", "following"],
];

/// Conventional names of the three factors; report decoration only.
pub const FACTOR_LABELS: [&str; 3] = ["Social Proof", "Social Approval", "User Self-Disclosure"];

/// Profiles per yes-count (0..=5 of 5 raters), one column per question.
pub const VOTE_PATTERNS: [[usize; 6]; 6] = [
    [2, 8, 17, 14, 15, 44],
    [2, 11, 19, 13, 13, 42],
    [34, 19, 16, 15, 12, 4],
    [13, 17, 18, 17, 14, 21],
    [3, 7, 17, 13, 18, 42],
    [7, 13, 16, 14, 18, 32],
];

/// Reported KMO value and Bartlett statistic.
pub const KMO: f64 = 0.714;
pub const BARTLETT_CHI2: f64 = 664.229;
pub const BARTLETT_DF: u32 = 28;

fn loading_matrix(rows: &[[f64; 3]; 8]) -> LoadingMatrix {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    LoadingMatrix::from_rows(&FEATURE_NAMES, &rows).expect("fixture shape")
}

pub fn unrotated_loadings() -> LoadingMatrix {
    loading_matrix(&UNROTATED)
}

pub fn rotated_loadings() -> LoadingMatrix {
    loading_matrix(&ROTATED)
}
