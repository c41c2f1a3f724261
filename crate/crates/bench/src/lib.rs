//! Inputs shared by the criterion benches.

use factorlens_core::efa::LoadingMatrix;
use factorlens_core::ingest::{FeatureTable, LabelSet};
use factorlens_core::matrix::{Matrix, SymMatrix};
use factorlens_core::{ingest, synth};

/// Dense symmetric test matrix with a deterministic, well-spread spectrum.
pub fn symmetric(dim: usize) -> SymMatrix {
    SymMatrix::from_fn(dim, |i, j| {
        let base = ((i * 7 + j * 13) as f64).sin() * 0.5;
        if i == j {
            base + dim as f64 * 0.25 + i as f64
        } else {
            base
        }
    })
}

/// p×k loadings with a noisy simple structure.
pub fn loadings(p: usize, k: usize) -> LoadingMatrix {
    let names: Vec<String> = (0..p).map(|i| format!("x{i}")).collect();
    let m = Matrix::from_fn(p, k, |i, j| {
        let main = if i % k == j { 0.75 } else { 0.1 };
        main + 0.08 * ((i * 31 + j * 17) as f64).cos()
    });
    LoadingMatrix::new(names, m).expect("valid shape")
}

/// Features and majority labels for `n` synthetic profiles.
pub fn synthetic(n: usize, seed: u64) -> (FeatureTable, LabelSet) {
    let d = synth::generate(n, seed);
    let features = FeatureTable::from_profiles(&d.profiles, ingest::DEFAULT_WINDOW)
        .expect("synthetic profiles are valid")
        .value;
    let labels = ingest::aggregate_labels(&d.survey, ingest::VoteMode::Strict)
        .expect("odd rater count")
        .value;
    (features, labels)
}
