//! Shared inputs for the criterion benches.

use ptex_core::{CountDataset, PteParams, RegressionData, RngStream};

/// Parameters close to the seizure-data MLE.
pub fn seizure_params() -> PteParams {
    PteParams::new(-0.701, 0.873).expect("valid parameters")
}

/// `n` seeded draws from `params`.
pub fn sampled_dataset(params: &PteParams, n: usize, seed: u64) -> CountDataset {
    CountDataset::from_counts(params.sample(n, &mut RngStream::new(seed))).expect("non-empty sample")
}

/// Synthetic regression data with two standard-normal covariates.
pub fn regression_data(n: usize) -> RegressionData {
    RegressionData::simulate(n, 2.5, &[0.5, 0.3, -0.2], &mut RngStream::new(1)).expect("valid design")
}
