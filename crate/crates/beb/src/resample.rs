//! Bootstrap resampling of datasets.
//!
//! Two schemes:
//! * parametric — keep each area's design (D or n, covariates) and redraw
//!   its response from the fitted two-stage model;
//! * nonparametric — draw whole area tuples i.i.d. with replacement, which
//!   keeps responses paired with their own variances and covariates.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::data::{AreaObs, Dataset};
use crate::error::{Error, Result};
use crate::model::HierarchicalModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapScheme {
    /// Redraw responses from the fitted model (the default).
    Parametric,
    /// Resample whole area tuples with replacement.
    NonparametricArea,
}

/// How to generate bootstrap replicates: scheme, replicate count, root seed
/// and the per-replicate refit retry budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub b: usize,
    pub scheme: BootstrapScheme,
    pub seed: u64,
    pub max_retries: u32,
}

pub const DEFAULT_MAX_RETRIES: u32 = 10;

impl BootstrapSpec {
    pub fn new(b: usize, scheme: BootstrapScheme, seed: u64) -> Result<Self> {
        if b == 0 {
            return Err(Error::Config("bootstrap replicate count must be >= 1".into()));
        }
        Ok(BootstrapSpec {
            b,
            scheme,
            seed,
            max_retries: DEFAULT_MAX_RETRIES,
        })
    }

    pub fn with_max_retries(mut self, max_retries: u32) -> Self {
        self.max_retries = max_retries;
        self
    }
}

/// Materializes the dataset selected by a full-length index vector.
pub fn dataset_from_indices<A: AreaObs>(dataset: &Dataset<A>, indices: &[usize]) -> Dataset<A> {
    assert_eq!(indices.len(), dataset.len(), "index vector must have length m");
    let areas: Vec<A> = indices.iter().map(|&i| dataset.areas()[i].clone()).collect();
    Dataset::from_areas_unchecked_ids(areas).expect("resample preserves dataset invariants")
}

/// Draws m areas uniformly with replacement from `dataset`.
///
/// Every tuple in the output is one of the input tuples, ids included, so a
/// resample usually contains duplicates.
pub fn resample_nonparametric<A: AreaObs>(
    dataset: &Dataset<A>,
    rng: &mut ChaCha12Rng,
) -> Dataset<A> {
    let m = dataset.len();
    let indices: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
    dataset_from_indices(dataset, &indices)
}

/// Redraws every response from the fitted model, keeping each area's design
/// fixed.
pub fn resample_parametric<M: HierarchicalModel>(
    dataset: &Dataset<M::Area>,
    model: &M,
    params: &M::Params,
    rng: &mut ChaCha12Rng,
) -> Dataset<M::Area> {
    let areas: Vec<M::Area> = dataset
        .areas()
        .iter()
        .map(|a| model.redraw(a, params, rng))
        .collect();
    Dataset::from_areas_unchecked_ids(areas).expect("resample preserves dataset invariants")
}
