//! The contract a hierarchical model exposes to the bagging driver and the
//! simulation harness: fit hyperparameters from a dataset, evaluate the
//! posterior-mean (Bayes) rule at one observation, and redraw responses from
//! the fitted two-stage model for the parametric bootstrap.

use rand_chacha::ChaCha12Rng;

use crate::data::AreaObs;
use crate::error::Result;

pub trait HierarchicalModel: Sync {
    type Area: AreaObs;
    type Params: Clone + Send + Sync;
    type Fit: Send + Sync;

    /// Short machine name ("fh" or "pg"), used in output files.
    fn name(&self) -> &'static str;

    /// Maximum-likelihood fit of the hyperparameters.
    fn fit(&self, areas: &[Self::Area]) -> Result<Self::Fit>;

    fn fit_params<'a>(&self, fit: &'a Self::Fit) -> &'a Self::Params;

    /// Posterior mean of the area parameter given this area's observation.
    fn bayes(&self, area: &Self::Area, params: &Self::Params) -> f64;

    /// The unshrunk per-area estimate (y, or z/n).
    fn direct(&self, area: &Self::Area) -> f64;

    /// Redraws the area's response from the fitted two-stage model, keeping
    /// covariates and the known variance/exposure fixed.
    fn redraw(&self, area: &Self::Area, params: &Self::Params, rng: &mut ChaCha12Rng)
        -> Self::Area;

    /// Hyperparameter coordinates as a flat vector, in a fixed order.
    fn param_values(&self, params: &Self::Params) -> Vec<f64>;

    /// Display names matching `param_values` (e.g. `beta0`, `A`).
    fn param_names(&self, covariate_dim: usize) -> Vec<String>;
}
