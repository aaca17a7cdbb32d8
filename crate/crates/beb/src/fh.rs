//! Two-stage normal area-level model (Fay-Herriot): y_i | th_i ~ N(th_i, D_i)
//! with known sampling variances D_i, and th_i ~ N(x_i'beta, A).  Marginally
//! y_i ~ N(x_i'beta, A + D_i), so ML fitting reduces to a one-dimensional
//! profile search over the prior variance A with beta solved exactly by
//! generalized least squares at each candidate A.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::data::GaussianArea;
use crate::error::{Error, Result};
use crate::model::HierarchicalModel;
use crate::optim::golden_section_min;

/// Default upper bound for the A search, as a multiple of max D_i.
pub const A_MAX_FACTOR: f64 = 100.0;
/// Coarse profile grid size; quadratic spacing concentrates points near 0
/// where the boundary pathology lives.
const GRID_POINTS: usize = 200;

/// Hyperparameters of the normal two-stage model.
#[derive(Debug, Clone, PartialEq)]
pub struct FhParams {
    /// Regression coefficients, intercept first.
    pub beta: Vec<f64>,
    /// Prior (between-area) variance, >= 0.
    pub a: f64,
}

impl FhParams {
    pub fn new(beta: Vec<f64>, a: f64) -> Result<Self> {
        if beta.is_empty() || beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("beta must be nonempty and finite".into()));
        }
        if !a.is_finite() || a < 0.0 {
            return Err(Error::Config(format!("prior variance A must be >= 0, got {a}")));
        }
        Ok(Self { beta, a })
    }
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct FhFitReport {
    pub params: FhParams,
    /// Minimized criterion: -2 log-likelihood up to an additive constant.
    pub neg2loglik: f64,
    /// True iff the variance estimate was clamped at the A = 0 boundary.
    pub boundary_hit: bool,
    /// Criterion evaluations spent (grid + line-search refinement).
    pub iterations: usize,
}

/// Tuning knobs for [`fit_ml`].
#[derive(Debug, Clone)]
pub struct FhOptions {
    /// Upper bound of the A search; `None` picks `A_MAX_FACTOR * max D_i`.
    pub a_max: Option<f64>,
    /// Relative tolerance on the located A.
    pub tol: f64,
    /// Iteration cap for the line search.
    pub max_iter: usize,
}

impl Default for FhOptions {
    fn default() -> Self {
        Self { a_max: None, tol: 1e-10, max_iter: 200 }
    }
}

fn xb(beta: &[f64], x: &[f64]) -> f64 {
    beta.iter().zip(x).map(|(b, xi)| b * xi).sum()
}

/// -2 log-likelihood up to a constant:
/// sum_i log(A + D_i) + sum_i (y_i - x_i'beta)^2 / (A + D_i).
/// The ML estimate minimizes this.
pub fn criterion(areas: &[GaussianArea], params: &FhParams) -> Result<f64> {
    if areas.is_empty() {
        return Err(Error::Data("criterion needs at least one area".into()));
    }
    let q = criterion_raw(areas, &params.beta, params.a);
    if q.is_finite() {
        Ok(q)
    } else {
        Err(Error::Eval(format!("criterion not finite at A={}", params.a)))
    }
}

fn criterion_raw(areas: &[GaussianArea], beta: &[f64], a: f64) -> f64 {
    let mut q = 0.0;
    for area in areas {
        let v = a + area.d();
        let r = area.y() - xb(beta, area.x());
        q += v.ln() + r * r / v;
    }
    q
}

/// Exact GLS coefficients for fixed A: (X'WX)^{-1} X'Wy with W = diag 1/(A+D_i).
fn gls_beta(areas: &[GaussianArea], a: f64) -> Result<Vec<f64>> {
    let p = areas[0].x().len();
    let mut xtwx = DMatrix::<f64>::zeros(p, p);
    let mut xtwy = DVector::<f64>::zeros(p);
    for area in areas {
        let w = 1.0 / (a + area.d());
        let x = area.x();
        for r in 0..p {
            xtwy[r] += w * x[r] * area.y();
            for c in 0..p {
                xtwx[(r, c)] += w * x[r] * x[c];
            }
        }
    }
    let chol = xtwx
        .cholesky()
        .ok_or_else(|| Error::Fit("singular design matrix (collinear covariates)".into()))?;
    Ok(chol.solve(&xtwy).iter().copied().collect())
}

/// Maximum-likelihood fit of (beta, A) by profile search: for each candidate A
/// the GLS solution is exact, so only A is searched — a quadratically spaced
/// coarse grid on [0, A_max] followed by golden-section refinement of the best
/// bracket, with an exact comparison against A = 0 so boundary solutions are
/// reported as such rather than as tiny positive estimates.
pub fn fit_ml(areas: &[GaussianArea], options: &FhOptions) -> Result<FhFitReport> {
    let m = areas.len();
    if m == 0 {
        return Err(Error::Data("cannot fit an empty dataset".into()));
    }
    let p = areas[0].x().len();
    if m <= p {
        return Err(Error::Fit(format!(
            "need more areas than regression coefficients (m={m}, p={p})"
        )));
    }
    let max_d = areas.iter().map(|a| a.d()).fold(0.0_f64, f64::max);
    let a_max = options.a_max.unwrap_or(A_MAX_FACTOR * max_d);
    if !(a_max > 0.0) || !a_max.is_finite() {
        return Err(Error::Config(format!("invalid A search bound {a_max}")));
    }

    let profile = |a: f64| -> f64 {
        match gls_beta(areas, a) {
            Ok(beta) => criterion_raw(areas, &beta, a),
            Err(_) => f64::INFINITY,
        }
    };

    // Coarse pass. Quadratic spacing: a_j = a_max * (j/(K-1))^2.
    let k = GRID_POINTS;
    let mut best_j = 0;
    let mut best_q = f64::INFINITY;
    let grid_a = |j: usize| a_max * ((j as f64 / (k - 1) as f64).powi(2));
    for j in 0..k {
        let q = profile(grid_a(j));
        if q < best_q {
            best_q = q;
            best_j = j;
        }
    }
    if !best_q.is_finite() {
        return Err(Error::Fit("profile criterion not finite anywhere on [0, A_max]".into()));
    }

    // Refine inside the bracket around the best grid point.
    let lo = grid_a(best_j.saturating_sub(1));
    let hi = grid_a((best_j + 1).min(k - 1));
    let refined = golden_section_min(&profile, lo, hi, options.tol, 1e-300, options.max_iter);
    let mut evals = k + refined.iterations;

    // Winner: refined interior point vs. exact boundary.
    let q0 = profile(0.0);
    evals += 1;
    let (a_hat, q_hat, boundary_hit) = if q0 <= refined.f {
        (0.0, q0, true)
    } else {
        (refined.x, refined.f, false)
    };

    let beta = gls_beta(areas, a_hat)?;
    if !q_hat.is_finite() {
        return Err(Error::Fit("criterion not finite at the located optimum".into()));
    }
    Ok(FhFitReport {
        params: FhParams { beta, a: a_hat },
        neg2loglik: q_hat,
        boundary_hit,
        iterations: evals,
    })
}

/// Posterior mean of th_i given y_i:
/// x'beta + [A/(A+D)] (y - x'beta); lies between x'beta and y.
pub fn bayes(area: &GaussianArea, params: &FhParams) -> f64 {
    let mean = xb(&params.beta, area.x());
    let w = params.a / (params.a + area.d());
    mean + w * (area.y() - mean)
}

/// Plug-in empirical Bayes estimates for every area, plus the fit they used.
pub fn eb_estimates(areas: &[GaussianArea], options: &FhOptions) -> Result<(Vec<f64>, FhFitReport)> {
    let fit = fit_ml(areas, options)?;
    let estimates = areas.iter().map(|a| bayes(a, &fit.params)).collect();
    Ok((estimates, fit))
}

/// The normal two-stage model as a pluggable [`HierarchicalModel`].
#[derive(Debug, Clone, Default)]
pub struct FayHerriot {
    pub options: FhOptions,
}

impl HierarchicalModel for FayHerriot {
    type Area = GaussianArea;
    type Params = FhParams;
    type Fit = FhFitReport;

    fn name(&self) -> &'static str {
        "fh"
    }

    fn fit(&self, areas: &[GaussianArea]) -> Result<FhFitReport> {
        fit_ml(areas, &self.options)
    }

    fn fit_params<'a>(&self, fit: &'a FhFitReport) -> &'a FhParams {
        &fit.params
    }

    fn bayes(&self, area: &GaussianArea, params: &FhParams) -> f64 {
        bayes(area, params)
    }

    fn direct(&self, area: &GaussianArea) -> f64 {
        area.y()
    }

    fn redraw(&self, area: &GaussianArea, params: &FhParams, rng: &mut ChaCha12Rng) -> GaussianArea {
        // Two-stage draw mirroring the model: th ~ N(x'beta, A), y ~ N(th, D).
        let mean = xb(&params.beta, area.x());
        let th = if params.a > 0.0 {
            Normal::new(mean, params.a.sqrt()).expect("valid normal").sample(rng)
        } else {
            mean
        };
        let y = Normal::new(th, area.d().sqrt()).expect("valid normal").sample(rng);
        area.with_response(y)
    }

    fn param_values(&self, params: &FhParams) -> Vec<f64> {
        let mut v = params.beta.clone();
        v.push(params.a);
        v
    }

    fn param_names(&self, covariate_dim: usize) -> Vec<String> {
        let mut names: Vec<String> = (0..covariate_dim).map(|j| format!("beta{j}")).collect();
        names.push("A".into());
        names
    }
}
