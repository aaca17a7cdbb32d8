//! Poisson-gamma disease-mapping model: z_i | th_i ~ Poisson(n_i th_i) with
//! known exposures n_i, and th_i ~ Gamma(nu m_i, nu) (shape nu*m_i, rate nu)
//! where m_i = exp(x_i'beta).  The marginal law of z_i is negative binomial,
//! so the hyperparameters (beta, nu) are fit by maximizing the NB likelihood;
//! nu is optimized on the log scale so positivity is structural.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::data::CountArea;
use crate::error::{Error, Result};
use crate::model::HierarchicalModel;
use crate::optim::{bracket_and_golden, nelder_mead};
use crate::special::{ln_factorial, ln_gamma_ratio};

/// Search box for log(nu). The top of the box is the Poisson limit: the NB
/// likelihood can be monotone increasing in nu when the data show no
/// overdispersion, and a fit clamped there is a legitimate answer, not a
/// failure.
pub const LN_NU_MIN: f64 = -13.815510557964274; // ln 1e-6
pub const LN_NU_MAX: f64 = 23.025850929940457; // ln 1e10

/// Hyperparameters of the Poisson-gamma model.
#[derive(Debug, Clone, PartialEq)]
pub struct PgParams {
    /// Log-linear regression coefficients, intercept first.
    pub beta: Vec<f64>,
    /// Prior precision-like scale, > 0; prior variance of th_i is m_i/nu.
    pub nu: f64,
}

impl PgParams {
    pub fn new(beta: Vec<f64>, nu: f64) -> Result<Self> {
        if beta.is_empty() || beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("beta must be nonempty and finite".into()));
        }
        if !nu.is_finite() || nu <= 0.0 {
            return Err(Error::Config(format!("nu must be > 0, got {nu}")));
        }
        Ok(Self { beta, nu })
    }

    /// Prior mean rate m_i = exp(x_i'beta) for one area.
    pub fn prior_mean(&self, area: &CountArea) -> f64 {
        xb(&self.beta, area.x()).exp()
    }
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct PgFitReport {
    pub params: PgParams,
    /// Marginal (negative binomial) log-likelihood at the optimum.
    pub loglik: f64,
    /// True when the stopping rule and the gradient check both held.
    pub converged: bool,
    /// Objective evaluations spent.
    pub iterations: usize,
    /// True iff log(nu) was clamped at the top of the search box
    /// (no-overdispersion / Poisson limit).
    pub nu_at_box_top: bool,
}

/// Tuning knobs for [`fit_ml`].
#[derive(Debug, Clone)]
pub struct PgOptions {
    /// Tolerance on successive objective change.
    pub tol: f64,
    /// Objective-evaluation cap for the simplex stage.
    pub max_iter: usize,
}

impl Default for PgOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 2000 }
    }
}

fn xb(beta: &[f64], x: &[f64]) -> f64 {
    beta.iter().zip(x).map(|(b, xi)| b * xi).sum()
}

/// Negative binomial log pmf of one observed count:
/// log Gamma(z+num) - log z! - log Gamma(num) + z [log n - log(n+nu)]
///   + num [log nu - log(n+nu)],  with num = nu * exp(x'beta).
///
/// The gamma-ratio and log1p forms keep this stable when nu*m is huge (the
/// Poisson limit), where naive log-gamma differences cancel catastrophically.
pub fn nb_logpmf(area: &CountArea, params: &PgParams) -> Result<f64> {
    let m = params.prior_mean(area);
    let num = params.nu * m;
    if !num.is_finite() || num <= 0.0 {
        return Err(Error::Eval(format!("nu*m not representable (nu={}, m={m})", params.nu)));
    }
    let z = area.z();
    let n = area.n();
    let mut lp = ln_gamma_ratio(num, z) - ln_factorial(z) - num * (n / params.nu).ln_1p();
    if z > 0 {
        lp += z as f64 * (n.ln() - (n + params.nu).ln());
    }
    if lp.is_finite() {
        Ok(lp)
    } else {
        Err(Error::Eval(format!("log pmf not finite (z={z}, n={n}, nu={})", params.nu)))
    }
}

/// Sum of [`nb_logpmf`] over all areas.
pub fn marginal_loglik(areas: &[CountArea], params: &PgParams) -> Result<f64> {
    if areas.is_empty() {
        return Err(Error::Data("log-likelihood needs at least one area".into()));
    }
    let mut total = 0.0;
    for area in areas {
        total += nb_logpmf(area, params)?;
    }
    Ok(total)
}

fn params_from_point(point: &[f64]) -> PgParams {
    let p = point.len() - 1;
    PgParams {
        beta: point[..p].to_vec(),
        nu: point[p].clamp(LN_NU_MIN, LN_NU_MAX).exp(),
    }
}

/// Negative log-likelihood over (beta, log nu); +inf outside the domain so the
/// derivative-free searches treat failures as ordinary bad points.
fn objective(areas: &[CountArea], point: &[f64]) -> f64 {
    let params = params_from_point(point);
    match marginal_loglik(areas, &params) {
        Ok(ll) => -ll,
        Err(_) => f64::INFINITY,
    }
}

/// Starting point: intercept matches the pooled rate log(sum z / sum n), the
/// remaining coefficients come from least squares on log((z+0.5)/n), and nu
/// from a moment match of the rate variance Var(z/n) ~ mu/nu + mu*mean(1/n).
fn initial_point(areas: &[CountArea]) -> Result<Vec<f64>> {
    let m = areas.len();
    let p = areas[0].x().len();
    let mut xtx = DMatrix::<f64>::zeros(p, p);
    let mut xtu = DVector::<f64>::zeros(p);
    for area in areas {
        let u = ((area.z() as f64 + 0.5) / area.n()).ln();
        let x = area.x();
        for r in 0..p {
            xtu[r] += x[r] * u;
            for c in 0..p {
                xtx[(r, c)] += x[r] * x[c];
            }
        }
    }
    let chol = xtx
        .cholesky()
        .ok_or_else(|| Error::Fit("singular design matrix (collinear covariates)".into()))?;
    let mut beta: Vec<f64> = chol.solve(&xtu).iter().copied().collect();

    let total_z: f64 = areas.iter().map(|a| a.z() as f64).sum();
    let total_n: f64 = areas.iter().map(|a| a.n()).sum();
    let mu = total_z / total_n;
    // re-center the intercept so the fitted mean matches the pooled rate
    let mean_lin: f64 = areas.iter().map(|a| xb(&beta, a.x())).sum::<f64>() / m as f64;
    beta[0] += mu.ln() - mean_lin;

    let rates: Vec<f64> = areas.iter().map(|a| a.rate()).collect();
    let rate_mean = rates.iter().sum::<f64>() / m as f64;
    let s2 = if m > 1 {
        rates.iter().map(|r| (r - rate_mean).powi(2)).sum::<f64>() / (m as f64 - 1.0)
    } else {
        0.0
    };
    let mean_inv_n = areas.iter().map(|a| 1.0 / a.n()).sum::<f64>() / m as f64;
    let excess = s2 - mu * mean_inv_n; // Poisson noise removed
    let nu0 = if excess > 1e-10 { mu / excess } else { 1e3 };

    let mut point = beta;
    point.push(nu0.ln().clamp(LN_NU_MIN, LN_NU_MAX));
    Ok(point)
}

/// Central finite differences of the log-likelihood in (beta, log nu),
/// projected onto the log(nu) box: a component pointing out of the box at a
/// clamped optimum is a KKT-feasible zero, not a defect.
pub fn fd_loglik_gradient(areas: &[CountArea], params: &PgParams) -> Result<Vec<f64>> {
    let mut point: Vec<f64> = params.beta.clone();
    point.push(params.nu.ln());
    let dim = point.len();
    let mut grad = vec![0.0; dim];
    for j in 0..dim {
        let h = 1e-6 * point[j].abs().max(1.0);
        let mut hi = point.clone();
        let mut lo = point.clone();
        hi[j] += h;
        lo[j] -= h;
        let f_hi = marginal_loglik(areas, &params_from_point(&hi))?;
        let f_lo = marginal_loglik(areas, &params_from_point(&lo))?;
        grad[j] = (f_hi - f_lo) / (2.0 * h);
    }
    let ln_nu = point[dim - 1];
    if ln_nu >= LN_NU_MAX - 1e-9 && grad[dim - 1] > 0.0 {
        grad[dim - 1] = 0.0; // ascent direction leaves the box
    }
    if ln_nu <= LN_NU_MIN + 1e-9 && grad[dim - 1] < 0.0 {
        grad[dim - 1] = 0.0;
    }
    Ok(grad)
}

/// Maximum-likelihood fit of (beta, nu): Nelder-Mead over (beta, log nu) from
/// the moment-based start, then a coordinate-wise golden-section polish.  A
/// finite-difference gradient check decides the `converged` flag; datasets
/// with every count zero are rejected (the likelihood is maximized at
/// beta -> -inf).
pub fn fit_ml(areas: &[CountArea], options: &PgOptions) -> Result<PgFitReport> {
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
    if areas.iter().all(|a| a.z() == 0) {
        return Err(Error::Fit("all counts are zero; rate fit is degenerate".into()));
    }

    let x0 = initial_point(areas)?;
    let dim = x0.len();
    let mut steps = vec![0.25; dim];
    steps[dim - 1] = 1.0; // the log nu profile is flat; take bigger strides
    let simplex = nelder_mead(
        |pt| objective(areas, pt),
        &x0,
        &steps,
        options.tol,
        1e-8,
        options.max_iter,
    );
    let mut point = simplex.x;
    let mut best = simplex.f;
    let mut evals = simplex.evaluations;

    // coordinate polish catches the slow simplex collapse along the nu ridge
    for _ in 0..2 {
        for j in 0..dim {
            let (lo, hi) = if j == dim - 1 {
                (LN_NU_MIN, LN_NU_MAX)
            } else {
                (point[j] - 50.0, point[j] + 50.0)
            };
            let line = |t: f64| {
                let mut pt = point.clone();
                pt[j] = t;
                objective(areas, &pt)
            };
            let res = bracket_and_golden(line, point[j], 0.05, lo, hi, 1e-12, 1e-14);
            evals += res.iterations;
            if res.f < best {
                best = res.f;
                point[j] = res.x;
            }
        }
    }

    point[dim - 1] = point[dim - 1].clamp(LN_NU_MIN, LN_NU_MAX);
    let params = params_from_point(&point);
    let loglik = marginal_loglik(areas, &params)?;
    let grad = fd_loglik_gradient(areas, &params)?;
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let nu_at_box_top = point[dim - 1] >= LN_NU_MAX - 1e-9;
    Ok(PgFitReport {
        params,
        loglik,
        converged: simplex.converged && grad_norm < 1e-6,
        iterations: evals,
        nu_at_box_top,
    })
}

/// Posterior mean of th_i given z_i: (z + nu m)/(n + nu) with m = exp(x'beta);
/// a convex combination w (z/n) + (1-w) m with w = n/(n+nu).
pub fn bayes(area: &CountArea, params: &PgParams) -> f64 {
    let m = params.prior_mean(area);
    (area.z() as f64 + params.nu * m) / (area.n() + params.nu)
}

/// Plug-in empirical Bayes estimates for every area, plus the fit they used.
pub fn eb_estimates(areas: &[CountArea], options: &PgOptions) -> Result<(Vec<f64>, PgFitReport)> {
    let fit = fit_ml(areas, options)?;
    let estimates = areas.iter().map(|a| bayes(a, &fit.params)).collect();
    Ok((estimates, fit))
}

/// The Poisson-gamma model as a pluggable [`HierarchicalModel`].
#[derive(Debug, Clone, Default)]
pub struct PoissonGamma {
    pub options: PgOptions,
}

impl HierarchicalModel for PoissonGamma {
    type Area = CountArea;
    type Params = PgParams;
    type Fit = PgFitReport;

    fn name(&self) -> &'static str {
        "pg"
    }

    fn fit(&self, areas: &[CountArea]) -> Result<PgFitReport> {
        fit_ml(areas, &self.options)
    }

    fn fit_params<'a>(&self, fit: &'a PgFitReport) -> &'a PgParams {
        &fit.params
    }

    fn bayes(&self, area: &CountArea, params: &PgParams) -> f64 {
        bayes(area, params)
    }

    fn direct(&self, area: &CountArea) -> f64 {
        area.rate()
    }

    fn redraw(&self, area: &CountArea, params: &PgParams, rng: &mut ChaCha12Rng) -> CountArea {
        // th ~ Gamma(nu m, rate nu), z ~ Poisson(n th)
        let m = params.prior_mean(area);
        let th = Gamma::new(params.nu * m, 1.0 / params.nu)
            .expect("valid gamma")
            .sample(rng);
        let lambda = area.n() * th;
        let z = if lambda > 0.0 {
            Poisson::new(lambda).expect("valid poisson").sample(rng) as u64
        } else {
            0
        };
        area.with_count(z)
    }

    fn param_values(&self, params: &PgParams) -> Vec<f64> {
        let mut v = params.beta.clone();
        v.push(params.nu);
        v
    }

    fn param_names(&self, covariate_dim: usize) -> Vec<String> {
        let mut names: Vec<String> = (0..covariate_dim).map(|j| format!("beta{j}")).collect();
        names.push("nu".into());
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::child_rng;

    fn area(id: &str, z: u64, n: f64) -> CountArea {
        CountArea::new(id.to_string(), z, n, vec![1.0]).unwrap()
    }

    #[test]
    fn logpmf_zero_count_cancellation() {
        let p = PgParams::new(vec![0.4], 3.0).unwrap();
        let a = area("a", 0, 7.0);
        let m = 0.4_f64.exp();
        let expect = 3.0 * m * (3.0_f64.ln() - 10.0_f64.ln());
        assert!((nb_logpmf(&a, &p).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn logpmf_small_integer_hand_value() {
        // z=2, n=1, m=1, nu=1: pmf = Gamma(3)/(Gamma(3)Gamma(1)) (1/2)^2 (1/2) = 1/8
        let p = PgParams::new(vec![0.0], 1.0).unwrap();
        let a = area("a", 2, 1.0);
        assert!((nb_logpmf(&a, &p).unwrap() - 0.125_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn logpmf_normalizes() {
        let p = PgParams::new(vec![0.0], 5.0).unwrap();
        let total: f64 = (0..=200)
            .map(|z| nb_logpmf(&area("a", z, 1.0), &p).unwrap().exp())
            .sum();
        assert!(total >= 1.0 - 1e-8, "partial sum {total}");
        assert!(total <= 1.0 + 1e-8);
    }

    #[test]
    fn logpmf_stable_at_poisson_limit() {
        // at huge nu the NB pmf approaches Poisson(n m)
        let p = PgParams::new(vec![0.0], 1e9).unwrap();
        let a = area("a", 3, 2.0);
        let lambda = 2.0_f64;
        let poisson = 3.0 * lambda.ln() - lambda - ln_factorial(3);
        assert!((nb_logpmf(&a, &p).unwrap() - poisson).abs() < 1e-6);
    }

    #[test]
    fn loglik_is_sum_and_permutation_invariant() {
        let p = PgParams::new(vec![0.1], 2.0).unwrap();
        let a1 = area("a", 3, 5.0);
        let a2 = area("b", 0, 8.0);
        let single = nb_logpmf(&a1, &p).unwrap();
        assert_eq!(marginal_loglik(std::slice::from_ref(&a1), &p).unwrap(), single);
        let both = marginal_loglik(&[a1.clone(), a2.clone()], &p).unwrap();
        let swapped = marginal_loglik(&[a2.clone(), a1.clone()], &p).unwrap();
        assert!((both - (nb_logpmf(&a1, &p).unwrap() + nb_logpmf(&a2, &p).unwrap())).abs() < 1e-12);
        assert_eq!(both, swapped);
    }

    #[test]
    fn bayes_direct_value() {
        let p = PgParams::new(vec![0.0], 10.0).unwrap();
        assert!((bayes(&area("a", 5, 10.0), &p) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn bayes_fixed_point_when_rate_matches_prior_mean() {
        let p = PgParams::new(vec![0.3], 4.0).unwrap();
        let m = 0.3_f64.exp();
        let n = 10.0;
        let z = (n * m).round() as u64;
        let a = CountArea::new("a", z, z as f64 / m, vec![1.0]).unwrap();
        assert!((bayes(&a, &p) - m).abs() < 1e-12);
    }

    #[test]
    fn bayes_is_convex_combination() {
        let p = PgParams::new(vec![-0.2], 7.0).unwrap();
        let a = area("a", 9, 13.0);
        let m = p.prior_mean(&a);
        let w = a.n() / (a.n() + p.nu);
        let combo = w * a.rate() + (1.0 - w) * m;
        assert!((bayes(&a, &p) - combo).abs() < 1e-14);
    }

    #[test]
    fn bayes_shrinks_to_prior_mean_for_large_nu() {
        let a = area("a", 30, 10.0);
        let m = 1.0;
        let mut last = (bayes(&a, &PgParams::new(vec![0.0], 1.0).unwrap()) - m).abs();
        for nu in [10.0, 100.0, 1000.0] {
            let d = (bayes(&a, &PgParams::new(vec![0.0], nu).unwrap()) - m).abs();
            assert!(d < last, "distance from prior mean must shrink with nu");
            last = d;
        }
    }

    #[test]
    fn fit_rejects_all_zero_counts() {
        let areas: Vec<CountArea> = (0..5).map(|i| area(&format!("a{i}"), 0, 10.0)).collect();
        assert!(fit_ml(&areas, &PgOptions::default()).is_err());
    }

    #[test]
    fn fit_matches_common_rate_with_large_counts() {
        // every observed rate equals c with big n: exp(beta0) -> c
        let c = 0.8;
        let n = 10_000.0;
        let areas: Vec<CountArea> =
            (0..8).map(|i| area(&format!("a{i}"), (c * n) as u64, n)).collect();
        let fit = fit_ml(&areas, &PgOptions::default()).unwrap();
        assert!((fit.params.beta[0].exp() - c).abs() < 1e-4);
        // identical rates mean no overdispersion: nu runs to the box top
        assert!(fit.nu_at_box_top);
    }

    #[test]
    fn fit_recovers_simulated_hyperparameters_roughly() {
        let mut rng = child_rng(11, &[0]);
        let truth = PgParams::new(vec![0.0], 50.0).unwrap();
        let model = PoissonGamma::default();
        let template: Vec<CountArea> =
            (0..40).map(|i| area(&format!("a{i}"), 1, 20.0 + i as f64)).collect();
        let areas: Vec<CountArea> =
            template.iter().map(|a| model.redraw(a, &truth, &mut rng)).collect();
        let fit = fit_ml(&areas, &PgOptions::default()).unwrap();
        assert!(fit.params.beta[0].abs() < 0.25, "beta0 {}", fit.params.beta[0]);
        assert!(
            fit.params.nu > 5.0 && fit.params.nu < 1e4,
            "nu {} wildly off 50",
            fit.params.nu
        );
        let grad = fd_loglik_gradient(&areas, &fit.params).unwrap();
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(norm < 1e-4, "gradient norm {norm}");
    }

    #[test]
    fn eb_lies_between_rate_and_prior_mean() {
        let mut rng = child_rng(12, &[0]);
        let truth = PgParams::new(vec![0.0], 30.0).unwrap();
        let model = PoissonGamma::default();
        let template: Vec<CountArea> =
            (0..15).map(|i| area(&format!("a{i}"), 1, 10.0 + 2.0 * i as f64)).collect();
        let areas: Vec<CountArea> =
            template.iter().map(|a| model.redraw(a, &truth, &mut rng)).collect();
        let (estimates, fit) = eb_estimates(&areas, &PgOptions::default()).unwrap();
        for (est, a) in estimates.iter().zip(&areas) {
            let m = fit.params.prior_mean(a);
            let (lo, hi) = if a.rate() < m { (a.rate(), m) } else { (m, a.rate()) };
            assert!(*est >= lo - 1e-12 && *est <= hi + 1e-12);
            assert_eq!(*est, bayes(a, &fit.params));
        }
    }

    #[test]
    fn redraw_keeps_exposure_and_covariates() {
        let model = PoissonGamma::default();
        let p = PgParams::new(vec![0.0], 20.0).unwrap();
        let orig = area("a", 4, 25.0);
        let mut rng = child_rng(5, &[2]);
        let drawn = model.redraw(&orig, &p, &mut rng);
        assert_eq!(drawn.id(), orig.id());
        assert_eq!(drawn.n(), orig.n());
        assert_eq!(drawn.x(), orig.x());
    }

    #[test]
    fn param_names_match_values() {
        let model = PoissonGamma::default();
        let p = PgParams::new(vec![0.1, -0.4], 9.0).unwrap();
        assert_eq!(model.param_values(&p), vec![0.1, -0.4, 9.0]);
        assert_eq!(model.param_names(2), vec!["beta0", "beta1", "nu"]);
    }
}
