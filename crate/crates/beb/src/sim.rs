//! Seeded Monte Carlo studies comparing the plug-in EB estimator against its
//! bootstrap-averaged version over grids of area counts and true
//! hyperparameter values.  Every replicate dataset and every bootstrap draw
//! descends from one root seed through per-(cell, replicate) child streams, so
//! a study is reproducible bit-for-bit at any thread count.

use rand_distr::{Distribution, Gamma, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CountArea, Dataset, GaussianArea};
use crate::error::{Error, Result};
use crate::fh::FayHerriot;
use crate::model::HierarchicalModel;
use crate::pg::PoissonGamma;
use crate::resample::{BootstrapScheme, BootstrapSpec};
use crate::stream::{child_rng, child_seed};

/// Which hierarchical model a study simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Fh,
    Pg,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Fh => "fh",
            ModelKind::Pg => "pg",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fh" => Ok(ModelKind::Fh),
            "pg" => Ok(ModelKind::Pg),
            other => Err(Error::Config(format!("unknown model '{other}' (expected fh or pg)"))),
        }
    }
}

/// Full description of a simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelKind,
    /// Area counts to sweep.
    pub m_grid: Vec<usize>,
    /// True hyperparameter values to sweep: A for the normal model, nu for
    /// the Poisson-gamma model.
    pub hyper_grid: Vec<f64>,
    /// True mean: the common theta-mean (0 is customary for the normal
    /// study, 1 for the count study).
    pub mu: f64,
    /// Monte Carlo replicates per cell.
    pub r: usize,
    /// Bootstrap sizes; each value yields its own BEB estimator column.
    pub b_grid: Vec<usize>,
    pub seed: u64,
    pub scheme: BootstrapScheme,
}

impl SimConfig {
    /// Reduced-scale normal-model profile (full grids, R=500, B=25).
    pub fn reduced_fh(seed: u64) -> Self {
        Self {
            model: ModelKind::Fh,
            m_grid: vec![10, 20, 30],
            hyper_grid: vec![0.1, 0.3, 0.5, 0.7],
            mu: 0.0,
            r: 500,
            b_grid: vec![25],
            seed,
            scheme: BootstrapScheme::Parametric,
        }
    }

    /// Reduced-scale Poisson-gamma profile.
    pub fn reduced_pg(seed: u64) -> Self {
        Self {
            model: ModelKind::Pg,
            m_grid: vec![10, 20, 30],
            hyper_grid: vec![40.0, 60.0, 80.0, 100.0],
            mu: 1.0,
            r: 500,
            b_grid: vec![25],
            seed,
            scheme: BootstrapScheme::Parametric,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_grid.is_empty() || self.hyper_grid.is_empty() || self.b_grid.is_empty() {
            return Err(Error::Config("m_grid, hyper_grid and b_grid must be nonempty".into()));
        }
        if self.m_grid.iter().any(|&m| m < 2) {
            return Err(Error::Config("every m must be >= 2".into()));
        }
        if self.r < 1 {
            return Err(Error::Config("r must be >= 1".into()));
        }
        if self.b_grid.iter().any(|&b| b < 1) {
            return Err(Error::Config("every bootstrap size must be >= 1".into()));
        }
        if !self.mu.is_finite() {
            return Err(Error::Config("mu must be finite".into()));
        }
        match self.model {
            ModelKind::Fh => {
                if self.hyper_grid.iter().any(|&a| !a.is_finite() || a < 0.0) {
                    return Err(Error::Config("every true A must be >= 0".into()));
                }
            }
            ModelKind::Pg => {
                if self.hyper_grid.iter().any(|&nu| !nu.is_finite() || nu <= 0.0) {
                    return Err(Error::Config("every true nu must be > 0".into()));
                }
                if self.mu <= 0.0 {
                    return Err(Error::Config("mu must be > 0 for the count model".into()));
                }
            }
        }
        Ok(())
    }
}

/// Parses the flat `key=value` study format.  Lines starting with `#` and
/// blank lines are skipped.  Keys: model, m_grid, hyper_grid, mu, r, b_grid,
/// seed (optional), scheme (optional, default parametric).  Returns the config
/// and whether the file itself supplied the seed; when it did not, the
/// `fallback_seed` is used and should be recorded by the caller.
pub fn parse_sim_config(text: &str, fallback_seed: u64) -> Result<(SimConfig, bool)> {
    let mut model = None;
    let mut m_grid = None;
    let mut hyper_grid = None;
    let mut mu = None;
    let mut r = None;
    let mut b_grid = None;
    let mut seed = None;
    let mut scheme = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("line {}: bad {what} '{value}'", lineno + 1));
        match key {
            "model" => model = Some(value.parse::<ModelKind>()?),
            "m_grid" => m_grid = Some(parse_list::<usize>(value).map_err(|_| bad("m_grid"))?),
            "hyper_grid" => {
                hyper_grid = Some(parse_list::<f64>(value).map_err(|_| bad("hyper_grid"))?)
            }
            "mu" => mu = Some(value.parse::<f64>().map_err(|_| bad("mu"))?),
            "r" => r = Some(value.parse::<usize>().map_err(|_| bad("r"))?),
            "b_grid" => b_grid = Some(parse_list::<usize>(value).map_err(|_| bad("b_grid"))?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
            "scheme" => {
                scheme = Some(match value {
                    "parametric" => BootstrapScheme::Parametric,
                    "nonparametric" => BootstrapScheme::NonparametricArea,
                    _ => return Err(bad("scheme")),
                })
            }
            other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
        }
    }

    let missing = |what: &str| Error::Config(format!("missing required key '{what}'"));
    let seed_given = seed.is_some();
    let config = SimConfig {
        model: model.ok_or_else(|| missing("model"))?,
        m_grid: m_grid.ok_or_else(|| missing("m_grid"))?,
        hyper_grid: hyper_grid.ok_or_else(|| missing("hyper_grid"))?,
        mu: mu.ok_or_else(|| missing("mu"))?,
        r: r.ok_or_else(|| missing("r"))?,
        b_grid: b_grid.ok_or_else(|| missing("b_grid"))?,
        seed: seed.unwrap_or(fallback_seed),
        scheme: scheme.unwrap_or(BootstrapScheme::Parametric),
    };
    config.validate()?;
    Ok((config, seed_given))
}

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, ()> {
    let items: std::result::Result<Vec<T>, _> =
        value.split(',').map(|part| part.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(()),
    }
}

/// Known sampling variances for an m-area normal study: equally spaced between
/// 0.5 and 1.5, endpoints included.
pub fn design_d(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::Config(format!("variance design needs m >= 2, got {m}")));
    }
    let step = 1.0 / (m as f64 - 1.0);
    Ok((0..m).map(|i| 0.5 + i as f64 * step).collect())
}

/// Exposures for an m-area count study: the equally spaced grid on [10, 50]
/// rounded half-away-from-zero to integers.
pub fn design_n(m: usize) -> Result<Vec<u64>> {
    if m < 2 {
        return Err(Error::Config(format!("exposure design needs m >= 2, got {m}")));
    }
    let step = 40.0 / (m as f64 - 1.0);
    Ok((0..m).map(|i| (10.0 + i as f64 * step).round() as u64).collect())
}

/// Mean squared error over an R-replicate by m-area array of estimates.
pub fn simulated_mse(estimates: &[Vec<f64>], truths: &[Vec<f64>]) -> Result<f64> {
    if estimates.len() != truths.len()
        || estimates.iter().zip(truths).any(|(e, t)| e.len() != t.len())
    {
        return Err(Error::Sim("estimate/truth shape mismatch".into()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (est_row, truth_row) in estimates.iter().zip(truths) {
        for (e, t) in est_row.iter().zip(truth_row) {
            total += (e - t) * (e - t);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Sim("empty estimate array".into()));
    }
    Ok(total / count as f64)
}

/// Draws one normal-model dataset: th_i ~ N(mu, A), y_i = th_i + N(0, D_i).
/// Returns the dataset and the latent truths.
pub fn generate_fh(
    m: usize,
    mu: f64,
    a: f64,
    d: &[f64],
    rng: &mut rand_chacha::ChaCha12Rng,
) -> (Dataset<GaussianArea>, Vec<f64>) {
    assert_eq!(d.len(), m);
    let mut areas = Vec::with_capacity(m);
    let mut truths = Vec::with_capacity(m);
    for (i, &di) in d.iter().enumerate() {
        let th = if a > 0.0 {
            Normal::new(mu, a.sqrt()).expect("valid normal").sample(rng)
        } else {
            mu
        };
        let y = Normal::new(th, di.sqrt()).expect("valid normal").sample(rng);
        areas.push(GaussianArea::new(format!("a{:02}", i + 1), y, di, vec![1.0]).unwrap());
        truths.push(th);
    }
    (Dataset::new(areas).expect("generated dataset is valid"), truths)
}

/// Draws one count-model dataset: th_i ~ Gamma(nu mu, rate nu) (mean mu,
/// variance mu/nu), z_i ~ Poisson(n_i th_i).
pub fn generate_pg(
    m: usize,
    mu: f64,
    nu: f64,
    n: &[u64],
    rng: &mut rand_chacha::ChaCha12Rng,
) -> (Dataset<CountArea>, Vec<f64>) {
    assert_eq!(n.len(), m);
    let gamma = Gamma::new(nu * mu, 1.0 / nu).expect("valid gamma");
    let mut areas = Vec::with_capacity(m);
    let mut truths = Vec::with_capacity(m);
    for (i, &ni) in n.iter().enumerate() {
        let th: f64 = gamma.sample(rng);
        let lambda = ni as f64 * th;
        let z: u64 = if lambda > 0.0 {
            Poisson::new(lambda).expect("valid poisson").sample(rng) as u64
        } else {
            0
        };
        areas.push(CountArea::new(format!("a{:02}", i + 1), z, ni as f64, vec![1.0]).unwrap());
        truths.push(th);
    }
    (Dataset::new(areas).expect("generated dataset is valid"), truths)
}

/// Everything measured in one (m, truth) cell, kept per replicate so paired
/// comparisons between estimators are possible.
#[derive(Debug, Clone)]
pub struct CellDetail {
    pub model: ModelKind,
    pub m: usize,
    pub truth: f64,
    /// Estimator labels: "EB", then "BEB(b)" per bootstrap size.
    pub estimators: Vec<String>,
    /// Bootstrap size per estimator column; 0 for the plug-in EB.
    pub b_values: Vec<usize>,
    /// per_replicate_mse[est][r]: within-replicate mean squared error.
    pub per_replicate_mse: Vec<Vec<f64>>,
    /// Replicates dropped because a fit failed beyond recovery.
    pub n_failed_replicates: usize,
}

impl CellDetail {
    pub fn r_effective(&self) -> usize {
        self.per_replicate_mse.first().map_or(0, |v| v.len())
    }

    /// Cell MSE for one estimator column.
    pub fn mse(&self, est: usize) -> f64 {
        let v = &self.per_replicate_mse[est];
        v.iter().sum::<f64>() / v.len() as f64
    }

    /// Monte Carlo standard error of that MSE.
    pub fn mc_se(&self, est: usize) -> f64 {
        let v = &self.per_replicate_mse[est];
        let n = v.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mse(est);
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
        (var / n as f64).sqrt()
    }

    /// Paired per-replicate difference mse[i] - mse[j]: (mean, MC standard
    /// error of the mean).  Positive mean with i = EB, j = BEB means the
    /// averaged estimator won.
    pub fn paired_gap(&self, i: usize, j: usize) -> (f64, f64) {
        let a = &self.per_replicate_mse[i];
        let b = &self.per_replicate_mse[j];
        let n = a.len();
        let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let mean = diffs.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return (mean, 0.0);
        }
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    }
}

fn replicate_mses<M: HierarchicalModel>(
    model: &M,
    dataset: &Dataset<M::Area>,
    truths: &[f64],
    config: &SimConfig,
    cell_tag: u64,
    rep: usize,
) -> Result<Vec<f64>> {
    let m = truths.len() as f64;
    let mut out = Vec::with_capacity(1 + config.b_grid.len());
    let mut eb_recorded = false;
    for (bi, &b) in config.b_grid.iter().enumerate() {
        let boot_seed = child_seed(config.seed, &[cell_tag, rep as u64, 1, bi as u64]);
        let spec = BootstrapSpec::new(b, config.scheme, boot_seed)?;
        let result = crate::bagging::beb_estimate(dataset, model, &spec)?;
        if !eb_recorded {
            let eb_mse = result
                .areas
                .iter()
                .zip(truths)
                .map(|(a, t)| (a.eb - t) * (a.eb - t))
                .sum::<f64>()
                / m;
            out.push(eb_mse);
            eb_recorded = true;
        }
        let beb_mse = result
            .areas
            .iter()
            .zip(truths)
            .map(|(a, t)| (a.beb - t) * (a.beb - t))
            .sum::<f64>()
            / m;
        out.push(beb_mse);
    }
    Ok(out)
}

/// Runs one (m, truth) cell of a study: R generated datasets, EB plus one BEB
/// column per bootstrap size, all on the same datasets (paired).  `cell_tag`
/// namespaces this cell's random streams within the study seed.
pub fn run_cell(config: &SimConfig, m: usize, truth: f64, cell_tag: u64) -> Result<CellDetail> {
    config.validate()?;
    let estimators: Vec<String> = std::iter::once("EB".to_string())
        .chain(config.b_grid.iter().map(|b| format!("BEB({b})")))
        .collect();
    let b_values: Vec<usize> = std::iter::once(0).chain(config.b_grid.iter().copied()).collect();

    let outcomes: Vec<Result<Vec<f64>>> = match config.model {
        ModelKind::Fh => {
            let d = design_d(m)?;
            let model = FayHerriot::default();
            (0..config.r)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = child_rng(config.seed, &[cell_tag, rep as u64, 0]);
                    let (ds, truths) = generate_fh(m, config.mu, truth, &d, &mut rng);
                    replicate_mses(&model, &ds, &truths, config, cell_tag, rep)
                })
                .collect()
        }
        ModelKind::Pg => {
            let n = design_n(m)?;
            let model = PoissonGamma::default();
            (0..config.r)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = child_rng(config.seed, &[cell_tag, rep as u64, 0]);
                    let (ds, truths) = generate_pg(m, config.mu, truth, &n, &mut rng);
                    replicate_mses(&model, &ds, &truths, config, cell_tag, rep)
                })
                .collect()
        }
    };

    let n_failed = outcomes.iter().filter(|o| o.is_err()).count();
    if n_failed as f64 > 0.01 * config.r as f64 {
        let first_err = outcomes.iter().find_map(|o| o.as_ref().err());
        return Err(Error::Sim(format!(
            "cell (model={}, m={m}, truth={truth}): {n_failed}/{} replicates failed; first error: {}",
            config.model.as_str(),
            config.r,
            first_err.map_or_else(|| "?".to_string(), |e| e.to_string()),
        )));
    }

    let mut per_replicate_mse = vec![Vec::with_capacity(config.r); estimators.len()];
    for outcome in outcomes.into_iter().flatten() {
        for (est, value) in outcome.into_iter().enumerate() {
            per_replicate_mse[est].push(value);
        }
    }
    if per_replicate_mse[0].is_empty() {
        return Err(Error::Sim("cell produced no successful replicates".into()));
    }

    Ok(CellDetail {
        model: config.model,
        m,
        truth,
        estimators,
        b_values,
        per_replicate_mse,
        n_failed_replicates: n_failed,
    })
}

/// One output row of a study: a (cell, estimator) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub model: String,
    pub m: usize,
    pub truth: f64,
    pub estimator: String,
    /// Bootstrap size behind the estimator; 0 for plug-in EB.
    pub b: usize,
    pub mse: f64,
    pub mc_se: f64,
    /// Replicates actually averaged (generated R minus dropped failures).
    pub r: usize,
}

/// A completed study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub rows: Vec<SimRow>,
}

/// Runs the full grid of a study.  Cells are visited in (m, truth) order and
/// tagged by position, so adding a cell to a grid changes other cells' streams
/// only through their position.
pub fn run_study(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let mut rows = Vec::new();
    for (mi, &m) in config.m_grid.iter().enumerate() {
        for (hi, &truth) in config.hyper_grid.iter().enumerate() {
            let cell_tag = (mi * config.hyper_grid.len() + hi) as u64;
            let detail = run_cell(config, m, truth, cell_tag)?;
            for est in 0..detail.estimators.len() {
                rows.push(SimRow {
                    model: config.model.as_str().to_string(),
                    m,
                    truth,
                    estimator: detail.estimators[est].clone(),
                    b: detail.b_values[est],
                    mse: detail.mse(est),
                    mc_se: detail.mc_se(est),
                    r: detail.r_effective(),
                });
            }
        }
    }
    Ok(SimResult { rows })
}

/// Writes study rows as CSV: `model,m,truth,estimator,B,mse,mc_se,R`.
pub fn write_sim_csv<W: std::io::Write>(result: &SimResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "m", "truth", "estimator", "B", "mse", "mc_se", "R"])
        .map_err(|e| Error::Data(format!("csv write failed: {e}")))?;
    for row in &result.rows {
        w.write_record(&[
            row.model.clone(),
            row.m.to_string(),
            row.truth.to_string(),
            row.estimator.clone(),
            row.b.to_string(),
            row.mse.to_string(),
            row.mc_se.to_string(),
            row.r.to_string(),
        ])
        .map_err(|e| Error::Data(format!("csv write failed: {e}")))?;
    }
    w.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_design_hits_stated_points() {
        assert_eq!(design_d(3).unwrap(), vec![0.5, 1.0, 1.5]);
        assert_eq!(design_d(2).unwrap(), vec![0.5, 1.5]);
        let d11 = design_d(11).unwrap();
        assert!((d11[5] - 1.0).abs() < 1e-12);
        assert!((d11[1] - 0.6).abs() < 1e-12);
        assert!(design_d(1).is_err());
    }

    #[test]
    fn exposure_design_rounds_half_away_from_zero() {
        assert_eq!(design_n(5).unwrap(), vec![10, 20, 30, 40, 50]);
        assert_eq!(design_n(2).unwrap(), vec![10, 50]);
        assert_eq!(design_n(4).unwrap(), vec![10, 23, 37, 50]);
    }

    #[test]
    fn mse_of_exact_estimates_is_zero() {
        let t = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(simulated_mse(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn mse_of_unit_offset_is_one() {
        let t = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let e: Vec<Vec<f64>> =
            t.iter().map(|row| row.iter().map(|v| v + 1.0).collect()).collect();
        assert_eq!(simulated_mse(&e, &t).unwrap(), 1.0);
    }

    #[test]
    fn mse_single_entry() {
        assert_eq!(simulated_mse(&[vec![2.0]], &[vec![0.0]]).unwrap(), 4.0);
    }

    #[test]
    fn mse_rejects_shape_mismatch() {
        assert!(simulated_mse(&[vec![1.0]], &[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn mse_is_mean_of_per_replicate_mses() {
        let est = vec![vec![1.0, 3.0], vec![0.0, 2.0], vec![5.0, 5.0]];
        let tru = vec![vec![0.0, 1.0], vec![1.0, 1.0], vec![5.0, 4.0]];
        let overall = simulated_mse(&est, &tru).unwrap();
        let per_rep: Vec<f64> = est
            .iter()
            .zip(&tru)
            .map(|(e, t)| {
                e.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / e.len() as f64
            })
            .collect();
        let mean = per_rep.iter().sum::<f64>() / per_rep.len() as f64;
        assert!((overall - mean).abs() < 1e-12);
    }

    #[test]
    fn generated_gamma_truths_match_stated_moments() {
        let (mu, nu) = (1.0, 50.0);
        let n = design_n(50).unwrap();
        let mut draws = Vec::new();
        for rep in 0..120 {
            let mut rng = child_rng(400, &[rep]);
            let (_, truths) = generate_pg(50, mu, nu, &n, &mut rng);
            draws.extend(truths);
        }
        let count = draws.len() as f64; // 6000 >= 5000
        let mean = draws.iter().sum::<f64>() / count;
        let var = draws.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (count - 1.0);
        let sd = (mu / nu).sqrt();
        let se_mean = sd / count.sqrt();
        assert!((mean - mu).abs() < 4.0 * se_mean, "mean {mean} vs {mu}");
        // Var(s^2) for a gamma parent: sigma^4 (2/(n-1) + kurtosis/n)
        let kurt = 6.0 / (nu * mu);
        let se_var = (mu / nu) * (2.0 / (count - 1.0) + kurt / count).sqrt();
        assert!((var - mu / nu).abs() < 4.0 * se_var, "var {var} vs {}", mu / nu);
    }

    #[test]
    fn generated_normal_responses_match_marginal_variance() {
        let (m, mu, a) = (10usize, 0.0, 0.5);
        let d = design_d(m).unwrap();
        let reps = 1500;
        let mut ys = vec![Vec::with_capacity(reps); m];
        for rep in 0..reps {
            let mut rng = child_rng(77, &[rep as u64]);
            let (ds, _) = generate_fh(m, mu, a, &d, &mut rng);
            for (i, area) in ds.areas().iter().enumerate() {
                ys[i].push(area.y());
            }
        }
        for (i, y) in ys.iter().enumerate() {
            let n = y.len() as f64;
            let mean = y.iter().sum::<f64>() / n;
            let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            let expect = a + d[i];
            let se = expect * (2.0 / (n - 1.0)).sqrt();
            assert!(
                (var - expect).abs() < 4.0 * se,
                "area {i}: var {var} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn tiny_study_is_deterministic_and_shaped() {
        let config = SimConfig {
            model: ModelKind::Fh,
            m_grid: vec![10, 15],
            hyper_grid: vec![0.3, 0.7],
            mu: 0.0,
            r: 3,
            b_grid: vec![2],
            seed: 99,
            scheme: BootstrapScheme::Parametric,
        };
        let r1 = run_study(&config).unwrap();
        let r2 = run_study(&config).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.rows.len(), 2 * 2 * (1 + 1));
        let mut csv1 = Vec::new();
        let mut csv2 = Vec::new();
        write_sim_csv(&r1, &mut csv1).unwrap();
        write_sim_csv(&r2, &mut csv2).unwrap();
        assert_eq!(csv1, csv2);
        assert!(String::from_utf8(csv1).unwrap().starts_with("model,m,truth,estimator,B,mse,mc_se,R\n"));
    }

    #[test]
    fn config_parser_roundtrips_and_validates() {
        let text = "# study\nmodel = fh\nm_grid = 10, 20\nhyper_grid = 0.1,0.5\nmu = 0\nr = 4\nb_grid = 2\nseed = 123\n";
        let (config, seed_given) = parse_sim_config(text, 0).unwrap();
        assert!(seed_given);
        assert_eq!(config.seed, 123);
        assert_eq!(config.m_grid, vec![10, 20]);
        assert_eq!(config.scheme, BootstrapScheme::Parametric);

        let no_seed = "model=pg\nm_grid=10\nhyper_grid=40\nmu=1\nr=2\nb_grid=2\n";
        let (config, seed_given) = parse_sim_config(no_seed, 555).unwrap();
        assert!(!seed_given);
        assert_eq!(config.seed, 555);

        assert!(parse_sim_config("model=zz\n", 0).is_err());
        assert!(parse_sim_config("model=fh\n", 0).is_err()); // missing keys
        assert!(parse_sim_config("bogus_key=1\n", 0).is_err());
        let bad_m = "model=fh\nm_grid=1\nhyper_grid=0.1\nmu=0\nr=1\nb_grid=1\n";
        assert!(parse_sim_config(bad_m, 0).is_err());
    }

    #[test]
    fn profiles_validate() {
        SimConfig::reduced_fh(1).validate().unwrap();
        SimConfig::reduced_pg(1).validate().unwrap();
    }
}
