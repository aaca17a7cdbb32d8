//! Bootstrap-averaged ("bagged") empirical Bayes estimation.  The estimator
//! refits the model hyperparameters on B bootstrap replicates of the dataset
//! and averages the posterior-mean rule evaluated at the ORIGINAL observation
//! under each refit:
//!
//!   beb_i = (1/B) sum_b bayes(y_i; phi_hat_(b))
//!
//! By Jensen's inequality the averaged rule cannot do worse in squared error
//! than the replicate-averaged plug-in rules, and the per-area improvement is
//! bounded by the bootstrap variance of the Bayes values ("Jensen gap").
//! Replicate draws are seeded per replicate index, so results are identical
//! regardless of how many worker threads run the loop.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{AreaObs, Dataset};
use crate::error::{Error, Result};
use crate::model::HierarchicalModel;
use crate::resample::{resample_nonparametric, resample_parametric, BootstrapScheme, BootstrapSpec};
use crate::stream::child_rng;

/// Per-area output of [`beb_estimate`].
#[derive(Debug, Clone, Serialize)]
pub struct AreaBeb {
    pub id: String,
    /// Raw per-area estimate (y, or z/n).
    pub direct: f64,
    /// Plug-in empirical Bayes estimate from the single original-data fit.
    pub eb: f64,
    /// Bootstrap-averaged estimate.
    pub beb: f64,
    /// Sample standard deviation of the replicate Bayes values (divisor B-1).
    pub bootstrap_sd_of_bayes: f64,
    /// Population variance of the replicate Bayes values (divisor B); the
    /// upper bound on this area's squared-error improvement.
    pub jensen_gap: f64,
    /// 100 (beb - eb)/eb; NaN when eb is exactly 0.
    pub pct_rel_diff: f64,
    /// The B replicate Bayes values behind beb, in replicate order.
    #[serde(skip)]
    pub bayes_draws: Vec<f64>,
}

/// Output of [`beb_estimate`]: per-area estimates plus everything needed for
/// diagnostics (original fit, all replicate hyperparameter fits, retry
/// accounting).
#[derive(Debug)]
pub struct BebResult<M: HierarchicalModel> {
    pub areas: Vec<AreaBeb>,
    pub fit: M::Fit,
    /// Hyperparameters of each successful replicate, in replicate order.
    pub bootstrap_params: Vec<M::Params>,
    /// Redraws consumed beyond each replicate's first attempt.
    pub n_retries: usize,
    /// Replicates dropped after exhausting retries.
    pub n_failed: usize,
}

/// Population-style variance (divisor B) of a list of Bayes values — the
/// paper-facing improvement bound.  Computed as the mean squared deviation
/// from the mean, which is algebraically the same and never negative.
pub fn jensen_gap(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "jensen_gap needs at least one value");
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n as f64 - 1.0)).sqrt()
}

/// Bootstrap-averaged EB estimate for every area of `dataset`.
///
/// For b = 1..B: draw a replicate dataset per `spec.scheme`, refit the model
/// on it, and evaluate the Bayes rule at each ORIGINAL observation under the
/// refit hyperparameters.  Replicates whose fit fails are redrawn up to
/// `spec.max_retries` times and then dropped (counted in `n_failed`).  The
/// per-area average over surviving replicates is the BEB estimate; the
/// single-fit plug-in EB estimate on the original data is returned alongside.
pub fn beb_estimate<M: HierarchicalModel>(
    dataset: &Dataset<M::Area>,
    model: &M,
    spec: &BootstrapSpec,
) -> Result<BebResult<M>> {
    if spec.b == 0 {
        return Err(Error::Config("bootstrap replicate count must be >= 1".into()));
    }
    let fit = model
        .fit(dataset.areas())
        .map_err(|e| Error::Estimate(format!("model fit failed on the original data: {e}")))?;
    let fitted = model.fit_params(&fit);
    let eb: Vec<f64> =
        dataset.areas().iter().map(|a| model.bayes(a, fitted)).collect();

    // One independent stream per (replicate, attempt): thread count never
    // changes what any replicate draws.
    let replicates: Vec<(Option<(M::Params, Vec<f64>)>, usize)> = (0..spec.b)
        .into_par_iter()
        .map(|b| {
            let mut retries = 0;
            for attempt in 0..=spec.max_retries {
                let mut rng = child_rng(spec.seed, &[b as u64, attempt as u64]);
                let replicate = match spec.scheme {
                    BootstrapScheme::Parametric => {
                        resample_parametric(dataset, model, fitted, &mut rng)
                    }
                    BootstrapScheme::NonparametricArea => {
                        resample_nonparametric(dataset, &mut rng)
                    }
                };
                match model.fit(replicate.areas()) {
                    Ok(refit) => {
                        let params = model.fit_params(&refit).clone();
                        let bayes: Vec<f64> = dataset
                            .areas()
                            .iter()
                            .map(|a| model.bayes(a, &params))
                            .collect();
                        return (Some((params, bayes)), retries);
                    }
                    Err(_) => retries += 1,
                }
            }
            (None, retries - 1) // final failed attempt was not a redraw
        })
        .collect();

    let n_retries: usize = replicates.iter().map(|(_, r)| r).sum();
    let n_failed = replicates.iter().filter(|(outcome, _)| outcome.is_none()).count();
    let survivors: Vec<&(M::Params, Vec<f64>)> =
        replicates.iter().filter_map(|(outcome, _)| outcome.as_ref()).collect();
    if survivors.is_empty() {
        return Err(Error::Estimate(format!(
            "all {} bootstrap replicates failed to fit (after {} retries)",
            spec.b, n_retries
        )));
    }

    let b_eff = survivors.len() as f64;
    let areas = dataset
        .areas()
        .iter()
        .enumerate()
        .map(|(i, area)| {
            let draws: Vec<f64> = survivors.iter().map(|(_, bayes)| bayes[i]).collect();
            let beb = draws.iter().sum::<f64>() / b_eff;
            let gap = jensen_gap(&draws);
            AreaBeb {
                id: area.id().to_string(),
                direct: model.direct(area),
                eb: eb[i],
                beb,
                bootstrap_sd_of_bayes: sample_sd(&draws),
                jensen_gap: gap,
                pct_rel_diff: if eb[i] != 0.0 { 100.0 * (beb - eb[i]) / eb[i] } else { f64::NAN },
                bayes_draws: draws,
            }
        })
        .collect();

    Ok(BebResult {
        areas,
        fit,
        bootstrap_params: survivors.into_iter().map(|(p, _)| p.clone()).collect(),
        n_retries,
        n_failed,
    })
}

/// Replicate-by-replicate hyperparameter draws plus the original-data ML fit,
/// flattened for diagnostics output.
#[derive(Debug, Clone)]
pub struct ParamDraws {
    /// Display names per coordinate (e.g. beta0, A).
    pub names: Vec<String>,
    /// One row per surviving replicate, in replicate order.
    pub rows: Vec<Vec<f64>>,
    /// The original-data ML estimate.
    pub ml: Vec<f64>,
    /// Per-coordinate quantiles at the 1%, 25%, 50%, 75%, 99% levels.
    pub quantiles: Vec<[f64; 5]>,
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.01, 0.25, 0.50, 0.75, 0.99];

/// Linear-interpolation quantile (the "type 7" convention) of unsorted data.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty() && (0.0..=1.0).contains(&p));
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in quantile input"));
    let h = (sorted.len() as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tabulates the bootstrap hyperparameter draws stored in a [`BebResult`].
pub fn bootstrap_param_draws<M: HierarchicalModel>(
    model: &M,
    result: &BebResult<M>,
) -> ParamDraws {
    let rows: Vec<Vec<f64>> =
        result.bootstrap_params.iter().map(|p| model.param_values(p)).collect();
    let ml = model.param_values(model.fit_params(&result.fit));
    let k = ml.len();
    let quantiles = (0..k)
        .map(|j| {
            let coord: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let mut qs = [0.0; 5];
            for (slot, &level) in qs.iter_mut().zip(QUANTILE_LEVELS.iter()) {
                *slot = quantile(&coord, level);
            }
            qs
        })
        .collect();
    // names need the covariate dimension, which is k minus the one
    // non-regression hyperparameter both models carry
    let names = model.param_names(k - 1);
    ParamDraws { names, rows, ml, quantiles }
}

/// Writes the draws table as CSV: `replicate,param_1,...,param_k`, one row per
/// replicate, then a final `ml` row with the original-data estimate.
pub fn write_param_draws_csv<W: std::io::Write>(draws: &ParamDraws, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let k = draws.ml.len();
    let mut header = vec!["replicate".to_string()];
    header.extend((1..=k).map(|j| format!("param_{j}")));
    w.write_record(&header).map_err(csv_err)?;
    for (b, row) in draws.rows.iter().enumerate() {
        let mut record = vec![(b + 1).to_string()];
        record.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(csv_err)?;
    }
    let mut record = vec!["ml".to_string()];
    record.extend(draws.ml.iter().map(|v| v.to_string()));
    w.write_record(&record).map_err(csv_err)?;
    w.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv write failed: {e}"))
}
