//! Command-line front end: load data, fit, estimate, diagnose, simulate, and
//! replay any previous run from its manifest.
//!
//! Every command that writes files drops a `manifest.json` into the output
//! directory; `rerun <manifest> --out DIR` reproduces the other files
//! byte-for-byte.  Exit codes: 0 success, 2 input problem (files, flags,
//! schema, config), 3 numerical failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;

use crate::bagging::{beb_estimate, bootstrap_param_draws, write_param_draws_csv, BebResult, ParamDraws};
use crate::data::{load_count_csv, load_gaussian_csv, Dataset};
use crate::datasets;
use crate::error::{Error, Result};
use crate::fh::FayHerriot;
use crate::manifest::{DatasetSource, RunManifest};
use crate::model::HierarchicalModel;
use crate::pg::PoissonGamma;
use crate::plot::{histogram_svg, line_chart_svg, HistPanel, LinePanel, Series};
use crate::resample::{BootstrapScheme, BootstrapSpec};
use crate::sim::{parse_sim_config, run_study, write_sim_csv, ModelKind, SimConfig, SimResult};

#[derive(Debug, Parser)]
#[command(
    name = "beb",
    version,
    about = "Empirical Bayes small-area estimation with bootstrap-averaged (bagged) estimators"
)]
pub struct Cli {
    /// Model family.
    #[arg(long, global = true, value_enum)]
    model: Option<ModelArg>,
    /// Root seed; generated and recorded in the manifest when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Bootstrap replicate count B.
    #[arg(long = "bootstrap", global = true)]
    bootstrap: Option<usize>,
    /// How bootstrap replicates are drawn.
    #[arg(long, global = true, value_enum)]
    scheme: Option<SchemeArg>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Fh,
    Pg,
}

impl From<ModelArg> for ModelKind {
    fn from(value: ModelArg) -> Self {
        match value {
            ModelArg::Fh => ModelKind::Fh,
            ModelArg::Pg => ModelKind::Pg,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    /// Redraw responses from the fitted model.
    Parametric,
    /// Resample whole area tuples with replacement.
    Nonparametric,
}

impl From<SchemeArg> for BootstrapScheme {
    fn from(value: SchemeArg) -> Self {
        match value {
            SchemeArg::Parametric => BootstrapScheme::Parametric,
            SchemeArg::Nonparametric => BootstrapScheme::NonparametricArea,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit model hyperparameters to a dataset.
    Fit(DataArgs),
    /// Per-area direct, EB and bootstrap-averaged estimates.
    Estimate(DataArgs),
    /// Bootstrap hyperparameter draws: table, quantiles and histograms.
    Diagnose(DataArgs),
    /// Run a seeded Monte Carlo study over (m, hyperparameter) grids.
    Simulate(SimArgs),
    /// Replay a recorded manifest; outputs reproduce byte-for-byte.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Dataset CSV (`id,y,D,...` for fh; `id,z,n,...` for pg).
    data: Option<PathBuf>,
    /// Embedded dataset name instead of a file (e.g. `corn`).
    #[arg(long, conflicts_with = "data")]
    embedded: Option<String>,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// Study config file (flat key=value format).
    #[arg(long, conflicts_with = "profile")]
    config: Option<PathBuf>,
    /// Built-in reduced-scale profile instead of a config file.
    #[arg(long, value_enum)]
    profile: Option<ModelArg>,
    /// Raise the replicate count to the full-scale 5000.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Debug, Args)]
struct RerunArgs {
    /// Path to a manifest.json written by a previous run.
    manifest: PathBuf,
}

/// Parses arguments and dispatches; the binary maps the error kind to its
/// exit code.
pub fn run() -> Result<()> {
    let cli = Cli::parse();
    dispatch(cli)
}

fn dispatch(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Fit(ref data) => {
            let source = data.source()?;
            let model = resolve_model(cli.model, &source)?;
            do_fit(model, &source, out)
        }
        Command::Estimate(ref data) => {
            let source = data.source()?;
            let model = resolve_model(cli.model, &source)?;
            let spec = resolve_spec(&cli)?;
            do_estimate(model, &source, spec, out)
        }
        Command::Diagnose(ref data) => {
            let source = data.source()?;
            let model = resolve_model(cli.model, &source)?;
            let spec = resolve_spec(&cli)?;
            do_diagnose(model, &source, spec, out)
        }
        Command::Simulate(ref sim) => {
            let out = out.ok_or_else(|| {
                Error::Config("simulate writes CSV and SVG files; pass --out DIR".into())
            })?;
            let config = resolve_sim_config(&cli, sim)?;
            do_simulate(&config, out)
        }
        Command::Rerun(ref rerun) => {
            let out = out.ok_or_else(|| {
                Error::Config("rerun reproduces output files; pass --out DIR".into())
            })?;
            do_rerun(&rerun.manifest, out)
        }
    }
}

impl DataArgs {
    fn source(&self) -> Result<DatasetSource> {
        match (&self.data, &self.embedded) {
            (Some(path), None) => Ok(DatasetSource::Path(path.display().to_string())),
            (None, Some(name)) => Ok(DatasetSource::Embedded(name.clone())),
            (None, None) => {
                Err(Error::Config("pass a dataset CSV path or --embedded NAME".into()))
            }
            (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
        }
    }
}

fn resolve_model(arg: Option<ModelArg>, source: &DatasetSource) -> Result<ModelKind> {
    match (arg, source) {
        (Some(m), _) => Ok(m.into()),
        // the embedded fixtures are Gaussian; default accordingly
        (None, DatasetSource::Embedded(_)) => Ok(ModelKind::Fh),
        (None, DatasetSource::Path(_)) => {
            Err(Error::Config("pass --model fh or --model pg".into()))
        }
    }
}

fn fresh_seed() -> u64 {
    rand::rng().next_u64()
}

fn resolve_spec(cli: &Cli) -> Result<BootstrapSpec> {
    let b = cli.bootstrap.unwrap_or(100);
    let scheme = cli.scheme.map_or(BootstrapScheme::Parametric, BootstrapScheme::from);
    BootstrapSpec::new(b, scheme, cli.seed.unwrap_or_else(fresh_seed))
}

fn resolve_sim_config(cli: &Cli, sim: &SimArgs) -> Result<SimConfig> {
    let mut config = match (&sim.config, sim.profile) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            let (mut config, seed_from_file) = parse_sim_config(&text, 0)?;
            // precedence: explicit flag, then the file, then a fresh seed
            config.seed = match (cli.seed, seed_from_file) {
                (Some(s), _) => s,
                (None, true) => config.seed,
                (None, false) => fresh_seed(),
            };
            config
        }
        (None, Some(profile)) => {
            let seed = cli.seed.unwrap_or_else(fresh_seed);
            match ModelKind::from(profile) {
                ModelKind::Fh => SimConfig::reduced_fh(seed),
                ModelKind::Pg => SimConfig::reduced_pg(seed),
            }
        }
        (None, None) => {
            return Err(Error::Config("pass --config FILE or --profile fh|pg".into()))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    if sim.full_scale {
        config.r = 5000;
    }
    config.validate()?;
    Ok(config)
}

fn load_gaussian(source: &DatasetSource) -> Result<Dataset<crate::data::GaussianArea>> {
    match source {
        DatasetSource::Path(path) => load_gaussian_csv(path),
        DatasetSource::Embedded(name) => datasets::embedded_gaussian(name),
    }
}

fn load_count(source: &DatasetSource) -> Result<Dataset<crate::data::CountArea>> {
    match source {
        DatasetSource::Path(path) => load_count_csv(path),
        DatasetSource::Embedded(name) => Err(Error::Schema(format!(
            "embedded dataset '{name}' holds Gaussian survey data, not counts; use --model fh"
        ))),
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn params_json(names: &[String], values: &[f64]) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = names
        .iter()
        .zip(values)
        .map(|(name, value)| (name.clone(), serde_json::json!(value)))
        .collect();
    serde_json::Value::Object(map)
}

fn json_to_file(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("json serialization failed: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

// ---------------------------------------------------------------- fit

fn do_fit(model: ModelKind, source: &DatasetSource, out: Option<&Path>) -> Result<()> {
    let (report_text, fit_json, model_name) = match model {
        ModelKind::Fh => {
            let ds = load_gaussian(source)?;
            let m = FayHerriot::default();
            let fit = m.fit(ds.areas())?;
            let names = m.param_names(ds.covariate_dim());
            let values = m.param_values(&fit.params);
            let mut text = format!(
                "model: fh\nareas: {}, regression coefficients: {}\n",
                ds.len(),
                ds.covariate_dim()
            );
            for (n, v) in names.iter().zip(&values) {
                text.push_str(&format!("{n} = {v}\n"));
            }
            text.push_str(&format!("criterion (-2 loglik + const): {}\n", fit.neg2loglik));
            if fit.boundary_hit {
                text.push_str(
                    "note: prior-variance estimate clamped at 0; every EB estimate collapses \
                     to the regression mean\n",
                );
            }
            let json = serde_json::json!({
                "model": "fh",
                "areas": ds.len(),
                "params": params_json(&names, &values),
                "neg2loglik": fit.neg2loglik,
                "boundary_hit": fit.boundary_hit,
                "iterations": fit.iterations,
            });
            (text, json, "fh")
        }
        ModelKind::Pg => {
            let ds = load_count(source)?;
            let m = PoissonGamma::default();
            let fit = m.fit(ds.areas())?;
            let names = m.param_names(ds.covariate_dim());
            let values = m.param_values(&fit.params);
            let mut text = format!(
                "model: pg\nareas: {}, regression coefficients: {}\n",
                ds.len(),
                ds.covariate_dim()
            );
            for (n, v) in names.iter().zip(&values) {
                text.push_str(&format!("{n} = {v}\n"));
            }
            text.push_str(&format!("log-likelihood: {}\nconverged: {}\n", fit.loglik, fit.converged));
            if fit.nu_at_box_top {
                text.push_str("note: nu at the search-box top (no overdispersion; Poisson limit)\n");
            }
            let json = serde_json::json!({
                "model": "pg",
                "areas": ds.len(),
                "params": params_json(&names, &values),
                "loglik": fit.loglik,
                "converged": fit.converged,
                "nu_at_box_top": fit.nu_at_box_top,
                "iterations": fit.iterations,
            });
            (text, json, "pg")
        }
    };

    print!("{report_text}");
    if let Some(dir) = out {
        ensure_out(dir)?;
        json_to_file(&dir.join("fit.json"), &fit_json)?;
        let mut manifest = RunManifest::new("fit", 0);
        manifest.model = Some(model_name.to_string());
        manifest.dataset = Some(source.clone());
        manifest.save(&dir.join("manifest.json"))?;
        println!("wrote fit.json and manifest.json to {}", dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------- estimate

fn estimates_csv<M: HierarchicalModel>(result: &BebResult<M>) -> String {
    let mut csv = String::from("id,direct,eb,beb,sd,pct_rel_diff\n");
    for a in &result.areas {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            a.id, a.direct, a.eb, a.beb, a.bootstrap_sd_of_bayes, a.pct_rel_diff
        ));
    }
    csv
}

fn print_estimate_table<M: HierarchicalModel>(result: &BebResult<M>) {
    let id_w = result.areas.iter().map(|a| a.id.len()).max().unwrap_or(2).max(2);
    println!(
        "{:<id_w$}  {:>10}  {:>10}  {:>10}  {:>10}  {:>9}",
        "id", "direct", "EB", "BEB", "sd", "rel%"
    );
    for a in &result.areas {
        println!(
            "{:<id_w$}  {:>10.4}  {:>10.4}  {:>10.4}  {:>10.4}  {:>9.3}",
            a.id, a.direct, a.eb, a.beb, a.bootstrap_sd_of_bayes, a.pct_rel_diff
        );
    }
}

fn summary_json<M: HierarchicalModel>(
    model: &M,
    model_name: &str,
    spec: &BootstrapSpec,
    result: &BebResult<M>,
    fit_fields: serde_json::Value,
) -> serde_json::Value {
    let names = {
        let values = model.param_values(model.fit_params(&result.fit));
        model.param_names(values.len() - 1)
    };
    let values = model.param_values(model.fit_params(&result.fit));
    serde_json::json!({
        "model": model_name,
        "bootstrap": spec,
        "n_retries": result.n_retries,
        "n_failed": result.n_failed,
        "fit": { "params": params_json(&names, &values), "detail": fit_fields },
        "areas": result.areas,
    })
}

fn do_estimate(
    model: ModelKind,
    source: &DatasetSource,
    spec: BootstrapSpec,
    out: Option<&Path>,
) -> Result<()> {
    let (csv, summary) = match model {
        ModelKind::Fh => {
            let ds = load_gaussian(source)?;
            let m = FayHerriot::default();
            let result = beb_estimate(&ds, &m, &spec)?;
            print_estimate_table(&result);
            println!(
                "fh fit: A = {}, boundary_hit = {}; B = {} ({} retries, {} failed), seed = {}",
                result.fit.params.a,
                result.fit.boundary_hit,
                spec.b,
                result.n_retries,
                result.n_failed,
                spec.seed
            );
            let detail = serde_json::json!({
                "neg2loglik": result.fit.neg2loglik,
                "boundary_hit": result.fit.boundary_hit,
            });
            (estimates_csv(&result), summary_json(&m, "fh", &spec, &result, detail))
        }
        ModelKind::Pg => {
            let ds = load_count(source)?;
            let m = PoissonGamma::default();
            let result = beb_estimate(&ds, &m, &spec)?;
            print_estimate_table(&result);
            println!(
                "pg fit: nu = {}, converged = {}; B = {} ({} retries, {} failed), seed = {}",
                result.fit.params.nu,
                result.fit.converged,
                spec.b,
                result.n_retries,
                result.n_failed,
                spec.seed
            );
            let detail = serde_json::json!({
                "loglik": result.fit.loglik,
                "converged": result.fit.converged,
                "nu_at_box_top": result.fit.nu_at_box_top,
            });
            (estimates_csv(&result), summary_json(&m, "pg", &spec, &result, detail))
        }
    };

    if let Some(dir) = out {
        ensure_out(dir)?;
        write_text(&dir.join("estimates.csv"), &csv)?;
        json_to_file(&dir.join("summary.json"), &summary)?;
        let mut manifest = RunManifest::new("estimate", spec.seed);
        manifest.model = Some(model.as_str().to_string());
        manifest.dataset = Some(source.clone());
        manifest.bootstrap = Some(spec);
        manifest.save(&dir.join("manifest.json"))?;
        println!("wrote estimates.csv, summary.json, manifest.json to {}", dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------- diagnose

fn print_draw_quantiles(draws: &ParamDraws) {
    println!("bootstrap hyperparameter draws ({} replicates):", draws.rows.len());
    println!("{:<8} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}", "param", "1%", "25%", "50%", "75%", "99%", "ml");
    for ((name, qs), ml) in draws.names.iter().zip(&draws.quantiles).zip(&draws.ml) {
        println!(
            "{:<8} {:>11.5} {:>11.5} {:>11.5} {:>11.5} {:>11.5} {:>11.5}",
            name, qs[0], qs[1], qs[2], qs[3], qs[4], ml
        );
    }
}

fn draws_histograms(draws: &ParamDraws) -> String {
    let panels: Vec<HistPanel> = draws
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| HistPanel {
            title: format!("bootstrap draws of {name}"),
            values: draws.rows.iter().map(|r| r[j]).collect(),
            marker: Some(draws.ml[j]),
        })
        .collect();
    histogram_svg(&panels)
}

fn do_diagnose(
    model: ModelKind,
    source: &DatasetSource,
    spec: BootstrapSpec,
    out: Option<&Path>,
) -> Result<()> {
    let (draws, zero_fraction) = match model {
        ModelKind::Fh => {
            let ds = load_gaussian(source)?;
            let m = FayHerriot::default();
            let result = beb_estimate(&ds, &m, &spec)?;
            let draws = bootstrap_param_draws(&m, &result);
            // last coordinate is A; boundary refits are the pathology of note
            let zeros = draws.rows.iter().filter(|r| r[draws.ml.len() - 1] == 0.0).count();
            let fraction = zeros as f64 / draws.rows.len() as f64;
            (draws, Some(fraction))
        }
        ModelKind::Pg => {
            let ds = load_count(source)?;
            let m = PoissonGamma::default();
            let result = beb_estimate(&ds, &m, &spec)?;
            (bootstrap_param_draws(&m, &result), None)
        }
    };

    print_draw_quantiles(&draws);
    if let Some(fraction) = zero_fraction {
        println!("fraction of replicates with A = 0: {fraction:.3}");
    }

    if let Some(dir) = out {
        ensure_out(dir)?;
        let mut csv = Vec::new();
        write_param_draws_csv(&draws, &mut csv)?;
        write_text(&dir.join("draws.csv"), &String::from_utf8(csv).expect("csv is utf8"))?;
        write_text(&dir.join("histograms.svg"), &draws_histograms(&draws))?;
        let mut manifest = RunManifest::new("diagnose", spec.seed);
        manifest.model = Some(model.as_str().to_string());
        manifest.dataset = Some(source.clone());
        manifest.bootstrap = Some(spec);
        manifest.save(&dir.join("manifest.json"))?;
        println!("wrote draws.csv, histograms.svg, manifest.json to {}", dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------- simulate

fn study_panels(config: &SimConfig, result: &SimResult) -> Vec<LinePanel> {
    let hyper_name = match config.model {
        ModelKind::Fh => "A",
        ModelKind::Pg => "nu",
    };
    let labels: Vec<String> = std::iter::once("EB".to_string())
        .chain(config.b_grid.iter().map(|b| format!("BEB({b})")))
        .collect();
    config
        .hyper_grid
        .iter()
        .map(|&truth| LinePanel {
            title: format!("simulated MSE, true {hyper_name} = {truth}"),
            x_label: "number of areas m".into(),
            y_label: "MSE".into(),
            series: labels
                .iter()
                .map(|label| Series {
                    label: label.clone(),
                    points: result
                        .rows
                        .iter()
                        .filter(|r| r.truth == truth && &r.estimator == label)
                        .map(|r| (r.m as f64, r.mse))
                        .collect(),
                })
                .collect(),
        })
        .collect()
}

fn do_simulate(config: &SimConfig, out: &Path) -> Result<()> {
    let result = run_study(config)?;
    for row in &result.rows {
        println!(
            "{} m={:<3} true={:<6} {:<9} mse={:.6} (mc se {:.6}, R={})",
            row.model, row.m, row.truth, row.estimator, row.mse, row.mc_se, row.r
        );
    }
    ensure_out(out)?;
    let mut csv = Vec::new();
    write_sim_csv(&result, &mut csv)?;
    write_text(&out.join("results.csv"), &String::from_utf8(csv).expect("csv is utf8"))?;
    write_text(&out.join("results.svg"), &line_chart_svg(&study_panels(config, &result)))?;
    let mut manifest = RunManifest::new("simulate", config.seed);
    manifest.model = Some(config.model.as_str().to_string());
    manifest.sim_config = Some(config.clone());
    manifest.save(&out.join("manifest.json"))?;
    println!("wrote results.csv, results.svg, manifest.json to {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------- rerun

fn do_rerun(manifest_path: &Path, out: &Path) -> Result<()> {
    let manifest = RunManifest::load(manifest_path)?;
    let model = || -> Result<ModelKind> {
        manifest
            .model
            .as_deref()
            .ok_or_else(|| Error::Config("manifest lacks a model".into()))?
            .parse()
    };
    let dataset = || -> Result<DatasetSource> {
        manifest
            .dataset
            .clone()
            .ok_or_else(|| Error::Config("manifest lacks a dataset".into()))
    };
    match manifest.command.as_str() {
        "fit" => do_fit(model()?, &dataset()?, Some(out)),
        "estimate" => {
            let spec = manifest
                .bootstrap
                .ok_or_else(|| Error::Config("manifest lacks bootstrap settings".into()))?;
            do_estimate(model()?, &dataset()?, spec, Some(out))
        }
        "diagnose" => {
            let spec = manifest
                .bootstrap
                .ok_or_else(|| Error::Config("manifest lacks bootstrap settings".into()))?;
            do_diagnose(model()?, &dataset()?, spec, Some(out))
        }
        "simulate" => {
            let config = manifest
                .sim_config
                .ok_or_else(|| Error::Config("manifest lacks a study config".into()))?;
            do_simulate(&config, out)
        }
        other => Err(Error::Config(format!("manifest has unknown command '{other}'"))),
    }
}
