//! What the bootstrap ensemble of hyperparameter refits looks like.
//!
//! Refits the two-stage normal model on parametric bootstrap replicates of
//! the corn data and summarizes the resulting hyperparameter draws: quantile
//! table on stdout, full draws CSV and histogram SVG written to a temp
//! directory.  The spread of these draws is exactly what separates the
//! bagged estimator from plug-in EB.
//!
//! Run with: cargo run --example bootstrap_diagnostics

use beb::bagging::{beb_estimate, bootstrap_param_draws, write_param_draws_csv, QUANTILE_LEVELS};
use beb::{datasets, BootstrapScheme, BootstrapSpec, FayHerriot};

fn main() {
    let dataset = datasets::corn();
    let model = FayHerriot::default();
    let spec = BootstrapSpec::new(500, BootstrapScheme::Parametric, 7).unwrap();

    let result = beb_estimate(&dataset, &model, &spec).unwrap();
    let draws = bootstrap_param_draws(&model, &result);

    println!("{} bootstrap refits of (mean, prior variance):", draws.rows.len());
    print!("{:<8}", "param");
    for level in QUANTILE_LEVELS {
        print!(" {:>9}", format!("{}%", level * 100.0));
    }
    println!(" {:>9}", "ml");
    for ((name, qs), ml) in draws.names.iter().zip(&draws.quantiles).zip(&draws.ml) {
        print!("{name:<8}");
        for q in qs {
            print!(" {q:>9.3}");
        }
        println!(" {ml:>9.3}");
    }

    // How often does a replicate estimate zero prior variance?  With only
    // eight areas this is the central fragility of the plug-in estimator.
    let zeros = draws.rows.iter().filter(|row| row[1] == 0.0).count();
    println!(
        "replicates with variance estimate exactly 0: {} of {} ({:.1}%)",
        zeros,
        draws.rows.len(),
        100.0 * zeros as f64 / draws.rows.len() as f64
    );

    let out = std::env::temp_dir().join("beb_bootstrap_diagnostics");
    std::fs::create_dir_all(&out).unwrap();
    let mut csv = Vec::new();
    write_param_draws_csv(&draws, &mut csv).unwrap();
    std::fs::write(out.join("draws.csv"), csv).unwrap();

    let panels: Vec<beb::plot::HistPanel> = draws
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| beb::plot::HistPanel {
            title: format!("bootstrap draws of {name}"),
            values: draws.rows.iter().map(|row| row[j]).collect(),
            marker: Some(draws.ml[j]),
        })
        .collect();
    std::fs::write(out.join("histograms.svg"), beb::plot::histogram_svg(&panels)).unwrap();
    println!("wrote draws.csv and histograms.svg to {}", out.display());
}
