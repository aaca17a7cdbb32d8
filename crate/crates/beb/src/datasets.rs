//! Embedded example data.
//!
//! The corn fixture is the classic eight-county crop-hectares example:
//! per-county direct survey estimates with their sampling standard
//! deviations.  No satellite covariate is shipped with it, so fits use an
//! intercept-only design.

use crate::data::{Dataset, GaussianArea};
use crate::error::{Error, Result};

/// (county, direct estimate, sampling standard deviation).
pub const CORN: [(&str, f64, f64); 8] = [
    ("Franklin", 158.62, 5.70),
    ("Pocahontas", 102.52, 43.41),
    ("Winnebago", 112.77, 30.55),
    ("Wright", 144.30, 54.00),
    ("Webster", 117.59, 21.30),
    ("Hancock", 109.38, 15.66),
    ("Kossuth", 110.25, 12.11),
    ("Hardin", 120.05, 36.81),
];

/// The corn dataset as a ready-to-fit Gaussian dataset.  The known sampling
/// variance is the squared standard deviation.
pub fn corn() -> Dataset<GaussianArea> {
    let areas = CORN
        .iter()
        .map(|&(name, de, sd)| {
            GaussianArea::new(name.to_string(), de, sd * sd, vec![1.0])
                .expect("embedded fixture is valid")
        })
        .collect();
    Dataset::new(areas).expect("embedded fixture is valid")
}

/// Names accepted by [`embedded_gaussian`].
pub fn embedded_names() -> &'static [&'static str] {
    &["corn"]
}

/// Looks up an embedded Gaussian dataset by name.
pub fn embedded_gaussian(name: &str) -> Result<Dataset<GaussianArea>> {
    match name {
        "corn" => Ok(corn()),
        other => Err(Error::Config(format!(
            "unknown embedded dataset '{other}' (available: {})",
            embedded_names().join(", ")
        ))),
    }
}
