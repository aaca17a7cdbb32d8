//! Area-level datasets.
//!
//! Both models share the same shape of input: one record per area, holding a
//! response, a known precision quantity (sampling variance `D` or exposure
//! `n`) and a covariate vector whose first entry is the intercept. Datasets
//! are immutable once constructed; every operation that changes them returns
//! a new value.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::error::{Error, Result};

/// One area of a two-stage normal (Fay-Herriot) dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianArea {
    id: String,
    y: f64,
    d: f64,
    x: Vec<f64>,
}

impl GaussianArea {
    /// `d` is the known sampling variance and must be positive; `x` must be
    /// nonempty and finite (by convention `x[0] = 1` for the intercept).
    pub fn new(id: impl Into<String>, y: f64, d: f64, x: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if !y.is_finite() {
            return Err(Error::Data(format!("area {id}: y must be finite")));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Data(format!("area {id}: D must be positive, got {d}")));
        }
        check_covariates(&id, &x)?;
        Ok(GaussianArea { id, y, d, x })
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    /// Direct estimate.
    pub fn y(&self) -> f64 {
        self.y
    }
    /// Known sampling variance.
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub(crate) fn with_response(&self, y: f64) -> Self {
        GaussianArea {
            id: self.id.clone(),
            y,
            d: self.d,
            x: self.x.clone(),
        }
    }
}

/// One area of a Poisson-gamma dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CountArea {
    id: String,
    z: u64,
    n: f64,
    x: Vec<f64>,
}

impl CountArea {
    /// `n` is the exposure (expected count under the reference rate) and
    /// must be positive.
    pub fn new(id: impl Into<String>, z: u64, n: f64, x: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Data(format!("area {id}: n must be positive, got {n}")));
        }
        check_covariates(&id, &x)?;
        Ok(CountArea { id, z, n, x })
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    /// Observed count.
    pub fn z(&self) -> u64 {
        self.z
    }
    /// Exposure.
    pub fn n(&self) -> f64 {
        self.n
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    /// Raw rate z / n, the direct estimate of the area's risk.
    pub fn rate(&self) -> f64 {
        self.z as f64 / self.n
    }

    pub(crate) fn with_count(&self, z: u64) -> Self {
        CountArea {
            id: self.id.clone(),
            z,
            n: self.n,
            x: self.x.clone(),
        }
    }
}

fn check_covariates(id: &str, x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Data(format!("area {id}: covariate vector is empty")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data(format!("area {id}: covariates must be finite")));
    }
    Ok(())
}

/// Common access used by resampling and the bagging driver.
pub trait AreaObs: Clone + Send + Sync {
    fn id(&self) -> &str;
    fn covariates(&self) -> &[f64];
}

impl AreaObs for GaussianArea {
    fn id(&self) -> &str {
        self.id()
    }
    fn covariates(&self) -> &[f64] {
        &self.x
    }
}

impl AreaObs for CountArea {
    fn id(&self) -> &str {
        self.id()
    }
    fn covariates(&self) -> &[f64] {
        &self.x
    }
}

/// An ordered, homogeneous collection of areas.
///
/// Construction enforces at least two areas, unique ids and a common
/// covariate dimension. Bootstrap resamples relax the id-uniqueness rule
/// (a resample may contain one area several times) but keep the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<A: AreaObs> {
    areas: Vec<A>,
}

impl<A: AreaObs> Dataset<A> {
    pub fn new(areas: Vec<A>) -> Result<Self> {
        let ds = Self::from_areas_unchecked_ids(areas)?;
        for (i, a) in ds.areas.iter().enumerate() {
            if ds.areas[..i].iter().any(|b| b.id() == a.id()) {
                return Err(Error::Data(format!("duplicate area id {:?}", a.id())));
            }
        }
        Ok(ds)
    }

    /// Shared checks minus id uniqueness, for resampled data.
    pub(crate) fn from_areas_unchecked_ids(areas: Vec<A>) -> Result<Self> {
        if areas.len() < 2 {
            return Err(Error::Data(format!(
                "a dataset needs at least 2 areas, got {}",
                areas.len()
            )));
        }
        let p = areas[0].covariates().len();
        if areas.iter().any(|a| a.covariates().len() != p) {
            return Err(Error::Data(
                "all areas must share one covariate dimension".into(),
            ));
        }
        Ok(Dataset { areas })
    }

    pub fn areas(&self) -> &[A] {
        &self.areas
    }

    /// Number of areas m.
    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees m >= 2
    }

    /// Covariate dimension p (intercept included).
    pub fn covariate_dim(&self) -> usize {
        self.areas[0].covariates().len()
    }
}

// ---------------------------------------------------------------------------
// CSV input and output
//
// Gaussian layout:  id,y,D,x1,...,xp
// Count layout:     id,z,n,x1,...,xp
//
// The intercept is never stored in the file; loading prepends a leading 1 to
// every covariate vector. Covariate column names are free-form (for instance
// an `AFF` column in a disease-mapping file).
// ---------------------------------------------------------------------------

fn open_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn check_header(headers: &csv::StringRecord, want: [&str; 3], kind: &str) -> Result<()> {
    if headers.len() < 3 {
        return Err(Error::Schema(format!(
            "{kind} CSV needs at least 3 columns ({},{},{}), found {}",
            want[0],
            want[1],
            want[2],
            headers.len()
        )));
    }
    for (i, w) in want.iter().enumerate() {
        let got = headers.get(i).unwrap_or("");
        if !got.eq_ignore_ascii_case(w) {
            return Err(Error::Schema(format!(
                "{kind} CSV header must start with `{},{},{}`; column {} is {:?}",
                want[0],
                want[1],
                want[2],
                i + 1,
                got
            )));
        }
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T> {
    let line = record_line(record);
    let raw = record.get(idx).ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing column {name}"),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {name} from {raw:?}"),
    })
}

fn read_rows<A, F>(path: &Path, want: [&str; 3], kind: &str, make: F) -> Result<Dataset<A>>
where
    A: AreaObs,
    F: Fn(&csv::StringRecord, Vec<f64>) -> Result<A>,
{
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    check_header(&headers, want, kind)?;
    let n_cols = headers.len();

    let mut areas = Vec::new();
    for row in reader.records() {
        let record = row.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0);
            Error::Parse {
                line,
                msg: e.to_string(),
            }
        })?;
        let line = record_line(&record);
        if record.len() != n_cols {
            return Err(Error::Parse {
                line,
                msg: format!("expected {n_cols} fields, found {}", record.len()),
            });
        }
        let mut x = Vec::with_capacity(n_cols - 2);
        x.push(1.0);
        for (j, name) in headers.iter().enumerate().skip(3) {
            x.push(parse_field::<f64>(&record, j, name)?);
        }
        areas.push(make(&record, x).map_err(|e| match e {
            Error::Data(msg) => Error::Parse { line, msg },
            other => other,
        })?);
    }
    Dataset::new(areas)
}

/// Loads a Gaussian dataset (`id,y,D,x1,...,xp`), prepending the intercept.
pub fn load_gaussian_csv(path: impl AsRef<Path>) -> Result<Dataset<GaussianArea>> {
    read_rows(path.as_ref(), ["id", "y", "D"], "Gaussian", |rec, x| {
        let id: String = parse_field(rec, 0, "id")?;
        let y: f64 = parse_field(rec, 1, "y")?;
        let d: f64 = parse_field(rec, 2, "D")?;
        GaussianArea::new(id, y, d, x)
    })
}

/// Loads a count dataset (`id,z,n,x1,...,xp`), prepending the intercept.
/// The Scottish lip-cancer layout `id,z,n,AFF` is one instance of this
/// format.
pub fn load_count_csv(path: impl AsRef<Path>) -> Result<Dataset<CountArea>> {
    read_rows(path.as_ref(), ["id", "z", "n"], "count", |rec, x| {
        let id: String = parse_field(rec, 0, "id")?;
        let z: u64 = parse_field(rec, 1, "z")?;
        let n: f64 = parse_field(rec, 2, "n")?;
        CountArea::new(id, z, n, x)
    })
}

fn covariate_header(p: usize) -> String {
    let mut s = String::new();
    for j in 1..p {
        let _ = write!(s, ",x{j}");
    }
    s
}

/// Writes the Gaussian CSV layout; the intercept column is dropped so the
/// output reloads identically.
pub fn write_gaussian_csv<W: io::Write>(ds: &Dataset<GaussianArea>, mut w: W) -> io::Result<()> {
    writeln!(w, "id,y,D{}", covariate_header(ds.covariate_dim()))?;
    for a in ds.areas() {
        write!(w, "{},{},{}", a.id(), a.y(), a.d())?;
        for v in &a.x()[1..] {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Writes the count CSV layout, intercept dropped.
pub fn write_count_csv<W: io::Write>(ds: &Dataset<CountArea>, mut w: W) -> io::Result<()> {
    writeln!(w, "id,z,n{}", covariate_header(ds.covariate_dim()))?;
    for a in ds.areas() {
        write!(w, "{},{},{}", a.id(), a.z(), a.n())?;
        for v in &a.x()[1..] {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
