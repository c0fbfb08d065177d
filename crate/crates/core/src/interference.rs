//! Stochastic per-sub-band interference with configurable marginals and
//! cross-band correlation.
//!
//! The model separates what each band's interference power looks like (the
//! marginal distribution) from how the bands move together (a Gaussian
//! copula driven by a user-supplied correlation matrix). One
//! [`SampleMatrix`] is generated per run and shared read-only by every
//! portfolio evaluation — common random numbers — which removes Monte Carlo
//! noise from portfolio comparisons and makes the variance-combination
//! identity exact.
//!
//! Reproducibility: the standard-normal driver for copula column `j` comes
//! from `ChaCha8Rng::seed_from_u64(seed)` on stream `j`. Columns therefore
//! have independent, order-free random streams: generating them in any order
//! (or in parallel) yields bit-identical matrices.

use std::io::Read;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist, Normal};
use thiserror::Error;

use crate::stats;

/// Absolute tolerance on Cholesky pivots when deciding positive
/// semi-definiteness of a correlation matrix.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum InterferenceError {
    #[error("correlation matrix is not positive semi-definite (tolerance {PSD_TOLERANCE:e})")]
    NotPsd,
    #[error("correlation matrix {reason}")]
    InvalidCorrelation { reason: String },
    #[error("interference marginal: {reason}")]
    InvalidMarginal { reason: String },
    #[error("empirical trace has no data rows")]
    EmptyTrace,
    #[error("empirical trace row {row}: column {column} is not numeric: {token:?}")]
    NonNumericValue {
        row: usize,
        column: usize,
        token: String,
    },
    #[error("empirical trace row {row}: column {column} holds a negative power {value}")]
    NegativePower {
        row: usize,
        column: usize,
        value: f64,
    },
    #[error("empirical trace row {row} has {available} columns; column index {requested} requested")]
    MissingColumn {
        row: usize,
        requested: usize,
        available: usize,
    },
    #[error("model has {marginals} marginals but the correlation matrix is {dim}x{dim}")]
    DimensionMismatch { marginals: usize, dim: usize },
    #[error("sample count must be at least 1")]
    EmptySample,
    #[error("sampling band {band} produced a non-finite interference power")]
    NonFiniteSample { band: usize },
    #[error("failed to read empirical trace: {0}")]
    Io(#[from] std::io::Error),
}

/// Marginal distribution of one band's interference power, in watts.
///
/// The families cover the useful verification regimes: `Constant` for
/// deterministic scenarios, `LogNormal` and `Gamma` for light/heavy-tailed
/// fluctuation with closed-form moments, and `Empirical` for replaying a
/// measured trace by resampling it with replacement.
#[derive(Debug, Clone, PartialEq)]
pub enum InterferenceMarginal {
    Constant { level_w: f64 },
    LogNormal { log_mean: f64, log_sd: f64 },
    Gamma { shape: f64, scale_w: f64 },
    Empirical { samples_w: Vec<f64> },
}

impl InterferenceMarginal {
    pub fn validate(&self) -> Result<(), InterferenceError> {
        let fail = |reason: String| Err(InterferenceError::InvalidMarginal { reason });
        match self {
            Self::Constant { level_w } => {
                if !(level_w.is_finite() && *level_w >= 0.0) {
                    return fail(format!("constant level_w must be finite and >= 0, got {level_w}"));
                }
            }
            Self::LogNormal { log_mean, log_sd } => {
                if !log_mean.is_finite() {
                    return fail(format!("log_normal log_mean must be finite, got {log_mean}"));
                }
                if !(log_sd.is_finite() && *log_sd > 0.0) {
                    return fail(format!("log_normal log_sd must be finite and > 0, got {log_sd}"));
                }
            }
            Self::Gamma { shape, scale_w } => {
                if !(shape.is_finite() && *shape > 0.0) {
                    return fail(format!("gamma shape must be finite and > 0, got {shape}"));
                }
                if !(scale_w.is_finite() && *scale_w > 0.0) {
                    return fail(format!("gamma scale_w must be finite and > 0, got {scale_w}"));
                }
            }
            Self::Empirical { samples_w } => {
                if samples_w.is_empty() {
                    return fail("empirical marginal needs at least one sample".to_string());
                }
                for (i, &s) in samples_w.iter().enumerate() {
                    if !(s.is_finite() && s >= 0.0) {
                        return fail(format!(
                            "empirical sample {i} must be finite and >= 0, got {s}"
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Closed-form mean and variance in watts / watts^2; population moments
    /// for `Empirical`.
    pub fn moments(&self) -> (f64, f64) {
        match self {
            Self::Constant { level_w } => (*level_w, 0.0),
            Self::LogNormal { log_mean, log_sd } => {
                let s2 = log_sd * log_sd;
                let mean = (log_mean + s2 / 2.0).exp();
                let variance = (s2.exp() - 1.0) * (2.0 * log_mean + s2).exp();
                (mean, variance)
            }
            Self::Gamma { shape, scale_w } => (shape * scale_w, shape * scale_w * scale_w),
            Self::Empirical { samples_w } => stats::mean_variance(samples_w),
        }
    }

    /// The fixed level for `Constant`, `None` otherwise.
    pub fn constant_level(&self) -> Option<f64> {
        match self {
            Self::Constant { level_w } => Some(*level_w),
            _ => None,
        }
    }

    /// Smallest power the marginal can produce; used by scenario validation
    /// to prove the SINR denominator never vanishes.
    pub fn infimum_w(&self) -> f64 {
        match self {
            Self::Constant { level_w } => *level_w,
            // exp() can underflow to zero for extreme parameters, and the
            // gamma inverse CDF reaches 0 at u = 0, so claim nothing here.
            Self::LogNormal { .. } | Self::Gamma { .. } => 0.0,
            Self::Empirical { samples_w } => samples_w.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Symmetric unit-diagonal correlation matrix with entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    data: Vec<f64>, // row-major
}

impl CorrelationMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    /// Validate shape, symmetry, unit diagonal and coefficient range.
    /// Positive semi-definiteness is checked when the matrix is factored in
    /// [`InterferenceModel::new`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, InterferenceError> {
        let dim = rows.len();
        let fail = |reason: String| Err(InterferenceError::InvalidCorrelation { reason });
        if dim == 0 {
            return fail("must not be empty".to_string());
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return fail(format!("row {i} has {} entries, expected {dim}", row.len()));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if (row[i] - 1.0).abs() > 1e-12 {
                return fail(format!("diagonal entry [{i}][{i}] must be 1, got {}", row[i]));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                    return fail(format!("coefficient [{i}][{j}] must lie in [-1, 1], got {v}"));
                }
                if (v - rows[j][i]).abs() > 1e-12 {
                    return fail(format!(
                        "must be symmetric; [{i}][{j}] = {v} but [{j}][{i}] = {}",
                        rows[j][i]
                    ));
                }
            }
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    /// Lower-triangular factor `L` with `L L^T` equal to the matrix,
    /// tolerating exact semi-definiteness (zero pivots). Pivots below
    /// `-PSD_TOLERANCE` mean the matrix is not PSD.
    fn cholesky_psd(&self) -> Result<Vec<f64>, InterferenceError> {
        let n = self.dim;
        let mut l = vec![0.0_f64; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d < -PSD_TOLERANCE {
                return Err(InterferenceError::NotPsd);
            }
            if d <= PSD_TOLERANCE {
                // Semi-definite direction: the whole column collapses. For a
                // genuine PSD matrix the below-diagonal residuals are bounded
                // by sqrt(d); anything materially larger exposes a non-PSD
                // input.
                for i in (j + 1)..n {
                    let mut r = self.get(i, j);
                    for k in 0..j {
                        r -= l[i * n + k] * l[j * n + k];
                    }
                    if r.abs() > 1e-5 {
                        return Err(InterferenceError::NotPsd);
                    }
                }
                continue;
            }
            let pivot = d.sqrt();
            l[j * n + j] = pivot;
            for i in (j + 1)..n {
                let mut r = self.get(i, j);
                for k in 0..j {
                    r -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = r / pivot;
            }
        }
        Ok(l)
    }
}

/// Per-band marginals plus the copula correlation; the PSD factor is
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct InterferenceModel {
    marginals: Vec<InterferenceMarginal>,
    correlation: CorrelationMatrix,
    chol: Vec<f64>, // lower-triangular, row-major
}

impl InterferenceModel {
    pub fn new(
        marginals: Vec<InterferenceMarginal>,
        correlation: CorrelationMatrix,
    ) -> Result<Self, InterferenceError> {
        if marginals.is_empty() {
            return Err(InterferenceError::InvalidMarginal {
                reason: "model needs at least one band".to_string(),
            });
        }
        if marginals.len() != correlation.dim() {
            return Err(InterferenceError::DimensionMismatch {
                marginals: marginals.len(),
                dim: correlation.dim(),
            });
        }
        for m in &marginals {
            m.validate()?;
        }
        let chol = correlation.cholesky_psd()?;
        Ok(Self {
            marginals,
            correlation,
            chol,
        })
    }

    /// Independent bands with the given marginals.
    pub fn independent(marginals: Vec<InterferenceMarginal>) -> Result<Self, InterferenceError> {
        let dim = marginals.len();
        Self::new(marginals, CorrelationMatrix::identity(dim))
    }

    pub fn band_count(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[InterferenceMarginal] {
        &self.marginals
    }

    pub fn correlation(&self) -> &CorrelationMatrix {
        &self.correlation
    }

    /// The per-band constant levels when every marginal is `Constant`.
    pub fn constant_levels(&self) -> Option<Vec<f64>> {
        self.marginals.iter().map(|m| m.constant_level()).collect()
    }
}

/// `N x M` matrix of interference draws in watts, regenerable bit-for-bit
/// from `(model, n_draws, seed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    draws: Vec<f64>, // row-major, n_draws rows of band_count entries
    n_draws: usize,
    band_count: usize,
    seed: u64,
}

impl SampleMatrix {
    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    pub fn band_count(&self) -> usize {
        self.band_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Interference of band `band` in draw `draw`.
    pub fn value(&self, draw: usize, band: usize) -> f64 {
        self.draws[draw * self.band_count + band]
    }

    /// One draw across all bands.
    pub fn row(&self, draw: usize) -> &[f64] {
        &self.draws[draw * self.band_count..(draw + 1) * self.band_count]
    }

    /// All draws of one band, copied out column-wise.
    pub fn column(&self, band: usize) -> Vec<f64> {
        (0..self.n_draws).map(|k| self.value(k, band)).collect()
    }
}

/// Per-column quantile transform from a standard normal driver to the target
/// marginal.
enum QuantileMap {
    Constant(f64),
    /// `exp(log_mean + log_sd * z)` — the log-normal quantile applied
    /// directly to the normal driver, skipping the CDF round-trip.
    LogNormal { log_mean: f64, log_sd: f64 },
    Gamma(GammaDist),
    /// Sorted copy of the empirical samples; index by `floor(u * len)`.
    Empirical(Vec<f64>),
}

impl QuantileMap {
    fn new(marginal: &InterferenceMarginal) -> Self {
        match marginal {
            InterferenceMarginal::Constant { level_w } => Self::Constant(*level_w),
            InterferenceMarginal::LogNormal { log_mean, log_sd } => Self::LogNormal {
                log_mean: *log_mean,
                log_sd: *log_sd,
            },
            InterferenceMarginal::Gamma { shape, scale_w } => Self::Gamma(
                GammaDist::new(*shape, 1.0 / scale_w).expect("validated gamma parameters"),
            ),
            InterferenceMarginal::Empirical { samples_w } => {
                let mut sorted = samples_w.clone();
                sorted.sort_by(f64::total_cmp);
                Self::Empirical(sorted)
            }
        }
    }

    fn apply(&self, z: f64, std_normal: &Normal) -> f64 {
        match self {
            Self::Constant(level) => *level,
            Self::LogNormal { log_mean, log_sd } => (log_mean + log_sd * z).exp(),
            Self::Gamma(dist) => {
                // Clamp away from the endpoints: u = 1.0 would map to +inf.
                let u = std_normal.cdf(z).clamp(1e-16, 1.0 - 1e-16);
                dist.inverse_cdf(u)
            }
            Self::Empirical(sorted) => {
                let u = std_normal.cdf(z);
                let idx = ((u * sorted.len() as f64) as usize).min(sorted.len() - 1);
                sorted[idx]
            }
        }
    }
}

/// Draw `n_draws` joint interference realisations.
///
/// A Gaussian copula induces the configured cross-band correlation while
/// each column keeps its marginal: correlated standard normals
/// `z = L g` (with `L` the PSD Cholesky factor) are pushed through each
/// marginal's quantile function.
pub fn sample_interference(
    model: &InterferenceModel,
    n_draws: usize,
    seed: u64,
) -> Result<SampleMatrix, InterferenceError> {
    if n_draws == 0 {
        return Err(InterferenceError::EmptySample);
    }
    let m = model.band_count();
    let std_normal = Normal::standard();

    // Independent standard-normal drivers, one ChaCha8 stream per column.
    let mut normals = vec![0.0_f64; n_draws * m];
    for band in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(band as u64);
        for draw in 0..n_draws {
            normals[draw * m + band] = rng.sample(StandardNormal);
        }
    }

    let maps: Vec<QuantileMap> = model.marginals.iter().map(QuantileMap::new).collect();

    let mut draws = vec![0.0_f64; n_draws * m];
    for k in 0..n_draws {
        let g = &normals[k * m..(k + 1) * m];
        for (i, map) in maps.iter().enumerate() {
            let mut z = 0.0;
            for (c, &gc) in g.iter().enumerate().take(i + 1) {
                z += model.chol[i * m + c] * gc;
            }
            draws[k * m + i] = map.apply(z, &std_normal);
        }
    }

    for band in 0..m {
        if (0..n_draws).any(|k| !draws[k * m + band].is_finite()) {
            return Err(InterferenceError::NonFiniteSample { band });
        }
    }

    Ok(SampleMatrix {
        draws,
        n_draws,
        band_count: m,
        seed,
    })
}

/// Build an [`InterferenceMarginal::Empirical`] from one column of a CSV
/// trace: one row per draw, one column per sub-band, values in watts.
pub fn load_empirical<R: Read>(
    source: R,
    column: usize,
    has_header: bool,
) -> Result<InterferenceMarginal, InterferenceError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);

    let mut samples = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1 + usize::from(has_header);
        let record = record.map_err(|e| InterferenceError::NonNumericValue {
            row,
            column,
            token: e.to_string(),
        })?;
        // Tolerate completely blank lines.
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let field = record
            .get(column)
            .ok_or(InterferenceError::MissingColumn {
                row,
                requested: column,
                available: record.len(),
            })?;
        let value: f64 = field
            .parse()
            .map_err(|_| InterferenceError::NonNumericValue {
                row,
                column,
                token: field.to_string(),
            })?;
        if !value.is_finite() {
            return Err(InterferenceError::NonNumericValue {
                row,
                column,
                token: field.to_string(),
            });
        }
        if value < 0.0 {
            return Err(InterferenceError::NegativePower { row, column, value });
        }
        samples.push(value);
    }

    if samples.is_empty() {
        return Err(InterferenceError::EmptyTrace);
    }
    Ok(InterferenceMarginal::Empirical { samples_w: samples })
}
