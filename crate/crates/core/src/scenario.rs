//! Scenario files: the JSON surface that describes a complete run.
//!
//! Schema (field names are load-bearing):
//!
//! ```json
//! {
//!   "numerology": { "mu": 4, "fft_size": 2048, "payload_subcarriers": 1200 },
//!   "bands": [
//!     { "channel_gain": 40.0, "noise_power_w": 0.01,
//!       "interference": { "kind": "log_normal", "log_mean": -2.3, "log_sd": 1.1 } }
//!   ],
//!   "correlation": [[1.0]],
//!   "total_power_w": 1.0,
//!   "run": { "portfolios": 5000, "draws": 10000, "seed": 42 }
//! }
//! ```
//!
//! The number of sub-bands is the length of `bands`; the carrier is split
//! equally among them. Interference kinds: `constant { level_w }`,
//! `log_normal { log_mean, log_sd }`, `gamma { shape, scale_w }`,
//! `empirical { samples_w }`, and `trace { path, column, has_header }` which
//! reads a CSV column (path relative to the scenario file) and is inlined to
//! an `empirical` marginal at load time, so loaded scenarios are always
//! self-contained. The whole `run` object and each of its fields are
//! optional; missing values resolve to 5000 portfolios, 10000 draws, seed 42.
//!
//! Every module-level invariant is enforced at load time with an error that
//! names the offending field.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interference::{
    load_empirical, CorrelationMatrix, InterferenceError, InterferenceMarginal, InterferenceModel,
};
use crate::numerology::{Numerology, SubbandGeometry};
use crate::radio::{LinkScenario, SubbandSpec};

pub const DEFAULT_PORTFOLIOS: usize = 5000;
pub const DEFAULT_DRAWS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing field `{field}` at line {line}, column {column}")]
    MissingField {
        field: String,
        line: usize,
        column: usize,
    },
    #[error("{field}: {reason}")]
    Validation { field: String, reason: String },
}

impl ScenarioError {
    fn validation(field: impl Into<String>, reason: impl ToString) -> Self {
        Self::Validation {
            field: field.into(),
            reason: reason.to_string(),
        }
    }
}

/// One band's interference distribution as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterferenceSpec {
    Constant {
        level_w: f64,
    },
    LogNormal {
        log_mean: f64,
        log_sd: f64,
    },
    Gamma {
        shape: f64,
        scale_w: f64,
    },
    Empirical {
        samples_w: Vec<f64>,
    },
    Trace {
        path: String,
        column: usize,
        #[serde(default)]
        has_header: bool,
    },
}

impl InterferenceSpec {
    /// The domain marginal; `Trace` must have been inlined first.
    fn to_marginal(&self, field: &str) -> Result<InterferenceMarginal, ScenarioError> {
        match self {
            Self::Constant { level_w } => Ok(InterferenceMarginal::Constant { level_w: *level_w }),
            Self::LogNormal { log_mean, log_sd } => Ok(InterferenceMarginal::LogNormal {
                log_mean: *log_mean,
                log_sd: *log_sd,
            }),
            Self::Gamma { shape, scale_w } => Ok(InterferenceMarginal::Gamma {
                shape: *shape,
                scale_w: *scale_w,
            }),
            Self::Empirical { samples_w } => Ok(InterferenceMarginal::Empirical {
                samples_w: samples_w.clone(),
            }),
            Self::Trace { path, .. } => Err(ScenarioError::validation(
                field,
                format!("trace `{path}` has not been resolved; load the scenario from a file"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumerologySection {
    pub mu: u8,
    pub fft_size: u32,
    pub payload_subcarriers: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSection {
    pub channel_gain: f64,
    pub noise_power_w: f64,
    pub interference: InterferenceSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub portfolios: usize,
    pub draws: usize,
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            portfolios: DEFAULT_PORTFOLIOS,
            draws: DEFAULT_DRAWS,
            seed: DEFAULT_SEED,
        }
    }
}

/// A complete run description. After loading, defaults are resolved and any
/// trace references are inlined, so the value serialises back to a
/// self-contained file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub numerology: NumerologySection,
    pub bands: Vec<BandSection>,
    pub correlation: Vec<Vec<f64>>,
    pub total_power_w: f64,
    #[serde(default)]
    pub run: RunSection,
}

/// Domain objects compiled from a validated scenario.
#[derive(Debug, Clone)]
pub struct CompiledScenario {
    pub numerology: Numerology,
    pub geometry: SubbandGeometry,
    pub link: LinkScenario,
    pub interference: InterferenceModel,
    pub run: RunSection,
}

/// Parse a scenario from JSON text and validate it. Never touches the file
/// system: `trace` interference is accepted structurally and its full
/// validation deferred until [`load_scenario`] resolves it.
pub fn from_json_str(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let scenario: ScenarioFile = serde_json::from_str(text).map_err(classify_json_error)?;
    validate_structural(&scenario)?;
    let has_traces = scenario
        .bands
        .iter()
        .any(|b| matches!(b.interference, InterferenceSpec::Trace { .. }));
    if !has_traces {
        compile(&scenario)?;
    }
    Ok(scenario)
}

/// Load, resolve and fully validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFile, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut scenario: ScenarioFile =
        serde_json::from_str(&text).map_err(classify_json_error)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    resolve_traces(&mut scenario, base)?;
    validate_structural(&scenario)?;
    compile(&scenario)?;
    Ok(scenario)
}

/// Serialise a scenario as pretty JSON with a trailing newline.
pub fn to_json_string(scenario: &ScenarioFile) -> String {
    let mut text = serde_json::to_string_pretty(scenario).expect("scenario serialises");
    text.push('\n');
    text
}

/// Write a scenario file; the output parses back to an equal value.
pub fn write_scenario(scenario: &ScenarioFile, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    fs::write(path, to_json_string(scenario)).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Build the domain objects, re-running every constructor-level invariant.
pub fn compile(scenario: &ScenarioFile) -> Result<CompiledScenario, ScenarioError> {
    let n = &scenario.numerology;
    let numerology = Numerology::new(n.mu, n.fft_size, n.payload_subcarriers)
        .map_err(|e| ScenarioError::validation("numerology", e))?;
    let bands = u32::try_from(scenario.bands.len())
        .map_err(|_| ScenarioError::validation("bands", "too many bands"))?;
    let geometry = numerology
        .partition(bands)
        .map_err(|e| ScenarioError::validation("bands", e))?;

    let bandwidth_hz = geometry.bandwidth_per_band_hz() as f64;
    let mut specs = Vec::with_capacity(scenario.bands.len());
    let mut marginals = Vec::with_capacity(scenario.bands.len());
    for (i, band) in scenario.bands.iter().enumerate() {
        let field = format!("bands[{i}]");
        let spec = SubbandSpec::new(bandwidth_hz, band.channel_gain, band.noise_power_w)
            .map_err(|e| ScenarioError::validation(&field, e))?;
        let marginal = band.interference.to_marginal(&field)?;
        marginal
            .validate()
            .map_err(|e| ScenarioError::validation(format!("{field}.interference"), e))?;
        // The SINR denominator must stay positive for every draw the
        // marginal can produce.
        if band.noise_power_w == 0.0 && marginal.infimum_w() <= 0.0 {
            return Err(ScenarioError::validation(
                format!("{field}.noise_power_w"),
                "must be positive unless the interference marginal is bounded away from zero",
            ));
        }
        specs.push(spec);
        marginals.push(marginal);
    }

    let link = LinkScenario::new(specs, scenario.total_power_w)
        .map_err(|e| ScenarioError::validation("total_power_w", e))?;

    let correlation = CorrelationMatrix::from_rows(&scenario.correlation)
        .map_err(|e| ScenarioError::validation("correlation", e))?;
    if correlation.dim() != scenario.bands.len() {
        return Err(ScenarioError::validation(
            "correlation",
            format!(
                "is {0}x{0} but the scenario has {1} bands",
                correlation.dim(),
                scenario.bands.len()
            ),
        ));
    }
    let interference = InterferenceModel::new(marginals, correlation)
        .map_err(|e| ScenarioError::validation("correlation", e))?;

    if scenario.run.portfolios == 0 {
        return Err(ScenarioError::validation("run.portfolios", "must be at least 1"));
    }
    if scenario.run.draws == 0 {
        return Err(ScenarioError::validation("run.draws", "must be at least 1"));
    }

    Ok(CompiledScenario {
        numerology,
        geometry,
        link,
        interference,
        run: scenario.run,
    })
}

/// Checks that need no file access and no domain construction: everything
/// else is covered by [`compile`].
fn validate_structural(scenario: &ScenarioFile) -> Result<(), ScenarioError> {
    if scenario.bands.is_empty() {
        return Err(ScenarioError::validation("bands", "must contain at least one band"));
    }
    if !scenario.total_power_w.is_finite() || scenario.total_power_w <= 0.0 {
        return Err(ScenarioError::validation(
            "total_power_w",
            format!("must be finite and positive, got {}", scenario.total_power_w),
        ));
    }
    Ok(())
}

/// Replace every `trace` interference entry with the inline `empirical`
/// marginal read from its CSV file.
fn resolve_traces(scenario: &mut ScenarioFile, base: &Path) -> Result<(), ScenarioError> {
    for (i, band) in scenario.bands.iter_mut().enumerate() {
        if let InterferenceSpec::Trace {
            path,
            column,
            has_header,
        } = &band.interference
        {
            let field = format!("bands[{i}].interference.path");
            let full = base.join(path);
            let file = fs::File::open(&full).map_err(|source| ScenarioError::Io {
                path: full.clone(),
                source,
            })?;
            let marginal = load_empirical(file, *column, *has_header).map_err(|e| match e {
                InterferenceError::Io(source) => ScenarioError::Io {
                    path: full.clone(),
                    source,
                },
                other => ScenarioError::validation(&field, other),
            })?;
            if let InterferenceMarginal::Empirical { samples_w } = marginal {
                band.interference = InterferenceSpec::Empirical { samples_w };
            }
        }
    }
    Ok(())
}

fn classify_json_error(error: serde_json::Error) -> ScenarioError {
    let (line, column) = (error.line(), error.column());
    let message = error.to_string();
    if error.is_data() {
        if let Some(rest) = message.strip_prefix("missing field `") {
            if let Some(field) = rest.split('`').next() {
                return ScenarioError::MissingField {
                    field: field.to_string(),
                    line,
                    column,
                };
            }
        }
        // Strip the location suffix serde_json appends; the variant carries
        // the original field-level message.
        let reason = message
            .split(" at line ")
            .next()
            .unwrap_or(&message)
            .to_string();
        return ScenarioError::Validation {
            field: format!("line {line}, column {column}"),
            reason,
        };
    }
    ScenarioError::Parse {
        line,
        column,
        message,
    }
}
