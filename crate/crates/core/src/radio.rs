//! Deterministic per-sub-band link math.
//!
//! All powers are linear watts; dB conversions belong at the I/O boundary.
//! Capacities use the Shannon bound `W * log2(1 + SINR)` with no
//! modulation/coding gap.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadioError {
    #[error("interference plus noise power is zero; SINR is undefined")]
    DegenerateDenominator,
    #[error("scenario has no sub-bands")]
    EmptyScenario,
    #[error("{field} must be {requirement}, got {value}")]
    InvalidParameter {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

fn require(ok: bool, field: &'static str, requirement: &'static str, value: f64) -> Result<(), RadioError> {
    if ok {
        Ok(())
    } else {
        Err(RadioError::InvalidParameter {
            field,
            requirement,
            value,
        })
    }
}

/// Radio parameters of one sub-band: bandwidth `W`, linear channel power gain
/// `|H|^2` and noise power in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubbandSpec {
    pub bandwidth_hz: f64,
    pub channel_gain: f64,
    pub noise_power_w: f64,
}

impl SubbandSpec {
    pub fn new(bandwidth_hz: f64, channel_gain: f64, noise_power_w: f64) -> Result<Self, RadioError> {
        let spec = Self {
            bandwidth_hz,
            channel_gain,
            noise_power_w,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), RadioError> {
        require(
            self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0,
            "bandwidth_hz",
            "finite and positive",
            self.bandwidth_hz,
        )?;
        require(
            self.channel_gain.is_finite() && self.channel_gain >= 0.0,
            "channel_gain",
            "finite and non-negative",
            self.channel_gain,
        )?;
        require(
            self.noise_power_w.is_finite() && self.noise_power_w >= 0.0,
            "noise_power_w",
            "finite and non-negative",
            self.noise_power_w,
        )
    }
}

/// A full link: the ordered sub-bands plus the total transmit power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario {
    subbands: Vec<SubbandSpec>,
    total_power_w: f64,
}

impl LinkScenario {
    pub fn new(subbands: Vec<SubbandSpec>, total_power_w: f64) -> Result<Self, RadioError> {
        if subbands.is_empty() {
            return Err(RadioError::EmptyScenario);
        }
        for spec in &subbands {
            spec.validate()?;
        }
        require(
            total_power_w.is_finite() && total_power_w > 0.0,
            "total_power_w",
            "finite and positive",
            total_power_w,
        )?;
        Ok(Self {
            subbands,
            total_power_w,
        })
    }

    pub fn subbands(&self) -> &[SubbandSpec] {
        &self.subbands
    }

    pub fn band_count(&self) -> usize {
        self.subbands.len()
    }

    pub fn total_power_w(&self) -> f64 {
        self.total_power_w
    }
}

/// SINR of one sub-band: `p * |H|^2 / (I + N)`.
pub fn sinr(allocated_power_w: f64, spec: &SubbandSpec, interference_w: f64) -> Result<f64, RadioError> {
    require(
        allocated_power_w.is_finite() && allocated_power_w >= 0.0,
        "allocated_power_w",
        "finite and non-negative",
        allocated_power_w,
    )?;
    require(
        interference_w.is_finite() && interference_w >= 0.0,
        "interference_w",
        "finite and non-negative",
        interference_w,
    )?;
    let denominator = interference_w + spec.noise_power_w;
    if denominator == 0.0 {
        return Err(RadioError::DegenerateDenominator);
    }
    Ok(allocated_power_w * spec.channel_gain / denominator)
}

/// Shannon capacity of one sub-band in bits/s: `W * log2(1 + gamma)`.
///
/// `gamma` must be non-negative; zero SINR yields exactly zero capacity.
pub fn subband_capacity_bps(spec: &SubbandSpec, gamma: f64) -> f64 {
    assert!(gamma >= 0.0, "SINR must be non-negative, got {gamma}");
    spec.bandwidth_hz * (1.0 + gamma).log2()
}

/// Total throughput in bits/s: the sum over sub-bands.
pub fn total_throughput_bps(per_band_bps: &[f64]) -> Result<f64, RadioError> {
    if per_band_bps.is_empty() {
        return Err(RadioError::EmptyScenario);
    }
    Ok(per_band_bps.iter().sum())
}
