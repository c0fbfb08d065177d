//! OFDM carrier and sub-band geometry from 5G-NR-style numerology.
//!
//! Subcarrier spacing follows the NR convention of 15 kHz scaled by a power
//! of two, so every frequency in this module is an exact integer number of
//! hertz. Keeping the geometry integral avoids float drift in the sub-band
//! bandwidths that feed the capacity formulas downstream.

use serde::Serialize;
use thiserror::Error;

/// Base subcarrier spacing in Hz; scaled by `2^mu`.
pub const BASE_SUBCARRIER_SPACING_HZ: u64 = 15_000;

/// Largest accepted numerology exponent. 3GPP defines a small range; anything
/// bigger is almost certainly a typo in a scenario file.
pub const MAX_MU: u8 = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumerologyError {
    #[error("numerology.mu must be at most {MAX_MU}, got {0}")]
    MuOutOfRange(u8),
    #[error("numerology.fft_size must be positive")]
    ZeroFftSize,
    #[error("numerology.payload_subcarriers must be positive")]
    ZeroPayload,
    #[error("numerology.payload_subcarriers ({payload}) exceeds fft_size ({fft_size})")]
    PayloadExceedsFft { payload: u32, fft_size: u32 },
    #[error("{payload} payload subcarriers cannot be split into {bands} equal sub-bands")]
    IndivisiblePartition { payload: u32, bands: u32 },
}

/// NR-style numerology: spacing exponent, FFT size and payload subcarrier
/// count. Construct with [`Numerology::new`], which enforces the invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Numerology {
    mu: u8,
    fft_size: u32,
    payload_subcarriers: u32,
}

impl Numerology {
    pub fn new(mu: u8, fft_size: u32, payload_subcarriers: u32) -> Result<Self, NumerologyError> {
        if mu > MAX_MU {
            return Err(NumerologyError::MuOutOfRange(mu));
        }
        if fft_size == 0 {
            return Err(NumerologyError::ZeroFftSize);
        }
        if payload_subcarriers == 0 {
            return Err(NumerologyError::ZeroPayload);
        }
        if payload_subcarriers > fft_size {
            return Err(NumerologyError::PayloadExceedsFft {
                payload: payload_subcarriers,
                fft_size,
            });
        }
        Ok(Self {
            mu,
            fft_size,
            payload_subcarriers,
        })
    }

    pub fn mu(&self) -> u8 {
        self.mu
    }

    pub fn fft_size(&self) -> u32 {
        self.fft_size
    }

    pub fn payload_subcarriers(&self) -> u32 {
        self.payload_subcarriers
    }

    /// Subcarrier spacing in Hz: `15 kHz * 2^mu`, exact.
    pub fn subcarrier_spacing_hz(&self) -> u64 {
        BASE_SUBCARRIER_SPACING_HZ << self.mu
    }

    /// Occupied carrier bandwidth in Hz: payload subcarriers times spacing.
    pub fn carrier_bandwidth_hz(&self) -> u64 {
        u64::from(self.payload_subcarriers) * self.subcarrier_spacing_hz()
    }

    /// Split the payload into `bands` equal contiguous sub-bands.
    ///
    /// Unequal partitions are rejected rather than rounded: silently rounding
    /// would corrupt the per-band bandwidths.
    pub fn partition(&self, bands: u32) -> Result<SubbandGeometry, NumerologyError> {
        if bands == 0 || !self.payload_subcarriers.is_multiple_of(bands) {
            return Err(NumerologyError::IndivisiblePartition {
                payload: self.payload_subcarriers,
                bands,
            });
        }
        let subcarriers_per_band = self.payload_subcarriers / bands;
        Ok(SubbandGeometry {
            count: bands,
            subcarriers_per_band,
            bandwidth_per_band_hz: u64::from(subcarriers_per_band) * self.subcarrier_spacing_hz(),
        })
    }
}

/// Equal partition of a carrier into sub-bands. The sub-bands are contiguous
/// and guard-free; their bandwidths always sum back to the carrier bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubbandGeometry {
    count: u32,
    subcarriers_per_band: u32,
    bandwidth_per_band_hz: u64,
}

impl SubbandGeometry {
    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn subcarriers_per_band(&self) -> u32 {
        self.subcarriers_per_band
    }

    pub fn bandwidth_per_band_hz(&self) -> u64 {
        self.bandwidth_per_band_hz
    }
}
