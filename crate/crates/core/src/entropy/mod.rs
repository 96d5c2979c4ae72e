//! Entropy layer: uniform random values from pseudorandom, quantum-remote,
//! replay and probabilistically mixed sources, with exact provenance
//! accounting.
//!
//! The pseudorandom generator is ChaCha12 (stream cipher keystream, 256-bit
//! state) seeded from a 64-bit seed; reproducibility depends only on
//! seed-stability of that keystream. Unit values take the top 53 bits of a
//! 64-bit word divided by 2^53, and quantum-side draws assemble 53 bits
//! from 7 raw bytes the same way, so every draw is uniform on [0, 1) at
//! full double precision.

pub mod bytes;
pub mod client;
pub mod stub;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bytes::{ByteStream, InMemoryBytes, ReplayFile, SimulatedQuantumBytes, UnavailableBytes};
pub use client::{FetchOutcome, QuantumClient, QuantumClientConfig};

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("quantum byte stream exhausted")]
    Exhausted,
    #[error("quantum fetch failed: {0}")]
    FetchFailed(String),
    #[error("quantum source unavailable: {0}")]
    Unavailable(&'static str),
    #[error("next_int_below requires n >= 1")]
    ZeroRange,
    #[error("mix ratio {0} outside [0, 1]")]
    InvalidRatio(f64),
    #[error("invalid quantum client config: {0}")]
    BadConfig(&'static str),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which stream a served draw came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Pseudo,
    Quantum,
}

/// A single uniform draw on [0, 1) with its provenance tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitDraw {
    pub value: f64,
    pub origin: Origin,
}

/// Per-draw probability that a required random number is taken from the
/// quantum source instead of the pseudorandom one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MixRatio(f64);

impl MixRatio {
    /// The standard experiment presets.
    pub const PRESETS: [f64; 4] = [0.0, 0.05, 0.15, 0.25];
    /// Recommended default when nothing else is configured.
    pub const DEFAULT: f64 = 0.15;

    pub fn new(p: f64) -> Result<MixRatio, EntropyError> {
        if (0.0..=1.0).contains(&p) {
            Ok(MixRatio(p))
        } else {
            Err(EntropyError::InvalidRatio(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MixRatio {
    type Error = String;
    fn try_from(p: f64) -> Result<MixRatio, String> {
        MixRatio::new(p).map_err(|e| e.to_string())
    }
}

impl From<MixRatio> for f64 {
    fn from(r: MixRatio) -> f64 {
        r.0
    }
}

/// Provenance counters for one source over its lifetime.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyStats {
    pub pseudo_draws: u64,
    pub quantum_draws: u64,
    pub quantum_fetch_failures: u64,
    pub fallback_events: u64,
}

impl EntropyStats {
    pub fn total_served(&self) -> u64 {
        self.pseudo_draws + self.quantum_draws
    }

    pub fn quantum_fraction(&self) -> f64 {
        let total = self.total_served();
        if total == 0 {
            0.0
        } else {
            self.quantum_draws as f64 / total as f64
        }
    }
}

/// What a mixed source does when the quantum side cannot deliver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackPolicy {
    /// Propagate the failure; the run aborts.
    Fail,
    /// Serve the draw from the pseudo stream and count the substitution.
    UsePseudo,
}

/// Contract for anything that yields uniform draws with provenance.
pub trait EntropySource {
    fn next_unit(&mut self) -> Result<UnitDraw, EntropyError>;

    /// floor(n × unit), always in [0, n−1].
    fn next_int_below(&mut self, n: u64) -> Result<u64, EntropyError> {
        if n == 0 {
            return Err(EntropyError::ZeroRange);
        }
        let draw = self.next_unit()?;
        Ok(((n as f64 * draw.value) as u64).min(n - 1))
    }

    fn stats(&self) -> EntropyStats;
}

const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Seeded ChaCha12-backed pseudorandom source.
pub struct PseudoSource {
    rng: rand_chacha::ChaCha12Rng,
    stats: EntropyStats,
}

impl PseudoSource {
    pub fn from_seed(seed: u64) -> PseudoSource {
        use rand_core::SeedableRng;
        PseudoSource { rng: rand_chacha::ChaCha12Rng::seed_from_u64(seed), stats: EntropyStats::default() }
    }

    /// Raw unit value without provenance accounting. Used for the mix
    /// selection coin, which is not a served draw.
    fn raw_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * UNIT_SCALE
    }
}

impl EntropySource for PseudoSource {
    fn next_unit(&mut self) -> Result<UnitDraw, EntropyError> {
        let value = self.raw_unit();
        self.stats.pseudo_draws += 1;
        Ok(UnitDraw { value, origin: Origin::Pseudo })
    }

    fn stats(&self) -> EntropyStats {
        self.stats
    }
}

/// Quantum-origin source over any [`ByteStream`]: 7 bytes per draw,
/// big-endian, top 53 bits kept.
pub struct QuantumSource {
    stream: Box<dyn ByteStream>,
    stats: EntropyStats,
}

impl QuantumSource {
    pub fn new(stream: Box<dyn ByteStream>) -> QuantumSource {
        QuantumSource { stream, stats: EntropyStats::default() }
    }

    fn raw_unit(&mut self) -> Result<f64, EntropyError> {
        let mut bytes = [0u8; 7];
        self.stream.fill(&mut bytes)?;
        let mut word = 0u64;
        for b in bytes {
            word = (word << 8) | b as u64;
        }
        Ok((word >> 3) as f64 * UNIT_SCALE)
    }
}

impl EntropySource for QuantumSource {
    fn next_unit(&mut self) -> Result<UnitDraw, EntropyError> {
        match self.raw_unit() {
            Ok(value) => {
                self.stats.quantum_draws += 1;
                Ok(UnitDraw { value, origin: Origin::Quantum })
            }
            Err(e) => {
                self.stats.quantum_fetch_failures += 1;
                Err(e)
            }
        }
    }

    fn stats(&self) -> EntropyStats {
        self.stats
    }
}

/// Probabilistic mix of a pseudo and a quantum source.
///
/// The selection coin is drawn from the pseudo stream, so a quantum outage
/// can never stall selection and the whole sequence replays from (seed,
/// recorded quantum bytes). With ratio 0 the quantum side is never touched
/// and no coin is spent.
pub struct MixedSource {
    pseudo: PseudoSource,
    quantum: QuantumSource,
    ratio: MixRatio,
    fallback: FallbackPolicy,
    stats: EntropyStats,
}

impl MixedSource {
    pub fn new(
        pseudo: PseudoSource,
        quantum: QuantumSource,
        ratio: MixRatio,
        fallback: FallbackPolicy,
    ) -> MixedSource {
        MixedSource { pseudo, quantum, ratio, fallback, stats: EntropyStats::default() }
    }

    pub fn ratio(&self) -> MixRatio {
        self.ratio
    }
}

impl EntropySource for MixedSource {
    fn next_unit(&mut self) -> Result<UnitDraw, EntropyError> {
        let p = self.ratio.value();
        if p > 0.0 && self.pseudo.raw_unit() < p {
            match self.quantum.raw_unit() {
                Ok(value) => {
                    self.stats.quantum_draws += 1;
                    return Ok(UnitDraw { value, origin: Origin::Quantum });
                }
                Err(e) => {
                    self.stats.quantum_fetch_failures += 1;
                    match self.fallback {
                        FallbackPolicy::Fail => return Err(e),
                        FallbackPolicy::UsePseudo => self.stats.fallback_events += 1,
                    }
                }
            }
        }
        let value = self.pseudo.raw_unit();
        self.stats.pseudo_draws += 1;
        Ok(UnitDraw { value, origin: Origin::Pseudo })
    }

    fn stats(&self) -> EntropyStats {
        self.stats
    }
}
