//! Toolkit for studying how a quantum-mixed entropy supply affects a
//! stochastic chess-problem composer.
//!
//! The pipeline: an entropy layer serves uniform draws from a seeded
//! pseudorandom stream, a remote (or replayed, or simulated) quantum byte
//! stream, or a probabilistic mix of the two with exact provenance
//! accounting; a composer places random piece configurations and keeps
//! candidates a prover certifies as forced mates in three (mates in two
//! are kept as byproducts); a surrogate scorer rates each composition; an
//! orchestrator runs many instances per mix setting and reduces everything
//! to per-set statistics — one-way ANOVA, Welch's t-tests, and quartile/IQR
//! outlier analysis.
//!
//! The statistics live in [`stats`] and are generic over the scalar type
//! via [`stats::FloatScalar`]; the crate root re-exports `f64` aliases.
//! Determinism is a design rule throughout: identical (seed, recorded
//! quantum bytes, plan) reproduce byte-identical record files and reports.

pub mod aesthetics;
pub mod chess;
pub mod composer;
pub mod entropy;
pub mod experiment;
pub mod stats;

#[cfg(test)]
mod testutil;

/// `f64` aliases for the scalar-generic statistics types.
pub type SampleSet = stats::SampleSet<f64>;
pub type AnovaResult = stats::AnovaResult<f64>;
pub type WelchResult = stats::WelchResult<f64>;
pub type QuartileSummary = stats::QuartileSummary<f64>;
pub type OutlierReport = stats::OutlierReport<f64>;

pub use aesthetics::{AestheticBreakdown, SCORER_VERSION};
pub use composer::{Budget, ComposerSettings, CompositionRecord, PieceConfiguration};
pub use entropy::{EntropySource, EntropyStats, MixRatio, Origin, UnitDraw};
pub use experiment::{ExperimentPlan, Report};
