//! Stochastic composition loop: pick a permissible piece configuration,
//! pick an attempt count, place pieces at random, prove or reject, score.
//!
//! Entropy is consumed at exactly three decision points — configuration
//! selection, attempt count, and piece placement/removal — so the entire
//! output is a pure function of (seed, quantum byte stream, settings).

mod record;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use record::{
    parse_record_file, InstanceSummary, RecordFile, RecordFileError, RecordFileHeader,
    RecordWriter, RECORD_FORMAT, RECORD_VERSION,
};

use crate::aesthetics::{score, AestheticBreakdown};
use crate::chess::movegen::pseudo_legal_moves;
use crate::chess::{
    emit_fen, prove_mate_in_n, Color, MateError, MateVerdict, Piece, PieceKind, Position, Square,
};
use crate::entropy::{EntropyError, EntropySource, EntropyStats};

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("permissible configuration list is empty")]
    NoConfigurations,
    #[error("invalid composer settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// Material of a candidate problem, kings implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "record::ConfigWire", into = "record::ConfigWire")]
pub struct PieceConfiguration {
    pub white: Vec<PieceKind>,
    pub black: Vec<PieceKind>,
}

impl PieceConfiguration {
    pub fn new(white: Vec<PieceKind>, black: Vec<PieceKind>) -> PieceConfiguration {
        PieceConfiguration { white, black }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (side, list) in [("white", &self.white), ("black", &self.black)] {
            if list.contains(&PieceKind::King) {
                return Err(format!("{side}: kings are implicit"));
            }
            if list.iter().filter(|&&k| k == PieceKind::Pawn).count() > 8 {
                return Err(format!("{side}: more than 8 pawns"));
            }
            if list.len() > 15 {
                return Err(format!("{side}: more than 15 non-king pieces"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposerSettings {
    pub configurations: Vec<PieceConfiguration>,
    pub attempts_min: u32,
    pub attempts_max: u32,
    /// Mate-in-N target; fixed at 3.
    pub target_depth: u8,
    pub max_placement_retries: u32,
}

impl Default for ComposerSettings {
    fn default() -> ComposerSettings {
        ComposerSettings {
            configurations: default_configurations(),
            attempts_min: 1,
            attempts_max: 50,
            target_depth: 3,
            max_placement_retries: 10,
        }
    }
}

impl ComposerSettings {
    pub fn validate(&self) -> Result<(), ComposeError> {
        if self.configurations.is_empty() {
            return Err(ComposeError::NoConfigurations);
        }
        for (i, c) in self.configurations.iter().enumerate() {
            c.validate()
                .map_err(|e| ComposeError::InvalidSettings(format!("configuration {i}: {e}")))?;
        }
        if self.attempts_min == 0 || self.attempts_min > self.attempts_max {
            return Err(ComposeError::InvalidSettings(
                "attempt bounds must satisfy 1 <= min <= max".into(),
            ));
        }
        if self.target_depth != 3 {
            return Err(ComposeError::InvalidSettings("target_depth is fixed at 3".into()));
        }
        Ok(())
    }

    /// Stable hash of the settings, recorded in every output header.
    pub fn settings_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("settings serialize");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Twelve default material sets, from bare K+Q vs K up to a mixed
/// eight-piece setting.
pub fn default_configurations() -> Vec<PieceConfiguration> {
    use PieceKind::*;
    let cfg = |white: &[PieceKind], black: &[PieceKind]| {
        PieceConfiguration::new(white.to_vec(), black.to_vec())
    };
    vec![
        cfg(&[Queen], &[]),
        cfg(&[Rook], &[]),
        cfg(&[Queen, Rook], &[]),
        cfg(&[Rook, Rook], &[]),
        cfg(&[Queen, Knight], &[]),
        cfg(&[Queen], &[Rook]),
        cfg(&[Rook, Bishop], &[Knight]),
        cfg(&[Queen, Rook], &[Rook]),
        cfg(&[Queen, Bishop, Knight], &[Pawn]),
        cfg(&[Rook, Rook, Knight], &[Bishop, Pawn]),
        cfg(&[Queen, Rook, Bishop], &[Rook, Pawn]),
        cfg(&[Queen, Rook, Knight, Pawn], &[Rook, Bishop]),
    ]
}

/// How long one composer instance runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Attempts(u64),
    WallClockMs(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    MateIn3,
    MateIn2Byproduct,
    RejectedInvalid,
    RejectedNoMate,
}

/// One accepted composition, as stored in record files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionRecord {
    pub fen: String,
    pub classification: Classification,
    pub key_moves: Vec<String>,
    pub principal_variation: Vec<String>,
    /// Present exactly when the classification is a mate class.
    pub aesthetics: Option<AestheticBreakdown>,
    pub entropy_stats: EntropyStats,
    pub set_label: String,
    pub instance_id: u32,
    pub seed: u64,
    /// Logical clock: attempts completed in this instance when the record
    /// was emitted. Wall-clock stamps would break bit-reproducibility.
    pub timestamp: u64,
}

impl CompositionRecord {
    pub fn aesthetic_score(&self) -> Option<f64> {
        self.aesthetics.map(|a| a.total)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDiagnostics {
    pub attempts: u64,
    pub placement_failures: u64,
    pub invalid_candidates: u64,
    pub no_mate: u64,
    pub mate_in_1_trivial: u64,
    pub mate_in_2: u64,
    pub mate_in_3: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state", content = "reason")]
pub enum InstanceStatus {
    Completed,
    Aborted(String),
}

#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub records: Vec<CompositionRecord>,
    pub diagnostics: InstanceDiagnostics,
    pub entropy_stats: EntropyStats,
    pub status: InstanceStatus,
}

/// Uniform pick from the permissible configuration list.
pub fn select_configuration<'a>(
    entropy: &mut dyn EntropySource,
    settings: &'a ComposerSettings,
) -> Result<&'a PieceConfiguration, ComposeError> {
    if settings.configurations.is_empty() {
        return Err(ComposeError::NoConfigurations);
    }
    let idx = entropy.next_int_below(settings.configurations.len() as u64)?;
    Ok(&settings.configurations[idx as usize])
}

/// Uniform attempt count in [attempts_min, attempts_max].
pub fn attempts_count(
    entropy: &mut dyn EntropySource,
    settings: &ComposerSettings,
) -> Result<u32, EntropyError> {
    let span = u64::from(settings.attempts_max - settings.attempts_min) + 1;
    Ok(settings.attempts_min + entropy.next_int_below(span)? as u32)
}

/// Candidate generation failed after exhausting its retry allowance.
#[derive(Debug, PartialEq, Eq)]
pub struct PlacementFailure;

/// Random placement: kings first on non-adjacent squares, then each listed
/// piece on a random empty square (pawns keep off ranks 1 and 8). If Black
/// ends up in check, checking pieces are removed one at a time, the victim
/// chosen by an entropy draw, up to `max_placement_retries` removals.
pub fn generate_candidate(
    entropy: &mut dyn EntropySource,
    configuration: &PieceConfiguration,
    max_placement_retries: u32,
) -> Result<Result<Position, PlacementFailure>, EntropyError> {
    let mut pos = Position::empty();
    let mut empties: Vec<Square> = Square::all().collect();

    let wk_idx = entropy.next_int_below(empties.len() as u64)? as usize;
    let wk = empties.remove(wk_idx);
    pos.set_piece(wk, Some(Piece { color: Color::White, kind: PieceKind::King }));

    let far: Vec<usize> = empties
        .iter()
        .enumerate()
        .filter(|(_, sq)| {
            let df = (sq.file() as i8 - wk.file() as i8).abs();
            let dr = (sq.rank() as i8 - wk.rank() as i8).abs();
            df > 1 || dr > 1
        })
        .map(|(i, _)| i)
        .collect();
    let bk_pick = entropy.next_int_below(far.len() as u64)? as usize;
    let bk = empties.remove(far[bk_pick]);
    pos.set_piece(bk, Some(Piece { color: Color::Black, kind: PieceKind::King }));

    let placements = configuration
        .white
        .iter()
        .map(|&k| (Color::White, k))
        .chain(configuration.black.iter().map(|&k| (Color::Black, k)));
    for (color, kind) in placements {
        let allowed: Vec<usize> = empties
            .iter()
            .enumerate()
            .filter(|(_, sq)| kind != PieceKind::Pawn || (sq.rank() >= 1 && sq.rank() <= 6))
            .map(|(i, _)| i)
            .collect();
        if allowed.is_empty() {
            return Ok(Err(PlacementFailure));
        }
        let pick = entropy.next_int_below(allowed.len() as u64)? as usize;
        let sq = empties.remove(allowed[pick]);
        pos.set_piece(sq, Some(Piece { color, kind }));
    }

    pos.side_to_move = Color::White;

    // Restore the "side not to move out of check" invariant by removing
    // checking pieces.
    let mut removals = 0;
    while pos.is_in_check(Color::Black) {
        if removals >= max_placement_retries {
            return Ok(Err(PlacementFailure));
        }
        let checkers = checking_squares(&pos, bk);
        debug_assert!(!checkers.is_empty());
        let pick = entropy.next_int_below(checkers.len() as u64)? as usize;
        pos.set_piece(checkers[pick], None);
        removals += 1;
    }

    debug_assert!(pos.validate().is_ok(), "{}", emit_fen(&pos));
    Ok(Ok(pos))
}

/// White non-king pieces currently attacking the Black king.
fn checking_squares(pos: &Position, bk: Square) -> Vec<Square> {
    let mut from: Vec<Square> = pseudo_legal_moves(pos, Color::White)
        .into_iter()
        .filter(|m| m.to == bk)
        .map(|m| m.from)
        .collect();
    from.sort();
    from.dedup();
    from.retain(|&sq| pos.piece_at(sq).map(|p| p.kind) != Some(PieceKind::King));
    from
}

/// One composer instance: owns nothing but labels; entropy and settings are
/// borrowed for the run.
pub struct Composer<'a> {
    pub entropy: &'a mut dyn EntropySource,
    pub settings: &'a ComposerSettings,
    pub set_label: String,
    pub instance_id: u32,
    pub seed: u64,
}

impl Composer<'_> {
    /// Runs until the budget is spent; every accepted record is passed to
    /// `on_record` as soon as it exists, then collected in the outcome.
    pub fn run(
        &mut self,
        budget: Budget,
        mut on_record: impl FnMut(&CompositionRecord),
    ) -> InstanceOutcome {
        let started = std::time::Instant::now();
        let mut diagnostics = InstanceDiagnostics::default();
        let mut records = Vec::new();
        let mut status = InstanceStatus::Completed;

        loop {
            if budget_spent(budget, diagnostics.attempts, &started) {
                break;
            }
            let step =
                self.compose_batch(budget, &started, &mut diagnostics, &mut records, &mut on_record);
            match step {
                Ok(true) => {}
                Ok(false) => break,
                Err(e) => {
                    status = InstanceStatus::Aborted(e.to_string());
                    break;
                }
            }
        }

        InstanceOutcome { records, diagnostics, entropy_stats: self.entropy.stats(), status }
    }

    /// One select-configuration / attempts-count batch. Returns Ok(false)
    /// when the budget ran out inside the batch.
    fn compose_batch(
        &mut self,
        budget: Budget,
        started: &std::time::Instant,
        diagnostics: &mut InstanceDiagnostics,
        records: &mut Vec<CompositionRecord>,
        on_record: &mut impl FnMut(&CompositionRecord),
    ) -> Result<bool, ComposeError> {
        let configuration = select_configuration(self.entropy, self.settings)?.clone();
        let n = attempts_count(self.entropy, self.settings)?;
        for _ in 0..n {
            if budget_spent(budget, diagnostics.attempts, started) {
                return Ok(false);
            }
            diagnostics.attempts += 1;
            match generate_candidate(self.entropy, &configuration, self.settings.max_placement_retries)? {
                Err(PlacementFailure) => diagnostics.placement_failures += 1,
                Ok(pos) => self.classify(pos, diagnostics, records, on_record),
            }
        }
        Ok(true)
    }

    fn classify(
        &mut self,
        pos: Position,
        diagnostics: &mut InstanceDiagnostics,
        records: &mut Vec<CompositionRecord>,
        on_record: &mut impl FnMut(&CompositionRecord),
    ) {
        let verdict = match prove_mate_in_n(&pos, self.settings.target_depth) {
            Ok(v) => v,
            Err(MateError::TerminalPosition) | Err(MateError::IllegalPosition(_)) => {
                diagnostics.invalid_candidates += 1;
                return;
            }
            Err(MateError::NotWhiteToMove) | Err(MateError::BadBound(_)) => {
                unreachable!("composer always builds white-to-move positions with a valid bound")
            }
        };
        let classification = match verdict.mate_depth() {
            None => {
                diagnostics.no_mate += 1;
                return;
            }
            Some(1) => {
                diagnostics.mate_in_1_trivial += 1;
                return;
            }
            Some(2) => {
                diagnostics.mate_in_2 += 1;
                Classification::MateIn2Byproduct
            }
            Some(3) => {
                diagnostics.mate_in_3 += 1;
                Classification::MateIn3
            }
            Some(k) => unreachable!("bound is 3, prover reported {k}"),
        };
        let MateVerdict::MateIn { key_moves, principal_variation, .. } = &verdict else {
            unreachable!()
        };
        let breakdown = score(&pos, &verdict).expect("mate verdict carries a variation");
        let record = CompositionRecord {
            fen: emit_fen(&pos),
            classification,
            key_moves: key_moves.iter().map(|m| m.to_lan()).collect(),
            principal_variation: principal_variation.iter().map(|m| m.to_lan()).collect(),
            aesthetics: Some(breakdown),
            entropy_stats: self.entropy.stats(),
            set_label: self.set_label.clone(),
            instance_id: self.instance_id,
            seed: self.seed,
            timestamp: diagnostics.attempts,
        };
        on_record(&record);
        records.push(record);
    }
}

fn budget_spent(budget: Budget, attempts: u64, started: &std::time::Instant) -> bool {
    match budget {
        Budget::Attempts(max) => attempts >= max,
        Budget::WallClockMs(ms) => started.elapsed().as_millis() as u64 >= ms,
    }
}

#[cfg(test)]
mod tests;
