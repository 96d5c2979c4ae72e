//! Deterministic surrogate aesthetic scorer for verified compositions.
//!
//! Three components on a fixed 0–3.5 scale:
//!
//! * economy — value-weighted fraction of White's non-king pieces that
//!   either move in the solution's main line or attack the Black king in
//!   the final mate position (1.0 when White has no non-king pieces),
//! * sparsity — 1 − pieces/32 over the problem position,
//! * theme bonus — 0.5 per detected theme among pin, fork and sacrifice
//!   along the principal variation, capped at 1.5.
//!
//! The scale is the scorer's own; cross-set comparisons downstream are
//! scale-free. Bump [`SCORER_VERSION`] on any change to the formulas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chess::movegen::pseudo_legal_moves;
use crate::chess::{Color, MateVerdict, Move, PieceKind, Position, Square};

pub const SCORER_VERSION: &str = "surrogate-1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("scoring requires a mate verdict with a principal variation")]
    MissingVariation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AestheticBreakdown {
    pub economy: f64,
    pub sparsity: f64,
    pub theme_bonus: f64,
    pub total: f64,
}

/// Scores a problem position against its proven solution.
pub fn score(pos: &Position, verdict: &MateVerdict) -> Result<AestheticBreakdown, ScoreError> {
    let MateVerdict::MateIn { principal_variation, .. } = verdict else {
        return Err(ScoreError::MissingVariation);
    };
    if principal_variation.is_empty() {
        return Err(ScoreError::MissingVariation);
    }

    let economy = economy_component(pos, principal_variation);
    let sparsity = 1.0 - pos.piece_count() as f64 / 32.0;
    let theme_bonus = theme_component(pos, principal_variation);
    Ok(AestheticBreakdown { economy, sparsity, theme_bonus, total: economy + sparsity + theme_bonus })
}

/// Tracks White's non-king pieces through the main line by square identity.
fn economy_component(pos: &Position, line: &[Move]) -> f64 {
    // Piece registry from the problem position: id -> (current square, value).
    let mut registry: Vec<(Option<Square>, u32)> = Vec::new();
    let mut by_square: std::collections::HashMap<Square, usize> = std::collections::HashMap::new();
    for (sq, p) in pos.pieces() {
        if p.color == Color::White && p.kind != PieceKind::King {
            by_square.insert(sq, registry.len());
            registry.push((Some(sq), p.kind.value()));
        }
    }
    if registry.is_empty() {
        return 1.0;
    }

    let mut participates = vec![false; registry.len()];
    let mut cur = pos.clone();
    for (ply, &mv) in line.iter().enumerate() {
        let white_move = ply % 2 == 0;
        if white_move {
            if let Some(&id) = by_square.get(&mv.from) {
                participates[id] = true;
                by_square.remove(&mv.from);
                by_square.insert(mv.to, id);
                registry[id].0 = Some(mv.to);
            }
            if mv.is_castle() {
                // The rook moves too.
                let rank = mv.to.rank();
                let (rf, rt) = if mv.to.file() == 6 {
                    (Square::new(7, rank), Square::new(5, rank))
                } else {
                    (Square::new(0, rank), Square::new(3, rank))
                };
                if let Some(id) = by_square.remove(&rf) {
                    participates[id] = true;
                    by_square.insert(rt, id);
                    registry[id].0 = Some(rt);
                }
            }
        } else {
            // Black may capture a tracked White piece.
            let victim_sq = if mv.is_en_passant() {
                mv.to.offset(0, 1).expect("white ep victim sits above the target")
            } else {
                mv.to
            };
            if let Some(id) = by_square.remove(&victim_sq) {
                registry[id].0 = None;
            }
        }
        cur.make_mut(mv);
    }

    // Final checkers participate even if they never moved.
    if let Some(bk) = cur.king_square(Color::Black) {
        for mv in pseudo_legal_moves(&cur, Color::White) {
            if mv.to == bk {
                if let Some(&id) = by_square.get(&mv.from) {
                    participates[id] = true;
                }
            }
        }
    }

    let total: u32 = registry.iter().map(|&(_, v)| v).sum();
    let active: u32 = registry
        .iter()
        .zip(&participates)
        .filter(|(_, &p)| p)
        .map(|(&(_, v), _)| v)
        .sum();
    f64::from(active) / f64::from(total)
}

fn theme_component(pos: &Position, line: &[Move]) -> f64 {
    let mut pin = false;
    let mut fork = false;
    let mut sacrifice = false;

    let mut cur = pos.clone();
    pin |= detect_pin(&cur);
    for (ply, &mv) in line.iter().enumerate() {
        if ply % 2 == 0 {
            fork |= detect_fork(&cur, mv);
            sacrifice |= detect_sacrifice(&cur, mv);
        }
        cur.make_mut(mv);
        pin |= detect_pin(&cur);
    }

    0.5 * (u32::from(pin) + u32::from(fork) + u32::from(sacrifice)) as f64
}

/// A Black non-king piece is pinned when it has a pseudo-legal move that is
/// illegal solely because it would expose the Black king: the king is safe
/// now and attacked after the move. Positions with Black already in check
/// report no pin.
pub fn detect_pin(pos: &Position) -> bool {
    if pos.king_square(Color::Black).is_none() || pos.is_in_check(Color::Black) {
        return false;
    }
    let mut scratch = pos.clone();
    for mv in pseudo_legal_moves(pos, Color::Black) {
        let mover = pos.piece_at(mv.from).expect("pseudo move has a mover");
        if mover.kind == PieceKind::King {
            continue;
        }
        let undo = scratch.make_mut(mv);
        let exposes = scratch.is_in_check(Color::Black);
        scratch.unmake(mv, undo);
        if exposes {
            return true;
        }
    }
    false
}

/// After making the move, the moved piece attacks at least two targets
/// among the Black king and Black pieces of value >= 3.
pub fn detect_fork(pos: &Position, mv: Move) -> bool {
    let after = pos.make(mv);
    let mut targets = 0u32;
    for sq in attacked_squares(&after, mv.to) {
        match after.piece_at(sq) {
            Some(p) if p.color == Color::Black
                && (p.kind == PieceKind::King || p.kind.value() >= 3) => {
                    targets += 1;
                }
            _ => {}
        }
    }
    targets >= 2
}

/// A piece of value >= 3 moves to a square attacked by a strictly cheaper
/// Black piece (attack geometry, pins ignored; kings carry no value and
/// never count as attackers).
pub fn detect_sacrifice(pos: &Position, mv: Move) -> bool {
    let mover = match pos.piece_at(mv.from) {
        Some(p) => p,
        None => return false,
    };
    if mover.kind.value() < 3 {
        return false;
    }
    let after = pos.make(mv);
    for (sq, p) in after.pieces() {
        if p.color == Color::Black
            && p.kind != PieceKind::King
            && p.kind.value() < mover.kind.value()
            && attacked_squares(&after, sq).contains(&mv.to)
        {
            return true;
        }
    }
    false
}

/// Squares the piece on `from` attacks, read off its capture geometry.
fn attacked_squares(pos: &Position, from: Square) -> Vec<Square> {
    let Some(piece) = pos.piece_at(from) else {
        return Vec::new();
    };
    match piece.kind {
        PieceKind::Pawn => {
            let dr = if piece.color == Color::White { 1 } else { -1 };
            [-1i8, 1]
                .iter()
                .filter_map(|&df| from.offset(df, dr))
                .collect()
        }
        _ => pseudo_legal_moves(pos, piece.color)
            .into_iter()
            .filter(|m| m.from == from && !m.is_castle())
            .map(|m| m.to)
            .collect(),
    }
}
