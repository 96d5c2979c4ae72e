//! Forced-mate prover: AND-OR search with full-position memoization.
//!
//! White nodes are OR (one winning move suffices), Black nodes are AND
//! (every reply must be refuted). The bound counts White moves, and the
//! prover deepens the bound one White move at a time, so the k it reports
//! is minimal by construction. Fifty-move and repetition rules are ignored;
//! castling and en passant are honored as encoded in the position.

use std::collections::HashMap;

use thiserror::Error;

use super::board::{Color, Move, Position, PositionError};
use super::movegen::{has_legal_move, legal_moves};

pub const MAX_MATE_BOUND: u8 = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MateError {
    #[error("illegal position: {0}")]
    IllegalPosition(#[from] PositionError),
    #[error("prover expects White to move")]
    NotWhiteToMove,
    #[error("mate bound must be between 1 and {MAX_MATE_BOUND}, got {0}")]
    BadBound(u8),
    #[error("terminal position: the side to move has no legal moves")]
    TerminalPosition,
}

/// Outcome of a bounded forced-mate search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MateVerdict {
    MateIn {
        /// Minimal number of White moves that forces mate.
        k: u8,
        /// Every first move that forces mate in `k`.
        key_moves: Vec<Move>,
        /// Main line under longest Black resistance, ending in checkmate.
        principal_variation: Vec<Move>,
    },
    NoForcedMate,
}

impl MateVerdict {
    pub fn mate_depth(&self) -> Option<u8> {
        match self {
            MateVerdict::MateIn { k, .. } => Some(*k),
            MateVerdict::NoForcedMate => None,
        }
    }
}

/// Compact full-fidelity memo key: no hashing collisions can corrupt proofs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct NodeKey {
    board: [u8; 64],
    side: bool,
    castling: u8,
    en_passant: u8,
}

impl NodeKey {
    fn of(pos: &Position) -> NodeKey {
        use super::board::PieceKind::*;
        let mut board = [0u8; 64];
        for (sq, p) in pos.pieces() {
            let kind = match p.kind {
                Pawn => 1,
                Knight => 2,
                Bishop => 3,
                Rook => 4,
                Queen => 5,
                King => 6,
            };
            board[sq.index()] = if p.color == Color::White { kind } else { kind + 6 };
        }
        NodeKey {
            board,
            side: pos.side_to_move == Color::White,
            castling: pos.castling.0,
            en_passant: pos.en_passant.map(|s| s.0).unwrap_or(64),
        }
    }
}

struct Searcher {
    // (position, white moves remaining) -> provably winning for White
    memo: HashMap<(NodeKey, u8), bool>,
}

impl Searcher {
    fn new() -> Searcher {
        Searcher { memo: HashMap::new() }
    }

    /// White to move with `w` White moves left: can White force mate?
    fn white_mates(&mut self, pos: &mut Position, w: u8) -> bool {
        if w == 0 {
            return false;
        }
        let key = (NodeKey::of(pos), w);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let result = if w == 1 {
            // Only a checking move can mate on the spot.
            self.mates_immediately(pos)
        } else {
            let mut found = false;
            for mv in ordered_white_moves(pos) {
                let undo = pos.make_mut(mv);
                let refuted = self.black_all_refuted(pos, w - 1);
                pos.unmake(mv, undo);
                if refuted {
                    found = true;
                    break;
                }
            }
            found
        };
        self.memo.insert(key, result);
        result
    }

    fn mates_immediately(&mut self, pos: &mut Position) -> bool {
        let them = pos.side_to_move.opposite();
        for mv in legal_moves(pos) {
            let undo = pos.make_mut(mv);
            let mate = pos.is_in_check(them) && !has_legal_move(pos);
            pos.unmake(mv, undo);
            if mate {
                return true;
            }
        }
        false
    }

    /// Black to move with `w` White moves left after every reply: is every
    /// Black defense refuted? A position with no replies counts only if it
    /// is checkmate (stalemate is a successful defense).
    fn black_all_refuted(&mut self, pos: &mut Position, w: u8) -> bool {
        let key = (NodeKey::of(pos), w);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let replies = legal_moves(pos);
        let result = if replies.is_empty() {
            pos.is_in_check(Color::Black)
        } else if w == 0 {
            false
        } else {
            let mut all = true;
            for mv in ordered_black_replies(replies) {
                let undo = pos.make_mut(mv);
                let mated = self.white_mates(pos, w);
                pos.unmake(mv, undo);
                if !mated {
                    all = false;
                    break;
                }
            }
            all
        };
        self.memo.insert(key, result);
        result
    }

    /// Minimal White budget in 1..=cap that still wins, if any.
    fn minimal_budget(&mut self, pos: &mut Position, cap: u8) -> Option<u8> {
        (1..=cap).find(|&w| self.white_mates(pos, w))
    }
}

/// Checking moves first, then captures: mating lines are dense in checks.
fn ordered_white_moves(pos: &mut Position) -> Vec<Move> {
    let mut moves = legal_moves(pos);
    let mut keyed: Vec<(u8, usize, Move)> = moves
        .drain(..)
        .enumerate()
        .map(|(i, mv)| {
            let undo = pos.make_mut(mv);
            let gives_check = pos.is_in_check(Color::Black);
            pos.unmake(mv, undo);
            let class = if gives_check { 0u8 } else if mv.is_capture() { 1 } else { 2 };
            (class, i, mv)
        })
        .collect();
    keyed.sort_by_key(|&(class, i, _)| (class, i));
    keyed.into_iter().map(|(_, _, mv)| mv).collect()
}

/// Captures first: taking the checking piece is the most common refutation.
fn ordered_black_replies(mut replies: Vec<Move>) -> Vec<Move> {
    replies.sort_by_key(|mv| if mv.is_capture() { 0u8 } else { 1 });
    replies
}

/// Proves or refutes a forced mate within `n_max` White moves.
///
/// Requires a structurally legal, non-terminal position with White to move.
/// On success the reported `k` is minimal, `key_moves` collects every
/// winning first move in generation order, and the principal variation
/// follows the first key move against maximal Black resistance.
pub fn prove_mate_in_n(pos: &Position, n_max: u8) -> Result<MateVerdict, MateError> {
    pos.validate()?;
    if pos.side_to_move != Color::White {
        return Err(MateError::NotWhiteToMove);
    }
    if n_max == 0 || n_max > MAX_MATE_BOUND {
        return Err(MateError::BadBound(n_max));
    }
    if !has_legal_move(pos) {
        return Err(MateError::TerminalPosition);
    }

    let mut searcher = Searcher::new();
    let mut work = pos.clone();

    for k in 1..=n_max {
        let mut key_moves = Vec::new();
        for mv in legal_moves(&work) {
            let undo = work.make_mut(mv);
            let wins = searcher.black_all_refuted(&mut work, k - 1);
            work.unmake(mv, undo);
            if wins {
                key_moves.push(mv);
            }
        }
        if !key_moves.is_empty() {
            let pv = principal_variation(&mut searcher, &mut work, key_moves[0], k);
            return Ok(MateVerdict::MateIn { k, key_moves, principal_variation: pv });
        }
    }
    Ok(MateVerdict::NoForcedMate)
}

/// Builds the main line for a proven mate: Black picks the reply that
/// survives longest, White answers with its first fastest mating move.
fn principal_variation(searcher: &mut Searcher, pos: &mut Position, key: Move, k: u8) -> Vec<Move> {
    let mut line = vec![key];
    let undo = pos.make_mut(key);
    pv_walk(searcher, pos, k - 1, &mut line);
    pos.unmake(key, undo);
    line
}

fn pv_walk(searcher: &mut Searcher, pos: &mut Position, budget: u8, line: &mut Vec<Move>) {
    let replies = legal_moves(pos);
    if replies.is_empty() {
        return; // checkmate; a sound proof never reaches stalemate here
    }
    // Black resistance: maximize the minimal remaining White budget.
    let mut best: Option<(u8, Move)> = None;
    for mv in replies {
        let undo = pos.make_mut(mv);
        let depth = searcher
            .minimal_budget(pos, budget)
            .expect("proof guarantees every reply is refuted");
        pos.unmake(mv, undo);
        if best.map(|(d, _)| depth > d).unwrap_or(true) {
            best = Some((depth, mv));
        }
    }
    let (depth, reply) = best.expect("non-empty reply list");
    line.push(reply);
    let undo_reply = pos.make_mut(reply);

    // White: first move that mates within the minimal budget.
    let mut chosen: Option<Move> = None;
    for mv in ordered_white_moves(pos) {
        let undo = pos.make_mut(mv);
        let wins = searcher.black_all_refuted(pos, depth - 1);
        pos.unmake(mv, undo);
        if wins {
            chosen = Some(mv);
            break;
        }
    }
    let white_move = chosen.expect("minimal budget is achievable");
    line.push(white_move);
    let undo_white = pos.make_mut(white_move);
    pv_walk(searcher, pos, depth - 1, line);
    pos.unmake(white_move, undo_white);
    pos.unmake(reply, undo_reply);
}
