//! Brute-force validation of claimed mate solutions, independent of the
//! prover: moves come from the reference generator and the tree walk is a
//! plain recursion without memoization.

use thiserror::Error;

use super::board::{find_by_lan, Color, Position};
use super::refgen::{ref_apply, ref_in_check, ref_legal_moves};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("claimed key move `{0}` is not legal here")]
    BadKeyMove(String),
    #[error("defense `{0}` escapes mate within the claimed bound")]
    DefenseEscapes(String),
    #[error("principal variation move `{0}` (ply {1}) is not legal")]
    BadVariationMove(String, usize),
    #[error("principal variation does not end in checkmate")]
    VariationNotMate,
    #[error("principal variation uses {0} White moves, claim allows {1}")]
    VariationTooLong(usize, u8),
    #[error("claimed bound {0} is not minimal: mate forced in {1}")]
    NotMinimal(u8, u8),
}

/// Checks that `key` forces mate in at most `k` White moves against every
/// defense, walking the complete AND tree.
pub fn verify_forced_mate(pos: &Position, key_lan: &str, k: u8) -> Result<(), VerifyError> {
    let key = find_by_lan(&ref_legal_moves(pos), key_lan)
        .ok_or_else(|| VerifyError::BadKeyMove(key_lan.to_string()))?;
    let after = ref_apply(pos, key);
    all_defenses_fail(&after, k - 1).map_err(VerifyError::DefenseEscapes)
}

/// Black to move, `w` further White moves available. Ok when every defense
/// loses; Err carries one surviving defense line (outermost move).
fn all_defenses_fail(pos: &Position, w: u8) -> Result<(), String> {
    let replies = ref_legal_moves(pos);
    if replies.is_empty() {
        return if ref_in_check(pos, Color::Black) {
            Ok(())
        } else {
            Err("stalemate".to_string())
        };
    }
    if w == 0 {
        return Err(replies[0].to_lan());
    }
    for reply in replies {
        let after = ref_apply(pos, reply);
        if !white_mates_somehow(&after, w) {
            return Err(reply.to_lan());
        }
    }
    Ok(())
}

/// White to move, `w` White moves left: does some move still force mate?
fn white_mates_somehow(pos: &Position, w: u8) -> bool {
    debug_assert!(w >= 1);
    let mut moves = ref_legal_moves(pos);
    // Checks first purely for speed; the scan is exhaustive either way.
    moves.sort_by_key(|&mv| {
        let next = ref_apply(pos, mv);
        !ref_in_check(&next, Color::Black)
    });
    moves
        .into_iter()
        .any(|mv| all_defenses_fail(&ref_apply(pos, mv), w - 1).is_ok())
}

/// Replays a principal variation: every move legal per the reference
/// generator, and the final position checkmate within `k` White moves.
pub fn verify_variation(pos: &Position, pv_lans: &[String], k: u8) -> Result<(), VerifyError> {
    let white_moves = pv_lans.len().div_ceil(2);
    if white_moves > k as usize {
        return Err(VerifyError::VariationTooLong(white_moves, k));
    }
    let mut cur = pos.clone();
    for (ply, lan) in pv_lans.iter().enumerate() {
        let mv = find_by_lan(&ref_legal_moves(&cur), lan)
            .ok_or_else(|| VerifyError::BadVariationMove(lan.clone(), ply + 1))?;
        cur = ref_apply(&cur, mv);
    }
    if cur.side_to_move == Color::Black
        && ref_legal_moves(&cur).is_empty()
        && ref_in_check(&cur, Color::Black)
    {
        Ok(())
    } else {
        Err(VerifyError::VariationNotMate)
    }
}

/// Full record check: key move forces mate in `k`, no faster forced mate
/// exists, and the recorded line is a real mate line.
pub fn verify_mate_claim(
    pos: &Position,
    key_lan: &str,
    pv_lans: &[String],
    k: u8,
) -> Result<(), VerifyError> {
    verify_forced_mate(pos, key_lan, k)?;
    verify_variation(pos, pv_lans, k)?;
    for shorter in 1..k {
        let refutable = ref_legal_moves(pos)
            .iter()
            .any(|&mv| all_defenses_fail(&ref_apply(pos, mv), shorter - 1).is_ok());
        if refutable {
            return Err(VerifyError::NotMinimal(k, shorter));
        }
    }
    Ok(())
}

/// Convenience for tests: does any first move force mate within `k`?
pub fn exists_forced_mate(pos: &Position, k: u8) -> bool {
    ref_legal_moves(pos)
        .iter()
        .any(|&mv| all_defenses_fail(&ref_apply(pos, mv), k - 1).is_ok())
}
