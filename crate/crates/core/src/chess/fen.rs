//! FEN parsing and emission with field-level diagnostics.

use thiserror::Error;

use super::board::{CastlingRights, Color, Piece, PieceKind, Position, PositionError, Square};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FenError {
    #[error("expected 6 space-separated fields, got {0}")]
    FieldCount(usize),
    #[error("placement: expected 8 ranks, got {0}")]
    RankCount(usize),
    #[error("placement: bad piece character `{0}`")]
    BadPieceChar(char),
    #[error("placement: rank {0} does not cover 8 files")]
    BadRankLength(u8),
    #[error("side to move must be `w` or `b`, got `{0}`")]
    BadSideToMove(String),
    #[error("castling field `{0}` is not `-` or an ordered subset of KQkq")]
    BadCastling(String),
    #[error("en passant field `{0}` is not `-` or a square on rank 3 or 6")]
    BadEnPassant(String),
    #[error("halfmove clock `{0}` is not a non-negative integer")]
    BadHalfmove(String),
    #[error("fullmove number `{0}` is not a positive integer")]
    BadFullmove(String),
    #[error("illegal position: {0}")]
    IllegalPosition(#[from] PositionError),
}

/// Parses a FEN string into a validated [`Position`].
pub fn parse_fen(text: &str) -> Result<Position, FenError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(FenError::FieldCount(fields.len()));
    }

    let mut pos = Position::empty();

    let ranks: Vec<&str> = fields[0].split('/').collect();
    if ranks.len() != 8 {
        return Err(FenError::RankCount(ranks.len()));
    }
    for (i, rank_text) in ranks.iter().enumerate() {
        let rank = 7 - i as u8; // FEN lists rank 8 first
        let mut file = 0u8;
        for c in rank_text.chars() {
            if let Some(skip) = c.to_digit(10) {
                if skip == 0 || skip > 8 {
                    return Err(FenError::BadPieceChar(c));
                }
                file += skip as u8;
            } else {
                let (color, kind) = PieceKind::from_char(c).ok_or(FenError::BadPieceChar(c))?;
                if file >= 8 {
                    return Err(FenError::BadRankLength(rank + 1));
                }
                pos.set_piece(Square::new(file, rank), Some(Piece { color, kind }));
                file += 1;
            }
            if file > 8 {
                return Err(FenError::BadRankLength(rank + 1));
            }
        }
        if file != 8 {
            return Err(FenError::BadRankLength(rank + 1));
        }
    }

    pos.side_to_move = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(FenError::BadSideToMove(other.to_string())),
    };

    pos.castling = parse_castling(fields[2]).ok_or_else(|| FenError::BadCastling(fields[2].to_string()))?;

    pos.en_passant = match fields[3] {
        "-" => None,
        sq_text => {
            let sq = Square::parse(sq_text)
                .filter(|s| s.rank() == 2 || s.rank() == 5)
                .ok_or_else(|| FenError::BadEnPassant(sq_text.to_string()))?;
            Some(sq)
        }
    };

    pos.halfmove_clock = fields[4]
        .parse::<u32>()
        .map_err(|_| FenError::BadHalfmove(fields[4].to_string()))?;
    pos.fullmove_number = fields[5]
        .parse::<u32>()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| FenError::BadFullmove(fields[5].to_string()))?;

    pos.validate()?;
    Ok(pos)
}

fn parse_castling(text: &str) -> Option<CastlingRights> {
    if text == "-" {
        return Some(CastlingRights::none());
    }
    if text.is_empty() || text.len() > 4 {
        return None;
    }
    // Canonical KQkq ordering; strictly increasing position index rejects
    // duplicates and reordered fields.
    let order = ['K', 'Q', 'k', 'q'];
    let flags = [
        CastlingRights::WHITE_KINGSIDE,
        CastlingRights::WHITE_QUEENSIDE,
        CastlingRights::BLACK_KINGSIDE,
        CastlingRights::BLACK_QUEENSIDE,
    ];
    let mut rights = CastlingRights::none();
    let mut min_idx = 0;
    for c in text.chars() {
        let idx = order.iter().position(|&o| o == c)?;
        if idx < min_idx {
            return None;
        }
        rights.0 |= flags[idx];
        min_idx = idx + 1;
    }
    Some(rights)
}

/// Emits the canonical FEN for a position; `parse_fen(emit_fen(p)) == p`.
pub fn emit_fen(pos: &Position) -> String {
    let mut out = String::new();
    for rank in (0..8).rev() {
        let mut empty = 0;
        for file in 0..8 {
            match pos.piece_at(Square::new(file, rank)) {
                Some(p) => {
                    if empty > 0 {
                        out.push(char::from_digit(empty, 10).unwrap());
                        empty = 0;
                    }
                    out.push(p.kind.to_char(p.color));
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            out.push(char::from_digit(empty, 10).unwrap());
        }
        if rank > 0 {
            out.push('/');
        }
    }
    out.push(' ');
    out.push(match pos.side_to_move {
        Color::White => 'w',
        Color::Black => 'b',
    });
    out.push(' ');
    if pos.castling.is_empty() {
        out.push('-');
    } else {
        for (flag, c) in [
            (CastlingRights::WHITE_KINGSIDE, 'K'),
            (CastlingRights::WHITE_QUEENSIDE, 'Q'),
            (CastlingRights::BLACK_KINGSIDE, 'k'),
            (CastlingRights::BLACK_QUEENSIDE, 'q'),
        ] {
            if pos.castling.has(flag) {
                out.push(c);
            }
        }
    }
    out.push(' ');
    match pos.en_passant {
        Some(sq) => out.push_str(&sq.to_string()),
        None => out.push('-'),
    }
    out.push_str(&format!(" {} {}", pos.halfmove_clock, pos.fullmove_number));
    out
}
