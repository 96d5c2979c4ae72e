//! Legal move generation and perft.

use super::board::{move_flags, CastlingRights, Color, Move, Piece, PieceKind, Position, Square};

const KNIGHT_OFFSETS: [(i8, i8); 8] =
    [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING_OFFSETS: [(i8, i8); 8] =
    [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ORTHO_DIRS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const DIAG_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
const PROMOTION_KINDS: [PieceKind; 4] =
    [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight];

/// All moves of `color` that follow piece geometry, ignoring whether the own
/// king ends up attacked. En passant is only offered to the side to move,
/// since the target square belongs to it.
pub fn pseudo_legal_moves(pos: &Position, color: Color) -> Vec<Move> {
    let mut moves = Vec::with_capacity(48);
    for (from, piece) in pos.pieces() {
        if piece.color != color {
            continue;
        }
        match piece.kind {
            PieceKind::Pawn => pawn_moves(pos, from, color, &mut moves),
            PieceKind::Knight => step_moves(pos, from, color, &KNIGHT_OFFSETS, &mut moves),
            PieceKind::King => {
                step_moves(pos, from, color, &KING_OFFSETS, &mut moves);
                castle_moves(pos, from, color, &mut moves);
            }
            PieceKind::Bishop => ray_moves(pos, from, color, &DIAG_DIRS, &mut moves),
            PieceKind::Rook => ray_moves(pos, from, color, &ORTHO_DIRS, &mut moves),
            PieceKind::Queen => {
                ray_moves(pos, from, color, &ORTHO_DIRS, &mut moves);
                ray_moves(pos, from, color, &DIAG_DIRS, &mut moves);
            }
        }
    }
    moves
}

fn pawn_moves(pos: &Position, from: Square, color: Color, out: &mut Vec<Move>) {
    let (dir, start_rank, promo_rank) = match color {
        Color::White => (1i8, 1u8, 7u8),
        Color::Black => (-1, 6, 0),
    };
    let push_pawn = |to: Square, flags: u8, out: &mut Vec<Move>| {
        if to.rank() == promo_rank {
            for kind in PROMOTION_KINDS {
                out.push(Move { from, to, promotion: Some(kind), flags });
            }
        } else {
            out.push(Move { from, to, promotion: None, flags });
        }
    };

    if let Some(one) = from.offset(0, dir) {
        if pos.piece_at(one).is_none() {
            push_pawn(one, 0, out);
            if from.rank() == start_rank {
                let two = from.offset(0, 2 * dir).unwrap();
                if pos.piece_at(two).is_none() {
                    out.push(Move { from, to: two, promotion: None, flags: move_flags::DOUBLE_PUSH });
                }
            }
        }
    }
    for df in [-1i8, 1] {
        if let Some(to) = from.offset(df, dir) {
            match pos.piece_at(to) {
                Some(p) if p.color != color => push_pawn(to, move_flags::CAPTURE, out),
                None if pos.side_to_move == color && pos.en_passant == Some(to) => {
                    out.push(Move {
                        from,
                        to,
                        promotion: None,
                        flags: move_flags::CAPTURE | move_flags::EN_PASSANT,
                    });
                }
                _ => {}
            }
        }
    }
}

fn step_moves(pos: &Position, from: Square, color: Color, offsets: &[(i8, i8)], out: &mut Vec<Move>) {
    for &(df, dr) in offsets {
        if let Some(to) = from.offset(df, dr) {
            match pos.piece_at(to) {
                Some(p) if p.color == color => {}
                Some(_) => out.push(Move { from, to, promotion: None, flags: move_flags::CAPTURE }),
                None => out.push(Move::new(from, to)),
            }
        }
    }
}

fn ray_moves(pos: &Position, from: Square, color: Color, dirs: &[(i8, i8)], out: &mut Vec<Move>) {
    for &(df, dr) in dirs {
        let mut cur = from;
        while let Some(to) = cur.offset(df, dr) {
            match pos.piece_at(to) {
                None => out.push(Move::new(from, to)),
                Some(p) => {
                    if p.color != color {
                        out.push(Move { from, to, promotion: None, flags: move_flags::CAPTURE });
                    }
                    break;
                }
            }
            cur = to;
        }
    }
}

fn castle_moves(pos: &Position, from: Square, color: Color, out: &mut Vec<Move>) {
    let home = match color {
        Color::White => Square::parse("e1").unwrap(),
        Color::Black => Square::parse("e8").unwrap(),
    };
    if from != home || pos.is_square_attacked(home, color.opposite()) {
        return;
    }
    let (kingside, queenside) = match color {
        Color::White => (CastlingRights::WHITE_KINGSIDE, CastlingRights::WHITE_QUEENSIDE),
        Color::Black => (CastlingRights::BLACK_KINGSIDE, CastlingRights::BLACK_QUEENSIDE),
    };
    let enemy = color.opposite();
    let rank = home.rank();
    if pos.castling.has(kingside) {
        let f = Square::new(5, rank);
        let g = Square::new(6, rank);
        if pos.piece_at(f).is_none()
            && pos.piece_at(g).is_none()
            && !pos.is_square_attacked(f, enemy)
            && !pos.is_square_attacked(g, enemy)
            && pos.piece_at(Square::new(7, rank)) == Some(Piece { color, kind: PieceKind::Rook })
        {
            out.push(Move { from, to: g, promotion: None, flags: move_flags::CASTLE });
        }
    }
    if pos.castling.has(queenside) {
        let b = Square::new(1, rank);
        let c = Square::new(2, rank);
        let d = Square::new(3, rank);
        if pos.piece_at(b).is_none()
            && pos.piece_at(c).is_none()
            && pos.piece_at(d).is_none()
            && !pos.is_square_attacked(d, enemy)
            && !pos.is_square_attacked(c, enemy)
            && pos.piece_at(Square::new(0, rank)) == Some(Piece { color, kind: PieceKind::Rook })
        {
            out.push(Move { from, to: c, promotion: None, flags: move_flags::CASTLE });
        }
    }
}

/// Exactly the legal moves of the side to move.
pub fn legal_moves(pos: &Position) -> Vec<Move> {
    let us = pos.side_to_move;
    let them = us.opposite();
    let king_home = pos.king_square(us);
    let mut scratch = pos.clone();
    pseudo_legal_moves(pos, us)
        .into_iter()
        .filter(|&mv| {
            let moved_king = pos.piece_at(mv.from).map(|p| p.kind) == Some(PieceKind::King);
            let undo = scratch.make_mut(mv);
            let king_sq = if moved_king { Some(mv.to) } else { king_home };
            let safe = match king_sq {
                Some(sq) => !scratch.is_square_attacked(sq, them),
                None => true,
            };
            scratch.unmake(mv, undo);
            safe
        })
        .collect()
}

/// True when the side to move has at least one legal move.
pub fn has_legal_move(pos: &Position) -> bool {
    let us = pos.side_to_move;
    let them = us.opposite();
    let king_home = pos.king_square(us);
    let mut scratch = pos.clone();
    pseudo_legal_moves(pos, us).into_iter().any(|mv| {
        let moved_king = pos.piece_at(mv.from).map(|p| p.kind) == Some(PieceKind::King);
        let undo = scratch.make_mut(mv);
        let king_sq = if moved_king { Some(mv.to) } else { king_home };
        let safe = match king_sq {
            Some(sq) => !scratch.is_square_attacked(sq, them),
            None => true,
        };
        scratch.unmake(mv, undo);
        safe
    })
}

/// True when the side to move is checkmated.
pub fn is_checkmate(pos: &Position) -> bool {
    pos.is_in_check(pos.side_to_move) && !has_legal_move(pos)
}

/// Leaf count of the legal-move tree at exactly `depth`.
pub fn perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let mut scratch = pos.clone();
    perft_inner(&mut scratch, depth)
}

fn perft_inner(pos: &mut Position, depth: u32) -> u64 {
    let moves = legal_moves(pos);
    if depth == 1 {
        return moves.len() as u64;
    }
    let mut count = 0;
    for mv in moves {
        let undo = pos.make_mut(mv);
        count += perft_inner(pos, depth - 1);
        pos.unmake(mv, undo);
    }
    count
}
