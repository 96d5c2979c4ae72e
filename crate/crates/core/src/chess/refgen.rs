//! Reference move generator, written rule-by-rule over all square pairs.
//!
//! This is the slow, definition-first counterpart to [`super::movegen`].
//! It shares the `Position`/`Move` types but derives moves, attack checks
//! and move application from first principles, so the two generators can be
//! held against each other (perft equivalence) and the mate validator does
//! not depend on the prover's code path.

use super::board::{move_flags, Color, Move, Piece, PieceKind, Position, Square};

/// True when a piece of kind `kind` standing on `from` reaches `to` by its
/// bare geometry, with a clear path on the board for sliders. Pawn calls
/// handle only the capture geometry here.
fn reaches(pos: &Position, kind: PieceKind, color: Color, from: Square, to: Square) -> bool {
    let df = to.file() as i8 - from.file() as i8;
    let dr = to.rank() as i8 - from.rank() as i8;
    if df == 0 && dr == 0 {
        return false;
    }
    match kind {
        PieceKind::Pawn => {
            let fwd = if color == Color::White { 1 } else { -1 };
            dr == fwd && df.abs() == 1
        }
        PieceKind::Knight => (df.abs() == 1 && dr.abs() == 2) || (df.abs() == 2 && dr.abs() == 1),
        PieceKind::King => df.abs() <= 1 && dr.abs() <= 1,
        PieceKind::Bishop => df.abs() == dr.abs() && clear_path(pos, from, to),
        PieceKind::Rook => (df == 0 || dr == 0) && clear_path(pos, from, to),
        PieceKind::Queen => {
            (df == 0 || dr == 0 || df.abs() == dr.abs()) && clear_path(pos, from, to)
        }
    }
}

fn clear_path(pos: &Position, from: Square, to: Square) -> bool {
    let df = (to.file() as i8 - from.file() as i8).signum();
    let dr = (to.rank() as i8 - from.rank() as i8).signum();
    let mut cur = from.offset(df, dr).unwrap();
    while cur != to {
        if pos.piece_at(cur).is_some() {
            return false;
        }
        cur = cur.offset(df, dr).unwrap();
    }
    true
}

/// Square attack test built on [`reaches`].
pub fn ref_attacked(pos: &Position, sq: Square, by: Color) -> bool {
    pos.pieces()
        .any(|(from, p)| p.color == by && reaches(pos, p.kind, by, from, sq))
}

pub fn ref_in_check(pos: &Position, color: Color) -> bool {
    match pos.king_square(color) {
        Some(k) => ref_attacked(pos, k, color.opposite()),
        None => false,
    }
}

/// Applies a move by restating its board effects from scratch.
pub fn ref_apply(pos: &Position, mv: Move) -> Position {
    let mut next = pos.clone();
    let mover = next.piece_at(mv.from).expect("source square occupied");

    if mv.is_en_passant() {
        let dr = if mover.color == Color::White { -1 } else { 1 };
        next.set_piece(mv.to.offset(0, dr).unwrap(), None);
    }
    next.set_piece(mv.from, None);
    let placed = match mv.promotion {
        Some(kind) => Piece { color: mover.color, kind },
        None => mover,
    };
    next.set_piece(mv.to, Some(placed));
    if mv.is_castle() {
        let rank = mv.to.rank();
        let (rf, rt) = if mv.to.file() == 6 {
            (Square::new(7, rank), Square::new(5, rank))
        } else {
            (Square::new(0, rank), Square::new(3, rank))
        };
        let rook = next.piece_at(rf);
        next.set_piece(rf, None);
        next.set_piece(rt, rook);
    }

    // Bookkeeping fields, restated independently of `make_mut`.
    use super::board::CastlingRights as CR;
    let touches = |sq: &str| mv.from == Square::parse(sq).unwrap() || mv.to == Square::parse(sq).unwrap();
    if touches("e1") {
        next.castling.clear(CR::WHITE_KINGSIDE);
        next.castling.clear(CR::WHITE_QUEENSIDE);
    }
    if touches("h1") {
        next.castling.clear(CR::WHITE_KINGSIDE);
    }
    if touches("a1") {
        next.castling.clear(CR::WHITE_QUEENSIDE);
    }
    if touches("e8") {
        next.castling.clear(CR::BLACK_KINGSIDE);
        next.castling.clear(CR::BLACK_QUEENSIDE);
    }
    if touches("h8") {
        next.castling.clear(CR::BLACK_KINGSIDE);
    }
    if touches("a8") {
        next.castling.clear(CR::BLACK_QUEENSIDE);
    }
    next.en_passant = if mv.is_double_push() {
        let dr = if mover.color == Color::White { -1 } else { 1 };
        Some(mv.to.offset(0, dr).unwrap())
    } else {
        None
    };
    if mover.kind == PieceKind::Pawn || mv.is_capture() {
        next.halfmove_clock = 0;
    } else {
        next.halfmove_clock = pos.halfmove_clock + 1;
    }
    if mover.color == Color::Black {
        next.fullmove_number = pos.fullmove_number + 1;
    }
    next.side_to_move = mover.color.opposite();
    next
}

/// All legal moves of the side to move, enumerated over every (from, to)
/// square pair and filtered by an independent king-safety check.
pub fn ref_legal_moves(pos: &Position) -> Vec<Move> {
    let us = pos.side_to_move;
    let mut out = Vec::new();
    for from in Square::all() {
        let piece = match pos.piece_at(from) {
            Some(p) if p.color == us => p,
            _ => continue,
        };
        for to in Square::all() {
            if to == from {
                continue;
            }
            for candidate in candidate_moves(pos, piece, from, to) {
                let next = ref_apply(pos, candidate);
                if !ref_in_check(&next, us) {
                    out.push(candidate);
                }
            }
        }
    }
    out
}

/// Pseudo-legal candidates from `from` to `to`, promotion variants included.
fn candidate_moves(pos: &Position, piece: Piece, from: Square, to: Square) -> Vec<Move> {
    let us = piece.color;
    let target = pos.piece_at(to);
    if target.map(|p| p.color) == Some(us) {
        return Vec::new();
    }
    let capture_flag = if target.is_some() { move_flags::CAPTURE } else { 0 };

    let base: Option<Move> = match piece.kind {
        PieceKind::Pawn => pawn_candidate(pos, us, from, to, target),
        PieceKind::King => {
            if reaches(pos, PieceKind::King, us, from, to) {
                Some(Move { from, to, promotion: None, flags: capture_flag })
            } else {
                castle_candidate(pos, us, from, to)
            }
        }
        kind => {
            if reaches(pos, kind, us, from, to) {
                Some(Move { from, to, promotion: None, flags: capture_flag })
            } else {
                None
            }
        }
    };

    let Some(mv) = base else { return Vec::new() };
    let last_rank = if us == Color::White { 7 } else { 0 };
    if piece.kind == PieceKind::Pawn && to.rank() == last_rank {
        [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight]
            .into_iter()
            .map(|kind| Move { promotion: Some(kind), ..mv })
            .collect()
    } else {
        vec![mv]
    }
}

fn pawn_candidate(
    pos: &Position,
    us: Color,
    from: Square,
    to: Square,
    target: Option<Piece>,
) -> Option<Move> {
    let fwd = if us == Color::White { 1i8 } else { -1 };
    let start_rank = if us == Color::White { 1 } else { 6 };
    let df = to.file() as i8 - from.file() as i8;
    let dr = to.rank() as i8 - from.rank() as i8;

    if df == 0 && dr == fwd && target.is_none() {
        return Some(Move::new(from, to));
    }
    if df == 0 && dr == 2 * fwd && from.rank() == start_rank && target.is_none() {
        let between = from.offset(0, fwd).unwrap();
        if pos.piece_at(between).is_none() {
            return Some(Move { from, to, promotion: None, flags: move_flags::DOUBLE_PUSH });
        }
        return None;
    }
    if df.abs() == 1 && dr == fwd {
        if let Some(p) = target {
            if p.color != us {
                return Some(Move { from, to, promotion: None, flags: move_flags::CAPTURE });
            }
        } else if pos.side_to_move == us && pos.en_passant == Some(to) {
            return Some(Move {
                from,
                to,
                promotion: None,
                flags: move_flags::CAPTURE | move_flags::EN_PASSANT,
            });
        }
    }
    None
}

fn castle_candidate(pos: &Position, us: Color, from: Square, to: Square) -> Option<Move> {
    use super::board::CastlingRights as CR;
    let (home_rank, kingside, queenside) = match us {
        Color::White => (0u8, CR::WHITE_KINGSIDE, CR::WHITE_QUEENSIDE),
        Color::Black => (7, CR::BLACK_KINGSIDE, CR::BLACK_QUEENSIDE),
    };
    if from != Square::new(4, home_rank) || to.rank() != home_rank {
        return None;
    }
    if ref_attacked(pos, from, us.opposite()) {
        return None;
    }
    let empty = |f: u8| pos.piece_at(Square::new(f, home_rank)).is_none();
    let safe = |f: u8| !ref_attacked(pos, Square::new(f, home_rank), us.opposite());
    let rook_at = |f: u8| {
        pos.piece_at(Square::new(f, home_rank)) == Some(Piece { color: us, kind: PieceKind::Rook })
    };
    if to.file() == 6 && pos.castling.has(kingside) && empty(5) && empty(6) && safe(5) && safe(6) && rook_at(7)
    {
        return Some(Move { from, to, promotion: None, flags: move_flags::CASTLE });
    }
    if to.file() == 2
        && pos.castling.has(queenside)
        && empty(1)
        && empty(2)
        && empty(3)
        && safe(3)
        && safe(2)
        && rook_at(0)
    {
        return Some(Move { from, to, promotion: None, flags: move_flags::CASTLE });
    }
    None
}

/// Pseudo-legal moves of `color` by definitional enumeration: every square
/// pair, no king-safety filter.
pub fn ref_pseudo_moves_for(pos: &Position, color: Color) -> Vec<Move> {
    let mut out = Vec::new();
    for from in Square::all() {
        let piece = match pos.piece_at(from) {
            Some(p) if p.color == color => p,
            _ => continue,
        };
        for to in Square::all() {
            if to != from {
                out.extend(candidate_moves(pos, piece, from, to));
            }
        }
    }
    out
}

/// Does the piece on `from` attack `target` by bare geometry?
pub fn ref_piece_attacks(pos: &Position, from: Square, target: Square) -> bool {
    match pos.piece_at(from) {
        Some(p) => reaches(pos, p.kind, p.color, from, target),
        None => false,
    }
}

/// Perft over the reference generator.
pub fn ref_perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = ref_legal_moves(pos);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves.iter().map(|&mv| ref_perft(&ref_apply(pos, mv), depth - 1)).sum()
}
