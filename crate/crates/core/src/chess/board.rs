//! Board state: squares, pieces, moves, and the `Position` type with
//! make/unmake and attack detection.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    Pawn,
    Knight,
    Bishop,
    Rook,
    Queen,
    King,
}

impl PieceKind {
    /// Conventional material value; the king carries none.
    pub fn value(self) -> u32 {
        match self {
            PieceKind::Pawn => 1,
            PieceKind::Knight => 3,
            PieceKind::Bishop => 3,
            PieceKind::Rook => 5,
            PieceKind::Queen => 9,
            PieceKind::King => 0,
        }
    }

    pub fn to_char(self, color: Color) -> char {
        let c = match self {
            PieceKind::Pawn => 'p',
            PieceKind::Knight => 'n',
            PieceKind::Bishop => 'b',
            PieceKind::Rook => 'r',
            PieceKind::Queen => 'q',
            PieceKind::King => 'k',
        };
        match color {
            Color::White => c.to_ascii_uppercase(),
            Color::Black => c,
        }
    }

    pub fn from_char(c: char) -> Option<(Color, PieceKind)> {
        let kind = match c.to_ascii_lowercase() {
            'p' => PieceKind::Pawn,
            'n' => PieceKind::Knight,
            'b' => PieceKind::Bishop,
            'r' => PieceKind::Rook,
            'q' => PieceKind::Queen,
            'k' => PieceKind::King,
            _ => return None,
        };
        let color = if c.is_ascii_uppercase() { Color::White } else { Color::Black };
        Some((color, kind))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

/// Board square, index 0..64 with a1 = 0, h1 = 7, a8 = 56.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(pub u8);

impl Square {
    pub fn new(file: u8, rank: u8) -> Square {
        debug_assert!(file < 8 && rank < 8);
        Square(rank * 8 + file)
    }

    pub fn file(self) -> u8 {
        self.0 % 8
    }

    pub fn rank(self) -> u8 {
        self.0 / 8
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Offset by file/rank deltas, `None` when falling off the board.
    pub fn offset(self, df: i8, dr: i8) -> Option<Square> {
        let f = self.file() as i8 + df;
        let r = self.rank() as i8 + dr;
        if (0..8).contains(&f) && (0..8).contains(&r) {
            Some(Square::new(f as u8, r as u8))
        } else {
            None
        }
    }

    pub fn all() -> impl Iterator<Item = Square> {
        (0u8..64).map(Square)
    }

    pub fn parse(s: &str) -> Option<Square> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 {
            return None;
        }
        let file = bytes[0].checked_sub(b'a')?;
        let rank = bytes[1].checked_sub(b'1')?;
        if file < 8 && rank < 8 {
            Some(Square::new(file, rank))
        } else {
            None
        }
    }
}

impl std::fmt::Display for Square {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", (b'a' + self.file()) as char, (b'1' + self.rank()) as char)
    }
}

/// One castling availability flag per side and wing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CastlingRights(pub u8);

impl CastlingRights {
    pub const WHITE_KINGSIDE: u8 = 1;
    pub const WHITE_QUEENSIDE: u8 = 2;
    pub const BLACK_KINGSIDE: u8 = 4;
    pub const BLACK_QUEENSIDE: u8 = 8;

    pub fn none() -> Self {
        CastlingRights(0)
    }

    pub fn has(self, flag: u8) -> bool {
        self.0 & flag != 0
    }

    pub fn clear(&mut self, flag: u8) {
        self.0 &= !flag;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

pub mod move_flags {
    pub const CAPTURE: u8 = 1;
    pub const CASTLE: u8 = 2;
    pub const EN_PASSANT: u8 = 4;
    pub const DOUBLE_PUSH: u8 = 8;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
    pub flags: u8,
}

impl Move {
    pub fn new(from: Square, to: Square) -> Move {
        Move { from, to, promotion: None, flags: 0 }
    }

    pub fn is_capture(self) -> bool {
        self.flags & move_flags::CAPTURE != 0
    }

    pub fn is_castle(self) -> bool {
        self.flags & move_flags::CASTLE != 0
    }

    pub fn is_en_passant(self) -> bool {
        self.flags & move_flags::EN_PASSANT != 0
    }

    pub fn is_double_push(self) -> bool {
        self.flags & move_flags::DOUBLE_PUSH != 0
    }

    /// Long algebraic notation: `a1a8`, `e7e8q`.
    pub fn to_lan(self) -> String {
        let mut s = format!("{}{}", self.from, self.to);
        if let Some(p) = self.promotion {
            s.push(p.to_char(Color::Black));
        }
        s
    }
}

/// Picks the move matching a long-algebraic string out of a move list.
pub fn find_by_lan(moves: &[Move], lan: &str) -> Option<Move> {
    moves.iter().copied().find(|m| m.to_lan() == lan)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PositionError {
    #[error("{0:?} has {1} kings, expected exactly 1")]
    KingCount(Color, usize),
    #[error("kings on adjacent squares")]
    AdjacentKings,
    #[error("pawn on back rank at {0}")]
    PawnOnBackRank(Square),
    #[error("side not to move is in check")]
    SideNotToMoveInCheck,
    #[error("castling right `{0}` inconsistent with piece placement")]
    CastlingInconsistent(char),
    #[error("en passant square {0} inconsistent with position")]
    BadEnPassant(Square),
}

/// Data needed to retract a move.
#[derive(Debug, Clone, Copy)]
pub struct Undo {
    mover_before: Piece,
    captured: Option<(Square, Piece)>,
    rook_move: Option<(Square, Square)>,
    castling: CastlingRights,
    en_passant: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
}

/// Full chess position: placement, side to move, castling, en passant and
/// move counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Position {
    pub(crate) board: [Option<Piece>; 64],
    pub side_to_move: Color,
    pub castling: CastlingRights,
    pub en_passant: Option<Square>,
    pub halfmove_clock: u32,
    pub fullmove_number: u32,
}

impl Position {
    pub fn empty() -> Position {
        Position {
            board: [None; 64],
            side_to_move: Color::White,
            castling: CastlingRights::none(),
            en_passant: None,
            halfmove_clock: 0,
            fullmove_number: 1,
        }
    }

    pub fn start() -> Position {
        crate::chess::fen::parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1")
            .expect("start FEN is valid")
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    pub fn set_piece(&mut self, sq: Square, piece: Option<Piece>) {
        self.board[sq.index()] = piece;
    }

    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(|sq| self.board[sq.index()].map(|p| (sq, p)))
    }

    pub fn piece_count(&self) -> usize {
        self.board.iter().filter(|p| p.is_some()).count()
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        self.pieces()
            .find(|(_, p)| p.color == color && p.kind == PieceKind::King)
            .map(|(sq, _)| sq)
    }

    /// True when `by` attacks `sq` under standard move geometry.
    pub fn is_square_attacked(&self, sq: Square, by: Color) -> bool {
        // Pawns: a pawn of `by` sits one rank behind (from its own view),
        // one file to either side.
        let pawn_dr = match by {
            Color::White => -1,
            Color::Black => 1,
        };
        for df in [-1i8, 1] {
            if let Some(s) = sq.offset(df, pawn_dr) {
                if self.board[s.index()]
                    == Some(Piece { color: by, kind: PieceKind::Pawn })
                {
                    return true;
                }
            }
        }
        // Knights.
        const KNIGHT: [(i8, i8); 8] =
            [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
        for (df, dr) in KNIGHT {
            if let Some(s) = sq.offset(df, dr) {
                if self.board[s.index()]
                    == Some(Piece { color: by, kind: PieceKind::Knight })
                {
                    return true;
                }
            }
        }
        // King.
        for df in -1i8..=1 {
            for dr in -1i8..=1 {
                if (df, dr) == (0, 0) {
                    continue;
                }
                if let Some(s) = sq.offset(df, dr) {
                    if self.board[s.index()]
                        == Some(Piece { color: by, kind: PieceKind::King })
                    {
                        return true;
                    }
                }
            }
        }
        // Sliders: first piece along each ray decides.
        const ORTHO: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        const DIAG: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
        for (dirs, kinds) in [
            (&ORTHO, [PieceKind::Rook, PieceKind::Queen]),
            (&DIAG, [PieceKind::Bishop, PieceKind::Queen]),
        ] {
            for &(df, dr) in dirs.iter() {
                let mut cur = sq;
                while let Some(s) = cur.offset(df, dr) {
                    if let Some(p) = self.board[s.index()] {
                        if p.color == by && kinds.contains(&p.kind) {
                            return true;
                        }
                        break;
                    }
                    cur = s;
                }
            }
        }
        false
    }

    pub fn is_in_check(&self, color: Color) -> bool {
        match self.king_square(color) {
            Some(sq) => self.is_square_attacked(sq, color.opposite()),
            None => false,
        }
    }

    /// Structural legality: one king per side, kings apart, pawns off the
    /// back ranks, the side that is not to move out of check, and castling
    /// and en passant fields consistent with the placement.
    pub fn validate(&self) -> Result<(), PositionError> {
        for color in [Color::White, Color::Black] {
            let kings = self
                .pieces()
                .filter(|(_, p)| p.color == color && p.kind == PieceKind::King)
                .count();
            if kings != 1 {
                return Err(PositionError::KingCount(color, kings));
            }
        }
        let wk = self.king_square(Color::White).unwrap();
        let bk = self.king_square(Color::Black).unwrap();
        let (df, dr) = (
            (wk.file() as i8 - bk.file() as i8).abs(),
            (wk.rank() as i8 - bk.rank() as i8).abs(),
        );
        if df <= 1 && dr <= 1 {
            return Err(PositionError::AdjacentKings);
        }
        for (sq, p) in self.pieces() {
            if p.kind == PieceKind::Pawn && (sq.rank() == 0 || sq.rank() == 7) {
                return Err(PositionError::PawnOnBackRank(sq));
            }
        }
        if self.is_in_check(self.side_to_move.opposite()) {
            return Err(PositionError::SideNotToMoveInCheck);
        }
        let expect = |sq: &str, color: Color, kind: PieceKind| {
            self.piece_at(Square::parse(sq).unwrap()) == Some(Piece { color, kind })
        };
        let rights = [
            (CastlingRights::WHITE_KINGSIDE, 'K', "e1", "h1", Color::White),
            (CastlingRights::WHITE_QUEENSIDE, 'Q', "e1", "a1", Color::White),
            (CastlingRights::BLACK_KINGSIDE, 'k', "e8", "h8", Color::Black),
            (CastlingRights::BLACK_QUEENSIDE, 'q', "e8", "a8", Color::Black),
        ];
        for (flag, ch, ksq, rsq, color) in rights {
            if self.castling.has(flag)
                && !(expect(ksq, color, PieceKind::King) && expect(rsq, color, PieceKind::Rook))
            {
                return Err(PositionError::CastlingInconsistent(ch));
            }
        }
        if let Some(ep) = self.en_passant {
            let ok = match self.side_to_move {
                Color::White => {
                    ep.rank() == 5
                        && self.piece_at(ep).is_none()
                        && self.piece_at(ep.offset(0, -1).unwrap())
                            == Some(Piece { color: Color::Black, kind: PieceKind::Pawn })
                }
                Color::Black => {
                    ep.rank() == 2
                        && self.piece_at(ep).is_none()
                        && self.piece_at(ep.offset(0, 1).unwrap())
                            == Some(Piece { color: Color::White, kind: PieceKind::Pawn })
                }
            };
            if !ok {
                return Err(PositionError::BadEnPassant(ep));
            }
        }
        Ok(())
    }

    /// Applies a legal move in place and returns what is needed to retract it.
    pub fn make_mut(&mut self, mv: Move) -> Undo {
        let mover = self.board[mv.from.index()].expect("move source occupied");
        let undo_base = Undo {
            mover_before: mover,
            captured: None,
            rook_move: None,
            castling: self.castling,
            en_passant: self.en_passant,
            halfmove_clock: self.halfmove_clock,
            fullmove_number: self.fullmove_number,
        };
        let mut undo = undo_base;

        // Remove whatever the move captures.
        if mv.is_en_passant() {
            let victim_sq = match mover.color {
                Color::White => mv.to.offset(0, -1).unwrap(),
                Color::Black => mv.to.offset(0, 1).unwrap(),
            };
            undo.captured = self.board[victim_sq.index()].map(|p| (victim_sq, p));
            self.board[victim_sq.index()] = None;
        } else if let Some(victim) = self.board[mv.to.index()] {
            undo.captured = Some((mv.to, victim));
        }

        // Move (and possibly promote) the piece.
        self.board[mv.from.index()] = None;
        self.board[mv.to.index()] = Some(match mv.promotion {
            Some(kind) => Piece { color: mover.color, kind },
            None => mover,
        });

        // Castle: also move the rook.
        if mv.is_castle() {
            let (rf, rt) = match (mover.color, mv.to.file()) {
                (Color::White, 6) => (Square::parse("h1").unwrap(), Square::parse("f1").unwrap()),
                (Color::White, 2) => (Square::parse("a1").unwrap(), Square::parse("d1").unwrap()),
                (Color::Black, 6) => (Square::parse("h8").unwrap(), Square::parse("f8").unwrap()),
                (Color::Black, 2) => (Square::parse("a8").unwrap(), Square::parse("d8").unwrap()),
                _ => unreachable!("castle destination must be on the c or g file"),
            };
            self.board[rt.index()] = self.board[rf.index()].take();
            undo.rook_move = Some((rf, rt));
        }

        // Rights lapse whenever a king or rook leaves home, or a rook is
        // captured on its home square.
        for sq in [mv.from, mv.to] {
            match sq {
                s if s == Square::parse("e1").unwrap() => {
                    self.castling.clear(CastlingRights::WHITE_KINGSIDE);
                    self.castling.clear(CastlingRights::WHITE_QUEENSIDE);
                }
                s if s == Square::parse("h1").unwrap() => {
                    self.castling.clear(CastlingRights::WHITE_KINGSIDE)
                }
                s if s == Square::parse("a1").unwrap() => {
                    self.castling.clear(CastlingRights::WHITE_QUEENSIDE)
                }
                s if s == Square::parse("e8").unwrap() => {
                    self.castling.clear(CastlingRights::BLACK_KINGSIDE);
                    self.castling.clear(CastlingRights::BLACK_QUEENSIDE);
                }
                s if s == Square::parse("h8").unwrap() => {
                    self.castling.clear(CastlingRights::BLACK_KINGSIDE)
                }
                s if s == Square::parse("a8").unwrap() => {
                    self.castling.clear(CastlingRights::BLACK_QUEENSIDE)
                }
                _ => {}
            }
        }

        self.en_passant = if mv.is_double_push() {
            let dr = if mover.color == Color::White { -1 } else { 1 };
            Some(mv.to.offset(0, dr).unwrap())
        } else {
            None
        };

        if mover.kind == PieceKind::Pawn || undo.captured.is_some() {
            self.halfmove_clock = 0;
        } else {
            self.halfmove_clock += 1;
        }
        if mover.color == Color::Black {
            self.fullmove_number += 1;
        }
        self.side_to_move = self.side_to_move.opposite();
        undo
    }

    /// Retracts a move applied by [`Position::make_mut`].
    pub fn unmake(&mut self, mv: Move, undo: Undo) {
        self.side_to_move = self.side_to_move.opposite();
        self.castling = undo.castling;
        self.en_passant = undo.en_passant;
        self.halfmove_clock = undo.halfmove_clock;
        self.fullmove_number = undo.fullmove_number;

        if let Some((rf, rt)) = undo.rook_move {
            self.board[rf.index()] = self.board[rt.index()].take();
        }
        self.board[mv.to.index()] = None;
        self.board[mv.from.index()] = Some(undo.mover_before);
        if let Some((sq, piece)) = undo.captured {
            self.board[sq.index()] = Some(piece);
        }
    }

    /// Copying variant of [`Position::make_mut`].
    pub fn make(&self, mv: Move) -> Position {
        let mut next = self.clone();
        next.make_mut(mv);
        next
    }
}
