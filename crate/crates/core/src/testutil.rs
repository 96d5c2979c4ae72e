//! Shared test helpers.

use crate::chess::{Color, Piece, PieceKind, Position, Square};
use crate::entropy::{EntropyError, EntropySource, EntropyStats, Origin, UnitDraw};

/// Serves a scripted list of unit values, cycling; lets integer-mapping
/// examples pin exact draws.
pub(crate) struct FixedUnits {
    values: Vec<f64>,
    next: usize,
    stats: EntropyStats,
}

impl FixedUnits {
    pub(crate) fn new(values: Vec<f64>) -> FixedUnits {
        FixedUnits { values, next: 0, stats: EntropyStats::default() }
    }
}

impl EntropySource for FixedUnits {
    fn next_unit(&mut self) -> Result<UnitDraw, EntropyError> {
        let value = self.values[self.next % self.values.len()];
        self.next += 1;
        self.stats.pseudo_draws += 1;
        Ok(UnitDraw { value, origin: Origin::Pseudo })
    }

    fn stats(&self) -> EntropyStats {
        self.stats
    }
}

/// Deterministic sparse random position generator for property and oracle
/// tests: two kings plus a handful of random pieces, `None` when the result
/// fails structural validation.
pub(crate) fn random_sparse_position(seed: u64) -> Option<Position> {
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let mut pos = Position::empty();
    let wk = Square((next() % 64) as u8);
    pos.set_piece(wk, Some(Piece { color: Color::White, kind: PieceKind::King }));
    let bk = loop {
        let sq = Square((next() % 64) as u8);
        let df = (sq.file() as i8 - wk.file() as i8).abs();
        let dr = (sq.rank() as i8 - wk.rank() as i8).abs();
        if sq != wk && (df > 1 || dr > 1) {
            break sq;
        }
    };
    pos.set_piece(bk, Some(Piece { color: Color::Black, kind: PieceKind::King }));
    let kinds = [
        PieceKind::Pawn,
        PieceKind::Knight,
        PieceKind::Bishop,
        PieceKind::Rook,
        PieceKind::Queen,
    ];
    for _ in 0..(next() % 6 + 1) {
        let sq = Square((next() % 64) as u8);
        let kind = kinds[(next() % 5) as usize];
        let color = if next() % 2 == 0 { Color::White } else { Color::Black };
        if pos.piece_at(sq).is_none()
            && !(kind == PieceKind::Pawn && (sq.rank() == 0 || sq.rank() == 7))
        {
            pos.set_piece(sq, Some(Piece { color, kind }));
        }
    }
    pos.side_to_move = if next() % 2 == 0 { Color::White } else { Color::Black };
    if pos.is_in_check(pos.side_to_move.opposite()) {
        pos.side_to_move = pos.side_to_move.opposite();
    }
    pos.validate().ok().map(|_| pos)
}
