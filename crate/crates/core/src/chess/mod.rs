//! Chess rules kernel: position representation, legal move generation, and
//! a bounded forced-mate prover with an independent replay validator.

pub mod board;
pub mod fen;
pub mod mate;
pub mod movegen;
pub mod refgen;
pub mod validator;

pub use board::{
    find_by_lan, move_flags, CastlingRights, Color, Move, Piece, PieceKind, Position,
    PositionError, Square,
};
pub use fen::{emit_fen, parse_fen, FenError};
pub use mate::{prove_mate_in_n, MateError, MateVerdict, MAX_MATE_BOUND};
pub use movegen::{has_legal_move, is_checkmate, legal_moves, perft, pseudo_legal_moves};
pub use validator::{verify_mate_claim, VerifyError};
