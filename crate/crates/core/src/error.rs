use thiserror::Error;

use crate::ValueKind;

/// Errors raised by the game, estimation, alignment and localization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{players} players exceed the enumeration cap of {cap}; use the sampling estimators")]
    CapExceeded { players: usize, cap: usize },
    #[error("player {player} out of range for a game with {players} players")]
    PlayerOutOfRange { player: usize, players: usize },
    #[error("interaction requires two distinct players, got {0} twice")]
    SamePlayer(usize),
    #[error("games are limited to {max} players, got {players}")]
    TooManyPlayers { players: usize, max: usize },
    #[error("union group must be nonempty")]
    EmptyUnion,
    #[error("union group intersects an existing union player {player}")]
    OverlappingUnion { player: usize },
    #[error("sampling plan kind is {found:?}, expected {expected:?}")]
    KindMismatch {
        expected: ValueKind,
        found: ValueKind,
    },
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("vector {index} has zero norm")]
    ZeroVector { index: usize },
    #[error("vector {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("sequence must contain at least one vector")]
    EmptySequence,
    #[error("expected a {expected} sequence, got {found}")]
    ModalityMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("score matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("score vector is empty")]
    EmptyScores,
    #[error("threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("max_moments must be at least 1")]
    ZeroMoments,
    #[error("duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("interval start {start} exceeds end {end}")]
    InvertedInterval { start: f64, end: f64 },
    #[error("no evaluation records")]
    EmptyRecords,
    #[error("recall requires n >= 1 and 0 < m <= 1, got n={n}, m={m}")]
    InvalidRecallParams { n: usize, m: f64 },
    #[error("invalid synthetic config: {0}")]
    ConfigInvalid(String),
    #[error("malformed record on line {line}: {message}")]
    Record { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
