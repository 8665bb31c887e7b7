use std::io;

use thiserror::Error;

use crate::book::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("book side {0:?} is empty")]
    EmptySide(Side),

    #[error("cannot cancel {requested} orders at {side:?} tick {tick}: only {resting} resting")]
    InconsistentActivity {
        side: Side,
        tick: i64,
        requested: u64,
        resting: u64,
    },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("quote-to-trade ratio must exceed 1, got {0}")]
    InvalidRatio(f64),

    #[error("crossed initial book: best bid {best_bid} >= best ask {best_ask}")]
    CrossedSpec { best_bid: i64, best_ask: i64 },

    #[error("degenerate trading day: {0}")]
    DegenerateDay(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("at least {min} replications required, got {got}")]
    InsufficientReplications { got: usize, min: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("timestamps decrease on line {line}")]
    Monotonicity { line: usize },

    #[error("replay failed at record {index}: {msg}")]
    Replay { index: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
