//! The two representative agents and the per-interval generative loop.

mod config;
mod engine;
mod io;
mod params;

pub use config::{
    seed_initial_book, BookSpec, InitialBook, LevelSpec, ModelVariant, SimConfig, SizeVariant, SkewVariant,
};
pub(crate) use engine::next_refs;
pub use engine::{simulate, EventCounts, EventTotals, SimResult, Snapshot};
pub use io::{read_snapshots_csv, snapshot_header, write_snapshots_csv, SimMetadata};
pub use params::{apply_quote_to_trade, AgentParams, ReferenceParams};
