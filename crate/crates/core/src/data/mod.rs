//! Level-2 event ingestion, replay into interval snapshots and descriptive
//! analytics.

mod analytics;
mod events;
mod export;
mod replay;

pub use analytics::{
    count_correlation, intensity_correlation, level_labels, order_size_histogram, CorrelationTable, SizeHistogram,
    MIN_CORRELATION_INTERVALS,
};
pub use events::{read_events, read_events_file, write_events, write_events_file, EventKind, EventRecord, EVENT_HEADER};
pub use export::simulated_events;
pub use replay::{events_to_snapshots, replay_events, Matching, Overflow, Replay, ReplayConfig};
