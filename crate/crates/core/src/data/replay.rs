//! Replays an event stream through the book and samples it at interval
//! boundaries.

use serde::{Deserialize, Serialize};

use super::events::{EventKind, EventRecord};
use crate::book::{ActiveWindow, BookState, Side};
use crate::error::{Error, Result};
use crate::sim::{next_refs, seed_initial_book, BookSpec, EventCounts, Snapshot};

fn default_interval_seconds() -> f64 {
    10.0
}
fn default_tick_size() -> f64 {
    0.005
}

/// How far an incoming order may trade.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matching {
    /// Against the whole opposite side.
    #[default]
    Unbounded,
    /// Only against the opposite side of the interval-start window, as in
    /// the simulator; a limit residual that would still cross is dropped.
    Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayConfig {
    #[serde(default = "default_interval_seconds")]
    pub interval_seconds: f64,
    pub l_p: usize,
    pub l_d: usize,
    #[serde(default = "default_tick_size")]
    pub tick_size: f64,
    /// Number of intervals; by default just enough to hold every event.
    #[serde(default)]
    pub intervals: Option<usize>,
    /// Book resting before the first event; empty by default.
    #[serde(default)]
    pub initial_book: Option<BookSpec>,
    #[serde(default)]
    pub matching: Matching,
}

impl ReplayConfig {
    pub fn new(l_p: usize, l_d: usize) -> Self {
        Self {
            interval_seconds: default_interval_seconds(),
            l_p,
            l_d,
            tick_size: default_tick_size(),
            intervals: None,
            initial_book: None,
            matching: Matching::Unbounded,
        }
    }

    fn interval_ms(&self) -> Result<u64> {
        let ms = (self.interval_seconds * 1000.0).round();
        if !(ms >= 1.0) || !ms.is_finite() {
            return Err(Error::InvalidConfig("interval must be at least one millisecond".into()));
        }
        Ok(ms as u64)
    }
}

/// Limit orders that fell outside the window, per side: `[deep, aggressive]`.
pub type Overflow = [[u64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub snapshots: Vec<Snapshot>,
    /// Limit orders per interval `1..=T`, per side, per window level of the
    /// window anchored at the interval's start.
    pub lo_counts: Vec<[Vec<u64>; 2]>,
    pub overflow: Overflow,
}

/// Reference prices for a book that may never have been two-sided: a
/// missing side is placed one tick beyond the other, an empty book anchors
/// at `(0, 1)`.
fn anchor(book: &BookState, prev: Option<(i64, i64)>) -> (i64, i64) {
    let fallback = match (book.best_bid(), book.best_ask()) {
        (Some(b), _) => (b, b + 1),
        (None, Some(a)) => (a - 1, a),
        (None, None) => (0, 1),
    };
    next_refs(book, prev.unwrap_or(fallback))
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Bid => 0,
        Side::Ask => 1,
    }
}

fn count_event(counts: &mut EventCounts, e: &EventRecord) {
    let slot = match (e.kind, e.side) {
        (EventKind::Limit, Side::Bid) => &mut counts.lo_bid,
        (EventKind::Limit, Side::Ask) => &mut counts.lo_ask,
        (EventKind::Cancel, Side::Bid) => &mut counts.c_bid,
        (EventKind::Cancel, Side::Ask) => &mut counts.c_ask,
        (EventKind::Market, Side::Bid) => &mut counts.mo_bid,
        (EventKind::Market, Side::Ask) => &mut counts.mo_ask,
    };
    *slot += 1;
}

/// Event at `ts_ms` belongs to interval `ts_ms / interval_ms + 1`; the
/// snapshot of boundary `t` reflects every event with `ts_ms < t·interval`.
pub fn replay_events(events: &[EventRecord], config: &ReplayConfig) -> Result<Replay> {
    let interval_ms = config.interval_ms()?;
    if events.windows(2).any(|w| w[1].ts_ms < w[0].ts_ms) {
        let i = events.windows(2).position(|w| w[1].ts_ms < w[0].ts_ms).expect("found above");
        return Err(Error::Replay { index: i + 1, msg: "timestamps decrease".into() });
    }
    let needed = events.last().map_or(0, |e| (e.ts_ms / interval_ms) as usize + 1);
    let intervals = config.intervals.unwrap_or(needed);
    if needed > intervals {
        let index = events.iter().position(|e| (e.ts_ms / interval_ms) as usize >= intervals).expect("exists");
        return Err(Error::Replay { index, msg: format!("event after the last of {intervals} intervals") });
    }
    let mut book = match &config.initial_book {
        Some(spec) => seed_initial_book(spec, config.tick_size)?,
        None => BookState::new(config.tick_size),
    };
    let levels = config.l_p + config.l_d;
    let mut refs = anchor(&book, None);
    let mut window = ActiveWindow::new(refs.0, refs.1, config.l_p, config.l_d)?;
    let mut snapshots = Vec::with_capacity(intervals + 1);
    snapshots.push(Snapshot::capture(&book, &window, 0, 0.0, EventCounts::default()));
    let mut lo_counts = Vec::with_capacity(intervals);
    let mut overflow: Overflow = [[0; 2]; 2];
    let mut next = 0;

    for t in 1..=intervals {
        let end = t as u64 * interval_ms;
        let mut counts = EventCounts::default();
        let mut level_counts = [vec![0u64; levels], vec![0u64; levels]];
        while next < events.len() && events[next].ts_ms < end {
            let e = &events[next];
            count_event(&mut counts, e);
            let bounds = match config.matching {
                Matching::Unbounded => None,
                Matching::Window => Some(window.tick_range(e.side.opposite())),
            };
            match e.kind {
                EventKind::Limit => {
                    let k = side_index(e.side);
                    match window.index_of(e.side, e.price_tick) {
                        Some(i) => level_counts[k][i] += 1,
                        None => {
                            let (lo, hi) = window.tick_range(e.side);
                            let aggressive = match e.side {
                                Side::Bid => e.price_tick > hi,
                                Side::Ask => e.price_tick < lo,
                            };
                            overflow[k][usize::from(aggressive)] += 1;
                        }
                    }
                    book.submit_limit(e.side, e.price_tick, e.size, bounds);
                }
                EventKind::Cancel => {
                    book.cancel_matching(e.side, e.price_tick, e.size).map_err(|_| Error::Replay {
                        index: next,
                        msg: format!(
                            "no resting {} order of size {} at tick {}",
                            e.side.as_str(),
                            e.size,
                            e.price_tick
                        ),
                    })?;
                }
                EventKind::Market => {
                    book.execute_market(e.side, e.size, bounds);
                }
            }
            next += 1;
        }
        refs = anchor(&book, Some(refs));
        window = ActiveWindow::new(refs.0, refs.1, config.l_p, config.l_d)?;
        let time_s = t as f64 * config.interval_seconds;
        snapshots.push(Snapshot::capture(&book, &window, t, time_s, counts));
        lo_counts.push(level_counts);
    }
    Ok(Replay { snapshots, lo_counts, overflow })
}

pub fn events_to_snapshots(events: &[EventRecord], config: &ReplayConfig) -> Result<Vec<Snapshot>> {
    Ok(replay_events(events, config)?.snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lo(ts: u64, side: Side, tick: i64, size: u64) -> EventRecord {
        EventRecord { ts_ms: ts, kind: EventKind::Limit, side, price_tick: tick, size }
    }

    fn seeded() -> ReplayConfig {
        ReplayConfig {
            intervals: Some(4),
            initial_book: Some(BookSpec::symmetric(100, 1, 5, 2, 3)),
            ..ReplayConfig::new(5, 3)
        }
    }

    #[test]
    fn no_events_keeps_initial_state() {
        let snaps = events_to_snapshots(&[], &seeded()).unwrap();
        assert_eq!(snaps.len(), 5);
        for s in &snaps[1..] {
            assert_eq!(s.bid_volumes, snaps[0].bid_volumes);
            assert_eq!(s.ask_volumes, snaps[0].ask_volumes);
            assert_eq!((s.best_bid, s.best_ask, s.ref_bid, s.ref_ask), (snaps[0].best_bid, snaps[0].best_ask, snaps[0].ref_bid, snaps[0].ref_ask));
        }
    }

    #[test]
    fn order_and_cancel_within_interval() {
        let events = vec![
            lo(12_000, Side::Bid, 99, 4),
            EventRecord { ts_ms: 15_000, kind: EventKind::Cancel, side: Side::Bid, price_tick: 99, size: 4 },
        ];
        let snaps = events_to_snapshots(&events, &seeded()).unwrap();
        assert_eq!(snaps[1].bid_volumes, snaps[2].bid_volumes);
        assert_eq!(snaps[2].counts.lo_bid, 1);
        assert_eq!(snaps[2].counts.c_bid, 1);
    }

    #[test]
    fn cancel_of_absent_order() {
        let events = vec![EventRecord { ts_ms: 5, kind: EventKind::Cancel, side: Side::Ask, price_tick: 101, size: 9 }];
        assert!(matches!(events_to_snapshots(&events, &seeded()), Err(Error::Replay { index: 0, .. })));
    }

    #[test]
    fn intervals_cover_all_events() {
        let events = vec![lo(0, Side::Bid, 10, 1), lo(25_000, Side::Ask, 12, 1)];
        let snaps = events_to_snapshots(&events, &ReplayConfig::new(2, 1)).unwrap();
        assert_eq!(snaps.len(), 4);
        assert_eq!((snaps[1].ref_bid, snaps[1].ref_ask), (10, 11));
        assert_eq!((snaps[3].best_bid, snaps[3].best_ask), (Some(10), Some(12)));
        let short = ReplayConfig { intervals: Some(2), ..ReplayConfig::new(2, 1) };
        assert!(matches!(events_to_snapshots(&events, &short), Err(Error::Replay { index: 1, .. })));
    }

    #[test]
    fn level_attribution_uses_interval_start() {
        let cfg = seeded();
        // Refs (100, 101): the bid window spans ticks 96..=103.
        let events = vec![lo(0, Side::Bid, 96, 1), lo(1, Side::Bid, 102, 1), lo(2, Side::Bid, 90, 1), lo(3, Side::Bid, 150, 1)];
        let r = replay_events(&events, &cfg).unwrap();
        let bid = &r.lo_counts[0][0];
        assert_eq!((bid[7], bid[1]), (1, 1));
        assert_eq!(bid.iter().sum::<u64>(), 2);
        assert_eq!(r.overflow[0], [1, 1]);
    }
}
