//! Turns a simulated day into the canonical event stream.

use super::events::{EventKind, EventRecord};
use crate::book::{apply_cancellations, apply_limit_orders, apply_market_orders, Ledger, Side};
use crate::error::{Error, Result};
use crate::sim::{BookSpec, SimResult};

/// Events of every interval of `result` plus the book they start from.
///
/// Events of interval `t` are stamped at the interval start plus 0, 1 and 2
/// ms for limit orders, cancellations and market orders. Cancels carry the
/// size of the order they remove. Replaying the stream from the returned
/// book with window matching reproduces the simulated snapshots.
pub fn simulated_events(result: &SimResult) -> Result<(Vec<EventRecord>, BookSpec)> {
    if result.activity.len() != result.config.intervals {
        return Err(Error::InvalidConfig("the activity log was not recorded".into()));
    }
    let interval_ms = (result.config.interval_seconds * 1000.0).round() as u64;
    let spec = result.config.initial_book.resolve(&result.params);
    let mut book = result.initial_book()?;
    let mut events = Vec::new();
    for (k, activity) in result.activity.iter().enumerate() {
        let t = k + 1;
        let start = k as u64 * interval_ms;
        let window = result.window(t)?;
        let mut ledger = Ledger::default();
        for passive in [true, false] {
            for side in Side::BOTH {
                for (idx, sizes) in activity.side(side).lo_sizes.iter().enumerate() {
                    if window.is_passive(idx) != passive {
                        continue;
                    }
                    let tick = window.tick(side, idx);
                    events.extend(sizes.iter().map(|&size| EventRecord {
                        ts_ms: start,
                        kind: EventKind::Limit,
                        side,
                        price_tick: tick,
                        size,
                    }));
                }
            }
        }
        apply_limit_orders(&mut book, &window, activity, &mut ledger);
        for side in Side::BOTH {
            for (idx, &count) in activity.side(side).cancel_counts.iter().enumerate() {
                let tick = window.tick(side, idx);
                if let Some(level) = book.level(side, tick) {
                    events.extend(level.orders().take(count as usize).map(|o| EventRecord {
                        ts_ms: start + 1,
                        kind: EventKind::Cancel,
                        side,
                        price_tick: tick,
                        size: o.size,
                    }));
                }
            }
        }
        apply_cancellations(&mut book, &window, activity, &mut ledger)?;
        for side in Side::BOTH {
            let best_opposite = book.best(side.opposite()).unwrap_or_default();
            events.extend(activity.side(side).mo_sizes.iter().map(|&size| EventRecord {
                ts_ms: start + 2,
                kind: EventKind::Market,
                side,
                price_tick: best_opposite,
                size,
            }));
        }
        apply_market_orders(&mut book, &window, activity, &mut ledger);
    }
    Ok((events, spec))
}
