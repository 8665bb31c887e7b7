//! Canonical event CSV: `ts_ms,event,side,price_tick,size`.
//!
//! `event` is one of `limit`, `cancel`, `market`; `side` is `bid` or `ask`.
//! A market order's side is the aggressor (`bid` buys) and its price column
//! is ignored on replay. A cancel removes the oldest resting order of equal
//! size at that price.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::book::Side;
use crate::error::{Error, Result};

pub const EVENT_HEADER: &str = "ts_ms,event,side,price_tick,size";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Limit,
    Cancel,
    Market,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Limit => "limit",
            Self::Cancel => "cancel",
            Self::Market => "market",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "limit" => Ok(Self::Limit),
            "cancel" => Ok(Self::Cancel),
            "market" => Ok(Self::Market),
            other => Err(format!("unknown event kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub ts_ms: u64,
    pub kind: EventKind,
    pub side: Side,
    pub price_tick: i64,
    pub size: u64,
}

fn parse_side(s: &str) -> std::result::Result<Side, String> {
    match s {
        "bid" => Ok(Side::Bid),
        "ask" => Ok(Side::Ask),
        other => Err(format!("unknown side `{other}`")),
    }
}

fn parse_line(line: &str) -> std::result::Result<EventRecord, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    }
    let ts_ms = fields[0].parse::<u64>().map_err(|e| format!("ts_ms: {e}"))?;
    let kind = fields[1].parse::<EventKind>()?;
    let side = parse_side(fields[2])?;
    let price_tick = fields[3].parse::<i64>().map_err(|e| format!("price_tick: {e}"))?;
    let size = fields[4].parse::<u64>().map_err(|e| format!("size: {e}"))?;
    if size == 0 {
        return Err("size must be at least 1".into());
    }
    Ok(EventRecord { ts_ms, kind, side, price_tick, size })
}

/// Parses an event file. Line numbers in errors are 1-based and count the
/// header. Blank lines are skipped.
pub fn read_events<R: BufRead>(input: R) -> Result<Vec<EventRecord>> {
    let mut lines = input.lines();
    match lines.next() {
        Some(header) => {
            let header = header?;
            if header.trim() != EVENT_HEADER {
                return Err(Error::Parse { line: 1, msg: format!("expected header `{EVENT_HEADER}`") });
            }
        }
        None => return Err(Error::Parse { line: 1, msg: "missing header".into() }),
    }
    let mut events = Vec::new();
    let mut last_ts = 0;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = parse_line(&line).map_err(|msg| Error::Parse { line: line_no, msg })?;
        if ev.ts_ms < last_ts {
            return Err(Error::Monotonicity { line: line_no });
        }
        last_ts = ev.ts_ms;
        events.push(ev);
    }
    Ok(events)
}

pub fn read_events_file(path: &std::path::Path) -> Result<Vec<EventRecord>> {
    read_events(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write_events<W: Write>(mut out: W, events: &[EventRecord]) -> Result<()> {
    writeln!(out, "{EVENT_HEADER}")?;
    for e in events {
        writeln!(out, "{},{},{},{},{}", e.ts_ms, e.kind, e.side.as_str(), e.price_tick, e.size)?;
    }
    Ok(())
}

pub fn write_events_file(path: &std::path::Path, events: &[EventRecord]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_events(&mut w, events)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_is_empty() {
        assert!(read_events(format!("{EVENT_HEADER}\n").as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn out_of_order_timestamps() {
        let text = format!("{EVENT_HEADER}\n10,limit,bid,100,1\n5,limit,ask,101,1\n");
        assert!(matches!(read_events(text.as_bytes()), Err(Error::Monotonicity { line: 3 })));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        for bad in ["1,limit,bid,100,0", "1,swap,bid,100,1", "1,limit,mid,100,1", "x,limit,bid,1,1", "1,limit,bid"] {
            let text = format!("{EVENT_HEADER}\n0,limit,bid,100,1\n{bad}\n");
            assert!(matches!(read_events(text.as_bytes()), Err(Error::Parse { line: 3, .. })), "{bad}");
        }
        assert!(matches!(read_events("ts,event\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn round_trip() {
        let events = vec![
            EventRecord { ts_ms: 0, kind: EventKind::Limit, side: Side::Bid, price_tick: -3, size: 7 },
            EventRecord { ts_ms: 0, kind: EventKind::Market, side: Side::Ask, price_tick: 0, size: 1 },
            EventRecord { ts_ms: 99, kind: EventKind::Cancel, side: Side::Bid, price_tick: -3, size: 7 },
        ];
        let mut buf = Vec::new();
        write_events(&mut buf, &events).unwrap();
        assert_eq!(read_events(buf.as_slice()).unwrap(), events);
        let mut again = Vec::new();
        write_events(&mut again, &read_events(buf.as_slice()).unwrap()).unwrap();
        assert_eq!(buf, again);
    }
}
