//! Columnar CSV for snapshots plus JSON metadata.
//!
//! A result directory holds `snapshots.csv`, `meta.json` and, when the
//! activity log was recorded, `activity.jsonl`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::engine::{EventCounts, EventTotals, SimResult, Snapshot};
use super::params::AgentParams;
use crate::book::IntervalActivity;
use crate::error::{Error, Result};

const FIXED: [&str; 14] = [
    "t", "time_s", "best_bid", "best_ask", "ref_bid", "ref_ask", "bid_ext", "ask_ext", "lo_bid", "lo_ask", "c_bid",
    "c_ask", "mo_bid", "mo_ask",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetadata {
    pub params: AgentParams,
    pub config: SimConfig,
    pub seed: u64,
    pub totals: EventTotals,
}

pub fn snapshot_header(l_p: usize, l_d: usize) -> String {
    let mut cols: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
    for side in ["bid", "ask"] {
        for s in (1 - l_d as i64)..=(l_p as i64) {
            cols.push(format!("{side}_L{s}"));
        }
    }
    cols.join(",")
}

fn opt(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_snapshots_csv<W: Write>(mut out: W, snapshots: &[Snapshot], l_p: usize, l_d: usize) -> Result<()> {
    writeln!(out, "{}", snapshot_header(l_p, l_d))?;
    let mut line = String::new();
    for s in snapshots {
        line.clear();
        let c = &s.counts;
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.t,
            s.time_s,
            opt(s.best_bid),
            opt(s.best_ask),
            s.ref_bid,
            s.ref_ask,
            s.bid_exterior,
            s.ask_exterior,
            c.lo_bid,
            c.lo_ask,
            c.c_bid,
            c.c_ask,
            c.mo_bid,
            c.mo_ask
        );
        for v in s.bid_volumes.iter().chain(&s.ask_volumes) {
            let _ = write!(line, ",{v}");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parses a snapshot CSV; returns the snapshots and the inferred `(l_p, l_d)`.
pub fn read_snapshots_csv<R: BufRead>(input: R) -> Result<(Vec<Snapshot>, usize, usize)> {
    let mut lines = input.lines();
    let header = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < FIXED.len() || cols[..FIXED.len()] != FIXED {
        return Err(Error::Parse { line: 1, msg: "not a snapshot header".into() });
    }
    let levels: Vec<i64> = cols[FIXED.len()..]
        .iter()
        .filter_map(|c| c.strip_prefix("bid_L"))
        .map(|s| s.parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse { line: 1, msg: format!("bad level column: {e}") })?;
    let l_t = levels.len();
    if l_t == 0 || cols.len() != FIXED.len() + 2 * l_t {
        return Err(Error::Parse { line: 1, msg: "level columns incomplete".into() });
    }
    let l_d = (1 - levels[0]) as usize;
    let l_p = *levels.last().expect("non-empty") as usize;
    if snapshot_header(l_p, l_d) != header.trim() {
        return Err(Error::Parse { line: 1, msg: "level columns out of order".into() });
    }

    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != cols.len() {
            return Err(Error::Parse { line: lineno, msg: format!("expected {} fields, got {}", cols.len(), f.len()) });
        }
        let err = |col: &str, e: &dyn std::fmt::Display| Error::Parse { line: lineno, msg: format!("{col}: {e}") };
        let int = |i: usize| f[i].parse::<i64>().map_err(|e| err(FIXED[i], &e));
        let uint = |i: usize| f[i].parse::<u64>().map_err(|e| err(cols[i], &e));
        let opt_int = |i: usize| if f[i].is_empty() { Ok(None) } else { int(i).map(Some) };
        let vols = |start: usize| (start..start + l_t).map(uint).collect::<Result<Vec<u64>>>();
        out.push(Snapshot {
            t: uint(0)? as usize,
            time_s: f[1].parse::<f64>().map_err(|e| err("time_s", &e))?,
            best_bid: opt_int(2)?,
            best_ask: opt_int(3)?,
            ref_bid: int(4)?,
            ref_ask: int(5)?,
            bid_exterior: uint(6)?,
            ask_exterior: uint(7)?,
            counts: EventCounts {
                lo_bid: uint(8)?,
                lo_ask: uint(9)?,
                c_bid: uint(10)?,
                c_ask: uint(11)?,
                mo_bid: uint(12)?,
                mo_ask: uint(13)?,
            },
            bid_volumes: vols(FIXED.len())?,
            ask_volumes: vols(FIXED.len() + l_t)?,
        });
    }
    Ok((out, l_p, l_d))
}

impl SimResult {
    pub fn metadata(&self) -> SimMetadata {
        SimMetadata {
            params: self.params.clone(),
            config: self.config.clone(),
            seed: self.config.seed,
            totals: self.totals.clone(),
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let file = BufWriter::new(fs::File::create(dir.join("snapshots.csv"))?);
        write_snapshots_csv(file, &self.snapshots, self.params.l_p, self.params.l_d)?;
        let meta = serde_json::to_string_pretty(&self.metadata())?;
        fs::write(dir.join("meta.json"), meta + "\n")?;
        let activity_path = dir.join("activity.jsonl");
        if self.activity.is_empty() {
            if activity_path.exists() {
                fs::remove_file(activity_path)?;
            }
        } else {
            let mut w = BufWriter::new(fs::File::create(activity_path)?);
            for a in &self.activity {
                serde_json::to_writer(&mut w, a)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta: SimMetadata = serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
        let file = BufReader::new(fs::File::open(dir.join("snapshots.csv"))?);
        let (snapshots, l_p, l_d) = read_snapshots_csv(file)?;
        if (l_p, l_d) != (meta.params.l_p, meta.params.l_d) {
            return Err(Error::InvalidConfig("snapshot levels disagree with metadata".into()));
        }
        let activity_path = dir.join("activity.jsonl");
        let mut activity = Vec::new();
        if activity_path.exists() {
            for line in BufReader::new(fs::File::open(activity_path)?).lines() {
                let line = line?;
                if !line.trim().is_empty() {
                    activity.push(serde_json::from_str::<IntervalActivity>(&line)?);
                }
            }
        }
        Ok(Self { params: meta.params, config: meta.config, snapshots, activity, totals: meta.totals })
    }
}
