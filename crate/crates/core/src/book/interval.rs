use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ActiveWindow, BookState, Fill, Side};
use crate::error::{Error, Result};

/// Sampled activity of one book side over one interval. Level vectors are
/// indexed by window level index (relative level `-l_d+1` first).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SideActivity {
    pub lo_counts: Vec<u64>,
    pub lo_sizes: Vec<Vec<u64>>,
    pub cancel_counts: Vec<u64>,
    pub mo_count: u64,
    pub mo_sizes: Vec<u64>,
    pub lo_intensity: Vec<f64>,
    pub cancel_intensity: Vec<f64>,
    pub mo_intensity: f64,
}

impl SideActivity {
    pub fn empty(levels: usize) -> Self {
        Self {
            lo_counts: vec![0; levels],
            lo_sizes: vec![Vec::new(); levels],
            cancel_counts: vec![0; levels],
            mo_count: 0,
            mo_sizes: Vec::new(),
            lo_intensity: vec![0.0; levels],
            cancel_intensity: vec![0.0; levels],
            mo_intensity: 0.0,
        }
    }

    fn validate(&self, levels: usize) -> Result<()> {
        let shape_ok = self.lo_counts.len() == levels
            && self.lo_sizes.len() == levels
            && self.cancel_counts.len() == levels;
        if !shape_ok {
            return Err(Error::InvalidConfig(format!(
                "activity vectors must have {levels} levels"
            )));
        }
        let counts_ok = self
            .lo_counts
            .iter()
            .zip(&self.lo_sizes)
            .all(|(&n, s)| s.len() as u64 == n)
            && self.mo_sizes.len() as u64 == self.mo_count;
        if !counts_ok {
            return Err(Error::InvalidConfig(
                "order size lists disagree with counts".into(),
            ));
        }
        let sizes_ok = self
            .lo_sizes
            .iter()
            .flatten()
            .chain(&self.mo_sizes)
            .all(|&s| s >= 1);
        if !sizes_ok {
            return Err(Error::InvalidConfig("order sizes must be >= 1".into()));
        }
        Ok(())
    }

    pub fn total_lo(&self) -> u64 {
        self.lo_counts.iter().sum()
    }

    pub fn total_cancels(&self) -> u64 {
        self.cancel_counts.iter().sum()
    }
}

/// Everything sampled for one interval, both sides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalActivity {
    pub bid: SideActivity,
    pub ask: SideActivity,
}

impl IntervalActivity {
    pub fn empty(levels: usize) -> Self {
        Self {
            bid: SideActivity::empty(levels),
            ask: SideActivity::empty(levels),
        }
    }

    pub fn side(&self, side: Side) -> &SideActivity {
        match side {
            Side::Bid => &self.bid,
            Side::Ask => &self.ask,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut SideActivity {
        match side {
            Side::Bid => &mut self.bid,
            Side::Ask => &mut self.ask,
        }
    }
}

/// Share flows at one price level during one interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelFlow {
    pub submitted: u64,
    pub cancelled: u64,
    pub executed: u64,
    pub discarded: u64,
}

impl LevelFlow {
    /// Expected change of resting volume at the level.
    pub fn net(&self) -> i128 {
        self.submitted as i128
            - self.cancelled as i128
            - self.executed as i128
            - self.discarded as i128
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    PassiveLimit,
    AggressiveLimit,
    Cancel,
    Market,
}

/// Per-level accounting of one application of the update map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ledger {
    pub flows: BTreeMap<(Side, i64), LevelFlow>,
    pub phases: Vec<Phase>,
    pub mo_unfilled: [u64; 2],
}

impl Ledger {
    fn flow(&mut self, side: Side, tick: i64) -> &mut LevelFlow {
        self.flows.entry((side, tick)).or_default()
    }

    fn record_fills(&mut self, fills: &[Fill]) {
        for f in fills {
            self.flow(f.resting_side, f.tick).executed += f.shares;
        }
    }

    pub fn executed_shares(&self, side: Side) -> u64 {
        self.flows
            .iter()
            .filter(|((s, _), _)| *s == side)
            .map(|(_, f)| f.executed)
            .sum()
    }
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Bid => 0,
        Side::Ask => 1,
    }
}

fn apply_limit_phase(
    book: &mut BookState,
    window: &ActiveWindow,
    activity: &IntervalActivity,
    passive: bool,
    ledger: &mut Ledger,
) {
    ledger.phases.push(if passive {
        Phase::PassiveLimit
    } else {
        Phase::AggressiveLimit
    });
    for side in Side::BOTH {
        let bounds = Some(window.tick_range(side.opposite()));
        let act = activity.side(side);
        for (idx, sizes) in act.lo_sizes.iter().enumerate() {
            if window.is_passive(idx) != passive {
                continue;
            }
            let tick = window.tick(side, idx);
            for &size in sizes {
                let out = book.submit_limit(side, tick, size, bounds);
                let own = ledger.flow(side, tick);
                own.submitted += size;
                own.executed += out.executed();
                own.discarded += out.discarded;
                ledger.record_fills(&out.fills);
            }
        }
    }
}

/// Phases 1 and 2: passive then aggressive limit order arrivals.
pub fn apply_limit_orders(
    book: &mut BookState,
    window: &ActiveWindow,
    activity: &IntervalActivity,
    ledger: &mut Ledger,
) {
    apply_limit_phase(book, window, activity, true, ledger);
    apply_limit_phase(book, window, activity, false, ledger);
}

/// Phase 3: cancellations of the oldest orders per level.
pub fn apply_cancellations(
    book: &mut BookState,
    window: &ActiveWindow,
    activity: &IntervalActivity,
    ledger: &mut Ledger,
) -> Result<()> {
    ledger.phases.push(Phase::Cancel);
    for side in Side::BOTH {
        for (idx, &count) in activity.side(side).cancel_counts.iter().enumerate() {
            let tick = window.tick(side, idx);
            let shares = book.cancel_oldest(side, tick, count)?;
            ledger.flow(side, tick).cancelled += shares;
        }
    }
    Ok(())
}

/// Phase 4: market orders, bid side (buys) first.
pub fn apply_market_orders(
    book: &mut BookState,
    window: &ActiveWindow,
    activity: &IntervalActivity,
    ledger: &mut Ledger,
) {
    ledger.phases.push(Phase::Market);
    for side in Side::BOTH {
        let bounds = Some(window.tick_range(side.opposite()));
        for &size in &activity.side(side).mo_sizes {
            let out = book.execute_market(side, size, bounds);
            ledger.record_fills(&out.fills);
            ledger.mo_unfilled[side_index(side)] += out.unfilled;
        }
    }
}

/// The update map: applies one interval of activity to a copy of `book`.
pub fn apply_interval(
    book: &BookState,
    window: &ActiveWindow,
    activity: &IntervalActivity,
) -> Result<BookState> {
    apply_interval_with_ledger(book, window, activity).map(|(b, _)| b)
}

pub fn apply_interval_with_ledger(
    book: &BookState,
    window: &ActiveWindow,
    activity: &IntervalActivity,
) -> Result<(BookState, Ledger)> {
    let levels = window.levels();
    activity.bid.validate(levels)?;
    activity.ask.validate(levels)?;
    let mut next = book.clone();
    let mut ledger = Ledger::default();
    apply_limit_orders(&mut next, window, activity, &mut ledger);
    apply_cancellations(&mut next, window, activity, &mut ledger)?;
    apply_market_orders(&mut next, window, activity, &mut ledger);
    Ok((next, ledger))
}

/// Orders and shares resting at each modelled level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowVolumes {
    pub bid_orders: Vec<u64>,
    pub bid_shares: Vec<u64>,
    pub ask_orders: Vec<u64>,
    pub ask_shares: Vec<u64>,
}

impl WindowVolumes {
    pub fn orders(&self, side: Side) -> &[u64] {
        match side {
            Side::Bid => &self.bid_orders,
            Side::Ask => &self.ask_orders,
        }
    }

    pub fn shares(&self, side: Side) -> &[u64] {
        match side {
            Side::Bid => &self.bid_shares,
            Side::Ask => &self.ask_shares,
        }
    }
}

pub fn window_volumes(book: &BookState, window: &ActiveWindow) -> WindowVolumes {
    let scan = |side: Side| -> (Vec<u64>, Vec<u64>) {
        (0..window.levels())
            .map(|i| {
                let tick = window.tick(side, i);
                (book.orders_at(side, tick) as u64, book.volume_at(side, tick))
            })
            .unzip()
    };
    let (bid_orders, bid_shares) = scan(Side::Bid);
    let (ask_orders, ask_shares) = scan(Side::Ask);
    WindowVolumes {
        bid_orders,
        bid_shares,
        ask_orders,
        ask_shares,
    }
}
