//! Two-sided limit order book with FIFO queues at integer price ticks.

mod interval;
mod window;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use interval::{
    apply_cancellations, apply_interval, apply_interval_with_ledger, apply_limit_orders,
    apply_market_orders, window_volumes, IntervalActivity, Ledger, LevelFlow, Phase,
    SideActivity, WindowVolumes,
};
pub use window::{build_window, ActiveWindow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Bid, Side::Ask];

    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bid => "bid",
            Side::Ask => "ask",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub size: u64,
    pub seq: u64,
}

/// FIFO queue of resting orders at one price, with its cached share total.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Level {
    orders: VecDeque<Order>,
    volume: u64,
}

impl Level {
    pub fn orders(&self) -> impl ExactSizeIterator<Item = &Order> {
        self.orders.iter()
    }

    pub fn order_count(&self) -> usize {
        self.orders.len()
    }

    pub fn volume(&self) -> u64 {
        self.volume
    }
}

/// One execution against a resting queue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fill {
    pub resting_side: Side,
    pub tick: i64,
    pub shares: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LimitOutcome {
    pub fills: Vec<Fill>,
    pub rested: u64,
    pub discarded: u64,
}

impl LimitOutcome {
    pub fn executed(&self) -> u64 {
        self.fills.iter().map(|f| f.shares).sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarketOutcome {
    pub fills: Vec<Fill>,
    pub unfilled: u64,
}

/// Inclusive tick range that an incoming order may trade against.
pub type TickBounds = Option<(i64, i64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct BookState {
    bids: BTreeMap<i64, Level>,
    asks: BTreeMap<i64, Level>,
    tick_size: f64,
    next_seq: u64,
}

impl BookState {
    pub fn new(tick_size: f64) -> Self {
        Self {
            bids: BTreeMap::new(),
            asks: BTreeMap::new(),
            tick_size,
            next_seq: 0,
        }
    }

    pub fn tick_size(&self) -> f64 {
        self.tick_size
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    fn ladder(&self, side: Side) -> &BTreeMap<i64, Level> {
        match side {
            Side::Bid => &self.bids,
            Side::Ask => &self.asks,
        }
    }

    fn ladder_mut(&mut self, side: Side) -> &mut BTreeMap<i64, Level> {
        match side {
            Side::Bid => &mut self.bids,
            Side::Ask => &mut self.asks,
        }
    }

    pub fn best_bid(&self) -> Option<i64> {
        self.bids.keys().next_back().copied()
    }

    pub fn best_ask(&self) -> Option<i64> {
        self.asks.keys().next().copied()
    }

    pub fn best(&self, side: Side) -> Option<i64> {
        match side {
            Side::Bid => self.best_bid(),
            Side::Ask => self.best_ask(),
        }
    }

    /// Levels of one side, ascending by tick.
    pub fn levels(&self, side: Side) -> impl DoubleEndedIterator<Item = (i64, &Level)> {
        self.ladder(side).iter().map(|(t, l)| (*t, l))
    }

    pub fn level(&self, side: Side, tick: i64) -> Option<&Level> {
        self.ladder(side).get(&tick)
    }

    pub fn volume_at(&self, side: Side, tick: i64) -> u64 {
        self.level(side, tick).map_or(0, Level::volume)
    }

    pub fn orders_at(&self, side: Side, tick: i64) -> usize {
        self.level(side, tick).map_or(0, Level::order_count)
    }

    pub fn total_volume(&self, side: Side) -> u64 {
        self.ladder(side).values().map(Level::volume).sum()
    }

    pub fn is_empty(&self, side: Side) -> bool {
        self.ladder(side).is_empty()
    }

    /// Appends an order to the back of a queue without matching.
    pub(crate) fn push_resting(&mut self, side: Side, tick: i64, size: u64) -> u64 {
        debug_assert!(size >= 1);
        let seq = self.next_seq;
        self.next_seq += 1;
        let level = self.ladder_mut(side).entry(tick).or_default();
        level.orders.push_back(Order { size, seq });
        level.volume += size;
        seq
    }

    fn would_cross(&self, side: Side, tick: i64) -> bool {
        match side {
            Side::Bid => self.best_ask().is_some_and(|a| a <= tick),
            Side::Ask => self.best_bid().is_some_and(|b| b >= tick),
        }
    }

    /// Consumes opposite-side volume in price-time priority for an order
    /// arriving on `aggressor`. Stops at the first level that is beyond
    /// `limit` or outside `bounds`. Returns the fills and the unmatched rest.
    fn sweep(
        &mut self,
        aggressor: Side,
        mut qty: u64,
        limit: Option<i64>,
        bounds: TickBounds,
    ) -> (Vec<Fill>, u64) {
        let resting_side = aggressor.opposite();
        let mut fills = Vec::new();
        while qty > 0 {
            let Some(tick) = self.best(resting_side) else {
                break;
            };
            let within_limit = match (aggressor, limit) {
                (_, None) => true,
                (Side::Bid, Some(p)) => tick <= p,
                (Side::Ask, Some(p)) => tick >= p,
            };
            let within_bounds = bounds.is_none_or(|(lo, hi)| (lo..=hi).contains(&tick));
            if !within_limit || !within_bounds {
                break;
            }
            let ladder = self.ladder_mut(resting_side);
            let level = ladder.get_mut(&tick).expect("best level exists");
            let mut taken = 0;
            while qty > 0 {
                let Some(front) = level.orders.front_mut() else {
                    break;
                };
                let take = front.size.min(qty);
                front.size -= take;
                qty -= take;
                taken += take;
                if front.size == 0 {
                    level.orders.pop_front();
                }
            }
            level.volume -= taken;
            if level.orders.is_empty() {
                ladder.remove(&tick);
            }
            fills.push(Fill {
                resting_side,
                tick,
                shares: taken,
            });
        }
        (fills, qty)
    }

    /// Submits a limit order. Crossing volume executes immediately against
    /// the opposite side within `bounds`; a residual rests unless it would
    /// still cross the book, in which case it is discarded.
    pub fn submit_limit(
        &mut self,
        side: Side,
        tick: i64,
        size: u64,
        bounds: TickBounds,
    ) -> LimitOutcome {
        let (fills, rest) = self.sweep(side, size, Some(tick), bounds);
        let mut out = LimitOutcome {
            fills,
            ..LimitOutcome::default()
        };
        if rest > 0 {
            if self.would_cross(side, tick) {
                out.discarded = rest;
            } else {
                self.push_resting(side, tick, rest);
                out.rested = rest;
            }
        }
        out
    }

    /// Executes a market order originating on `side` (bid = buy). Any size
    /// that cannot be filled within `bounds` is dropped.
    pub fn execute_market(&mut self, side: Side, size: u64, bounds: TickBounds) -> MarketOutcome {
        let (fills, unfilled) = self.sweep(side, size, None, bounds);
        MarketOutcome { fills, unfilled }
    }

    /// Removes the `count` highest-priority orders at a level in full.
    /// Returns the cancelled share volume.
    pub fn cancel_oldest(&mut self, side: Side, tick: i64, count: u64) -> Result<u64> {
        if count == 0 {
            return Ok(0);
        }
        let resting = self.orders_at(side, tick) as u64;
        if count > resting {
            return Err(Error::InconsistentActivity {
                side,
                tick,
                requested: count,
                resting,
            });
        }
        let ladder = self.ladder_mut(side);
        let level = ladder.get_mut(&tick).expect("level checked above");
        let mut shares = 0;
        for _ in 0..count {
            let order = level.orders.pop_front().expect("count checked above");
            shares += order.size;
        }
        level.volume -= shares;
        if level.orders.is_empty() {
            ladder.remove(&tick);
        }
        Ok(shares)
    }

    /// Removes the oldest order at a level whose remaining size equals `size`.
    pub fn cancel_matching(&mut self, side: Side, tick: i64, size: u64) -> Result<Order> {
        let ladder = self.ladder_mut(side);
        let Some(level) = ladder.get_mut(&tick) else {
            return Err(Error::InconsistentActivity {
                side,
                tick,
                requested: 1,
                resting: 0,
            });
        };
        let Some(pos) = level.orders.iter().position(|o| o.size == size) else {
            return Err(Error::InconsistentActivity {
                side,
                tick,
                requested: 1,
                resting: 0,
            });
        };
        let order = level.orders.remove(pos).expect("position is valid");
        level.volume -= order.size;
        if level.orders.is_empty() {
            ladder.remove(&tick);
        }
        Ok(order)
    }
}
