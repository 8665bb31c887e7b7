use serde::{Deserialize, Serialize};

use super::{BookState, Side};
use crate::error::{Error, Result};

/// The actively modelled price levels for one interval.
///
/// Relative level `s` runs over `-l_d+1 ..= l_p`. Bid levels are counted
/// downwards from the reference ask and ask levels upwards from the reference
/// bid, so `s >= 1` is passive and `s <= 0` would execute immediately if the
/// reference prices held.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveWindow {
    pub ref_bid: i64,
    pub ref_ask: i64,
    pub l_p: usize,
    pub l_d: usize,
}

impl ActiveWindow {
    pub fn new(ref_bid: i64, ref_ask: i64, l_p: usize, l_d: usize) -> Result<Self> {
        if l_p == 0 || l_d == 0 {
            return Err(Error::InvalidConfig(format!(
                "level counts must be positive (l_p={l_p}, l_d={l_d})"
            )));
        }
        Ok(Self {
            ref_bid,
            ref_ask,
            l_p,
            l_d,
        })
    }

    /// Number of modelled levels per side.
    pub fn levels(&self) -> usize {
        self.l_p + self.l_d
    }

    pub fn relative_level(&self, index: usize) -> i64 {
        index as i64 - self.l_d as i64 + 1
    }

    pub fn is_passive(&self, index: usize) -> bool {
        self.relative_level(index) >= 1
    }

    pub fn tick(&self, side: Side, index: usize) -> i64 {
        let s = self.relative_level(index);
        match side {
            Side::Bid => self.ref_ask - s,
            Side::Ask => self.ref_bid + s,
        }
    }

    pub fn index_of(&self, side: Side, tick: i64) -> Option<usize> {
        let s = match side {
            Side::Bid => self.ref_ask - tick,
            Side::Ask => tick - self.ref_bid,
        };
        let idx = s + self.l_d as i64 - 1;
        (0..self.levels() as i64).contains(&idx).then_some(idx as usize)
    }

    /// Inclusive tick range covered on one side.
    pub fn tick_range(&self, side: Side) -> (i64, i64) {
        let lo_s = -(self.l_d as i64) + 1;
        let hi_s = self.l_p as i64;
        match side {
            Side::Bid => (self.ref_ask - hi_s, self.ref_ask - lo_s),
            Side::Ask => (self.ref_bid + lo_s, self.ref_bid + hi_s),
        }
    }

    pub fn contains(&self, side: Side, tick: i64) -> bool {
        let (lo, hi) = self.tick_range(side);
        (lo..=hi).contains(&tick)
    }
}

pub fn build_window(book: &BookState, l_p: usize, l_d: usize) -> Result<ActiveWindow> {
    let ref_bid = book.best_bid().ok_or(Error::EmptySide(Side::Bid))?;
    let ref_ask = book.best_ask().ok_or(Error::EmptySide(Side::Ask))?;
    ActiveWindow::new(ref_bid, ref_ask, l_p, l_d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn book() -> BookState {
        let mut b = BookState::new(0.01);
        b.push_resting(Side::Bid, 1000, 1);
        b.push_resting(Side::Ask, 1002, 1);
        b
    }

    #[test]
    fn reference_layout() {
        let w = build_window(&book(), 5, 3).unwrap();
        assert_eq!(w.levels(), 8);
        let asks: Vec<i64> = (0..8).map(|i| w.tick(Side::Ask, i)).collect();
        assert_eq!(asks, (998..=1005).collect::<Vec<_>>());
        let bids: Vec<i64> = (0..8).map(|i| w.tick(Side::Bid, i)).collect();
        assert_eq!(bids, (997..=1004).rev().collect::<Vec<_>>());
        assert_eq!(w.tick_range(Side::Bid), (997, 1004));
        assert_eq!(w.tick_range(Side::Ask), (998, 1005));
    }

    #[test]
    fn index_round_trip() {
        let w = build_window(&book(), 5, 3).unwrap();
        for side in Side::BOTH {
            for i in 0..w.levels() {
                assert_eq!(w.index_of(side, w.tick(side, i)), Some(i));
            }
        }
        assert_eq!(w.index_of(Side::Ask, 1006), None);
        assert_eq!(w.index_of(Side::Bid, 1005), None);
        assert!(w.is_passive(3) && !w.is_passive(2));
    }

    #[test]
    fn empty_side_is_rejected() {
        let mut b = BookState::new(0.01);
        b.push_resting(Side::Bid, 1000, 1);
        assert!(matches!(build_window(&b, 5, 3), Err(Error::EmptySide(Side::Ask))));
    }
}
