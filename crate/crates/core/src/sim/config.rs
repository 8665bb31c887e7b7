use serde::{Deserialize, Serialize};

use super::params::AgentParams;
use super::Snapshot;
use crate::book::{BookState, Side};
use crate::error::{Error, Result};
use crate::stochastic::OrderSizeModel;

/// Which order-size law a parameter set is expected to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeVariant {
    Constant,
    GammaMixture,
}

/// Whether the limit-order skewness is one shared scalar or a per-level vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkewVariant {
    Scalar,
    PerLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelVariant {
    pub sizes: SizeVariant,
    pub skew: SkewVariant,
}

impl Default for ModelVariant {
    fn default() -> Self {
        Self { sizes: SizeVariant::Constant, skew: SkewVariant::Scalar }
    }
}

impl ModelVariant {
    pub fn check(&self, params: &AgentParams) -> Result<()> {
        let sizes_ok = matches!(
            (self.sizes, &params.order_size_model),
            (SizeVariant::Constant, OrderSizeModel::Constant { .. })
                | (SizeVariant::GammaMixture, OrderSizeModel::GammaMixture { .. })
        );
        if !sizes_ok {
            return Err(Error::InvalidConfig(format!("order size model does not match variant {:?}", self.sizes)));
        }
        if self.skew == SkewVariant::Scalar && params.skew_lo.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidConfig("scalar skew variant requires equal per-level skewness".into()));
        }
        Ok(())
    }
}

/// One block of identical resting orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub side: Side,
    pub tick: i64,
    pub count: u64,
    pub size: u64,
}

/// Explicit initial book, seeded in list order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BookSpec {
    pub levels: Vec<LevelSpec>,
}

impl BookSpec {
    /// Contiguous symmetric book: `depth` levels per side from the best
    /// quotes outward, listed level-then-side.
    pub fn symmetric(best_bid: i64, spread: i64, depth: usize, orders_per_level: u64, size: u64) -> Self {
        let best_ask = best_bid + spread;
        let mut levels = Vec::with_capacity(2 * depth);
        for k in 0..depth as i64 {
            levels.push(LevelSpec { side: Side::Bid, tick: best_bid - k, count: orders_per_level, size });
            levels.push(LevelSpec { side: Side::Ask, tick: best_ask + k, count: orders_per_level, size });
        }
        Self { levels }
    }

    /// Rebuilds the modelled window and the exterior aggregate recorded in a
    /// snapshot. A level volume `V` becomes `⌊V/unit⌋` orders of `unit`
    /// shares plus one remainder order; exterior volume is placed one tick
    /// beyond the window edge.
    pub fn from_snapshot(snapshot: &Snapshot, l_p: usize, l_d: usize, unit: u64) -> Result<Self> {
        if unit == 0 {
            return Err(Error::InvalidConfig("unit order size must be positive".into()));
        }
        let l_t = l_p + l_d;
        if snapshot.bid_volumes.len() != l_t || snapshot.ask_volumes.len() != l_t {
            return Err(Error::LengthMismatch(snapshot.bid_volumes.len(), l_t));
        }
        let window = crate::book::ActiveWindow::new(snapshot.ref_bid, snapshot.ref_ask, l_p, l_d)?;
        let mut levels = Vec::new();
        let mut push = |side: Side, tick: i64, volume: u64| {
            if volume / unit > 0 {
                levels.push(LevelSpec { side, tick, count: volume / unit, size: unit });
            }
            if !volume.is_multiple_of(unit) {
                levels.push(LevelSpec { side, tick, count: 1, size: volume % unit });
            }
        };
        for i in 0..l_t {
            push(Side::Bid, window.tick(Side::Bid, i), snapshot.bid_volumes[i]);
            push(Side::Ask, window.tick(Side::Ask, i), snapshot.ask_volumes[i]);
        }
        push(Side::Bid, window.tick_range(Side::Bid).0 - 1, snapshot.bid_exterior);
        push(Side::Ask, window.tick_range(Side::Ask).1 + 1, snapshot.ask_exterior);
        Ok(Self { levels })
    }
}

fn default_best_bid() -> i64 {
    10_000
}
fn default_spread() -> i64 {
    1
}
fn default_orders_per_level() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialBook {
    /// Symmetric book. `depth` defaults to `l_p`, `order_size` to the
    /// rounded-up mean of the order-size model.
    Default {
        #[serde(default = "default_best_bid")]
        best_bid: i64,
        #[serde(default = "default_spread")]
        spread: i64,
        #[serde(default)]
        depth: Option<usize>,
        #[serde(default = "default_orders_per_level")]
        orders_per_level: u64,
        #[serde(default)]
        order_size: Option<u64>,
    },
    Explicit(BookSpec),
}

impl Default for InitialBook {
    fn default() -> Self {
        Self::Default {
            best_bid: default_best_bid(),
            spread: default_spread(),
            depth: None,
            orders_per_level: default_orders_per_level(),
            order_size: None,
        }
    }
}

impl InitialBook {
    pub fn resolve(&self, params: &AgentParams) -> BookSpec {
        match self {
            Self::Explicit(spec) => spec.clone(),
            Self::Default { best_bid, spread, depth, orders_per_level, order_size } => {
                let size = order_size.unwrap_or_else(|| (params.order_size_model.mean().ceil() as u64).max(1));
                BookSpec::symmetric(*best_bid, *spread, depth.unwrap_or(params.l_p), *orders_per_level, size)
            }
        }
    }
}

fn default_interval_seconds() -> f64 {
    10.0
}
fn default_tick_size() -> f64 {
    0.005
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of intervals `T`.
    pub intervals: usize,
    #[serde(default = "default_interval_seconds")]
    pub interval_seconds: f64,
    #[serde(default = "default_tick_size")]
    pub tick_size: f64,
    #[serde(default)]
    pub initial_book: InitialBook,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub quote_to_trade_ratio: Option<f64>,
    #[serde(default)]
    pub variant: Option<ModelVariant>,
    /// Keep the per-interval activity log in the result.
    #[serde(default = "default_true")]
    pub record_activity: bool,
}

impl SimConfig {
    pub fn new(intervals: usize, seed: u64) -> Self {
        Self {
            intervals,
            interval_seconds: default_interval_seconds(),
            tick_size: default_tick_size(),
            initial_book: InitialBook::default(),
            seed,
            quote_to_trade_ratio: None,
            variant: None,
            record_activity: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals == 0 {
            return Err(Error::InvalidConfig("at least one interval is required".into()));
        }
        if !(self.interval_seconds > 0.0) || !(self.tick_size > 0.0) {
            return Err(Error::InvalidConfig("interval_seconds and tick_size must be positive".into()));
        }
        if let Some(q) = self.quote_to_trade_ratio {
            if !(q > 1.0) {
                return Err(Error::InvalidRatio(q));
            }
        }
        Ok(())
    }
}

/// Builds the initial book; sequence numbers follow list order.
pub fn seed_initial_book(spec: &BookSpec, tick_size: f64) -> Result<BookState> {
    let mut book = BookState::new(tick_size);
    for level in &spec.levels {
        if level.size == 0 {
            return Err(Error::InvalidConfig(format!("zero order size at tick {}", level.tick)));
        }
        for _ in 0..level.count {
            book.push_resting(level.side, level.tick, level.size);
        }
    }
    if let (Some(best_bid), Some(best_ask)) = (book.best_bid(), book.best_ask()) {
        if best_bid >= best_ask {
            return Err(Error::CrossedSpec { best_bid, best_ask });
        }
    }
    Ok(book)
}
