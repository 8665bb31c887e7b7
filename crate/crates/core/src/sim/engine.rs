use serde::{Deserialize, Serialize};

use super::config::{seed_initial_book, SimConfig};
use super::params::{apply_quote_to_trade, AgentParams};
use crate::book::{
    apply_cancellations, apply_limit_orders, apply_market_orders, window_volumes, ActiveWindow, BookState,
    IntervalActivity, Ledger, Side,
};
use crate::error::{Error, Result};
use crate::rng::{child, SimRng};
use crate::stochastic::{
    intensity_transform, normal_cdf, sample_poisson_vector, sample_truncated_poisson, OrderSizeSampler, SkewT,
};

/// Orders submitted, cancelled and sent to market during one interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub lo_bid: u64,
    pub lo_ask: u64,
    pub c_bid: u64,
    pub c_ask: u64,
    pub mo_bid: u64,
    pub mo_ask: u64,
}

impl EventCounts {
    fn from_activity(a: &IntervalActivity) -> Self {
        Self {
            lo_bid: a.bid.total_lo(),
            lo_ask: a.ask.total_lo(),
            c_bid: a.bid.total_cancels(),
            c_ask: a.ask.total_cancels(),
            mo_bid: a.bid.mo_count,
            mo_ask: a.ask.mo_count,
        }
    }
}

/// Book state at an interval boundary, seen through the window anchored at
/// that boundary's reference prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub time_s: f64,
    pub best_bid: Option<i64>,
    pub best_ask: Option<i64>,
    /// Reference prices anchoring the next interval's window. Equal to the
    /// best quotes unless a side is empty, in which case the previous
    /// reference is carried over.
    pub ref_bid: i64,
    pub ref_ask: i64,
    pub bid_exterior: u64,
    pub ask_exterior: u64,
    /// Events of the interval ending at this boundary (zero for `t = 0`).
    pub counts: EventCounts,
    /// Share volume per window level index.
    pub bid_volumes: Vec<u64>,
    pub ask_volumes: Vec<u64>,
}

impl Snapshot {
    /// Mid-price in ticks when both sides are quoted.
    pub fn mid(&self) -> Option<f64> {
        match (self.best_bid, self.best_ask) {
            (Some(b), Some(a)) => Some(0.5 * (b + a) as f64),
            _ => None,
        }
    }

    pub fn volumes(&self, side: Side) -> &[u64] {
        match side {
            Side::Bid => &self.bid_volumes,
            Side::Ask => &self.ask_volumes,
        }
    }

    /// Total share volume over passive levels `s = 1..=l_p`.
    pub fn passive_volume(&self, side: Side, l_d: usize) -> u64 {
        self.volumes(side)[l_d..].iter().sum()
    }

    pub fn capture(book: &BookState, window: &ActiveWindow, t: usize, time_s: f64, counts: EventCounts) -> Self {
        let vols = window_volumes(book, window);
        let exterior = |side: Side| {
            book.levels(side)
                .filter(|(tick, _)| !window.contains(side, *tick))
                .map(|(_, level)| level.volume())
                .sum()
        };
        Self {
            t,
            time_s,
            best_bid: book.best_bid(),
            best_ask: book.best_ask(),
            ref_bid: window.ref_bid,
            ref_ask: window.ref_ask,
            bid_exterior: exterior(Side::Bid),
            ask_exterior: exterior(Side::Ask),
            counts,
            bid_volumes: vols.bid_shares,
            ask_volumes: vols.ask_shares,
        }
    }
}

/// Realised totals over the whole day, indexed `[bid, ask]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTotals {
    pub lo_orders: [u64; 2],
    pub lo_shares: [u64; 2],
    pub cancel_orders: [u64; 2],
    pub cancel_shares: [u64; 2],
    pub mo_orders: [u64; 2],
    pub mo_shares: [u64; 2],
    pub mo_unfilled: [u64; 2],
    pub discarded_shares: [u64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Parameters actually simulated (after any quote-to-trade overlay).
    pub params: AgentParams,
    pub config: SimConfig,
    /// `L_0, …, L_T`.
    pub snapshots: Vec<Snapshot>,
    /// Activity of intervals `1..=T`; empty unless recording was requested.
    pub activity: Vec<IntervalActivity>,
    pub totals: EventTotals,
}

impl SimResult {
    pub fn mid_prices(&self) -> Vec<Option<f64>> {
        self.snapshots.iter().map(Snapshot::mid).collect()
    }

    /// Window used for interval `t` (1-based), anchored at snapshot `t − 1`.
    pub fn window(&self, t: usize) -> Result<ActiveWindow> {
        let s = &self.snapshots[t - 1];
        ActiveWindow::new(s.ref_bid, s.ref_ask, self.params.l_p, self.params.l_d)
    }

    pub fn initial_book(&self) -> Result<BookState> {
        seed_initial_book(&self.config.initial_book.resolve(&self.params), self.config.tick_size)
    }
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Bid => 0,
        Side::Ask => 1,
    }
}

/// Random stream for one sampling step of one interval. Separate streams
/// keep, e.g., the cancellation draws of interval `t` independent of how
/// many uniforms the market-order sizes of earlier intervals consumed.
fn step_rng(seed: u64, t: usize, step: u64) -> SimRng {
    child(seed, ((t as u64) << 4) | step)
}

const LO_STEP: u64 = 0;
const LO_SIZE_STEP: u64 = 2;
const CANCEL_STEP: u64 = 3;
const MO_STEP: u64 = 5;
const MO_SIZE_STEP: u64 = 7;

pub(crate) fn next_refs(book: &BookState, prev: (i64, i64)) -> (i64, i64) {
    match (book.best_bid(), book.best_ask()) {
        (Some(b), Some(a)) => (b, a),
        (Some(b), None) => (b, prev.1.max(b + 1)),
        (None, Some(a)) => (prev.0.min(a - 1), a),
        (None, None) => prev,
    }
}

struct Kernels<'a> {
    params: &'a AgentParams,
    lo: SkewT,
    mo: SkewT,
    sizes: OrderSizeSampler,
    lo_base: Vec<f64>,
    cancel_base: Vec<f64>,
}

impl Kernels<'_> {
    fn sample_limit_orders(&self, seed: u64, t: usize, activity: &mut IntervalActivity) {
        let mut size_rng = step_rng(seed, t, LO_SIZE_STEP);
        for side in Side::BOTH {
            let mut rng = step_rng(seed, t, LO_STEP + side_index(side) as u64);
            let gamma = self.lo.sample(&mut rng);
            let lambda = intensity_transform(&gamma, &self.lo_base);
            let counts = sample_poisson_vector(&lambda, &mut rng);
            let act = activity.side_mut(side);
            act.lo_sizes = counts.iter().map(|&n| (0..n).map(|_| self.sizes.sample(&mut size_rng)).collect()).collect();
            act.lo_counts = counts;
            act.lo_intensity = lambda;
        }
    }

    fn sample_cancellations(
        &self,
        seed: u64,
        t: usize,
        book: &BookState,
        window: &ActiveWindow,
        activity: &mut IntervalActivity,
    ) {
        let resting = window_volumes(book, window);
        for side in Side::BOTH {
            let mut rng = step_rng(seed, t, CANCEL_STEP + side_index(side) as u64);
            let gamma = self.lo.sample(&mut rng);
            let lambda = intensity_transform(&gamma, &self.cancel_base);
            let caps = resting.orders(side);
            let act = activity.side_mut(side);
            act.cancel_counts = lambda.iter().zip(caps).map(|(&l, &v)| sample_truncated_poisson(l, v, &mut rng)).collect();
            act.cancel_intensity = lambda;
        }
    }

    fn sample_market_orders(
        &self,
        seed: u64,
        t: usize,
        book: &BookState,
        window: &ActiveWindow,
        activity: &mut IntervalActivity,
    ) {
        let resting = window_volumes(book, window);
        let l_d = self.params.l_d;
        let mut size_rng = step_rng(seed, t, MO_SIZE_STEP);
        for side in Side::BOTH {
            let mut rng = step_rng(seed, t, MO_STEP + side_index(side) as u64);
            let available: u64 = resting.orders(side.opposite())[l_d..].iter().sum();
            let gamma = self.mo.sample(&mut rng)[0];
            let lambda = self.params.mu0_mo * normal_cdf(gamma);
            let count = sample_truncated_poisson(lambda, available, &mut rng);
            let act = activity.side_mut(side);
            act.mo_count = count;
            act.mo_sizes = (0..count).map(|_| self.sizes.sample(&mut size_rng)).collect();
            act.mo_intensity = lambda;
        }
    }
}

fn accumulate(totals: &mut EventTotals, activity: &IntervalActivity, ledger: &Ledger) {
    for side in Side::BOTH {
        let k = side_index(side);
        let act = activity.side(side);
        totals.lo_orders[k] += act.total_lo();
        totals.lo_shares[k] += act.lo_sizes.iter().flatten().sum::<u64>();
        totals.cancel_orders[k] += act.total_cancels();
        totals.mo_orders[k] += act.mo_count;
        totals.mo_shares[k] += act.mo_sizes.iter().sum::<u64>();
        totals.mo_unfilled[k] += ledger.mo_unfilled[k];
    }
    for ((side, _), flow) in &ledger.flows {
        let k = side_index(*side);
        totals.cancel_shares[k] += flow.cancelled;
        totals.discarded_shares[k] += flow.discarded;
    }
}

/// Simulates one trading day of `config.intervals` intervals.
pub fn simulate(theta: &AgentParams, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    theta.validate()?;
    if let Some(variant) = &config.variant {
        variant.check(theta)?;
    }
    let params = match config.quote_to_trade_ratio {
        Some(q) => apply_quote_to_trade(theta, q)?,
        None => theta.clone(),
    };
    let kernels = Kernels {
        params: &params,
        lo: SkewT::new(&params.lo_skew_t())?,
        mo: SkewT::new(&params.mo_skew_t())?,
        sizes: params.order_size_model.sampler()?,
        lo_base: params.lo_baselines(),
        cancel_base: params.cancel_baselines(),
    };
    let mut book = seed_initial_book(&config.initial_book.resolve(&params), config.tick_size)?;
    let mut refs = (
        book.best_bid().ok_or(Error::EmptySide(Side::Bid))?,
        book.best_ask().ok_or(Error::EmptySide(Side::Ask))?,
    );
    let (l_p, l_d) = (params.l_p, params.l_d);
    let seed = config.seed;
    let mut window = ActiveWindow::new(refs.0, refs.1, l_p, l_d)?;
    let mut snapshots = Vec::with_capacity(config.intervals + 1);
    snapshots.push(Snapshot::capture(&book, &window, 0, 0.0, EventCounts::default()));
    let mut log = Vec::new();
    let mut totals = EventTotals::default();

    for t in 1..=config.intervals {
        let mut activity = IntervalActivity::empty(params.levels());
        let mut ledger = Ledger::default();
        kernels.sample_limit_orders(seed, t, &mut activity);
        apply_limit_orders(&mut book, &window, &activity, &mut ledger);
        kernels.sample_cancellations(seed, t, &book, &window, &mut activity);
        apply_cancellations(&mut book, &window, &activity, &mut ledger)?;
        kernels.sample_market_orders(seed, t, &book, &window, &mut activity);
        apply_market_orders(&mut book, &window, &activity, &mut ledger);

        accumulate(&mut totals, &activity, &ledger);
        refs = next_refs(&book, refs);
        window = ActiveWindow::new(refs.0, refs.1, l_p, l_d)?;
        let time_s = t as f64 * config.interval_seconds;
        snapshots.push(Snapshot::capture(&book, &window, t, time_s, EventCounts::from_activity(&activity)));
        if config.record_activity {
            log.push(activity);
        }
    }
    Ok(SimResult { params, config: config.clone(), snapshots, activity: log, totals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::book::apply_interval;
    use crate::sim::ReferenceParams;
    use crate::stochastic::OrderSizeModel;

    fn params(scale: f64) -> AgentParams {
        let sigma = (0..8).map(|i| (0..8).map(|j| if i == j { 0.8 } else { 0.0 }).collect()).collect();
        let r = ReferenceParams {
            mu0_lo_passive: 30.0 * scale,
            mu0_lo_direct: 8.0 * scale,
            mu0_mo: 5.0 * scale,
            gamma0: -0.2,
            nu: 30.0,
            sigma_mo: 1.8,
            sigma,
        };
        AgentParams::from_reference(&r, 5, 3, OrderSizeModel::Constant { size: 1 })
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SimConfig::new(200, 5);
        let a = simulate(&params(1.0), &cfg).unwrap();
        let b = simulate(&params(1.0), &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate(&params(1.0), &SimConfig::new(200, 6)).unwrap();
        assert_ne!(a.snapshots, c.snapshots);
    }

    #[test]
    fn vanishing_intensity_freezes_book() {
        let res = simulate(&params(1e-12), &SimConfig::new(50, 1)).unwrap();
        let first = &res.snapshots[0];
        for s in &res.snapshots {
            assert_eq!(s.bid_volumes, first.bid_volumes);
            assert_eq!(s.ask_volumes, first.ask_volumes);
            assert_eq!((s.best_bid, s.best_ask), (first.best_bid, first.best_ask));
        }
    }

    #[test]
    fn activity_replays_through_update_map() {
        let res = simulate(&params(1.0), &SimConfig::new(150, 9)).unwrap();
        let mut book = res.initial_book().unwrap();
        for t in 1..=150 {
            let window = res.window(t).unwrap();
            book = apply_interval(&book, &window, &res.activity[t - 1]).unwrap();
            let refs = next_refs(&book, (window.ref_bid, window.ref_ask));
            let next = ActiveWindow::new(refs.0, refs.1, 5, 3).unwrap();
            let snap = Snapshot::capture(&book, &next, t, t as f64 * 10.0, res.snapshots[t].counts);
            assert_eq!(snap, res.snapshots[t]);
        }
    }

    #[test]
    fn cancellations_never_exceed_resting() {
        let res = simulate(&params(4.0), &SimConfig::new(300, 2)).unwrap();
        let mut book = res.initial_book().unwrap();
        for t in 1..=300 {
            let window = res.window(t).unwrap();
            let act = &res.activity[t - 1];
            let mut ledger = Ledger::default();
            apply_limit_orders(&mut book, &window, act, &mut ledger);
            let resting = window_volumes(&book, &window);
            for side in Side::BOTH {
                for (c, v) in act.side(side).cancel_counts.iter().zip(resting.orders(side)) {
                    assert!(c <= v);
                }
            }
            apply_cancellations(&mut book, &window, act, &mut ledger).unwrap();
            apply_market_orders(&mut book, &window, act, &mut ledger);
        }
    }

    #[test]
    fn snapshots_cover_every_boundary() {
        let res = simulate(&params(1.0), &SimConfig::new(40, 3)).unwrap();
        assert_eq!(res.snapshots.len(), 41);
        assert_eq!(res.activity.len(), 40);
        assert_eq!(res.snapshots[40].time_s, 400.0);
        let lo: u64 = res.snapshots.iter().map(|s| s.counts.lo_bid).sum();
        assert_eq!(lo, res.totals.lo_orders[0]);
    }
}
