use std::collections::BTreeSet;
use std::io::BufReader;

use lobforge::book::{apply_interval_with_ledger, apply_limit_orders, build_window, window_volumes, IntervalActivity, Ledger, Side};
use lobforge::calibrate::{
    crowding_distance, non_dominated_sort, polynomial_mutation, sbx_crossover, Bounds, CovarianceKernel, GenerationHistory,
    KernelSettings, ParamBound,
};
use lobforge::data::{read_events, write_events, EventKind, EventRecord};
use lobforge::rng::stream;
use lobforge::sim::{seed_initial_book, BookSpec, LevelSpec};
use lobforge::stochastic::sample_truncated_poisson;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn brute_force_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let dom = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y);
    (0..points.len())
        .map(|i| {
            // Rank is one more than the longest dominance chain ending at i.
            fn depth(i: usize, pts: &[Vec<f64>], memo: &mut Vec<Option<usize>>, dom: &dyn Fn(&[f64], &[f64]) -> bool) -> usize {
                if let Some(d) = memo[i] {
                    return d;
                }
                let d = (0..pts.len()).filter(|&j| dom(&pts[j], &pts[i])).map(|j| depth(j, pts, memo, dom) + 1).max().unwrap_or(1);
                memo[i] = Some(d);
                d
            }
            let mut memo = vec![None; points.len()];
            depth(i, points, &mut memo, &dom)
        })
        .collect()
}

fn objective_sets() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=3).prop_flat_map(|k| {
        prop::collection::vec(prop::collection::vec(prop_oneof![(0u8..5).prop_map(f64::from), -10.0..10.0f64], k), 1..=200)
    })
}

fn gene_bounds() -> impl Strategy<Value = Bounds> {
    prop::collection::vec((-100.0..100.0f64, 0.001..50.0f64), 1..6).prop_map(|v| {
        Bounds::new(v.into_iter().enumerate().map(|(i, (lo, w))| ParamBound { name: format!("g{i}"), lower: lo, upper: lo + w }).collect())
            .unwrap()
    })
}

fn spd(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (prop::collection::vec(-2.0..2.0f64, d * d), 0.01..3.0f64)
        .prop_map(move |(a, eps)| {
            let a = DMatrix::from_vec(d, d, a);
            &a * a.transpose() + DMatrix::identity(d, d) * eps
        })
}

/// A two-sided book with a few levels per side around 100/101.
fn books() -> impl Strategy<Value = BookSpec> {
    let level = (prop::bool::ANY, 0i64..6, 1u64..4, 1u64..5);
    (prop::collection::vec(level, 0..14), 1i64..4).prop_map(|(raw, spread)| {
        let mut levels = vec![
            LevelSpec { side: Side::Bid, tick: 100, count: 1, size: 2 },
            LevelSpec { side: Side::Ask, tick: 100 + spread, count: 1, size: 2 },
        ];
        for (bid, depth, count, size) in raw {
            let (side, tick) = if bid { (Side::Bid, 100 - depth) } else { (Side::Ask, 100 + spread + depth) };
            levels.push(LevelSpec { side, tick, count, size });
        }
        BookSpec { levels }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn sort_matches_dominance_depth(points in objective_sets()) {
        prop_assert_eq!(non_dominated_sort(&points), brute_force_ranks(&points));
    }

    #[test]
    fn crowding_marks_front_extremes(points in objective_sets()) {
        let ranks = non_dominated_sort(&points);
        let front: Vec<Vec<f64>> = points.iter().zip(&ranks).filter(|(_, &r)| r == 1).map(|(p, _)| p.clone()).collect();
        let cd = crowding_distance(&front);
        prop_assert_eq!(cd.len(), front.len());
        prop_assert!(cd.iter().all(|&c| c >= 0.0));
        if front.len() <= 2 {
            prop_assert!(cd.iter().all(|c| c.is_infinite()));
        }
    }

    #[test]
    fn operators_respect_bounds(bounds in gene_bounds(), seed in any::<u64>(), eta in 0.5..30.0f64) {
        let mut rng = stream(seed);
        let p1 = bounds.sample_uniform(&mut rng);
        let p2 = bounds.sample_uniform(&mut rng);
        let (c1, c2) = sbx_crossover(&p1, &p2, &bounds, eta, 1.0, &mut rng);
        prop_assert!(bounds.contains(&c1) && bounds.contains(&c2));
        let m = polynomial_mutation(&c1, &bounds, eta, 1.0, &mut rng);
        prop_assert!(bounds.contains(&m));
    }

    #[test]
    fn kernel_draws_are_spd(history in prop::collection::vec(prop::collection::vec((spd(3), 1usize..4), 1..5), 0..4), seed in any::<u64>()) {
        let kernel = CovarianceKernel::new(3, KernelSettings::default()).unwrap();
        let history: Vec<GenerationHistory> = history
            .into_iter()
            .map(|g| GenerationHistory { sigmas: g.iter().map(|x| x.0.clone()).collect(), ranks: g.iter().map(|x| x.1).collect() })
            .collect();
        let psi = kernel.psi_n(&history);
        prop_assert!(psi.clone().cholesky().is_some());
        let mut rng = stream(seed);
        for _ in 0..20 {
            let s = kernel.sample(&psi, &mut rng).unwrap();
            prop_assert!((&s - s.transpose()).abs().max() <= 1e-9 * s.abs().max());
            prop_assert!(s.cholesky().is_some());
        }
    }

    #[test]
    fn truncated_poisson_stays_in_support(lambda in 0.0..200.0f64, v in 0u64..40, seed in any::<u64>()) {
        let mut rng = stream(seed);
        for _ in 0..50 {
            prop_assert!(sample_truncated_poisson(lambda, v, &mut rng) <= v);
        }
    }

    #[test]
    fn ledger_accounts_for_every_share(spec in books(), lo in prop::collection::vec(prop::collection::vec(1u64..4, 0..3), 16),
                                       cancel_frac in prop::collection::vec(0.0..=1.0f64, 16),
                                       mo in prop::collection::vec(1u64..6, 0..4), mo_split in 0usize..4) {
        let book = seed_initial_book(&spec, 0.01).unwrap();
        let window = build_window(&book, 5, 3).unwrap();
        let mut activity = IntervalActivity::empty(8);
        for (k, sizes) in lo.into_iter().enumerate() {
            let side = if k < 8 { &mut activity.bid } else { &mut activity.ask };
            side.lo_counts[k % 8] = sizes.len() as u64;
            side.lo_sizes[k % 8] = sizes;
        }
        // Cancellations may only target orders resting after the limit stage.
        let mut staged = book.clone();
        apply_limit_orders(&mut staged, &window, &activity, &mut Ledger::default());
        let resting = window_volumes(&staged, &window);
        for (k, f) in cancel_frac.into_iter().enumerate() {
            let side = if k < 8 { Side::Bid } else { Side::Ask };
            let cap = resting.orders(side)[k % 8];
            let n = (f * cap as f64).floor() as u64;
            if k < 8 { activity.bid.cancel_counts[k] = n } else { activity.ask.cancel_counts[k - 8] = n }
        }
        let split = mo_split.min(mo.len());
        activity.bid.mo_sizes = mo[..split].to_vec();
        activity.bid.mo_count = split as u64;
        activity.ask.mo_sizes = mo[split..].to_vec();
        activity.ask.mo_count = (mo.len() - split) as u64;

        let before = book.clone();
        let (after, ledger) = apply_interval_with_ledger(&book, &window, &activity).unwrap();
        prop_assert_eq!(&book, &before);
        let mut keys: BTreeSet<(Side, i64)> = ledger.flows.keys().copied().collect();
        for side in Side::BOTH {
            keys.extend(book.levels(side).map(|(t, _)| (side, t)));
            keys.extend(after.levels(side).map(|(t, _)| (side, t)));
        }
        for (side, tick) in keys {
            let net = ledger.flows.get(&(side, tick)).map_or(0, |f| f.net());
            prop_assert_eq!(after.volume_at(side, tick) as i128 - book.volume_at(side, tick) as i128, net);
        }
        let submitted: u64 = ledger.flows.values().map(|f| f.submitted).sum();
        let lo_shares: u64 = [&activity.bid, &activity.ask].iter().flat_map(|a| a.lo_sizes.iter().flatten()).sum();
        prop_assert_eq!(submitted, lo_shares);
        let total = |b: &lobforge::book::BookState| b.total_volume(Side::Bid) as i128 + b.total_volume(Side::Ask) as i128;
        let net_all: i128 = ledger.flows.values().map(|f| f.net()).sum();
        prop_assert_eq!(total(&after) - total(&book), net_all);
        for side in Side::BOTH {
            for (_, level) in after.levels(side) {
                prop_assert!(level.order_count() > 0 && level.orders().all(|o| o.size > 0));
            }
        }
        if let (Some(b), Some(a)) = (after.best_bid(), after.best_ask()) {
            prop_assert!(b < a, "book left crossed at {} / {}", b, a);
        }
    }

    #[test]
    fn events_survive_csv(raw in prop::collection::vec((0u64..5000, 0usize..3, any::<bool>(), -1000i64..1000, 1u64..10_000), 0..300)) {
        let mut ts = 0;
        let events: Vec<EventRecord> = raw
            .into_iter()
            .map(|(dt, k, bid, tick, size)| {
                ts += dt;
                let kind = [EventKind::Limit, EventKind::Cancel, EventKind::Market][k];
                EventRecord { ts_ms: ts, kind, side: if bid { Side::Bid } else { Side::Ask }, price_tick: tick, size }
            })
            .collect();
        let mut buf = Vec::new();
        write_events(&mut buf, &events).unwrap();
        prop_assert_eq!(read_events(BufReader::new(buf.as_slice())).unwrap(), events);
    }
}
