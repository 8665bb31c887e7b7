//! Descriptive statistics of an event stream.

use serde::{Deserialize, Serialize};

use super::events::{EventKind, EventRecord};
use super::replay::{replay_events, Overflow, ReplayConfig};
use crate::error::{Error, Result};

/// Fewest intervals accepted for a correlation estimate.
pub const MIN_CORRELATION_INTERVALS: usize = 30;

/// Column labels for per-level series: bid levels then ask levels, each
/// from the deepest aggressive level to the deepest passive one.
pub fn level_labels(l_p: usize, l_d: usize) -> Vec<String> {
    ["bid", "ask"]
        .iter()
        .flat_map(|side| ((1 - l_d as i64)..=(l_p as i64)).map(move |s| format!("{side}_L{s}")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    /// Labels of the retained levels, in matrix order.
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    /// Levels dropped because their counts never varied.
    pub excluded: Vec<String>,
    pub intervals: usize,
    /// Orders outside the window, per side `[deep, aggressive]`.
    pub overflow: Overflow,
}

/// Pearson correlations between per-interval limit-order counts of every
/// level with non-zero variance.
pub fn count_correlation(lo_counts: &[[Vec<u64>; 2]], l_p: usize, l_d: usize) -> Result<CorrelationTable> {
    let n = lo_counts.len();
    if n < MIN_CORRELATION_INTERVALS {
        return Err(Error::InsufficientData(format!(
            "correlations need at least {MIN_CORRELATION_INTERVALS} intervals, got {n}"
        )));
    }
    let labels = level_labels(l_p, l_d);
    let levels = l_p + l_d;
    let column = |j: usize| -> Vec<f64> { lo_counts.iter().map(|c| c[j / levels][j % levels] as f64).collect() };
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for (j, label) in labels.iter().enumerate() {
        let col = column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let centred: Vec<f64> = col.iter().map(|x| x - mean).collect();
        let norm = centred.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            kept.push((label.clone(), centred.into_iter().map(|x| x / norm).collect::<Vec<f64>>()));
        } else {
            excluded.push(label.clone());
        }
    }
    let k = kept.len();
    let mut matrix = vec![vec![0.0; k]; k];
    for a in 0..k {
        matrix[a][a] = 1.0;
        for b in 0..a {
            let r = kept[a].1.iter().zip(&kept[b].1).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0);
            matrix[a][b] = r;
            matrix[b][a] = r;
        }
    }
    Ok(CorrelationTable {
        labels: kept.into_iter().map(|(l, _)| l).collect(),
        matrix,
        excluded,
        intervals: n,
        overflow: [[0; 2]; 2],
    })
}

/// Correlation of limit-order submission counts across window levels, with
/// levels attributed against each interval's starting reference prices.
pub fn intensity_correlation(events: &[EventRecord], config: &ReplayConfig) -> Result<CorrelationTable> {
    let replay = replay_events(events, config)?;
    let mut table = count_correlation(&replay.lo_counts, config.l_p, config.l_d)?;
    table.overflow = replay.overflow;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeHistogram {
    pub bin_width: u64,
    /// `counts[k]` holds sizes in `[k·w, (k+1)·w)`.
    pub counts: Vec<u64>,
}

impl SizeHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Lowest bin holding the largest count.
    pub fn mode_bin(&self) -> usize {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts.iter().position(|&c| c == max).unwrap_or(0)
    }

    pub fn bin_range(&self, k: usize) -> (u64, u64) {
        (k as u64 * self.bin_width, (k as u64 + 1) * self.bin_width)
    }
}

/// Histogram of limit-order sizes.
pub fn order_size_histogram(events: &[EventRecord], bin_width: u64) -> Result<SizeHistogram> {
    if bin_width == 0 {
        return Err(Error::InvalidConfig("bin width must be positive".into()));
    }
    let sizes: Vec<u64> = events.iter().filter(|e| e.kind == EventKind::Limit).map(|e| e.size).collect();
    if sizes.is_empty() {
        return Err(Error::InsufficientData("no limit orders to bin".into()));
    }
    let bins = (sizes.iter().max().expect("non-empty") / bin_width) as usize + 1;
    let mut counts = vec![0u64; bins];
    for s in sizes {
        counts[(s / bin_width) as usize] += 1;
    }
    Ok(SizeHistogram { bin_width, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::book::Side;

    fn lo(size: u64) -> EventRecord {
        EventRecord { ts_ms: 0, kind: EventKind::Limit, side: Side::Bid, price_tick: 1, size }
    }

    #[test]
    fn constant_sizes_fill_one_bin() {
        let mut events: Vec<EventRecord> = (0..50).map(|_| lo(100)).collect();
        events.push(EventRecord { kind: EventKind::Market, ..lo(7) });
        let h = order_size_histogram(&events, 10).unwrap();
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.total(), 50);
        assert_eq!(h.bin_range(h.mode_bin()), (100, 110));
        assert!(order_size_histogram(&events, 0).is_err());
        assert!(order_size_histogram(&events[50..], 5).is_err());
    }

    #[test]
    fn correlation_shape() {
        let counts: Vec<[Vec<u64>; 2]> = (0..40u64)
            .map(|t| [vec![t % 3, t % 5, 2], vec![t % 7, (t * t) % 11, t % 3]])
            .collect();
        let c = count_correlation(&counts, 2, 1).unwrap();
        assert_eq!(c.excluded, vec!["bid_L2".to_string()]);
        assert_eq!(c.labels.len(), 5);
        for i in 0..5 {
            assert_eq!(c.matrix[i][i], 1.0);
            for j in 0..5 {
                assert_eq!(c.matrix[i][j], c.matrix[j][i]);
            }
        }
        // bid_L0 and ask_L2 carry the same series.
        assert!((c.matrix[0][4] - 1.0).abs() < 1e-12);
        assert!(count_correlation(&counts[..29], 2, 1).is_err());
    }
}
