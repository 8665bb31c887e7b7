use serde::{Deserialize, Serialize};

use crate::book::Side;
use crate::error::{Error, Result};
use crate::sim::Snapshot;

/// Data seen by the auxiliary models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxSeries {
    /// Mid-price log returns between consecutive sampling marks.
    pub returns: Vec<f64>,
    /// Share volume over the passive levels of each side, one value per
    /// interval boundary `1..=T`.
    pub vol_bid: Vec<f64>,
    pub vol_ask: Vec<f64>,
}

/// Samples the mid-price every `delta_minutes` (marks `j = 1..=K`, taking
/// the last snapshot at or before each mark) and collects passive-level
/// volumes at every interval boundary after the first.
pub fn transform(snapshots: &[Snapshot], l_d: usize, delta_minutes: u32) -> Result<AuxSeries> {
    if delta_minutes == 0 {
        return Err(Error::InvalidConfig("sampling step must be at least one minute".into()));
    }
    if snapshots.len() < 2 {
        return Err(Error::InsufficientData("need at least two snapshots".into()));
    }
    let step = 60.0 * delta_minutes as f64;
    let end = snapshots.last().expect("non-empty").time_s;
    let marks = (end / step + 1e-9).floor() as usize;
    if marks < 2 {
        return Err(Error::InsufficientData("day shorter than two sampling marks".into()));
    }
    let mut mids = Vec::with_capacity(marks);
    for j in 1..=marks {
        let cutoff = j as f64 * step;
        let idx = snapshots.partition_point(|s| s.time_s <= cutoff + 1e-9);
        let snap = &snapshots[idx.saturating_sub(1)];
        let mid = snap
            .mid()
            .ok_or_else(|| Error::DegenerateDay(format!("one-sided book at mark {j} (t = {})", snap.t)))?;
        mids.push(mid);
    }
    let returns = mids.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let vol = |side: Side| snapshots[1..].iter().map(|s| s.passive_volume(side, l_d) as f64).collect();
    Ok(AuxSeries { returns, vol_bid: vol(Side::Bid), vol_ask: vol(Side::Ask) })
}
