//! Pareto dominance, fast non-dominated sorting and crowding distance
//! (all objectives minimised).

use crate::error::{Error, Result};

/// `a` dominates `b`: no worse everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Rank of every point; rank 1 is the non-dominated front.
pub fn non_dominated_sort(objectives: &[Vec<f64>]) -> Vec<usize> {
    let n = objectives.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates_unchecked(&objectives[i], &objectives[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_unchecked(&objectives[j], &objectives[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut ranks = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut rank = 1;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            ranks[i] = rank;
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        current = next;
        rank += 1;
    }
    ranks
}

/// Standard NSGA-II crowding distance within one front. Boundary points of
/// each objective get `+inf`; an objective with zero range adds nothing.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let k = front[0].len();
    let mut dist = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for m in 0..k {
        order.sort_by(|&a, &b| front[a][m].total_cmp(&front[b][m]).then(a.cmp(&b)));
        let lo = front[order[0]][m];
        let hi = front[order[n - 1]][m];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range > 0.0 {
            for w in 1..n - 1 {
                dist[order[w]] += (front[order[w + 1]][m] - front[order[w - 1]][m]) / range;
            }
        }
    }
    dist
}

/// Area dominated by a set of bi-objective points and bounded by `reference`.
pub fn hypervolume_2d(points: &[Vec<f64>], reference: [f64; 2]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .map(|p| (p[0], p[1]))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut ceiling = reference[1];
    for (x, y) in pts {
        if y < ceiling {
            area += (reference[0] - x) * (ceiling - y);
            ceiling = y;
        }
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn peel(points: &[Vec<f64>]) -> Vec<usize> {
        let mut ranks = vec![0usize; points.len()];
        let mut rank = 1;
        while ranks.contains(&0) {
            let open: Vec<usize> = (0..points.len()).filter(|&i| ranks[i] == 0).collect();
            let front: Vec<usize> = open
                .iter()
                .copied()
                .filter(|&i| !open.iter().any(|&j| dominates_unchecked(&points[j], &points[i])))
                .collect();
            for i in front {
                ranks[i] = rank;
            }
            rank += 1;
        }
        ranks
    }

    #[test]
    fn dominance_cases() {
        assert!(dominates(&[1.0, 1.0], &[2.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 3.0], &[2.0, 2.0]).unwrap());
        assert!(!dominates(&[2.0, 2.0], &[1.0, 3.0]).unwrap());
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(matches!(dominates(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch(1, 2))));
    }

    #[test]
    fn small_sorts() {
        let pts = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0]];
        assert_eq!(non_dominated_sort(&pts), vec![1, 1, 2]);
        assert_eq!(non_dominated_sort(&vec![vec![1.0, 1.0]; 4]), vec![1; 4]);
    }

    #[test]
    fn sort_matches_peeling() {
        let mut rng = stream(21);
        for _ in 0..30 {
            let pts: Vec<Vec<f64>> = (0..50).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
            assert_eq!(non_dominated_sort(&pts), peel(&pts));
        }
    }

    #[test]
    fn crowding_cases() {
        assert_eq!(crowding_distance(&[vec![0.0, 1.0], vec![1.0, 0.0]]), vec![f64::INFINITY; 2]);
        let d = crowding_distance(&[vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]]);
        assert_eq!(d[1], 2.0);
        let d = crowding_distance(&[vec![0.0, 5.0], vec![1.0, 5.0], vec![3.0, 5.0], vec![4.0, 5.0]]);
        assert_eq!(d[1], 0.75);
        assert_eq!(d[2], 0.75);
    }

    #[test]
    fn hypervolume_single_point() {
        assert_eq!(hypervolume_2d(&[vec![1.0, 2.0]], [5.0, 5.0]), 12.0);
        let hv = hypervolume_2d(&[vec![1.0, 2.0], vec![2.0, 1.0]], [5.0, 5.0]);
        assert_eq!(hv, 12.0 + 3.0);
    }
}
