/// A distinct realisation and the fraction of realisations equal to it.
#[derive(Debug, Clone)]
pub(crate) struct Group {
    pub data: Vec<f64>,
    pub weight: f64,
}

/// Merges bit-identical series, preserving first-seen order.
pub(crate) fn group_series(series: &[&[f64]]) -> Vec<Group> {
    let mut groups: Vec<(Vec<u64>, Vec<f64>, usize)> = Vec::new();
    for s in series {
        let bits: Vec<u64> = s.iter().map(|x| x.to_bits()).collect();
        match groups.iter_mut().find(|g| g.0 == bits) {
            Some(g) => g.2 += 1,
            None => groups.push((bits, s.to_vec(), 1)),
        }
    }
    let m = series.len() as f64;
    groups.into_iter().map(|(_, data, count)| Group { data, weight: count as f64 / m }).collect()
}
