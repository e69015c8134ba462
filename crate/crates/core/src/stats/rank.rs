use serde::Serialize;

/// Tie groups of size > 1 in a pooled sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TieSummary {
    pub groups: usize,
    pub tied_values: usize,
    /// Σ (t³ − t) over tie groups.
    pub sum_t3_minus_t: f64,
}

/// Midranks (1-based) of `values`, plus the tie summary of the pooled sample.
pub fn midranks(values: &[f64]) -> (Vec<f64>, TieSummary) {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut ties = TieSummary::default();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        let t = (j - i) as f64;
        if j - i > 1 {
            ties.groups += 1;
            ties.tied_values += j - i;
            ties.sum_t3_minus_t += t * t * t - t;
        }
        i = j;
    }
    (ranks, ties)
}
