use super::StatsError;

/// Benjamini-Hochberg step-up adjustment; output is in input order.
pub fn bh_fdr(p: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(&bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(StatsError::InvalidProbability(bad));
    }
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut adj = vec![0.0; m];
    let mut running = 1.0f64;
    for (pos, &i) in order.iter().enumerate().rev() {
        // m / j ≥ 1, so never let rounding push the value below p
        let scaled = (p[i] * m as f64 / (pos + 1) as f64).max(p[i]).min(1.0);
        running = running.min(scaled);
        adj[i] = running;
    }
    Ok(adj)
}
