use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::fdr::bh_fdr;
use super::rank::{midranks, TieSummary};
use super::{normal_two_sided, require_sample, Method, StatsError, TestResult};

/// Kruskal-Wallis H over `groups`, tie-corrected, with η² as the effect size.
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<TestResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups { need: 2, got: groups.len() });
    }
    for g in groups {
        require_sample(g, "group")?;
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let (ranks, ties) = midranks(&pooled);
    let n = pooled.len() as f64;
    let k = groups.len();
    let mut off = 0;
    let mut ss = 0.0;
    for g in groups {
        let r: f64 = ranks[off..off + g.len()].iter().sum();
        ss += r * r / g.len() as f64;
        off += g.len();
    }
    let h0 = 12.0 / (n * (n + 1.0)) * ss - 3.0 * (n + 1.0);
    let c = 1.0 - ties.sum_t3_minus_t / (n * n * n - n);
    let sizes = groups.iter().map(|g| g.len()).collect();
    let mut res = TestResult::new(Method::KruskalWallis, 0.0, sizes, ties);
    res.components.insert("df".into(), (k - 1) as f64);
    if c <= 0.0 || !c.is_finite() {
        res.degenerate = true;
        res.p_value = 1.0;
        res.notes.push("degenerate: all pooled values identical".into());
        return Ok(res);
    }
    // rounding can leave a tiny negative H when all mean ranks coincide
    let h = (h0 / c).max(0.0);
    res.statistic = h;
    res.p_value = chi2_sf(h, (k - 1) as f64);
    res.effect_size = eta_squared(h, k, pooled.len());
    Ok(res)
}

/// η² = (H − k + 1) / (N − k); undefined when N ≤ k.
pub fn eta_squared(h: f64, k: usize, n: usize) -> Option<f64> {
    (n > k).then(|| (h - k as f64 + 1.0) / (n - k) as f64)
}

pub fn chi2_sf(x: f64, df: f64) -> f64 {
    let d = ChiSquared::new(df).expect("df > 0");
    d.sf(x).clamp(0.0, 1.0)
}

/// Pairwise Dunn comparisons; all matrices are symmetric except `z`, which is antisymmetric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseMatrix {
    pub names: Vec<String>,
    pub z: Vec<Vec<f64>>,
    pub p_raw: Vec<Vec<f64>>,
    pub p_adjusted: Vec<Vec<f64>>,
    pub ties: TieSummary,
    pub degenerate: bool,
}

impl PairwiseMatrix {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Adjusted p-value for a pair of names.
    pub fn adjusted(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.p_adjusted[i][j])
    }
}

/// Dunn post-hoc test on pooled midranks with BH-adjusted p-values.
pub fn dunn_posthoc(names: &[String], groups: &[&[f64]]) -> Result<PairwiseMatrix, StatsError> {
    if groups.len() < 3 {
        return Err(StatsError::TooFewGroups { need: 3, got: groups.len() });
    }
    if names.len() != groups.len() {
        return Err(StatsError::Mismatch(format!("{} names for {} groups", names.len(), groups.len())));
    }
    for g in groups {
        require_sample(g, "group")?;
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let (ranks, ties) = midranks(&pooled);
    let n = pooled.len() as f64;
    let k = groups.len();
    let mut mean_rank = Vec::with_capacity(k);
    let mut off = 0;
    for g in groups {
        mean_rank.push(ranks[off..off + g.len()].iter().sum::<f64>() / g.len() as f64);
        off += g.len();
    }
    let base = n * (n + 1.0) / 12.0 - ties.sum_t3_minus_t / (12.0 * (n - 1.0));
    let degenerate = !(base > 0.0);

    let mut z = vec![vec![0.0; k]; k];
    let mut p_raw = vec![vec![1.0; k]; k];
    let mut flat = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let (zij, p) = if degenerate {
                (0.0, 1.0)
            } else {
                let se = (base * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
                let zij = (mean_rank[i] - mean_rank[j]) / se;
                (zij, normal_two_sided(zij.abs()))
            };
            z[i][j] = zij;
            z[j][i] = -zij;
            p_raw[i][j] = p;
            p_raw[j][i] = p;
            flat.push(p);
        }
    }
    let adj = bh_fdr(&flat)?;
    let mut p_adjusted = vec![vec![1.0; k]; k];
    let mut it = adj.into_iter();
    for i in 0..k {
        for j in i + 1..k {
            let p = it.next().expect("one adjusted value per pair");
            p_adjusted[i][j] = p;
            p_adjusted[j][i] = p;
        }
    }
    Ok(PairwiseMatrix {
        names: names.to_vec(),
        z,
        p_raw,
        p_adjusted,
        ties,
        degenerate,
    })
}
