use super::rank::midranks;
use super::{normal_two_sided, require_sample, Method, StatsError, TestResult};

/// Mann-Whitney U for `x` against `y`, normal approximation with tie-corrected
/// variance. `continuity` subtracts ½ from |U − μ| before standardizing.
pub fn mann_whitney_u(x: &[f64], y: &[f64], continuity: bool) -> Result<TestResult, StatsError> {
    require_sample(x, "x")?;
    require_sample(y, "y")?;
    let (n1, n2) = (x.len(), y.len());
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let nf = n1f + n2f;
    let u = r1 - n1f * (n1f + 1.0) / 2.0;
    let mu = n1f * n2f / 2.0;
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - ties.sum_t3_minus_t / (nf * (nf - 1.0)));

    let mut res = TestResult::new(Method::MannWhitneyU, u, vec![n1, n2], ties);
    res.effect_size = Some(cliffs_delta(x, y)?);
    if var <= 0.0 || (nf - 1.0) == 0.0 {
        // every pooled value identical (or a single observation each)
        res.degenerate = true;
        res.p_value = 1.0;
        res.notes.push("degenerate: all pooled values identical".into());
        return Ok(res);
    }
    let cc = if continuity { 0.5 } else { 0.0 };
    let dev = ((u - mu).abs() - cc).max(0.0);
    let z = dev / var.sqrt() * (u - mu).signum();
    res.p_value = normal_two_sided(dev / var.sqrt());
    res.components.insert("z".into(), z);
    res.components.insert("u_y".into(), n1f * n2f - u);
    Ok(res)
}

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic tail p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    require_sample(x, "x")?;
    require_sample(y, "y")?;
    let d = ks_statistic(x, y);
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let ne = n1 * n2 / (n1 + n2);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut res = TestResult::new(Method::KolmogorovSmirnov, d, vec![x.len(), y.len()], Default::default());
    res.p_value = kolmogorov_q(lambda);
    res.components.insert("lambda".into(), lambda);
    Ok(res)
}

/// sup |F̂x − F̂y| over the pooled points, by a merge of the sorted samples.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    d
}

/// Kolmogorov survival function Q(λ) = 2 Σ (−1)^{j−1} exp(−2 j² λ²).
///
/// Below λ = 1.18 the alternating series converges slowly, so the
/// equivalent theta-function form of the CDF is summed instead.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            cdf += (c * m * m).exp();
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let a = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = sign * (a * jf * jf).exp();
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Cliff's δ = (#{x > y} − #{x < y}) / (n₁n₂), counted by binary search over sorted `y`.
pub fn cliffs_delta(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    require_sample(x, "x")?;
    require_sample(y, "y")?;
    let mut ys = y.to_vec();
    ys.sort_by(f64::total_cmp);
    let mut diff: i64 = 0;
    for &v in x {
        let below = ys.partition_point(|&w| w < v);
        let not_above = ys.partition_point(|&w| w <= v);
        diff += below as i64 - (ys.len() - not_above) as i64;
    }
    Ok(diff as f64 / (x.len() as f64 * y.len() as f64))
}
