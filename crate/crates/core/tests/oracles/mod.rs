//! Direct-definition reference implementations used as test oracles.
//!
//! Everything here is deliberately naive (pairwise counts, full enumeration,
//! dense textbook graph algorithms) so it shares no code path with the library.
#![allow(dead_code)]

/// U for `x`: pairs with x > y plus half the ties.
pub fn brute_u(x: &[f64], y: &[f64]) -> f64 {
    let mut u = 0.0;
    for a in x {
        for b in y {
            if a > b {
                u += 1.0;
            } else if a == b {
                u += 0.5;
            }
        }
    }
    u
}

pub fn brute_delta(x: &[f64], y: &[f64]) -> f64 {
    let mut diff: i64 = 0;
    for a in x {
        for b in y {
            if a > b {
                diff += 1;
            } else if a < b {
                diff -= 1;
            }
        }
    }
    diff as f64 / (x.len() as f64 * y.len() as f64)
}

fn ecdf(s: &[f64], v: f64) -> f64 {
    s.iter().filter(|&&w| w <= v).count() as f64 / s.len() as f64
}

pub fn brute_ks(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .chain(y)
        .map(|&v| (ecdf(x, v) - ecdf(y, v)).abs())
        .fold(0.0, f64::max)
}

/// Midrank of every value by counting smaller and equal values.
pub fn brute_midranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let below = values.iter().filter(|&&w| w < v).count() as f64;
            let equal = values.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Σ (t³ − t) over distinct values.
pub fn brute_tie_sum(values: &[f64]) -> f64 {
    let mut seen: Vec<f64> = Vec::new();
    let mut s = 0.0;
    for &v in values {
        if seen.contains(&v) {
            continue;
        }
        seen.push(v);
        let t = values.iter().filter(|&&w| w == v).count() as f64;
        s += t * t * t - t;
    }
    s
}

fn group_rank_sums(groups: &[Vec<f64>]) -> (Vec<f64>, f64, f64) {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let ranks = brute_midranks(&pooled);
    let mut sums = Vec::new();
    let mut off = 0;
    for g in groups {
        sums.push(ranks[off..off + g.len()].iter().sum());
        off += g.len();
    }
    (sums, pooled.len() as f64, brute_tie_sum(&pooled))
}

pub fn brute_h(groups: &[Vec<f64>]) -> f64 {
    let (sums, n, ties) = group_rank_sums(groups);
    let mut ss = 0.0;
    for (r, g) in sums.iter().zip(groups) {
        ss += r * r / g.len() as f64;
    }
    let h0 = 12.0 / (n * (n + 1.0)) * ss - 3.0 * (n + 1.0);
    let c = 1.0 - ties / (n * n * n - n);
    if c <= 0.0 {
        0.0
    } else {
        (h0 / c).max(0.0)
    }
}

pub fn brute_dunn_z(groups: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (sums, n, ties) = group_rank_sums(groups);
    let k = groups.len();
    let base = n * (n + 1.0) / 12.0 - ties / (12.0 * (n - 1.0));
    let mut z = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            if base > 0.0 {
                let mi = sums[i] / groups[i].len() as f64;
                let mj = sums[j] / groups[j].len() as f64;
                let se = (base * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
                z[i][j] = (mi - mj) / se;
                z[j][i] = -z[i][j];
            }
        }
    }
    z
}

/// Two-sided p of T⁺ by enumerating all 2ⁿ sign assignments (zeros dropped).
pub fn sign_flip_p(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|&v| v != 0.0).collect();
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = brute_midranks(&abs);
    let total: f64 = ranks.iter().sum();
    let obs: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let dev = (obs - total / 2.0).abs();
    let n = d.len();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let t: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (t - total / 2.0).abs() >= dev - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

/// Step-up adjusted values computed by hand in exact rational arithmetic,
/// then rounded once to the nearest double.
pub const BH_FIXTURES: &[(&[f64], &[f64])] = &[
    (&[0.01, 0.02, 0.03], &[0.03, 0.03, 0.03]),
    (&[0.5], &[0.5]),
    (&[1.0, 1.0], &[1.0, 1.0]),
    (&[0.04, 0.01], &[0.04, 0.02]),
    (&[0.001, 0.008, 0.039, 0.041, 0.042, 0.06, 0.074, 0.205, 0.212, 0.216], &[0.01, 0.04, 0.084, 0.084, 0.084, 0.1, 0.10571428571428572, 0.216, 0.216, 0.216]),
    (&[0.2, 0.2, 0.2, 0.2], &[0.2, 0.2, 0.2, 0.2]),
    (&[0.0, 0.5, 1.0], &[0.0, 0.75, 1.0]),
    (&[0.9, 0.8, 0.7, 0.6, 0.5], &[0.9, 0.9, 0.9, 0.9, 0.9]),
    (&[0.05, 0.05, 0.01, 0.5], &[0.06666666666666667, 0.06666666666666667, 0.04, 0.5]),
    (&[0.0001, 0.3, 0.0002, 0.6, 0.0003], &[0.0005, 0.375, 0.0005, 0.6, 0.0005]),
    (&[1.0, 0.0, 0.25, 0.75], &[1.0, 0.0, 0.5, 1.0]),
    (&[0.012, 0.024, 0.036, 0.048, 0.06, 0.072], &[0.072, 0.072, 0.072, 0.072, 0.072, 0.072]),
    (&[0.6, 0.01], &[0.6, 0.02]),
    (&[0.03, 0.02, 0.01], &[0.03, 0.03, 0.03]),
    (&[0.99, 0.98, 0.001], &[0.99, 0.99, 0.003]),
    (&[0.97, 0.154, 0.404, 0.666, 0.049, 0.074, 0.84], &[0.97, 0.35933333333333334, 0.707, 0.9324, 0.259, 0.259, 0.97]),
    (&[0.096, 0.374, 0.596, 0.059, 0.931, 0.519, 0.219, 0.038, 0.088, 0.444], &[0.24, 0.6233333333333333, 0.6622222222222223, 0.24, 0.931, 0.64875, 0.438, 0.24, 0.24, 0.6342857142857142]),
    (&[0.071, 0.246, 0.092, 0.564, 0.434, 0.06, 0.846, 0.579], &[0.24533333333333332, 0.492, 0.24533333333333332, 0.6617142857142857, 0.6617142857142857, 0.24533333333333332, 0.846, 0.6617142857142857]),
    (&[0.97, 0.228, 0.645], &[0.97, 0.684, 0.9675]),
    (&[0.596, 0.97, 0.063, 0.59, 0.599, 0.406, 0.05, 0.999, 0.226, 0.047, 0.57, 0.879], &[0.7986666666666666, 0.999, 0.252, 0.7986666666666666, 0.7986666666666666, 0.7986666666666666, 0.252, 0.999, 0.678, 0.252, 0.7986666666666666, 0.999]),
];

/// Largest gap, in units in the last place, between two equal-length slices.
pub fn max_ulps(a: &[f64], b: &[f64]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.to_bits() as i64 - y.to_bits() as i64).unsigned_abs())
        .max()
        .unwrap_or(0)
}

/// Closed-form one-way ANOVA variance components for a balanced design:
/// σ²_e = MSW, σ²_c = max(0, (MSB − MSW) / n).
pub fn anova_balanced(groups: &[Vec<f64>]) -> (f64, f64) {
    let j = groups.len() as f64;
    let n = groups[0].len() as f64;
    assert!(groups.iter().all(|g| g.len() as f64 == n), "design must be balanced");
    let means: Vec<f64> = groups.iter().map(|g| g.iter().sum::<f64>() / n).collect();
    let grand = means.iter().sum::<f64>() / j;
    let msb = n * means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (j - 1.0);
    let msw = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum::<f64>()
        / (j * (n - 1.0));
    (((msb - msw) / n).max(0.0), msw)
}

/// Balanced random-intercept data: `cities` groups of `per_city` draws.
pub fn simulate_city_design(seed: u64, cities: usize, per_city: usize, var_c: f64, var_e: f64) -> Vec<Vec<f64>> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let b = Normal::new(0.0, var_c.sqrt()).unwrap();
    let e = Normal::new(0.0, var_e.sqrt()).unwrap();
    (0..cities)
        .map(|_| {
            let u = if var_c > 0.0 { b.sample(&mut rng) } else { 0.0 };
            (0..per_city).map(|_| 0.1 + u + e.sample(&mut rng)).collect()
        })
        .collect()
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let d = a[k] - b[k];
        s += d * d;
    }
    s.sqrt()
}

/// Sorted MST edge weights over mutual reachability, via a full distance
/// matrix, per-row sorting for core distances and textbook O(n²) Prim.
/// The sorted weight multiset is the same for every MST of a graph.
pub fn brute_mst_weights(rows: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    let n = rows.len();
    let d: Vec<Vec<f64>> = rows.iter().map(|a| rows.iter().map(|b| euclid(a, b)).collect()).collect();
    let core: Vec<f64> = d
        .iter()
        .map(|row| {
            let mut s = row.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            s[min_samples.min(n) - 1]
        })
        .collect();
    let mr = |i: usize, j: usize| d[i][j].max(core[i]).max(core[j]);
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    key[0] = 0.0;
    let mut weights = Vec::new();
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| key[a].partial_cmp(&key[b]).unwrap())
            .unwrap();
        in_tree[u] = true;
        weights.push(key[u]);
        for v in 0..n {
            if !in_tree[v] && mr(u, v) < key[v] {
                key[v] = mr(u, v);
            }
        }
    }
    // the first pick is the root with key 0, which is not an edge
    weights.remove(0);
    weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
    weights
}

/// `per_blob` isotropic Gaussian points around each center.
pub fn gaussian_blobs(seed: u64, centers: &[Vec<f64>], per_blob: usize, sigma: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            rows.push(center.iter().map(|m| m + noise.sample(&mut rng)).collect());
            truth.push(c);
        }
    }
    (rows, truth)
}

/// Three centers in `dim` dimensions, pairwise √2 apart.
pub fn three_centers(dim: usize) -> Vec<Vec<f64>> {
    (0..3)
        .map(|c| (0..dim).map(|k| if k == c { 1.0 } else { 0.0 }).collect())
        .collect()
}
