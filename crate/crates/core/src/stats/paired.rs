use serde::{Deserialize, Serialize};

use super::rank::midranks;
use super::{normal_two_sided, Method, StatsError, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroMethod {
    /// Drop zero differences before ranking.
    #[default]
    Wilcox,
    /// Rank zeros with the rest, then discard their ranks.
    Pratt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    /// Exact sign-flip distribution up to `EXACT_MAX_N` ranked pairs, normal beyond.
    #[default]
    Auto,
    Exact,
    Normal,
}

pub const EXACT_MAX_N: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonOptions {
    pub zero_method: ZeroMethod,
    pub p_method: PMethod,
    pub continuity: bool,
}

impl Default for WilcoxonOptions {
    fn default() -> Self {
        WilcoxonOptions {
            zero_method: ZeroMethod::Wilcox,
            p_method: PMethod::Auto,
            continuity: true,
        }
    }
}

/// Signed-rank test on paired differences `d = a − b`.
///
/// The reported statistic is min(T⁺, T⁻); both sums are kept in `components`.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)], opts: WilcoxonOptions) -> Result<TestResult, StatsError> {
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
    wilcoxon_differences(&diffs, opts)
}

pub fn wilcoxon_differences(diffs: &[f64], opts: WilcoxonOptions) -> Result<TestResult, StatsError> {
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(StatsError::NonFinite("differences"));
    }
    let n_zero = diffs.iter().filter(|&&d| d == 0.0).count();
    let n_nonzero = diffs.len() - n_zero;
    if n_nonzero == 0 {
        return Err(StatsError::Degenerate("no nonzero differences".into()));
    }
    let ranked: Vec<f64> = match opts.zero_method {
        ZeroMethod::Wilcox => diffs.iter().copied().filter(|&d| d != 0.0).collect(),
        ZeroMethod::Pratt => diffs.to_vec(),
    };
    let abs: Vec<f64> = ranked.iter().map(|d| d.abs()).collect();
    let (all_ranks, _) = midranks(&abs);
    // signed items only; Pratt zeros keep their slot in the ranking but carry no sign
    let signed: Vec<(f64, f64)> = ranked
        .iter()
        .zip(&all_ranks)
        .filter(|(d, _)| **d != 0.0)
        .map(|(d, r)| (*d, *r))
        .collect();
    let nonzero_abs: Vec<f64> = signed.iter().map(|(d, _)| d.abs()).collect();
    let (_, ties) = midranks(&nonzero_abs);

    let t_plus: f64 = signed.iter().filter(|(d, _)| *d > 0.0).map(|(_, r)| r).sum();
    let t_minus: f64 = signed.iter().filter(|(d, _)| *d < 0.0).map(|(_, r)| r).sum();
    let stat = t_plus.min(t_minus);

    let mut res = TestResult::new(Method::WilcoxonSignedRank, stat, vec![diffs.len()], ties);
    res.components.insert("t_plus".into(), t_plus);
    res.components.insert("t_minus".into(), t_minus);
    res.components.insert("n_zero".into(), n_zero as f64);
    res.components.insert("n_ranked".into(), signed.len() as f64);
    let total = t_plus + t_minus;
    res.components.insert("rank_biserial".into(), (t_plus - t_minus) / total);

    let exact = match opts.p_method {
        PMethod::Exact => true,
        PMethod::Normal => false,
        PMethod::Auto => signed.len() <= EXACT_MAX_N,
    };
    if exact {
        let ranks: Vec<f64> = signed.iter().map(|(_, r)| *r).collect();
        res.p_value = exact_sign_flip_p(&ranks, t_plus);
        res.notes.push("p: exact sign-flip distribution".into());
    } else {
        let (mean, var) = null_moments(all_ranks.len(), n_zero, opts.zero_method, ties.sum_t3_minus_t);
        let cc = if opts.continuity { 0.5 } else { 0.0 };
        let dev = ((t_plus - mean).abs() - cc).max(0.0);
        let z = dev / var.sqrt();
        res.p_value = normal_two_sided(z);
        res.components.insert("z".into(), z * (t_plus - mean).signum());
        res.notes.push("p: normal approximation".into());
    }
    if opts.zero_method == ZeroMethod::Pratt {
        res.notes.push("zero differences: pratt".into());
    }
    Ok(res)
}

/// Null mean and tie-corrected variance of T⁺.
fn null_moments(n_ranked: usize, n_zero: usize, zm: ZeroMethod, tie_sum: f64) -> (f64, f64) {
    let tri = |n: f64| n * (n + 1.0) / 4.0;
    let sq = |n: f64| n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    let n = n_ranked as f64;
    let (mut mean, mut var) = (tri(n), sq(n));
    if zm == ZeroMethod::Pratt {
        let z = n_zero as f64;
        mean -= tri(z);
        var -= sq(z);
    }
    (mean, var - tie_sum / 48.0)
}

/// Two-sided exact p of the observed T⁺ under independent sign flips.
///
/// Midranks are multiples of ½, so doubled ranks are integers and the
/// distribution is a subset-sum count.
fn exact_sign_flip_p(ranks: &[f64], t_plus: f64) -> f64 {
    let r2: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = r2.iter().sum();
    // probability mass of each doubled-rank sum; halving per step keeps it
    // exact (dyadic) for the sizes the auto rule uses
    let mut mass = vec![0.0f64; total + 1];
    mass[0] = 1.0;
    let mut reach = 0;
    for &r in &r2 {
        reach += r;
        for s in (0..=reach).rev() {
            let from = if s >= r { mass[s - r] } else { 0.0 };
            mass[s] = 0.5 * (mass[s] + from);
        }
    }
    let obs = (2.0 * t_plus).round() as i64;
    let dev = (2 * obs - total as i64).abs();
    let p: f64 = mass
        .iter()
        .enumerate()
        .filter(|(s, _)| (2 * *s as i64 - total as i64).abs() >= dev)
        .map(|(_, m)| *m)
        .sum();
    p.min(1.0)
}
