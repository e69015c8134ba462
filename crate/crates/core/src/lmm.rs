//! Random-intercept linear mixed model fitted by profiled (RE)ML.
//!
//! Model: `y = Xβ + Zb + ε` with one random intercept per city,
//! `b ~ N(0, σ²_c I)` and `ε ~ N(0, σ²_e I)`. The fixed part is an intercept
//! plus treatment dummies for each unit (state or country) after the
//! reference level. Writing `λ = σ²_c / σ²_e`, the marginal covariance is
//! `σ²_e V` with `V = I + λ ZZᵀ`, which is block diagonal by city with
//! `V_j⁻¹ = I − c_j 11ᵀ`, `c_j = λ / (1 + λ n_j)` and `|V_j| = 1 + λ n_j`.
//! For fixed λ both β and σ²_e have closed forms, leaving a 1-D search.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LOG_LAMBDA_MIN: f64 = -12.0;
pub const LOG_LAMBDA_MAX: f64 = 6.0;
const GRID_STEP: f64 = 0.1;
const GOLDEN_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum LmmError {
    #[error("need at least 2 cities, got {0}")]
    TooFewCities(usize),
    #[error("no city has more than one observation")]
    NoReplicatedCity,
    #[error("rank-deficient fixed-effect design; collinear levels: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("non-finite response for city {0}")]
    NonFinite(String),
    #[error("residual variance must be positive, got {0}")]
    InvalidVariance(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub response: f64,
    pub city: String,
    pub unit: String,
}

impl Observation {
    pub fn new(response: f64, city: impl Into<String>, unit: impl Into<String>) -> Self {
        Observation { response, city: city.into(), unit: unit.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Reml,
    Ml,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceComponents {
    pub var_city: f64,
    pub var_resid: f64,
    pub icc: f64,
    pub lambda: f64,
    pub loglik: f64,
    pub criterion: Criterion,
    pub n_cities: usize,
    pub n_obs: usize,
    pub converged: bool,
    pub boundary: bool,
    /// Fixed effects: "(intercept)" then "unit[<name>]" for each non-reference unit.
    pub beta: BTreeMap<String, f64>,
    pub reference_unit: String,
    pub evaluations: usize,
    #[serde(skip)]
    pub trace: Vec<(f64, f64)>,
}

pub fn icc(var_group: f64, var_resid: f64) -> Result<f64, LmmError> {
    if !(var_resid > 0.0) {
        return Err(LmmError::InvalidVariance(var_resid));
    }
    Ok(var_group.max(0.0) / (var_group.max(0.0) + var_resid))
}

/// Per-city sufficient statistics. Rows within a city share one design row,
/// since cities nest in units.
struct Block {
    n: f64,
    x: DVector<f64>,
    sum_y: f64,
}

pub struct Problem {
    blocks: Vec<Block>,
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
    y_shift: f64,
    n: usize,
    p: usize,
    columns: Vec<String>,
    reference_unit: String,
}

struct Eval {
    loglik: f64,
    sigma2: f64,
    beta: DVector<f64>,
}

impl Problem {
    /// Validates and sorts the data; observation order never matters.
    pub fn new(obs: &[Observation]) -> Result<Self, LmmError> {
        let mut cities: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
        for o in obs {
            if !o.response.is_finite() {
                return Err(LmmError::NonFinite(o.city.clone()));
            }
            cities.entry((o.unit.as_str(), o.city.as_str())).or_default().push(o.response);
        }
        if cities.len() < 2 {
            return Err(LmmError::TooFewCities(cities.len()));
        }
        if cities.values().all(|v| v.len() < 2) {
            return Err(LmmError::NoReplicatedCity);
        }
        let units: Vec<&str> = {
            let mut u: Vec<&str> = cities.keys().map(|(u, _)| *u).collect();
            u.dedup();
            u
        };
        let p = units.len();
        let mut columns = vec!["(intercept)".to_string()];
        columns.extend(units[1..].iter().map(|u| format!("unit[{u}]")));

        let n: usize = cities.values().map(Vec::len).sum();
        let mut total = 0.0;
        for v in cities.values_mut() {
            v.sort_by(f64::total_cmp);
            total += v.iter().sum::<f64>();
        }
        // centring is absorbed by the intercept and keeps yᵀV⁻¹y well conditioned
        let y_shift = total / n as f64;

        let mut blocks = Vec::with_capacity(cities.len());
        let mut xtx = DMatrix::zeros(p, p);
        let mut xty = DVector::zeros(p);
        let mut yty = 0.0;
        for ((unit, _), ys) in &cities {
            let mut x = DVector::zeros(p);
            x[0] = 1.0;
            let ui = units.binary_search(unit).expect("unit collected above");
            if ui > 0 {
                x[ui] = 1.0;
            }
            let nj = ys.len() as f64;
            let sum_y: f64 = ys.iter().map(|y| y - y_shift).sum();
            yty += ys.iter().map(|y| (y - y_shift).powi(2)).sum::<f64>();
            xtx += &x * x.transpose() * nj;
            xty += &x * sum_y;
            blocks.push(Block { n: nj, x, sum_y });
        }
        if xtx.clone().cholesky().is_none() {
            return Err(LmmError::RankDeficient(columns));
        }
        Ok(Problem {
            blocks,
            xtx,
            xty,
            yty,
            y_shift,
            n,
            p,
            columns,
            reference_unit: units[0].to_string(),
        })
    }

    pub fn n_cities(&self) -> usize {
        self.blocks.len()
    }

    fn eval(&self, lambda: f64, crit: Criterion) -> Eval {
        let mut a = self.xtx.clone();
        let mut b = self.xty.clone();
        let mut ytvy = self.yty;
        let mut logdet_v = 0.0;
        for blk in &self.blocks {
            let c = lambda / (1.0 + lambda * blk.n);
            let sx = &blk.x * blk.n;
            a -= &sx * sx.transpose() * c;
            b -= &sx * (c * blk.sum_y);
            ytvy -= c * blk.sum_y * blk.sum_y;
            logdet_v += (lambda * blk.n).ln_1p();
        }
        let chol = a.cholesky().expect("XᵀV⁻¹X stays positive definite");
        let beta = chol.solve(&b);
        let rss = (ytvy - b.dot(&beta)).max(f64::MIN_POSITIVE);
        let logdet_a: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        let two_pi = 2.0 * std::f64::consts::PI;
        let (n, p) = (self.n as f64, self.p as f64);
        let (loglik, sigma2) = match crit {
            Criterion::Reml => {
                let s2 = rss / (n - p);
                (-0.5 * ((n - p) * (two_pi * s2).ln() + logdet_v + logdet_a + (n - p)), s2)
            }
            Criterion::Ml => {
                let s2 = rss / n;
                (-0.5 * (n * (two_pi * s2).ln() + logdet_v + n), s2)
            }
        };
        Eval { loglik, sigma2, beta }
    }

    /// d(criterion)/d(log λ), from the closed-form block derivatives.
    ///
    /// With `c_j' = 1/(1 + λ n_j)²` and block residual sums
    /// `e_j = Σy_j − n_j x_jᵀβ̂`, the residual sum of squares moves by
    /// `−Σ c_j' e_j²` and `XᵀV⁻¹X` by `−Σ c_j' n_j² x_j x_jᵀ`.
    pub fn score(&self, log_lambda: f64, crit: Criterion) -> f64 {
        let lambda = log_lambda.exp();
        let e = self.eval(lambda, crit);
        let mut a = self.xtx.clone();
        for blk in &self.blocks {
            let c = lambda / (1.0 + lambda * blk.n);
            let sx = &blk.x * blk.n;
            a -= &sx * sx.transpose() * c;
        }
        let chol = a.cholesky().expect("XᵀV⁻¹X stays positive definite");
        let (mut d_rss, mut d_logdet_v, mut d_logdet_a) = (0.0, 0.0, 0.0);
        for blk in &self.blocks {
            let dc = 1.0 / (1.0 + lambda * blk.n).powi(2);
            let sx = &blk.x * blk.n;
            let resid = blk.sum_y - sx.dot(&e.beta);
            d_rss -= dc * resid * resid;
            d_logdet_v += blk.n / (1.0 + lambda * blk.n);
            d_logdet_a -= dc * sx.dot(&chol.solve(&sx));
        }
        let (n, p) = (self.n as f64, self.p as f64);
        let dof = match crit {
            Criterion::Reml => n - p,
            Criterion::Ml => n,
        };
        let rss = e.sigma2 * dof;
        let d = match crit {
            Criterion::Reml => -0.5 * (dof * d_rss / rss + d_logdet_v + d_logdet_a),
            Criterion::Ml => -0.5 * (dof * d_rss / rss + d_logdet_v),
        };
        lambda * d
    }

    /// Profiled criterion at a given log λ.
    pub fn profile(&self, log_lambda: f64, crit: Criterion) -> f64 {
        self.eval(log_lambda.exp(), crit).loglik
    }

    pub fn fit(&self, crit: Criterion) -> VarianceComponents {
        let mut trace = Vec::new();
        let mut f = |t: f64| {
            let v = self.profile(t, crit);
            trace.push((t, v));
            v
        };
        let steps = ((LOG_LAMBDA_MAX - LOG_LAMBDA_MIN) / GRID_STEP).round() as usize;
        let mut best = (LOG_LAMBDA_MIN, f(LOG_LAMBDA_MIN));
        for i in 1..=steps {
            let t = LOG_LAMBDA_MIN + i as f64 * GRID_STEP;
            let v = f(t);
            if v > best.1 {
                best = (t, v);
            }
        }
        let lo = (best.0 - GRID_STEP).max(LOG_LAMBDA_MIN);
        let hi = (best.0 + GRID_STEP).min(LOG_LAMBDA_MAX);
        let (t_gold, v_gold) = golden_max(&mut f, lo, hi, GOLDEN_TOL);
        let (t_gold, v_gold) = if v_gold >= best.1 { (t_gold, v_gold) } else { best };
        let (t_opt, v_opt) = match self.polish(t_gold, crit) {
            Some(t) => (t, f(t)),
            None => (t_gold, v_gold),
        };
        let converged = t_opt < LOG_LAMBDA_MAX - 1e-6;

        // λ = 0 lies outside the log-scale interval; compare against it directly
        let at_zero = self.eval(0.0, crit);
        let interior = self.eval(t_opt.exp(), crit);
        let boundary = at_zero.loglik >= v_opt || t_opt <= LOG_LAMBDA_MIN + 1e-6;
        let (lambda, e) = if boundary { (0.0, at_zero) } else { (t_opt.exp(), interior) };

        let var_resid = e.sigma2;
        let var_city = lambda * var_resid;
        let mut beta = BTreeMap::new();
        for (i, name) in self.columns.iter().enumerate() {
            let shift = if i == 0 { self.y_shift } else { 0.0 };
            beta.insert(name.clone(), e.beta[i] + shift);
        }
        VarianceComponents {
            var_city,
            var_resid,
            icc: var_city / (var_city + var_resid),
            lambda,
            loglik: e.loglik,
            criterion: crit,
            n_cities: self.blocks.len(),
            n_obs: self.n,
            converged,
            boundary,
            beta,
            reference_unit: self.reference_unit.clone(),
            evaluations: trace.len() + 2,
            trace,
        }
    }
}

impl Problem {
    /// Near a flat optimum the criterion's rounding noise limits golden
    /// section to roughly 1e-7 in log λ; the score is free of that noise, so
    /// bisect its sign change around the golden-section estimate.
    fn polish(&self, t: f64, crit: Criterion) -> Option<f64> {
        let w = 1e-4;
        let (mut a, mut b) = ((t - w).max(LOG_LAMBDA_MIN), (t + w).min(LOG_LAMBDA_MAX));
        let (ga, gb) = (self.score(a, crit), self.score(b, crit));
        if !(ga > 0.0 && gb < 0.0) {
            return None;
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.score(m, crit) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }
}

fn golden_max(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = (a + b) / 2.0;
    (t, f(t))
}

/// Fits the random-intercept model; REML unless `crit` says otherwise.
pub fn fit_random_intercept(obs: &[Observation], crit: Criterion) -> Result<VarianceComponents, LmmError> {
    Ok(Problem::new(obs)?.fit(crit))
}
