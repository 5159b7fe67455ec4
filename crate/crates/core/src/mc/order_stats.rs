//! Binomial confidence intervals for empirical quantiles.
//!
//! With `T` scenarios and tail probability `p`, the number of draws below
//! the true quantile is `Binomial(T, p)`, so the order statistics
//! `(Ṽ_{t⁻}, Ṽ_{t⁺})` bracket it with probability
//! `F(t⁺ - 1) - F(t⁻ - 1)` where `F` is the binomial CDF.

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use super::McError;

/// Above this mean count the CDF uses the continuity-corrected normal
/// approximation.
pub const NORMAL_CROSSOVER: f64 = 50.0;

/// Binomial CDF `P(K <= k)` for `K ~ Binomial(n, p)`.
#[derive(Debug, Clone)]
pub struct BinomialCdf {
    n: usize,
    p: f64,
    /// Exact cumulative sums for small means; empty otherwise.
    table: Vec<f64>,
}

impl BinomialCdf {
    pub fn new(n: usize, p: f64) -> Self {
        let mut cdf = Self {
            n,
            p,
            table: Vec::new(),
        };
        if (n as f64) * p <= NORMAL_CROSSOVER {
            cdf.table = exact_table(n, p);
        }
        cdf
    }

    /// Exact summation regardless of the mean.
    pub fn exact(n: usize, p: f64) -> Self {
        Self {
            n,
            p,
            table: exact_table(n, p),
        }
    }

    pub fn at(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        if k as usize >= self.n {
            return 1.0;
        }
        if !self.table.is_empty() {
            return self.table.get(k as usize).copied().unwrap_or(1.0);
        }
        let mean = self.n as f64 * self.p;
        let sd = (mean * (1.0 - self.p)).sqrt();
        0.5 * erfc(-(k as f64 + 0.5 - mean) / (sd * std::f64::consts::SQRT_2))
    }
}

/// Cumulative sums of the pmf in log space, stopping once they saturate.
fn exact_table(n: usize, p: f64) -> Vec<f64> {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let ln_n = ln_gamma(n as f64 + 1.0);
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mean = n as f64 * p;
    for k in 0..=n {
        let kf = k as f64;
        let ln_pmf = ln_n - ln_gamma(kf + 1.0) - ln_gamma((n - k) as f64 + 1.0)
            + kf * lp
            + (n - k) as f64 * lq;
        acc += ln_pmf.exp();
        out.push(acc.min(1.0));
        if kf > mean && 1.0 - acc < 1e-17 {
            break;
        }
    }
    out
}

/// The most symmetric minimal pair `(t⁻, t⁺)` (1-based order-statistic
/// indices) whose binomial coverage is at least `cl`.
pub fn ci_indices(t_mc: usize, level: f64, cl: f64) -> Result<(usize, usize), McError> {
    ci_indices_with(&BinomialCdf::new(t_mc, level), t_mc, level, cl)
}

pub(crate) fn ci_indices_with(
    cdf: &BinomialCdf,
    t_mc: usize,
    level: f64,
    cl: f64,
) -> Result<(usize, usize), McError> {
    if !(cl > 0.0 && cl < 1.0) {
        return Err(McError::InvalidConfidence(cl));
    }
    let t_star = t_mc as f64 * level;
    let (lo_idx, hi_idx) = bracket_of(t_star);
    let sd = (t_star * (1.0 - level)).sqrt();
    let reach = (40.0 * sd).ceil() as usize + 2;
    let f = |k: usize| cdf.at(k as i64 - 1);

    let mut best: Option<(f64, usize, usize)> = None;
    let last_lower = lo_idx.saturating_sub(reach).max(1);
    for tm in (last_lower..=lo_idx).rev() {
        let base = f(tm);
        if base + cl > 1.0 {
            continue;
        }
        // smallest t⁺ with F(t⁺ - 1) >= cl + F(t⁻ - 1)
        let (mut a, mut b) = (hi_idx.max(tm + 1), t_mc);
        if f(b) - base < cl {
            continue;
        }
        while a < b {
            let mid = a + (b - a) / 2;
            if f(mid) - base >= cl {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        let tp = a;
        // minimal on the lower side too
        if tm < lo_idx && f(tp) - f(tm + 1) >= cl {
            continue;
        }
        let skew = ((tp as f64 - t_star) - (t_star - tm as f64)).abs();
        let better = match best {
            None => true,
            Some((s, _, p)) => skew < s - 1e-9 || ((skew - s).abs() <= 1e-9 && tp < p),
        };
        if better {
            best = Some((skew, tm, tp));
        }
    }
    best.map(|(_, a, b)| (a, b))
        .ok_or(McError::IntervalNotFound { level, cl })
}

/// Order-statistic indices on either side of `t*`; equal when `t*` is an
/// integer.
pub(crate) fn bracket_of(t_star: f64) -> (usize, usize) {
    let r = t_star.round();
    if (t_star - r).abs() <= 1e-9 * r.max(1.0) {
        (r as usize, r as usize)
    } else {
        (t_star.floor() as usize, t_star.ceil() as usize)
    }
}
