//! Historical-simulation benchmark: simulated scenarios of the remapped
//! portfolio, empirical VaR and ES with order-statistic confidence
//! intervals, and finite-difference sensitivities on frozen scenarios.

mod order_stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::model::{Parameter, RemappedPortfolio};

pub use order_stats::{ci_indices, BinomialCdf, NORMAL_CROSSOVER};
use order_stats::bracket_of;

/// Scenarios per independent RNG stream.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum McError {
    #[error("tail probability {0} must lie in (0, 1)")]
    LevelOutOfRange(f64),
    #[error("t* = {t_star} is below one scenario")]
    InsufficientTailSample { t_star: f64 },
    #[error("no confidence interval at level {level} with coverage {cl}")]
    IntervalNotFound { level: f64, cl: f64 },
    #[error("confidence level {0} must lie in (0, 1)")]
    InvalidConfidence(f64),
    #[error("shock size must be positive and finite, got {0}")]
    InvalidShock(f64),
    #[error("the sample must contain at least one scenario")]
    EmptySample,
    #[error("cannot allocate {0} scenarios")]
    ResourceExhausted(usize),
    #[error("unknown parameter {0}")]
    UnknownParameter(Parameter),
}

/// Recipe for the standard-normal factor draws of a simulation. The draws
/// are regenerated on demand rather than stored, so shocked portfolios see
/// exactly the same scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrozenDraws {
    pub seed: u64,
    pub dim: usize,
    pub t_mc: usize,
}

impl FrozenDraws {
    pub fn new(seed: u64, dim: usize, t_mc: usize) -> Self {
        Self { seed, dim, t_mc }
    }

    /// Portfolio values per scenario, in generation order. Factor `i` of
    /// scenario `t` pairs with `delta[i]`, `lambda[i]` as given; no
    /// reordering happens here.
    pub fn values(&self, theta: f64, delta: &[f64], lambda: &[f64]) -> Result<Vec<f64>, McError> {
        assert_eq!(delta.len(), self.dim);
        assert_eq!(lambda.len(), self.dim);
        if self.t_mc == 0 {
            return Err(McError::EmptySample);
        }
        let mut out: Vec<f64> = Vec::new();
        out.try_reserve_exact(self.t_mc)
            .map_err(|_| McError::ResourceExhausted(self.t_mc))?;
        out.resize(self.t_mc, 0.0);
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(j, chunk)| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(j as u64);
                for v in chunk.iter_mut() {
                    let mut acc = theta;
                    for (&d, &l) in delta.iter().zip(lambda) {
                        let y: f64 = rng.sample(StandardNormal);
                        acc += d * y + 0.5 * l * y * y;
                    }
                    *v = acc;
                }
            });
        Ok(out)
    }

    /// Sorted sample for the given (unreordered) parameters.
    pub fn sample(&self, theta: f64, delta: &[f64], lambda: &[f64]) -> Result<ScenarioSample, McError> {
        let mut values = self.values(theta, delta, lambda)?;
        values.par_sort_unstable_by(f64::total_cmp);
        Ok(ScenarioSample {
            values,
            frozen: Some(*self),
        })
    }
}

/// Simulated portfolio values, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSample {
    values: Vec<f64>,
    frozen: Option<FrozenDraws>,
}

impl ScenarioSample {
    /// Sample from given values, for instance an external history.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self, McError> {
        if values.is_empty() {
            return Err(McError::EmptySample);
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self {
            values,
            frozen: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t_mc(&self) -> usize {
        self.values.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.frozen.map(|f| f.seed)
    }

    pub fn frozen(&self) -> Option<&FrozenDraws> {
        self.frozen.as_ref()
    }

    /// 1-based order statistic.
    fn nth(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    fn lower_mean(&self, k: usize) -> f64 {
        self.values[..k].iter().sum::<f64>() / k as f64
    }
}

/// `T` scenarios `V = θ + Σ (δ Y + λ Y² / 2)` with i.i.d. standard normal
/// factors. Chunk `j` of 4096 scenarios draws from ChaCha8 stream `j`, so
/// the result depends on the seed alone, not on the thread count.
pub fn simulate(p: &RemappedPortfolio, t_mc: usize, seed: u64) -> Result<ScenarioSample, McError> {
    FrozenDraws::new(seed, p.dim(), t_mc).sample(p.theta(), p.delta(), p.lambda())
}

fn t_star(s: &ScenarioSample, level: f64) -> Result<f64, McError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(McError::LevelOutOfRange(level));
    }
    let t = s.t_mc() as f64 * level;
    if bracket_of(t).0 < 1 {
        return Err(McError::InsufficientTailSample { t_star: t });
    }
    Ok(t)
}

/// Empirical VaR: minus the `t* = T·level`-th smallest value, averaging the
/// two neighbours when `t*` is not an integer.
pub fn historical_var(s: &ScenarioSample, level: f64) -> Result<f64, McError> {
    let (a, b) = bracket_of(t_star(s, level)?);
    Ok(-0.5 * (s.nth(a) + s.nth(b)))
}

/// Empirical ES: minus the mean of the `⌊t*⌋` smallest values.
pub fn historical_es(s: &ScenarioSample, level: f64) -> Result<f64, McError> {
    let (a, _) = bracket_of(t_star(s, level)?);
    Ok(-s.lower_mean(a))
}

/// A Monte Carlo point estimate with an asymmetric confidence interval
/// `[point - lower_offset, point + upper_offset]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub point: f64,
    pub lower_offset: f64,
    pub upper_offset: f64,
    pub confidence_level: f64,
}

impl McEstimate {
    pub fn lower(&self) -> f64 {
        self.point - self.lower_offset
    }

    pub fn upper(&self) -> f64 {
        self.point + self.upper_offset
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower() && x <= self.upper()
    }
}

/// Empirical VaR with the binomial order-statistic interval.
pub fn var_ci(s: &ScenarioSample, level: f64, cl: f64) -> Result<McEstimate, McError> {
    let point = historical_var(s, level)?;
    let (tm, tp) = ci_indices(s.t_mc(), level, cl)?;
    Ok(McEstimate {
        point,
        upper_offset: (-s.nth(tm) - point).max(0.0),
        lower_offset: (point + s.nth(tp)).max(0.0),
        confidence_level: cl,
    })
}

/// Empirical ES with bounds from the tail means at the VaR interval ends.
pub fn es_ci(s: &ScenarioSample, level: f64, cl: f64) -> Result<McEstimate, McError> {
    let point = historical_es(s, level)?;
    let (tm, tp) = ci_indices(s.t_mc(), level, cl)?;
    Ok(McEstimate {
        point,
        upper_offset: (-s.lower_mean(tm) - point).max(0.0),
        lower_offset: (point + s.lower_mean(tp)).max(0.0),
        confidence_level: cl,
    })
}

/// Finite-difference VaR and ES sensitivities from frozen scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSensitivity {
    pub parameter: Parameter,
    pub shock: f64,
    pub dvar: McEstimate,
    pub des: McEstimate,
}

/// Default shock `max(0.01·|β|, 0.01)`.
pub fn default_shock(p: &RemappedPortfolio, which: Parameter) -> f64 {
    (0.01 * parameter_value(p, which).abs()).max(0.01)
}

fn parameter_value(p: &RemappedPortfolio, which: Parameter) -> f64 {
    match which {
        Parameter::Theta => p.theta(),
        Parameter::Delta(i) => p.delta()[i],
        Parameter::Lambda(i) => p.lambda()[i],
    }
}

fn check(p: &RemappedPortfolio, which: Parameter) -> Result<(), McError> {
    match which {
        Parameter::Delta(i) | Parameter::Lambda(i) if i >= p.dim() => {
            Err(McError::UnknownParameter(which))
        }
        _ => Ok(()),
    }
}

/// Sample with one parameter moved by `shift`, keeping the factor order.
fn shocked(
    p: &RemappedPortfolio,
    draws: &FrozenDraws,
    which: Parameter,
    shift: f64,
) -> Result<ScenarioSample, McError> {
    let mut theta = p.theta();
    let mut delta = p.delta().to_vec();
    let mut lambda = p.lambda().to_vec();
    match which {
        Parameter::Theta => theta += shift,
        Parameter::Delta(i) => delta[i] += shift,
        Parameter::Lambda(i) => lambda[i] += shift,
    }
    draws.sample(theta, &delta, &lambda)
}

/// Numerators `VaR(β + h) - VaR(β - h)` and `ES(β + h) - ES(β - h)` on the
/// frozen scenarios. Any `h ≥ 0` is accepted.
pub fn fd_numerators(
    p: &RemappedPortfolio,
    which: Parameter,
    shock: f64,
    level: f64,
    draws: &FrozenDraws,
) -> Result<(f64, f64), McError> {
    check(p, which)?;
    let up = shocked(p, draws, which, shock)?;
    let down = shocked(p, draws, which, -shock)?;
    Ok((
        historical_var(&up, level)? - historical_var(&down, level)?,
        historical_es(&up, level)? - historical_es(&down, level)?,
    ))
}

/// Central differences of empirical VaR and ES under `β ± shock`. Interval
/// offsets propagate the two confidence intervals linearly through the
/// difference quotient. A `θ` shift translates every scenario, so its
/// sensitivities are exactly `-1` with no sampling error.
pub fn fd_sensitivity(
    p: &RemappedPortfolio,
    which: Parameter,
    shock: f64,
    level: f64,
    draws: &FrozenDraws,
    cl: f64,
) -> Result<FdSensitivity, McError> {
    check(p, which)?;
    if !(shock > 0.0 && shock.is_finite()) {
        return Err(McError::InvalidShock(shock));
    }
    if !(cl > 0.0 && cl < 1.0) {
        return Err(McError::InvalidConfidence(cl));
    }
    if which == Parameter::Theta {
        t_star(&ScenarioSample::from_values(vec![0.0; draws.t_mc.max(1)])?, level)?;
        let exact = McEstimate {
            point: -1.0,
            lower_offset: 0.0,
            upper_offset: 0.0,
            confidence_level: cl,
        };
        return Ok(FdSensitivity {
            parameter: which,
            shock,
            dvar: exact,
            des: exact,
        });
    }
    let up = shocked(p, draws, which, shock)?;
    let down = shocked(p, draws, which, -shock)?;
    let quotient = |a: McEstimate, b: McEstimate| McEstimate {
        point: (a.point - b.point) / (2.0 * shock),
        upper_offset: (a.upper_offset + b.lower_offset) / (2.0 * shock),
        lower_offset: (a.lower_offset + b.upper_offset) / (2.0 * shock),
        confidence_level: cl,
    };
    Ok(FdSensitivity {
        parameter: which,
        shock,
        dvar: quotient(var_ci(&up, level, cl)?, var_ci(&down, level, cl)?),
        des: quotient(es_ci(&up, level, cl)?, es_ci(&down, level, cl)?),
    })
}
