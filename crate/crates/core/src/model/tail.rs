use super::{ModelError, RemappedPortfolio};

/// Default relative tolerance under which two eigenvalues count as equal.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;

/// Left-tail regime, keyed on the sign of the smallest eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRegime {
    /// Exponentially damped power law.
    NegativeMin,
    /// Gaussian decay around `v0`.
    ZeroMin,
    /// Support bounded below by `v_inf`.
    PositiveMin,
}

impl TailRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            TailRegime::NegativeMin => "negative_min",
            TailRegime::ZeroMin => "zero_min",
            TailRegime::PositiveMin => "positive_min",
        }
    }
}

/// Eigenvalue grouping and the asymptotic shape of the density tails.
#[derive(Debug, Clone, PartialEq)]
pub struct TailProfile {
    pub regime: TailRegime,
    /// Distinct eigenvalues, ascending. A group classified as zero stores 0.
    pub distinct_lambdas: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Sum of `delta_j^2` over each group.
    pub delta_bar_sq: Vec<f64>,
    /// `sqrt(delta_bar_sq) / |lambda|`, absent for a zero group.
    pub a: Vec<Option<f64>>,
    /// Lower support bound, `-inf` unless every eigenvalue is positive.
    pub v_inf: f64,
    /// Upper support bound, `+inf` unless every eigenvalue is negative.
    pub v_sup: f64,
    /// Power exponent of the left tail: `(m1-3)/4` or `m1/2-1` for
    /// `NegativeMin`, `-(sum_{k>=2} m_k)/2` for `ZeroMin`, `N/2-1` at
    /// `v_inf` for `PositiveMin`.
    pub m_bar: f64,
    /// Center of the Gaussian left tail, `ZeroMin` only.
    pub v0: Option<f64>,
    pub theta: f64,
}

impl TailProfile {
    pub fn lambda_star(&self) -> f64 {
        self.distinct_lambdas[0]
    }
}

/// Groups near-equal eigenvalues and derives the tail regime, support bounds
/// and asymptotic exponents.
///
/// Eigenvalues within `group_tol * max(1, max|lambda|)` of the first member of
/// a group join it; the same threshold classifies a group as zero.
pub fn tail_profile(p: &RemappedPortfolio, group_tol: f64) -> TailProfile {
    let lambda = p.lambda();
    let delta = p.delta();
    let scale = lambda.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let thresh = group_tol * scale;

    let mut distinct: Vec<f64> = Vec::new();
    let mut mult: Vec<usize> = Vec::new();
    let mut dsq: Vec<f64> = Vec::new();
    let mut anchor = f64::NAN;
    for (&l, &d) in lambda.iter().zip(delta) {
        if !distinct.is_empty() && (l - anchor).abs() <= thresh {
            *mult.last_mut().unwrap() += 1;
            *dsq.last_mut().unwrap() += d * d;
            // the highest index represents the group
            *distinct.last_mut().unwrap() = l;
        } else {
            anchor = l;
            distinct.push(l);
            mult.push(1);
            dsq.push(d * d);
        }
    }
    for l in distinct.iter_mut() {
        if l.abs() <= thresh {
            *l = 0.0;
        }
    }
    if distinct.is_empty() {
        distinct.push(0.0);
        mult.push(0);
        dsq.push(0.0);
    }

    let a: Vec<Option<f64>> = distinct
        .iter()
        .zip(&dsq)
        .map(|(&l, &s)| (l != 0.0).then(|| s.sqrt() / l.abs()))
        .collect();

    let shift: f64 = distinct
        .iter()
        .zip(&dsq)
        .filter(|(l, _)| **l != 0.0)
        .map(|(l, s)| s / (2.0 * l))
        .sum();
    let bounded_below = distinct.iter().all(|&l| l > 0.0);
    let bounded_above = distinct.iter().all(|&l| l < 0.0);
    let v_inf = if bounded_below {
        p.theta() - shift
    } else {
        f64::NEG_INFINITY
    };
    let v_sup = if bounded_above {
        p.theta() - shift
    } else {
        f64::INFINITY
    };

    let lambda_star = distinct[0];
    let total_dsq: f64 = dsq.iter().sum();
    let (regime, m_bar, v0) = if lambda_star < 0.0 {
        let m1 = mult[0] as f64;
        let a1_nonzero = dsq[0] > group_tol * total_dsq.max(1.0);
        let m_bar = if a1_nonzero {
            (m1 - 3.0) / 4.0
        } else {
            m1 / 2.0 - 1.0
        };
        (TailRegime::NegativeMin, m_bar, None)
    } else if lambda_star == 0.0 {
        let rest: usize = mult[1..].iter().sum();
        let v0 = p.theta()
            - distinct[1..]
                .iter()
                .zip(&dsq[1..])
                .map(|(l, s)| s / (2.0 * l))
                .sum::<f64>();
        (TailRegime::ZeroMin, -0.5 * rest as f64, Some(v0))
    } else {
        (TailRegime::PositiveMin, p.dim() as f64 / 2.0 - 1.0, None)
    };

    TailProfile {
        regime,
        distinct_lambdas: distinct,
        multiplicities: mult,
        delta_bar_sq: dsq,
        a,
        v_inf,
        v_sup,
        m_bar,
        v0,
        theta: p.theta(),
    }
}

/// Leading-order log density of the far left tail, up to an additive
/// constant. The exponential damping always decays as `v -> -inf`.
pub fn asymptotic_left_log_density(tp: &TailProfile, v: f64) -> Result<f64, ModelError> {
    match tp.regime {
        TailRegime::NegativeMin => {
            let ls = tp.lambda_star().abs();
            let a1 = tp.a[0].unwrap_or(0.0);
            let av = v.abs();
            Ok(tp.m_bar * av.ln() - av / ls + a1 * (2.0 * av / ls).sqrt())
        }
        TailRegime::ZeroMin => {
            let s = tp.delta_bar_sq[0];
            if s <= 0.0 {
                return Err(ModelError::DegenerateTailGroup);
            }
            let v0 = tp.v0.unwrap_or(tp.theta);
            let u = v - v0;
            let power = if tp.m_bar != 0.0 { tp.m_bar * u.abs().ln() } else { 0.0 };
            Ok(power - u * u / (2.0 * s))
        }
        TailRegime::PositiveMin => Err(ModelError::WrongRegime(tp.regime)),
    }
}
