use std::fmt;

use num_complex::Complex64;

use super::{ModelError, RemappedPortfolio};

/// A model parameter the risk measures can be differentiated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parameter {
    Theta,
    /// `delta_i`, zero-based index into the canonical factor order.
    Delta(usize),
    /// `lambda_i`, zero-based index into the canonical factor order.
    Lambda(usize),
}

impl Parameter {
    /// `theta`, then `delta_i`, `lambda_i` for every factor.
    pub fn all(n: usize) -> Vec<Parameter> {
        std::iter::once(Parameter::Theta)
            .chain((0..n).map(Parameter::Delta))
            .chain((0..n).map(Parameter::Lambda))
            .collect()
    }
}

/// Renders with one-based factor indices: `theta`, `delta_3`, `lambda_3`.
impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameter::Theta => write!(f, "theta"),
            Parameter::Delta(i) => write!(f, "delta_{}", i + 1),
            Parameter::Lambda(i) => write!(f, "lambda_{}", i + 1),
        }
    }
}

impl std::str::FromStr for Parameter {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::UnknownParameter(s.to_string());
        if s == "theta" {
            return Ok(Parameter::Theta);
        }
        let (kind, idx) = s.split_once('_').ok_or_else(bad)?;
        let idx: usize = idx.parse().map_err(|_| bad())?;
        if idx == 0 {
            return Err(bad());
        }
        match kind {
            "delta" => Ok(Parameter::Delta(idx - 1)),
            "lambda" => Ok(Parameter::Lambda(idx - 1)),
            _ => Err(bad()),
        }
    }
}

/// Imaginary-frequency band `(nu_minus, nu_plus)` on which the
/// characteristic function is analytic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strip {
    pub nu_minus: f64,
    pub nu_plus: f64,
}

impl Strip {
    pub fn contains(&self, nu: f64) -> bool {
        nu > self.nu_minus && nu < self.nu_plus
    }
}

/// Singularities sit at `-i / lambda` for every nonzero eigenvalue, so the
/// strip is bounded above by the most negative and below by the most
/// positive eigenvalue.
pub fn strip_of_regularity(p: &RemappedPortfolio) -> Strip {
    let lo = p.lambda().first().copied().unwrap_or(0.0);
    let hi = p.lambda().last().copied().unwrap_or(0.0);
    Strip {
        nu_minus: if hi > 0.0 { -1.0 / hi } else { f64::NEG_INFINITY },
        nu_plus: if lo < 0.0 { -1.0 / lo } else { f64::INFINITY },
    }
}

fn check_strip(p: &RemappedPortfolio, phi: Complex64) -> Result<(), ModelError> {
    if !phi.re.is_finite() || !phi.im.is_finite() {
        return Err(ModelError::OutsideStrip { nu: phi.im });
    }
    // Re(1 - i lambda phi) = 1 + lambda nu must stay positive for every factor
    if p.lambda().iter().any(|l| 1.0 + l * phi.im <= 0.0) {
        return Err(ModelError::OutsideStrip { nu: phi.im });
    }
    Ok(())
}

/// Logarithm of the characteristic function, summed factor by factor with
/// the principal branch.
pub(crate) fn log_cf(p: &RemappedPortfolio, phi: Complex64) -> Complex64 {
    let i = Complex64::i();
    let mut acc = i * p.theta() * phi;
    let phi2 = phi * phi;
    for (&d, &l) in p.delta().iter().zip(p.lambda()) {
        if l == 0.0 {
            acc -= 0.5 * d * d * phi2;
        } else {
            let w = 1.0 - i * l * phi;
            acc -= 0.5 * w.ln() + 0.5 * d * d * phi2 / w;
        }
    }
    acc
}

// A factor whose Gaussian envelope bottoms out above e^{-PHASE_CUTOFF/2}
// reaches its algebraic regime, where it rotates at speed -delta^2/(2 lambda).
const PHASE_CUTOFF: f64 = 60.0;

fn rotates(d: f64, l: f64) -> bool {
    l != 0.0 && d * d <= PHASE_CUTOFF * l * l
}

/// Asymptotic phase velocity `c` of the characteristic function, so that
/// `log_cf = i phi c + log_cf_centred`. Equals the support edge when every
/// factor qualifies.
pub(crate) fn phase_centre(p: &RemappedPortfolio) -> f64 {
    p.theta()
        - p.delta()
            .iter()
            .zip(p.lambda())
            .filter(|(&d, &l)| rotates(d, l))
            .map(|(&d, &l)| d * d / (2.0 * l))
            .sum::<f64>()
}

/// [`log_cf`] with the linear phase `i phi c` removed.
pub(crate) fn log_cf_centred(p: &RemappedPortfolio, phi: Complex64) -> Complex64 {
    let i = Complex64::i();
    let mut acc = Complex64::new(0.0, 0.0);
    let phi2 = phi * phi;
    for (&d, &l) in p.delta().iter().zip(p.lambda()) {
        if l == 0.0 {
            acc -= 0.5 * d * d * phi2;
            continue;
        }
        let w = 1.0 - i * l * phi;
        acc -= 0.5 * w.ln();
        if rotates(d, l) {
            // -d^2 phi^2/(2w) + i d^2 phi/(2l) collapses to this
            acc += i * d * d * phi / (2.0 * l * w);
        } else {
            acc -= 0.5 * d * d * phi2 / w;
        }
    }
    acc
}

/// Characteristic function `E[exp(i phi V)]` at a complex frequency inside
/// the strip of regularity.
pub fn cf(p: &RemappedPortfolio, phi: Complex64) -> Result<Complex64, ModelError> {
    check_strip(p, phi)?;
    if phi == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(log_cf(p, phi).exp())
}

/// The multiplier `m` with `df/dbeta = m * f`.
pub(crate) fn grad_factor(p: &RemappedPortfolio, phi: Complex64, which: Parameter) -> Complex64 {
    let i = Complex64::i();
    match which {
        Parameter::Theta => i * phi,
        Parameter::Delta(k) => {
            let w = 1.0 - i * p.lambda()[k] * phi;
            -p.delta()[k] * phi * phi / w
        }
        Parameter::Lambda(k) => {
            let d = p.delta()[k];
            let w = 1.0 - i * p.lambda()[k] * phi;
            i * phi / (2.0 * w) * (1.0 - d * d * phi * phi / w)
        }
    }
}

/// Derivative of the characteristic function with respect to one model
/// parameter.
pub fn cf_grad(
    p: &RemappedPortfolio,
    phi: Complex64,
    which: Parameter,
) -> Result<Complex64, ModelError> {
    check_parameter(p, which)?;
    let f = cf(p, phi)?;
    Ok(grad_factor(p, phi, which) * f)
}

pub(crate) fn check_parameter(p: &RemappedPortfolio, which: Parameter) -> Result<(), ModelError> {
    match which {
        Parameter::Delta(k) | Parameter::Lambda(k) if k >= p.dim() => {
            Err(ModelError::UnknownParameter(which.to_string()))
        }
        _ => Ok(()),
    }
}

/// Cumulant generating function `log E[exp(s V)]` for real `s` with
/// `-s` inside the strip, and its first derivative.
pub(crate) fn cumulant_and_slope(p: &RemappedPortfolio, s: f64) -> (f64, f64) {
    let mut k = p.theta() * s;
    let mut dk = p.theta();
    for (&d, &l) in p.delta().iter().zip(p.lambda()) {
        let w = 1.0 - l * s;
        k += -0.5 * w.ln() + 0.5 * d * d * s * s / w;
        dk += 0.5 * l / w + 0.5 * d * d * s * (2.0 - l * s) / (w * w);
    }
    (k, dk)
}
