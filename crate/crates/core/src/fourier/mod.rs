//! Risk measures by Fourier inversion along a horizontal contour
//! `phi = omega + i nu` of the characteristic function.
//!
//! Every inversion integral has the shape `(1/π) ∫_0^∞ Re[h(ω) e^{iωx}] dω`
//! and is split into one cosine and one sine transform. The exponential
//! prefactors `e^{∓ν x}` are folded into `h` in log space so that extreme
//! arguments neither overflow nor lose precision.

mod contour;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::model::{
    grad_factor, log_cf_centred, phase_centre, strip_of_regularity, ModelError, Parameter,
};
use crate::model::{check_parameter, RemappedPortfolio};
use crate::quad::{fourier_cos, fourier_sin, QuadConfig, QuadError};

pub use contour::{choose_nu, ContourChoice};
pub(crate) use contour::decay_scale;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RiskError {
    #[error("contour nu = {nu} must lie strictly inside ({lo}, {hi})")]
    OutsideStrip { nu: f64, lo: f64, hi: f64 },
    #[error("portfolio value is constant; risk measures are undefined")]
    DegeneratePortfolio,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("quadrature did not converge (error estimate {error:e})")]
    QuadratureFailure { error: f64 },
    #[error("significance level {0} must lie in (0, 1)")]
    LevelOutOfRange(f64),
    #[error("could not bracket the level {level} (last interval [{lo}, {hi}])")]
    BracketingFailure { level: f64, lo: f64, hi: f64 },
    #[error("density at the VaR is {density:e}; sensitivities are undefined")]
    VanishingDensity { density: f64 },
}

/// A computed quantity with its propagated absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// VaR, optionally Expected Shortfall, and diagnostics at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPoint {
    /// Requested tail probability.
    pub level: f64,
    /// Tail probability actually reached at `var`. ES and the sensitivities
    /// are evaluated at this level so that they are exactly consistent
    /// with `var`.
    pub attained_level: f64,
    pub attained_error: f64,
    /// Positive values are losses.
    pub var: f64,
    pub var_error: f64,
    /// Density of `V` at `-var`.
    pub density_at_var: f64,
    pub es: Option<f64>,
    pub es_error: Option<f64>,
    pub contour: ContourChoice,
}

impl RiskPoint {
    /// Risk point at a given VaR, with the level read off the tail
    /// probability there.
    pub fn at_var(
        p: &RemappedPortfolio,
        var: f64,
        c: &ContourChoice,
        cfg: &QuadConfig,
    ) -> Result<Self, RiskError> {
        let prob = tail_prob(p, var, c, cfg)?;
        let dens = density_at(p, -var, c, cfg)?;
        let level = prob.value;
        Ok(Self {
            level,
            attained_level: level,
            attained_error: prob.error,
            var,
            var_error: prob.error / dens.value.max(f64::MIN_POSITIVE),
            density_at_var: dens.value,
            es: None,
            es_error: None,
            contour: *c,
        })
    }

    /// Total propagated quadrature error of VaR and ES.
    pub fn quad_error(&self) -> f64 {
        self.var_error + self.es_error.unwrap_or(0.0)
    }
}

/// Sensitivities of VaR and ES to one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityEntry {
    pub parameter: Parameter,
    pub dvar: Option<Estimate>,
    pub des: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    /// In the order of [`Parameter::all`].
    pub entries: Vec<SensitivityEntry>,
    pub density_at_var: f64,
}

impl SensitivityReport {
    pub fn get(&self, which: Parameter) -> Option<&SensitivityEntry> {
        self.entries.iter().find(|e| e.parameter == which)
    }

    pub fn dvar(&self, which: Parameter) -> Option<f64> {
        self.get(which).and_then(|e| e.dvar).map(|e| e.value)
    }

    pub fn des(&self, which: Parameter) -> Option<f64> {
        self.get(which).and_then(|e| e.des).map(|e| e.value)
    }
}

fn check_contour(p: &RemappedPortfolio, c: &ContourChoice, positive: bool) -> Result<(), RiskError> {
    let s = strip_of_regularity(p);
    let lo = if positive { 0.0 } else { s.nu_minus };
    if !(c.nu > lo && c.nu < s.nu_plus) {
        return Err(RiskError::OutsideStrip {
            nu: c.nu,
            lo,
            hi: s.nu_plus,
        });
    }
    if p.is_degenerate() {
        return Err(RiskError::DegeneratePortfolio);
    }
    Ok(())
}

/// `(1/π) ∫_0^∞ Re[h(ω) e^{iωx}] dω`. Callers strip the linear phase of the
/// characteristic function from `h` and fold it into `x`, which puts the
/// oscillation cells where the integrand actually turns.
fn re_transform<H>(h: H, x: f64, cfg: &QuadConfig) -> Result<Estimate, RiskError>
where
    H: Fn(f64) -> Complex64 + Sync,
{
    let ax = x.abs();
    let (c, s) = rayon::join(
        || fourier_cos(|w| h(w).re, ax, cfg),
        || fourier_sin(|w| h(w).im, ax, cfg),
    );
    let (c, s) = (c?, s?);
    let error = (c.abs_error_estimate + s.abs_error_estimate) / PI;
    if !(c.converged && s.converged) {
        return Err(RiskError::QuadratureFailure { error });
    }
    // Re[h e^{iωx}] = Re h cos(ωx) - Im h sin(ωx), and sin is odd in x
    let value = if x >= 0.0 { c.value - s.value } else { c.value + s.value } / PI;
    Ok(Estimate { value, error })
}

fn tuned(p: &RemappedPortfolio, c: &ContourChoice, cfg: &QuadConfig) -> QuadConfig {
    cfg.with_decay_scale(decay_scale(p, c.nu))
}

/// Clamps round-off negatives of a non-negative quantity.
fn non_negative(e: Estimate) -> Result<Estimate, RiskError> {
    if e.value >= 0.0 {
        Ok(e)
    } else if e.value >= -e.error {
        Ok(Estimate { value: 0.0, ..e })
    } else {
        Err(RiskError::QuadratureFailure { error: e.error })
    }
}

/// Clamps round-off excursions of a probability past 1.
fn at_most_one(e: Estimate) -> Result<Estimate, RiskError> {
    if e.value <= 1.0 {
        Ok(e)
    } else if e.value <= 1.0 + e.error {
        Ok(Estimate { value: 1.0, ..e })
    } else {
        Err(RiskError::QuadratureFailure { error: e.error })
    }
}

/// `P(V < -var)`.
pub fn tail_prob(
    p: &RemappedPortfolio,
    var: f64,
    c: &ContourChoice,
    cfg: &QuadConfig,
) -> Result<Estimate, RiskError> {
    check_contour(p, c, true)?;
    let (nu, shift) = (c.nu, phase_centre(p));
    let h = |w: f64| {
        let phi = Complex64::new(w, nu);
        (log_cf_centred(p, phi) - nu * (var + shift)).exp() / Complex64::new(nu, -w)
    };
    at_most_one(non_negative(re_transform(h, var + shift, &tuned(p, c, cfg))?)?)
}

/// Probability density of `V` at `v`. Any contour inside the strip works;
/// [`ContourChoice::saddle`] gives the best conditioning far in the tails.
pub fn density_at(
    p: &RemappedPortfolio,
    v: f64,
    c: &ContourChoice,
    cfg: &QuadConfig,
) -> Result<Estimate, RiskError> {
    check_contour(p, c, false)?;
    let (nu, shift) = (c.nu, phase_centre(p));
    let h = |w: f64| (log_cf_centred(p, Complex64::new(w, nu)) + nu * (v - shift)).exp();
    non_negative(re_transform(h, shift - v, &tuned(p, c, cfg))?)
}

/// Brent's method on the decreasing function `tail_prob(var) - level`.
pub fn var_for_level(
    p: &RemappedPortfolio,
    level: f64,
    c: &ContourChoice,
    cfg: &QuadConfig,
) -> Result<RiskPoint, RiskError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(RiskError::LevelOutOfRange(level));
    }
    check_contour(p, c, true)?;
    let m = p.moments();
    let sigma = m.std_dev();
    let g = |x: f64| tail_prob(p, x, c, cfg).map(|e| (e.value - level, e));

    let width = 4.0 * sigma;
    let (mut a, mut b) = (-m.mu1 - width, -m.mu1 + width);
    let probe = |x: f64| g(x).map(|(f, est)| Probe { x, f, est });
    let (mut lo, mut hi) = (probe(a)?, probe(b)?);
    let mut step = width;
    let mut tries = 0;
    while lo.f < 0.0 || hi.f > 0.0 {
        tries += 1;
        if tries > 60 {
            return Err(RiskError::BracketingFailure {
                level,
                lo: lo.x,
                hi: hi.x,
            });
        }
        step *= 2.0;
        if lo.f < 0.0 {
            hi = lo;
            a -= step;
            lo = probe(a)?;
        } else {
            lo = hi;
            b += step;
            hi = probe(b)?;
        }
    }

    let ftol = (1e-10 * level).max(1e-14);
    let xtol = 1e-12 * sigma.max(m.mu1.abs());
    let (var, est) = brent(g, lo, hi, ftol, xtol)?;

    let dens = density_at(p, -var, c, cfg)?;
    let residual = (est.value - level).abs();
    Ok(RiskPoint {
        level,
        attained_level: est.value,
        attained_error: est.error,
        var,
        var_error: (est.error + residual) / dens.value.max(f64::MIN_POSITIVE),
        density_at_var: dens.value,
        es: None,
        es_error: None,
        contour: *c,
    })
}

#[derive(Clone, Copy)]
struct Probe {
    x: f64,
    f: f64,
    est: Estimate,
}

fn brent<G>(g: G, a: Probe, b: Probe, ftol: f64, xtol: f64) -> Result<(f64, Estimate), RiskError>
where
    G: Fn(f64) -> Result<(f64, Estimate), RiskError>,
{
    let (mut a, mut b) = (a, b);
    let mut c = a;
    let mut d = b.x - a.x;
    let mut e = d;
    for _ in 0..200 {
        if b.f.signum() == c.f.signum() && b.f != 0.0 {
            c = a;
            d = b.x - a.x;
            e = d;
        }
        if c.f.abs() < b.f.abs() {
            a = b;
            b = c;
            c = a;
        }
        let tol = 0.5 * xtol + 2.0 * f64::EPSILON * b.x.abs();
        let half = 0.5 * (c.x - b.x);
        if b.f.abs() <= ftol || half.abs() <= tol {
            return Ok((b.x, b.est));
        }
        if e.abs() >= tol && a.f.abs() > b.f.abs() {
            // inverse quadratic interpolation, or secant when only two points
            let s = b.f / a.f;
            let (mut num, mut den);
            if a.x == c.x {
                num = 2.0 * half * s;
                den = 1.0 - s;
            } else {
                let q = a.f / c.f;
                let r = b.f / c.f;
                num = s * (2.0 * half * q * (q - r) - (b.x - a.x) * (r - 1.0));
                den = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if num > 0.0 {
                den = -den;
            }
            num = num.abs();
            if 2.0 * num < (3.0 * half * den - (tol * den).abs()).min((e * den).abs()) {
                e = d;
                d = num / den;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        let x = b.x + if d.abs() > tol { d } else { tol.copysign(half) };
        let (f, est) = g(x)?;
        b = Probe { x, f, est };
    }
    Ok((b.x, b.est))
}

/// Fills in the Expected Shortfall `E[-V | V < -var]` at the attained level
/// of `rp`.
pub fn expected_shortfall(
    p: &RemappedPortfolio,
    rp: &RiskPoint,
    c: &ContourChoice,
    cfg: &QuadConfig,
) -> Result<RiskPoint, RiskError> {
    check_contour(p, c, true)?;
    let (nu, var, prob) = (c.nu, rp.var, rp.attained_level);
    if !(prob > 0.0) {
        return Err(RiskError::LevelOutOfRange(prob));
    }
    let shift = phase_centre(p);
    let h = |w: f64| {
        let phi = Complex64::new(w, nu);
        (log_cf_centred(p, phi) - nu * (var + shift)).exp() / (phi * phi)
    };
    let j = re_transform(h, var + shift, &tuned(p, c, cfg))?;
    let es = var - j.value / prob;
    let es_error = j.error / prob + (es - var).abs() * rp.attained_error / prob;
    Ok(RiskPoint {
        es: Some(es),
        es_error: Some(es_error),
        ..*rp
    })
}

/// `∂VaR/∂β` for every parameter.
pub fn var_sensitivities(
    p: &RemappedPortfolio,
    rp: &RiskPoint,
    c: &ContourChoice,
    cfg: &QuadConfig,
) -> Result<SensitivityReport, RiskError> {
    sensitivity_report(p, rp, c, cfg, &Parameter::all(p.dim()), true, false)
}

/// `∂ES/∂β` for every parameter.
pub fn es_sensitivities(
    p: &RemappedPortfolio,
    rp: &RiskPoint,
    c: &ContourChoice,
    cfg: &QuadConfig,
) -> Result<SensitivityReport, RiskError> {
    sensitivity_report(p, rp, c, cfg, &Parameter::all(p.dim()), false, true)
}

/// VaR and ES sensitivities for the chosen parameters, evaluated in
/// parallel.
pub fn sensitivities(
    p: &RemappedPortfolio,
    rp: &RiskPoint,
    c: &ContourChoice,
    cfg: &QuadConfig,
    params: &[Parameter],
) -> Result<SensitivityReport, RiskError> {
    sensitivity_report(p, rp, c, cfg, params, true, true)
}

fn sensitivity_report(
    p: &RemappedPortfolio,
    rp: &RiskPoint,
    c: &ContourChoice,
    cfg: &QuadConfig,
    params: &[Parameter],
    want_var: bool,
    want_es: bool,
) -> Result<SensitivityReport, RiskError> {
    check_contour(p, c, true)?;
    for &b in params {
        check_parameter(p, b)?;
    }
    let dens = rp.density_at_var;
    let sigma = p.moments().std_dev();
    if want_var && !(dens >= 1e-300 / sigma) {
        return Err(RiskError::VanishingDensity { density: dens });
    }
    let prob = rp.attained_level;
    if want_es && !(prob > 0.0) {
        return Err(RiskError::LevelOutOfRange(prob));
    }
    // relative error of the density from the level residual is already in
    // var_error; here only its own quadrature error matters
    let dens_rel = rp.attained_error / prob.max(f64::MIN_POSITIVE);
    let (nu, x) = (c.nu, rp.var + phase_centre(p));
    let qc = tuned(p, c, cfg);

    let entries = params
        .par_iter()
        .map(|&b| {
            let weighted = |w: f64| {
                let phi = Complex64::new(w, nu);
                grad_factor(p, phi, b) * (log_cf_centred(p, phi) - nu * x).exp()
            };
            let dvar = if want_var {
                let i = re_transform(|w| weighted(w) / Complex64::new(nu, -w), x, &qc)?;
                let value = i.value / dens;
                Some(Estimate {
                    value,
                    error: i.error / dens + value.abs() * dens_rel,
                })
            } else {
                None
            };
            let des = if want_es {
                let i = re_transform(
                    |w| {
                        let phi = Complex64::new(w, nu);
                        weighted(w) / (phi * phi)
                    },
                    x,
                    &qc,
                )?;
                let value = -i.value / prob;
                Some(Estimate {
                    value,
                    error: i.error / prob + value.abs() * dens_rel,
                })
            } else {
                None
            };
            Ok(SensitivityEntry {
                parameter: b,
                dvar,
                des,
            })
        })
        .collect::<Result<Vec<_>, RiskError>>()?;
    Ok(SensitivityReport {
        entries,
        density_at_var: dens,
    })
}

/// VaR (and optionally ES) at several levels, computed concurrently.
pub fn risk_curve(
    p: &RemappedPortfolio,
    levels: &[f64],
    c: &ContourChoice,
    cfg: &QuadConfig,
    with_es: bool,
) -> Vec<Result<RiskPoint, RiskError>> {
    levels
        .par_iter()
        .map(|&level| {
            let rp = var_for_level(p, level, c, cfg)?;
            if with_es {
                expected_shortfall(p, &rp, c, cfg)
            } else {
                Ok(rp)
            }
        })
        .collect()
}
