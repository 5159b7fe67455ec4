//! Semi-infinite Fourier integrals `∫_0^∞ g(ω) cos(ωx) dω` and
//! `∫_0^∞ g(ω) sin(ωx) dω`.
//!
//! For `x > 0` the half-line is cut into half-period cells
//! `[kπ/x, (k+1)π/x]`. Each cell is integrated adaptively with a 15-point
//! Gauss-Legendre rule checked against one bisection; the alternating
//! sequence of partial sums is then accelerated with Wynn's epsilon
//! algorithm. For `x = 0` (or `x` so small that a single cell would span the
//! whole support many times over) the cells are replaced by geometrically
//! growing panels `[0, Ω], [Ω, 2Ω], [2Ω, 4Ω], ...` and the same accelerator
//! supplies the tail estimate.

mod epsilon;
mod gauss;

use std::f64::consts::PI;

use epsilon::SeriesAccelerator;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("integrand returned a non-finite value at ω = {at}")]
    NonFiniteIntegrand { at: f64 },
    #[error("oscillation frequency must be finite and non-negative, got {0}")]
    InvalidFrequency(f64),
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of cells (or panels) summed.
    pub max_cycles: usize,
    /// Maximum bisections inside one cell.
    pub max_subdivisions_per_cycle: usize,
    /// Frequency scale `Ω` over which the integrand changes appreciably.
    /// Only affects efficiency: it sets the initial sub-interval width and
    /// the crossover to the non-oscillatory path.
    pub decay_scale: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-9,
            max_cycles: 200,
            max_subdivisions_per_cycle: 50,
            decay_scale: 1.0,
        }
    }
}

impl QuadConfig {
    pub fn with_decay_scale(self, decay_scale: f64) -> Self {
        Self {
            decay_scale,
            ..self
        }
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }

    fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(QuadError::InvalidConfig("tolerances must be positive"));
        }
        if self.max_cycles == 0 || self.max_subdivisions_per_cycle == 0 {
            return Err(QuadError::InvalidConfig("cycle limits must be positive"));
        }
        if !(self.decay_scale > 0.0 && self.decay_scale.is_finite()) {
            return Err(QuadError::InvalidConfig("decay scale must be positive"));
        }
        Ok(())
    }

    pub fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    /// False when `max_cycles` ran out; `value` is then the best estimate.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
enum Weight {
    Cos,
    Sin,
}

/// `∫_0^∞ g(ω) cos(ωx) dω`.
pub fn fourier_cos<G: Fn(f64) -> f64>(
    g: G,
    x: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    oscillatory(&g, x, Weight::Cos, cfg)
}

/// `∫_0^∞ g(ω) sin(ωx) dω`.
pub fn fourier_sin<G: Fn(f64) -> f64>(
    g: G,
    x: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    oscillatory(&g, x, Weight::Sin, cfg)
}

// below this value of x * Ω one half-period holds the whole support
const CROSSOVER: f64 = 1e-12;

fn oscillatory<G: Fn(f64) -> f64>(
    g: &G,
    x: f64,
    weight: Weight,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    cfg.validate()?;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(QuadError::InvalidFrequency(x));
    }
    if x == 0.0 && matches!(weight, Weight::Sin) {
        return Ok(QuadResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    let omega = cfg.decay_scale;
    let h = |w: f64| {
        let k = match weight {
            Weight::Cos => (w * x).cos(),
            Weight::Sin => (w * x).sin(),
        };
        g(w) * k
    };
    let panels = x * omega < PI * CROSSOVER;
    let cell = PI / x;
    let interval = |k: usize| -> (f64, f64) {
        if panels {
            let lo = if k == 0 { 0.0 } else { omega * 2f64.powi(k as i32 - 1) };
            (lo, omega * 2f64.powi(k as i32))
        } else {
            (k as f64 * cell, (k + 1) as f64 * cell)
        }
    };

    let mut acc = SeriesAccelerator::default();
    let mut cell_err = 0.0;
    let mut evals = 0;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..cfg.max_cycles {
        let (a, b) = interval(k);
        let share = 0.1 * 0.9f64.powi(k as i32);
        let abs_target = share * cfg.tolerance_for(acc.partial_sum());
        let piece = gauss::adaptive(
            &h,
            a,
            b,
            abs_target,
            0.1 * cfg.rel_tol,
            cfg.max_subdivisions_per_cycle,
            omega,
        )?;
        evals += piece.evals;
        cell_err += piece.error;
        acc.push(piece.value);

        let (value, ext_err) = acc.limit();
        let err = ext_err + cell_err;
        if err < best.1 {
            best = (value, err);
        }
        if k >= 2 && err <= cfg.tolerance_for(value) {
            return Ok(QuadResult {
                value,
                abs_error_estimate: err,
                evaluations: evals,
                converged: true,
            });
        }
    }
    Ok(QuadResult {
        value: best.0,
        abs_error_estimate: best.1,
        evaluations: evals,
        converged: false,
    })
}
