use crate::model::{cumulant_and_slope, strip_of_regularity, RemappedPortfolio};

use super::RiskError;

/// Horizontal integration contour `Im(phi) = nu` and the strip it lives in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourChoice {
    pub nu: f64,
    pub nu_minus: f64,
    pub nu_plus: f64,
}

impl ContourChoice {
    /// Contour for tail probabilities, Expected Shortfall and sensitivities,
    /// which need `0 < nu < nu_plus`.
    pub fn new(p: &RemappedPortfolio, nu: f64) -> Result<Self, RiskError> {
        let s = strip_of_regularity(p);
        if !(nu > 0.0 && nu < s.nu_plus) {
            return Err(RiskError::OutsideStrip {
                nu,
                lo: 0.0,
                hi: s.nu_plus,
            });
        }
        Ok(Self {
            nu,
            nu_minus: s.nu_minus,
            nu_plus: s.nu_plus,
        })
    }

    /// Contour for the density alone, which accepts any `nu` in the strip.
    pub fn for_density(p: &RemappedPortfolio, nu: f64) -> Result<Self, RiskError> {
        let s = strip_of_regularity(p);
        if !s.contains(nu) {
            return Err(RiskError::OutsideStrip {
                nu,
                lo: s.nu_minus,
                hi: s.nu_plus,
            });
        }
        Ok(Self {
            nu,
            nu_minus: s.nu_minus,
            nu_plus: s.nu_plus,
        })
    }

    /// Density contour through the exponential-tilting point of `v`, where
    /// `e^{nu v} E[e^{-nu V}]` is smallest and the inversion integral carries
    /// no cancellation. Kept a little inside the strip.
    pub fn saddle(p: &RemappedPortfolio, v: f64) -> Self {
        let s = strip_of_regularity(p);
        let sigma = p.moments().std_dev().max(f64::MIN_POSITIVE);
        let reach = 1e4 / sigma;
        // tilt parameter t = -nu solves K'(t) = v
        let t_lo = if s.nu_plus.is_finite() { -s.nu_plus } else { -reach };
        let t_hi = if s.nu_minus.is_finite() { -s.nu_minus } else { reach };
        let (mut lo, mut hi) = (t_lo, t_hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if cumulant_and_slope(p, mid).1 < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let margin = 0.02;
        let mut nu = -t;
        if s.nu_plus.is_finite() {
            nu = nu.min(s.nu_plus * (1.0 - margin));
        }
        if s.nu_minus.is_finite() {
            nu = nu.max(s.nu_minus * (1.0 - margin));
        }
        Self {
            nu,
            nu_minus: s.nu_minus,
            nu_plus: s.nu_plus,
        }
    }
}

/// Default contour: midway to the first singularity when there is one,
/// otherwise one inverse standard deviation. A singularity far away (a
/// nearly vanishing negative eigenvalue) is treated like none: the midpoint
/// is capped at two inverse standard deviations.
pub fn choose_nu(p: &RemappedPortfolio) -> Result<ContourChoice, RiskError> {
    let m = p.moments();
    if !(m.mu2 > 0.0) {
        return Err(RiskError::DegeneratePortfolio);
    }
    let s = strip_of_regularity(p);
    let inv_sd = 1.0 / m.mu2.sqrt();
    let nu = if s.nu_plus.is_finite() {
        (0.5 * s.nu_plus).min(2.0 * inv_sd)
    } else {
        inv_sd
    };
    ContourChoice::new(p, nu)
}

/// Frequency scale on which the inversion integrands vary along the contour:
/// the Gaussian envelope width, the onset of the power-law regime, and the
/// distance of the contour from the nearest singularity.
pub(crate) fn decay_scale(p: &RemappedPortfolio, nu: f64) -> f64 {
    let sigma = p.moments().std_dev();
    let lmax = p.lambda().iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let mut omega = 1.0 / sigma.max(lmax).max(f64::MIN_POSITIVE);
    for &l in p.lambda() {
        if l != 0.0 {
            omega = omega.min((1.0 + l * nu) / l.abs());
        }
    }
    omega
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks;

    #[test]
    fn default_contours() {
        let c = choose_nu(&benchmarks::negative_min()).unwrap();
        assert_eq!(c.nu, 0.25);
        let p = benchmarks::positive_min();
        let c = choose_nu(&p).unwrap();
        assert_eq!(c.nu, 1.0 / 39f64.sqrt());
    }

    #[test]
    fn boundary_exclusion() {
        let p = benchmarks::negative_min();
        assert!(ContourChoice::new(&p, 0.49).is_ok());
        assert!(matches!(
            ContourChoice::new(&p, 0.5),
            Err(RiskError::OutsideStrip { .. })
        ));
        assert!(ContourChoice::new(&p, 0.0).is_err());
        assert!(ContourChoice::for_density(&p, -0.3).is_ok());
    }

    #[test]
    fn distant_singularity_is_capped() {
        let p = RemappedPortfolio::new(0.0, vec![1.0, 1.0], vec![-1e-6, 1.0]).unwrap();
        let c = choose_nu(&p).unwrap();
        assert_eq!(c.nu, 2.0 / p.moments().std_dev());
    }

    #[test]
    fn degenerate_rejected() {
        let p = RemappedPortfolio::new(3.0, vec![0.0], vec![0.0]).unwrap();
        assert!(matches!(choose_nu(&p), Err(RiskError::DegeneratePortfolio)));
    }

    #[test]
    fn saddle_of_gaussian_is_standardized_distance() {
        // K(t) = t^2 / 2 for a standard normal, so K'(t) = v at t = v
        let p = RemappedPortfolio::new(0.0, vec![1.0], vec![0.0]).unwrap();
        for v in [-3.0, -0.5, 2.0] {
            let c = ContourChoice::saddle(&p, v);
            assert!((c.nu + v).abs() < 1e-9);
        }
    }

    #[test]
    fn saddle_stays_inside_strip() {
        let p = benchmarks::negative_min();
        for v in [-200.0, -40.0, 0.0, 40.0, 200.0] {
            let c = ContourChoice::saddle(&p, v);
            assert!(c.nu > c.nu_minus && c.nu < c.nu_plus, "v={v}: {}", c.nu);
        }
    }
}
