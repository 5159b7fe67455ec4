use nalgebra::DMatrix;

use super::{PortfolioSpec, RemappedPortfolio};

/// Mean, central moments two to four, skewness and excess kurtosis of `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    /// `None` for a constant portfolio.
    pub skewness: Option<f64>,
    /// `None` for a constant portfolio.
    pub excess_kurtosis: Option<f64>,
}

impl MomentSet {
    /// `k4` is the fourth cumulant, `mu4 - 3 mu2^2`.
    fn from_parts(mu1: f64, mu2: f64, mu3: f64, k4: f64) -> Self {
        let mu4 = k4 + 3.0 * mu2 * mu2;
        let (skewness, excess_kurtosis) = if mu2 > 0.0 {
            (Some(mu3 / mu2.powf(1.5)), Some(k4 / (mu2 * mu2)))
        } else {
            (None, None)
        };
        Self {
            mu1,
            mu2,
            mu3,
            mu4,
            skewness,
            excess_kurtosis,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.mu2.sqrt()
    }
}

/// Moments from the raw quadratic form via traces of powers of `gamma sigma`.
pub fn moments(spec: &PortfolioSpec) -> MomentSet {
    let sigma = spec.sigma();
    let delta = spec.delta();
    let gs: DMatrix<f64> = spec.gamma() * sigma;
    let gs2 = &gs * &gs;
    let gs3 = &gs2 * &gs;
    let gs4 = &gs2 * &gs2;
    let sd = sigma * delta;

    let mu1 = spec.theta() + 0.5 * gs.trace();
    let mu2 = delta.dot(&sd) + 0.5 * gs2.trace();
    let mu3 = 3.0 * sd.dot(&(spec.gamma() * &sd)) + gs3.trace();
    // delta' sigma (gamma sigma)^2 delta = (sigma delta)' gamma sigma gamma (sigma delta)
    let gsd = spec.gamma() * &sd;
    let k4 = 12.0 * gsd.dot(&(sigma * &gsd)) + 3.0 * gs4.trace();
    MomentSet::from_parts(mu1, mu2, mu3, k4)
}

impl RemappedPortfolio {
    /// Same moments as [`moments`] with `sigma = I`, `gamma = diag(lambda)`.
    pub fn moments(&self) -> MomentSet {
        let mut mu1 = self.theta();
        let (mut mu2, mut mu3, mut k4) = (0.0, 0.0, 0.0);
        for (&d, &l) in self.delta().iter().zip(self.lambda()) {
            let (d2, l2) = (d * d, l * l);
            mu1 += 0.5 * l;
            mu2 += d2 + 0.5 * l2;
            mu3 += 3.0 * d2 * l + l2 * l;
            k4 += 12.0 * d2 * l2 + 3.0 * l2 * l2;
        }
        MomentSet::from_parts(mu1, mu2, mu3, k4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks;
    use crate::model::remap;
    use nalgebra::DVector;

    #[test]
    fn negative_min_case_values() {
        let m = benchmarks::negative_min().moments();
        assert_eq!(m.mu1, 3.0);
        assert_eq!(m.mu2, 39.0);
        assert_eq!(m.mu3, 30.0);
        assert_eq!(m.mu4, 5679.0);
    }

    #[test]
    fn linear_portfolio_is_gaussian() {
        let spec = PortfolioSpec::new(
            0.0,
            DVector::from_vec(vec![1.0, -2.0, 0.5]),
            DMatrix::zeros(3, 3),
            DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5]),
        )
        .unwrap();
        let m = moments(&spec);
        assert_eq!(m.skewness, Some(0.0));
        assert_eq!(m.excess_kurtosis, Some(0.0));
    }

    #[test]
    fn constant_portfolio_has_no_shape() {
        let p = RemappedPortfolio::new(7.0, vec![0.0; 3], vec![0.0; 3]).unwrap();
        let m = p.moments();
        assert_eq!((m.mu1, m.mu2, m.mu3, m.mu4), (7.0, 0.0, 0.0, 0.0));
        assert!(m.skewness.is_none() && m.excess_kurtosis.is_none());
    }

    #[test]
    fn remap_invariance() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, -0.3, 0.4, 2.0, 0.1, 0.0, -0.5, 1.5]);
        let spec = PortfolioSpec::new(
            0.25,
            DVector::from_vec(vec![0.3, -1.0, 2.0]),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.5, -2.0, 0.3, 0.0, 0.3, 0.7]),
            &a * a.transpose(),
        )
        .unwrap();
        let raw = moments(&spec);
        let rem = remap(&spec).unwrap().moments();
        for (x, y) in [
            (raw.mu1, rem.mu1),
            (raw.mu2, rem.mu2),
            (raw.mu3, rem.mu3),
            (raw.mu4, rem.mu4),
        ] {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0), "{x} vs {y}");
        }
    }
}
