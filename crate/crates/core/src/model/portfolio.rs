use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::ModelError;

const SYMMETRY_TOL: f64 = 1e-12;

/// Raw quadratic portfolio over a fixed horizon:
/// `V = theta + delta' X + X' gamma X / 2` with `X ~ N(0, sigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioSpec {
    theta: f64,
    delta: DVector<f64>,
    gamma: DMatrix<f64>,
    sigma: DMatrix<f64>,
}

impl PortfolioSpec {
    pub fn new(
        theta: f64,
        delta: DVector<f64>,
        gamma: DMatrix<f64>,
        sigma: DMatrix<f64>,
    ) -> Result<Self, ModelError> {
        let n = delta.len();
        for (name, m) in [("gamma", &gamma), ("sigma", &sigma)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(ModelError::DimensionMismatch {
                    what: name,
                    expected: n,
                    found: if m.nrows() != n { m.nrows() } else { m.ncols() },
                });
            }
        }
        if !theta.is_finite()
            || delta.iter().chain(gamma.iter()).chain(sigma.iter()).any(|x| !x.is_finite())
        {
            return Err(ModelError::NonFinite);
        }
        check_symmetric("gamma", &gamma)?;
        check_symmetric("sigma", &sigma)?;
        if sigma.clone().cholesky().is_none() {
            return Err(ModelError::NotPositiveDefinite);
        }
        Ok(Self {
            theta,
            delta,
            gamma,
            sigma,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.delta.len()
    }

    /// Value of the portfolio variation for one risk-factor move `x`.
    pub fn value_at(&self, x: &DVector<f64>) -> f64 {
        self.theta + self.delta.dot(x) + 0.5 * x.dot(&(&self.gamma * x))
    }
}

fn check_symmetric(what: &'static str, m: &DMatrix<f64>) -> Result<(), ModelError> {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(ModelError::AsymmetricInput { what, row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Portfolio expressed in independent standard-normal factors:
/// `V = theta + sum_i (delta_i Y_i + lambda_i Y_i^2 / 2)`.
///
/// `lambda` is kept sorted ascending; ties are ordered by descending `|delta|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RemappedPortfolio {
    theta: f64,
    delta: Vec<f64>,
    lambda: Vec<f64>,
    factor_map: Option<DMatrix<f64>>,
}

impl RemappedPortfolio {
    /// Builds a portfolio directly from independent-factor parameters. The
    /// pairs `(delta_i, lambda_i)` are reordered into canonical order.
    pub fn new(theta: f64, delta: Vec<f64>, lambda: Vec<f64>) -> Result<Self, ModelError> {
        if delta.len() != lambda.len() {
            return Err(ModelError::DimensionMismatch {
                what: "lambda",
                expected: delta.len(),
                found: lambda.len(),
            });
        }
        if !theta.is_finite() || delta.iter().chain(&lambda).any(|x| !x.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        let order = canonical_order(&delta, &lambda);
        Ok(Self {
            theta,
            delta: order.iter().map(|&i| delta[i]).collect(),
            lambda: order.iter().map(|&i| lambda[i]).collect(),
            factor_map: None,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// The matrix `C` with `C C' = sigma` and `C' gamma C = diag(lambda)`,
    /// present only when built by [`remap`].
    pub fn factor_map(&self) -> Option<&DMatrix<f64>> {
        self.factor_map.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.delta.len()
    }

    /// True when `V` is the constant `theta`.
    pub fn is_degenerate(&self) -> bool {
        self.delta.iter().chain(&self.lambda).all(|&x| x == 0.0)
    }

    /// Same portfolio with `theta` replaced.
    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta,
            ..self.clone()
        }
    }

    /// Portfolio variation for one draw of the independent factors.
    pub fn value_at(&self, y: &[f64]) -> f64 {
        self.theta
            + self
                .delta
                .iter()
                .zip(&self.lambda)
                .zip(y)
                .map(|((d, l), y)| d * y + 0.5 * l * y * y)
                .sum::<f64>()
    }
}

fn canonical_order(delta: &[f64], lambda: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..delta.len()).collect();
    order.sort_by(|&a, &b| {
        lambda[a]
            .total_cmp(&lambda[b])
            .then(delta[b].abs().total_cmp(&delta[a].abs()))
    });
    order
}

/// Solves `C C' = sigma`, `C' gamma C = diag(lambda)` with `C = L O`, where
/// `L` is the Cholesky factor of `sigma` and `O` diagonalizes `L' gamma L`.
///
/// Column signs of `C` are fixed so that every remapped `delta_i >= 0` (the
/// law of `V` is invariant under `Y_i -> -Y_i`).
pub fn remap(spec: &PortfolioSpec) -> Result<RemappedPortfolio, ModelError> {
    let chol = spec
        .sigma
        .clone()
        .cholesky()
        .ok_or(ModelError::NotPositiveDefinite)?;
    let l = chol.l();
    let mut whitened = l.transpose() * &spec.gamma * &l;
    // symmetrize away round-off before the symmetric solver
    let wt = whitened.transpose();
    whitened = (whitened + wt) * 0.5;
    let eig = SymmetricEigen::new(whitened);
    let mut c = &l * &eig.eigenvectors;
    let mut delta: Vec<f64> = (c.transpose() * &spec.delta).iter().copied().collect();

    for (j, d) in delta.iter_mut().enumerate() {
        let flip = if *d != 0.0 {
            *d < 0.0
        } else {
            c.column(j)
                .iter()
                .find(|v| **v != 0.0)
                .is_some_and(|v| *v < 0.0)
        };
        if flip {
            *d = -*d;
            c.column_mut(j).neg_mut();
        }
    }

    let lambda: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let order = canonical_order(&delta, &lambda);
    let n = order.len();
    let factor_map = DMatrix::from_fn(n, n, |r, k| c[(r, order[k])]);
    Ok(RemappedPortfolio {
        theta: spec.theta,
        delta: order.iter().map(|&i| delta[i]).collect(),
        lambda: order.iter().map(|&i| lambda[i]).collect(),
        factor_map: Some(factor_map),
    })
}
