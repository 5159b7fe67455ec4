//! The three 15-factor reference portfolios, one per left-tail regime.
//! All have `theta = 0` and unit linear exposure on every factor.

use crate::model::RemappedPortfolio;

fn build(groups: &[(usize, f64)]) -> RemappedPortfolio {
    let lambda: Vec<f64> = groups
        .iter()
        .flat_map(|&(m, l)| std::iter::repeat_n(l, m))
        .collect();
    RemappedPortfolio::new(0.0, vec![1.0; lambda.len()], lambda)
        .expect("reference parameters are valid")
}

/// Five factors at `lambda = -2`, four at 1, six at 2.
pub fn negative_min() -> RemappedPortfolio {
    build(&[(5, -2.0), (4, 1.0), (6, 2.0)])
}

/// Five factors at `lambda = 0`, four at 1, six at 2.
pub fn zero_min() -> RemappedPortfolio {
    build(&[(5, 0.0), (4, 1.0), (6, 2.0)])
}

/// Four factors at `lambda = 1`, eleven at 2. Support starts at -4.75.
pub fn positive_min() -> RemappedPortfolio {
    build(&[(4, 1.0), (11, 2.0)])
}

/// Indices of the first factor of each eigenvalue group.
pub fn group_leaders(p: &RemappedPortfolio) -> Vec<usize> {
    let l = p.lambda();
    (0..l.len()).filter(|&i| i == 0 || l[i] != l[i - 1]).collect()
}
