use dgn_core::benchmarks;
use dgn_core::fourier::{density_at, ContourChoice};
use dgn_core::mc::FrozenDraws;
use dgn_core::model::{
    asymptotic_left_log_density, cf, moments, remap, tail_profile, PortfolioSpec, TailRegime,
    DEFAULT_GROUP_TOL,
};
use dgn_core::quad::QuadConfig;
use dgn_core::Complex64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn correlated_spec() -> PortfolioSpec {
    let a = DMatrix::from_row_slice(
        4,
        4,
        &[1.0, 0.3, 0.0, -0.2, 0.1, 0.8, 0.4, 0.0, 0.0, -0.3, 1.2, 0.5, 0.2, 0.0, 0.1, 0.6],
    );
    let sigma = &a * a.transpose();
    let gamma = DMatrix::from_row_slice(
        4,
        4,
        &[0.5, -1.0, 0.2, 0.0, -1.0, 1.5, 0.0, 0.3, 0.2, 0.0, -2.0, 0.4, 0.0, 0.3, 0.4, 0.8],
    );
    PortfolioSpec::new(0.3, DVector::from_vec(vec![1.0, -0.5, 2.0, 0.7]), gamma, sigma).unwrap()
}

#[test]
fn remap_preserves_value_pointwise() {
    let spec = correlated_spec();
    let p = remap(&spec).unwrap();
    let c = p.factor_map().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let y: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let x = c * DVector::from_column_slice(&y);
        let (a, b) = (spec.value_at(&x), p.value_at(&y));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

#[test]
fn remapped_law_matches_raw_law() {
    let spec = correlated_spec();
    let p = remap(&spec).unwrap();
    let chol = spec.sigma().clone().cholesky().unwrap();
    let l = chol.l();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 100_000;
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            let z = DVector::from_fn(4, |_, _| rng.sample::<f64, _>(StandardNormal));
            spec.value_at(&(&l * z))
        })
        .collect();
    let rem = FrozenDraws::new(9, 4, n)
        .values(p.theta(), p.delta(), p.lambda())
        .unwrap();
    let d = ks(raw, rem);
    // 0.1% critical value
    let crit = 1.949 * (2.0 / n as f64).sqrt();
    assert!(d < crit, "KS {d} vs {crit}");
}

#[test]
fn cf_matches_sample_expectation() {
    let p = benchmarks::negative_min();
    let phi = Complex64::new(0.3, 0.1);
    let want = cf(&p, phi).unwrap();
    let values = FrozenDraws::new(4, p.dim(), 1_000_000)
        .values(p.theta(), p.delta(), p.lambda())
        .unwrap();
    let n = values.len() as f64;
    let terms: Vec<Complex64> = values
        .iter()
        .map(|&v| (Complex64::i() * phi * v).exp())
        .collect();
    let mean = terms.iter().sum::<Complex64>() / n;
    let var_re = terms.iter().map(|t| (t.re - mean.re).powi(2)).sum::<f64>() / n;
    let var_im = terms.iter().map(|t| (t.im - mean.im).powi(2)).sum::<f64>() / n;
    assert!((mean.re - want.re).abs() <= 3.0 * (var_re / n).sqrt());
    assert!((mean.im - want.im).abs() <= 3.0 * (var_im / n).sqrt());
}

#[test]
fn raw_moments_agree_with_remapped() {
    let spec = correlated_spec();
    let a = moments(&spec);
    let b = remap(&spec).unwrap().moments();
    for (x, y) in [(a.mu1, b.mu1), (a.mu2, b.mu2), (a.mu3, b.mu3), (a.mu4, b.mu4)] {
        assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
    }
}

#[test]
fn zero_min_gaussian_tail_recovers_linear_weight() {
    // fit log p - m ln|v - V0| = c + b (v - V0) - (v - V0)^2 / (2 w) on [-25, -15]
    let p = benchmarks::zero_min();
    let tp = tail_profile(&p, DEFAULT_GROUP_TOL);
    assert_eq!(tp.regime, TailRegime::ZeroMin);
    let v0 = tp.v0.unwrap();
    let cfg = QuadConfig::default();
    let mut xtx = DMatrix::<f64>::zeros(3, 3);
    let mut xty = DVector::<f64>::zeros(3);
    for k in 0..41 {
        let v = -25.0 + 0.25 * k as f64;
        let c = ContourChoice::saddle(&p, v);
        let d = density_at(&p, v, &c, &cfg).unwrap().value;
        let u = v - v0;
        let row = DVector::from_vec(vec![1.0, u, u * u]);
        xtx += &row * row.transpose();
        xty += &row * (d.ln() - tp.m_bar * u.abs().ln());
    }
    let beta = xtx.lu().solve(&xty).unwrap();
    let w = -1.0 / (2.0 * beta[2]);
    assert!((w - 5.0).abs() <= 0.5, "fitted weight {w}");
    // the asymptotic form tracks the reconstruction up to a constant
    let at = |v: f64| {
        let c = ContourChoice::saddle(&p, v);
        density_at(&p, v, &c, &cfg).unwrap().value.ln() - asymptotic_left_log_density(&tp, v).unwrap()
    };
    assert!((at(-25.0) - at(-20.0)).abs() < 0.5);
}
