use std::sync::OnceLock;

use super::QuadError;

const ORDER: usize = 15;

struct Rule {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

/// Gauss-Legendre nodes on [-1, 1] by Newton iteration on `P_n`.
fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Rule { nodes, weights }
    })
}

/// One application of the rule: (integral, integral of |f|).
fn apply<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let (mut sum, mut abs) = (0.0, 0.0);
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        let t = mid + half * x;
        let y = f(t);
        if !y.is_finite() {
            return Err(QuadError::NonFiniteIntegrand { at: t });
        }
        sum += w * y;
        abs += w * y.abs();
    }
    Ok((sum * half, abs * half.abs()))
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Segment {
    fn value(&self) -> f64 {
        self.left + self.right
    }
}

/// Evaluates `[a, b]` as two halves and compares against the whole-interval
/// rule (supplied when already known from the parent).
fn segment<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: Option<f64>,
    evals: &mut usize,
) -> Result<Segment, QuadError> {
    let m = 0.5 * (a + b);
    let whole = match whole {
        Some(w) => w,
        None => {
            *evals += ORDER;
            apply(f, a, b)?.0
        }
    };
    let (left, la) = apply(f, a, m)?;
    let (right, ra) = apply(f, m, b)?;
    *evals += 2 * ORDER;
    let floor = 50.0 * f64::EPSILON * (la + ra);
    let error = (whole - (left + right)).abs().max(floor);
    Ok(Segment {
        a,
        b,
        left,
        right,
        error,
    })
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Piece {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// Breakpoints from `a` with widths `scale, 2 scale, 4 scale, ...`, so no
/// initial segment is much wider than the integrand's feature size near it.
fn presplit(a: f64, b: f64, scale: f64) -> Vec<f64> {
    let mut pts = vec![a];
    if scale.is_finite() && scale > 0.0 {
        let mut w = scale;
        let mut x = a + w;
        while x < b && pts.len() < 200 {
            pts.push(x);
            w *= 2.0;
            x += w;
        }
    }
    pts.push(b);
    pts
}

/// Adaptive bisection on `[a, b]` until the summed error estimate is at or
/// below `max(abs_tol, rel_tol * |value|)`, or `max_splits` bisections.
pub(crate) fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_splits: usize,
    feature_scale: f64,
) -> Result<Piece, QuadError> {
    let mut evals = 0;
    let pts = presplit(a, b, feature_scale);
    let mut segs = Vec::with_capacity(pts.len() + max_splits);
    for w in pts.windows(2) {
        segs.push(segment(f, w[0], w[1], None, &mut evals)?);
    }
    let mut splits = 0;
    loop {
        let value: f64 = segs.iter().map(Segment::value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(Piece {
                value,
                error,
                evals,
            });
        }
        let worst = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                let m = 0.5 * (s.a + s.b);
                m > s.a && m < s.b
            })
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        // out of splits: the caller sees the error and decides
        let Some(i) = worst.filter(|_| splits < max_splits) else {
            return Ok(Piece {
                value,
                error,
                evals,
            });
        };
        let s = segs.swap_remove(i);
        let m = 0.5 * (s.a + s.b);
        segs.push(segment(f, s.a, m, Some(s.left), &mut evals)?);
        segs.push(segment(f, m, s.b, Some(s.right), &mut evals)?);
        splits += 1;
    }
}
