/// Wynn's epsilon algorithm over the most recent partial sums. Returns the
/// highest even-column entry on the anti-diagonal that ends at the newest
/// term; columns stop when consecutive entries coincide or blow up.
pub(crate) fn wynn(seq: &[f64]) -> f64 {
    let m = seq.len();
    let Some(&last) = seq.last() else {
        return 0.0;
    };
    let mut best = last;
    let mut prev = vec![0.0; m + 1];
    let mut cur = seq.to_vec();
    let mut col = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let diff = cur[j + 1] - cur[j];
            let scale = cur[j + 1].abs().max(cur[j].abs());
            if diff.abs() <= 4.0 * f64::EPSILON * scale || !diff.is_finite() {
                if col % 2 == 0 && j + 2 == cur.len() {
                    best = cur[j + 1];
                }
                return best;
            }
            next.push(prev[j + 1] + 1.0 / diff);
        }
        col += 1;
        if col % 2 == 0 {
            match next.last() {
                Some(v) if v.is_finite() => best = *v,
                _ => return best,
            }
        }
        prev = cur;
        cur = next;
    }
    best
}

/// Tracks partial sums and successive extrapolations of a convergent series.
#[derive(Debug, Default)]
pub(crate) struct SeriesAccelerator {
    sums: Vec<f64>,
    terms: Vec<f64>,
    estimates: Vec<f64>,
}

const WINDOW: usize = 50;

impl SeriesAccelerator {
    pub fn push(&mut self, term: f64) {
        let s = self.sums.last().copied().unwrap_or(0.0) + term;
        self.sums.push(s);
        self.terms.push(term);
        let start = self.sums.len().saturating_sub(WINDOW);
        self.estimates.push(wynn(&self.sums[start..]));
    }

    pub fn partial_sum(&self) -> f64 {
        self.sums.last().copied().unwrap_or(0.0)
    }

    /// Best current limit estimate and its error, choosing between the
    /// extrapolated value and the raw partial sum.
    pub fn limit(&self) -> (f64, f64) {
        let n = self.sums.len();
        let s = self.partial_sum();
        if n < 2 {
            return (s, f64::INFINITY);
        }
        let direct_err = self.terms[n - 1].abs() + self.terms[n - 2].abs();
        if n < 4 {
            return (s, direct_err);
        }
        let r = self.estimates[n - 1];
        let ext_err = (1..=3)
            .map(|k| (r - self.estimates[n - 1 - k]).abs())
            .sum::<f64>()
            .max(5.0 * f64::EPSILON * r.abs());
        if ext_err < direct_err {
            (r, ext_err)
        } else {
            (s, direct_err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accelerates_alternating_harmonic() {
        let mut acc = SeriesAccelerator::default();
        for k in 0..20 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc.push(sign / (k as f64 + 1.0));
        }
        let (v, e) = acc.limit();
        let exact = std::f64::consts::LN_2;
        assert!((v - exact).abs() < 1e-10, "{v}");
        assert!(e < 1e-8 && (v - exact).abs() <= e * 10.0);
    }

    #[test]
    fn exact_on_geometric_series() {
        let seq: Vec<f64> = (0..6)
            .scan(0.0, |s, k| {
                *s += 0.7f64.powi(k);
                Some(*s)
            })
            .collect();
        assert!((wynn(&seq) - 1.0 / 0.3).abs() < 1e-12);
    }

    #[test]
    fn constant_sequence_is_its_own_limit() {
        assert_eq!(wynn(&[2.0, 2.0, 2.0, 2.0]), 2.0);
    }
}
