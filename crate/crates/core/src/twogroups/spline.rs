//! Natural cubic spline basis in truncated-power form.

use crate::Real;

/// Natural cubic spline basis with an explicit intercept column. With
/// `knots.len() == K` the basis has `K` columns: `1, u, d_k(u) - d_{K-1}(u)`
/// for `k = 1..K-2`, where `u` is the rescaled abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSplineBasis<T> {
    origin: T,
    width: T,
    knots: Vec<T>,
}

impl<T: Real> NaturalSplineBasis<T> {
    /// Boundary knots at `lo` / `hi`, `df - 1` interior knots at the
    /// quantiles `k / df` of `xs` (type-7 interpolation).
    pub fn from_quantiles(xs: &[T], df: usize) -> Self {
        let mut sorted = xs.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lo = sorted[0];
        let hi = sorted[sorted.len() - 1];
        let width = if hi > lo { hi - lo } else { T::one() };
        let mut knots = Vec::with_capacity(df + 1);
        knots.push(T::zero());
        for k in 1..df {
            let q = quantile_sorted(&sorted, T::count(k) / T::count(df));
            knots.push((q - lo) / width);
        }
        knots.push(T::one());
        Self { origin: lo, width, knots }
    }

    pub fn ncols(&self) -> usize {
        self.knots.len().max(2)
    }

    pub fn eval_into(&self, x: T, out: &mut Vec<T>) {
        out.clear();
        let u = (x - self.origin) / self.width;
        out.push(T::one());
        out.push(u);
        let k = self.knots.len();
        if k < 3 {
            return;
        }
        let last = self.knots[k - 1];
        let d = |knot: T| {
            let cube = |v: T| if v > T::zero() { v * v * v } else { T::zero() };
            (cube(u - knot) - cube(u - last)) / (last - knot)
        };
        let d_tail = d(self.knots[k - 2]);
        for &knot in &self.knots[..k - 2] {
            out.push(d(knot) - d_tail);
        }
    }

    pub fn eval(&self, x: T) -> Vec<T> {
        let mut v = Vec::with_capacity(self.ncols());
        self.eval_into(x, &mut v);
        v
    }
}

fn quantile_sorted<T: Real>(sorted: &[T], prob: T) -> T {
    let h = T::count(sorted.len() - 1) * prob;
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - lo) * (sorted[j] - sorted[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_count_matches_df_plus_intercept() {
        let xs: Vec<f64> = (0..120).map(|i| i as f64 * 0.1).collect();
        let b = NaturalSplineBasis::from_quantiles(&xs, 7);
        assert_eq!(b.ncols(), 8);
        assert_eq!(b.eval(3.3).len(), 8);
    }

    #[test]
    fn linear_beyond_boundary_knots() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let b = NaturalSplineBasis::from_quantiles(&xs, 5);
        // Second differences vanish outside [0, 49] for every column.
        for x0 in [-20.0, 60.0] {
            let (a, m, c) = (b.eval(x0 - 1.0), b.eval(x0), b.eval(x0 + 1.0));
            for k in 0..b.ncols() {
                assert!((a[k] - 2.0 * m[k] + c[k]).abs() < 1e-9, "col {k} at {x0}");
            }
        }
    }
}
