//! Small dense least-squares kernels (Householder QR) used by the density and
//! smoothing fits. Matrices are row-major `rows x cols`.

use crate::Real;

/// Solves `min ||A x - b||` for a full-column-rank `A`. Returns `None` when a
/// column is numerically dependent on the others.
pub fn least_squares<T: Real>(a: &[T], rows: usize, cols: usize, b: &[T]) -> Option<Vec<T>> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    if rows < cols {
        return None;
    }
    let mut r = a.to_vec();
    let mut qtb = b.to_vec();
    let scale = r.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tol = scale * T::epsilon() * T::count(rows.max(cols)) * T::lit(10.0);

    for k in 0..cols {
        let norm = (k..rows).map(|i| r[i * cols + k].powi(2)).sum::<T>().sqrt();
        if norm <= tol {
            return None;
        }
        let alpha = if r[k * cols + k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..rows).map(|i| r[i * cols + k]).collect();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|x| *x * *x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        for j in k..cols {
            let dot: T = (k..rows).map(|i| v[i - k] * r[i * cols + j]).sum();
            let f = T::lit(2.0) * dot / vnorm2;
            for i in k..rows {
                r[i * cols + j] = r[i * cols + j] - f * v[i - k];
            }
        }
        let dot: T = (k..rows).map(|i| v[i - k] * qtb[i]).sum();
        let f = T::lit(2.0) * dot / vnorm2;
        for i in k..rows {
            qtb[i] = qtb[i] - f * v[i - k];
        }
    }

    let mut x = vec![T::zero(); cols];
    for k in (0..cols).rev() {
        let mut s = qtb[k];
        for j in (k + 1)..cols {
            s = s - r[k * cols + j] * x[j];
        }
        x[k] = s / r[k * cols + k];
    }
    Some(x)
}

/// Evaluates `c0 + c1 x + c2 x^2 + ...`.
pub fn polyval<T: Real>(coef: &[T], x: T) -> T {
    coef.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Least-squares polynomial of the given degree through `(xs, ys)`.
pub fn polyfit<T: Real>(xs: &[T], ys: &[T], degree: usize) -> Option<Vec<T>> {
    let cols = degree + 1;
    let mut a = Vec::with_capacity(xs.len() * cols);
    for &x in xs {
        let mut p = T::one();
        for _ in 0..cols {
            a.push(p);
            p = p * x;
        }
    }
    least_squares(&a, xs.len(), cols, ys)
}
