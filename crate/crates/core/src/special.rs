//! Special functions: log-gamma, incomplete gamma/beta, the normal CDF and
//! quantile, and the Student-t CDF.
//!
//! Everything is computed in `T`. Tails are evaluated directly (never as
//! `1 - cdf`) so that quantiles of extreme probabilities do not saturate.

use crate::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_ITER: usize = 20_000;

/// ln Γ(x) for x > 0.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::count(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + acc.ln()
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    if x < a + T::one() {
        T::one() - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x < a + T::one() {
        gamma_p_series(a, x)
    } else {
        T::one() - gamma_q_cf(a, x)
    }
}

fn gamma_p_series<T: Real>(a: T, x: T) -> T {
    let mut ap = a;
    let mut del = T::one() / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * T::iter_eps() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_cf<T: Real>(a: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::iter_eps();
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -T::count(i) * (T::count(i) - a);
        b = b + T::lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < T::iter_eps() {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x.is_nan() {
        return x;
    }
    // erfc(27) < 1e-318 underflows every supported type.
    if x.abs() > T::lit(27.0) {
        return if x > T::zero() { T::zero() } else { T::lit(2.0) };
    }
    if x >= T::zero() {
        gamma_q(half, x * x)
    } else {
        T::lit(2.0) - gamma_q(half, x * x)
    }
}

pub fn normal_pdf<T: Real>(x: T) -> T {
    T::lit(1.0 / (2.0 * std::f64::consts::PI).sqrt()) * (-x * x * T::lit(0.5)).exp()
}

/// Standard normal CDF Φ(x).
pub fn normal_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * erfc(-x / T::lit(std::f64::consts::SQRT_2))
}

/// Standard normal upper tail 1 − Φ(x), computed without cancellation.
pub fn normal_sf<T: Real>(x: T) -> T {
    T::lit(0.5) * erfc(x / T::lit(std::f64::consts::SQRT_2))
}

// Acklam's rational approximation, refined below by Halley steps.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn acklam_lower(p: f64) -> f64 {
    // p in (0, 0.5]
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Quantile of the lower tail: returns x ≤ 0 with Φ(x) = p, for p ∈ (0, 1/2].
fn lower_quantile<T: Real>(p: T) -> T {
    let pf = p.to_f64_lossy();
    let mut x = if pf > 0.0 {
        T::lit(acklam_lower(pf))
    } else {
        // Below f64 range for the initial guess (only reachable for exotic T).
        T::lit(-38.0)
    };
    for _ in 0..3 {
        let cdf = normal_cdf(x);
        let pdf = normal_pdf(x);
        if pdf <= T::zero() {
            break;
        }
        // Relative residual keeps the step well-scaled deep in the tail.
        let e = (cdf - p) / pdf;
        let step = e / (T::one() + x * e * T::lit(0.5));
        x = x - step;
        if step.abs() <= T::iter_eps() * x.abs().max(T::one()) {
            break;
        }
    }
    x
}

/// Standard normal quantile Φ⁻¹(p). Returns ±∞ at p ∈ {0, 1}, NaN outside [0, 1].
pub fn normal_quantile<T: Real>(p: T) -> T {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return T::nan();
    }
    if p == T::zero() {
        return T::neg_infinity();
    }
    if p == T::one() {
        return T::infinity();
    }
    let half = T::lit(0.5);
    if p <= half {
        lower_quantile(p)
    } else {
        -lower_quantile(T::one() - p)
    }
}

/// Φ⁻¹(1 − q) evaluated from the upper-tail probability q directly.
pub fn normal_quantile_upper<T: Real>(q: T) -> T {
    -normal_quantile(q)
}

/// Regularized incomplete beta I_x(a, b). `one_minus_x` is passed separately
/// so callers can supply it without cancellation.
pub fn beta_reg<T: Real>(a: T, b: T, x: T, one_minus_x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if one_minus_x <= T::zero() {
        return T::one();
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * one_minus_x.ln();
    let front = ln_front.exp();
    if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        T::one() - front * beta_cf(b, a, one_minus_x) / b
    }
}

fn beta_cf<T: Real>(a: T, b: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::iter_eps();
    let two = T::lit(2.0);
    let qab = a + b;
    let qap = a + T::one();
    let qam = a - T::one();
    let mut c = T::one();
    let mut d = T::one() - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = T::one() / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let mf = T::count(m);
        let m2 = two * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = T::one() + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = T::one() + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        h = h * d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = T::one() + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = T::one() + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < T::iter_eps() {
            break;
        }
    }
    h
}

/// One tail of the Student-t distribution: P(T_df ≥ |t|).
pub fn student_t_tail<T: Real>(t: T, df: T) -> T {
    let t2 = t * t;
    let denom = df + t2;
    T::lit(0.5) * beta_reg(df * T::lit(0.5), T::lit(0.5), df / denom, t2 / denom)
}

/// Student-t CDF F(t; df).
pub fn student_t_cdf<T: Real>(t: T, df: T) -> T {
    let tail = student_t_tail(t, df);
    if t < T::zero() {
        tail
    } else {
        T::one() - tail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values below were computed with 40-digit arbitrary precision.

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn ln_gamma_values() {
        assert!(rel(ln_gamma(0.5), 0.572_364_942_924_700_087) < 1e-14);
        assert!(rel(ln_gamma(3.7), 1.428_072_326_665_387_922) < 1e-14);
        assert!(rel(ln_gamma(50.0), 144.565_743_946_344_886) < 1e-14);
        assert!(rel(ln_gamma(1e-3), 6.907_178_885_383_853_68) < 1e-13);
    }

    #[test]
    fn erfc_values() {
        assert!(rel(erfc(0.1), 0.887_537_083_981_715_107_8) < 1e-14);
        assert!(rel(erfc(1.0), 0.157_299_207_050_285_130_66) < 1e-14);
        assert!(rel(erfc(3.0), 2.209_049_699_858_544_137e-5) < 1e-13);
        assert!(rel(erfc(10.0), 2.088_487_583_762_544_757e-45) < 1e-12);
        assert!(rel(erfc(-1.0), 2.0 - 0.157_299_207_050_285_130_66) < 1e-15);
    }

    #[test]
    fn normal_quantile_values() {
        let cases = [
            (1e-15, -7.941_345_326_170_996_781),
            (1e-10, -6.361_340_902_404_056_205),
            (0.025, -1.959_963_984_540_054_236),
            (0.3, -0.524_400_512_708_040_784),
            (0.975, 1.959_963_984_540_054_236),
            (1e-300, -37.047_096_299_361_199_24),
        ];
        for (p, x) in cases {
            assert!(rel(normal_quantile(p), x) < 1e-12, "p={p}: {}", normal_quantile(p));
        }
        assert_eq!(normal_quantile(0.5), 0.0);
        assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
        assert!(normal_quantile(1.5_f64).is_nan());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..200 {
            let x = -9.0 + 0.09 * i as f64;
            let back = if x < 0.0 {
                normal_quantile(normal_cdf(x))
            } else {
                normal_quantile_upper(normal_sf(x))
            };
            assert!((back - x).abs() < 1e-9 * x.abs().max(1.0), "x={x} back={back}");
        }
    }

    #[test]
    fn incomplete_beta_value() {
        let v = beta_reg(2.5, 0.5, 0.3, 0.7);
        assert!(rel(v, 0.018_927_124_071_945_653_5) < 1e-13);
    }

    #[test]
    fn student_t_values() {
        let cases = [
            (2.0, 100.0, 0.975_893_910_634_433_160_2),
            (-3.0, 10.0, 6.671_827_511_284_788_603e-3),
            (0.5, 3.0, 0.674_276_017_575_924_502_8),
        ];
        for (t, df, f) in cases {
            assert!(rel(student_t_cdf(t, df), f) < 1e-12, "t={t}");
        }
        assert!(rel(student_t_tail(-12.0, 100.0), 2.197_543_857_802_189_073e-21) < 1e-10);
        assert_eq!(student_t_cdf(0.0, 7.0), 0.5);
    }

    #[test]
    fn single_precision_is_usable() {
        assert!((normal_cdf(1.0_f32) - 0.841_344_75).abs() < 1e-6);
        assert!((normal_quantile(0.975_f32) - 1.959_964).abs() < 1e-4);
    }
}
