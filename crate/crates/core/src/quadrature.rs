//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-300,
            rel_tol: 1e-10,
            initial_panels: 16,
            max_panels: 4_000,
        }
    }
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Panel<T> {
    let half = T::lit(0.5);
    let centre = (a + b) * half;
    let radius = (b - a) * half;
    let fc = f(centre);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = radius * T::lit(XGK[i]);
        let pair = f(centre - dx) + f(centre + dx);
        kronrod = kronrod + pair * T::lit(WGK[i]);
        if i % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[i / 2]);
        }
    }
    Panel {
        a,
        b,
        value: kronrod * radius,
        error: ((kronrod - gauss) * radius).abs(),
    }
}

/// Integrates `f` over the finite interval [a, b].
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, opts: QuadOptions) -> Result<T> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Domain(format!("invalid quadrature interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(T::zero());
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / T::count(n0);
    let mut panels: Vec<Panel<T>> = (0..n0)
        .map(|i| {
            let lo = a + width * T::count(i);
            let hi = if i + 1 == n0 { b } else { lo + width };
            gk15(&f, lo, hi)
        })
        .collect();

    let abs_tol = T::lit(opts.abs_tol);
    let rel_tol = T::lit(opts.rel_tol).max(T::epsilon() * T::lit(50.0));
    loop {
        let total: T = panels.iter().map(|p| p.value).sum();
        let err: T = panels.iter().map(|p| p.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Estimation("non-finite integrand in quadrature".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Estimation(format!(
                "quadrature did not converge: estimate {total}, error {err}"
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .expect("non-empty panel list");
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) * T::lit(0.5);
        if mid <= p.a || mid >= p.b {
            // Interval cannot be split further at this precision.
            return Ok(total);
        }
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x: f64| x * x * x - 2.0 * x, 0.0, 3.0, QuadOptions::default()).unwrap();
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mass() {
        let v = integrate(
            |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            -12.0,
            12.0,
            QuadOptions::default(),
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_peak_is_resolved() {
        // Unit-mass bump far from the centre of the interval.
        let s = 0.2;
        let f = |x: f64| (-0.5 * ((x - 37.3) / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let v = integrate(f, 0.0, 100.0, QuadOptions { initial_panels: 64, ..Default::default() }).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(integrate(|x: f64| x, 1.0, 0.0, QuadOptions::default()).is_err());
    }
}
