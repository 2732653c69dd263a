//! Two-sided normal p-values, the Benjamini–Hochberg step-up procedure and
//! Storey's q-values.

use crate::error::{check_gamma, Error, Result};
use crate::linalg::{polyfit, polyval};
use crate::model::{DecisionVector, ObservationVector};
use crate::special::normal_sf;
use crate::Real;

/// p-values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PValueVector<T> {
    p: Vec<T>,
}

impl<T: Real> PValueVector<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if let Some(j) = p.iter().position(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(Error::Domain(format!("p-value {j} outside [0, 1]: {}", p[j])));
        }
        Ok(Self { p })
    }

    /// Two-sided p-values of every observation under the N(0, 1) null.
    pub fn from_observations(y: &ObservationVector<T>) -> Self {
        let p = y.values().iter().map(|&z| two_sided_tail(z)).collect();
        Self { p }
    }

    pub fn values(&self) -> &[T] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Indices sorted by ascending p-value; ties keep input order.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.p.len()).collect();
        idx.sort_by(|&a, &b| self.p[a].partial_cmp(&self.p[b]).expect("p-values are not NaN"));
        idx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QValueResult<T> {
    pub q: Vec<T>,
    pub pi0_hat: T,
}

impl<T: Real> QValueResult<T> {
    pub fn decisions(&self, gamma: T) -> DecisionVector {
        DecisionVector::new(self.q.iter().map(|&q| q <= gamma).collect())
    }
}

fn two_sided_tail<T: Real>(z: T) -> T {
    (T::lit(2.0) * normal_sf(z.abs())).min(T::one())
}

/// 2(1 − Φ(|z|)).
pub fn two_sided_p<T: Real>(z: T) -> Result<T> {
    if z.is_nan() {
        return Err(Error::Domain("p-value of NaN".into()));
    }
    if z.is_infinite() {
        return Err(Error::Domain(format!("p-value of non-finite statistic {z}")));
    }
    Ok(two_sided_tail(z))
}

// `m p / k <= gamma` is shared with the q-value recursion so that BH and
// q-values with pi0 = 1 agree bit-for-bit.
#[inline]
fn step_up_ratio<T: Real>(p: T, m: usize, k: usize) -> T {
    T::count(m) * p / T::count(k)
}

/// Benjamini–Hochberg: reject every p_j ≤ p_(k*) with
/// k* = max{k : p_(k) ≤ γk/m}.
pub fn bh_procedure<T: Real>(p: &PValueVector<T>, gamma: T) -> Result<DecisionVector> {
    check_gamma(gamma)?;
    let m = p.len();
    let order = p.ascending_order();
    let k_star = (1..=m)
        .rev()
        .find(|&k| step_up_ratio(p.values()[order[k - 1]], m, k) <= gamma);
    Ok(match k_star {
        None => DecisionVector::none(m),
        Some(k) => {
            let cutoff = p.values()[order[k - 1]];
            DecisionVector::new(p.values().iter().map(|&pj| pj <= cutoff).collect())
        }
    })
}

/// Storey's tail-count estimate #{p > λ} / (m(1 − λ)) at a single λ.
pub fn storey_pi0_at<T: Real>(p: &PValueVector<T>, lambda: T) -> T {
    let above = p.values().iter().filter(|&&v| v > lambda).count();
    T::count(above) / (T::count(p.len()) * (T::one() - lambda))
}

pub const PI0_FLOOR: f64 = 1e-8;

/// π̂₀: tail-count estimates on λ ∈ {0.05, …, 0.95}, smoothed by a
/// least-squares cubic in λ, read off at λ = 0.95 and clamped to [1e-8, 1].
pub fn estimate_pi0<T: Real>(p: &PValueVector<T>) -> T {
    let lambdas: Vec<T> = (1..=19).map(|i| T::lit(0.05 * i as f64)).collect();
    let raw: Vec<T> = lambdas.iter().map(|&l| storey_pi0_at(p, l)).collect();
    let smoothed = polyfit(&lambdas, &raw, 3)
        .map(|c| polyval(&c, T::lit(0.95)))
        .unwrap_or(raw[18]);
    let floor = T::lit(PI0_FLOOR);
    if smoothed.is_nan() {
        return T::one();
    }
    smoothed.max(floor).min(T::one())
}

/// q̂_(m) = π̂₀ p_(m); q̂_(j) = min{π̂₀ m p_(j) / j, q̂_(j+1)}.
pub fn qvalues<T: Real>(p: &PValueVector<T>, pi0_hat: T) -> Result<QValueResult<T>> {
    if !(pi0_hat > T::zero() && pi0_hat <= T::one()) {
        return Err(Error::Domain(format!("pi0 estimate must lie in (0, 1], got {pi0_hat}")));
    }
    let m = p.len();
    let order = p.ascending_order();
    let mut q = vec![T::zero(); m];
    let mut running = T::infinity();
    for k in (1..=m).rev() {
        let j = order[k - 1];
        let candidate = pi0_hat * step_up_ratio(p.values()[j], m, k);
        running = running.min(candidate);
        q[j] = running;
    }
    Ok(QValueResult { q, pi0_hat })
}

/// q-value procedure at level γ with the smoothed π̂₀.
pub fn qvalue_procedure<T: Real>(p: &PValueVector<T>, gamma: T) -> Result<(DecisionVector, QValueResult<T>)> {
    check_gamma(gamma)?;
    let result = qvalues(p, estimate_pi0(p))?;
    Ok((result.decisions(gamma), result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> PValueVector<f64> {
        PValueVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_sided_p_examples() {
        assert_eq!(two_sided_p(0.0).unwrap(), 1.0);
        // 40-digit reference: 0.049999998192884808605
        assert!((two_sided_p(1.959964_f64).unwrap() - 0.049_999_998_192_884_81).abs() < 1e-14);
        assert!(two_sided_p(40.0_f64).unwrap() < 1e-300);
        assert!(two_sided_p(f64::INFINITY).is_err());
        assert!(two_sided_p(f64::NAN).is_err());
    }

    #[test]
    fn bh_brute_force_example() {
        let p = pv(&[0.001, 0.015, 0.04, 0.5]);
        // Brute force over k: thresholds 0.025, 0.05, 0.075, 0.1.
        let k_star = (1..=4).filter(|&k| p.values()[k - 1] <= 0.1 * k as f64 / 4.0).max();
        assert_eq!(k_star, Some(3));
        let d = bh_procedure(&p, 0.1).unwrap();
        assert_eq!(d.reject(), &[true, true, true, false]);
    }

    #[test]
    fn bh_edges() {
        assert_eq!(bh_procedure(&pv(&[1.0; 5]), 0.1).unwrap().rejections(), 0);
        assert_eq!(bh_procedure(&pv(&[0.1]), 0.1).unwrap().rejections(), 1);
        assert!(bh_procedure(&pv(&[0.1]), 1.0).is_err());
        assert!(bh_procedure(&pv(&[0.1]), 0.0).is_err());
    }

    #[test]
    fn bh_ties_move_together() {
        let d = bh_procedure(&pv(&[0.02, 0.02, 0.02, 0.9]), 0.1).unwrap();
        assert_eq!(d.reject(), &[true, true, true, false]);
    }

    #[test]
    fn pi0_examples() {
        let p = pv(&[0.1, 0.3, 0.6, 0.8]);
        assert_eq!(storey_pi0_at(&p, 0.5), 1.0);

        let uniform: Vec<f64> = (0..10_000).map(|j| (j as f64 + 0.5) / 10_000.0).collect();
        let pi0 = estimate_pi0(&pv(&uniform));
        assert!((pi0 - 1.0).abs() < 0.01, "{pi0}");

        let tiny = vec![1e-12; 50];
        assert_eq!(estimate_pi0(&pv(&tiny)), PI0_FLOOR);
    }

    #[test]
    fn qvalue_recursion_by_hand() {
        let r = qvalues(&pv(&[0.01, 0.02, 0.9]), 1.0).unwrap();
        for (got, want) in r.q.iter().zip([0.03, 0.03, 0.9]) {
            assert!((got - want).abs() < 1e-15);
        }
        let single = qvalues(&pv(&[0.4]), 0.5).unwrap();
        assert_eq!(single.q, vec![0.2]);
        assert!(qvalues(&pv(&[0.4]), 0.0).is_err());
    }

    fn pvec() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(prop_oneof![0.0..1.0, 0.0..0.01], 1..300)
    }

    proptest! {
        #[test]
        fn bh_monotone_in_gamma(p in pvec(), g1 in 0.01..0.5f64, dg in 0.0..0.4f64) {
            let p = pv(&p);
            let a = bh_procedure(&p, g1).unwrap();
            let b = bh_procedure(&p, (g1 + dg).min(0.99)).unwrap();
            for (x, y) in a.reject().iter().zip(b.reject()) {
                prop_assert!(!x || *y);
            }
        }

        #[test]
        fn bh_permutation_invariant(p in pvec(), seed in any::<u64>()) {
            let m = p.len();
            let mut perm: Vec<usize> = (0..m).collect();
            let mut s = seed;
            for i in (1..m).rev() {
                s = crate::rng::mix64(s.wrapping_add(i as u64));
                perm.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let shuffled: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
            let d = bh_procedure(&pv(&p), 0.1).unwrap();
            let ds = bh_procedure(&pv(&shuffled), 0.1).unwrap();
            for (k, &i) in perm.iter().enumerate() {
                prop_assert_eq!(ds.reject()[k], d.reject()[i]);
            }
        }

        #[test]
        fn qvalues_match_bh_with_unit_pi0(p in pvec(), gamma in 0.01..0.5f64) {
            let p = pv(&p);
            let q = qvalues(&p, 1.0).unwrap();
            prop_assert_eq!(q.decisions(gamma), bh_procedure(&p, gamma).unwrap());
        }

        #[test]
        fn qvalues_sorted_are_monotone(p in pvec(), pi0 in 0.05..1.0f64) {
            let p = pv(&p);
            let q = qvalues(&p, pi0).unwrap();
            let order = p.ascending_order();
            for w in order.windows(2) {
                prop_assert!(q.q[w[0]] <= q.q[w[1]]);
            }
            let last = *order.last().unwrap();
            prop_assert!((q.q[last] - pi0 * p.values()[last]).abs() < 1e-15);
        }
    }
}
