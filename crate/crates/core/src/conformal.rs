//! Conformal p-values and Benjamini–Hochberg q-values for the one-class
//! setting.
//!
//! Larger scores mean "more likely the target class", so a test score `t` is
//! extreme when few calibration scores reach it: `p(t) = (#{cal >= t} + 1) /
//! (n + 1)`. The BH q-value of a test point is `p(t) / G(t)` where `G` is the
//! fraction of test scores at or above `t`, followed by the same running
//! minimum used for R-values. Thresholding the monotone q-values at `alpha`
//! rejects exactly the BH step-up set.

use crate::{count, count_at_least, min, rvalue, sort_scalars, Scalar};

/// `(#{cal >= t} + 1) / (n + 1)`. Empty calibration yields 1 for every `t`.
pub fn conformal_pvalue<T: Scalar>(cal: &[T], t: T) -> T {
    let k = cal.iter().filter(|&&s| s >= t).count();
    count::<T>(k + 1) / count::<T>(cal.len() + 1)
}

/// Fraction of test scores at or above `t`; `None` for an empty test set.
pub fn empirical_g<T: Scalar>(test: &[T], t: T) -> Option<T> {
    if test.is_empty() {
        return None;
    }
    let k = test.iter().filter(|&&s| s >= t).count();
    Some(count::<T>(k) / count::<T>(test.len()))
}

/// Per test point: conformal p-value, raw BH q-value and monotone q-value.
///
/// q-values are kept uncapped so the BH correspondence stays exact; use
/// [`ConformalTable::q_capped`] for presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalTable<T> {
    pub p: Vec<T>,
    pub q_raw: Vec<T>,
    pub q_mono: Vec<T>,
    /// The calibration pool was empty, so every p-value is 1.
    pub empty_calibration: bool,
}

impl<T: Scalar> ConformalTable<T> {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn q_capped(&self) -> Vec<T> {
        self.q_mono.iter().map(|&q| min(q, T::one())).collect()
    }

    /// Points whose monotone q-value is at most `alpha`.
    pub fn rejections(&self, alpha: T) -> Vec<bool> {
        self.q_mono.iter().map(|&q| q <= alpha).collect()
    }
}

/// Conformal p-values and BH q-values for every test score.
pub fn bh_qvalues<T: Scalar>(cal: &[T], test: &[T]) -> ConformalTable<T> {
    let mut cal_sorted = cal.to_vec();
    sort_scalars(&mut cal_sorted);
    let mut test_sorted = test.to_vec();
    sort_scalars(&mut test_sorted);
    let n = cal.len();
    let m = test.len();

    let mut p = Vec::with_capacity(m);
    let mut q_raw = Vec::with_capacity(m);
    for &t in test {
        let mu = count::<T>(count_at_least(&cal_sorted, t) + 1) / count::<T>(n + 1);
        let g = count::<T>(count_at_least(&test_sorted, t)) / count::<T>(m);
        p.push(mu);
        q_raw.push(mu / g);
    }
    let q_mono = rvalue::monotonize(test, &q_raw);
    ConformalTable {
        p,
        q_raw,
        q_mono,
        empty_calibration: n == 0,
    }
}

/// Benjamini–Hochberg step-up on arbitrary p-values.
///
/// Rejects the `k` smallest p-values where `k` is the largest rank with
/// `p_(k) <= k * alpha / m`.
pub fn benjamini_hochberg<T: Scalar>(pvalues: &[T], alpha: T) -> Vec<bool> {
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        pvalues[a]
            .partial_cmp(&pvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut cutoff = None;
    for (rank, &i) in order.iter().enumerate() {
        let k = rank + 1;
        if pvalues[i] * count::<T>(m) <= alpha * count::<T>(k) {
            cutoff = Some(pvalues[i]);
        }
    }
    match cutoff {
        Some(c) => pvalues.iter().map(|&p| p <= c).collect(),
        None => vec![false; m],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn cal() -> Vec<Rational> {
        vec![q(9, 10), q(7, 10), q(4, 10)]
    }

    #[test]
    fn pvalue_examples() {
        assert_eq!(conformal_pvalue(&cal(), q(8, 10)), q(1, 2));
        assert_eq!(conformal_pvalue(&cal(), q(99, 100)), q(1, 4));
        assert_eq!(conformal_pvalue(&cal(), q(0, 1)), q(1, 1));
        assert_eq!(conformal_pvalue::<Rational>(&[], q(1, 2)), q(1, 1));
    }

    #[test]
    fn empirical_g_examples() {
        let test = [q(8, 10), q(5, 10)];
        assert_eq!(empirical_g(&test, q(8, 10)), Some(q(1, 2)));
        assert_eq!(empirical_g(&test, q(5, 10)), Some(q(1, 1)));
        assert_eq!(empirical_g(&test, q(9, 10)), Some(q(0, 1)));
        assert_eq!(empirical_g::<Rational>(&[], q(1, 2)), None);
    }

    #[test]
    fn qvalue_fixture() {
        let t = bh_qvalues(&cal(), &[q(8, 10), q(5, 10)]);
        assert_eq!(t.p, vec![q(1, 2), q(3, 4)]);
        assert_eq!(t.q_raw, vec![q(1, 1), q(3, 4)]);
        assert_eq!(t.q_mono, vec![q(3, 4), q(3, 4)]);
        assert!(!t.empty_calibration);
    }

    #[test]
    fn single_test_point_is_its_own_envelope() {
        let t = bh_qvalues(&cal(), &[q(6, 10)]);
        assert_eq!(t.q_mono, t.q_raw);
    }

    #[test]
    fn empty_calibration_is_flagged() {
        let t = bh_qvalues(&[], &[0.2, 0.9]);
        assert!(t.empty_calibration);
        assert_eq!(t.p, vec![1.0, 1.0]);
        assert_eq!(t.q_capped(), vec![1.0, 1.0]);
    }

    #[test]
    fn qvalues_above_one_are_kept_raw() {
        let t = bh_qvalues(&[0.95, 0.9, 0.85], &[0.8, 0.1]);
        assert!(t.q_raw[0] > 1.0);
        assert_eq!(t.q_capped()[0], 1.0);
    }

    #[test]
    fn bh_small_example() {
        let p = [0.035, 0.01, 0.9, 0.03];
        // sorted 0.01, 0.03, 0.035 against k * 0.05 / 4: rank 2 fails, rank 3 passes
        assert_eq!(
            benjamini_hochberg(&p, 0.05),
            vec![true, true, false, true]
        );
        assert_eq!(benjamini_hochberg(&p, 0.0), vec![false; 4]);
    }
}
