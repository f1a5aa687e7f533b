//! Group-calibrated R-values, their monotone envelope, the equivalent score
//! threshold, and multi-class selection.
//!
//! For a test point `j` in group `a` with score `s` for class `c`, the
//! standard R-value is
//!
//! ```text
//!            (#{cal in a: S >= s, Y != c} + 1) / (n_a + 1)
//!   R(j) = ------------------------------------------------  capped at 1
//!                  #{test in a: S >= s} / m_a
//! ```
//!
//! The plus variant replaces the denominator with the pooled test and
//! calibration fraction `(#{test or cal in a: S >= s} + 1) / (m_a + n_a + 1)`.
//! Conservative variants multiply by `(n_a + 1) / (n_a_null + 1)` and re-cap.
//!
//! All comparisons are inclusive. Everything is computed within a group
//! unless [`Scope::Pooled`] is requested, which gives the pooled-count
//! baseline that ignores the protected attribute.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Decision, ScoreRecord};
use crate::{count, count_at_least, min, sort_scalars, Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Variant {
    Standard,
    #[default]
    Plus,
    ConservativeStandard,
    ConservativePlus,
}

impl Variant {
    pub fn is_plus(self) -> bool {
        matches!(self, Variant::Plus | Variant::ConservativePlus)
    }

    pub fn is_conservative(self) -> bool {
        matches!(
            self,
            Variant::ConservativeStandard | Variant::ConservativePlus
        )
    }

    pub fn conservative(self) -> Self {
        if self.is_plus() {
            Variant::ConservativePlus
        } else {
            Variant::ConservativeStandard
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Standard => "standard",
            Variant::Plus => "plus",
            Variant::ConservativeStandard => "conservative-standard",
            Variant::ConservativePlus => "conservative-plus",
        };
        f.write_str(s)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" | "r" => Ok(Variant::Standard),
            "plus" | "r+" => Ok(Variant::Plus),
            "conservative-standard" | "conservative" => Ok(Variant::ConservativeStandard),
            "conservative-plus" => Ok(Variant::ConservativePlus),
            other => Err(Error::InvalidArgument(format!("unknown variant {other}"))),
        }
    }
}

/// Whether counts are restricted to the point's own group or pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scope {
    #[default]
    Group,
    Pooled,
}

/// Calibration point as seen by one target class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalPoint<T> {
    pub group: usize,
    pub score: T,
    /// `true` when the true class differs from the target class.
    pub null: bool,
}

/// Test point as seen by one target class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestPoint<T> {
    pub group: usize,
    pub score: T,
}

/// Sorted score pools for one group.
#[derive(Debug, Clone)]
struct GroupPool<T> {
    cal: Vec<T>,
    cal_null: Vec<T>,
    test: Vec<T>,
}

impl<T: Scalar> GroupPool<T> {
    fn n_cal(&self) -> usize {
        self.cal.len()
    }

    fn n_null(&self) -> usize {
        self.cal_null.len()
    }

    fn m(&self) -> usize {
        self.test.len()
    }

    /// Estimated false selection proportion at threshold `t`, capped at 1.
    fn ratio_at(&self, t: T, variant: Variant) -> T {
        let v = count_at_least(&self.cal_null, t);
        let numerator = count::<T>(v + 1) / count::<T>(self.n_cal() + 1);
        let r_test = count_at_least(&self.test, t);
        let denominator = if variant.is_plus() {
            let r_cal = count_at_least(&self.cal, t);
            count::<T>(r_test + r_cal + 1) / count::<T>(self.m() + self.n_cal() + 1)
        } else {
            if r_test == 0 {
                // Only reachable for thresholds above every test score.
                return T::one();
            }
            count::<T>(r_test) / count::<T>(self.m())
        };
        let mut r = min(numerator / denominator, T::one());
        if variant.is_conservative() {
            r = min(r * self.factor(), T::one());
        }
        r
    }

    fn factor(&self) -> T {
        count::<T>(self.n_cal() + 1) / count::<T>(self.n_null() + 1)
    }
}

fn effective_group(group: usize, scope: Scope) -> usize {
    match scope {
        Scope::Group => group,
        Scope::Pooled => 0,
    }
}

fn build_pools<T: Scalar>(
    cal: &[CalPoint<T>],
    test: &[TestPoint<T>],
    scope: Scope,
) -> Vec<GroupPool<T>> {
    let n_groups = cal
        .iter()
        .map(|p| effective_group(p.group, scope))
        .chain(test.iter().map(|p| effective_group(p.group, scope)))
        .max()
        .map_or(0, |g| g + 1);
    let mut pools: Vec<GroupPool<T>> = (0..n_groups)
        .map(|_| GroupPool {
            cal: Vec::new(),
            cal_null: Vec::new(),
            test: Vec::new(),
        })
        .collect();
    for p in cal {
        let pool = &mut pools[effective_group(p.group, scope)];
        pool.cal.push(p.score);
        if p.null {
            pool.cal_null.push(p.score);
        }
    }
    for p in test {
        pools[effective_group(p.group, scope)].test.push(p.score);
    }
    for pool in &mut pools {
        sort_scalars(&mut pool.cal);
        sort_scalars(&mut pool.cal_null);
        sort_scalars(&mut pool.test);
    }
    pools
}

/// Raw R-values (before monotonization), aligned with `test`.
pub fn raw_rvalues_with<T: Scalar>(
    cal: &[CalPoint<T>],
    test: &[TestPoint<T>],
    variant: Variant,
    scope: Scope,
) -> Vec<T> {
    let pools = build_pools(cal, test, scope);
    test.iter()
        .map(|p| pools[effective_group(p.group, scope)].ratio_at(p.score, variant))
        .collect()
}

/// Standard raw R-values, counts within each group.
pub fn raw_rvalues<T: Scalar>(cal: &[CalPoint<T>], test: &[TestPoint<T>]) -> Vec<T> {
    raw_rvalues_with(cal, test, Variant::Standard, Scope::Group)
}

/// Plus raw R-values, counts within each group.
pub fn raw_rvalues_plus<T: Scalar>(cal: &[CalPoint<T>], test: &[TestPoint<T>]) -> Vec<T> {
    raw_rvalues_with(cal, test, Variant::Plus, Scope::Group)
}

/// `(n_a + 1) / (n_a_null + 1)` for calibration group `group`.
pub fn conservative_factor<T: Scalar>(cal: &[CalPoint<T>], group: usize) -> T {
    let (n, null) = cal
        .iter()
        .filter(|p| p.group == group)
        .fold((0usize, 0usize), |(n, k), p| (n + 1, k + usize::from(p.null)));
    count::<T>(n + 1) / count::<T>(null + 1)
}

/// Running minimum from the lowest score upward.
///
/// `mono[j] = min { raw[k] : scores[k] <= scores[j] }`; tied scores are
/// handled as one block and share a value.
pub fn monotonize<T: Scalar>(scores: &[T], raw: &[T]) -> Vec<T> {
    assert_eq!(scores.len(), raw.len(), "scores and raw R-values must align");
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut mono = vec![T::zero(); scores.len()];
    let mut running: Option<T> = None;
    let mut start = 0;
    while start < order.len() {
        let s = scores[order[start]];
        let mut end = start;
        while end < order.len() && scores[order[end]] == s {
            end += 1;
        }
        let block_min = order[start..end]
            .iter()
            .map(|&k| raw[k])
            .reduce(min)
            .expect("non-empty block");
        let value = running.map_or(block_min, |r| min(r, block_min));
        running = Some(value);
        for &k in &order[start..end] {
            mono[k] = value;
        }
        start = end;
    }
    mono
}

/// [`monotonize`] applied separately within each group (or once, pooled).
pub fn monotonize_by_group<T: Scalar>(test: &[TestPoint<T>], raw: &[T], scope: Scope) -> Vec<T> {
    assert_eq!(test.len(), raw.len(), "test points and raw R-values must align");
    let mut mono = vec![T::zero(); test.len()];
    let n_groups = test
        .iter()
        .map(|p| effective_group(p.group, scope))
        .max()
        .map_or(0, |g| g + 1);
    for g in 0..n_groups {
        let members: Vec<usize> = (0..test.len())
            .filter(|&i| effective_group(test[i].group, scope) == g)
            .collect();
        if members.is_empty() {
            continue;
        }
        let scores: Vec<T> = members.iter().map(|&i| test[i].score).collect();
        let r: Vec<T> = members.iter().map(|&i| raw[i]).collect();
        for (k, v) in members.iter().zip(monotonize(&scores, &r)) {
            mono[*k] = v;
        }
    }
    mono
}

/// Monotonized R-values in one call.
pub fn rvalues<T: Scalar>(
    cal: &[CalPoint<T>],
    test: &[TestPoint<T>],
    variant: Variant,
    scope: Scope,
) -> (Vec<T>, Vec<T>) {
    let raw = raw_rvalues_with(cal, test, variant, scope);
    let mono = monotonize_by_group(test, &raw, scope);
    (raw, mono)
}

/// Score threshold equivalent to thresholding monotonized R-values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold<T> {
    At(T),
    /// No candidate satisfies the level; nothing is selected.
    Infinite,
}

impl<T: Scalar> Threshold<T> {
    pub fn admits(&self, score: T) -> bool {
        match self {
            Threshold::At(t) => score >= *t,
            Threshold::Infinite => false,
        }
    }
}

/// Smallest observed test score `t` in `group` whose estimated false
/// selection proportion is at most `alpha`.
///
/// Only observed test scores are candidates: the estimate is a step function
/// that changes nowhere else. With [`Scope::Pooled`] the `group` argument is
/// ignored.
pub fn threshold_tau<T: Scalar>(
    cal: &[CalPoint<T>],
    test: &[TestPoint<T>],
    group: usize,
    alpha: T,
    variant: Variant,
    scope: Scope,
) -> Threshold<T> {
    let pools = build_pools(cal, test, scope);
    let g = effective_group(group, scope);
    let Some(pool) = pools.get(g) else {
        return Threshold::Infinite;
    };
    let mut candidates = pool.test.clone();
    candidates.dedup();
    candidates
        .into_iter()
        .find(|&t| pool.ratio_at(t, variant) <= alpha)
        .map_or(Threshold::Infinite, Threshold::At)
}

/// Result of resolving one individual across classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection<T> {
    pub decision: Decision,
    /// R-value of the chosen class.
    pub r_value: Option<T>,
    /// More than one class cleared its level.
    pub overlap: bool,
}

/// Picks the class with the smallest R-value among those at or below their
/// level. Ties go to the lower class index; no candidate gives an indecision.
pub fn select_one<T: Scalar>(r_values: &[T], alphas: &[T]) -> Selection<T> {
    assert_eq!(r_values.len(), alphas.len(), "one level per class");
    let mut best: Option<(usize, T)> = None;
    let mut n_candidates = 0;
    for (c, (&r, &a)) in r_values.iter().zip(alphas).enumerate() {
        if r <= a {
            n_candidates += 1;
            if best.is_none_or(|(_, b)| r < b) {
                best = Some((c, r));
            }
        }
    }
    Selection {
        decision: best.map_or(Decision::Indecision, |(c, _)| Decision::Class(c)),
        r_value: best.map(|(_, r)| r),
        overlap: n_candidates > 1,
    }
}

/// Resolves every test point. `mono[c][j]` is the R-value of point `j` for
/// class `c`.
pub fn select<T: Scalar>(mono: &[Vec<T>], alphas: &[T]) -> Vec<Selection<T>> {
    assert_eq!(mono.len(), alphas.len(), "one level per class");
    let m = mono.first().map_or(0, Vec::len);
    assert!(mono.iter().all(|v| v.len() == m), "tables must align");
    let mut row = vec![T::zero(); mono.len()];
    (0..m)
        .map(|j| {
            for (c, table) in mono.iter().enumerate() {
                row[c] = table[j];
            }
            select_one(&row, alphas)
        })
        .collect()
}

/// Per-class view of labeled calibration and test records.
#[allow(clippy::type_complexity)]
pub fn class_points<T: Scalar>(
    cal: &[ScoreRecord<T>],
    test: &[ScoreRecord<T>],
    class: usize,
) -> Result<(Vec<CalPoint<T>>, Vec<TestPoint<T>>)> {
    let cal_points = cal
        .iter()
        .map(|r| {
            let y = r.label.ok_or_else(|| Error::MissingLabel { id: r.id.clone() })?;
            Ok(CalPoint {
                group: r.group,
                score: r.score(class),
                null: y != class,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let test_points = test
        .iter()
        .map(|r| TestPoint {
            group: r.group,
            score: r.score(class),
        })
        .collect();
    Ok((cal_points, test_points))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RValueRow<T> {
    pub id: String,
    pub group: usize,
    pub score: T,
    pub raw_r: T,
    pub mono_r: T,
}

/// R-values of every test record for one target class.
#[derive(Debug, Clone, PartialEq)]
pub struct RValueTable<T> {
    pub class: usize,
    pub variant: Variant,
    pub scope: Scope,
    pub rows: Vec<RValueRow<T>>,
}

impl<T: Scalar> RValueTable<T> {
    pub fn compute(
        cal: &[ScoreRecord<T>],
        test: &[ScoreRecord<T>],
        class: usize,
        variant: Variant,
        scope: Scope,
    ) -> Result<Self> {
        let (cal_points, test_points) = class_points(cal, test, class)?;
        let (raw, mono) = rvalues(&cal_points, &test_points, variant, scope);
        let rows = test
            .iter()
            .zip(raw.into_iter().zip(mono))
            .map(|(r, (raw_r, mono_r))| RValueRow {
                id: r.id.clone(),
                group: r.group,
                score: r.score(class),
                raw_r,
                mono_r,
            })
            .collect();
        Ok(Self {
            class,
            variant,
            scope,
            rows,
        })
    }

    pub fn mono(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.mono_r).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome<T> {
    pub id: String,
    pub group: usize,
    pub decision: Decision,
    pub r_value: Option<T>,
}

/// Full selective classification: R-values for every class, then
/// resolution against the per-class levels `alphas`.
#[allow(clippy::type_complexity)]
pub fn classify<T: Scalar>(
    cal: &[ScoreRecord<T>],
    test: &[ScoreRecord<T>],
    alphas: &[T],
    variant: Variant,
    scope: Scope,
) -> Result<(Vec<RValueTable<T>>, Vec<SelectionOutcome<T>>)> {
    let tables = (0..alphas.len())
        .map(|c| RValueTable::compute(cal, test, c, variant, scope))
        .collect::<Result<Vec<_>>>()?;
    let mono: Vec<Vec<T>> = tables.iter().map(RValueTable::mono).collect();
    let outcomes = select(&mono, alphas)
        .into_iter()
        .zip(test)
        .map(|(s, r)| SelectionOutcome {
            id: r.id.clone(),
            group: r.group,
            decision: s.decision,
            r_value: s.r_value,
        })
        .collect();
    Ok((tables, outcomes))
}
