//! Fairness-adjusted selective classification.
//!
//! Black-box classifier scores are converted into group-calibrated R-values.
//! Thresholding an R-value at a user level `alpha` selects an individual into a
//! class while keeping the false selection rate at or below `alpha` within
//! every protected group; individuals that clear no threshold receive an
//! indecision.
//!
//! The counting core (`rvalue`, `conformal`, `metrics`) is generic over any
//! [`Scalar`], so the same code runs on `f32`, `f64` or exact rationals
//! ([`Rational`]). The Gaussian machinery (`oracle`, `classifier`) needs
//! transcendental functions and is generic over [`num_traits::Float`].
//! `simulate` is the `f64` harness that ties everything together.

pub mod classifier;
pub mod conformal;
pub mod data;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod rvalue;
pub mod simulate;

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

pub use error::{Error, Result};

/// Numeric type the counting routines run on.
///
/// Anything that behaves like an ordered field element qualifies: `f32`,
/// `f64`, or `num_rational::Ratio<i64>` for exact checks.
pub trait Scalar:
    Num + FromPrimitive + ToPrimitive + PartialOrd + Copy + Debug + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Num + FromPrimitive + ToPrimitive + PartialOrd + Copy + Debug + Send + Sync + 'static
{
}

/// Exact rational scalar.
pub type Rational = num_rational::Ratio<i64>;

pub type ScoreRecord64 = data::ScoreRecord<f64>;
pub type DatasetSplit64 = data::DatasetSplit<f64>;
pub type RValueTable64 = rvalue::RValueTable<f64>;
pub type SelectionOutcome64 = rvalue::SelectionOutcome<f64>;
pub type ConformalTable64 = conformal::ConformalTable<f64>;
pub type MixtureSpec64 = oracle::MixtureSpec<f64>;
pub type QCurve64 = oracle::QCurve<f64>;
pub type LogisticModel64 = classifier::LogisticModel<f64>;
pub type MetricsReport64 = metrics::MetricsReport<f64>;

pub type RValueTableExact = rvalue::RValueTable<Rational>;
pub type ConformalTableExact = conformal::ConformalTable<Rational>;

#[inline]
pub(crate) fn count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub(crate) fn min<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// Sorts with the scalar's partial order; callers guarantee no NaN.
pub(crate) fn sort_scalars<T: Scalar>(xs: &mut [T]) {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
}

/// Number of entries in an ascending slice that are `>= t`.
#[inline]
pub(crate) fn count_at_least<T: Scalar>(sorted: &[T], t: T) -> usize {
    sorted.len() - sorted.partition_point(|x| *x < t)
}
