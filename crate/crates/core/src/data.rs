//! Domain records, label sets, validation and seeded splitting.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Ordered, duplicate-free list of labels. Position is the label's index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet(Vec<String>);

pub type ClassSet = LabelSet;
pub type GroupSet = LabelSet;

impl LabelSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidLabelSet("must not be empty".into()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidLabelSet(format!("duplicate label {l}")));
            }
        }
        Ok(Self(labels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }
}

/// One individual: per-class confidence scores, protected group and an
/// optional true class. Groups and classes are indices into the caller's
/// [`GroupSet`] and [`ClassSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord<T> {
    pub id: String,
    pub group: usize,
    pub scores: Vec<T>,
    pub label: Option<usize>,
}

impl<T: Scalar> ScoreRecord<T> {
    pub fn new(id: impl Into<String>, group: usize, scores: Vec<T>, label: Option<usize>) -> Self {
        Self {
            id: id.into(),
            group,
            scores,
            label,
        }
    }

    pub fn score(&self, class: usize) -> T {
        self.scores[class]
    }

    /// `true` when the record is labeled and its label differs from `class`.
    pub fn is_null_for(&self, class: usize) -> bool {
        matches!(self.label, Some(y) if y != class)
    }
}

/// Outcome of a selective rule for one individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Indecision,
    Class(usize),
}

impl Decision {
    pub fn class(self) -> Option<usize> {
        match self {
            Decision::Class(c) => Some(c),
            Decision::Indecision => None,
        }
    }

    pub fn is_selected(self) -> bool {
        matches!(self, Decision::Class(_))
    }
}

/// Checks every record against the class and group sets.
///
/// Fails on the first offending record: wrong score count, a score outside
/// `[0, 1]` (NaN included), an unknown group or label, or a repeated id.
pub fn validate<T: Scalar>(
    records: Vec<ScoreRecord<T>>,
    classes: &ClassSet,
    groups: &GroupSet,
) -> Result<Vec<ScoreRecord<T>>> {
    let mut ids = HashSet::with_capacity(records.len());
    for r in &records {
        if r.scores.len() != classes.len() {
            return Err(Error::ScoreArity {
                id: r.id.clone(),
                expected: classes.len(),
                found: r.scores.len(),
            });
        }
        for (c, s) in r.scores.iter().enumerate() {
            if !(*s >= T::zero() && *s <= T::one()) {
                return Err(Error::ScoreOutOfRange {
                    id: r.id.clone(),
                    class: classes.name(c).to_string(),
                });
            }
        }
        if r.group >= groups.len() {
            return Err(Error::UnknownGroup {
                id: r.id.clone(),
                group: r.group,
            });
        }
        if let Some(y) = r.label {
            if y >= classes.len() {
                return Err(Error::UnknownClass {
                    id: r.id.clone(),
                    class: y,
                });
            }
        }
        if !ids.insert(r.id.as_str()) {
            return Err(Error::DuplicateId { id: r.id.clone() });
        }
    }
    Ok(records)
}

/// Disjoint train / calibration / test partitions.
#[derive(Debug, Clone)]
pub struct DatasetSplit<T> {
    pub train: Vec<ScoreRecord<T>>,
    pub cal: Vec<ScoreRecord<T>>,
    pub test: Vec<ScoreRecord<T>>,
    pub seed: u64,
}

impl<T: Scalar> DatasetSplit<T> {
    pub fn n_cal(&self) -> usize {
        self.cal.len()
    }

    pub fn n_cal_in(&self, group: usize) -> usize {
        self.cal.iter().filter(|r| r.group == group).count()
    }

    pub fn m(&self) -> usize {
        self.test.len()
    }

    pub fn m_in(&self, group: usize) -> usize {
        self.test.iter().filter(|r| r.group == group).count()
    }
}

/// Index partition of `0..n` into sizes `n_train`, `n_cal` and the remainder,
/// drawn as a uniform random permutation.
pub fn split_indices(
    n: usize,
    n_train: usize,
    n_cal: usize,
    rng: &mut impl rand::Rng,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if n_train + n_cal > n {
        return Err(Error::SplitTooLarge {
            n_train,
            n_cal,
            population: n,
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let test = idx.split_off(n_train + n_cal);
    let cal = idx.split_off(n_train);
    Ok((idx, cal, test))
}

/// Seeded random split. Records are sorted by id first, so the result does
/// not depend on input order.
pub fn split<T: Scalar>(
    mut records: Vec<ScoreRecord<T>>,
    n_train: usize,
    n_cal: usize,
    seed: u64,
) -> Result<DatasetSplit<T>> {
    if let Some(r) = records.iter().find(|r| r.label.is_none()) {
        return Err(Error::MissingLabel { id: r.id.clone() });
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train, cal, test) = split_indices(records.len(), n_train, n_cal, &mut rng)?;

    let mut slots: Vec<Option<ScoreRecord<T>>> = records.into_iter().map(Some).collect();
    let mut take = |ix: Vec<usize>| -> Vec<ScoreRecord<T>> {
        ix.into_iter()
            .map(|i| slots[i].take().expect("indices are a permutation"))
            .collect()
    };
    Ok(DatasetSplit {
        train: take(train),
        cal: take(cal),
        test: take(test),
        seed,
    })
}
