//! Evaluation quantities: false selection proportions (plain and "+1"),
//! indecision rate, per-class power, the gamma factor, and replication
//! summaries.

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::data::Decision;
use crate::{count, Error, Result, Scalar};

/// One evaluated test individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub group: usize,
    pub decision: Decision,
    pub truth: Option<usize>,
}

/// Restriction of a rate to a class and/or a group. `None` means all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub class: Option<usize>,
    pub group: Option<usize>,
}

impl Cell {
    pub const ALL: Cell = Cell {
        class: None,
        group: None,
    };

    pub fn new(class: Option<usize>, group: Option<usize>) -> Self {
        Self { class, group }
    }

    fn admits(&self, obs: &Observation, selected_class: usize) -> bool {
        self.class.is_none_or(|c| c == selected_class)
            && self.group.is_none_or(|g| g == obs.group)
    }
}

/// Selections and false selections inside one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SelectionCounts {
    pub n_selected: usize,
    pub n_false: usize,
}

impl SelectionCounts {
    /// Counts selections in `cell`. Every selected record in the cell must
    /// carry a truth; otherwise the offending positions are reported.
    pub fn tally(obs: &[Observation], cell: Cell) -> Result<Self> {
        let mut counts = SelectionCounts::default();
        let mut missing = Vec::new();
        for (i, o) in obs.iter().enumerate() {
            let Decision::Class(c) = o.decision else {
                continue;
            };
            if !cell.admits(o, c) {
                continue;
            }
            match o.truth {
                Some(y) => {
                    counts.n_selected += 1;
                    counts.n_false += usize::from(y != c);
                }
                None => missing.push(i),
            }
        }
        if missing.is_empty() {
            Ok(counts)
        } else {
            Err(Error::MissingTruth(missing))
        }
    }

    /// False selection proportion; 0 when nothing is selected.
    pub fn fsp<T: Scalar>(&self) -> T {
        if self.n_selected == 0 {
            T::zero()
        } else {
            count::<T>(self.n_false) / count::<T>(self.n_selected)
        }
    }

    /// `n_false / (n_selected + 1)`.
    pub fn fsp_star<T: Scalar>(&self) -> T {
        count::<T>(self.n_false) / count::<T>(self.n_selected + 1)
    }
}

pub fn fsp<T: Scalar>(obs: &[Observation], class: Option<usize>, group: Option<usize>) -> Result<T> {
    Ok(SelectionCounts::tally(obs, Cell::new(class, group))?.fsp())
}

pub fn fsp_star<T: Scalar>(
    obs: &[Observation],
    class: Option<usize>,
    group: Option<usize>,
) -> Result<T> {
    Ok(SelectionCounts::tally(obs, Cell::new(class, group))?.fsp_star())
}

/// Proportion of indecisions.
pub fn epi<T: Scalar>(obs: &[Observation]) -> Result<T> {
    if obs.is_empty() {
        return Err(Error::Empty("observations"));
    }
    let k = obs.iter().filter(|o| !o.decision.is_selected()).count();
    Ok(count::<T>(k) / count::<T>(obs.len()))
}

/// `#{decision = c, truth = c} / #{truth = c}`; `None` without class-`c`
/// individuals.
pub fn power_per_class<T: Scalar>(obs: &[Observation], class: usize) -> Option<T> {
    let (hits, total) = obs
        .iter()
        .filter(|o| o.truth == Some(class))
        .fold((0usize, 0usize), |(h, t), o| {
            (h + usize::from(o.decision == Decision::Class(class)), t + 1)
        });
    (total > 0).then(|| count::<T>(hits) / count::<T>(total))
}

fn null_share(pairs: &[(usize, usize)], class: usize, group: usize) -> Option<(usize, usize)> {
    let (null, n) = pairs
        .iter()
        .filter(|(g, _)| *g == group)
        .fold((0usize, 0usize), |(k, n), (_, y)| (k + usize::from(*y != class), n + 1));
    (n > 0).then_some((null, n))
}

/// Ratio of the null (not class `c`) share among group-`a` test individuals
/// to the same share in calibration. Inputs are `(group, label)` pairs.
///
/// `None` when either group is empty or calibration has no nulls.
pub fn gamma_estimate<T: Scalar>(
    cal: &[(usize, usize)],
    test: &[(usize, usize)],
    class: usize,
    group: usize,
) -> Option<T> {
    let (test_null, test_n) = null_share(test, class, group)?;
    let (cal_null, cal_n) = null_share(cal, class, group)?;
    if cal_null == 0 {
        return None;
    }
    let p_test = count::<T>(test_null) / count::<T>(test_n);
    let p_cal = count::<T>(cal_null) / count::<T>(cal_n);
    Some(p_test / p_cal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics<T> {
    pub cell: Cell,
    pub fsp: T,
    pub fsp_star: T,
    pub counts: SelectionCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCell<T> {
    pub class: usize,
    pub group: usize,
    pub value: Option<T>,
}

/// Metrics of one realized selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<T> {
    pub m: usize,
    /// Every (class or ALL) x (group or ALL) cell.
    pub cells: Vec<CellMetrics<T>>,
    pub epi: T,
    pub power: Vec<Option<T>>,
    pub gamma: Vec<GammaCell<T>>,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn evaluate(obs: &[Observation], n_classes: usize, n_groups: usize) -> Result<Self> {
        let classes = std::iter::once(None).chain((0..n_classes).map(Some));
        let mut cells = Vec::new();
        for class in classes {
            let groups = std::iter::once(None).chain((0..n_groups).map(Some));
            for group in groups {
                let cell = Cell::new(class, group);
                let counts = SelectionCounts::tally(obs, cell)?;
                cells.push(CellMetrics {
                    cell,
                    fsp: counts.fsp(),
                    fsp_star: counts.fsp_star(),
                    counts,
                });
            }
        }
        Ok(Self {
            m: obs.len(),
            cells,
            epi: epi(obs)?,
            power: (0..n_classes).map(|c| power_per_class(obs, c)).collect(),
            gamma: Vec::new(),
        })
    }

    /// Adds gamma estimates for every (class, group), from calibration
    /// `(group, label)` pairs and the observations' truths.
    pub fn with_gamma(mut self, cal: &[(usize, usize)], obs: &[Observation], n_classes: usize, n_groups: usize) -> Self {
        let test: Vec<(usize, usize)> = obs
            .iter()
            .filter_map(|o| o.truth.map(|y| (o.group, y)))
            .collect();
        self.gamma = (0..n_classes)
            .flat_map(|c| (0..n_groups).map(move |a| (c, a)))
            .map(|(class, group)| GammaCell {
                class,
                group,
                value: gamma_estimate(cal, &test, class, group),
            })
            .collect();
        self
    }

    pub fn cell(&self, class: Option<usize>, group: Option<usize>) -> Option<&CellMetrics<T>> {
        let key = Cell::new(class, group);
        self.cells.iter().find(|c| c.cell == key)
    }

    pub fn gamma(&self, class: usize, group: usize) -> Option<T> {
        self.gamma
            .iter()
            .find(|g| g.class == class && g.group == group)
            .and_then(|g| g.value)
    }
}

/// Mean, sample standard deviation and nearest-rank quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary<F> {
    pub n: usize,
    pub mean: F,
    pub sd: F,
    pub quantiles: Vec<(F, F)>,
}

impl<F: Float> Summary<F> {
    pub fn quantile(&self, level: F) -> Option<F> {
        self.quantiles
            .iter()
            .find(|(l, _)| *l == level)
            .map(|(_, v)| *v)
    }
}

pub const DEFAULT_QUANTILES: [f64; 2] = [0.05, 0.95];

/// Value at rank `ceil(level * n)` (1-based, clamped to `[1, n]`) of the
/// sorted sample.
pub fn nearest_rank<F: Float + FromPrimitive>(sorted: &[F], level: F) -> F {
    let n = sorted.len();
    let rank = (level * F::from_usize(n).unwrap()).ceil().to_usize().unwrap_or(0);
    sorted[rank.clamp(1, n) - 1]
}

pub fn summarize<F: Float + FromPrimitive>(values: &[F], levels: &[F]) -> Result<Summary<F>> {
    if values.is_empty() {
        return Err(Error::Empty("replications"));
    }
    let n = values.len();
    let nf = F::from_usize(n).unwrap();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    // Summing in sorted order keeps the mean independent of replication order.
    let mean = sorted.iter().fold(F::zero(), |a, &b| a + b) / nf;
    let sd = if n > 1 {
        let ss = sorted
            .iter()
            .fold(F::zero(), |a, &b| a + (b - mean) * (b - mean));
        (ss / F::from_usize(n - 1).unwrap()).sqrt()
    } else {
        F::zero()
    };
    let quantiles = levels
        .iter()
        .map(|&l| (l, nearest_rank(&sorted, l)))
        .collect();
    Ok(Summary {
        n,
        mean,
        sd,
        quantiles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary<F> {
    pub cell: Cell,
    pub fsr: Summary<F>,
    pub fsr_star: Summary<F>,
    /// Replications with at least one selection in the cell.
    pub n_nonempty: usize,
}

/// Replication aggregate of [`MetricsReport`]s.
///
/// The reported FSR of a cell is the mean of its per-replication FSPs,
/// counting empty selections as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport<F> {
    pub replications: usize,
    pub cells: Vec<CellSummary<F>>,
    pub epi: Summary<F>,
    pub power: Vec<Option<Summary<F>>>,
    pub gamma: Vec<(usize, usize, Option<Summary<F>>)>,
}

impl<F: Float> AggregateReport<F> {
    pub fn cell(&self, class: Option<usize>, group: Option<usize>) -> Option<&CellSummary<F>> {
        let key = Cell::new(class, group);
        self.cells.iter().find(|c| c.cell == key)
    }

    pub fn gamma(&self, class: usize, group: usize) -> Option<&Summary<F>> {
        self.gamma
            .iter()
            .find(|(c, g, _)| *c == class && *g == group)
            .and_then(|(_, _, s)| s.as_ref())
    }
}

pub fn aggregate<F: Float + FromPrimitive + Scalar>(
    reports: &[MetricsReport<F>],
    levels: &[F],
) -> Result<AggregateReport<F>> {
    let first = reports.first().ok_or(Error::Empty("replications"))?;
    let cells = first
        .cells
        .iter()
        .map(|template| {
            let key = template.cell;
            let per_rep: Vec<&CellMetrics<F>> = reports
                .iter()
                .map(|r| r.cells.iter().find(|c| c.cell == key).expect("uniform cells"))
                .collect();
            let fsr: Vec<F> = per_rep.iter().map(|c| c.fsp).collect();
            let fsr_star: Vec<F> = per_rep.iter().map(|c| c.fsp_star).collect();
            Ok(CellSummary {
                cell: key,
                fsr: summarize(&fsr, levels)?,
                fsr_star: summarize(&fsr_star, levels)?,
                n_nonempty: per_rep.iter().filter(|c| c.counts.n_selected > 0).count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let epi: Vec<F> = reports.iter().map(|r| r.epi).collect();
    let power = (0..first.power.len())
        .map(|c| {
            let vals: Vec<F> = reports.iter().filter_map(|r| r.power[c]).collect();
            summarize(&vals, levels).ok()
        })
        .collect();
    let gamma = first
        .gamma
        .iter()
        .map(|g| {
            let vals: Vec<F> = reports
                .iter()
                .filter_map(|r| r.gamma(g.class, g.group))
                .collect();
            (g.class, g.group, summarize(&vals, levels).ok())
        })
        .collect();
    Ok(AggregateReport {
        replications: reports.len(),
        cells,
        epi: summarize(&epi, levels)?,
        power,
        gamma,
    })
}
