//! Binary logistic scorer with one-hot group indicators.
//!
//! Features are standardized with the training means and standard
//! deviations; the group enters as indicators for every group but the first.
//! Fitting maximizes the mean log-likelihood minus `l2 / 2 * |w|^2` (the
//! intercept is not penalized) by gradient ascent with backtracking, starting
//! from zero.

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<F> {
    pub max_iter: usize,
    pub tol: F,
    pub l2: F,
    /// Encode the protected group. Turning this off gives the reduced
    /// covariate scorer.
    pub include_group: bool,
}

impl<F: Float> Default for TrainConfig<F> {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: F::from(1e-6).unwrap(),
            l2: F::from(1e-3).unwrap(),
            include_group: true,
        }
    }
}

impl<F: Float> TrainConfig<F> {
    pub fn reduced(mut self) -> Self {
        self.include_group = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel<F> {
    pub feature_mean: Vec<F>,
    pub feature_scale: Vec<F>,
    /// Weights on standardized features.
    pub weights: Vec<F>,
    /// Weights on indicators of groups `1..n_groups`; empty without groups.
    pub group_weights: Vec<F>,
    pub intercept: F,
    pub include_group: bool,
    pub n_groups: usize,
    pub iterations: usize,
    pub grad_norm: F,
    pub converged: bool,
}

pub fn sigmoid<F: Float>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus<F: Float>(z: F) -> F {
    if z > F::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Design<F> {
    rows: Vec<Vec<F>>,
    y: Vec<F>,
}

impl<F: Float + FromPrimitive> LogisticModel<F> {
    fn n_params(&self) -> usize {
        self.weights.len() + self.group_weights.len() + 1
    }

    fn encode(&self, x: &[F], group: usize) -> Vec<F> {
        let mut row: Vec<F> = x
            .iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_scale)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect();
        if self.include_group {
            row.extend((1..self.n_groups).map(|g| if g == group { F::one() } else { F::zero() }));
        }
        row
    }

    fn params(&self) -> Vec<F> {
        let mut p = self.weights.clone();
        p.extend(&self.group_weights);
        p.push(self.intercept);
        p
    }

    fn set_params(&mut self, p: &[F]) {
        let d = self.weights.len();
        let k = self.group_weights.len();
        self.weights.copy_from_slice(&p[..d]);
        self.group_weights.copy_from_slice(&p[d..d + k]);
        self.intercept = p[d + k];
    }

    /// Linear predictor for a raw feature vector and group.
    pub fn margin(&self, x: &[F], group: usize) -> F {
        let row = self.encode(x, group);
        linear(&self.params(), &row)
    }

    /// Predicted probability of the positive class.
    pub fn predict(&self, x: &[F], group: usize) -> F {
        sigmoid(self.margin(x, group))
    }
}

fn linear<F: Float>(p: &[F], row: &[F]) -> F {
    let n = row.len();
    row.iter()
        .zip(&p[..n])
        .fold(p[n], |acc, (&x, &w)| acc + x * w)
}

fn objective<F: Float + FromPrimitive>(p: &[F], d: &Design<F>, l2: F) -> F {
    let n = F::from_usize(d.rows.len()).unwrap();
    let ll = d
        .rows
        .iter()
        .zip(&d.y)
        .fold(F::zero(), |acc, (row, &y)| {
            let z = linear(p, row);
            acc + y * z - softplus(z)
        });
    let pen = p[..p.len() - 1].iter().fold(F::zero(), |a, &w| a + w * w);
    ll / n - l2 * pen / F::from(2.0).unwrap()
}

fn gradient<F: Float + FromPrimitive>(p: &[F], d: &Design<F>, l2: F) -> Vec<F> {
    let n = F::from_usize(d.rows.len()).unwrap();
    let k = p.len();
    let mut g = vec![F::zero(); k];
    for (row, &y) in d.rows.iter().zip(&d.y) {
        let r = y - sigmoid(linear(p, row));
        for (gi, &x) in g.iter_mut().zip(row) {
            *gi = *gi + r * x;
        }
        g[k - 1] = g[k - 1] + r;
    }
    for (i, gi) in g.iter_mut().enumerate() {
        *gi = *gi / n;
        if i + 1 < k {
            *gi = *gi - l2 * p[i];
        }
    }
    g
}

/// Fits the model on rows `features[i]` in group `groups[i]` with binary
/// outcome `labels[i]`.
pub fn train<F: Float + FromPrimitive>(
    features: &[Vec<F>],
    groups: &[usize],
    labels: &[bool],
    n_groups: usize,
    config: &TrainConfig<F>,
) -> Result<LogisticModel<F>> {
    let n = features.len();
    if n == 0 {
        return Err(Error::Empty("training data"));
    }
    if groups.len() != n || labels.len() != n {
        return Err(Error::InvalidArgument("features, groups and labels differ in length".into()));
    }
    if labels.iter().all(|&y| y) || labels.iter().all(|&y| !y) {
        return Err(Error::Training("training labels contain a single class".into()));
    }
    let dim = features[0].len();
    if features.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidArgument("ragged feature rows".into()));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Training("non-finite feature".into()));
    }
    if let Some(&g) = groups.iter().find(|&&g| g >= n_groups.max(1)) {
        return Err(Error::InvalidArgument(format!("group index {g} out of range")));
    }

    let nf = F::from_usize(n).unwrap();
    let mut mean = vec![F::zero(); dim];
    for row in features {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m = *m + v;
        }
    }
    mean.iter_mut().for_each(|m| *m = *m / nf);
    let mut scale = vec![F::zero(); dim];
    for row in features {
        for ((s, &v), &m) in scale.iter_mut().zip(row).zip(&mean) {
            *s = *s + (v - m) * (v - m);
        }
    }
    // Constant columns keep unit scale so they standardize to zero.
    scale
        .iter_mut()
        .for_each(|s| *s = if *s > F::zero() { (*s / nf).sqrt() } else { F::one() });

    let n_group_w = if config.include_group {
        n_groups.saturating_sub(1)
    } else {
        0
    };
    let mut model = LogisticModel {
        feature_mean: mean,
        feature_scale: scale,
        weights: vec![F::zero(); dim],
        group_weights: vec![F::zero(); n_group_w],
        intercept: F::zero(),
        include_group: config.include_group,
        n_groups,
        iterations: 0,
        grad_norm: F::infinity(),
        converged: false,
    };
    let design = Design {
        rows: features
            .iter()
            .zip(groups)
            .map(|(x, &g)| model.encode(x, g))
            .collect(),
        y: labels
            .iter()
            .map(|&y| if y { F::one() } else { F::zero() })
            .collect(),
    };

    let half = F::from(0.5).unwrap();
    let mut p = vec![F::zero(); model.n_params()];
    let mut f = objective(&p, &design, config.l2);
    let mut step = F::one();
    let min_step = F::from(1e-20).unwrap();
    for it in 0..=config.max_iter {
        let g = gradient(&p, &design, config.l2);
        let gnorm = g.iter().fold(F::zero(), |a, &v| a.max(v.abs()));
        model.iterations = it;
        model.grad_norm = gnorm;
        if gnorm < config.tol {
            model.converged = true;
            break;
        }
        if it == config.max_iter {
            break;
        }
        let g2 = g.iter().fold(F::zero(), |a, &v| a + v * v);
        step = step + step;
        loop {
            let cand: Vec<F> = p.iter().zip(&g).map(|(&a, &b)| a + step * b).collect();
            let fc = objective(&cand, &design, config.l2);
            if fc >= f + half * step * g2 {
                p = cand;
                f = fc;
                break;
            }
            step = step * half;
            if step < min_step {
                model.set_params(&p);
                return Ok(model);
            }
        }
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("weights diverged".into()));
    }
    model.set_params(&p);
    Ok(model)
}
