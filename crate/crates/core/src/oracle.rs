//! Oracle machinery for a known Gaussian mixture: exact posterior scores,
//! conditional error curves `Q(t) = P(Y != c | S >= t, A = a)`, theoretical
//! R-values, the oracle selection rule and the marginal FSR.

use num_traits::{Float, FromPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Decision;
use crate::metrics::Observation;
use crate::rvalue::{select_one, Selection};
use crate::{Error, Result, Scalar};

/// Gaussian with diagonal covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component<F> {
    pub mean: Vec<F>,
    pub var: Vec<F>,
}

impl<F: Float> Component<F> {
    pub fn isotropic(mean: Vec<F>, var: F) -> Self {
        let var = vec![var; mean.len()];
        Self { mean, var }
    }

    pub fn log_density(&self, x: &[F]) -> F {
        let two_pi = F::from(std::f64::consts::TAU).unwrap();
        let half = F::from(0.5).unwrap();
        self.mean
            .iter()
            .zip(&self.var)
            .zip(x)
            .fold(F::zero(), |acc, ((&mu, &v), &xi)| {
                let d = xi - mu;
                acc - half * ((two_pi * v).ln() + d * d / v)
            })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<F>
    where
        StandardNormal: Distribution<F>,
    {
        self.mean
            .iter()
            .zip(&self.var)
            .map(|(&mu, &v)| {
                let z: F = StandardNormal.sample(rng);
                mu + v.sqrt() * z
            })
            .collect()
    }
}

/// One protected group: its prior, class priors within it, and one
/// component per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec<F> {
    pub name: String,
    pub prior: F,
    pub class_priors: Vec<F>,
    pub components: Vec<Component<F>>,
}

/// Group-and-class Gaussian mixture generating `(X, A, Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec<F> {
    pub classes: Vec<String>,
    pub groups: Vec<GroupSpec<F>>,
}

/// One draw from the mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw<F> {
    pub x: Vec<F>,
    pub group: usize,
    pub label: usize,
}

fn draw_index<F: Float, R: Rng + ?Sized>(weights: &[F], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w.to_f64().unwrap();
        if u < acc {
            return i;
        }
    }
    // Rounding slack: fall back to the last category with positive weight.
    weights
        .iter()
        .rposition(|w| *w > F::zero())
        .unwrap_or(weights.len() - 1)
}

impl<F: Float> MixtureSpec<F> {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn dim(&self) -> usize {
        self.groups
            .first()
            .and_then(|g| g.components.first())
            .map_or(0, |c| c.mean.len())
    }

    pub fn validate(&self) -> Result<()> {
        let tol = F::from(1e-9).unwrap();
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.classes.is_empty() || self.groups.is_empty() {
            return bad("needs at least one class and one group".into());
        }
        let sum_ok = |ws: &[F]| {
            ws.iter().all(|w| *w >= F::zero() && *w <= F::one())
                && (ws.iter().fold(F::zero(), |a, &b| a + b) - F::one()).abs() <= tol
        };
        let group_priors: Vec<F> = self.groups.iter().map(|g| g.prior).collect();
        if !sum_ok(&group_priors) {
            return bad("group priors must lie in [0, 1] and sum to 1".into());
        }
        let p = self.dim();
        if p == 0 {
            return bad("dimension must be positive".into());
        }
        for g in &self.groups {
            if g.class_priors.len() != self.n_classes() || g.components.len() != self.n_classes() {
                return bad(format!("group {}: one prior and component per class", g.name));
            }
            if !sum_ok(&g.class_priors) {
                return bad(format!("group {}: class priors must sum to 1", g.name));
            }
            for c in &g.components {
                if c.mean.len() != p || c.var.len() != p {
                    return bad(format!("group {}: dimension mismatch", g.name));
                }
                if c.var.iter().any(|v| v.is_nan() || *v <= F::zero() || !v.is_finite()) {
                    return bad(format!("group {}: variances must be positive", g.name));
                }
                if c.mean.iter().any(|m| !m.is_finite()) {
                    return bad(format!("group {}: non-finite mean", g.name));
                }
            }
        }
        Ok(())
    }

    /// Posterior `P(Y = c | X = x, A = a)` for every class `c`.
    pub fn posterior_scores(&self, x: &[F], group: usize) -> Result<Vec<F>> {
        let g = &self.groups[group];
        let logs: Vec<F> = g
            .class_priors
            .iter()
            .zip(&g.components)
            .map(|(&pi, comp)| pi.ln() + comp.log_density(x))
            .collect();
        normalize_logs(&logs)
    }

    /// Full-covariate score: `P(Y = c | X = x, A = a)`.
    pub fn posterior_score(&self, x: &[F], group: usize, class: usize) -> Result<F> {
        Ok(self.posterior_scores(x, group)?[class])
    }

    /// Reduced-covariate scores: `P(Y = c | X = x)` with the group
    /// marginalized out.
    pub fn rcc_scores(&self, x: &[F]) -> Result<Vec<F>> {
        let k = self.n_classes();
        let joint: Vec<F> = self
            .groups
            .iter()
            .flat_map(|g| {
                g.class_priors
                    .iter()
                    .zip(&g.components)
                    .map(move |(&pi, comp)| g.prior.ln() + pi.ln() + comp.log_density(x))
            })
            .collect();
        let probs = normalize_logs(&joint)?;
        let mut out = vec![F::zero(); k];
        for (i, p) in probs.into_iter().enumerate() {
            out[i % k] = out[i % k] + p;
        }
        Ok(out)
    }

    pub fn rcc_score(&self, x: &[F], class: usize) -> Result<F> {
        Ok(self.rcc_scores(x)?[class])
    }

    /// Draws `(X, A, Y)`; with `group = Some(a)` the group is fixed.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, group: Option<usize>) -> Draw<F>
    where
        StandardNormal: Distribution<F>,
    {
        let a = group.unwrap_or_else(|| {
            let priors: Vec<F> = self.groups.iter().map(|g| g.prior).collect();
            draw_index(&priors, rng)
        });
        let g = &self.groups[a];
        let y = draw_index(&g.class_priors, rng);
        Draw {
            x: g.components[y].sample(rng),
            group: a,
            label: y,
        }
    }
}

fn normalize_logs<F: Float>(logs: &[F]) -> Result<Vec<F>> {
    let max = logs.iter().copied().fold(F::neg_infinity(), F::max);
    if !max.is_finite() {
        return Err(Error::DegeneratePoint);
    }
    let w: Vec<F> = logs.iter().map(|&l| (l - max).exp()).collect();
    let total = w.iter().fold(F::zero(), |a, &b| a + b);
    if total.is_nan() || total <= F::zero() || !total.is_finite() {
        return Err(Error::DegeneratePoint);
    }
    Ok(w.into_iter().map(|v| v / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveMethod {
    MonteCarlo { chunk_size: usize, chunks: usize },
    Analytic,
}

/// Conditional error curve of one (group, class) on a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QCurve<F> {
    pub group: usize,
    pub class: usize,
    pub grid: Vec<F>,
    /// `None` where no mass reaches the threshold.
    pub q: Vec<Option<F>>,
    /// Monte Carlo standard error; zero for the analytic path.
    pub se: Vec<Option<F>>,
    pub mc_n: usize,
    pub seed: u64,
    pub method: CurveMethod,
}

pub const MC_CHUNK: usize = 1 << 16;
pub const MIN_MC_DRAWS: usize = 10_000;

/// Evenly spaced grid `0, step, 2 step, ...` up to 1 inclusive.
pub fn unit_grid<F: Float + FromPrimitive>(step: F) -> Vec<F> {
    let n = (F::one() / step).round().to_usize().unwrap();
    (0..=n)
        .map(|i| F::from_usize(i).unwrap() / F::from_usize(n).unwrap())
        .collect()
}

fn check_grid<F: Float>(grid: &[F]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty("grid"));
    }
    if grid.iter().any(|t| !(*t >= F::zero() && *t <= F::one())) {
        return Err(Error::InvalidArgument("grid must lie in [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Monte Carlo estimate of `P(Y != c | S^c >= t, A = a)` for each grid `t`,
/// where `S^c` is the full-covariate posterior score.
///
/// Draws are generated in chunks of [`MC_CHUNK`] with independent ChaCha
/// streams `(seed, chunk)`; the result is identical regardless of thread
/// count.
pub fn q_curve<F>(
    spec: &MixtureSpec<F>,
    group: usize,
    class: usize,
    grid: &[F],
    mc_n: usize,
    seed: u64,
) -> Result<QCurve<F>>
where
    F: Float + FromPrimitive + Send + Sync,
    StandardNormal: Distribution<F>,
{
    spec.validate()?;
    check_grid(grid)?;
    if mc_n < MIN_MC_DRAWS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_MC_DRAWS} Monte Carlo draws required"
        )));
    }
    let chunks = mc_n.div_ceil(MC_CHUNK);
    let per_chunk: Vec<Result<Vec<(F, bool)>>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let n = MC_CHUNK.min(mc_n - k * MC_CHUNK);
            (0..n)
                .map(|_| {
                    let d = spec.draw(&mut rng, Some(group));
                    let s = spec.posterior_score(&d.x, group, class)?;
                    Ok((s, d.label != class))
                })
                .collect()
        })
        .collect();
    let mut draws = Vec::with_capacity(mc_n);
    for chunk in per_chunk {
        draws.extend(chunk?);
    }
    draws.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    // null_above[i] = number of nulls among draws[i..]
    let mut null_above = vec![0usize; draws.len() + 1];
    for i in (0..draws.len()).rev() {
        null_above[i] = null_above[i + 1] + usize::from(draws[i].1);
    }
    let mut q = Vec::with_capacity(grid.len());
    let mut se = Vec::with_capacity(grid.len());
    for &t in grid {
        let first = draws.partition_point(|d| d.0 < t);
        let n_ge = draws.len() - first;
        if n_ge == 0 {
            q.push(None);
            se.push(None);
            continue;
        }
        let n = F::from_usize(n_ge).unwrap();
        let value = F::from_usize(null_above[first]).unwrap() / n;
        q.push(Some(value));
        se.push(Some((value * (F::one() - value) / n).sqrt()));
    }
    Ok(QCurve {
        group,
        class,
        grid: grid.to_vec(),
        q,
        se,
        mc_n,
        seed,
        method: CurveMethod::MonteCarlo {
            chunk_size: MC_CHUNK,
            chunks,
        },
    })
}

fn upper_normal_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Closed-form curve for a binary group whose two components share one
/// diagonal covariance. The posterior log-odds is then linear in `x`, so
/// `S^c >= t` is a half-space with Gaussian mass under each class.
pub fn q_curve_analytic(
    spec: &MixtureSpec<f64>,
    group: usize,
    class: usize,
    grid: &[f64],
) -> Result<QCurve<f64>> {
    spec.validate()?;
    check_grid(grid)?;
    if spec.n_classes() != 2 {
        return Err(Error::InvalidArgument("analytic curve needs two classes".into()));
    }
    let g = &spec.groups[group];
    let other = 1 - class;
    let (cc, co) = (&g.components[class], &g.components[other]);
    if cc.var != co.var {
        return Err(Error::InvalidArgument(
            "analytic curve needs a shared covariance".into(),
        ));
    }
    let (pc, po) = (g.class_priors[class], g.class_priors[other]);
    // logit S^c(x) = w.x + b
    let w: Vec<f64> = cc
        .mean
        .iter()
        .zip(&co.mean)
        .zip(&cc.var)
        .map(|((mc, mo), v)| (mc - mo) / v)
        .collect();
    let quad: f64 = cc
        .mean
        .iter()
        .zip(&co.mean)
        .zip(&cc.var)
        .map(|((mc, mo), v)| (mc * mc - mo * mo) / v)
        .sum();
    let b = (pc / po).ln() - 0.5 * quad;
    let sd = w
        .iter()
        .zip(&cc.var)
        .map(|(wi, v)| wi * wi * v)
        .sum::<f64>()
        .sqrt();
    let proj = |mean: &[f64]| -> f64 { w.iter().zip(mean).map(|(a, m)| a * m).sum() };
    let (loc_c, loc_o) = (proj(&cc.mean), proj(&co.mean));

    // P(w.X + b >= l) under N(loc, sd^2)
    let tail = |loc: f64, l: f64| -> f64 {
        if l == f64::NEG_INFINITY || b == f64::INFINITY {
            1.0
        } else if l == f64::INFINITY || b == f64::NEG_INFINITY {
            0.0
        } else if sd == 0.0 {
            if loc + b >= l {
                1.0
            } else {
                0.0
            }
        } else {
            upper_normal_tail((l - b - loc) / sd)
        }
    };
    let mut q = Vec::with_capacity(grid.len());
    for &t in grid {
        let l = (t / (1.0 - t)).ln();
        let mass_c = pc * tail(loc_c, l);
        let mass_o = po * tail(loc_o, l);
        let total = mass_c + mass_o;
        q.push((total > 0.0).then(|| mass_o / total));
    }
    let se = q.iter().map(|v| v.map(|_| 0.0)).collect();
    Ok(QCurve {
        group,
        class,
        grid: grid.to_vec(),
        q,
        se,
        mc_n: 0,
        seed: 0,
        method: CurveMethod::Analytic,
    })
}

impl<F: Float> QCurve<F> {
    /// Theoretical R-value: `inf { Q(t) : grid t <= s }`. Scores below the
    /// grid take the first defined value.
    pub fn rvalue(&self, s: F) -> Option<F> {
        let upto = self.grid.partition_point(|t| *t <= s);
        let best = self.q[..upto]
            .iter()
            .flatten()
            .copied()
            .fold(None, |acc: Option<F>, v| Some(acc.map_or(v, |a| a.min(v))));
        best.or_else(|| if upto == 0 { self.q.iter().flatten().copied().next() } else { None })
    }

    /// Running minimum of the curve over the grid (theoretical R at each
    /// grid point).
    pub fn envelope(&self) -> Vec<Option<F>> {
        let mut running: Option<F> = None;
        self.q
            .iter()
            .map(|v| {
                if let Some(v) = v {
                    running = Some(running.map_or(*v, |r| r.min(*v)));
                }
                running
            })
            .collect()
    }
}

pub fn theoretical_rvalue<F: Float>(curve: &QCurve<F>, s: F) -> Option<F> {
    curve.rvalue(s)
}

/// Oracle rule for two classes: select class `c` when `R^c <= alpha_c`;
/// overlaps go to the smaller R-value (flagged in the result).
pub fn oracle_rule<T: Scalar>(r1: T, r2: T, alpha1: T, alpha2: T) -> Selection<T> {
    select_one(&[r1, r2], &[alpha1, alpha2])
}

/// Oracle decisions for many individuals; `r[j][c]` is the theoretical
/// R-value of individual `j` for class `c`. Returns decisions and the number
/// of overlapping selections.
pub fn oracle_decisions<T: Scalar>(r: &[Vec<T>], alphas: &[T]) -> (Vec<Decision>, usize) {
    let mut overlaps = 0;
    let decisions = r
        .iter()
        .map(|row| {
            let s = select_one(row, alphas);
            overlaps += usize::from(s.overlap);
            s.decision
        })
        .collect();
    (decisions, overlaps)
}

/// Pooled false and total selections for the marginal FSR.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MfsrAccumulator {
    pub n_false: usize,
    pub n_selected: usize,
}

impl MfsrAccumulator {
    /// Adds one replication's selections into `class` within `group`.
    /// Selected records without truth are skipped.
    pub fn add(&mut self, obs: &[Observation], class: usize, group: usize) {
        for o in obs {
            if o.group == group && o.decision == Decision::Class(class) {
                if let Some(y) = o.truth {
                    self.n_selected += 1;
                    self.n_false += usize::from(y != class);
                }
            }
        }
    }

    /// Ratio of pooled sums; undefined without selections.
    pub fn value<T: Scalar>(&self) -> Option<T> {
        (self.n_selected > 0)
            .then(|| crate::count::<T>(self.n_false) / crate::count::<T>(self.n_selected))
    }
}

/// Marginal FSR pooled over replications.
pub fn mfsr<T: Scalar>(reps: &[Vec<Observation>], class: usize, group: usize) -> Option<T> {
    let mut acc = MfsrAccumulator::default();
    for r in reps {
        acc.add(r, class, group);
    }
    acc.value()
}
