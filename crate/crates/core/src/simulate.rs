//! Simulation harness: two-group Gaussian mixtures, the FASI / FCC / RCC /
//! oracle pipelines per replication, sweeps over the class-2 share of the
//! first group, and replication aggregates in tidy form.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{self, TrainConfig};
use crate::data::{Decision, ScoreRecord};
use crate::metrics::{aggregate, AggregateReport, MetricsReport, Observation, DEFAULT_QUANTILES};
use crate::oracle::{self, Component, Draw, GroupSpec, MixtureSpec, QCurve};
use crate::rvalue::{self, CalPoint, RValueTable, Scope, TestPoint, Variant};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Fasi,
    Fcc,
    Rcc,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Fasi, Method::Fcc, Method::Rcc, Method::Oracle];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fasi => "fasi",
            Method::Fcc => "fcc",
            Method::Rcc => "rcc",
            Method::Oracle => "oracle",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fasi" => Ok(Method::Fasi),
            "fcc" => Ok(Method::Fcc),
            "rcc" => Ok(Method::Rcc),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::InvalidArgument(format!("unknown method {other}"))),
        }
    }
}

/// Where base scores come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScoreMode {
    /// Exact posterior probabilities of the generating mixture.
    #[default]
    Oracle,
    /// Logistic models fitted on the training split.
    Logistic,
}

impl FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" => Ok(ScoreMode::Oracle),
            "logistic" => Ok(ScoreMode::Logistic),
            other => Err(Error::InvalidArgument(format!("unknown score mode {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    /// Labeled data, split into training and calibration.
    pub n_data: usize,
    pub n_train: usize,
    pub n_cal: usize,
    /// Fresh test set per replication.
    pub m: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            n_data: 2500,
            n_train: 1500,
            n_cal: 1000,
            m: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: u8,
    /// Mixture at the default class-2 share; the sweep overrides the first
    /// group's class priors.
    pub base: MixtureSpec<f64>,
    pub sizes: Sizes,
    pub alphas: Vec<f64>,
    pub reps: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub variant: Variant,
    pub score_mode: ScoreMode,
    /// Resolution of the oracle R-value curve.
    pub oracle_grid_step: f64,
}

fn two_group(mu_f: [[f64; 3]; 2], mu_m: [[f64; 3]; 2]) -> MixtureSpec<f64> {
    let group = |name: &str, mu: [[f64; 3]; 2]| GroupSpec {
        name: name.into(),
        prior: 0.5,
        class_priors: vec![0.5, 0.5],
        components: mu
            .iter()
            .map(|m| Component::isotropic(m.to_vec(), 2.0))
            .collect(),
    };
    MixtureSpec {
        classes: vec!["1".into(), "2".into()],
        groups: vec![group("F", mu_f), group("M", mu_m)],
    }
}

pub const DEFAULT_GRID: [f64; 5] = [0.2, 0.35, 0.5, 0.65, 0.8];

impl ScenarioConfig {
    fn with_base(scenario: u8, base: MixtureSpec<f64>) -> Self {
        Self {
            scenario,
            base,
            sizes: Sizes::default(),
            alphas: vec![0.1, 0.1],
            reps: 1000,
            grid: DEFAULT_GRID.to_vec(),
            seed: 1,
            methods: vec![Method::Fasi, Method::Fcc, Method::Oracle],
            variant: Variant::Plus,
            score_mode: ScoreMode::Oracle,
            oracle_grid_step: 1e-4,
        }
    }

    /// Both groups share `mu_1 = (0,1,6)`, `mu_2 = (2,3,7)`, covariance `2 I`.
    pub fn scenario1() -> Self {
        let mu = [[0.0, 1.0, 6.0], [2.0, 3.0, 7.0]];
        Self::with_base(1, two_group(mu, mu))
    }

    /// Group F shifted to `(1,2,7)`, `(3,4,8)`.
    pub fn scenario2() -> Self {
        let mu_m = [[0.0, 1.0, 6.0], [2.0, 3.0, 7.0]];
        let mu_f = [[1.0, 2.0, 7.0], [3.0, 4.0, 8.0]];
        Self::with_base(2, two_group(mu_f, mu_m))
    }

    pub fn preset(scenario: u8) -> Result<Self> {
        match scenario {
            1 => Ok(Self::scenario1()),
            2 => Ok(Self::scenario2()),
            other => Err(Error::InvalidArgument(format!("unknown scenario {other}"))),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.base.n_classes()
    }

    pub fn n_groups(&self) -> usize {
        self.base.n_groups()
    }

    /// Mixture with `P(Y = 2 | A = F) = pi2f`.
    pub fn spec_at(&self, pi2f: f64) -> MixtureSpec<f64> {
        let mut spec = self.base.clone();
        spec.groups[0].class_priors = vec![1.0 - pi2f, pi2f];
        spec
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let s = &self.sizes;
        if s.n_train + s.n_cal != s.n_data {
            return Err(Error::InvalidArgument(
                "training and calibration sizes must add up to the data size".into(),
            ));
        }
        if s.n_cal == 0 || s.m == 0 {
            return Err(Error::InvalidArgument("calibration and test sets must be non-empty".into()));
        }
        if self.score_mode == ScoreMode::Logistic && s.n_train == 0 {
            return Err(Error::InvalidArgument("logistic scores need training data".into()));
        }
        if self.alphas.len() != self.n_classes() {
            return Err(Error::InvalidArgument("one level per class".into()));
        }
        if self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidArgument("levels must lie in [0, 1]".into()));
        }
        if self.grid.is_empty() || self.grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::InvalidArgument("sweep grid must lie in (0, 1)".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("at least one replication".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods selected".into()));
        }
        Ok(())
    }
}

/// Random stream of one replication at one grid point.
pub fn replication_rng(seed: u64, grid_index: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((grid_index as u64) << 32) | rep as u64);
    rng
}

/// One replication's raw draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SimData {
    pub train: Vec<Draw<f64>>,
    pub cal: Vec<Draw<f64>>,
    pub test: Vec<Draw<f64>>,
}

/// Draws the labeled data (split into training and calibration) and a fresh
/// test set. Reproducible from `(seed, grid_index, rep)`.
pub fn generate(config: &ScenarioConfig, pi2f: f64, grid_index: usize, rep: usize) -> SimData {
    let spec = config.spec_at(pi2f);
    let mut rng = replication_rng(config.seed, grid_index, rep);
    let mut data: Vec<Draw<f64>> = (0..config.sizes.n_data)
        .map(|_| spec.draw(&mut rng, None))
        .collect();
    let test = (0..config.sizes.m).map(|_| spec.draw(&mut rng, None)).collect();
    // i.i.d. draws: the first n_train are a uniformly random training subset.
    let cal = data.split_off(config.sizes.n_train);
    SimData {
        train: data,
        cal,
        test,
    }
}

/// FCC table: pooled counts with the Plus denominator.
pub fn fcc_rvalues(
    cal: &[ScoreRecord<f64>],
    test: &[ScoreRecord<f64>],
    class: usize,
) -> Result<RValueTable<f64>> {
    RValueTable::compute(cal, test, class, Variant::Plus, Scope::Pooled)
}

/// Scores every draw for every class.
trait Scorer: Sync {
    fn scores(&self, d: &Draw<f64>) -> Result<Vec<f64>>;
}

struct FullPosterior<'a>(&'a MixtureSpec<f64>);
struct ReducedPosterior<'a>(&'a MixtureSpec<f64>);

impl Scorer for FullPosterior<'_> {
    fn scores(&self, d: &Draw<f64>) -> Result<Vec<f64>> {
        self.0.posterior_scores(&d.x, d.group)
    }
}

impl Scorer for ReducedPosterior<'_> {
    fn scores(&self, d: &Draw<f64>) -> Result<Vec<f64>> {
        self.0.rcc_scores(&d.x)
    }
}

/// One-vs-rest logistic models; a single model when there are two classes.
struct Logistic(Vec<classifier::LogisticModel<f64>>);

impl Logistic {
    fn fit(train: &[Draw<f64>], n_classes: usize, n_groups: usize, cfg: &TrainConfig<f64>) -> Result<Self> {
        let x: Vec<Vec<f64>> = train.iter().map(|d| d.x.clone()).collect();
        let g: Vec<usize> = train.iter().map(|d| d.group).collect();
        let targets: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
        let models = targets
            .into_iter()
            .map(|c| {
                let y: Vec<bool> = train.iter().map(|d| d.label == c).collect();
                classifier::train(&x, &g, &y, n_groups, cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(models))
    }
}

impl Scorer for Logistic {
    fn scores(&self, d: &Draw<f64>) -> Result<Vec<f64>> {
        if let [m] = self.0.as_slice() {
            let p = m.predict(&d.x, d.group);
            return Ok(vec![1.0 - p, p]);
        }
        Ok(self.0.iter().map(|m| m.predict(&d.x, d.group)).collect())
    }
}

fn to_records(draws: &[Draw<f64>], scorer: &dyn Scorer, prefix: &str) -> Result<Vec<ScoreRecord<f64>>> {
    draws
        .iter()
        .enumerate()
        .map(|(i, d)| {
            Ok(ScoreRecord::new(
                format!("{prefix}{i}"),
                d.group,
                scorer.scores(d)?,
                Some(d.label),
            ))
        })
        .collect()
}

/// `(grid, R)` step tables indexed by group, then class.
pub type RLookup = Vec<Vec<(Vec<f64>, Vec<f64>)>>;

/// Theoretical R-value curves `R[group][class]` on a fine score grid.
#[derive(Debug, Clone)]
pub struct OracleCurves {
    pub curves: Vec<Vec<QCurve<f64>>>,
}

impl OracleCurves {
    /// Uses the closed-form curve when every group has a shared covariance,
    /// and Monte Carlo otherwise.
    pub fn build(spec: &MixtureSpec<f64>, step: f64, mc_n: usize, seed: u64) -> Result<Self> {
        let grid = oracle::unit_grid(step);
        let curves = (0..spec.n_groups())
            .map(|a| {
                (0..spec.n_classes())
                    .map(|c| match oracle::q_curve_analytic(spec, a, c, &grid) {
                        Ok(curve) => Ok(curve),
                        Err(Error::InvalidArgument(_)) => oracle::q_curve(spec, a, c, &grid, mc_n, seed),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { curves })
    }

    /// Envelope-based lookup: `R(s) = min Q(t)` over grid `t <= s`.
    pub fn lookup(&self) -> RLookup {
        self.curves
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| {
                        let env = c.envelope();
                        let first = env.iter().flatten().copied().next().unwrap_or(1.0);
                        let vals = env.into_iter().map(|v| v.unwrap_or(first)).collect();
                        (c.grid.clone(), vals)
                    })
                    .collect()
            })
            .collect()
    }
}

fn lookup_r(table: &(Vec<f64>, Vec<f64>), s: f64) -> f64 {
    let (grid, vals) = table;
    let i = grid.partition_point(|t| *t <= s);
    vals[i.saturating_sub(1)]
}

fn observations(test: &[Draw<f64>], decisions: impl IntoIterator<Item = Decision>) -> Vec<Observation> {
    test.iter()
        .zip(decisions)
        .map(|(d, decision)| Observation {
            group: d.group,
            decision,
            truth: Some(d.label),
        })
        .collect()
}

/// Per-method metrics of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub rep: usize,
    pub reports: Vec<(Method, MetricsReport<f64>)>,
}

/// Split, score, compute R-values, select and evaluate for every configured
/// method. `oracle_lookup` is required when the oracle method is enabled.
pub fn run_replication(
    config: &ScenarioConfig,
    pi2f: f64,
    grid_index: usize,
    rep: usize,
    oracle_lookup: Option<&RLookup>,
) -> Result<ReplicationResult> {
    let spec = config.spec_at(pi2f);
    let data = generate(config, pi2f, grid_index, rep);
    let k = config.n_classes();
    let n_groups = config.n_groups();
    let cal_pairs: Vec<(usize, usize)> = data.cal.iter().map(|d| (d.group, d.label)).collect();

    let full: Box<dyn Scorer> = match config.score_mode {
        ScoreMode::Oracle => Box::new(FullPosterior(&spec)),
        ScoreMode::Logistic => Box::new(Logistic::fit(&data.train, k, n_groups, &TrainConfig::default())?),
    };
    let needs_full = config.methods.iter().any(|m| matches!(m, Method::Fasi | Method::Fcc));
    let full_records = if needs_full {
        Some((to_records(&data.cal, full.as_ref(), "c")?, to_records(&data.test, full.as_ref(), "t")?))
    } else {
        None
    };

    let mut reports = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let decisions: Vec<Decision> = match method {
            Method::Fasi | Method::Fcc => {
                let (cal, test) = full_records.as_ref().expect("scored above");
                let (variant, scope) = if method == Method::Fasi {
                    (config.variant, Scope::Group)
                } else {
                    (Variant::Plus, Scope::Pooled)
                };
                let (_, out) = rvalue::classify(cal, test, &config.alphas, variant, scope)?;
                out.into_iter().map(|o| o.decision).collect()
            }
            Method::Rcc => {
                let reduced: Box<dyn Scorer> = match config.score_mode {
                    ScoreMode::Oracle => Box::new(ReducedPosterior(&spec)),
                    ScoreMode::Logistic => Box::new(Logistic::fit(
                        &data.train,
                        k,
                        n_groups,
                        &TrainConfig::default().reduced(),
                    )?),
                };
                let cal = to_records(&data.cal, reduced.as_ref(), "c")?;
                let test = to_records(&data.test, reduced.as_ref(), "t")?;
                let (_, out) = rvalue::classify(&cal, &test, &config.alphas, Variant::Plus, Scope::Pooled)?;
                out.into_iter().map(|o| o.decision).collect()
            }
            Method::Oracle => {
                let lookup = oracle_lookup.ok_or_else(|| {
                    Error::InvalidArgument("oracle method needs oracle curves".into())
                })?;
                let r: Vec<Vec<f64>> = data
                    .test
                    .iter()
                    .map(|d| {
                        let s = spec.posterior_scores(&d.x, d.group)?;
                        Ok((0..k).map(|c| lookup_r(&lookup[d.group][c], s[c])).collect())
                    })
                    .collect::<Result<_>>()?;
                oracle::oracle_decisions(&r, &config.alphas).0
            }
        };
        let obs = observations(&data.test, decisions);
        let report = MetricsReport::evaluate(&obs, k, n_groups)?.with_gamma(&cal_pairs, &obs, k, n_groups);
        reports.push((method, report));
    }
    Ok(ReplicationResult { rep, reports })
}

/// Aggregate of one method at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub pi2f: f64,
    pub method: Method,
    pub report: AggregateReport<f64>,
}

/// All replications at one grid point, in replication order.
pub fn replications_at(config: &ScenarioConfig, grid_index: usize) -> Result<Vec<ReplicationResult>> {
    let pi2f = config.grid[grid_index];
    let lookup = if config.methods.contains(&Method::Oracle) {
        let curves = OracleCurves::build(
            &config.spec_at(pi2f),
            config.oracle_grid_step,
            1 << 20,
            config.seed,
        )?;
        Some(curves.lookup())
    } else {
        None
    };
    (0..config.reps)
        .into_par_iter()
        .map(|rep| run_replication(config, pi2f, grid_index, rep, lookup.as_ref()))
        .collect()
}

/// Runs every replication at every grid point and aggregates per method.
/// Results are ordered by grid point, then by the configured method order,
/// and do not depend on the thread count.
pub fn sweep(config: &ScenarioConfig) -> Result<Vec<SweepPoint>> {
    sweep_with_progress(config, |_, _| {})
}

pub fn sweep_with_progress(
    config: &ScenarioConfig,
    mut progress: impl FnMut(usize, f64),
) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    let mut out = Vec::with_capacity(config.grid.len() * config.methods.len());
    for (gi, &pi2f) in config.grid.iter().enumerate() {
        let reps = replications_at(config, gi)?;
        for (mi, &method) in config.methods.iter().enumerate() {
            let reports: Vec<MetricsReport<f64>> =
                reps.iter().map(|r| r.reports[mi].1.clone()).collect();
            out.push(SweepPoint {
                pi2f,
                method,
                report: aggregate(&reports, &DEFAULT_QUANTILES)?,
            });
        }
        progress(gi, pi2f);
    }
    Ok(out)
}

/// One line of the tidy results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TidyRow {
    pub scenario: u8,
    pub method: String,
    pub pi2f: f64,
    pub class: String,
    pub group: String,
    pub metric: String,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q95: f64,
}

pub const TIDY_COLUMNS: [&str; 10] = [
    "scenario", "method", "pi2f", "class", "group", "metric", "mean", "sd", "q05", "q95",
];

/// Flattens sweep aggregates: group-wise and overall FSR and FSR* per class,
/// EPI, power per class and gamma per class and group.
pub fn tidy(config: &ScenarioConfig, points: &[SweepPoint]) -> Vec<TidyRow> {
    let class_name = |c: Option<usize>| c.map_or("all".to_string(), |c| config.base.classes[c].clone());
    let group_name = |g: Option<usize>| g.map_or("all".to_string(), |g| config.base.groups[g].name.clone());
    let mut rows = Vec::new();
    for p in points {
        let mut push = |class: String, group: String, metric: &str, s: &crate::metrics::Summary<f64>| {
            rows.push(TidyRow {
                scenario: config.scenario,
                method: p.method.to_string(),
                pi2f: p.pi2f,
                class,
                group,
                metric: metric.to_string(),
                mean: s.mean,
                sd: s.sd,
                q05: s.quantile(0.05).unwrap_or(f64::NAN),
                q95: s.quantile(0.95).unwrap_or(f64::NAN),
            });
        };
        for cell in &p.report.cells {
            let (c, g) = (class_name(cell.cell.class), group_name(cell.cell.group));
            push(c.clone(), g.clone(), "fsr", &cell.fsr);
            push(c, g, "fsr_star", &cell.fsr_star);
        }
        push("all".into(), "all".into(), "epi", &p.report.epi);
        for (c, s) in p.report.power.iter().enumerate() {
            if let Some(s) = s {
                push(class_name(Some(c)), "all".into(), "power", s);
            }
        }
        for (c, g, s) in &p.report.gamma {
            if let Some(s) = s {
                push(class_name(Some(*c)), group_name(Some(*g)), "gamma", s);
            }
        }
    }
    rows
}

/// Sample of standard and Plus R-values of one fixed individual.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySample {
    pub standard: Vec<f64>,
    pub plus: Vec<f64>,
}

/// Settings of the R versus R+ stability study.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    pub spec: MixtureSpec<f64>,
    pub group: usize,
    pub class: usize,
    pub score: f64,
    pub n_cal: usize,
    pub m: usize,
    pub draws: usize,
    pub seed: u64,
}

impl StabilityConfig {
    /// `P(Y = 2) = 0.8` in both groups, means `(1,1,1)` and `(2,2,2)`,
    /// covariance `2 I`, fixed class-2 score 0.9.
    pub fn standard_setup(m: usize) -> Self {
        let group = |name: &str| GroupSpec {
            name: name.into(),
            prior: 0.5,
            class_priors: vec![0.2, 0.8],
            components: vec![
                Component::isotropic(vec![1.0; 3], 2.0),
                Component::isotropic(vec![2.0; 3], 2.0),
            ],
        };
        Self {
            spec: MixtureSpec {
                classes: vec!["1".into(), "2".into()],
                groups: vec![group("F"), group("M")],
            },
            group: 0,
            class: 1,
            score: 0.9,
            n_cal: 1000,
            m,
            draws: 1000,
            seed: 2024,
        }
    }
}

/// Draws calibration sets and `m - 1` companions of an individual with a
/// fixed score, all in one group with oracle scores, and records its raw
/// standard and Plus R-values.
pub fn stability_study(cfg: &StabilityConfig) -> Result<StabilitySample> {
    if cfg.m == 0 {
        return Err(Error::InvalidArgument("test set must contain the fixed individual".into()));
    }
    let per_draw: Vec<(f64, f64)> = (0..cfg.draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(cfg.seed, 0, i);
            let score = |rng: &mut ChaCha8Rng| -> Result<(f64, usize)> {
                let d = cfg.spec.draw(rng, Some(cfg.group));
                Ok((cfg.spec.posterior_score(&d.x, cfg.group, cfg.class)?, d.label))
            };
            let cal = (0..cfg.n_cal)
                .map(|_| {
                    let (s, y) = score(&mut rng)?;
                    Ok(CalPoint {
                        group: 0,
                        score: s,
                        null: y != cfg.class,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut test = vec![TestPoint {
                group: 0,
                score: cfg.score,
            }];
            for _ in 1..cfg.m {
                test.push(TestPoint {
                    group: 0,
                    score: score(&mut rng)?.0,
                });
            }
            let std = rvalue::raw_rvalues_with(&cal, &test, Variant::Standard, Scope::Group)[0];
            let plus = rvalue::raw_rvalues_with(&cal, &test, Variant::Plus, Scope::Group)[0];
            Ok((std, plus))
        })
        .collect::<Result<_>>()?;
    let (standard, plus) = per_draw.into_iter().unzip();
    Ok(StabilitySample { standard, plus })
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}
