//! Command-line front end: `rvalue`, `conformal`, `evaluate` and `simulate`.
//!
//! Data goes to `--out` (or stdout), diagnostics to stderr. Exit codes: 0 ok,
//! 2 format error, 3 validation error, 4 internal invariant violation.

pub mod io;

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fasi::conformal::bh_qvalues;
use fasi::data::{Decision, LabelSet};
use fasi::metrics::{MetricsReport, Observation};
use fasi::rvalue::{self, RValueTable, Scope, Variant};
use fasi::simulate::{self, Method, ScenarioConfig, ScoreMode, TIDY_COLUMNS};

use crate::io::{decision_name, fmt_num, read_score_file, Schema};

pub const SEED_ENV: &str = "FASI_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("format error: {0}")]
    Format(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Format(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<fasi::Error> for CliError {
    fn from(e: fasi::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "fasi", version, about = "Fairness-adjusted selective classification")]
pub struct Cli {
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// R-values and selections for test records.
    Rvalue(RvalueArgs),
    /// Conformal p-values, BH q-values and rejections for one class.
    Conformal(ConformalArgs),
    /// False selection proportions, indecision rate, power and gamma.
    Evaluate(EvaluateArgs),
    /// Gaussian mixture simulation sweep.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct RvalueArgs {
    #[arg(long)]
    pub cal: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Single target class. Without it every class is scored and each test
    /// record is resolved to one class or an indecision.
    #[arg(long)]
    pub class: Option<String>,
    /// Level per class (comma separated) or one level for all classes.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub alpha: Vec<f64>,
    #[arg(long, default_value = "plus")]
    pub variant: Variant,
    /// Multiply by the calibration null-share factor.
    #[arg(long)]
    pub conservative: bool,
    /// Pool counts across groups instead of per group.
    #[arg(long)]
    pub fcc: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConformalArgs {
    /// Calibration scores; labeled rows of the target class are dropped.
    #[arg(long)]
    pub cal: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Target class; defaults to the first score column.
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// File with columns id, group, decision.
    #[arg(long)]
    pub selections: PathBuf,
    /// File with columns id, label.
    #[arg(long)]
    pub truth: PathBuf,
    /// Calibration score file; enables the gamma estimates.
    #[arg(long)]
    pub cal: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1)]
    pub scenario: u8,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Level per class (comma separated) or one level for both.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub alpha: Vec<f64>,
    /// Sweep grid as LO:HI:STEP or a comma separated list.
    #[arg(long, default_value = "0.2:0.8:0.15")]
    pub pi2f: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "fasi,fcc,oracle")]
    pub methods: Vec<Method>,
    #[arg(long, default_value = "oracle")]
    pub scores: ScoreMode,
    #[arg(long, default_value = "plus")]
    pub variant: Variant,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fasi: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Rvalue(a) => cmd_rvalue(&a),
        Command::Conformal(a) => cmd_conformal(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Simulate(a) => cmd_simulate(&a),
    })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Format(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(CliError::Validation(format!("alpha {alpha} outside [0, 1]")))
    }
}

fn expand_alphas(alpha: &[f64], k: usize) -> Result<Vec<f64>, CliError> {
    alpha.iter().try_for_each(|&a| check_alpha(a))?;
    match alpha.len() {
        1 => Ok(vec![alpha[0]; k]),
        n if n == k => Ok(alpha.to_vec()),
        n => Err(CliError::Validation(format!("{n} levels given for {k} classes"))),
    }
}

fn class_index(schema: &Schema, class: &str) -> Result<usize, CliError> {
    schema
        .classes
        .index_of(class)
        .ok_or_else(|| CliError::Format(format!("no score column for class {class}")))
}

/// Sanity checks on computed R-values; a failure is a bug, not bad input.
fn check_table(table: &RValueTable<f64>) -> Result<(), CliError> {
    for r in &table.rows {
        if !(0.0..=1.0).contains(&r.raw_r) || r.mono_r.is_nan() || r.mono_r > r.raw_r || r.mono_r < 0.0 {
            return Err(CliError::Internal(format!("R-value out of order for record {}", r.id)));
        }
    }
    let mut by_group: HashMap<usize, Vec<(f64, f64)>> = HashMap::new();
    for r in &table.rows {
        let key = if table.scope == Scope::Pooled { 0 } else { r.group };
        by_group.entry(key).or_default().push((r.score, r.mono_r));
    }
    for rows in by_group.values_mut() {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[1].1 > w[0].1) {
            return Err(CliError::Internal("monotone R-values increase with score".into()));
        }
    }
    Ok(())
}

pub fn cmd_rvalue(a: &RvalueArgs) -> Result<(), CliError> {
    let cal_file = read_score_file(&a.cal)?;
    let test_file = read_score_file(&a.test)?;
    let schema = Schema::from_files(&[&cal_file, &test_file])?;
    let cal = schema.records(&cal_file)?;
    let test = schema.records(&test_file)?;
    let variant = if a.conservative { a.variant.conservative() } else { a.variant };
    let scope = if a.fcc { Scope::Pooled } else { Scope::Group };
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);

    if let Some(class) = &a.class {
        let c = class_index(&schema, class)?;
        let [alpha] = a.alpha[..] else {
            return Err(CliError::Validation("a single class takes a single level".into()));
        };
        check_alpha(alpha)?;
        let table = RValueTable::compute(&cal, &test, c, variant, scope)?;
        check_table(&table)?;
        w.write_record(["id", "group", "score", "raw_r", "mono_r", "decision"])?;
        for r in &table.rows {
            let d = if r.mono_r <= alpha { Decision::Class(c) } else { Decision::Indecision };
            w.write_record([
                r.id.as_str(),
                schema.groups.name(r.group),
                &fmt_num(r.score),
                &fmt_num(r.raw_r),
                &fmt_num(r.mono_r),
                decision_name(&schema.classes, d),
            ])?;
        }
    } else {
        let alphas = expand_alphas(&a.alpha, schema.classes.len())?;
        let (tables, outcomes) = rvalue::classify(&cal, &test, &alphas, variant, scope)?;
        tables.iter().try_for_each(check_table)?;
        let mut header = vec!["id".to_string(), "group".into(), "decision".into(), "r_value".into()];
        for c in schema.classes.names() {
            header.push(format!("raw_r_{c}"));
            header.push(format!("mono_r_{c}"));
        }
        w.write_record(&header)?;
        for (j, o) in outcomes.iter().enumerate() {
            let mut row = vec![
                o.id.clone(),
                schema.groups.name(o.group).to_string(),
                decision_name(&schema.classes, o.decision).to_string(),
                o.r_value.map_or(String::new(), fmt_num),
            ];
            for t in &tables {
                row.push(fmt_num(t.rows[j].raw_r));
                row.push(fmt_num(t.rows[j].mono_r));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_conformal(a: &ConformalArgs) -> Result<(), CliError> {
    check_alpha(a.alpha)?;
    let cal_file = read_score_file(&a.cal)?;
    let test_file = read_score_file(&a.test)?;
    let schema = Schema::from_files(&[&cal_file, &test_file])?;
    let c = match &a.class {
        Some(name) => class_index(&schema, name)?,
        None => 0,
    };
    let cal = schema.records(&cal_file)?;
    let test = schema.records(&test_file)?;
    let cal_scores: Vec<f64> = cal
        .iter()
        .filter(|r| r.label != Some(c))
        .map(|r| r.score(c))
        .collect();
    let test_scores: Vec<f64> = test.iter().map(|r| r.score(c)).collect();
    let table = bh_qvalues(&cal_scores, &test_scores);
    if table.empty_calibration {
        eprintln!("fasi: empty calibration pool, every p-value is 1");
    }
    let capped = table.q_capped();
    let reject = table.rejections(a.alpha);
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    w.write_record(["id", "group", "score", "p_value", "q_raw", "q_value", "reject"])?;
    for (j, r) in test.iter().enumerate() {
        w.write_record([
            r.id.as_str(),
            schema.groups.name(r.group),
            &fmt_num(test_scores[j]),
            &fmt_num(table.p[j]),
            &fmt_num(table.q_raw[j]),
            &fmt_num(capped[j]),
            if reject[j] { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn round12(x: f64) -> f64 {
    fmt_num(x).parse().unwrap_or(x)
}

fn json_num(x: Option<f64>) -> serde_json::Value {
    x.map_or(serde_json::Value::Null, |v| serde_json::json!(round12(v)))
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let selections = io::read_selections(&a.selections)?;
    let truth = io::read_truth(&a.truth)?;
    let cal_file = a.cal.as_deref().map(read_score_file).transpose()?;

    let mut class_names: BTreeSet<String> = truth.values().cloned().collect();
    class_names.extend(selections.iter().filter_map(|s| s.decision.clone()));
    let mut group_names: BTreeSet<String> = selections.iter().map(|s| s.group.clone()).collect();
    if let Some(f) = &cal_file {
        class_names.extend(f.classes.iter().cloned());
        class_names.extend(f.rows.iter().filter_map(|r| r.label.clone()));
        group_names.extend(f.rows.iter().map(|r| r.group.clone()));
    }
    let classes = LabelSet::new(class_names).ok();
    let groups = LabelSet::new(group_names).ok();
    let index = |set: &Option<LabelSet>, name: &str| set.as_ref().and_then(|s| s.index_of(name));

    let mut seen = std::collections::HashSet::new();
    let obs = selections
        .iter()
        .map(|s| {
            if !seen.insert(s.id.as_str()) {
                return Err(CliError::Validation(format!("duplicate id {}", s.id)));
            }
            Ok(Observation {
                group: index(&groups, &s.group).expect("collected"),
                decision: s
                    .decision
                    .as_deref()
                    .map_or(Decision::Indecision, |d| Decision::Class(index(&classes, d).expect("collected"))),
                truth: truth.get(&s.id).map(|l| index(&classes, l).expect("collected")),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let k = classes.as_ref().map_or(0, LabelSet::len);
    let n_groups = groups.as_ref().map_or(0, LabelSet::len);
    let mut report = MetricsReport::<f64>::evaluate(&obs, k, n_groups).map_err(|e| match e {
        fasi::Error::MissingTruth(rows) => {
            let ids: Vec<&str> = rows.iter().map(|&i| selections[i].id.as_str()).collect();
            CliError::Validation(format!("selected records without truth: {}", ids.join(", ")))
        }
        other => other.into(),
    })?;
    if let Some(f) = &cal_file {
        let pairs: Vec<(usize, usize)> = f
            .rows
            .iter()
            .filter_map(|r| {
                let y = r.label.as_deref()?;
                Some((index(&groups, &r.group)?, index(&classes, y)?))
            })
            .collect();
        report = report.with_gamma(&pairs, &obs, k, n_groups);
    }

    let name = |set: &Option<LabelSet>, i: Option<usize>| -> String {
        i.map_or("all".into(), |i| set.as_ref().expect("indexed").name(i).to_string())
    };
    let cells: Vec<serde_json::Value> = report
        .cells
        .iter()
        .map(|c| {
            serde_json::json!({
                "class": name(&classes, c.cell.class),
                "group": name(&groups, c.cell.group),
                "fsp": round12(c.fsp),
                "fsp_star": round12(c.fsp_star),
                "n_selected": c.counts.n_selected,
                "n_false": c.counts.n_false,
            })
        })
        .collect();
    let power: serde_json::Map<String, serde_json::Value> = report
        .power
        .iter()
        .enumerate()
        .map(|(c, p)| (name(&classes, Some(c)), json_num(*p)))
        .collect();
    let gamma: Vec<serde_json::Value> = report
        .gamma
        .iter()
        .map(|g| {
            serde_json::json!({
                "class": name(&classes, Some(g.class)),
                "group": name(&groups, Some(g.group)),
                "value": json_num(g.value),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "m": report.m,
        "classes": classes.as_ref().map_or(&[][..], LabelSet::names),
        "groups": groups.as_ref().map_or(&[][..], LabelSet::names),
        "epi": round12(report.epi),
        "cells": cells,
        "power": power,
        "gamma": gamma,
    });
    let mut out = output(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// `LO:HI:STEP` (inclusive) or a comma separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Validation(format!("bad grid {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    match parts[..] {
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if step.is_nan() || step <= 0.0 || hi < lo {
                return Err(bad());
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| round12(lo + i as f64 * step)).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

fn seed_override(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{SEED_ENV} is not an unsigned integer: {v:?}"))),
        Err(_) => Ok(flag),
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let mut config = ScenarioConfig::preset(a.scenario)?;
    config.reps = a.reps;
    config.alphas = expand_alphas(&a.alpha, config.n_classes())?;
    config.grid = parse_grid(&a.pi2f)?;
    config.seed = seed_override(a.seed)?;
    config.methods = a.methods.clone();
    config.score_mode = a.scores;
    config.variant = a.variant;
    config.validate()?;

    let total = config.grid.len();
    let points = simulate::sweep_with_progress(&config, |i, p| {
        eprintln!("fasi: pi2f = {} done ({}/{total})", fmt_num(p), i + 1);
    })?;
    let rows = simulate::tidy(&config, &points);
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    w.write_record(TIDY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.scenario.to_string(),
            r.method,
            fmt_num(r.pi2f),
            r.class,
            r.group,
            r.metric,
            fmt_num(r.mean),
            fmt_num(r.sd),
            fmt_num(r.q05),
            fmt_num(r.q95),
        ])?;
    }
    w.flush()?;
    Ok(())
}
