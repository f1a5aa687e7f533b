//! Delimited text formats: score files, selection files, truth files and
//! number formatting.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use fasi::data::{ClassSet, Decision, GroupSet, LabelSet, ScoreRecord};

use crate::CliError;

pub const SCORE_PREFIX: &str = "score_";
pub const INDECISION: &str = "indecision";

/// Formats with 12 significant digits, then prints the shortest decimal
/// that reads back to the rounded value.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    rounded.to_string()
}

fn reader_from<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

fn open(path: &Path) -> Result<csv::Reader<File>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    Ok(reader_from(file))
}

fn header_index(headers: &csv::StringRecord, name: &str, path: &str) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Format(format!("{path}: missing column {name}")))
}

/// Parsed score file before group and class indices are resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RawScoreFile {
    pub classes: Vec<String>,
    pub rows: Vec<RawScoreRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawScoreRow {
    pub id: String,
    pub group: String,
    pub label: Option<String>,
    pub scores: Vec<f64>,
}

pub fn read_score_file(path: &Path) -> Result<RawScoreFile, CliError> {
    parse_score_file(open(path)?, &path.display().to_string())
}

pub fn parse_score_file<R: Read>(mut rdr: csv::Reader<R>, name: &str) -> Result<RawScoreFile, CliError> {
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Format(format!("{name}: {e}")))?
        .clone();
    let id_col = header_index(&headers, "id", name)?;
    let group_col = header_index(&headers, "group", name)?;
    let label_col = headers.iter().position(|h| h == "label");
    let score_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix(SCORE_PREFIX).map(|c| (i, c.to_string())))
        .collect();
    if score_cols.is_empty() {
        return Err(CliError::Format(format!("{name}: no {SCORE_PREFIX}<class> columns")));
    }
    let known = |h: &str| h == "id" || h == "group" || h == "label" || h.starts_with(SCORE_PREFIX);
    if let Some(h) = headers.iter().find(|h| !known(h)) {
        return Err(CliError::Format(format!("{name}: unexpected column {h}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Format(format!("{name}: {e}")))?;
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        let scores = score_cols
            .iter()
            .map(|(i, c)| {
                let text = field(*i);
                text.parse::<f64>().map_err(|_| {
                    CliError::Format(format!(
                        "{name}: row {}: score_{c} is not a number: {text:?}",
                        line + 2
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let label = label_col.map(field).filter(|l| !l.is_empty());
        rows.push(RawScoreRow {
            id: field(id_col),
            group: field(group_col),
            label,
            scores,
        });
    }
    Ok(RawScoreFile {
        classes: score_cols.into_iter().map(|(_, c)| c).collect(),
        rows,
    })
}

/// Calibration and test files resolved against one schema.
#[derive(Debug, Clone)]
pub struct Schema {
    pub classes: ClassSet,
    pub groups: GroupSet,
}

impl Schema {
    /// Classes come from the first file's score columns (all files must
    /// agree); groups are the sorted union of the files' groups.
    pub fn from_files(files: &[&RawScoreFile]) -> Result<Self, CliError> {
        let first = files.first().ok_or_else(|| CliError::Internal("no input files".into()))?;
        for f in files {
            if f.classes != first.classes {
                return Err(CliError::Format(format!(
                    "score columns differ between inputs: {:?} vs {:?}",
                    first.classes, f.classes
                )));
            }
        }
        let classes = LabelSet::new(first.classes.clone()).map_err(CliError::from)?;
        let groups: BTreeSet<&str> = files
            .iter()
            .flat_map(|f| f.rows.iter().map(|r| r.group.as_str()))
            .collect();
        let groups = if groups.is_empty() {
            LabelSet::new(["all"])
        } else {
            LabelSet::new(groups)
        }
        .map_err(CliError::from)?;
        Ok(Self { classes, groups })
    }

    pub fn records(&self, file: &RawScoreFile) -> Result<Vec<ScoreRecord<f64>>, CliError> {
        let records = file
            .rows
            .iter()
            .map(|r| {
                let label = r
                    .label
                    .as_deref()
                    .map(|l| {
                        self.classes
                            .index_of(l)
                            .ok_or_else(|| CliError::Validation(format!("record {}: unknown label {l}", r.id)))
                    })
                    .transpose()?;
                let group = self.groups.index_of(&r.group).expect("groups collected from files");
                Ok(ScoreRecord::new(r.id.clone(), group, r.scores.clone(), label))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        fasi::data::validate(records, &self.classes, &self.groups).map_err(CliError::from)
    }
}

/// Writes a score file with header `id,group,label,score_<class>...`.
pub fn write_score_file<W: Write>(
    out: W,
    schema: &Schema,
    records: &[ScoreRecord<f64>],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "group".into(), "label".into()];
    header.extend(schema.classes.names().iter().map(|c| format!("{SCORE_PREFIX}{c}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.id.clone(),
            schema.groups.name(r.group).to_string(),
            r.label.map_or(String::new(), |y| schema.classes.name(y).to_string()),
        ];
        row.extend(r.scores.iter().map(|&s| fmt_num(s)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A row of a selections file: `id,group,decision`, where `decision` is a
/// class name or `indecision`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionRow {
    pub id: String,
    pub group: String,
    pub decision: Option<String>,
}

pub fn read_selections(path: &Path) -> Result<Vec<SelectionRow>, CliError> {
    let name = path.display().to_string();
    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(|e| CliError::Format(format!("{name}: {e}")))?.clone();
    let id = header_index(&headers, "id", &name)?;
    let group = header_index(&headers, "group", &name)?;
    let decision = header_index(&headers, "decision", &name)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Format(format!("{name}: {e}")))?;
        let d = rec.get(decision).unwrap_or("");
        rows.push(SelectionRow {
            id: rec.get(id).unwrap_or("").to_string(),
            group: rec.get(group).unwrap_or("").to_string(),
            decision: (!d.is_empty() && d != INDECISION).then(|| d.to_string()),
        });
    }
    Ok(rows)
}

/// `id -> label` from a file with `id` and `label` columns. Rows with an
/// empty label are skipped.
pub fn read_truth(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let name = path.display().to_string();
    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(|e| CliError::Format(format!("{name}: {e}")))?.clone();
    let id = header_index(&headers, "id", &name)?;
    let label = header_index(&headers, "label", &name)?;
    let mut out = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Format(format!("{name}: {e}")))?;
        let l = rec.get(label).unwrap_or("");
        if l.is_empty() {
            continue;
        }
        let key = rec.get(id).unwrap_or("").to_string();
        if out.insert(key.clone(), l.to_string()).is_some() {
            return Err(CliError::Validation(format!("duplicate id {key} in {name}")));
        }
    }
    Ok(out)
}

pub fn decision_name(classes: &ClassSet, d: Decision) -> &str {
    match d {
        Decision::Class(c) => classes.name(c),
        Decision::Indecision => INDECISION,
    }
}
