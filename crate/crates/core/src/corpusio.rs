//! Corpus records, feature matrices, models and reports on disk.
//!
//! - corpora: one JSON record per line;
//! - matrices: CSV with `id`, `level`, `source`, the feature columns and a
//!   trailing `__unavailable` column listing unavailable features;
//! - models and reports: pretty-printed JSON with a `format_version`.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Instance, Level, LevelMapping, MAX_LEVEL, MIN_LEVEL};
use crate::error::{Error, Result};
use crate::features::{extract_all, feature_names, FeatureConfig};
use crate::lexicons::Resources;
use crate::svm::MulticlassModel;
use crate::textmodel::{build_document, AnnotatedDocument, DocumentInput, TextConfig, TokenRecord};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const UNAVAILABLE_COLUMN: &str = "__unavailable";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub id: String,
    #[serde(default)]
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<TokenRecord>>,
}

impl CorpusRecord {
    pub fn raw(id: impl Into<String>, text: impl Into<String>, level: Option<Level>) -> CorpusRecord {
        CorpusRecord {
            id: id.into(),
            source: String::new(),
            level,
            text: Some(text.into()),
            tokens: None,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        match (&self.text, &self.tokens) {
            (Some(_), Some(_)) => return Err("ambiguous record: both text and tokens present".into()),
            (None, None) => return Err("record has neither text nor tokens".into()),
            _ => {}
        }
        if let Some(l) = self.level {
            if !(MIN_LEVEL..=MAX_LEVEL).contains(&l) {
                return Err(format!("level {l} outside {MIN_LEVEL}..={MAX_LEVEL}"));
            }
        }
        Ok(())
    }

    pub fn input(&self) -> DocumentInput {
        match (&self.text, &self.tokens) {
            (Some(t), _) => DocumentInput::Raw(t.clone()),
            (None, Some(tokens)) => DocumentInput::Annotated(tokens.clone()),
            (None, None) => DocumentInput::Raw(String::new()),
        }
    }

    pub fn document(&self, cfg: &TextConfig) -> Result<AnnotatedDocument> {
        build_document(&self.input(), &self.id, &self.source, cfg)
    }

    /// Human-readable text: the raw text, or the tokens joined back together.
    pub fn display_text(&self, cfg: &TextConfig) -> String {
        match &self.text {
            Some(t) => t.clone(),
            None => self.document(cfg).map(|d| d.plain_text()).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReadMode {
    #[default]
    Strict,
    /// Skip malformed lines and report them.
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRead {
    pub records: Vec<CorpusRecord>,
    /// `(line, message)` for each skipped line in lenient mode.
    pub skipped: Vec<(usize, String)>,
}

pub fn parse_corpus(text: &str, mode: ReadMode) -> Result<CorpusRead> {
    parse_corpus_lines(text.lines().map(|l| Ok(l.to_string())), mode)
}

pub fn read_corpus(path: impl AsRef<Path>, mode: ReadMode) -> Result<CorpusRead> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus_lines(
        BufReader::new(file).lines().map(|l| l.map_err(|e| Error::io(path, e))),
        mode,
    )
}

fn parse_corpus_lines<I: Iterator<Item = Result<String>>>(lines: I, mode: ReadMode) -> Result<CorpusRead> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let number = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<CorpusRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|r| r.validate().map(|_| r))
            .and_then(|r| {
                if ids.insert(r.id.clone()) {
                    Ok(r)
                } else {
                    Err(format!("duplicate id {:?}", r.id))
                }
            });
        match parsed {
            Ok(r) => records.push(r),
            Err(message) => match mode {
                ReadMode::Strict => return Err(Error::Malformed { line: number, message }),
                ReadMode::Lenient => skipped.push((number, message)),
            },
        }
    }
    if records.is_empty() {
        return Err(Error::InvalidInput("corpus contains no valid records".into()));
    }
    Ok(CorpusRead { records, skipped })
}

pub fn write_corpus(records: &[CorpusRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Extracts the full registry for every record, in parallel.
///
/// Records that fail to build or extract are returned separately with their
/// error instead of aborting the whole corpus.
pub fn extract_corpus(
    records: &[CorpusRecord],
    resources: &Resources,
    feature_cfg: &FeatureConfig,
    text_cfg: &TextConfig,
) -> Result<(Dataset, Vec<(String, Error)>)> {
    let results: Vec<_> = records
        .par_iter()
        .map(|r| {
            let fv = r.document(text_cfg).and_then(|doc| extract_all(&doc, resources, feature_cfg));
            (r, fv)
        })
        .collect();
    let mut dataset = Dataset::new(feature_names())?;
    let mut failures = Vec::new();
    for (r, fv) in results {
        match fv {
            Ok(fv) => dataset.push(Instance {
                id: r.id.clone(),
                values: fv.values.values().copied().collect(),
                available: fv.available.values().copied().collect(),
                level: r.level,
                source: r.source.clone(),
            })?,
            Err(e) => failures.push((r.id.clone(), e)),
        }
    }
    Ok((dataset, failures))
}

/// Which feature columns a matrix may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnCheck {
    /// Exactly the registry, in registry order.
    #[default]
    Registry,
    /// Any subset of registry names, in any order.
    Subset,
    /// Arbitrary names (synthetic data).
    Free,
}

pub fn write_feature_matrix(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = matrix_to_bytes(dataset)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn matrix_to_bytes(dataset: &Dataset) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let level_header = match &dataset.level_mapping {
        Some(m) => format!("level@{m}"),
        None => "level".to_string(),
    };
    let mut header = vec!["id".to_string(), level_header, "source".to_string()];
    header.extend(dataset.feature_names.iter().cloned());
    header.push(UNAVAILABLE_COLUMN.to_string());
    w.write_record(&header)?;
    for inst in &dataset.instances {
        let mut row = vec![
            inst.id.clone(),
            inst.level.map(|l| l.to_string()).unwrap_or_default(),
            inst.source.clone(),
        ];
        // `{}` on f64 prints the shortest string that parses back exactly
        row.extend(inst.values.iter().map(|v| format!("{v}")));
        let unavailable: Vec<&str> = dataset
            .feature_names
            .iter()
            .zip(&inst.available)
            .filter(|(_, a)| !**a)
            .map(|(n, _)| n.as_str())
            .collect();
        row.push(unavailable.join(";"));
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))
}

pub fn read_feature_matrix(path: impl AsRef<Path>, check: ColumnCheck) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    matrix_from_bytes(&bytes, check)
}

pub fn matrix_from_bytes(bytes: &[u8], check: ColumnCheck) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let malformed = |line: usize, message: String| Error::Malformed { line, message };
    if header.len() < 4 || header[0] != "id" || header[2] != "source" || header.last().map(String::as_str) != Some(UNAVAILABLE_COLUMN) {
        return Err(malformed(
            1,
            format!("header must be id, level, source, <features...>, {UNAVAILABLE_COLUMN}"),
        ));
    }
    let level_mapping = match header[1].as_str() {
        "level" => None,
        h => match h.strip_prefix("level@") {
            Some(m) => Some(m.parse::<LevelMapping>()?),
            None => return Err(malformed(1, format!("unexpected level column {h:?}"))),
        },
    };
    let names: Vec<String> = header[3..header.len() - 1].to_vec();
    check_columns(&names, check)?;
    let mut dataset = Dataset::new(names)?;
    dataset.level_mapping = level_mapping;
    for (i, record) in r.records().enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() != header.len() {
            return Err(malformed(line, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        let level = match record[1].trim() {
            "" => None,
            s => Some(s.parse::<Level>().map_err(|_| malformed(line, format!("bad level {s:?}")))?),
        };
        let values = (3..record.len() - 1)
            .map(|c| {
                record[c]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| malformed(line, format!("bad value {:?} in column {}", &record[c], header[c])))
            })
            .collect::<Result<Vec<f64>>>()?;
        let unavailable: HashSet<&str> = record[record.len() - 1].split(';').filter(|s| !s.is_empty()).collect();
        if let Some(bad) = unavailable.iter().find(|u| !dataset.feature_names.iter().any(|n| n == *u)) {
            return Err(malformed(line, format!("unknown feature {bad:?} in {UNAVAILABLE_COLUMN}")));
        }
        let available = dataset
            .feature_names
            .iter()
            .map(|n| !unavailable.contains(n.as_str()))
            .collect();
        dataset
            .push(Instance {
                id: record[0].to_string(),
                values,
                available,
                level,
                source: record[2].to_string(),
            })
            .map_err(|e| malformed(line, e.to_string()))?;
    }
    Ok(dataset)
}

fn check_columns(names: &[String], check: ColumnCheck) -> Result<()> {
    let registry = feature_names();
    match check {
        ColumnCheck::Free => Ok(()),
        ColumnCheck::Registry if names == registry.as_slice() => Ok(()),
        _ => {
            let unknown: Vec<&str> = names
                .iter()
                .filter(|n| !registry.contains(n))
                .map(String::as_str)
                .collect();
            if !unknown.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "unknown feature columns: {}",
                    unknown.join(", ")
                )));
            }
            if check == ColumnCheck::Registry {
                let missing: Vec<&str> = registry
                    .iter()
                    .filter(|n| !names.contains(n))
                    .map(String::as_str)
                    .collect();
                return Err(Error::InvalidInput(if missing.is_empty() {
                    "feature columns are not in registry order".into()
                } else {
                    format!("missing feature columns: {} (use subset mode to allow)", missing.join(", "))
                }));
            }
            Ok(())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: MulticlassModel,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

pub fn model_to_string(model: &MulticlassModel) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    })?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_str(text: &str) -> Result<MulticlassModel> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
    if probe.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: MODEL_FORMAT_VERSION,
            found: probe.format_version,
        });
    }
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
    validate_model(&file.model)?;
    Ok(file.model)
}

fn validate_model(m: &MulticlassModel) -> Result<()> {
    let corrupt = |msg: String| Err(Error::CorruptModel(msg));
    let d = m.feature_names.len();
    if m.labels.len() < 2 || m.labels.windows(2).any(|w| w[0] >= w[1]) {
        return corrupt("labels must be at least two, strictly increasing".into());
    }
    if m.scaling.means.len() != d || m.scaling.stds.len() != d || m.scaling.constant_mask.len() != d {
        return corrupt(format!("scaling does not match {d} features"));
    }
    let expected: Vec<(Level, Level)> = m
        .labels
        .iter()
        .enumerate()
        .flat_map(|(a, &la)| m.labels[a + 1..].iter().map(move |&lb| (la, lb)))
        .collect();
    let found: Vec<(Level, Level)> = m.binaries.iter().map(|b| b.label_pair).collect();
    if expected != found {
        return corrupt(format!("expected label pairs {expected:?}, found {found:?}"));
    }
    if let Some(b) = m.binaries.iter().find(|b| b.weights.len() != d) {
        return corrupt(format!("pair {:?} has {} weights for {d} features", b.label_pair, b.weights.len()));
    }
    Ok(())
}

pub fn save_model(model: &MulticlassModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_string(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MulticlassModel> {
    let path = path.as_ref();
    model_from_str(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Writes any report as versioned pretty JSON.
pub fn write_report<T: Serialize>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    #[derive(Serialize)]
    struct Versioned<'a, T> {
        format_version: u32,
        #[serde(flatten)]
        report: &'a T,
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let text = serde_json::to_string_pretty(&Versioned {
        format_version: MODEL_FORMAT_VERSION,
        report,
    })?;
    writeln!(file, "{text}").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::{train_multiclass, TrainConfig};

    #[test]
    fn corpus_validation() {
        let good = r#"{"id":"a","text":"Oi.","level":1}
{"id":"b","text":"Olá.","source":"x"}

{"id":"c","tokens":[{"surface":"Oi","sentence":0,"paragraph":0}]}"#;
        let read = parse_corpus(good, ReadMode::Strict).unwrap();
        assert_eq!(read.records.len(), 3);

        let bad_level = "{\"id\":\"a\",\"text\":\"Oi.\",\"level\":7}";
        match parse_corpus(bad_level, ReadMode::Strict) {
            Err(Error::Malformed { line: 1, message }) => assert!(message.contains("level 7")),
            other => panic!("{other:?}"),
        }
        let both = "{\"id\":\"a\",\"text\":\"Oi.\",\"tokens\":[]}";
        let err = parse_corpus(both, ReadMode::Strict).unwrap_err().to_string();
        assert!(err.contains("ambiguous record"), "{err}");

        let mixed = format!("{good}\nnot json\n{bad_level}");
        let lenient = parse_corpus(&mixed, ReadMode::Lenient).unwrap();
        assert_eq!(lenient.records.len(), 3);
        assert_eq!(lenient.skipped.iter().map(|s| s.0).collect::<Vec<_>>(), vec![5, 6]);
        assert!(parse_corpus("junk", ReadMode::Lenient).is_err());
    }

    fn small() -> Dataset {
        let mut d = Dataset::new(vec!["f1".into(), "f2".into(), "f3".into()]).unwrap();
        d.push(Instance::new("a", vec![0.1, 1.0 / 3.0, -2.5e-17], Some(1)).with_source("s, with comma"))
            .unwrap();
        let mut b = Instance::new("b", vec![1e300, 0.0, 7.0], None);
        b.available[1] = false;
        d.push(b).unwrap();
        d
    }

    #[test]
    fn matrix_round_trip() {
        let d = small();
        let bytes = matrix_to_bytes(&d).unwrap();
        assert_eq!(String::from_utf8_lossy(&bytes).lines().count(), 3);
        assert_eq!(matrix_from_bytes(&bytes, ColumnCheck::Free).unwrap(), d);
        let err = matrix_from_bytes(&bytes, ColumnCheck::Subset).unwrap_err().to_string();
        assert!(err.contains("f1, f2, f3"), "{err}");
    }

    #[test]
    fn model_round_trip() {
        let mut d = small();
        d.instances[1].level = Some(2);
        d.instances[1].values[0] = 3.25;
        d.push(Instance::new("c", vec![0.5, 0.2, 1.0], Some(2))).unwrap();
        let m = train_multiclass(&d, &TrainConfig::default()).unwrap();
        let s = model_to_string(&m).unwrap();
        let back = model_from_str(&s).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_string(&back).unwrap(), s);
        assert!(matches!(model_from_str(&s[..s.len() / 2]), Err(Error::CorruptModel(_))));
        let bumped = s.replacen("\"format_version\": 1", "\"format_version\": 9", 1);
        assert!(matches!(model_from_str(&bumped), Err(Error::VersionMismatch { found: 9, .. })));
    }
}
