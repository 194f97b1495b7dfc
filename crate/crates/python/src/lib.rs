//! Python bindings: feature extraction, datasets, training, evaluation and
//! batch selection.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use readlevel::corpusio::{self, ColumnCheck, ReadMode};
use readlevel::dataset::{Dataset as CoreDataset, Instance, Level, LevelMapping};
use readlevel::evaluation::{self, EvalConfig};
use readlevel::features::{self, FeatureConfig};
use readlevel::learnloop::{self, SelectionStrategy};
use readlevel::lexicons::Resources;
use readlevel::svm::{self, Aggregation, MulticlassModel, TrainConfig};
use readlevel::textmodel::{build_document, DocumentInput, TextConfig};

create_exception!(readlevel_py, ReadlevelError, PyException, "Error raised by the readlevel core.");

fn err(e: readlevel::Error) -> PyErr {
    match e {
        readlevel::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        e => ReadlevelError::new_err(format!("{}: {e}", e.code())),
    }
}

// Vec<u8> would cross into Python as bytes.
fn widen(levels: &[Level]) -> Vec<u32> {
    levels.iter().map(|&l| u32::from(l)).collect()
}

fn train_config(c: f64, seed: u64) -> TrainConfig {
    TrainConfig {
        c,
        seed,
        ..TrainConfig::default()
    }
}

fn column_check(name: &str) -> PyResult<ColumnCheck> {
    match name {
        "registry" => Ok(ColumnCheck::Registry),
        "subset" => Ok(ColumnCheck::Subset),
        "free" => Ok(ColumnCheck::Free),
        other => Err(PyValueError::new_err(format!("unknown column check {other:?}"))),
    }
}

fn strategy(name: &str) -> PyResult<SelectionStrategy> {
    match name {
        "most_uncertain" => Ok(SelectionStrategy::MostUncertain),
        "most_confident" => Ok(SelectionStrategy::MostConfident),
        other => Err(PyValueError::new_err(format!("unknown strategy {other:?}"))),
    }
}

fn aggregation(name: &str) -> PyResult<Aggregation> {
    match name {
        "min" => Ok(Aggregation::Min),
        "mean" => Ok(Aggregation::Mean),
        "vote_margin" => Ok(Aggregation::VoteMargin),
        other => Err(PyValueError::new_err(format!("unknown aggregation {other:?}"))),
    }
}

/// Labeled or unlabeled feature matrix.
#[pyclass(name = "Dataset", module = "readlevel_py")]
struct PyDataset {
    inner: CoreDataset,
}

#[pymethods]
impl PyDataset {
    /// Builds a dataset from rows; `levels` entries may be None for unlabeled rows.
    #[new]
    #[pyo3(signature = (feature_names, ids, rows, levels=None))]
    fn new(
        feature_names: Vec<String>,
        ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        levels: Option<Vec<Option<Level>>>,
    ) -> PyResult<Self> {
        if ids.len() != rows.len() {
            return Err(PyValueError::new_err("ids and rows differ in length"));
        }
        let levels = levels.unwrap_or_else(|| vec![None; ids.len()]);
        if levels.len() != ids.len() {
            return Err(PyValueError::new_err("ids and levels differ in length"));
        }
        let mut inner = CoreDataset::new(feature_names).map_err(err)?;
        for ((id, row), level) in ids.into_iter().zip(rows).zip(levels) {
            inner.push(Instance::new(id, row, level)).map_err(err)?;
        }
        Ok(PyDataset { inner })
    }

    /// Reads a feature-matrix CSV; `check` is "registry", "subset" or "free".
    #[staticmethod]
    #[pyo3(signature = (path, check="registry"))]
    fn read_matrix(path: &str, check: &str) -> PyResult<Self> {
        let inner = corpusio::read_feature_matrix(path, column_check(check)?).map_err(err)?;
        Ok(PyDataset { inner })
    }

    fn write_matrix(&self, path: &str) -> PyResult<()> {
        corpusio::write_feature_matrix(&self.inner, path).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Dataset({} instances, {} features)", self.inner.len(), self.inner.feature_count())
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names.clone()
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner.instances.iter().map(|i| i.id.clone()).collect()
    }

    #[getter]
    fn levels(&self) -> Vec<Option<Level>> {
        self.inner.instances.iter().map(|i| i.level).collect()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.matrix()
    }

    fn class_counts(&self) -> BTreeMap<Level, usize> {
        self.inner.class_counts()
    }

    fn select_features(&self, names: Vec<String>) -> PyResult<Self> {
        Ok(PyDataset {
            inner: self.inner.select_features(&names).map_err(err)?,
        })
    }

    /// Relabels through a mapping such as "1:1,2:2,3:2,4:3,5:3".
    fn merge(&self, mapping: &str) -> PyResult<Self> {
        let mapping: LevelMapping = mapping.parse().map_err(err)?;
        Ok(PyDataset {
            inner: learnloop::merge_levels(&self.inner, &mapping).map_err(err)?,
        })
    }
}

/// One-vs-one linear SVM.
#[pyclass(name = "Model", module = "readlevel_py")]
struct PyModel {
    inner: MulticlassModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (dataset, C=1.0, seed=0))]
    #[allow(non_snake_case)]
    fn train(py: Python<'_>, dataset: &PyDataset, C: f64, seed: u64) -> PyResult<Self> {
        let ds = dataset.inner.clone();
        let inner = py.detach(move || svm::train_multiclass(&ds, &train_config(C, seed))).map_err(err)?;
        Ok(PyModel { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: corpusio::load_model(path).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: corpusio::model_from_str(text).map_err(err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        corpusio::save_model(&self.inner, path).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        corpusio::model_to_string(&self.inner).map_err(err)
    }

    #[getter]
    fn labels(&self) -> Vec<u32> {
        widen(&self.inner.labels)
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names.clone()
    }

    fn predict(&self, dataset: &PyDataset) -> PyResult<Vec<u32>> {
        let rows = self.inner.align(&dataset.inner).map_err(err)?;
        Ok(widen(&self.inner.predict_many(&rows).map_err(err)?))
    }

    /// Distance-based uncertainty per instance (smaller is less certain).
    #[pyo3(signature = (dataset, aggregation="min"))]
    fn uncertainty(&self, dataset: &PyDataset, aggregation: &str) -> PyResult<Vec<f64>> {
        let how = self::aggregation(aggregation)?;
        let rows = self.inner.align(&dataset.inner).map_err(err)?;
        rows.iter()
            .map(|r| self.inner.uncertainty_with(r, how).map_err(err))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(labels={:?}, features={}, pairs={})",
            self.inner.labels,
            self.inner.feature_names.len(),
            self.inner.pair_count()
        )
    }
}

/// Names of all registry features, in column order.
#[pyfunction]
fn feature_names() -> Vec<String> {
    features::feature_names().iter().map(|s| s.to_string()).collect()
}

/// Extracts every feature from raw text with the bundled lexicons.
/// Unavailable features are reported as None.
#[pyfunction]
fn extract_features(py: Python<'_>, text: &str) -> PyResult<Py<PyDict>> {
    let doc = build_document(&DocumentInput::Raw(text.to_string()), "doc", "python", &TextConfig::default()).map_err(err)?;
    let fv = features::extract_all(&doc, &Resources::bundled(), &FeatureConfig::default()).map_err(err)?;
    let out = PyDict::new(py);
    for (name, value) in &fv.values {
        if fv.is_available(name) {
            out.set_item(name, value)?;
        } else {
            out.set_item(name, py.None())?;
        }
    }
    Ok(out.unbind())
}

/// Reads a JSONL corpus and extracts a dataset; returns (dataset, failures).
#[pyfunction]
#[pyo3(signature = (path, lenient=false))]
fn extract_corpus(py: Python<'_>, path: &str, lenient: bool) -> PyResult<(PyDataset, Vec<(String, String)>)> {
    let mode = if lenient { ReadMode::Lenient } else { ReadMode::Strict };
    let corpus = corpusio::read_corpus(path, mode).map_err(err)?;
    let (inner, failures) = py
        .detach(move || {
            corpusio::extract_corpus(
                &corpus.records,
                &Resources::bundled(),
                &FeatureConfig::default(),
                &TextConfig::default(),
            )
        })
        .map_err(err)?;
    let failures = failures.into_iter().map(|(id, e)| (id, e.to_string())).collect();
    Ok((PyDataset { inner }, failures))
}

/// k-fold cross-validation; returns accuracies and the confusion matrix.
#[pyfunction]
#[pyo3(signature = (dataset, k=10, C=1.0, seed=0, stratified=true))]
#[allow(non_snake_case)]
fn cross_validate(
    py: Python<'_>,
    dataset: &PyDataset,
    k: usize,
    C: f64,
    seed: u64,
    stratified: bool,
) -> PyResult<Py<PyDict>> {
    let ds = dataset.inner.clone();
    let eval = EvalConfig { k, seed, stratified };
    let report = py
        .detach(move || evaluation::cross_validate(&ds, &train_config(C, seed), &eval))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("mean_accuracy", report.mean_accuracy)?;
    out.set_item("spread", report.spread)?;
    out.set_item("std", report.std)?;
    out.set_item("pooled_accuracy", report.pooled_accuracy)?;
    out.set_item("per_fold_accuracy", report.per_fold_accuracy)?;
    out.set_item("labels", widen(&report.label_set))?;
    out.set_item("confusion", report.confusion)?;
    Ok(out.unbind())
}

/// Recursive feature elimination down to `target` features.
#[pyfunction]
#[pyo3(signature = (dataset, target, step=1, C=1.0, seed=0))]
#[allow(non_snake_case)]
fn rfe(py: Python<'_>, dataset: &PyDataset, target: usize, step: usize, C: f64, seed: u64) -> PyResult<Py<PyDict>> {
    let ds = dataset.inner.clone();
    let ranking = py
        .detach(move || learnloop::rfe(&ds, &train_config(C, seed), target, step))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("ranking", ranking.ranking())?;
    out.set_item("elimination_order", ranking.elimination_order)?;
    out.set_item("survivors", ranking.survivor_set)?;
    out.set_item("survivor_scores", ranking.survivor_scores)?;
    Ok(out.unbind())
}

/// Picks the next `k` pool documents to annotate; returns [(id, score)].
#[pyfunction]
#[pyo3(signature = (model, pool, k, strategy="most_uncertain", aggregation="min"))]
fn select_batch(
    model: &PyModel,
    pool: &PyDataset,
    k: usize,
    strategy: &str,
    aggregation: &str,
) -> PyResult<Vec<(String, f64)>> {
    let batch = learnloop::select_batch_with(
        &model.inner,
        &pool.inner,
        k,
        self::strategy(strategy)?,
        self::aggregation(aggregation)?,
    )
    .map_err(err)?;
    Ok(batch.document_ids.into_iter().zip(batch.scores).collect())
}

/// Cohen's kappa between two label sequences (ints or strings).
#[pyfunction]
fn cohen_kappa(py: Python<'_>, a: Bound<'_, PyAny>, b: Bound<'_, PyAny>) -> PyResult<Py<PyDict>> {
    let report = match (a.extract::<Vec<i64>>(), b.extract::<Vec<i64>>()) {
        (Ok(a), Ok(b)) => evaluation::cohen_kappa(&a, &b),
        _ => evaluation::cohen_kappa(&a.extract::<Vec<String>>()?, &b.extract::<Vec<String>>()?),
    }
    .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("kappa", report.kappa)?;
    out.set_item("observed_agreement", report.observed_agreement)?;
    out.set_item("expected_agreement", report.expected_agreement)?;
    out.set_item("band", report.band.label())?;
    out.set_item("n", report.n)?;
    Ok(out.unbind())
}

#[pyfunction]
fn landis_koch(kappa: f64) -> PyResult<&'static str> {
    Ok(evaluation::landis_koch(kappa).map_err(err)?.label())
}

#[pyfunction]
fn accuracy_from_confusion(confusion: Vec<Vec<u64>>) -> PyResult<f64> {
    evaluation::accuracy_from_confusion(&confusion).map_err(err)
}

#[pymodule]
fn readlevel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ReadlevelError", m.py().get_type::<ReadlevelError>())?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(extract_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(rfe, m)?)?;
    m.add_function(wrap_pyfunction!(select_batch, m)?)?;
    m.add_function(wrap_pyfunction!(cohen_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(landis_koch, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy_from_confusion, m)?)?;
    Ok(())
}
