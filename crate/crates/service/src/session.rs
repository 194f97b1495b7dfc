//! One annotation session: labeled set, unlabeled pool, current model and
//! the append-only event history that reproduces it.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use readlevel::corpusio::{extract_corpus, CorpusRecord};
use readlevel::dataset::{Dataset, Instance, Level, MAX_LEVEL, MIN_LEVEL};
use readlevel::evaluation::{cohen_kappa, cross_validate, AgreementReport, EvalConfig};
use readlevel::features::FeatureConfig;
use readlevel::learnloop::{select_batch_with, SelectionStrategy};
use readlevel::lexicons::Resources;
use readlevel::svm::{train_multiclass, Aggregation, MulticlassModel, TrainConfig};
use readlevel::textmodel::TextConfig;

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub k: usize,
    pub strategy: SelectionStrategy,
    pub aggregation: Aggregation,
    pub seed: u64,
    #[serde(rename = "C")]
    pub c: f64,
    pub folds: usize,
    pub stratified: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            k: 10,
            strategy: SelectionStrategy::MostUncertain,
            aggregation: Aggregation::Min,
            seed: 0,
            c: 1.0,
            folds: 10,
            stratified: true,
        }
    }
}

impl SessionConfig {
    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            c: self.c,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    pub fn eval(&self) -> EvalConfig {
        EvalConfig {
            k: self.folds,
            seed: self.seed,
            stratified: self.stratified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub step: usize,
    pub dataset_size: usize,
    pub mean_accuracy: f64,
    pub spread: f64,
    pub std: f64,
    pub pooled_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub id: String,
    pub text: String,
    /// Distance-based uncertainty; absent for cold-start batches.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServedBatch {
    pub ids: Vec<String>,
    pub scores: Vec<Option<f64>>,
    pub cold_start: bool,
    pub strategy: SelectionStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSubmission {
    pub document_id: String,
    pub level: i64,
    pub annotator: String,
    /// Unix milliseconds; filled by the server when absent.
    #[serde(default)]
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub document_id: String,
    pub annotator: String,
    pub level: Level,
    pub previous: Option<Level>,
    pub timestamp: u64,
    /// True when stored in the agreement ledger rather than the training set.
    pub second_annotator: bool,
}

/// Everything that changes a session, in the order it happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Created {
        session_id: String,
        records: Vec<CorpusRecord>,
        config: SessionConfig,
    },
    BatchServed {
        batch: ServedBatch,
    },
    Labels {
        submissions: Vec<LabelSubmission>,
    },
    Retrained {
        row: HistoryRow,
    },
}

/// Shared, read-only inputs needed to build and replay sessions.
#[derive(Debug, Clone, Default)]
pub struct Environment {
    pub resources: Resources,
    pub features: FeatureConfig,
    pub text: TextConfig,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub config: SessionConfig,
    pub labeled: Dataset,
    pub pool: Dataset,
    pub texts: HashMap<String, String>,
    pub model: Option<MulticlassModel>,
    pub history: Vec<HistoryRow>,
    pub batch_in_flight: Option<ServedBatch>,
    /// First annotator of each document labeled through the service.
    pub labeled_by: HashMap<String, String>,
    /// `(document, annotator) → level` for second annotators.
    pub second_labels: BTreeMap<(String, String), Level>,
    pub audit: Vec<AuditEntry>,
    pub dropped: Vec<(String, String)>,
    pub batches_served: u64,
    total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub session_id: String,
    pub history: Vec<HistoryRow>,
    pub label_counts: BTreeMap<Level, usize>,
    pub labeled_size: usize,
    pub pool_size: usize,
    pub dropped: usize,
    pub strategy: SelectionStrategy,
    pub k: usize,
    pub seed: u64,
    pub has_model: bool,
    pub batch_in_flight: Vec<String>,
    pub second_labels: usize,
    pub audit_entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitAck {
    pub accepted: usize,
    pub labeled_size: usize,
    pub pool_size: usize,
    pub batch_remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementResponse {
    pub pairs: usize,
    #[serde(flatten)]
    pub report: AgreementReport,
    pub band_label: String,
}

impl Session {
    pub fn create(
        session_id: String,
        records: &[CorpusRecord],
        config: SessionConfig,
        env: &Environment,
    ) -> Result<Session, ApiError> {
        if config.k == 0 {
            return Err(ApiError::unprocessable("invalid_config", "k must be positive"));
        }
        config.train().validate().map_err(ApiError::from_core_unprocessable)?;
        let (all, failures) =
            extract_corpus(records, &env.resources, &env.features, &env.text).map_err(ApiError::from_core_unprocessable)?;
        let labeled_idx: Vec<usize> = (0..all.len()).filter(|&i| all.instances[i].level.is_some()).collect();
        let pool_idx: Vec<usize> = (0..all.len()).filter(|&i| all.instances[i].level.is_none()).collect();
        let texts = records
            .iter()
            .map(|r| (r.id.clone(), r.display_text(&env.text)))
            .collect();
        let session = Session {
            id: session_id,
            config,
            labeled: all.subset(&labeled_idx),
            pool: all.subset(&pool_idx),
            texts,
            model: None,
            history: Vec::new(),
            batch_in_flight: None,
            labeled_by: HashMap::new(),
            second_labels: BTreeMap::new(),
            audit: Vec::new(),
            dropped: failures.into_iter().map(|(id, e)| (id, e.to_string())).collect(),
            batches_served: 0,
            total: records.len(),
        };
        session.check_invariants()?;
        Ok(session)
    }

    /// Rebuilds a session by re-applying its events.
    pub fn replay(events: &[Event], env: &Environment) -> Result<Session, ApiError> {
        let mut iter = events.iter();
        let mut session = match iter.next() {
            Some(Event::Created {
                session_id,
                records,
                config,
            }) => Session::create(session_id.clone(), records, config.clone(), env)?,
            _ => return Err(ApiError::internal("event log does not start with a creation event")),
        };
        for event in iter {
            match event {
                Event::Created { .. } => return Err(ApiError::internal("duplicate creation event")),
                Event::BatchServed { batch } => session.install_batch(batch.clone()),
                Event::Labels { submissions } => {
                    session.submit(submissions)?;
                }
                Event::Retrained { row } => {
                    let replayed = session.retrain()?;
                    if &replayed != row {
                        return Err(ApiError::internal(format!(
                            "replayed retrain diverged at step {}",
                            row.step
                        )));
                    }
                }
            }
        }
        Ok(session)
    }

    pub fn check_invariants(&self) -> Result<(), ApiError> {
        if self.labeled.len() + self.pool.len() + self.dropped.len() != self.total {
            return Err(ApiError::internal("conservation violated"));
        }
        if let Some(inst) = self.pool.instances.iter().find(|i| self.labeled.index_of(&i.id).is_some()) {
            return Err(ApiError::internal(format!("{} is both labeled and pooled", inst.id)));
        }
        if let Some(batch) = &self.batch_in_flight {
            if let Some(id) = batch.ids.iter().find(|id| self.pool.index_of(id).is_none()) {
                return Err(ApiError::internal(format!("in-flight {id} is not in the pool")));
            }
        }
        Ok(())
    }

    /// Returns the in-flight batch, or selects a new one.
    ///
    /// The second value is true when a new batch was selected (and must be logged).
    pub fn next_batch(&mut self, k: Option<usize>) -> Result<(ServedBatch, bool), ApiError> {
        if let Some(batch) = &self.batch_in_flight {
            return Ok((batch.clone(), false));
        }
        if self.pool.is_empty() {
            return Err(ApiError::conflict("pool_exhausted", "pool exhausted"));
        }
        let k = k.unwrap_or(self.config.k);
        if k == 0 {
            return Err(ApiError::unprocessable("invalid_k", "k must be positive"));
        }
        let batch = match &self.model {
            Some(model) => {
                let b = select_batch_with(model, &self.pool, k, self.config.strategy, self.config.aggregation)
                    .map_err(ApiError::from_core_internal)?;
                ServedBatch {
                    ids: b.document_ids,
                    scores: b.scores.into_iter().map(Some).collect(),
                    cold_start: false,
                    strategy: b.strategy,
                }
            }
            None => {
                let mut ids: Vec<String> = self.pool.instances.iter().map(|i| i.id.clone()).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_add(self.batches_served));
                ids.shuffle(&mut rng);
                ids.truncate(k);
                ServedBatch {
                    scores: vec![None; ids.len()],
                    ids,
                    cold_start: true,
                    strategy: self.config.strategy,
                }
            }
        };
        self.install_batch(batch.clone());
        Ok((batch, true))
    }

    fn install_batch(&mut self, batch: ServedBatch) {
        self.batches_served += 1;
        self.batch_in_flight = Some(batch);
    }

    pub fn batch_items(&self, batch: &ServedBatch) -> Vec<BatchItem> {
        batch
            .ids
            .iter()
            .zip(&batch.scores)
            .map(|(id, score)| BatchItem {
                id: id.clone(),
                text: self.texts.get(id).cloned().unwrap_or_default(),
                score: *score,
            })
            .collect()
    }

    /// Validates every submission first, then applies them in order.
    pub fn submit(&mut self, submissions: &[LabelSubmission]) -> Result<SubmitAck, ApiError> {
        if submissions.is_empty() {
            return Err(ApiError::unprocessable("empty_submission", "no labels submitted"));
        }
        let in_flight = |id: &str| {
            self.batch_in_flight
                .as_ref()
                .is_some_and(|b| b.ids.iter().any(|x| x == id))
        };
        for s in submissions {
            if !(i64::from(MIN_LEVEL)..=i64::from(MAX_LEVEL)).contains(&s.level) {
                return Err(ApiError::unprocessable(
                    "invalid_level",
                    format!("level {} for {} outside {MIN_LEVEL}..={MAX_LEVEL}", s.level, s.document_id),
                ));
            }
            if s.annotator.trim().is_empty() {
                return Err(ApiError::unprocessable("invalid_annotator", "annotator name required"));
            }
            let known = in_flight(&s.document_id)
                || self.labeled_by.contains_key(&s.document_id)
                || submissions
                    .iter()
                    .take_while(|p| !std::ptr::eq(*p, s))
                    .any(|p| p.document_id == s.document_id && in_flight(&p.document_id));
            if !known {
                return Err(ApiError::unprocessable(
                    "not_in_flight",
                    format!("document {} is not in the current batch", s.document_id),
                ));
            }
        }
        for s in submissions {
            self.apply_label(s);
        }
        self.check_invariants()?;
        Ok(SubmitAck {
            accepted: submissions.len(),
            labeled_size: self.labeled.len(),
            pool_size: self.pool.len(),
            batch_remaining: self.batch_in_flight.as_ref().map_or(0, |b| b.ids.len()),
        })
    }

    fn apply_label(&mut self, s: &LabelSubmission) {
        let level = s.level as Level;
        let timestamp = s.timestamp.unwrap_or(0);
        let mut entry = AuditEntry {
            document_id: s.document_id.clone(),
            annotator: s.annotator.clone(),
            level,
            previous: None,
            timestamp,
            second_annotator: false,
        };
        match self.labeled_by.get(&s.document_id) {
            None => {
                let inst = self
                    .pool
                    .remove(&s.document_id)
                    .expect("validated: in-flight documents are pooled");
                self.labeled
                    .push(Instance {
                        level: Some(level),
                        ..inst
                    })
                    .expect("pool and labeled set share features and are disjoint");
                self.labeled_by.insert(s.document_id.clone(), s.annotator.clone());
                if let Some(batch) = &mut self.batch_in_flight {
                    if let Some(pos) = batch.ids.iter().position(|x| x == &s.document_id) {
                        batch.ids.remove(pos);
                        batch.scores.remove(pos);
                    }
                    if batch.ids.is_empty() {
                        self.batch_in_flight = None;
                    }
                }
            }
            Some(first) if first == &s.annotator => {
                let idx = self.labeled.index_of(&s.document_id).expect("labeled document present");
                entry.previous = self.labeled.instances[idx].level.replace(level);
            }
            Some(_) => {
                entry.second_annotator = true;
                entry.previous = self
                    .second_labels
                    .insert((s.document_id.clone(), s.annotator.clone()), level);
            }
        }
        self.audit.push(entry);
    }

    /// Checks trainability, then cross-validates and trains on the labeled set.
    pub fn retrain(&mut self) -> Result<HistoryRow, ApiError> {
        let (model, row) = Self::fit(&self.labeled, &self.config, self.history.len() + 1)?;
        self.model = Some(model);
        self.history.push(row.clone());
        Ok(row)
    }

    /// The pure part of retraining, usable without holding the session.
    pub fn fit(labeled: &Dataset, config: &SessionConfig, step: usize) -> Result<(MulticlassModel, HistoryRow), ApiError> {
        let counts = labeled.class_counts();
        if counts.len() < 2 {
            return Err(ApiError::conflict(
                "untrainable",
                format!("need at least 2 labeled levels, have {}", counts.len()),
            ));
        }
        let min_needed = if config.stratified { config.folds } else { 1 };
        if let Some((level, n)) = counts.iter().find(|(_, n)| **n < min_needed) {
            return Err(ApiError::conflict(
                "untrainable",
                format!("level {level} has {n} labeled texts, fewer than {min_needed} folds"),
            ));
        }
        if labeled.len() < config.folds {
            return Err(ApiError::conflict(
                "untrainable",
                format!("{} labeled texts, fewer than {} folds", labeled.len(), config.folds),
            ));
        }
        let report = cross_validate(labeled, &config.train(), &config.eval()).map_err(ApiError::from_core_conflict)?;
        let model = train_multiclass(labeled, &config.train()).map_err(ApiError::from_core_conflict)?;
        Ok((
            model,
            HistoryRow {
                step,
                dataset_size: labeled.len(),
                mean_accuracy: report.mean_accuracy,
                spread: report.spread,
                std: report.std,
                pooled_accuracy: report.pooled_accuracy,
            },
        ))
    }

    pub fn install_model(&mut self, model: MulticlassModel, row: HistoryRow) {
        self.model = Some(model);
        self.history.push(row);
    }

    pub fn status(&self) -> Status {
        Status {
            session_id: self.id.clone(),
            history: self.history.clone(),
            label_counts: self.labeled.class_counts(),
            labeled_size: self.labeled.len(),
            pool_size: self.pool.len(),
            dropped: self.dropped.len(),
            strategy: self.config.strategy,
            k: self.config.k,
            seed: self.config.seed,
            has_model: self.model.is_some(),
            batch_in_flight: self.batch_in_flight.as_ref().map(|b| b.ids.clone()).unwrap_or_default(),
            second_labels: self.second_labels.len(),
            audit_entries: self.audit.len(),
        }
    }

    pub fn agreement(&self) -> Result<AgreementResponse, ApiError> {
        let (a, b): (Vec<Level>, Vec<Level>) = self
            .second_labels
            .iter()
            .filter_map(|((doc, _), &second)| {
                let idx = self.labeled.index_of(doc)?;
                Some((self.labeled.instances[idx].level?, second))
            })
            .unzip();
        if a.is_empty() {
            return Err(ApiError::conflict("no_pairs", "no doubly-labeled documents yet"));
        }
        let report = cohen_kappa(&a, &b).map_err(ApiError::from_core_internal)?;
        Ok(AgreementResponse {
            pairs: a.len(),
            band_label: report.band.label().to_string(),
            report,
        })
    }
}
