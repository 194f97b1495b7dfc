//! Recursive feature elimination, uncertainty-based batch selection, level
//! merging and the scripted active-learning loop.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Instance, Level};
pub use crate::dataset::LevelMapping;
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, EvalConfig};
use crate::svm::{train_multiclass, Aggregation, MulticlassModel, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    /// Eliminated features, first eliminated first; length is `n − target`.
    pub elimination_order: Vec<String>,
    /// Surviving features in their original column order.
    pub survivor_set: Vec<String>,
    /// Score of each survivor in the final model (sum of squared weights).
    pub survivor_scores: Vec<f64>,
}

impl FeatureRanking {
    /// Every input feature, weakest first: the elimination order followed by
    /// the survivors ranked by their final scores.
    pub fn ranking(&self) -> Vec<String> {
        let mut survivors: Vec<(usize, f64)> = self.survivor_scores.iter().copied().enumerate().collect();
        survivors.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        self.elimination_order
            .iter()
            .cloned()
            .chain(survivors.into_iter().map(|(i, _)| self.survivor_set[i].clone()))
            .collect()
    }
}

/// Per-feature sum over binary models of the squared standardized weight.
pub fn weight_scores(model: &MulticlassModel) -> Vec<f64> {
    let mut scores = vec![0.0; model.feature_names.len()];
    for b in &model.binaries {
        for (s, w) in scores.iter_mut().zip(&b.weights) {
            *s += w * w;
        }
    }
    scores
}

pub fn rfe(dataset: &Dataset, cfg: &TrainConfig, target_count: usize, step: usize) -> Result<FeatureRanking> {
    let n = dataset.feature_count();
    if target_count == 0 || target_count > n {
        return Err(Error::InvalidConfig(format!("target count {target_count} must lie in 1..={n}")));
    }
    if step == 0 {
        return Err(Error::InvalidConfig("step must be positive".into()));
    }
    let mut surviving: Vec<String> = dataset.feature_names.clone();
    let mut eliminated = Vec::new();
    loop {
        let model = train_multiclass(&dataset.select_features(&surviving)?, cfg)?;
        let scores = weight_scores(&model);
        if surviving.len() == target_count {
            return Ok(FeatureRanking {
                elimination_order: eliminated,
                survivor_set: surviving,
                survivor_scores: scores,
            });
        }
        let mut order: Vec<usize> = (0..surviving.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        let drop: HashSet<usize> = order
            .into_iter()
            .take(step.min(surviving.len() - target_count))
            .collect();
        let mut by_score: Vec<usize> = drop.iter().copied().collect();
        by_score.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        eliminated.extend(by_score.into_iter().map(|i| surviving[i].clone()));
        surviving = surviving
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, n)| n)
            .collect();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    #[default]
    MostUncertain,
    MostConfident,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionBatch {
    pub document_ids: Vec<String>,
    pub scores: Vec<f64>,
    pub strategy: SelectionStrategy,
    /// `k` exceeded the pool, so the whole pool was returned.
    pub truncated: bool,
}

/// Ranks scored ids and keeps the first `k`; ties break by id.
pub fn rank_scores(mut scored: Vec<(String, f64)>, k: usize, strategy: SelectionStrategy) -> Result<SelectionBatch> {
    if scored.is_empty() {
        return Err(Error::InvalidInput("empty pool".into()));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("batch size must be positive".into()));
    }
    scored.sort_by(|a, b| {
        let by_score = match strategy {
            SelectionStrategy::MostUncertain => a.1.total_cmp(&b.1),
            SelectionStrategy::MostConfident => b.1.total_cmp(&a.1),
        };
        by_score.then_with(|| a.0.cmp(&b.0))
    });
    let truncated = k > scored.len();
    scored.truncate(k);
    let (document_ids, scores) = scored.into_iter().unzip();
    Ok(SelectionBatch {
        document_ids,
        scores,
        strategy,
        truncated,
    })
}

pub fn select_batch(model: &MulticlassModel, pool: &Dataset, k: usize, strategy: SelectionStrategy) -> Result<SelectionBatch> {
    select_batch_with(model, pool, k, strategy, Aggregation::Min)
}

pub fn select_batch_with(
    model: &MulticlassModel,
    pool: &Dataset,
    k: usize,
    strategy: SelectionStrategy,
    how: Aggregation,
) -> Result<SelectionBatch> {
    let rows = model.align(pool)?;
    let scored = pool
        .instances
        .iter()
        .zip(&rows)
        .map(|(inst, row)| Ok((inst.id.clone(), model.uncertainty_with(row, how)?)))
        .collect::<Result<Vec<_>>>()?;
    rank_scores(scored, k, strategy)
}

/// Relabels every instance through `mapping`.
///
/// The applied mapping is recorded on the dataset, so applying the same
/// mapping again returns the dataset unchanged; a different mapping on an
/// already merged dataset is rejected.
pub fn merge_levels(dataset: &Dataset, mapping: &LevelMapping) -> Result<Dataset> {
    if mapping.is_identity() || dataset.level_mapping.as_ref() == Some(mapping) {
        return Ok(dataset.clone());
    }
    if let Some(existing) = &dataset.level_mapping {
        return Err(Error::InvalidInput(format!(
            "dataset already merged with {existing}; refusing to apply {mapping}"
        )));
    }
    let mut out = dataset.clone();
    for inst in &mut out.instances {
        if let Some(level) = inst.level {
            inst.level = Some(mapping.apply(level).ok_or_else(|| {
                Error::InvalidInput(format!("instance {}: level {level} outside mapping", inst.id))
            })?);
        }
    }
    out.level_mapping = Some(mapping.clone());
    Ok(out)
}

/// What an annotator said about one requested document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleAnswer {
    Labeled(Level),
    /// The text could not be processed and leaves the pool unlabeled.
    Unprocessable(String),
}

pub trait LabelOracle {
    /// Answers for (a subset of) `ids`; ids left unanswered stay in the pool.
    fn label(&mut self, ids: &[String]) -> Result<Vec<(String, OracleAnswer)>>;
}

impl<F> LabelOracle for F
where
    F: FnMut(&[String]) -> Result<Vec<(String, OracleAnswer)>>,
{
    fn label(&mut self, ids: &[String]) -> Result<Vec<(String, OracleAnswer)>> {
        self(ids)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlConfig {
    pub steps: usize,
    pub k: usize,
    pub strategy: SelectionStrategy,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 0 is the evaluation of the initial labeled set.
    pub step: usize,
    pub dataset_size: usize,
    pub mean_accuracy: f64,
    pub spread: f64,
    pub std: f64,
    pub pooled_accuracy: f64,
    pub selected_ids: Vec<String>,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlReport {
    pub records: Vec<StepRecord>,
    pub dropped_total: usize,
    pub pool_remaining: usize,
    /// Set when a step failed; earlier records are kept.
    pub aborted: Option<String>,
    pub config: AlConfig,
}

pub fn active_learning_run(
    labeled: Dataset,
    pool: Dataset,
    oracle: &mut dyn LabelOracle,
    cfg: &AlConfig,
) -> Result<AlReport> {
    if cfg.k == 0 {
        return Err(Error::InvalidConfig("batch size must be positive".into()));
    }
    if labeled.feature_names != pool.feature_names {
        return Err(Error::InvalidInput("labeled set and pool have different features".into()));
    }
    if let Some(inst) = pool.instances.iter().find(|i| labeled.index_of(&i.id).is_some()) {
        return Err(Error::InvalidInput(format!("{} is both labeled and in the pool", inst.id)));
    }
    let mut labeled = labeled;
    let mut pool = pool;
    let evaluate = |ds: &Dataset, step: usize, selected: Vec<String>, dropped: usize| -> Result<StepRecord> {
        let report = cross_validate(ds, &cfg.train, &cfg.eval)?;
        Ok(StepRecord {
            step,
            dataset_size: ds.len(),
            mean_accuracy: report.mean_accuracy,
            spread: report.spread,
            std: report.std,
            pooled_accuracy: report.pooled_accuracy,
            selected_ids: selected,
            dropped,
        })
    };
    let mut records = vec![evaluate(&labeled, 0, Vec::new(), 0)?];
    let mut dropped_total = 0;
    let mut aborted = None;

    for step in 1..=cfg.steps {
        if pool.is_empty() {
            aborted = Some(format!("step {step}: pool exhausted"));
            break;
        }
        let outcome = (|| -> Result<StepRecord> {
            let model = train_multiclass(&labeled, &cfg.train)?;
            let batch = select_batch(&model, &pool, cfg.k, cfg.strategy)?;
            let answers = oracle.label(&batch.document_ids)?;
            let mut dropped = 0;
            for (id, answer) in answers {
                if !batch.document_ids.contains(&id) {
                    return Err(Error::Oracle(format!("oracle answered for unrequested id {id:?}")));
                }
                let Some(inst) = pool.remove(&id) else { continue };
                match answer {
                    OracleAnswer::Labeled(level) => labeled.push(Instance {
                        level: Some(level),
                        ..inst
                    })?,
                    OracleAnswer::Unprocessable(_) => dropped += 1,
                }
            }
            dropped_total += dropped;
            evaluate(&labeled, step, batch.document_ids, dropped)
        })();
        match outcome {
            Ok(record) => records.push(record),
            Err(e) => {
                aborted = Some(format!("step {step}: {e}"));
                break;
            }
        }
    }
    Ok(AlReport {
        records,
        dropped_total,
        pool_remaining: pool.len(),
        aborted,
        config: cfg.clone(),
    })
}
