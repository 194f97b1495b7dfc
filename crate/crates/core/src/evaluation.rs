//! Cross-validation, confusion matrices and inter-annotator agreement.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Level};
use crate::error::{Error, Result};
use crate::svm::{train_multiclass, TrainConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: 10,
            seed: 0,
            stratified: true,
        }
    }
}

/// Splits `0..levels.len()` into `cfg.k` disjoint folds.
///
/// Stratified folds shuffle each class separately and deal its members
/// round-robin, continuing the deal across classes so fold sizes differ by at
/// most one.
pub fn make_folds(levels: &[Level], cfg: &EvalConfig) -> Result<Vec<Vec<usize>>> {
    let n = levels.len();
    if cfg.k < 2 || cfg.k > n {
        return Err(Error::InvalidConfig(format!("k={} must lie in 2..={n}", cfg.k)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let groups: Vec<Vec<usize>> = if cfg.stratified {
        let mut by_class: BTreeMap<Level, Vec<usize>> = BTreeMap::new();
        for (i, &l) in levels.iter().enumerate() {
            by_class.entry(l).or_default().push(i);
        }
        if let Some((l, members)) = by_class.iter().find(|(_, m)| m.len() < cfg.k) {
            return Err(Error::InvalidConfig(format!(
                "level {l} has {} instances, fewer than k={}",
                members.len(),
                cfg.k
            )));
        }
        by_class.into_values().collect()
    } else {
        vec![(0..n).collect()]
    };
    let mut folds = vec![Vec::new(); cfg.k];
    let mut next = 0;
    for mut group in groups {
        group.shuffle(&mut rng);
        for idx in group {
            folds[next % cfg.k].push(idx);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub gold: Level,
    pub predicted: Level,
    pub fold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    /// Twice the population standard deviation of the fold accuracies.
    pub spread: f64,
    pub std: f64,
    /// Trace of the aggregated confusion matrix over its total.
    pub pooled_accuracy: f64,
    /// Rows are gold labels, columns predictions, both in `label_set` order.
    pub confusion: Vec<Vec<u64>>,
    pub label_set: Vec<Level>,
    pub predictions: Vec<Prediction>,
    pub eval_config: EvalConfig,
    pub train_config: TrainConfig,
}

impl EvaluationReport {
    /// Aligned text rendering of the confusion matrix and summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self
            .confusion
            .iter()
            .flatten()
            .map(|c| c.to_string().len())
            .max()
            .unwrap_or(1)
            .max(4);
        out.push_str(&format!("{:>6}", "gold"));
        for l in &self.label_set {
            out.push_str(&format!(" {:>width$}", l));
        }
        out.push('\n');
        for (l, row) in self.label_set.iter().zip(&self.confusion) {
            out.push_str(&format!("{:>6}", l));
            for c in row {
                out.push_str(&format!(" {:>width$}", c));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "mean accuracy {:.4} (± {:.4}, std {:.4}); pooled {:.4}; k={} seed={}\n",
            self.mean_accuracy, self.spread, self.std, self.pooled_accuracy, self.eval_config.k, self.eval_config.seed
        ));
        out
    }
}

pub fn cross_validate(dataset: &Dataset, train_cfg: &TrainConfig, eval_cfg: &EvalConfig) -> Result<EvaluationReport> {
    let levels = dataset.levels()?;
    let folds = make_folds(&levels, eval_cfg)?;
    let label_set: Vec<Level> = dataset.labels().into_iter().collect();

    let fold_results = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train: Vec<usize> = (0..dataset.len()).filter(|i| test.binary_search(i).is_err()).collect();
            let model = train_multiclass(&dataset.subset(&train), train_cfg).map_err(|e| Error::Fold {
                fold: f,
                source: Box::new(e),
            })?;
            test.iter()
                .map(|&i| {
                    let inst = &dataset.instances[i];
                    Ok(Prediction {
                        id: inst.id.clone(),
                        gold: levels[i],
                        predicted: model.predict(&inst.values)?,
                        fold: f,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let index = |l: Level| label_set.binary_search(&l).expect("label in set");
    let mut confusion = vec![vec![0u64; label_set.len()]; label_set.len()];
    let mut per_fold_accuracy = Vec::with_capacity(folds.len());
    for preds in &fold_results {
        let correct = preds.iter().filter(|p| p.gold == p.predicted).count();
        per_fold_accuracy.push(correct as f64 / preds.len() as f64);
        for p in preds {
            confusion[index(p.gold)][index(p.predicted)] += 1;
        }
    }
    let k = per_fold_accuracy.len() as f64;
    let mean_accuracy = per_fold_accuracy.iter().sum::<f64>() / k;
    let std = (per_fold_accuracy.iter().map(|a| (a - mean_accuracy).powi(2)).sum::<f64>() / k).sqrt();
    let pooled_accuracy = accuracy_from_confusion(&confusion)?;

    Ok(EvaluationReport {
        per_fold_accuracy,
        mean_accuracy,
        spread: 2.0 * std,
        std,
        pooled_accuracy,
        confusion,
        label_set,
        predictions: fold_results.into_iter().flatten().collect(),
        eval_config: eval_cfg.clone(),
        train_config: train_cfg.clone(),
    })
}

pub fn accuracy_from_confusion(confusion: &[Vec<u64>]) -> Result<f64> {
    if confusion.is_empty() || confusion.iter().any(|r| r.len() != confusion.len()) {
        return Err(Error::InvalidInput("confusion matrix must be square and non-empty".into()));
    }
    let total: u64 = confusion.iter().flatten().sum();
    if total == 0 {
        return Err(Error::InvalidInput("confusion matrix is all zeros".into()));
    }
    let trace: u64 = (0..confusion.len()).map(|i| confusion[i][i]).sum();
    Ok(trace as f64 / total as f64)
}

/// Landis–Koch agreement bands (upper bounds inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementBand {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl AgreementBand {
    pub fn label(self) -> &'static str {
        match self {
            AgreementBand::Poor => "poor",
            AgreementBand::Slight => "slight",
            AgreementBand::Fair => "fair",
            AgreementBand::Moderate => "moderate",
            AgreementBand::Substantial => "substantial",
            AgreementBand::AlmostPerfect => "almost perfect",
        }
    }
}

impl fmt::Display for AgreementBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn landis_koch(kappa: f64) -> Result<AgreementBand> {
    const EPS: f64 = 1e-12;
    if !(-1.0 - EPS..=1.0 + EPS).contains(&kappa) {
        return Err(Error::InvalidInput(format!("kappa {kappa} outside [-1, 1]")));
    }
    Ok(match kappa {
        k if k < 0.0 => AgreementBand::Poor,
        k if k <= 0.20 => AgreementBand::Slight,
        k if k <= 0.40 => AgreementBand::Fair,
        k if k <= 0.60 => AgreementBand::Moderate,
        k if k <= 0.80 => AgreementBand::Substantial,
        _ => AgreementBand::AlmostPerfect,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub kappa: f64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    pub band: AgreementBand,
    pub n: usize,
    /// Chance agreement was 1, so kappa was defined by convention.
    pub degenerate: bool,
}

pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<AgreementReport> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("no label pairs".into()));
    }
    let n = a.len() as f64;
    let po = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut marginals: BTreeMap<&T, (f64, f64)> = BTreeMap::new();
    for x in a {
        marginals.entry(x).or_default().0 += 1.0;
    }
    for y in b {
        marginals.entry(y).or_default().1 += 1.0;
    }
    let pe: f64 = marginals.values().map(|(ca, cb)| (ca / n) * (cb / n)).sum();
    let degenerate = (1.0 - pe).abs() < 1e-12;
    let kappa = if degenerate {
        if po == 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (po - pe) / (1.0 - pe)
    };
    Ok(AgreementReport {
        kappa,
        observed_agreement: po,
        expected_agreement: pe,
        band: landis_koch(kappa)?,
        n: a.len(),
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn folds_partition() {
        let levels = vec![1; 10];
        let cfg = EvalConfig {
            k: 5,
            seed: 1,
            stratified: false,
        };
        let folds = make_folds(&levels, &cfg).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(folds, make_folds(&levels, &cfg).unwrap());
    }

    #[test]
    fn stratified_folds_balance() {
        let levels: Vec<Level> = (0..20).map(|i| if i < 10 { 1 } else { 2 }).collect();
        let cfg = EvalConfig { k: 5, seed: 9, stratified: true };
        for fold in make_folds(&levels, &cfg).unwrap() {
            assert_eq!(fold.iter().filter(|&&i| levels[i] == 1).count(), 2);
            assert_eq!(fold.iter().filter(|&&i| levels[i] == 2).count(), 2);
        }
        assert!(make_folds(&levels[..14], &EvalConfig { k: 5, ..cfg.clone() }).is_err());
        assert!(make_folds(&levels, &EvalConfig { k: 1, ..cfg }).is_err());
    }

    #[test]
    fn kappa_references() {
        let r = cohen_kappa(&[1, 2, 3, 1], &[1, 2, 3, 1]).unwrap();
        assert_eq!(r.kappa, 1.0);
        // [[20,5],[10,15]]
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (x, y, c) in [(1, 1, 20), (1, 2, 5), (2, 1, 10), (2, 2, 15)] {
            for _ in 0..c {
                a.push(x);
                b.push(y);
            }
        }
        let r = cohen_kappa(&a, &b).unwrap();
        assert_abs_diff_eq!(r.observed_agreement, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(r.expected_agreement, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.kappa, 0.4, epsilon = 1e-12);
        assert_eq!(r.kappa, cohen_kappa(&b, &a).unwrap().kappa);
        let r = cohen_kappa(&[1, 2], &[2, 1]).unwrap();
        assert_abs_diff_eq!(r.kappa, -1.0, epsilon = 1e-12);
        let r = cohen_kappa(&[1, 1], &[1, 1]).unwrap();
        assert!(r.degenerate && r.kappa == 1.0);
        assert!(cohen_kappa::<u8>(&[], &[]).is_err());
        assert!(cohen_kappa(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn bands() {
        assert_eq!(landis_koch(0.528).unwrap().label(), "moderate");
        assert_eq!(landis_koch(1.0).unwrap().label(), "almost perfect");
        assert_eq!(landis_koch(-0.3).unwrap().label(), "poor");
        assert_eq!(landis_koch(0.2).unwrap(), AgreementBand::Slight);
        assert_eq!(landis_koch(0.4).unwrap(), AgreementBand::Fair);
        assert!(landis_koch(1.5).is_err());
    }

    #[test]
    fn confusion_accuracy() {
        assert_eq!(accuracy_from_confusion(&[vec![3, 0], vec![0, 4]]).unwrap(), 1.0);
        assert_eq!(accuracy_from_confusion(&[vec![0, 3], vec![4, 0]]).unwrap(), 0.0);
        assert!(accuracy_from_confusion(&[vec![0, 0], vec![0, 0]]).is_err());
    }
}
