//! Linear support vector machines: standardization, a two-coordinate dual
//! solver for the binary soft-margin problem, and one-vs-one multiclass voting.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Level};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FillPolicy};

/// Per-feature standardization statistics (population mean and std).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub constant_mask: Vec<bool>,
}

impl ScalingParams {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, x)| {
                if self.constant_mask[j] {
                    0.0
                } else {
                    (x - self.means[j]) / self.stds[j]
                }
            })
            .collect())
    }
}

pub fn standardize_fit(matrix: &[Vec<f64>]) -> Result<ScalingParams> {
    if matrix.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "standardization needs at least 2 instances, got {}",
            matrix.len()
        )));
    }
    let d = matrix[0].len();
    if let Some(row) = matrix.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: row.len(),
        });
    }
    let n = matrix.len() as f64;
    let mut means = vec![0.0; d];
    let mut stds = vec![0.0; d];
    let mut constant_mask = vec![false; d];
    for j in 0..d {
        let mean = matrix.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = matrix.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        if !(mean.is_finite() && var.is_finite()) {
            return Err(Error::InvalidInput(format!("feature column {j} overflows during standardization")));
        }
        means[j] = mean;
        // relative threshold: guards against round-off "variance" on constant columns
        if var.sqrt() <= 1e-12 * mean.abs().max(1.0) {
            constant_mask[j] = true;
            stds[j] = 1.0;
        } else {
            stds[j] = var.sqrt();
        }
    }
    Ok(ScalingParams {
        means,
        stds,
        constant_mask,
    })
}

pub fn standardize_apply(matrix: &[Vec<f64>], params: &ScalingParams) -> Result<Vec<Vec<f64>>> {
    matrix.iter().map(|r| params.apply_row(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(rename = "C")]
    pub c: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    #[serde(default)]
    pub fill_policy: FillPolicy,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            tolerance: 1e-4,
            max_iterations: 10_000,
            seed: 0,
            fill_policy: FillPolicy::Zero,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// One separating hyperplane `w·x + b`; positive values favor `label_pair.1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub label_pair: (Level, Level),
}

impl BinaryModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn norm(&self) -> f64 {
        dot(&self.weights, &self.weights).sqrt()
    }

    /// Geometric distance `|w·x+b| / ‖w‖`; zero for a degenerate (w = 0) model.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let norm = self.norm();
        if norm == 0.0 {
            0.0
        } else {
            self.decision(x).abs() / norm
        }
    }

    fn vote(&self, f: f64) -> Level {
        if f > 0.0 {
            self.label_pair.1
        } else {
            self.label_pair.0
        }
    }
}

/// Solver diagnostics for one binary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// Dual objective after every update (non-increasing).
    pub objective: Vec<f64>,
    pub alphas: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Primal soft-margin objective ½‖w‖² + C·Σ max(0, 1 − yᵢ(w·xᵢ + b)).
pub fn primal_objective(weights: &[f64], bias: f64, x: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (1.0 - yi * (dot(weights, xi) + bias)).max(0.0))
        .sum();
    0.5 * dot(weights, weights) + c * hinge
}

pub fn train_binary(x: &[Vec<f64>], y: &[f64], cfg: &TrainConfig) -> Result<BinaryModel> {
    train_binary_traced(x, y, cfg).map(|(m, _)| m)
}

/// Solves the soft-margin dual
/// `min ½αᵀQα − Σα  s.t. 0 ≤ α ≤ C, yᵀα = 0`, `Qᵢⱼ = yᵢyⱼ xᵢ·xⱼ`,
/// by repeatedly optimizing the maximal-violating pair in closed form.
pub fn train_binary_traced(x: &[Vec<f64>], y: &[f64], cfg: &TrainConfig) -> Result<(BinaryModel, TrainTrace)> {
    cfg.validate()?;
    let n = x.len();
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let d = x[0].len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                instance: i.to_string(),
                feature: j.to_string(),
            });
        }
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidInput("binary labels must be ±1".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }

    const TAU: f64 = 1e-12;
    let c = cfg.c;
    let gram: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| dot(&x[i], &x[j])).collect())
        .collect();
    let q = |i: usize, j: usize| y[i] * y[j] * gram[i][j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut objective = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    while iterations < cfg.max_iterations {
        // first index: maximal −y∇ over the "up" set
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        // second index: second-order gain over the "low" set
        let mut gmin = f64::INFINITY;
        let mut best_gain = f64::INFINITY;
        let mut j_sel = None;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let a = (gram[i][i] + gram[t][t] - 2.0 * gram[i][t]).max(TAU);
                    let gain = -(b * b) / a;
                    if gain < best_gain {
                        best_gain = gain;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if gmax - gmin < cfg.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = (gram[i][i] + gram[j][j] - 2.0 * gram[i][j]).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
        objective.push(0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>());
    }

    let mut weights = vec![0.0; d];
    for (t, row) in x.iter().enumerate() {
        if alpha[t] != 0.0 {
            for (w, v) in weights.iter_mut().zip(row) {
                *w += alpha[t] * y[t] * v;
            }
        }
    }

    // offset: average over free vectors, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };

    Ok((
        BinaryModel {
            weights,
            bias: -rho,
            label_pair: (0, 0),
        },
        TrainTrace {
            objective,
            alphas: alpha,
            iterations,
            converged,
        },
    ))
}

/// How per-pair distances aggregate into a single uncertainty score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Distance to the nearest hyperplane.
    #[default]
    Min,
    /// Mean distance over all hyperplanes.
    Mean,
    /// Vote lead of the winning label over the runner-up.
    VoteMargin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassModel {
    pub binaries: Vec<BinaryModel>,
    pub labels: Vec<Level>,
    pub scaling: ScalingParams,
    pub feature_names: Vec<String>,
    pub config: TrainConfig,
}

pub fn train_multiclass(dataset: &Dataset, cfg: &TrainConfig) -> Result<MulticlassModel> {
    cfg.validate()?;
    let levels = dataset.levels()?;
    let labels: Vec<Level> = dataset.labels().into_iter().collect();
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }
    if cfg.fill_policy == FillPolicy::Error && dataset.has_mixed_availability() {
        return Err(Error::InvalidInput(
            "instances differ in feature availability; use zero fill to train".into(),
        ));
    }
    dataset.check_finite()?;
    let raw = dataset.matrix();
    let scaling = standardize_fit(&raw)?;
    let x = standardize_apply(&raw, &scaling)?;

    let pairs: Vec<(Level, Level)> = labels
        .iter()
        .enumerate()
        .flat_map(|(a, &la)| labels[a + 1..].iter().map(move |&lb| (la, lb)))
        .collect();
    let binaries = pairs
        .par_iter()
        .map(|&(neg, pos)| {
            let (xs, ys): (Vec<Vec<f64>>, Vec<f64>) = x
                .iter()
                .zip(&levels)
                .filter(|(_, l)| **l == neg || **l == pos)
                .map(|(row, l)| (row.clone(), if *l == pos { 1.0 } else { -1.0 }))
                .unzip();
            let mut model = train_binary(&xs, &ys, cfg)?;
            model.label_pair = (neg, pos);
            Ok(model)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MulticlassModel {
        binaries,
        labels,
        scaling,
        feature_names: dataset.feature_names.clone(),
        config: cfg.clone(),
    })
}

impl MulticlassModel {
    /// Raw (unscaled) row in model feature order from a named vector.
    pub fn row_from_vector(&self, fv: &FeatureVector) -> Result<Vec<f64>> {
        self.feature_names
            .iter()
            .map(|name| match (fv.get(name), fv.is_available(name)) {
                (Some(v), true) => Ok(v),
                _ if self.config.fill_policy == FillPolicy::Zero => Ok(0.0),
                _ => Err(Error::FeatureUnavailable {
                    feature: name.clone(),
                    reason: "missing at prediction time".into(),
                }),
            })
            .collect()
    }

    /// Rows of `dataset` rearranged into model feature order.
    pub fn align(&self, dataset: &Dataset) -> Result<Vec<Vec<f64>>> {
        let cols = dataset.column_indices(&self.feature_names)?;
        Ok(dataset
            .instances
            .iter()
            .map(|inst| cols.iter().map(|&c| inst.values[c]).collect())
            .collect())
    }

    fn scaled(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.scaling.apply_row(x)
    }

    /// `w·x + b` for every label pair, on the standardized input.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.scaled(x)?;
        Ok(self.binaries.iter().map(|b| b.decision(&z)).collect())
    }

    pub fn distances(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.scaled(x)?;
        Ok(self.binaries.iter().map(|b| b.distance(&z)).collect())
    }

    fn votes(&self, decisions: &[f64]) -> BTreeMap<Level, usize> {
        let mut votes: BTreeMap<Level, usize> = self.labels.iter().map(|&l| (l, 0)).collect();
        for (b, &f) in self.binaries.iter().zip(decisions) {
            *votes.entry(b.vote(f)).or_default() += 1;
        }
        votes
    }

    /// Majority vote over pairs; ties go to the smallest label.
    pub fn predict(&self, x: &[f64]) -> Result<Level> {
        let votes = self.votes(&self.decision_values(x)?);
        let best = votes.values().copied().max().unwrap_or(0);
        Ok(*votes
            .iter()
            .find(|(_, &v)| v == best)
            .map(|(l, _)| l)
            .expect("at least two labels"))
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<Level>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    /// Minimum distance to any hyperplane; smaller means less certain.
    pub fn uncertainty(&self, x: &[f64]) -> Result<f64> {
        self.uncertainty_with(x, Aggregation::Min)
    }

    pub fn uncertainty_with(&self, x: &[f64], how: Aggregation) -> Result<f64> {
        Ok(match how {
            Aggregation::Min => self.distances(x)?.into_iter().fold(f64::INFINITY, f64::min),
            Aggregation::Mean => {
                let d = self.distances(x)?;
                d.iter().sum::<f64>() / d.len() as f64
            }
            Aggregation::VoteMargin => {
                let mut counts: Vec<usize> = self.votes(&self.decision_values(x)?).into_values().collect();
                counts.sort_unstable_by(|a, b| b.cmp(a));
                (counts[0] - counts.get(1).copied().unwrap_or(0)) as f64
            }
        })
    }

    pub fn pair_count(&self) -> usize {
        self.binaries.len()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
