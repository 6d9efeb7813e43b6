//! Multilabel metrics, k-fold cross-validation with paired t-tests and the
//! replace-one stability experiment.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::data::{Normalization, Preprocessor};
use crate::error::{CorrLogError, Result};
use crate::inference::{predict_map_bp, BpConfig};
use crate::model::{Instance, Label, ModelParams, MultilabelDataset};
use crate::optimizer::{train_corrlog, train_ilrs_with_trace, TrainConfig};
use crate::stats::student_t_two_sided;

/// Metric names in report order.
pub const METRIC_NAMES: [&str; 6] = [
    "hamming_loss",
    "zero_one_loss",
    "accuracy",
    "f1_example",
    "macro_f1",
    "micro_f1",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub hamming_loss: f64,
    pub zero_one_loss: f64,
    /// Mean Jaccard index of the positive label sets.
    pub accuracy: f64,
    pub f1_example: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub n_eval: usize,
    /// Labels with no true and no predicted positives; their F1 counts as 1.
    pub degenerate_labels: Vec<usize>,
}

impl MetricsReport {
    pub fn values(&self) -> [f64; 6] {
        [
            self.hamming_loss,
            self.zero_one_loss,
            self.accuracy,
            self.f1_example,
            self.macro_f1,
            self.micro_f1,
        ]
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (name, v) in METRIC_NAMES.iter().zip(self.values()) {
            let _ = writeln!(out, "{name:<14} {v:.6}");
        }
        let _ = writeln!(out, "{:<14} {}", "n_eval", self.n_eval);
        out
    }
}

fn f1(tp: usize, fp: usize, fn_: usize) -> Option<f64> {
    let denom = 2 * tp + fp + fn_;
    (denom > 0).then(|| 2.0 * tp as f64 / denom as f64)
}

/// Computes the six evaluation measures.
///
/// Positive-set conventions: an example whose true and predicted positive
/// sets are both empty scores Jaccard and F1 of 1; exactly one empty scores 0.
pub fn compute_metrics(y_true: &[Vec<Label>], y_pred: &[Vec<Label>]) -> Result<MetricsReport> {
    if y_true.len() != y_pred.len() {
        return Err(CorrLogError::DimensionMismatch {
            what: "prediction count",
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(CorrLogError::EmptyDataset);
    }
    let m = y_true[0].len();
    let mut tp = vec![0usize; m];
    let mut fp = vec![0usize; m];
    let mut fn_ = vec![0usize; m];
    let (mut hamming, mut zero_one, mut jaccard, mut ex_f1) = (0.0, 0.0, 0.0, 0.0);
    for (t, p) in y_true.iter().zip(y_pred) {
        for v in [t, p] {
            if v.len() != m {
                return Err(CorrLogError::DimensionMismatch {
                    what: "label vector",
                    expected: m,
                    found: v.len(),
                });
            }
            crate::model::validate_labels(v)?;
        }
        let (mut inter, mut t_pos, mut p_pos, mut wrong) = (0usize, 0usize, 0usize, 0usize);
        for i in 0..m {
            let (a, b) = (t[i] == 1, p[i] == 1);
            match (a, b) {
                (true, true) => tp[i] += 1,
                (false, true) => fp[i] += 1,
                (true, false) => fn_[i] += 1,
                (false, false) => {}
            }
            inter += usize::from(a && b);
            t_pos += usize::from(a);
            p_pos += usize::from(b);
            wrong += usize::from(a != b);
        }
        hamming += wrong as f64 / m as f64;
        zero_one += f64::from(u8::from(wrong > 0));
        let union = t_pos + p_pos - inter;
        jaccard += if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        };
        ex_f1 += if t_pos + p_pos == 0 {
            1.0
        } else {
            2.0 * inter as f64 / (t_pos + p_pos) as f64
        };
    }
    let n = y_true.len() as f64;
    let mut degenerate_labels = Vec::new();
    let macro_f1 = (0..m)
        .map(|i| {
            f1(tp[i], fp[i], fn_[i]).unwrap_or_else(|| {
                degenerate_labels.push(i);
                1.0
            })
        })
        .sum::<f64>()
        / m as f64;
    let micro_f1 = f1(tp.iter().sum(), fp.iter().sum(), fn_.iter().sum()).unwrap_or(1.0);
    Ok(MetricsReport {
        hamming_loss: hamming / n,
        zero_one_loss: zero_one / n,
        accuracy: jaccard / n,
        f1_example: ex_f1 / n,
        macro_f1,
        micro_f1,
        n_eval: y_true.len(),
        degenerate_labels,
    })
}

/// Predicts every instance by BP; returns the labelings and the indices of
/// instances whose BP run stopped without converging.
pub fn predict_all(
    params: &ModelParams,
    dataset: &MultilabelDataset,
    bp: &BpConfig,
) -> Result<(Vec<Vec<Label>>, Vec<usize>)> {
    let mut preds = Vec::with_capacity(dataset.len());
    let mut unconverged = Vec::new();
    for (l, inst) in dataset.instances().iter().enumerate() {
        let (y, state) = predict_map_bp(params, &inst.features, bp)?;
        if !state.converged {
            unconverged.push(l);
        }
        preds.push(y);
    }
    Ok((preds, unconverged))
}

pub fn evaluate(
    params: &ModelParams,
    dataset: &MultilabelDataset,
    bp: &BpConfig,
) -> Result<MetricsReport> {
    let (preds, _) = predict_all(params, dataset, bp)?;
    let truth: Vec<Vec<Label>> = dataset
        .instances()
        .iter()
        .map(|i| i.labels.clone())
        .collect();
    compute_metrics(&truth, &preds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trainer {
    CorrLog,
    Ilrs,
}

impl Trainer {
    pub fn train(
        &self,
        dataset: &MultilabelDataset,
        config: &TrainConfig,
    ) -> Result<(ModelParams, bool)> {
        match self {
            Trainer::CorrLog => {
                let (p, t) = train_corrlog(dataset, config)?;
                Ok((p, t.converged))
            }
            Trainer::Ilrs => {
                let (p, t) = train_ilrs_with_trace(dataset, config)?;
                Ok((p, t.converged))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Trainer::CorrLog => "corrlog",
            Trainer::Ilrs => "ilrs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub test_indices: Vec<usize>,
    pub metrics: MetricsReport,
    pub train_converged: bool,
    pub bp_unconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation over folds.
    pub std: f64,
    pub per_fold: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub p_value: f64,
    pub df: usize,
    /// All paired differences equal: no variance to test against. The
    /// statistic is reported as 0 and the p-value as 1.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub trainer: Trainer,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    /// Keyed in [`METRIC_NAMES`] order.
    pub summary: Vec<(String, MetricSummary)>,
    /// Paired t-tests of this method against `compared_with`, per metric.
    pub paired_tests: Option<Vec<(String, TTestResult)>>,
    pub compared_with: Option<Trainer>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl CvResult {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.summary.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Attaches per-metric paired t-tests against `other`, which must use
    /// the same folds.
    pub fn compare_with(&mut self, other: &CvResult) -> Result<()> {
        if self.k != other.k
            || self
                .folds
                .iter()
                .zip(&other.folds)
                .any(|(a, b)| a.test_indices != b.test_indices)
        {
            return Err(CorrLogError::config(
                "paired tests need both runs on identical folds",
            ));
        }
        let mut tests = Vec::new();
        for ((name, a), (_, b)) in self.summary.iter().zip(&other.summary) {
            tests.push((name.clone(), paired_t_test(&a.per_fold, &b.per_fold)?));
        }
        self.paired_tests = Some(tests);
        self.compared_with = Some(other.trainer);
        Ok(())
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {}-fold cross-validation (seed {})",
            self.trainer.name(),
            self.k,
            self.seed
        );
        let _ = write!(out, "{:<14} {:>10} {:>10}", "metric", "mean", "std");
        if let Some(other) = self.compared_with {
            let _ = write!(out, "  {:>10} vs {}", "p", other.name());
        }
        out.push('\n');
        for (i, (name, s)) in self.summary.iter().enumerate() {
            let _ = write!(out, "{name:<14} {:>10.6} {:>10.6}", s.mean, s.std);
            if let Some(tests) = &self.paired_tests {
                let t = &tests[i].1;
                let flag = if t.degenerate {
                    " (degenerate)"
                } else if t.p_value < 0.05 {
                    " *"
                } else {
                    ""
                };
                let _ = write!(out, "  {:>10.4}{flag}", t.p_value);
            }
            out.push('\n');
        }
        out
    }

    /// `{ metric: { mean, std, per_fold: [...] }, ... }` plus run metadata.
    pub fn to_json(&self) -> Value {
        let mut metrics = serde_json::Map::new();
        for (name, s) in &self.summary {
            let mut entry = json!({ "mean": s.mean, "std": s.std, "per_fold": s.per_fold });
            if let Some(tests) = &self.paired_tests {
                if let Some((_, t)) = tests.iter().find(|(n, _)| n == name) {
                    entry["paired_t_test"] = json!(t);
                }
            }
            metrics.insert(name.clone(), entry);
        }
        json!({
            "trainer": self.trainer.name(),
            "folds": self.k,
            "seed": self.seed,
            "compared_with": self.compared_with.map(|t| t.name()),
            "metrics": metrics,
        })
    }
}

/// Seeded partition of `0..n` into `k` folds of near-equal size.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(CorrLogError::config(
            "cross-validation needs at least 2 folds",
        ));
    }
    if n < k {
        return Err(CorrLogError::config(format!(
            "{n} instances cannot fill {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// k-fold cross-validation on an already preprocessed dataset.
pub fn cross_validate(
    dataset: &MultilabelDataset,
    k: usize,
    trainer: Trainer,
    config: &TrainConfig,
    bp: &BpConfig,
    seed: u64,
) -> Result<CvResult> {
    cross_validate_impl(dataset, k, trainer, config, bp, seed, |train, test| {
        Ok((train, test))
    })
}

/// k-fold cross-validation on raw features. The feature transform is fitted
/// on each training split and reused on its test split.
#[allow(clippy::too_many_arguments)]
pub fn cross_validate_raw(
    raw: &MultilabelDataset,
    normalization: Normalization,
    add_bias: bool,
    k: usize,
    trainer: Trainer,
    config: &TrainConfig,
    bp: &BpConfig,
    seed: u64,
) -> Result<CvResult> {
    cross_validate_impl(raw, k, trainer, config, bp, seed, |train, test| {
        let pre = Preprocessor::fit(&train, normalization, add_bias);
        Ok((pre.apply(&train)?, pre.apply(&test)?))
    })
}

fn cross_validate_impl(
    dataset: &MultilabelDataset,
    k: usize,
    trainer: Trainer,
    config: &TrainConfig,
    bp: &BpConfig,
    seed: u64,
    prepare: impl Fn(
        MultilabelDataset,
        MultilabelDataset,
    ) -> Result<(MultilabelDataset, MultilabelDataset)>,
) -> Result<CvResult> {
    let folds = fold_assignment(dataset.len(), k, seed)?;
    let mut results = Vec::with_capacity(k);
    for test_idx in &folds {
        let mut in_test = vec![false; dataset.len()];
        for &i in test_idx {
            in_test[i] = true;
        }
        let train_idx: Vec<usize> = (0..dataset.len()).filter(|i| !in_test[*i]).collect();
        let (train, test) = prepare(dataset.subset(&train_idx)?, dataset.subset(test_idx)?)?;
        let (model, train_converged) = trainer.train(&train, config)?;
        let (preds, unconverged) = predict_all(&model, &test, bp)?;
        let truth: Vec<Vec<Label>> = test.instances().iter().map(|i| i.labels.clone()).collect();
        results.push(FoldResult {
            test_indices: test_idx.clone(),
            metrics: compute_metrics(&truth, &preds)?,
            train_converged,
            bp_unconverged: unconverged.len(),
        });
    }
    let summary = METRIC_NAMES
        .iter()
        .enumerate()
        .map(|(mi, name)| {
            let per_fold: Vec<f64> = results.iter().map(|f| f.metrics.values()[mi]).collect();
            let (mean, std) = mean_std(&per_fold);
            (
                name.to_string(),
                MetricSummary {
                    mean,
                    std,
                    per_fold,
                },
            )
        })
        .collect();
    Ok(CvResult {
        trainer,
        k,
        seed,
        folds: results,
        summary,
        paired_tests: None,
        compared_with: None,
    })
}

/// Two-sided paired t-test on per-fold scores.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(CorrLogError::DimensionMismatch {
            what: "paired samples",
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(CorrLogError::config(
            "a paired t-test needs at least two pairs",
        ));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let df = diffs.len() - 1;
    let lo = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs());
    if hi - lo <= 8.0 * f64::EPSILON * scale {
        return Ok(TTestResult {
            t_statistic: 0.0,
            p_value: 1.0,
            df,
            degenerate: true,
        });
    }
    let (mean, sd) = mean_std(&diffs);
    let t = mean / (sd / (diffs.len() as f64).sqrt());
    Ok(TTestResult {
        t_statistic: t,
        p_value: student_t_two_sided(t, df as f64),
        df,
        degenerate: false,
    })
}

/// `Σ_i ‖β_i^a - β_i^b‖₂ + Σ_{i<j} |α_ij^a - α_ij^b|`.
pub fn parameter_distance(a: &ModelParams, b: &ModelParams) -> Result<f64> {
    if a.num_labels() != b.num_labels() || a.num_features() != b.num_features() {
        return Err(CorrLogError::DimensionMismatch {
            what: "model shape",
            expected: a.num_labels() * a.num_features(),
            found: b.num_labels() * b.num_features(),
        });
    }
    let m = a.num_labels();
    let rows: f64 = (0..m)
        .map(|i| {
            a.beta_row(i)
                .iter()
                .zip(b.beta_row(i))
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    let mut pairs = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            pairs += (a.alpha(i, j) - b.alpha(i, j)).abs();
        }
    }
    Ok(rows + pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTrial {
    pub replaced_index: usize,
    pub pool_index: usize,
    pub distance: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `16 / (min(λ₁, λ₂) n)`.
    pub bound: f64,
    pub n: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Training tolerance used for every fit.
    pub tolerance: f64,
    pub base_converged: bool,
    pub trials: Vec<StabilityTrial>,
    pub max_distance: f64,
    pub mean_distance: f64,
    pub all_within_bound: bool,
}

impl StabilityReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "stability: n={} lambda1={} lambda2={} tol={:e} bound={:.6}",
            self.n, self.lambda1, self.lambda2, self.tolerance, self.bound
        );
        let _ = writeln!(
            out,
            "{:>5} {:>8} {:>8} {:>14} {:>9}",
            "trial", "replaced", "pool", "distance", "converged"
        );
        for (t, r) in self.trials.iter().enumerate() {
            let _ = writeln!(
                out,
                "{t:>5} {:>8} {:>8} {:>14.6e} {:>9}",
                r.replaced_index, r.pool_index, r.distance, r.converged
            );
        }
        let _ = writeln!(
            out,
            "max={:.6e} mean={:.6e} within_bound={}",
            self.max_distance, self.mean_distance, self.all_within_bound
        );
        out
    }
}

/// `16 / (min(λ₁, λ₂) n)`.
pub fn stability_bound(lambda1: f64, lambda2: f64, n: usize) -> f64 {
    16.0 / (lambda1.min(lambda2) * n as f64)
}

/// Retrains after replacing one random training example with a random
/// example from `pool`, `trials` times, and measures how far the fitted
/// parameters move. Every fit starts from zero.
pub fn stability_experiment(
    dataset: &MultilabelDataset,
    pool: &[Instance],
    config: &TrainConfig,
    trials: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if pool.is_empty() {
        return Err(CorrLogError::config(
            "the stability experiment needs a non-empty held-out pool",
        ));
    }
    if dataset.len() < 2 {
        return Err(CorrLogError::config(
            "the stability experiment needs at least two training instances",
        ));
    }
    config.validate()?;
    let (base, base_trace) = train_corrlog(dataset, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(trials);
    for _ in 0..trials {
        let replaced_index = rng.gen_range(0..dataset.len());
        let pool_index = rng.gen_range(0..pool.len());
        let perturbed = dataset.with_replaced(replaced_index, pool[pool_index].clone())?;
        let (model, trace) = train_corrlog(&perturbed, config)?;
        records.push(StabilityTrial {
            replaced_index,
            pool_index,
            distance: parameter_distance(&base, &model)?,
            converged: trace.converged,
        });
    }
    let bound = stability_bound(config.reg.lambda1, config.reg.lambda2, dataset.len());
    let max_distance = records.iter().map(|r| r.distance).fold(0.0, f64::max);
    let mean_distance = if records.is_empty() {
        0.0
    } else {
        records.iter().map(|r| r.distance).sum::<f64>() / records.len() as f64
    };
    Ok(StabilityReport {
        bound,
        n: dataset.len(),
        lambda1: config.reg.lambda1,
        lambda2: config.reg.lambda2,
        tolerance: config.rel_tol,
        base_converged: base_trace.converged,
        all_within_bound: records.iter().all(|r| r.distance <= bound),
        trials: records,
        max_distance,
        mean_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn perfect_predictions() {
        let y = vec![vec![1, -1, 1], vec![-1, -1, 1]];
        let r = compute_metrics(&y, &y).unwrap();
        assert_eq!(r.hamming_loss, 0.0);
        assert_eq!(r.zero_one_loss, 0.0);
        assert_eq!([r.accuracy, r.f1_example, r.macro_f1, r.micro_f1], [1.0; 4]);
        assert_eq!(r.degenerate_labels, vec![1]);
    }

    #[test]
    fn worked_example() {
        let r = compute_metrics(&[vec![1, -1, 1]], &[vec![1, 1, 1]]).unwrap();
        assert_eq!(r.hamming_loss, 1.0 / 3.0);
        assert_eq!(r.zero_one_loss, 1.0);
        assert_eq!(r.accuracy, 2.0 / 3.0);
        assert_eq!(r.f1_example, 4.0 / 5.0);
    }

    #[test]
    fn shape_errors() {
        assert!(compute_metrics(&[vec![1]], &[]).is_err());
        assert!(compute_metrics(&[vec![1, 1]], &[vec![1]]).is_err());
        assert!(compute_metrics(&[vec![1, 0]], &[vec![1, 1]]).is_err());
    }

    #[test]
    fn folds_partition_and_are_seeded() {
        let folds = fold_assignment(23, 5, 9).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(folds.iter().all(|f| f.len() == 4 || f.len() == 5));
        assert_eq!(folds, fold_assignment(23, 5, 9).unwrap());
        assert_ne!(folds, fold_assignment(23, 5, 10).unwrap());
        assert!(fold_assignment(3, 5, 0).is_err());
        assert!(fold_assignment(3, 1, 0).is_err());
        let loo = fold_assignment(10, 10, 1).unwrap();
        assert!(loo.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn t_test_cases() {
        let r = paired_t_test(&[0.3, 0.2], &[0.3, 0.2]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
        let r = paired_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(r.degenerate);
        // Hand computation: d = (-0.2, 0.1, -0.1), mean -1/15,
        // sd = sqrt(0.07/3), t = mean / (sd / √3) = -0.755929, df = 2,
        // two-sided p = 1 - |t| / sqrt(2 + t²) = 0.528595.
        let r = paired_t_test(&[0.1, 0.2, 0.3], &[0.3, 0.1, 0.4]).unwrap();
        assert!(!r.degenerate);
        assert_eq!(r.df, 2);
        assert_relative_eq!(r.t_statistic, -0.755_928_946_018_455, epsilon = 1e-9);
        assert_relative_eq!(r.p_value, 0.528_595_479_208_968_3, epsilon = 1e-9);
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn bound_scales_inversely_with_n() {
        assert_relative_eq!(stability_bound(0.001, 0.001, 500), 32.0, epsilon = 1e-12);
        assert_relative_eq!(
            stability_bound(0.001, 0.002, 1000),
            0.5 * stability_bound(0.001, 0.002, 500),
            epsilon = 1e-12
        );
    }

    proptest! {
        #[test]
        fn zero_one_dominates_hamming(
            seed in 0u64..10_000,
            n in 1usize..30,
            m in 1usize..7,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || -> Vec<Vec<Label>> {
                (0..n).map(|_| (0..m).map(|_| if rng.gen_bool(0.4) { 1 } else { -1 }).collect()).collect()
            };
            let t = draw();
            let p = draw();
            let r = compute_metrics(&t, &p).unwrap();
            prop_assert!(r.zero_one_loss >= r.hamming_loss && r.hamming_loss >= 0.0);
            for v in r.values() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn micro_equals_macro_with_identical_label_counts() {
        // Each label column sees the same (tp, fp, fn) counts.
        let t = vec![
            vec![1, 1, 1],
            vec![1, 1, 1],
            vec![-1, -1, -1],
            vec![-1, -1, -1],
        ];
        let p = vec![
            vec![1, 1, 1],
            vec![-1, -1, -1],
            vec![1, 1, 1],
            vec![-1, -1, -1],
        ];
        let r = compute_metrics(&t, &p).unwrap();
        assert_relative_eq!(r.micro_f1, r.macro_f1, epsilon = 1e-15);
    }
}
