//! Model parameters, instances and the pointwise CorrLog / ILRs evaluations.
//!
//! Labels are indexed from zero. The pairwise weights are stored sparsely
//! under the key `(i, j)` with `i < j`; lookups with the indices swapped
//! resolve to the same entry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CorrLogError, Result};

/// Label value as stored in an [`Instance`]: `-1` or `+1`.
pub type Label = i8;

/// `log(1 + e^t)` without overflow.
#[inline]
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^{-z})`.
#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Learned parameters `Θ = {β, α}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    num_labels: usize,
    num_features: usize,
    /// Row-major `m × D`; row `i` is `β_i`.
    beta: Vec<f64>,
    alpha: BTreeMap<(usize, usize), f64>,
}

impl ModelParams {
    /// All-zero parameters for `m` labels and `D` features.
    pub fn zeros(num_labels: usize, num_features: usize) -> Result<Self> {
        if num_labels == 0 || num_features == 0 {
            return Err(CorrLogError::config(
                "a model needs at least one label and one feature",
            ));
        }
        Ok(Self {
            num_labels,
            num_features,
            beta: vec![0.0; num_labels * num_features],
            alpha: BTreeMap::new(),
        })
    }

    /// Builds parameters from a row-major coefficient matrix and pair weights.
    ///
    /// Pairs may be given in either order; zero weights are dropped.
    pub fn from_parts(
        num_labels: usize,
        num_features: usize,
        beta: Vec<f64>,
        alpha: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut params = Self::zeros(num_labels, num_features)?;
        if beta.len() != num_labels * num_features {
            return Err(CorrLogError::DimensionMismatch {
                what: "coefficient matrix",
                expected: num_labels * num_features,
                found: beta.len(),
            });
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(CorrLogError::NonFinite {
                what: "coefficient matrix",
                instance: None,
            });
        }
        params.beta = beta;
        for (i, j, w) in alpha {
            params.set_alpha(i, j, w)?;
        }
        Ok(params)
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Row-major `m × D` coefficient matrix.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta_row(&self, label: usize) -> &[f64] {
        let d = self.num_features;
        &self.beta[label * d..(label + 1) * d]
    }

    pub fn set_beta(&mut self, label: usize, feature: usize, value: f64) -> Result<()> {
        self.check_label(label)?;
        if feature >= self.num_features {
            return Err(CorrLogError::DimensionMismatch {
                what: "feature index",
                expected: self.num_features,
                found: feature,
            });
        }
        if !value.is_finite() {
            return Err(CorrLogError::NonFinite {
                what: "coefficient",
                instance: None,
            });
        }
        self.beta[label * self.num_features + feature] = value;
        Ok(())
    }

    /// Pair weight `α_ij`; symmetric in its arguments, zero when absent.
    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.alpha.get(&key).copied().unwrap_or(0.0)
    }

    /// Sets `α_ij`. A zero weight removes the pair.
    pub fn set_alpha(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.check_label(i)?;
        self.check_label(j)?;
        if i == j {
            return Err(CorrLogError::config(format!(
                "self-pair ({i}, {i}) has no interaction weight"
            )));
        }
        if !value.is_finite() {
            return Err(CorrLogError::NonFinite {
                what: "pair weight",
                instance: None,
            });
        }
        let key = if i < j { (i, j) } else { (j, i) };
        if value == 0.0 {
            self.alpha.remove(&key);
        } else {
            self.alpha.insert(key, value);
        }
        Ok(())
    }

    /// Nonzero pair weights as `(i, j, α_ij)` with `i < j`, in key order.
    pub fn alpha_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.alpha.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn clear_alpha(&mut self) {
        self.alpha.clear();
    }

    pub fn nnz_alpha(&self) -> usize {
        self.alpha.len()
    }

    pub fn nnz_beta(&self) -> usize {
        self.beta.iter().filter(|v| **v != 0.0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.is_empty() && self.beta.iter().all(|v| *v == 0.0)
    }

    /// Unary activations `β_iᵀx` for every label.
    pub fn unary_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_features(x)?;
        Ok(self
            .beta
            .chunks(self.num_features)
            .map(|row| dot(row, x))
            .collect())
    }

    pub(crate) fn check_label(&self, i: usize) -> Result<()> {
        if i >= self.num_labels {
            return Err(CorrLogError::LabelIndex {
                index: i,
                num_labels: self.num_labels,
            });
        }
        Ok(())
    }

    pub(crate) fn check_features(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_features {
            return Err(CorrLogError::DimensionMismatch {
                what: "feature vector",
                expected: self.num_features,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_labels(&self, y: &[Label]) -> Result<()> {
        if y.len() != self.num_labels {
            return Err(CorrLogError::DimensionMismatch {
                what: "label vector",
                expected: self.num_labels,
                found: y.len(),
            });
        }
        validate_labels(y)
    }

    /// `Σ_{j≠i} α_ij y_j`.
    fn neighbour_field(&self, y: &[Label], i: usize) -> f64 {
        self.alpha
            .iter()
            .filter_map(|(&(a, b), &w)| {
                if a == i {
                    Some(w * f64::from(y[b]))
                } else if b == i {
                    Some(w * f64::from(y[a]))
                } else {
                    None
                }
            })
            .sum()
    }
}

pub(crate) fn validate_labels(y: &[Label]) -> Result<()> {
    match y.iter().find(|v| **v != 1 && **v != -1) {
        Some(&bad) => Err(CorrLogError::InvalidLabel(i64::from(bad))),
        None => Ok(()),
    }
}

/// One example: feature vector `x` and labels `y ∈ {-1,+1}^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub features: Vec<f64>,
    pub labels: Vec<Label>,
}

impl Instance {
    pub fn new(features: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        validate_labels(&labels)?;
        Ok(Self { features, labels })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilabelDataset {
    instances: Vec<Instance>,
    num_features: usize,
    num_labels: usize,
    label_names: Vec<String>,
}

impl MultilabelDataset {
    /// Validates shapes and label values. Label names default to `l1..lm`.
    pub fn new(
        instances: Vec<Instance>,
        num_features: usize,
        num_labels: usize,
        label_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if instances.is_empty() {
            return Err(CorrLogError::EmptyDataset);
        }
        if num_features == 0 || num_labels == 0 {
            return Err(CorrLogError::config(
                "datasets need at least one feature and one label",
            ));
        }
        for inst in &instances {
            if inst.features.len() != num_features {
                return Err(CorrLogError::DimensionMismatch {
                    what: "feature vector",
                    expected: num_features,
                    found: inst.features.len(),
                });
            }
            if inst.labels.len() != num_labels {
                return Err(CorrLogError::DimensionMismatch {
                    what: "label vector",
                    expected: num_labels,
                    found: inst.labels.len(),
                });
            }
            validate_labels(&inst.labels)?;
        }
        let label_names =
            label_names.unwrap_or_else(|| (1..=num_labels).map(|i| format!("l{i}")).collect());
        if label_names.len() != num_labels {
            return Err(CorrLogError::DimensionMismatch {
                what: "label names",
                expected: num_labels,
                found: label_names.len(),
            });
        }
        Ok(Self {
            instances,
            num_features,
            num_labels,
            label_names,
        })
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    /// New dataset holding the instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let instances = indices.iter().map(|&i| self.instances[i].clone()).collect();
        Self::new(
            instances,
            self.num_features,
            self.num_labels,
            Some(self.label_names.clone()),
        )
    }

    /// Copy with instance `index` replaced.
    pub fn with_replaced(&self, index: usize, replacement: Instance) -> Result<Self> {
        let mut instances = self.instances.clone();
        instances[index] = replacement;
        Self::new(
            instances,
            self.num_features,
            self.num_labels,
            Some(self.label_names.clone()),
        )
    }

    /// Index of the first instance holding a NaN or infinite feature.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.instances
            .iter()
            .position(|inst| inst.features.iter().any(|v| !v.is_finite()))
    }
}

/// Unnormalised log-probability `Σ_i y_i β_iᵀx + Σ_{i<j} α_ij y_i y_j`.
pub fn joint_score(params: &ModelParams, x: &[f64], y: &[Label]) -> Result<f64> {
    params.check_labels(y)?;
    let unary = params.unary_scores(x)?;
    Ok(joint_score_from_unary(params, &unary, y))
}

pub(crate) fn joint_score_from_unary(params: &ModelParams, unary: &[f64], y: &[Label]) -> f64 {
    let single: f64 = unary.iter().zip(y).map(|(u, &yi)| u * f64::from(yi)).sum();
    let pairs: f64 = params
        .alpha_entries()
        .map(|(i, j, w)| w * f64::from(y[i]) * f64::from(y[j]))
        .sum();
    single + pairs
}

/// `p(y_i | y_{-i}, x)` under the full CorrLog model.
pub fn conditional_label_prob(
    params: &ModelParams,
    x: &[f64],
    y: &[Label],
    i: usize,
) -> Result<f64> {
    params.check_label(i)?;
    params.check_labels(y)?;
    params.check_features(x)?;
    let activation = dot(params.beta_row(i), x) + params.neighbour_field(y, i);
    Ok(sigmoid(2.0 * f64::from(y[i]) * activation))
}

/// `p_lr(y_i | x)` of the independent logistic regression for label `i`.
pub fn ilrs_label_prob(params: &ModelParams, x: &[f64], i: usize, y_i: Label) -> Result<f64> {
    params.check_label(i)?;
    params.check_features(x)?;
    validate_labels(&[y_i])?;
    let u = dot(params.beta_row(i), x);
    Ok(sigmoid(2.0 * f64::from(y_i) * u))
}
