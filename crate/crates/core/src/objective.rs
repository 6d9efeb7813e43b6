//! Negative log pseudo-likelihood, elastic-net penalty and the smooth part
//! of the training objective together with its exact gradient.
//!
//! Training works on [`DenseParams`], which materialises a weight for every
//! label pair `i < j` so that the ℓ₁ proximal step can move any pair away
//! from zero. The public functions taking [`ModelParams`] convert on entry.

use serde::{Deserialize, Serialize};

use crate::error::{CorrLogError, Result};
use crate::model::{dot, sigmoid, softplus, ModelParams, MultilabelDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationConfig {
    /// Weight on the β terms.
    pub lambda1: f64,
    /// Weight on the α terms.
    pub lambda2: f64,
    /// ℓ₁ share; `0` gives a pure squared-ℓ₂ penalty.
    pub epsilon: f64,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.001,
            lambda2: 0.001,
            epsilon: 1.0,
        }
    }
}

impl RegularizationConfig {
    pub fn new(lambda1: f64, lambda2: f64, epsilon: f64) -> Result<Self> {
        let reg = Self {
            lambda1,
            lambda2,
            epsilon,
        };
        reg.validate()?;
        Ok(reg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("epsilon", self.epsilon),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CorrLogError::config(format!(
                    "{name} must be a finite nonnegative number, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Training additionally needs strictly positive λ₁ and λ₂.
    pub fn validate_for_training(&self) -> Result<()> {
        self.validate()?;
        if self.lambda1 <= 0.0 || self.lambda2 <= 0.0 {
            return Err(CorrLogError::config(
                "lambda1 and lambda2 must be strictly positive for training",
            ));
        }
        Ok(())
    }

    pub(crate) fn l1_beta(&self) -> f64 {
        self.lambda1 * self.epsilon
    }

    pub(crate) fn l1_alpha(&self) -> f64 {
        self.lambda2 * self.epsilon
    }
}

/// Number of unordered label pairs.
#[inline]
pub fn num_pairs(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Position of pair `(i, j)`, `i < j`, in the row-major upper triangle.
#[inline]
pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * (2 * m - i - 1) / 2 + (j - i - 1)
}

/// Iterates `(i, j)` pairs in [`pair_index`] order.
pub fn pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |i| (i + 1..m).map(move |j| (i, j)))
}

/// Parameters with one slot per label pair, zero or not.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub num_labels: usize,
    pub num_features: usize,
    /// Row-major `m × D`.
    pub beta: Vec<f64>,
    /// Upper triangle in [`pair_index`] order.
    pub alpha: Vec<f64>,
}

impl DenseParams {
    pub fn zeros(num_labels: usize, num_features: usize) -> Self {
        Self {
            num_labels,
            num_features,
            beta: vec![0.0; num_labels * num_features],
            alpha: vec![0.0; num_pairs(num_labels)],
        }
    }

    pub fn from_model(params: &ModelParams) -> Self {
        let m = params.num_labels();
        let mut dense = Self::zeros(m, params.num_features());
        dense.beta.copy_from_slice(params.beta());
        for (i, j, w) in params.alpha_entries() {
            dense.alpha[pair_index(m, i, j)] = w;
        }
        dense
    }

    /// Sparse model keeping only nonzero pair weights.
    pub fn to_model(&self) -> Result<ModelParams> {
        let m = self.num_labels;
        let entries = pairs(m)
            .zip(&self.alpha)
            .filter(|(_, w)| **w != 0.0)
            .map(|((i, j), &w)| (i, j, w));
        ModelParams::from_parts(m, self.num_features, self.beta.clone(), entries)
    }

    pub fn alpha_at(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.alpha[pair_index(self.num_labels, i, j)],
            std::cmp::Ordering::Greater => self.alpha[pair_index(self.num_labels, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Symmetric `m × m` interaction matrix with zero diagonal.
    fn coupling_matrix(&self) -> Vec<f64> {
        let m = self.num_labels;
        let mut c = vec![0.0; m * m];
        for ((i, j), &w) in pairs(m).zip(&self.alpha) {
            c[i * m + j] = w;
            c[j * m + i] = w;
        }
        c
    }

    /// All coordinates, β first then α.
    pub fn coords(&self) -> impl Iterator<Item = &f64> {
        self.beta.iter().chain(self.alpha.iter())
    }

    pub(crate) fn coords_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.beta.iter_mut().chain(self.alpha.iter_mut())
    }

    pub fn nnz_alpha(&self) -> usize {
        self.alpha.iter().filter(|v| **v != 0.0).count()
    }

    pub fn nnz_beta(&self) -> usize {
        self.beta.iter().filter(|v| **v != 0.0).count()
    }

    fn check_dataset(&self, dataset: &MultilabelDataset) -> Result<()> {
        if dataset.is_empty() {
            return Err(CorrLogError::EmptyDataset);
        }
        if dataset.num_features() != self.num_features {
            return Err(CorrLogError::DimensionMismatch {
                what: "dataset features",
                expected: self.num_features,
                found: dataset.num_features(),
            });
        }
        if dataset.num_labels() != self.num_labels {
            return Err(CorrLogError::DimensionMismatch {
                what: "dataset labels",
                expected: self.num_labels,
                found: dataset.num_labels(),
            });
        }
        Ok(())
    }
}

/// Gradient of the smooth objective, shaped like [`DenseParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffer {
    pub num_labels: usize,
    pub num_features: usize,
    pub grad_beta: Vec<f64>,
    /// One entry per pair `i < j`, in [`pair_index`] order.
    pub grad_alpha: Vec<f64>,
}

impl GradientBuffer {
    pub fn zeros(num_labels: usize, num_features: usize) -> Self {
        Self {
            num_labels,
            num_features,
            grad_beta: vec![0.0; num_labels * num_features],
            grad_alpha: vec![0.0; num_pairs(num_labels)],
        }
    }

    pub fn beta(&self, label: usize, feature: usize) -> f64 {
        self.grad_beta[label * self.num_features + feature]
    }

    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.grad_alpha[pair_index(self.num_labels, a, b)]
    }

    pub fn coords(&self) -> impl Iterator<Item = &f64> {
        self.grad_beta.iter().chain(self.grad_alpha.iter())
    }
}

/// Pseudo-likelihood loss and, optionally, its gradient (unregularised).
///
/// Per instance the conditional activation of label `i` is
/// `a_i = β_iᵀx + Σ_{j≠i} α_ij y_j`, the loss term is `softplus(-2 y_i a_i)`
/// and `ξ_i = -2 y_i σ(-2 y_i a_i)` is its derivative with respect to `a_i`.
/// Instances are reduced sequentially so results are bit-reproducible.
pub(crate) fn pseudo_likelihood(
    params: &DenseParams,
    dataset: &MultilabelDataset,
    mut grad: Option<&mut GradientBuffer>,
) -> Result<f64> {
    params.check_dataset(dataset)?;
    let m = params.num_labels;
    let d = params.num_features;
    let coupling = params.coupling_matrix();
    let mut xi = vec![0.0; m];
    let mut y = vec![0.0; m];
    // Pair gradient accumulated densely over (i, j) then folded; avoids
    // recomputing pair_index inside the inner loop.
    let mut pair_acc = vec![0.0; if grad.is_some() { m * m } else { 0 }];
    if let Some(g) = grad.as_deref_mut() {
        g.grad_beta.iter_mut().for_each(|v| *v = 0.0);
        g.grad_alpha.iter_mut().for_each(|v| *v = 0.0);
    }
    let mut total = 0.0;
    for (l, inst) in dataset.instances().iter().enumerate() {
        for (yy, &lab) in y.iter_mut().zip(&inst.labels) {
            *yy = f64::from(lab);
        }
        let mut inst_loss = 0.0;
        for i in 0..m {
            let field = dot(&coupling[i * m..(i + 1) * m], &y);
            let activation = dot(&params.beta[i * d..(i + 1) * d], &inst.features) + field;
            let t = -2.0 * y[i] * activation;
            inst_loss += softplus(t);
            xi[i] = -2.0 * y[i] * sigmoid(t);
        }
        if !inst_loss.is_finite() {
            return Err(CorrLogError::NonFinite {
                what: "pseudo-likelihood",
                instance: Some(l),
            });
        }
        total += inst_loss;
        if let Some(g) = grad.as_deref_mut() {
            for i in 0..m {
                let row = &mut g.grad_beta[i * d..(i + 1) * d];
                for (gv, xv) in row.iter_mut().zip(&inst.features) {
                    *gv += xi[i] * xv;
                }
                for j in i + 1..m {
                    pair_acc[i * m + j] += xi[i] * y[j] + xi[j] * y[i];
                }
            }
        }
    }
    let n = dataset.len() as f64;
    if let Some(g) = grad {
        g.grad_beta.iter_mut().for_each(|v| *v /= n);
        for ((i, j), gv) in pairs(m).zip(g.grad_alpha.iter_mut()) {
            *gv = pair_acc[i * m + j] / n;
        }
        if g.coords().any(|v| !v.is_finite()) {
            return Err(CorrLogError::NonFinite {
                what: "gradient",
                instance: dataset.first_non_finite(),
            });
        }
    }
    Ok(total / n)
}

pub(crate) fn quadratic_penalty(params: &DenseParams, reg: &RegularizationConfig) -> f64 {
    let b: f64 = params.beta.iter().map(|v| v * v).sum();
    let a: f64 = params.alpha.iter().map(|v| v * v).sum();
    reg.lambda1 * b + reg.lambda2 * a
}

pub(crate) fn l1_penalty(params: &DenseParams, reg: &RegularizationConfig) -> f64 {
    let b: f64 = params.beta.iter().map(|v| v.abs()).sum();
    let a: f64 = params.alpha.iter().map(|v| v.abs()).sum();
    reg.l1_beta() * b + reg.l1_alpha() * a
}

/// Smooth objective `J_s` at dense parameters, with its gradient when asked.
pub(crate) fn smooth_dense(
    params: &DenseParams,
    dataset: &MultilabelDataset,
    reg: &RegularizationConfig,
    grad: Option<&mut GradientBuffer>,
) -> Result<f64> {
    let loss = match grad {
        Some(g) => {
            let loss = pseudo_likelihood(params, dataset, Some(&mut *g))?;
            for (gv, b) in g.grad_beta.iter_mut().zip(&params.beta) {
                *gv += 2.0 * reg.lambda1 * b;
            }
            for (gv, a) in g.grad_alpha.iter_mut().zip(&params.alpha) {
                *gv += 2.0 * reg.lambda2 * a;
            }
            loss
        }
        None => pseudo_likelihood(params, dataset, None)?,
    };
    Ok(loss + quadratic_penalty(params, reg))
}

/// Full regularised objective on dense parameters.
pub(crate) fn full_dense(
    params: &DenseParams,
    dataset: &MultilabelDataset,
    reg: &RegularizationConfig,
) -> Result<f64> {
    Ok(smooth_dense(params, dataset, reg, None)? + l1_penalty(params, reg))
}

/// Mean over instances of `Σ_i -log p(y_i | y_{-i}, x)`.
pub fn neg_log_pseudo_likelihood(params: &ModelParams, dataset: &MultilabelDataset) -> Result<f64> {
    pseudo_likelihood(&DenseParams::from_model(params), dataset, None)
}

/// Elastic-net penalty
/// `λ₁ Σ_i (‖β_i‖² + ε‖β_i‖₁) + λ₂ Σ_{i<j} (α_ij² + ε|α_ij|)`.
pub fn elastic_net_penalty(params: &ModelParams, reg: &RegularizationConfig) -> f64 {
    let dense = DenseParams::from_model(params);
    quadratic_penalty(&dense, reg) + l1_penalty(&dense, reg)
}

/// Pseudo-likelihood loss plus the squared-ℓ₂ part of the penalty only.
pub fn smooth_objective(
    params: &ModelParams,
    dataset: &MultilabelDataset,
    reg: &RegularizationConfig,
) -> Result<f64> {
    smooth_dense(&DenseParams::from_model(params), dataset, reg, None)
}

/// Exact gradient of [`smooth_objective`] over β and over every label pair.
pub fn smooth_gradient(
    params: &ModelParams,
    dataset: &MultilabelDataset,
    reg: &RegularizationConfig,
) -> Result<GradientBuffer> {
    let dense = DenseParams::from_model(params);
    let mut grad = GradientBuffer::zeros(dense.num_labels, dense.num_features);
    smooth_dense(&dense, dataset, reg, Some(&mut grad))?;
    Ok(grad)
}

/// Training objective: pseudo-likelihood loss plus elastic-net penalty.
pub fn full_objective(
    params: &ModelParams,
    dataset: &MultilabelDataset,
    reg: &RegularizationConfig,
) -> Result<f64> {
    full_dense(&DenseParams::from_model(params), dataset, reg)
}

/// Value of the proximal surrogate `J(Θ; Θ_k)` built around `anchor`.
///
/// `anchor_smooth` and `anchor_grad` are `J_s` and `∇J_s` at the anchor.
pub fn surrogate(
    candidate: &DenseParams,
    anchor: &DenseParams,
    anchor_smooth: f64,
    anchor_grad: &GradientBuffer,
    eta: f64,
    reg: &RegularizationConfig,
) -> f64 {
    let linear_quad: f64 = candidate
        .coords()
        .zip(anchor.coords())
        .zip(anchor_grad.coords())
        .map(|((c, a), g)| {
            let delta = c - a;
            g * delta + delta * delta / (2.0 * eta)
        })
        .sum();
    anchor_smooth + linear_quad + l1_penalty(candidate, reg)
}
