//! Proximal gradient training of CorrLog and ILRs.
//!
//! Each iteration linearises the smooth objective `J_s` around the current
//! anchor, adds a `1/(2η)` proximity term and minimises the result together
//! with the ℓ₁ penalty in closed form by coordinatewise soft thresholding.
//! With acceleration on, the anchor is a momentum extrapolation of the last
//! two iterates; momentum is reset whenever a step would raise the
//! objective, so accepted iterates always descend.

use serde::{Deserialize, Serialize};

use crate::error::{CorrLogError, Result};
use crate::model::{ModelParams, MultilabelDataset};
use crate::objective::{
    l1_penalty, smooth_dense, surrogate, DenseParams, GradientBuffer, RegularizationConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepPolicy {
    /// Constant step `η`; must be below the inverse Lipschitz constant.
    Fixed(f64),
    /// Start at `initial_eta` (or `1/L₀` when `None`) and multiply by
    /// `shrink_factor` until the surrogate majorises the objective.
    Backtracking {
        initial_eta: Option<f64>,
        shrink_factor: f64,
    },
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy::Backtracking {
            initial_eta: None,
            shrink_factor: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub reg: RegularizationConfig,
    pub step_policy: StepPolicy,
    pub max_iters: usize,
    /// Relative objective change below which the run may stop; the
    /// optimality residual must also be below `rel_tol` times the scale of
    /// the initial gradient.
    pub rel_tol: f64,
    pub accelerate: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            reg: RegularizationConfig::default(),
            step_policy: StepPolicy::default(),
            max_iters: 5000,
            rel_tol: 1e-7,
            accelerate: true,
        }
    }
}

impl TrainConfig {
    pub fn with_reg(reg: RegularizationConfig) -> Self {
        Self {
            reg,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.reg.validate_for_training()?;
        if self.max_iters == 0 {
            return Err(CorrLogError::config("max_iters must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(CorrLogError::config("rel_tol must be positive"));
        }
        match self.step_policy {
            StepPolicy::Fixed(eta) if !(eta > 0.0 && eta.is_finite()) => {
                Err(CorrLogError::config("step size must be positive"))
            }
            StepPolicy::Backtracking {
                initial_eta,
                shrink_factor,
            } => {
                if let Some(eta) = initial_eta {
                    if !(eta > 0.0 && eta.is_finite()) {
                        return Err(CorrLogError::config("initial step size must be positive"));
                    }
                }
                if !(shrink_factor > 0.0 && shrink_factor < 1.0) {
                    return Err(CorrLogError::config("shrink_factor must lie in (0, 1)"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub step_size: f64,
    pub nnz_alpha: usize,
    pub nnz_beta: usize,
    /// `J(Θ_{k+1}; anchor) - F(Θ_{k+1})`; nonnegative when the surrogate
    /// majorises the objective at the accepted point.
    pub surrogate_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    /// Record 0 is the zero initialisation; one record per accepted step.
    pub records: Vec<TraceRecord>,
    pub converged: bool,
    /// Iterations run, including rejected momentum steps.
    pub iterations: usize,
    /// ∞-norm of the minimum-norm subgradient at the returned parameters.
    pub optimality_residual: f64,
    /// Scale the residual was compared against (`max(1, ‖∇J_s(0)‖∞)`).
    pub residual_scale: f64,
}

impl TrainTrace {
    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }
}

/// `sign(u) · max(|u| - t, 0)`.
#[inline]
pub fn soft_threshold(u: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if u > t {
        u - t
    } else if u < -t {
        u + t
    } else {
        0.0
    }
}

/// Exact minimiser of the proximal surrogate around `params`.
///
/// β coordinates are thresholded at `η λ₁ ε` and α coordinates at `η λ₂ ε`.
pub fn prox_step(
    params: &ModelParams,
    grad: &GradientBuffer,
    eta: f64,
    reg: &RegularizationConfig,
) -> Result<ModelParams> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(CorrLogError::config("step size must be positive"));
    }
    let dense = DenseParams::from_model(params);
    if grad.grad_beta.len() != dense.beta.len() || grad.grad_alpha.len() != dense.alpha.len() {
        return Err(CorrLogError::DimensionMismatch {
            what: "gradient buffer",
            expected: dense.beta.len() + dense.alpha.len(),
            found: grad.grad_beta.len() + grad.grad_alpha.len(),
        });
    }
    prox_dense(&dense, grad, eta, reg, true).to_model()
}

fn prox_dense(
    anchor: &DenseParams,
    grad: &GradientBuffer,
    eta: f64,
    reg: &RegularizationConfig,
    couple: bool,
) -> DenseParams {
    let mut out = anchor.clone();
    let tb = eta * reg.l1_beta();
    for ((o, a), g) in out.beta.iter_mut().zip(&anchor.beta).zip(&grad.grad_beta) {
        *o = soft_threshold(a - eta * g, tb);
    }
    if couple {
        let ta = eta * reg.l1_alpha();
        for ((o, a), g) in out
            .alpha
            .iter_mut()
            .zip(&anchor.alpha)
            .zip(&grad.grad_alpha)
        {
            *o = soft_threshold(a - eta * g, ta);
        }
    } else {
        out.alpha.iter_mut().for_each(|v| *v = 0.0);
    }
    out
}

/// Distance from zero to the subdifferential of the full objective.
fn subgradient_residual(
    params: &DenseParams,
    grad: &GradientBuffer,
    reg: &RegularizationConfig,
    couple: bool,
) -> f64 {
    fn coord(theta: f64, g: f64, l1: f64) -> f64 {
        if theta != 0.0 {
            (g + l1 * theta.signum()).abs()
        } else {
            (g.abs() - l1).max(0.0)
        }
    }
    let beta = params
        .beta
        .iter()
        .zip(&grad.grad_beta)
        .map(|(t, g)| coord(*t, *g, reg.l1_beta()))
        .fold(0.0, f64::max);
    if !couple {
        return beta;
    }
    params
        .alpha
        .iter()
        .zip(&grad.grad_alpha)
        .map(|(t, g)| coord(*t, *g, reg.l1_alpha()))
        .fold(beta, f64::max)
}

/// `1/L₀` with `L₀ = 2 max‖x‖² + 4(m-1) + 2 max(λ₁, λ₂)`.
pub fn default_initial_step(dataset: &MultilabelDataset, reg: &RegularizationConfig) -> f64 {
    let max_sq = dataset
        .instances()
        .iter()
        .map(|inst| inst.features.iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    let m = dataset.num_labels() as f64;
    let l0 = 2.0 * max_sq + 4.0 * (m - 1.0) + 2.0 * reg.lambda1.max(reg.lambda2);
    1.0 / l0.max(f64::MIN_POSITIVE)
}

fn sq_dist(a: &DenseParams, b: &DenseParams) -> f64 {
    a.coords()
        .zip(b.coords())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn lin(grad: &GradientBuffer, a: &DenseParams, b: &DenseParams) -> f64 {
    grad.coords()
        .zip(a.coords().zip(b.coords()))
        .map(|(g, (x, y))| g * (x - y))
        .sum()
}

fn run(
    dataset: &MultilabelDataset,
    config: &TrainConfig,
    couple: bool,
    progress: &mut dyn FnMut(&TraceRecord),
) -> Result<(DenseParams, TrainTrace)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(CorrLogError::EmptyDataset);
    }
    if let Some(bad) = dataset.first_non_finite() {
        return Err(CorrLogError::NonFinite {
            what: "features",
            instance: Some(bad),
        });
    }
    let reg = &config.reg;
    let (m, d) = (dataset.num_labels(), dataset.num_features());
    let (mut eta, shrink) = match config.step_policy {
        StepPolicy::Fixed(eta) => (eta, None),
        StepPolicy::Backtracking {
            initial_eta,
            shrink_factor,
        } => (
            initial_eta.unwrap_or_else(|| default_initial_step(dataset, reg)),
            Some(shrink_factor),
        ),
    };

    let mut x = DenseParams::zeros(m, d);
    let mut grad = GradientBuffer::zeros(m, d);
    let mut smooth_x = smooth_dense(&x, dataset, reg, Some(&mut grad))?;
    if !couple {
        grad.grad_alpha.iter_mut().for_each(|v| *v = 0.0);
    }
    let residual_scale = grad.coords().fold(1.0_f64, |acc, g| acc.max(g.abs()));
    let mut f_x = smooth_x + l1_penalty(&x, reg);
    let mut residual = subgradient_residual(&x, &grad, reg, couple);

    let start = TraceRecord {
        iteration: 0,
        objective: f_x,
        step_size: eta,
        nnz_alpha: 0,
        nnz_beta: 0,
        surrogate_gap: 0.0,
    };
    progress(&start);
    let mut records = vec![start];

    // `anchor` is where the next surrogate is built; `grad` holds ∇J_s there.
    let mut anchor = x.clone();
    let mut smooth_anchor = smooth_x;
    let mut anchor_is_x = true;
    let mut momentum = 1.0_f64;
    let mut converged = residual <= config.rel_tol * residual_scale;
    let mut iterations = 0;

    while !converged && iterations < config.max_iters {
        iterations += 1;
        if !anchor_is_x {
            smooth_anchor = smooth_dense(&anchor, dataset, reg, Some(&mut grad))?;
            if !couple {
                grad.grad_alpha.iter_mut().for_each(|v| *v = 0.0);
            }
        }

        let (candidate, smooth_c) = loop {
            let candidate = prox_dense(&anchor, &grad, eta, reg, couple);
            let smooth_c = smooth_dense(&candidate, dataset, reg, None)?;
            let Some(shrink) = shrink else {
                break (candidate, smooth_c);
            };
            let model = smooth_anchor
                + lin(&grad, &candidate, &anchor)
                + sq_dist(&candidate, &anchor) / (2.0 * eta);
            if smooth_c <= model + 1e-13 * smooth_anchor.abs().max(1.0) {
                break (candidate, smooth_c);
            }
            eta *= shrink;
            if eta < 1e-300 {
                return Err(CorrLogError::NonFinite {
                    what: "step size",
                    instance: None,
                });
            }
        };
        let f_c = smooth_c + l1_penalty(&candidate, reg);
        if !f_c.is_finite() {
            return Err(CorrLogError::NonFinite {
                what: "objective",
                instance: dataset.first_non_finite(),
            });
        }

        // Objective values near the optimum agree to a few ulps, so
        // comparisons tolerate that much noise and the residual decides.
        let slack = 32.0 * f64::EPSILON * f_x.abs().max(1.0);
        if f_c > f_x + slack {
            if !anchor_is_x {
                // Momentum overshot: restart from the last accepted iterate.
                anchor = x.clone();
                smooth_anchor = smooth_x;
                smooth_dense(&anchor, dataset, reg, Some(&mut grad))?;
                if !couple {
                    grad.grad_alpha.iter_mut().for_each(|v| *v = 0.0);
                }
                anchor_is_x = true;
                momentum = 1.0;
                continue;
            }
            // A plain proximal step from x cannot increase the objective
            // beyond round-off in exact arithmetic.
            break;
        }

        let gap = surrogate(&candidate, &anchor, smooth_anchor, &grad, eta, reg) - f_c;
        let rel_change = (f_x - f_c) / f_x.abs().max(f64::MIN_POSITIVE);
        let previous = std::mem::replace(&mut x, candidate);
        f_x = f_c;
        smooth_x = smooth_c;

        let record = TraceRecord {
            iteration: iterations,
            objective: f_x,
            step_size: eta,
            nnz_alpha: x.nnz_alpha(),
            nnz_beta: x.nnz_beta(),
            surrogate_gap: gap,
        };
        progress(&record);
        records.push(record);

        if rel_change < config.rel_tol {
            let mut grad_x = GradientBuffer::zeros(m, d);
            smooth_dense(&x, dataset, reg, Some(&mut grad_x))?;
            residual = subgradient_residual(&x, &grad_x, reg, couple);
            if residual <= config.rel_tol * residual_scale {
                converged = true;
                break;
            }
            if !config.accelerate {
                if !couple {
                    grad_x.grad_alpha.iter_mut().for_each(|v| *v = 0.0);
                }
                grad = grad_x;
                anchor = x.clone();
                smooth_anchor = smooth_x;
                continue;
            }
        }

        if config.accelerate {
            let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let w = (momentum - 1.0) / next;
            momentum = next;
            anchor = x.clone();
            for (a, (xn, xp)) in anchor.coords_mut().zip(x.coords().zip(previous.coords())) {
                *a = xn + w * (xn - xp);
            }
            anchor_is_x = w == 0.0;
            if anchor_is_x {
                smooth_dense(&x, dataset, reg, Some(&mut grad))?;
                if !couple {
                    grad.grad_alpha.iter_mut().for_each(|v| *v = 0.0);
                }
                smooth_anchor = smooth_x;
            }
        } else {
            smooth_dense(&x, dataset, reg, Some(&mut grad))?;
            if !couple {
                grad.grad_alpha.iter_mut().for_each(|v| *v = 0.0);
            }
            anchor = x.clone();
            smooth_anchor = smooth_x;
        }
    }

    if !converged {
        let mut grad_x = GradientBuffer::zeros(m, d);
        smooth_dense(&x, dataset, reg, Some(&mut grad_x))?;
        residual = subgradient_residual(&x, &grad_x, reg, couple);
        converged = residual <= config.rel_tol * residual_scale;
    }

    Ok((
        x,
        TrainTrace {
            records,
            converged,
            iterations,
            optimality_residual: residual,
            residual_scale,
        },
    ))
}

/// Fits CorrLog from the zero initialisation.
pub fn train_corrlog(
    dataset: &MultilabelDataset,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainTrace)> {
    train_corrlog_with_progress(dataset, config, &mut |_| {})
}

/// [`train_corrlog`] reporting every accepted iterate to `progress`.
pub fn train_corrlog_with_progress(
    dataset: &MultilabelDataset,
    config: &TrainConfig,
    progress: &mut dyn FnMut(&TraceRecord),
) -> Result<(ModelParams, TrainTrace)> {
    let (dense, trace) = run(dataset, config, true, progress)?;
    Ok((dense.to_model()?, trace))
}

/// Independent logistic regressions: the same solver with every pair
/// weight held at zero.
pub fn train_ilrs(dataset: &MultilabelDataset, config: &TrainConfig) -> Result<ModelParams> {
    Ok(train_ilrs_with_trace(dataset, config)?.0)
}

pub fn train_ilrs_with_trace(
    dataset: &MultilabelDataset,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainTrace)> {
    let (dense, trace) = run(dataset, config, false, &mut |_| {})?;
    Ok((dense.to_model()?, trace))
}
