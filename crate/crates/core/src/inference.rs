//! MAP label prediction.
//!
//! [`predict_map_bp`] runs synchronous log-domain max-product belief
//! propagation on the label graph whose edges are the nonzero pair weights.
//! [`map_bruteforce`] enumerates all `2^m` labelings and serves as the
//! exact reference for small `m`.
//!
//! State index 0 is `+1` and index 1 is `-1` throughout. Ties at decode time
//! go to `+1`; the brute-force search breaks ties towards the
//! lexicographically first labeling under `+1 < -1`, which agrees with the
//! per-label rule whenever the maximiser is unique.

use serde::{Deserialize, Serialize};

use crate::error::{CorrLogError, Result};
use crate::model::{joint_score_from_unary, Label, ModelParams};

/// Largest label count accepted by the enumeration routines.
pub const MAX_ENUMERATION_LABELS: usize = 20;

const STATES: [f64; 2] = [1.0, -1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    pub max_iters: usize,
    /// Weight on the previous message, in `[0, 1)`.
    pub damping: f64,
    /// Stop once no message moves by more than this.
    pub convergence_tol: f64,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            max_iters: 50,
            damping: 0.0,
            convergence_tol: 1e-9,
        }
    }
}

impl BpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(CorrLogError::config("BP max_iters must be positive"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(CorrLogError::config("BP damping must lie in [0, 1)"));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol < 0.0 {
            return Err(CorrLogError::config("BP tolerance must be nonnegative"));
        }
        Ok(())
    }
}

/// Message along one directed edge, indexed by the target label's state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedMessage {
    pub from: usize,
    pub to: usize,
    pub log_values: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    /// Two directed messages per nonzero pair weight.
    pub messages: Vec<DirectedMessage>,
    /// Log max-marginals per label, `[+1, -1]`.
    pub beliefs: Vec<[f64; 2]>,
    pub converged: bool,
    pub iterations_run: usize,
}

/// Decodes the MAP labeling by loopy max-product.
pub fn predict_map_bp(
    params: &ModelParams,
    x: &[f64],
    config: &BpConfig,
) -> Result<(Vec<Label>, BeliefState)> {
    config.validate()?;
    let unary = params.unary_scores(x)?;
    Ok(max_product(params, &unary, config))
}

pub(crate) fn max_product(
    params: &ModelParams,
    unary: &[f64],
    config: &BpConfig,
) -> (Vec<Label>, BeliefState) {
    let m = params.num_labels();
    let potentials: Vec<[f64; 2]> = unary.iter().map(|&u| [u, -u]).collect();

    // Directed edges 2e (i→j) and 2e+1 (j→i) for each stored pair (i, j).
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, j, w) in params.alpha_entries() {
        incoming[j].push(edges.len());
        edges.push((i, j, w));
        incoming[i].push(edges.len());
        edges.push((j, i, w));
    }

    let mut messages = vec![[0.0_f64; 2]; edges.len()];
    let mut next = messages.clone();
    let mut iterations_run = 0;
    let mut converged = edges.is_empty();

    while !converged && iterations_run < config.max_iters {
        iterations_run += 1;
        let mut max_change = 0.0_f64;
        for (e, &(from, _, w)) in edges.iter().enumerate() {
            let reverse = e ^ 1;
            // h(y_from) = φ_from(y_from) + Σ_{k ∈ N(from) \ to} m_{k→from}(y_from)
            let mut h = potentials[from];
            for &inc in &incoming[from] {
                if inc != reverse {
                    h[0] += messages[inc][0];
                    h[1] += messages[inc][1];
                }
            }
            let mut out = [0.0; 2];
            for (t, ys) in STATES.iter().enumerate() {
                out[t] = (h[0] + w * STATES[0] * ys).max(h[1] + w * STATES[1] * ys);
            }
            let top = out[0].max(out[1]);
            out[0] -= top;
            out[1] -= top;
            if config.damping > 0.0 {
                for t in 0..2 {
                    out[t] = (1.0 - config.damping) * out[t] + config.damping * messages[e][t];
                }
            }
            max_change = max_change
                .max((out[0] - messages[e][0]).abs())
                .max((out[1] - messages[e][1]).abs());
            next[e] = out;
        }
        std::mem::swap(&mut messages, &mut next);
        converged = max_change < config.convergence_tol;
    }

    let beliefs: Vec<[f64; 2]> = (0..m)
        .map(|i| {
            let mut b = potentials[i];
            for &inc in &incoming[i] {
                b[0] += messages[inc][0];
                b[1] += messages[inc][1];
            }
            b
        })
        .collect();
    let labels = beliefs
        .iter()
        .map(|b| if b[0] >= b[1] { 1 } else { -1 })
        .collect();
    let messages = edges
        .iter()
        .zip(&messages)
        .map(|(&(from, to, _), &log_values)| DirectedMessage {
            from,
            to,
            log_values,
        })
        .collect();
    (
        labels,
        BeliefState {
            messages,
            beliefs,
            converged,
            iterations_run,
        },
    )
}

fn check_enumerable(params: &ModelParams) -> Result<()> {
    if params.num_labels() > MAX_ENUMERATION_LABELS {
        return Err(CorrLogError::TooManyLabels {
            num_labels: params.num_labels(),
            limit: MAX_ENUMERATION_LABELS,
        });
    }
    Ok(())
}

/// Labeling for enumeration code `c`: bit `m-1-i` set means label `i` is `-1`,
/// so ascending codes follow lexicographic order with `+1 < -1`.
fn decode(code: usize, m: usize, out: &mut [Label]) {
    for (i, v) in out.iter_mut().enumerate() {
        *v = if code >> (m - 1 - i) & 1 == 0 { 1 } else { -1 };
    }
}

/// Exact MAP labeling by enumeration (`m ≤ 20`).
pub fn map_bruteforce(params: &ModelParams, x: &[f64]) -> Result<Vec<Label>> {
    check_enumerable(params)?;
    let unary = params.unary_scores(x)?;
    let m = params.num_labels();
    let mut y = vec![1; m];
    let mut best = y.clone();
    let mut best_score = f64::NEG_INFINITY;
    for code in 0..1usize << m {
        decode(code, m, &mut y);
        let s = joint_score_from_unary(params, &unary, &y);
        if s > best_score {
            best_score = s;
            best.copy_from_slice(&y);
        }
    }
    Ok(best)
}

/// `score(y) - max_{y' ≠ y} score(y')`; positive iff `y` is the unique MAP.
pub fn margin(params: &ModelParams, x: &[f64], y: &[Label]) -> Result<f64> {
    check_enumerable(params)?;
    params.check_labels(y)?;
    let unary = params.unary_scores(x)?;
    let m = params.num_labels();
    let own = joint_score_from_unary(params, &unary, y);
    let mut probe = vec![1; m];
    let mut rival = f64::NEG_INFINITY;
    for code in 0..1usize << m {
        decode(code, m, &mut probe);
        if probe != y {
            rival = rival.max(joint_score_from_unary(params, &unary, &probe));
        }
    }
    if rival == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(own - rival)
}

/// Ramp loss of the margin: 1 below zero, `1 - f/γ` on `[0, γ)`, 0 above.
pub fn margin_loss(params: &ModelParams, x: &[f64], y: &[Label], gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(CorrLogError::config("gamma must be positive"));
    }
    Ok(ramp(margin(params, x, y)?, gamma))
}

pub(crate) fn ramp(f: f64, gamma: f64) -> f64 {
    if f < 0.0 {
        1.0
    } else if f < gamma {
        1.0 - f / gamma
    } else {
        0.0
    }
}
