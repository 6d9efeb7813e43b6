//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use corrlog_core::eval::{evaluate, predict_all};
use corrlog_core::objective::{surrogate, DenseParams};
use corrlog_core::optimizer::{train_corrlog_with_progress, train_ilrs_with_trace, TraceRecord};
use corrlog_core::{
    compute_metrics, export_label_graph, full_objective, generate_toy, map_bruteforce,
    predict_map_bp, smooth_gradient, smooth_objective, stability_experiment, BpConfig, Instance,
    ModelParams, MultilabelDataset, RegularizationConfig, ToySpec, TrainConfig, TrainTrace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn toy_config(epsilon: f64) -> TrainConfig {
    TrainConfig::with_reg(RegularizationConfig::new(0.001, 0.001, epsilon).unwrap())
}

struct ToyRun {
    seed: u64,
    ilrs_zero_one: f64,
    corrlog_zero_one: f64,
    ilrs_impossible: f64,
    corrlog_impossible: f64,
}

fn impossible_rate(preds: &[Vec<i8>]) -> f64 {
    preds.iter().filter(|y| y.as_slice() == [1, -1]).count() as f64 / preds.len() as f64
}

fn toy_runs() -> Vec<ToyRun> {
    let cfg = toy_config(0.0);
    let bp = BpConfig::default();
    (0..10)
        .map(|seed| {
            let (train, test) = generate_toy(&ToySpec {
                seed,
                ..ToySpec::default()
            })
            .unwrap();
            let (ilrs, _) = train_ilrs_with_trace(&train, &cfg).unwrap();
            let (corrlog, _) = train_corrlog_with_progress(&train, &cfg, &mut |_| {}).unwrap();
            let (p_ilrs, _) = predict_all(&ilrs, &test, &bp).unwrap();
            let (p_corr, _) = predict_all(&corrlog, &test, &bp).unwrap();
            ToyRun {
                seed,
                ilrs_zero_one: evaluate(&ilrs, &test, &bp).unwrap().zero_one_loss,
                corrlog_zero_one: evaluate(&corrlog, &test, &bp).unwrap().zero_one_loss,
                ilrs_impossible: impossible_rate(&p_ilrs),
                corrlog_impossible: impossible_rate(&p_corr),
            }
        })
        .collect()
}

fn criterion_1(runs: &[ToyRun], seconds: f64) -> Outcome {
    let n = runs.len() as f64;
    let ilrs = runs.iter().map(|r| r.ilrs_zero_one).sum::<f64>() / n;
    let corr = runs.iter().map(|r| r.corrlog_zero_one).sum::<f64>() / n;
    check((0.14..=0.26).contains(&ilrs), || {
        format!("ILRs mean 0-1 loss {ilrs:.4} outside [0.14, 0.26]")
    })?;
    check((0.03..=0.12).contains(&corr), || {
        format!("CorrLog mean 0-1 loss {corr:.4} outside [0.03, 0.12]")
    })?;
    for r in runs {
        check(r.corrlog_zero_one < r.ilrs_zero_one, || {
            format!(
                "seed {}: CorrLog {:.3} not below ILRs {:.3}",
                r.seed, r.corrlog_zero_one, r.ilrs_zero_one
            )
        })?;
    }
    check(seconds < 120.0, || format!("took {seconds:.1}s"))?;
    Ok(format!(
        "ILRs mean 0-1 {ilrs:.4}, CorrLog mean 0-1 {corr:.4}, CorrLog better on all {} seeds ({seconds:.1}s)",
        runs.len()
    ))
}

fn criterion_2(runs: &[ToyRun]) -> Outcome {
    for r in runs {
        check(r.corrlog_impossible <= 0.01, || {
            format!(
                "seed {}: CorrLog predicts (+1,-1) at rate {:.3}",
                r.seed, r.corrlog_impossible
            )
        })?;
    }
    let worst = runs
        .iter()
        .map(|r| r.corrlog_impossible)
        .fold(0.0, f64::max);
    let ilrs = runs.iter().map(|r| r.ilrs_impossible).sum::<f64>() / runs.len() as f64;
    Ok(format!(
        "CorrLog (+1,-1) rate at most {worst:.3} per seed; ILRs mean rate {ilrs:.3}"
    ))
}

fn random_problem(rng: &mut ChaCha8Rng, m: usize, d: usize, n: usize) -> MultilabelDataset {
    let instances = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            Instance::new(
                raw.iter().map(|v| v / norm).collect(),
                (0..m)
                    .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    MultilabelDataset::new(instances, d, m, None).unwrap()
}

fn random_params(
    rng: &mut ChaCha8Rng,
    m: usize,
    d: usize,
    scale: f64,
    alpha_scale: f64,
) -> ModelParams {
    let beta = (0..m * d).map(|_| rng.gen_range(-scale..scale)).collect();
    let mut alpha = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            alpha.push((i, j, rng.gen_range(-alpha_scale..alpha_scale)));
        }
    }
    ModelParams::from_parts(m, d, beta, alpha).unwrap()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut coords = 0usize;
    for trial in 0..100 {
        let m = rng.gen_range(1..=6);
        let d = rng.gen_range(1..=8);
        let n = rng.gen_range(1..=20);
        let ds = random_problem(&mut rng, m, d, n);
        let reg = RegularizationConfig::new(
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.0..2.0),
        )
        .unwrap();
        let params = random_params(&mut rng, m, d, 1.5, 1.5);
        let grad = smooth_gradient(&params, &ds, &reg).unwrap();
        let f = |p: &ModelParams| smooth_objective(p, &ds, &reg).unwrap();
        let mut compare = |analytic: f64, plus: ModelParams, minus: ModelParams, what: String| {
            let fd = (f(&plus) - f(&minus)) / (2.0 * h);
            let rel = (analytic - fd).abs() / analytic.abs().max(1.0);
            worst = worst.max(rel);
            coords += 1;
            check(rel < 1e-5, || {
                format!("trial {trial} {what}: analytic {analytic} vs fd {fd}")
            })
        };
        for i in 0..m {
            for k in 0..d {
                let v = params.beta_row(i)[k];
                let (mut p, mut q) = (params.clone(), params.clone());
                p.set_beta(i, k, v + h).unwrap();
                q.set_beta(i, k, v - h).unwrap();
                compare(grad.beta(i, k), p, q, format!("beta[{i}][{k}]"))?;
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                let v = params.alpha(i, j);
                let (mut p, mut q) = (params.clone(), params.clone());
                p.set_alpha(i, j, v + h).unwrap();
                q.set_alpha(i, j, v - h).unwrap();
                compare(grad.alpha(i, j), p, q, format!("alpha[{i}][{j}]"))?;
            }
        }
    }
    Ok(format!(
        "{coords} coordinates over 100 problems, worst relative error {worst:.2e}"
    ))
}

/// Checks the subgradient fixed-point conditions at a converged model.
fn fixed_point_violation(
    params: &ModelParams,
    ds: &MultilabelDataset,
    cfg: &TrainConfig,
    trace: &TrainTrace,
    coupled: bool,
) -> Option<String> {
    let grad = smooth_gradient(params, ds, &cfg.reg).unwrap();
    let slack = 10.0 * cfg.rel_tol * trace.residual_scale;
    let test = |w: f64, g: f64, l1: f64, what: String| -> Option<String> {
        let bad = if w != 0.0 {
            (g + l1 * w.signum()).abs() >= slack
        } else {
            g.abs() > l1 + slack
        };
        bad.then(|| format!("{what}: value {w}, gradient {g}, l1 weight {l1}"))
    };
    let (l1b, l1a) = (
        cfg.reg.lambda1 * cfg.reg.epsilon,
        cfg.reg.lambda2 * cfg.reg.epsilon,
    );
    for i in 0..params.num_labels() {
        for k in 0..params.num_features() {
            if let Some(e) = test(
                params.beta_row(i)[k],
                grad.beta(i, k),
                l1b,
                format!("beta[{i}][{k}]"),
            ) {
                return Some(e);
            }
        }
        if coupled {
            for j in i + 1..params.num_labels() {
                if let Some(e) = test(
                    params.alpha(i, j),
                    grad.alpha(i, j),
                    l1a,
                    format!("alpha[{i}][{j}]"),
                ) {
                    return Some(e);
                }
            }
        }
    }
    None
}

fn eight_label_dataset(seed: u64, n: usize) -> MultilabelDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 6;
    let w: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let instances = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x: Vec<f64> = raw.iter().map(|v| v / (d as f64).sqrt()).collect();
            let mut y = Vec::with_capacity(8);
            for wi in &w {
                let s: f64 =
                    wi.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.3..0.3);
                y.push(if s >= 0.0 { 1 } else { -1 });
            }
            // Labels 4..8 copy labels 0..4 with occasional flips, so only
            // four pairs are genuinely coupled.
            for i in 0..4 {
                let flip = rng.gen_bool(0.1);
                y.push(if flip { -y[i] } else { y[i] });
            }
            Instance::new(x, y).unwrap()
        })
        .collect();
    MultilabelDataset::new(instances, d, 8, None).unwrap()
}

fn criterion_4() -> Outcome {
    let mut runs = 0;
    let mut steps = 0;
    let mut problems: Vec<(String, MultilabelDataset, TrainConfig)> = Vec::new();
    for seed in 0..2 {
        let (train, _) = generate_toy(&ToySpec {
            seed,
            n_train: 200,
            n_test: 1,
            ..ToySpec::default()
        })
        .unwrap();
        for eps in [0.0, 1.0] {
            problems.push((
                format!("toy seed {seed} eps {eps}"),
                train.clone(),
                toy_config(eps),
            ));
        }
    }
    let mut no_accel = TrainConfig::with_reg(RegularizationConfig::new(0.01, 0.01, 1.0).unwrap());
    no_accel.accelerate = false;
    no_accel.max_iters = 20_000;
    problems.push((
        "8-label eps 1 no momentum".into(),
        eight_label_dataset(5, 150),
        no_accel,
    ));
    problems.push((
        "8-label eps 0.1".into(),
        eight_label_dataset(6, 150),
        toy_config(0.1),
    ));
    let mut strong = TrainConfig::with_reg(RegularizationConfig::new(0.05, 0.02, 1.0).unwrap());
    strong.rel_tol = 1e-9;
    problems.push((
        "8-label strong penalty".into(),
        eight_label_dataset(7, 100),
        strong,
    ));

    for (name, ds, cfg) in &problems {
        for coupled in [true, false] {
            let mut records: Vec<TraceRecord> = Vec::new();
            let (params, trace) = if coupled {
                train_corrlog_with_progress(ds, cfg, &mut |r| records.push(*r)).unwrap()
            } else {
                let (p, t) = train_ilrs_with_trace(ds, cfg).unwrap();
                records = t.records.clone();
                (p, t)
            };
            runs += 1;
            steps += records.len() - 1;
            for w in records.windows(2) {
                check(w[1].objective <= w[0].objective + 1e-12, || {
                    format!(
                        "{name} (coupled {coupled}): objective rose at iteration {}",
                        w[1].iteration
                    )
                })?;
                check(w[1].surrogate_gap >= -1e-10, || {
                    format!(
                        "{name}: surrogate below objective at iteration {}",
                        w[1].iteration
                    )
                })?;
            }
            check(trace.converged, || {
                format!("{name} (coupled {coupled}) did not converge")
            })?;
            if let Some(e) = fixed_point_violation(&params, ds, cfg, &trace, coupled) {
                return Err(format!("{name} (coupled {coupled}): {e}"));
            }
            let obj = full_objective(&params, ds, &cfg.reg).unwrap();
            check(
                (obj - trace.final_objective()).abs() <= 1e-12 * obj.abs().max(1.0),
                || format!("{name}: reported objective differs from recomputed"),
            )?;
            let dense = DenseParams::from_model(&params);
            let g = smooth_gradient(&params, ds, &cfg.reg).unwrap();
            let s = smooth_objective(&params, ds, &cfg.reg).unwrap();
            let at_anchor = surrogate(&dense, &dense, s, &g, 0.1, &cfg.reg);
            check(
                (at_anchor - obj).abs() <= 1e-12 * obj.abs().max(1.0),
                || {
                    format!(
                        "{name}: surrogate at its anchor {at_anchor} differs from objective {obj}"
                    )
                },
            )?;
        }
    }
    Ok(format!(
        "{runs} training runs, {steps} accepted steps monotone, all fixed points verified"
    ))
}

fn unary_params(
    rng: &mut ChaCha8Rng,
    m: usize,
    edges: &[(usize, usize, f64)],
) -> (ModelParams, Vec<f64>) {
    let d = 3;
    let beta = (0..m * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let params = ModelParams::from_parts(m, d, beta, edges.iter().copied()).unwrap();
    let x = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (params, x)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bp = BpConfig::default();
    for trial in 0..200 {
        let m = rng.gen_range(1..=10);
        let mut edges = Vec::new();
        for j in 1..m {
            // Each node links to one earlier node or starts a new tree.
            if rng.gen_bool(0.8) {
                let i = rng.gen_range(0..j);
                edges.push((i, j, rng.gen_range(-2.0..2.0)));
            }
        }
        let (params, x) = unary_params(&mut rng, m, &edges);
        let (y, state) = predict_map_bp(&params, &x, &bp).unwrap();
        check(state.converged, || {
            format!("forest trial {trial}: BP did not converge")
        })?;
        let exact = map_bruteforce(&params, &x).unwrap();
        check(y == exact, || {
            format!("forest trial {trial}: BP {y:?} vs exact {exact:?}")
        })?;
    }
    let mut agree = 0;
    for _ in 0..500 {
        let m = rng.gen_range(3..=10);
        let mut edges = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                if rng.gen_bool(0.6) {
                    edges.push((i, j, rng.gen_range(-0.2..0.2)));
                }
            }
        }
        let (params, x) = unary_params(&mut rng, m, &edges);
        let (y, _) = predict_map_bp(&params, &x, &bp).unwrap();
        agree += usize::from(y == map_bruteforce(&params, &x).unwrap());
    }
    let rate = agree as f64 / 500.0;
    check(rate >= 0.95, || {
        format!("loopy agreement {rate:.3} below 0.95")
    })?;
    Ok(format!(
        "200/200 forests exact; loopy weak-coupling agreement {rate:.3}"
    ))
}

fn criterion_6() -> Outcome {
    let (train, test) = generate_toy(&ToySpec::default()).unwrap();
    let mut summary = Vec::new();
    for eps in [0.0, 1.0] {
        let mut cfg = toy_config(eps);
        cfg.rel_tol = 1e-9;
        let report = stability_experiment(&train, test.instances(), &cfg, 10, 6).unwrap();
        check((report.bound - 32.0).abs() < 1e-9, || {
            format!("bound {}", report.bound)
        })?;
        check(
            report.base_converged && report.trials.iter().all(|t| t.converged),
            || format!("eps {eps}: a fit did not converge at tolerance 1e-9"),
        )?;
        check(report.trials.len() == 10 && report.all_within_bound, || {
            format!(
                "eps {eps}: max distance {} exceeds {}",
                report.max_distance, report.bound
            )
        })?;
        summary.push(format!(
            "eps {eps}: max distance {:.3e}",
            report.max_distance
        ));
    }
    Ok(format!(
        "10 trials each within bound 32 ({})",
        summary.join(", ")
    ))
}

fn edge_count(ds: &MultilabelDataset, lambda: f64, eps: f64) -> usize {
    let cfg = TrainConfig::with_reg(RegularizationConfig::new(lambda, lambda, eps).unwrap());
    let (params, trace) = train_corrlog_with_progress(ds, &cfg, &mut |_| {}).unwrap();
    assert!(trace.converged);
    let names: Vec<String> = ds.label_names().to_vec();
    export_label_graph(&params, &names, 1e-8)
        .unwrap()
        .edges
        .len()
}

fn criterion_7() -> Outcome {
    let (toy, _) = generate_toy(&ToySpec::default()).unwrap();
    let (toy1, toy0) = (edge_count(&toy, 0.001, 1.0), edge_count(&toy, 0.001, 0.0));
    check(toy0 == 1, || {
        format!("toy eps 0 has {toy0} edges, expected all pairs")
    })?;
    check(toy1 <= toy0, || {
        format!("toy: eps 1 edges {toy1} > eps 0 edges {toy0}")
    })?;
    let eight = eight_label_dataset(11, 300);
    let counts: Vec<usize> = [1.0, 0.1, 0.0]
        .iter()
        .map(|&e| edge_count(&eight, 0.001, e))
        .collect();
    check(counts[2] == 28, || {
        format!("8-label eps 0 has {} edges, expected 28", counts[2])
    })?;
    check(counts[0] <= counts[2], || {
        format!(
            "8-label: eps 1 edges {} > eps 0 edges {}",
            counts[0], counts[2]
        )
    })?;
    check(counts[0] <= counts[1] && counts[1] <= counts[2], || {
        format!("8-label edge counts not monotone in eps: {counts:?}")
    })?;
    // At the default penalty the ℓ₁ dead zone is smaller than the sampling
    // noise in the pair gradients, so also check a heavier penalty where
    // pruning actually happens.
    let heavy: Vec<usize> = [1.0, 0.1, 0.0]
        .iter()
        .map(|&e| edge_count(&eight, 0.03, e))
        .collect();
    check(
        heavy[0] < heavy[2] && heavy[0] <= heavy[1] && heavy[1] <= heavy[2],
        || format!("8-label at lambda 0.03: edge counts {heavy:?} not strictly sparser at eps 1"),
    )?;
    Ok(format!(
        "toy edges eps1/eps0 = {toy1}/{toy0}; 8-label edges eps 1/0.1/0 = {}/{}/{} at lambda 0.001, {}/{}/{} at lambda 0.03",
        counts[0], counts[1], counts[2], heavy[0], heavy[1], heavy[2]
    ))
}

fn criterion_8() -> Outcome {
    struct Fixture {
        name: &'static str,
        truth: Vec<Vec<i8>>,
        pred: Vec<Vec<i8>>,
        expected: [f64; 6],
    }
    let fixtures = [
        Fixture {
            name: "worked example",
            truth: vec![vec![1, -1, 1]],
            pred: vec![vec![1, 1, 1]],
            // per label F1: 1, 0, 1; micro tp 2, fp 1, fn 0
            expected: [1.0 / 3.0, 1.0, 2.0 / 3.0, 4.0 / 5.0, 2.0 / 3.0, 4.0 / 5.0],
        },
        Fixture {
            name: "perfect",
            truth: vec![vec![1, -1], vec![-1, 1], vec![1, 1]],
            pred: vec![vec![1, -1], vec![-1, 1], vec![1, 1]],
            expected: [0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
        },
        Fixture {
            name: "complement",
            truth: vec![vec![1, -1], vec![-1, 1]],
            pred: vec![vec![-1, 1], vec![1, -1]],
            expected: [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        },
        Fixture {
            name: "all negative",
            truth: vec![vec![-1, -1, -1], vec![-1, -1, -1]],
            pred: vec![vec![-1, -1, -1], vec![-1, -1, -1]],
            expected: [0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
        },
        Fixture {
            name: "mixed four instances",
            truth: vec![
                vec![1, 1, -1, -1],
                vec![1, -1, 1, -1],
                vec![-1, -1, -1, 1],
                vec![1, 1, 1, 1],
            ],
            pred: vec![
                vec![1, -1, -1, -1],
                vec![1, -1, 1, -1],
                vec![-1, 1, -1, 1],
                vec![1, 1, -1, -1],
            ],
            // wrong labels 1 + 0 + 1 + 2 = 4 of 16; wrong instances 3 of 4
            // Jaccard 1/2, 1, 1/2, 2/4; example F1 2/3, 1, 2/3, 4/6
            // per label (tp, fp, fn): (3,0,0) (1,1,1) (1,0,1) (1,0,1)
            // F1: 1, 1/2, 2/3, 2/3; micro tp 6, fp 1, fn 3
            expected: [
                0.25,
                0.75,
                (0.5 + 1.0 + 0.5 + 0.5) / 4.0,
                (2.0 / 3.0 + 1.0 + 2.0 / 3.0 + 4.0 / 6.0) / 4.0,
                (1.0 + 0.5 + 2.0 / 3.0 + 2.0 / 3.0) / 4.0,
                12.0 / 16.0,
            ],
        },
        Fixture {
            name: "empty prediction",
            truth: vec![vec![1, -1], vec![-1, -1]],
            pred: vec![vec![-1, -1], vec![-1, -1]],
            // label 2 never positive anywhere counts as F1 1
            expected: [0.25, 0.5, 0.5, 0.5, 0.5, 0.0],
        },
    ];
    let names = [
        "hamming",
        "zero-one",
        "accuracy",
        "example F1",
        "macro F1",
        "micro F1",
    ];
    for f in &fixtures {
        let got = compute_metrics(&f.truth, &f.pred).unwrap().values();
        for k in 0..6 {
            check((got[k] - f.expected[k]).abs() <= 2.0 * f64::EPSILON, || {
                format!(
                    "{} {}: got {} expected {}",
                    f.name, names[k], got[k], f.expected[k]
                )
            })?;
        }
    }
    Ok(format!(
        "{} fixtures match hand-computed values",
        fixtures.len()
    ))
}

/// Runs the `cv` subcommand on a user-supplied MULAN-scene file when
/// `CORRLOG_SCENE_FILE` points at one, otherwise on a generated file with
/// the same shape (294 features, 6 labels, sparse format).
fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (path, format, source) = match std::env::var("CORRLOG_SCENE_FILE") {
        Ok(p) => {
            let fmt = std::env::var("CORRLOG_SCENE_FORMAT").unwrap_or_else(|_| "sparse".into());
            (std::path::PathBuf::from(p), fmt, "supplied file")
        }
        Err(_) => {
            let path = dir.path().join("scene_like.txt");
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut text = String::from("# labels=6 features=294\n");
            for _ in 0..60 {
                let x: Vec<f64> = (0..294).map(|_| rng.gen_range(0.0..1.0)).collect();
                let mut labels: Vec<String> = (0..6)
                    .filter(|&l| x[l * 40] + x[l * 40 + 1] > 1.0)
                    .map(|l| (l + 1).to_string())
                    .collect();
                if labels.is_empty() {
                    labels.push("1".into());
                }
                let feats: Vec<String> = x
                    .iter()
                    .enumerate()
                    .map(|(k, v)| format!("{}:{v}", k + 1))
                    .collect();
                text.push_str(&format!("{} {}\n", labels.join(","), feats.join(" ")));
            }
            std::fs::write(&path, text).map_err(|e| e.to_string())?;
            (path, "sparse".to_string(), "generated scene-shaped file")
        }
    };
    let mut out = Vec::new();
    let mut err = Vec::new();
    let args = [
        "corrlog",
        "cv",
        path.to_str().unwrap(),
        "--format",
        format.as_str(),
        "--folds",
        "5",
        "--json",
    ];
    let code = corrlog_core::cli::run(args, &mut out, &mut err);
    check(code == 0, || {
        format!("cv exited {code}: {}", String::from_utf8_lossy(&err))
    })?;
    let doc: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let metrics = &doc["result"]["primary"]["metrics"];
    for name in corrlog_core::eval::METRIC_NAMES {
        check(
            metrics[name]["mean"].is_f64() && metrics[name]["std"].is_f64(),
            || format!("missing mean/std for {name}"),
        )?;
    }
    Ok(format!(
        "cv ran the 5-fold protocol on a {source} and reported all six metrics with mean and std"
    ))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {id} ({title}) [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {id} ({title}) [{secs:.1}s]: {detail}");
            }
        }
    };

    let start = Instant::now();
    let runs = catch_unwind(toy_runs).ok();
    let toy_seconds = start.elapsed().as_secs_f64();
    report(1, "toy reproduction", &mut || match &runs {
        Some(r) => criterion_1(r, toy_seconds),
        None => Err("toy training panicked".into()),
    });
    report(2, "impossible combination", &mut || match &runs {
        Some(r) => criterion_2(r),
        None => Err("toy training panicked".into()),
    });
    report(3, "gradient oracle", &mut criterion_3);
    report(4, "descent and optimality", &mut criterion_4);
    report(5, "MAP oracle equivalence", &mut criterion_5);
    report(6, "stability bound", &mut criterion_6);
    report(7, "sparsity", &mut criterion_7);
    report(8, "metric fixtures", &mut criterion_8);
    report(9, "cross-validation on scene-format data", &mut criterion_9);

    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
