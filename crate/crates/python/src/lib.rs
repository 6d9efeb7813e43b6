//! Python bindings for the CorrLog multilabel classifier.
//!
//! Feature vectors are lists of floats, label vectors lists of `+1`/`-1`.
//! Structured results (training summaries, metrics, cross-validation
//! reports) come back as plain dicts.

use std::collections::BTreeMap;

use corrlog_core as core;
use corrlog_core::data::{load_dataset_with_preprocessor, DEFAULT_GRAPH_THRESHOLD};
use corrlog_core::eval::predict_all;
use corrlog_core::optimizer::{train_corrlog_with_progress, train_ilrs_with_trace};
use corrlog_core::{
    BpConfig, CorrLogError, DataFormat, DatasetSpec, Instance, ModelDocument, ModelParams,
    MultilabelDataset, Normalization, RegularizationConfig, ToySpec, TrainConfig, Trainer,
};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: CorrLogError) -> PyErr {
    match err {
        CorrLogError::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn from_json<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?
        .call_method1("loads", (value.to_string(),))
}

fn bp_config(max_iters: usize, damping: f64, tol: f64) -> PyResult<BpConfig> {
    let cfg = BpConfig {
        max_iters,
        damping,
        convergence_tol: tol,
    };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// Fitted or hand-built CorrLog parameters.
#[pyclass(name = "Model", module = "corrlog", skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel {
    inner: ModelParams,
    reg: RegularizationConfig,
    document: Option<ModelDocument>,
}

impl PyModel {
    fn wrap(inner: ModelParams, reg: RegularizationConfig) -> Self {
        Self {
            inner,
            reg,
            document: None,
        }
    }
}

#[pymethods]
impl PyModel {
    /// All-zero parameters for `num_labels` labels and `num_features` features.
    #[staticmethod]
    fn zeros(num_labels: usize, num_features: usize) -> PyResult<Self> {
        let p = ModelParams::zeros(num_labels, num_features).map_err(to_py)?;
        Ok(Self::wrap(p, RegularizationConfig::default()))
    }

    /// Builds a model from a row-major coefficient list and `(i, j, w)` pairs.
    #[staticmethod]
    fn from_parts(
        num_labels: usize,
        num_features: usize,
        beta: Vec<f64>,
        alpha: Vec<(usize, usize, f64)>,
    ) -> PyResult<Self> {
        let p = ModelParams::from_parts(num_labels, num_features, beta, alpha).map_err(to_py)?;
        Ok(Self::wrap(p, RegularizationConfig::default()))
    }

    #[getter]
    fn num_labels(&self) -> usize {
        self.inner.num_labels()
    }

    #[getter]
    fn num_features(&self) -> usize {
        self.inner.num_features()
    }

    /// Coefficients as one list per label.
    fn beta(&self) -> Vec<Vec<f64>> {
        (0..self.inner.num_labels())
            .map(|i| self.inner.beta_row(i).to_vec())
            .collect()
    }

    /// Non-zero pair weights as `(i, j, w)` with `i < j`.
    fn alpha(&self) -> Vec<(usize, usize, f64)> {
        self.inner.alpha_entries().collect()
    }

    fn set_beta(&mut self, label: usize, feature: usize, value: f64) -> PyResult<()> {
        self.inner.set_beta(label, feature, value).map_err(to_py)
    }

    fn set_alpha(&mut self, i: usize, j: usize, value: f64) -> PyResult<()> {
        self.inner.set_alpha(i, j, value).map_err(to_py)
    }

    fn joint_score(&self, x: Vec<f64>, y: Vec<i8>) -> PyResult<f64> {
        core::joint_score(&self.inner, &x, &y).map_err(to_py)
    }

    /// `p(y_i | y without i, x)` for the label value `y[i]`.
    fn conditional_prob(&self, x: Vec<f64>, y: Vec<i8>, i: usize) -> PyResult<f64> {
        core::conditional_label_prob(&self.inner, &x, &y, i).map_err(to_py)
    }

    /// MAP labels by max-product belief propagation; returns
    /// `(labels, converged)`.
    #[pyo3(signature = (x, max_iters = 50, damping = 0.0, tol = 1e-9))]
    fn predict(
        &self,
        x: Vec<f64>,
        max_iters: usize,
        damping: f64,
        tol: f64,
    ) -> PyResult<(Vec<i8>, bool)> {
        let cfg = bp_config(max_iters, damping, tol)?;
        let (y, state) = core::predict_map_bp(&self.inner, &x, &cfg).map_err(to_py)?;
        Ok((y, state.converged))
    }

    /// Exact MAP labels by enumeration (at most 20 labels).
    fn predict_exact(&self, x: Vec<f64>) -> PyResult<Vec<i8>> {
        core::map_bruteforce(&self.inner, &x).map_err(to_py)
    }

    /// Score gap between `y` and the best other labeling.
    fn margin(&self, x: Vec<f64>, y: Vec<i8>) -> PyResult<f64> {
        core::margin(&self.inner, &x, &y).map_err(to_py)
    }

    /// Label graph in DOT format.
    #[pyo3(signature = (label_names = None, threshold = DEFAULT_GRAPH_THRESHOLD))]
    fn label_graph(&self, label_names: Option<Vec<String>>, threshold: f64) -> PyResult<String> {
        let names = label_names.unwrap_or_else(|| {
            (1..=self.inner.num_labels())
                .map(|i| format!("l{i}"))
                .collect()
        });
        let g = core::export_label_graph(&self.inner, &names, threshold).map_err(to_py)?;
        Ok(g.to_dot())
    }

    /// Model document text, as written by the command-line tool.
    fn to_json(&self) -> PyResult<String> {
        match &self.document {
            Some(doc) => {
                let fresh = ModelDocument::new(&self.inner, &self.reg);
                let mut doc = doc.clone();
                doc.beta = fresh.beta;
                doc.alpha = fresh.alpha;
                doc.to_text().map_err(to_py)
            }
            None => core::save_model(&self.inner, &self.reg, &BTreeMap::new()).map_err(to_py),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc = ModelDocument::parse(text).map_err(to_py)?;
        let inner = doc.params().map_err(to_py)?;
        Ok(Self {
            inner,
            reg: doc.regularization,
            document: Some(doc),
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Self::from_json(&text)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(num_labels={}, num_features={}, nnz_alpha={}, nnz_beta={})",
            self.inner.num_labels(),
            self.inner.num_features(),
            self.inner.nnz_alpha(),
            self.inner.nnz_beta()
        )
    }
}

/// Labelled multilabel data.
#[pyclass(name = "Dataset", module = "corrlog", skip_from_py_object)]
#[derive(Clone)]
pub struct PyDataset {
    inner: MultilabelDataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (features, labels, label_names = None))]
    fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<Vec<i8>>,
        label_names: Option<Vec<String>>,
    ) -> PyResult<Self> {
        if features.len() != labels.len() {
            return Err(PyValueError::new_err(
                "features and labels differ in length",
            ));
        }
        if features.is_empty() {
            return Err(to_py(CorrLogError::EmptyDataset));
        }
        let (d, m) = (features[0].len(), labels[0].len());
        let instances = features
            .into_iter()
            .zip(labels)
            .map(|(x, y)| Instance::new(x, y))
            .collect::<core::Result<Vec<_>>>()
            .map_err(to_py)?;
        let inner = MultilabelDataset::new(instances, d, m, label_names).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Reads a dense CSV (`format="dense"`) or sparse (`format="sparse"`)
    /// file and applies max-norm scaling and the bias feature by default.
    #[staticmethod]
    #[pyo3(signature = (path, format = "dense", normalize = true, add_bias = true))]
    fn load(path: &str, format: &str, normalize: bool, add_bias: bool) -> PyResult<Self> {
        let format = match format {
            "dense" => DataFormat::DenseCsv,
            "sparse" => DataFormat::SparseMultilabel {
                num_labels: None,
                num_features: None,
            },
            other => return Err(PyValueError::new_err(format!("unknown format {other:?}"))),
        };
        let spec = DatasetSpec {
            format,
            normalization: if normalize {
                Normalization::GlobalMaxNorm
            } else {
                Normalization::None
            },
            add_bias,
        };
        let (inner, _) = load_dataset_with_preprocessor(path, &spec).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn num_labels(&self) -> usize {
        self.inner.num_labels()
    }

    #[getter]
    fn num_features(&self) -> usize {
        self.inner.num_features()
    }

    #[getter]
    fn label_names(&self) -> Vec<String> {
        self.inner.label_names().to_vec()
    }

    fn features(&self) -> Vec<Vec<f64>> {
        self.inner
            .instances()
            .iter()
            .map(|i| i.features.clone())
            .collect()
    }

    fn labels(&self) -> Vec<Vec<i8>> {
        self.inner
            .instances()
            .iter()
            .map(|i| i.labels.clone())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, num_features={}, num_labels={})",
            self.inner.len(),
            self.inner.num_features(),
            self.inner.num_labels()
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn train_config(
    lambda1: f64,
    lambda2: f64,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
    accelerate: bool,
) -> PyResult<TrainConfig> {
    let reg = RegularizationConfig::new(lambda1, lambda2, epsilon).map_err(to_py)?;
    let mut cfg = TrainConfig::with_reg(reg);
    cfg.max_iters = max_iters;
    cfg.rel_tol = tol;
    cfg.accelerate = accelerate;
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// Fits a model; returns `(model, summary)`.
#[pyfunction]
#[pyo3(signature = (dataset, lambda1 = 0.001, lambda2 = 0.001, epsilon = 1.0, max_iters = 5000, tol = 1e-7, accelerate = true, ilrs = false))]
#[allow(clippy::too_many_arguments)]
fn train<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    lambda1: f64,
    lambda2: f64,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
    accelerate: bool,
    ilrs: bool,
) -> PyResult<(PyModel, Bound<'py, PyAny>)> {
    let cfg = train_config(lambda1, lambda2, epsilon, max_iters, tol, accelerate)?;
    let (params, trace) = if ilrs {
        train_ilrs_with_trace(&dataset.inner, &cfg)
    } else {
        train_corrlog_with_progress(&dataset.inner, &cfg, &mut |_| {})
    }
    .map_err(to_py)?;
    let summary = serde_json::json!({
        "final_objective": trace.final_objective(),
        "iterations": trace.iterations,
        "converged": trace.converged,
        "optimality_residual": trace.optimality_residual,
        "nnz_alpha": params.nnz_alpha(),
        "nnz_beta": params.nnz_beta(),
    });
    Ok((PyModel::wrap(params, cfg.reg), from_json(py, &summary)?))
}

/// BP predictions for every instance of a dataset.
#[pyfunction]
#[pyo3(signature = (model, dataset, max_iters = 50, damping = 0.0, tol = 1e-9))]
fn predict(
    model: &PyModel,
    dataset: &PyDataset,
    max_iters: usize,
    damping: f64,
    tol: f64,
) -> PyResult<Vec<Vec<i8>>> {
    let cfg = bp_config(max_iters, damping, tol)?;
    let (preds, _) = predict_all(&model.inner, &dataset.inner, &cfg).map_err(to_py)?;
    Ok(preds)
}

/// The six multilabel metrics as a dict.
#[pyfunction]
fn metrics<'py>(
    py: Python<'py>,
    y_true: Vec<Vec<i8>>,
    y_pred: Vec<Vec<i8>>,
) -> PyResult<Bound<'py, PyAny>> {
    let report = core::compute_metrics(&y_true, &y_pred).map_err(to_py)?;
    from_json(
        py,
        &serde_json::to_value(&report).map_err(|e| to_py(e.into()))?,
    )
}

/// The two-label unit-disc toy problem as `(train, test)`.
#[pyfunction]
#[pyo3(signature = (seed = 0, n_train = 500, n_test = 500, add_bias = true))]
fn generate_toy(
    seed: u64,
    n_train: usize,
    n_test: usize,
    add_bias: bool,
) -> PyResult<(PyDataset, PyDataset)> {
    let (train, test) = core::generate_toy(&ToySpec {
        seed,
        n_train,
        n_test,
        add_bias,
        ..ToySpec::default()
    })
    .map_err(to_py)?;
    Ok((PyDataset { inner: train }, PyDataset { inner: test }))
}

/// k-fold cross-validation; with `compare` the other trainer is run on the
/// same folds and paired t-tests are attached.
#[pyfunction]
#[pyo3(signature = (dataset, folds = 5, seed = 0, ilrs = false, compare = true, lambda1 = 0.001, lambda2 = 0.001, epsilon = 1.0))]
#[allow(clippy::too_many_arguments)]
fn cross_validate<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    folds: usize,
    seed: u64,
    ilrs: bool,
    compare: bool,
    lambda1: f64,
    lambda2: f64,
    epsilon: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = train_config(lambda1, lambda2, epsilon, 5000, 1e-7, true)?;
    let bp = BpConfig::default();
    let (first, second) = if ilrs {
        (Trainer::Ilrs, Trainer::CorrLog)
    } else {
        (Trainer::CorrLog, Trainer::Ilrs)
    };
    let mut result =
        core::cross_validate(&dataset.inner, folds, first, &cfg, &bp, seed).map_err(to_py)?;
    if compare {
        let other =
            core::cross_validate(&dataset.inner, folds, second, &cfg, &bp, seed).map_err(to_py)?;
        result.compare_with(&other).map_err(to_py)?;
    }
    from_json(py, &result.to_json())
}

#[pymodule]
fn corrlog(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(generate_toy, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    Ok(())
}
