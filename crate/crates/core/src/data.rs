//! Dataset files, preprocessing, the two-label toy generator, model
//! documents and label-graph export.
//!
//! Two dataset formats are read:
//!
//! * **dense CSV**: a header `f1,f2,...|l1,l2,...` naming the feature and
//!   label columns, then one row per instance holding the feature values
//!   followed by the labels (`1`/`+1` positive, `0`/`-1` negative).
//! * **sparse multilabel**: one instance per line, `2,5 1:0.3 7:-1.2`: a
//!   comma-separated list of positive labels, then `index:value` features.
//!   Both lists are 1-based. A line whose first token is a feature has no
//!   positive labels. An optional header `# labels=M features=D` fixes the
//!   dimensions; otherwise they are inferred from the largest indices.
//!
//! Lines that are empty or start with `#` (other than the sparse header)
//! are skipped in both formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{CorrLogError, Result};
use crate::model::{Instance, Label, ModelParams, MultilabelDataset};
use crate::objective::RegularizationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataFormat {
    DenseCsv,
    SparseMultilabel {
        num_labels: Option<usize>,
        num_features: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    None,
    /// Divide every feature vector by the largest training-set ℓ₂ norm.
    #[default]
    GlobalMaxNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub format: DataFormat,
    pub normalization: Normalization,
    pub add_bias: bool,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            format: DataFormat::DenseCsv,
            normalization: Normalization::GlobalMaxNorm,
            add_bias: true,
        }
    }
}

/// Feature transform fitted on training data and reused on test data.
///
/// `x ↦ x / scale`, then with `add_bias` the constant 1 is appended and the
/// whole vector is multiplied by `1/√2`, keeping `‖x‖ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub scale: f64,
    pub add_bias: bool,
}

impl Preprocessor {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            add_bias: false,
        }
    }

    pub fn fit(raw: &MultilabelDataset, normalization: Normalization, add_bias: bool) -> Self {
        let scale = match normalization {
            Normalization::None => 1.0,
            Normalization::GlobalMaxNorm => {
                let max = raw
                    .instances()
                    .iter()
                    .map(|i| i.features.iter().map(|v| v * v).sum::<f64>().sqrt())
                    .fold(0.0, f64::max);
                if max > 0.0 && max.is_finite() {
                    max
                } else {
                    1.0
                }
            }
        };
        Self { scale, add_bias }
    }

    /// Feature count after the transform.
    pub fn output_dim(&self, raw_dim: usize) -> usize {
        raw_dim + usize::from(self.add_bias)
    }

    pub fn transform(&self, features: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = features.iter().map(|v| v / self.scale).collect();
        if self.add_bias {
            out.push(1.0);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            out.iter_mut().for_each(|v| *v *= r);
        }
        out
    }

    pub fn apply(&self, raw: &MultilabelDataset) -> Result<MultilabelDataset> {
        let instances = raw
            .instances()
            .iter()
            .map(|i| Instance {
                features: self.transform(&i.features),
                labels: i.labels.clone(),
            })
            .collect();
        MultilabelDataset::new(
            instances,
            self.output_dim(raw.num_features()),
            raw.num_labels(),
            Some(raw.label_names().to_vec()),
        )
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> CorrLogError {
    CorrLogError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_label(token: &str) -> Option<Label> {
    match token.trim() {
        "1" | "+1" | "1.0" | "+1.0" => Some(1),
        "0" | "-1" | "0.0" | "-1.0" => Some(-1),
        _ => None,
    }
}

fn parse_float(token: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a number: {token:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value {token:?}")));
    }
    Ok(v)
}

/// Parses dense CSV text. `path` only labels error messages.
pub fn parse_dense_csv(text: &str, path: &Path) -> Result<MultilabelDataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing header"))?;
    let (feat, lab) = header.split_once('|').ok_or_else(|| {
        parse_err(
            path,
            hline,
            "header must split features and labels with '|'",
        )
    })?;
    let names = |s: &str| -> Vec<String> {
        s.split(',')
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect()
    };
    let feature_names = names(feat);
    let label_names = names(lab);
    let (d, m) = (feature_names.len(), label_names.len());
    if d == 0 || m == 0 {
        return Err(parse_err(
            path,
            hline,
            "header needs at least one feature and one label",
        ));
    }
    let mut instances = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + m {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {} fields, found {}", d + m, fields.len()),
            ));
        }
        let features = fields[..d]
            .iter()
            .map(|t| parse_float(t, path, lineno))
            .collect::<Result<Vec<_>>>()?;
        let labels = fields[d..]
            .iter()
            .map(|t| {
                parse_label(t)
                    .ok_or_else(|| parse_err(path, lineno, format!("unknown label symbol {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        instances.push(Instance { features, labels });
    }
    if instances.is_empty() {
        return Err(parse_err(path, hline, "no data rows"));
    }
    MultilabelDataset::new(instances, d, m, Some(label_names))
}

fn parse_sparse_header(line: &str) -> (Option<usize>, Option<usize>) {
    let mut labels = None;
    let mut features = None;
    for tok in line.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = tok.split_once('=') {
            match k {
                "labels" => labels = v.parse().ok(),
                "features" => features = v.parse().ok(),
                _ => {}
            }
        }
    }
    (labels, features)
}

/// Line number, label indices and `(index, value)` feature pairs.
type SparseRow = (usize, Vec<usize>, Vec<(usize, f64)>);

/// Parses sparse multilabel text. Declared dimensions take precedence
/// over a header, which takes precedence over inference.
pub fn parse_sparse(
    text: &str,
    path: &Path,
    num_labels: Option<usize>,
    num_features: Option<usize>,
) -> Result<MultilabelDataset> {
    let mut declared = (num_labels, num_features);
    let mut rows: Vec<SparseRow> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        if line.trim_start().starts_with('#') {
            let (l, f) = parse_sparse_header(line);
            declared.0 = declared.0.or(l);
            declared.1 = declared.1.or(f);
            continue;
        }
        let mut tokens = line.split_whitespace().peekable();
        let mut positives = Vec::new();
        if let Some(first) = tokens.peek() {
            if !first.contains(':') {
                for t in first.split(',').filter(|t| !t.is_empty()) {
                    let idx: usize = t.parse().map_err(|_| {
                        parse_err(path, lineno, format!("unknown label symbol {t:?}"))
                    })?;
                    if idx == 0 {
                        return Err(parse_err(path, lineno, "label indices are 1-based"));
                    }
                    positives.push(idx - 1);
                }
                tokens.next();
            }
        }
        let mut feats = Vec::new();
        for t in tokens {
            let (k, v) = t.split_once(':').ok_or_else(|| {
                parse_err(path, lineno, format!("expected index:value, got {t:?}"))
            })?;
            let idx: usize = k
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad feature index {k:?}")))?;
            if idx == 0 {
                return Err(parse_err(path, lineno, "feature indices are 1-based"));
            }
            feats.push((idx - 1, parse_float(v, path, lineno)?));
        }
        rows.push((lineno, positives, feats));
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let m = declared.0.unwrap_or_else(|| {
        rows.iter()
            .flat_map(|r| r.1.iter())
            .map(|i| i + 1)
            .max()
            .unwrap_or(0)
    });
    let d = declared.1.unwrap_or_else(|| {
        rows.iter()
            .flat_map(|r| r.2.iter())
            .map(|(i, _)| i + 1)
            .max()
            .unwrap_or(0)
    });
    if m == 0 || d == 0 {
        return Err(parse_err(
            path,
            1,
            "cannot determine label or feature count",
        ));
    }
    let mut instances = Vec::with_capacity(rows.len());
    for (lineno, positives, feats) in rows {
        let mut labels = vec![-1; m];
        for p in positives {
            if p >= m {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("label {} exceeds {m} labels", p + 1),
                ));
            }
            labels[p] = 1;
        }
        let mut features = vec![0.0; d];
        for (k, v) in feats {
            if k >= d {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("feature {} exceeds {d} features", k + 1),
                ));
            }
            features[k] = v;
        }
        instances.push(Instance { features, labels });
    }
    MultilabelDataset::new(instances, d, m, None)
}

/// Reads a dataset file without any feature transform.
pub fn load_raw(path: impl AsRef<Path>, format: DataFormat) -> Result<MultilabelDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    match format {
        DataFormat::DenseCsv => parse_dense_csv(&text, path),
        DataFormat::SparseMultilabel {
            num_labels,
            num_features,
        } => parse_sparse(&text, path, num_labels, num_features),
    }
}

/// Reads a dataset and fits the preprocessing described by `spec` on it.
pub fn load_dataset_with_preprocessor(
    path: impl AsRef<Path>,
    spec: &DatasetSpec,
) -> Result<(MultilabelDataset, Preprocessor)> {
    let raw = load_raw(path, spec.format)?;
    let pre = Preprocessor::fit(&raw, spec.normalization, spec.add_bias);
    Ok((pre.apply(&raw)?, pre))
}

pub fn load_dataset(path: impl AsRef<Path>, spec: &DatasetSpec) -> Result<MultilabelDataset> {
    Ok(load_dataset_with_preprocessor(path, spec)?.0)
}

/// Dense CSV text for a dataset; floats use shortest round-trip formatting.
pub fn to_dense_csv(dataset: &MultilabelDataset, feature_names: Option<&[String]>) -> String {
    let mut out = String::new();
    let feats: Vec<String> = match feature_names {
        Some(names) => names.to_vec(),
        None => (1..=dataset.num_features())
            .map(|i| format!("x{i}"))
            .collect(),
    };
    let _ = writeln!(
        out,
        "{}|{}",
        feats.join(","),
        dataset.label_names().join(",")
    );
    for inst in dataset.instances() {
        let row: Vec<String> = inst
            .features
            .iter()
            .map(|v| format!("{v:?}"))
            .chain(inst.labels.iter().map(|l| l.to_string()))
            .collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Settings for the two-label toy problem on the unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    pub n_train: usize,
    pub n_test: usize,
    pub eta1: [f64; 3],
    pub eta2: [f64; 3],
    pub seed: u64,
    /// Append the constant feature (with the `1/√2` rescale of
    /// [`Preprocessor`]); without it the features are the raw disc points.
    pub add_bias: bool,
}

impl Default for ToySpec {
    fn default() -> Self {
        Self {
            n_train: 500,
            n_test: 500,
            eta1: [1.0, 1.0, -0.5],
            eta2: [-1.0, 1.0, -0.5],
            seed: 0,
            add_bias: true,
        }
    }
}

fn sign(v: f64) -> Label {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// `y₁ = sign(η₁ᵀx̃)`, `y₂ = OR(y₁, sign(η₂ᵀx̃))` with `x̃ = (x, 1)`.
pub fn toy_labels(x: [f64; 2], eta1: [f64; 3], eta2: [f64; 3]) -> [Label; 2] {
    let lin = |e: [f64; 3]| e[0] * x[0] + e[1] * x[1] + e[2];
    let y1 = sign(lin(eta1));
    let y2 = if y1 == 1 || sign(lin(eta2)) == 1 {
        1
    } else {
        -1
    };
    [y1, y2]
}

/// Samples points uniformly on the unit disc and labels them with
/// [`toy_labels`]. The first `n_train` points form the training set.
pub fn generate_toy(spec: &ToySpec) -> Result<(MultilabelDataset, MultilabelDataset)> {
    if spec.n_train == 0 || spec.n_test == 0 {
        return Err(CorrLogError::config("toy splits must be non-empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pre = Preprocessor {
        scale: 1.0,
        add_bias: spec.add_bias,
    };
    let mut draw = |count: usize| -> Vec<Instance> {
        (0..count)
            .map(|_| {
                let r = rng.gen::<f64>().sqrt();
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                let x = [r * theta.cos(), r * theta.sin()];
                Instance {
                    features: pre.transform(&x),
                    labels: toy_labels(x, spec.eta1, spec.eta2).to_vec(),
                }
            })
            .collect()
    };
    let train = draw(spec.n_train);
    let test = draw(spec.n_test);
    let d = pre.output_dim(2);
    let names = Some(vec!["y1".to_string(), "y2".to_string()]);
    Ok((
        MultilabelDataset::new(train, d, 2, names.clone())?,
        MultilabelDataset::new(test, d, 2, names)?,
    ))
}

pub const MODEL_MAGIC: &str = "corrlog-model";
pub const MODEL_VERSION: u32 = 1;

/// Versioned JSON model file. Pair indices are 0-based with `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub magic: String,
    pub version: u32,
    pub num_labels: usize,
    pub num_features: usize,
    /// Row-major `m × D`.
    pub beta: Vec<f64>,
    pub alpha: Vec<(usize, usize, f64)>,
    pub regularization: RegularizationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocessor: Option<Preprocessor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_names: Option<Vec<String>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl ModelDocument {
    pub fn new(params: &ModelParams, reg: &RegularizationConfig) -> Self {
        Self {
            magic: MODEL_MAGIC.to_string(),
            version: MODEL_VERSION,
            num_labels: params.num_labels(),
            num_features: params.num_features(),
            beta: params.beta().to_vec(),
            alpha: params.alpha_entries().collect(),
            regularization: *reg,
            preprocessor: None,
            label_names: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.magic != MODEL_MAGIC {
            return Err(CorrLogError::ModelFormat(format!(
                "unexpected magic {:?}",
                doc.magic
            )));
        }
        if doc.version != MODEL_VERSION {
            return Err(CorrLogError::ModelFormat(format!(
                "unsupported version {} (expected {MODEL_VERSION})",
                doc.version
            )));
        }
        if let Some(names) = &doc.label_names {
            if names.len() != doc.num_labels {
                return Err(CorrLogError::ModelFormat(
                    "label name count differs from m".into(),
                ));
            }
        }
        doc.params()?;
        Ok(doc)
    }

    pub fn params(&self) -> Result<ModelParams> {
        if self.alpha.iter().any(|&(i, j, _)| i >= j) {
            return Err(CorrLogError::ModelFormat(
                "pair entries must satisfy i < j".into(),
            ));
        }
        let mut keys: Vec<(usize, usize)> = self.alpha.iter().map(|&(i, j, _)| (i, j)).collect();
        keys.sort_unstable();
        keys.dedup();
        if keys.len() != self.alpha.len() {
            return Err(CorrLogError::ModelFormat("duplicate pair entries".into()));
        }
        ModelParams::from_parts(
            self.num_labels,
            self.num_features,
            self.beta.clone(),
            self.alpha.iter().copied(),
        )
        .map_err(|e| CorrLogError::ModelFormat(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Serialises parameters, the training penalty and free-form metadata.
pub fn save_model(
    params: &ModelParams,
    reg: &RegularizationConfig,
    metadata: &BTreeMap<String, String>,
) -> Result<String> {
    let mut doc = ModelDocument::new(params, reg);
    doc.metadata = metadata.clone();
    doc.to_text()
}

pub fn load_model(document: &str) -> Result<ModelParams> {
    ModelDocument::parse(document)?.params()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEdge {
    pub source: usize,
    pub target: usize,
    /// Signed pair weight.
    pub alpha: f64,
    pub magnitude: f64,
    pub sign: String,
}

/// Undirected label graph with one edge per sufficiently large pair weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<LabelEdge>,
    pub threshold: f64,
}

pub const DEFAULT_GRAPH_THRESHOLD: f64 = 1e-8;

pub fn export_label_graph(
    params: &ModelParams,
    label_names: &[String],
    threshold: f64,
) -> Result<LabelGraph> {
    if label_names.len() != params.num_labels() {
        return Err(CorrLogError::DimensionMismatch {
            what: "label names",
            expected: params.num_labels(),
            found: label_names.len(),
        });
    }
    if threshold.is_nan() || threshold < 0.0 {
        return Err(CorrLogError::config("graph threshold must be nonnegative"));
    }
    let edges = params
        .alpha_entries()
        .filter(|(_, _, w)| w.abs() > threshold)
        .map(|(i, j, w)| LabelEdge {
            source: i,
            target: j,
            alpha: w,
            magnitude: w.abs(),
            sign: if w > 0.0 { "+" } else { "-" }.to_string(),
        })
        .collect();
    Ok(LabelGraph {
        nodes: label_names.to_vec(),
        edges,
        threshold,
    })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl LabelGraph {
    /// Graphviz DOT; positive weights are drawn blue, negative red, with
    /// pen width growing with magnitude.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph labels {\n  node [shape=ellipse];\n");
        for (i, name) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", dot_escape(name));
        }
        for e in &self.edges {
            let color = if e.alpha > 0.0 { "blue" } else { "red" };
            let _ = writeln!(
                out,
                "  n{} -- n{} [label=\"{:+.4}\", weight={:?}, sign=\"{}\", color={color}, penwidth={:.3}];",
                e.source,
                e.target,
                e.alpha,
                e.magnitude,
                e.sign,
                1.0 + 4.0 * e.magnitude.min(1.0)
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "directed": false,
            "threshold": self.threshold,
            "nodes": self.nodes.iter().enumerate().map(|(i, n)| json!({"id": i, "name": n})).collect::<Vec<_>>(),
            "edges": self.edges,
        })
    }
}

/// Path helper used by the CLI for sibling outputs (`model.json` next to
/// `model.txt`, for example).
pub fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut p = path.to_path_buf();
    p.set_extension(ext);
    p
}
