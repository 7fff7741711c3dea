use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use super::forest::{fit_forest, plurality, ForestParams, Tree};
use super::label::GestureLabel;
use super::svm::{fit_ovr, predict_ovr, LinearMachine, SvmParams};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "rss-sense-gesture-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    LinearSvm,
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Knn, ClassifierKind::LinearSvm, ClassifierKind::RandomForest];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::RandomForest => "random_forest",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown classifier '{s}' (knn, linear_svm, random_forest)")))
    }
}

/// Hyperparameters of all three classifiers; only the chosen kind's are used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub k: usize,
    pub svm: SvmParams,
    pub forest: ForestParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k: 5,
            svm: SvmParams::default(),
            forest: ForestParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelState {
    Knn {
        k: usize,
        points: Vec<Vec<f64>>,
        labels: Vec<GestureLabel>,
    },
    LinearSvm {
        params: SvmParams,
        machines: Vec<LinearMachine>,
    },
    RandomForest {
        params: ForestParams,
        trees: Vec<Tree>,
    },
}

/// A fitted classifier with its z-score standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub feature_len: usize,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub seed: u64,
    pub state: ModelState,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.state {
            ModelState::Knn { .. } => ClassifierKind::Knn,
            ModelState::LinearSvm { .. } => ClassifierKind::LinearSvm,
            ModelState::RandomForest { .. } => ClassifierKind::RandomForest,
        }
    }

    fn check(&self, fv: &FeatureVector) -> Result<()> {
        if fv.len() != self.feature_len {
            return Err(Error::LayoutMismatch {
                expected: self.feature_len,
                got: fv.len(),
            });
        }
        Ok(())
    }

    fn standardize(&self, fv: &FeatureVector) -> Vec<f64> {
        fv.values
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn classify(&self, fv: &FeatureVector) -> Result<GestureLabel> {
        self.check(fv)?;
        let x = self.standardize(fv);
        let class = match &self.state {
            ModelState::Knn { k, points, labels } => knn_vote(points, labels, *k, &x),
            ModelState::LinearSvm { machines, .. } => predict_ovr(machines, &x),
            ModelState::RandomForest { trees, .. } => {
                let mut counts = vec![0; GestureLabel::COUNT];
                for t in trees {
                    counts[t.predict(&x)] += 1;
                }
                plurality(&counts)
            }
        };
        Ok(GestureLabel::ALL[class])
    }

    /// Individual tree predictions of a random forest.
    pub fn tree_votes(&self, fv: &FeatureVector) -> Result<Vec<GestureLabel>> {
        self.check(fv)?;
        let ModelState::RandomForest { trees, .. } = &self.state else {
            return Err(Error::Model("tree votes exist only for random forests".into()));
        };
        let x = self.standardize(fv);
        Ok(trees.iter().map(|t| GestureLabel::ALL[t.predict(&x)]).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        })
        .map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Model(format!("not a gesture model file (format '{}')", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported model version {}", file.version)));
        }
        let m = file.model;
        if m.mean.len() != m.feature_len || m.scale.len() != m.feature_len {
            return Err(Error::Model("standardization constants do not match the feature length".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Majority label of the `k` nearest points (Euclidean). Distance ties keep
/// the earlier training point; vote ties go to the lowest label.
fn knn_vote(points: &[Vec<f64>], labels: &[GestureLabel], k: usize, x: &[f64]) -> usize {
    let mut dist: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut counts = vec![0; GestureLabel::COUNT];
    for &(_, i) in dist.iter().take(k.max(1)) {
        counts[labels[i].index()] += 1;
    }
    plurality(&counts)
}

/// Fits a classifier on labelled feature vectors; deterministic given `seed`.
pub fn train(
    data: &[(FeatureVector, GestureLabel)],
    kind: ClassifierKind,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainedModel> {
    let Some((first, _)) = data.first() else {
        return Err(Error::Model("no training data".into()));
    };
    let dim = first.len();
    if let Some((fv, _)) = data.iter().find(|(fv, _)| fv.len() != dim) {
        return Err(Error::LayoutMismatch {
            expected: dim,
            got: fv.len(),
        });
    }
    let first_label = data[0].1;
    if data.iter().all(|(_, l)| *l == first_label) {
        return Err(Error::Model("training data must hold at least two classes".into()));
    }
    let n = data.len() as f64;
    let mut mean = vec![0.0; dim];
    for (fv, _) in data {
        for (m, v) in mean.iter_mut().zip(&fv.values) {
            *m += v / n;
        }
    }
    let mut scale = vec![0.0; dim];
    for (fv, _) in data {
        for ((s, v), m) in scale.iter_mut().zip(&fv.values).zip(&mean) {
            *s += (v - m).powi(2) / n;
        }
    }
    // constant features pass through unscaled
    for s in scale.iter_mut() {
        *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
    }
    let x: Vec<Vec<f64>> = data
        .iter()
        .map(|(fv, _)| fv.values.iter().zip(mean.iter().zip(&scale)).map(|(v, (m, s))| (v - m) / s).collect())
        .collect();
    let y: Vec<usize> = data.iter().map(|(_, l)| l.index()).collect();
    let state = match kind {
        ClassifierKind::Knn => ModelState::Knn {
            k: cfg.k,
            points: x,
            labels: data.iter().map(|(_, l)| *l).collect(),
        },
        ClassifierKind::LinearSvm => ModelState::LinearSvm {
            params: cfg.svm,
            machines: fit_ovr(&x, &y, GestureLabel::COUNT, &cfg.svm, seed),
        },
        ClassifierKind::RandomForest => ModelState::RandomForest {
            params: cfg.forest,
            trees: fit_forest(&x, &y, GestureLabel::COUNT, &cfg.forest, seed),
        },
    };
    Ok(TrainedModel {
        feature_len: dim,
        mean,
        scale,
        seed,
        state,
    })
}

/// Confusion counts with `counts[predicted][actual]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub counts: [[usize; GestureLabel::COUNT]; GestureLabel::COUNT],
}

impl ConfusionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (GestureLabel, GestureLabel)>) -> Self {
        let mut counts = [[0; GestureLabel::COUNT]; GestureLabel::COUNT];
        for (predicted, actual) in pairs {
            counts[predicted.index()][actual.index()] += 1;
        }
        Self { counts }
    }

    fn column_total(&self, actual: usize) -> usize {
        (0..GestureLabel::COUNT).map(|p| self.counts[p][actual]).sum()
    }

    /// Each column divided by its total, so a column is the prediction
    /// distribution of one actual class. Empty columns stay zero.
    pub fn normalized(&self) -> [[f64; GestureLabel::COUNT]; GestureLabel::COUNT] {
        let mut out = [[0.0; GestureLabel::COUNT]; GestureLabel::COUNT];
        for a in 0..GestureLabel::COUNT {
            let total = self.column_total(a);
            if total > 0 {
                for (p, row) in out.iter_mut().enumerate() {
                    row[a] = self.counts[p][a] as f64 / total as f64;
                }
            }
        }
        out
    }

    /// Recall of each actual class, `None` where the class is absent.
    pub fn per_class_accuracy(&self) -> [Option<f64>; GestureLabel::COUNT] {
        let mut out = [None; GestureLabel::COUNT];
        for (a, slot) in out.iter_mut().enumerate() {
            let total = self.column_total(a);
            if total > 0 {
                *slot = Some(self.counts[a][a] as f64 / total as f64);
            }
        }
        out
    }

    /// Mean of the per-class accuracies over the classes present.
    pub fn mean_accuracy(&self) -> f64 {
        let acc: Vec<f64> = self.per_class_accuracy().iter().flatten().copied().collect();
        if acc.is_empty() {
            0.0
        } else {
            acc.iter().sum::<f64>() / acc.len() as f64
        }
    }

    /// Column-normalized matrix as CSV, rows predicted, columns actual.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("predicted\\actual");
        for l in GestureLabel::ALL {
            s.push_str(&format!(",{l}"));
        }
        s.push('\n');
        for (p, row) in self.normalized().iter().enumerate() {
            s.push_str(GestureLabel::ALL[p].as_str());
            for v in row {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

pub fn evaluate(model: &TrainedModel, data: &[(FeatureVector, GestureLabel)]) -> Result<ConfusionMatrix> {
    if data.is_empty() {
        return Err(Error::invalid("evaluation needs at least one sample"));
    }
    let mut pairs = Vec::with_capacity(data.len());
    for (fv, actual) in data {
        pairs.push((model.classify(fv)?, *actual));
    }
    Ok(ConfusionMatrix::from_pairs(pairs))
}
