//! Random forest of unpruned Gini trees.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat tree; node 0 is the root and `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `floor(sqrt(F))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 15,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
            bootstrap: true,
        }
    }
}

/// Most frequent class; ties go to the lowest class index.
pub(crate) fn plurality(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    mtry: usize,
    params: &'a ForestParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    /// Lowest-impurity `(feature, threshold)` over a random feature subset,
    /// widened to every feature when the subset holds no usable split.
    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let n_features = self.x[0].len();
        let subset = sample(rng, n_features, self.mtry).into_vec();
        self.search(idx, &subset).or_else(|| self.search(idx, &(0..n_features).collect::<Vec<_>>()))
    }

    fn search(&self, idx: &[usize], features: &[usize]) -> Option<(usize, f64)> {
        let parent = self.counts(idx);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for &f in features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; self.n_classes];
            let mut right = parent.clone();
            for k in 0..order.len() - 1 {
                let c = self.y[order[k]];
                left[c] += 1;
                right[c] -= 1;
                let (v, next) = (self.x[order[k]][f], self.x[order[k + 1]][f]);
                if v == next {
                    continue;
                }
                let nl = k + 1;
                let nr = order.len() - nl;
                let score = nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr);
                if best.is_none_or(|b| score < b.2) {
                    let mid = 0.5 * (v + next);
                    // guard against the midpoint rounding onto the upper value
                    let threshold = if mid < next { mid } else { v };
                    best = Some((f, threshold, score));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let id = self.nodes.len();
        let counts = self.counts(&idx);
        self.nodes.push(Node::Leaf {
            class: plurality(&counts),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let deep = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || deep || idx.len() < self.params.min_samples_split.max(2) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx, rng) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

pub(crate) fn fit_forest(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: &ForestParams,
    seed: u64,
) -> Vec<Tree> {
    let n = x.len();
    let n_features = x[0].len();
    let mtry = params
        .max_features
        .unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize)
        .clamp(1, n_features);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..params.n_trees.max(1))
        .map(|_| {
            let idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut b = Builder {
                x,
                y,
                n_classes,
                mtry,
                params,
                nodes: Vec::new(),
            };
            b.grow(idx, 0, &mut rng);
            Tree { nodes: b.nodes }
        })
        .collect()
}
