//! Second-order gradient boosting of regression trees on logistic loss.
//!
//! Each round fits a tree to the gradients `p − y` and hessians `p(1 − p)`
//! by exact greedy search. A node with sums `G`, `H` scores
//! `T(G)² / (H + λ)` where `T` soft-thresholds by the L1 penalty, and its
//! leaf weight is `−T(G) / (H + λ)`.

use serde::{Deserialize, Serialize};

use super::{require_both_classes, sigmoid, Dataset};
use crate::{Error, Result};

/// L2 penalty in leaf denominators.
pub const LAMBDA: f64 = 1.0;
/// Smallest hessian sum allowed in a child.
pub const MIN_CHILD_WEIGHT: f64 = 1.0;
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtHyperParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub l1_alpha: f64,
    pub pca_explained_variance: f64,
}

impl GbtHyperParams {
    pub const LEARNING_RATES: [f64; 3] = [0.3, 0.01, 0.001];
    pub const N_ESTIMATORS: [usize; 3] = [10, 100, 1000];
    pub const MAX_DEPTHS: [usize; 3] = [4, 6, 10];
    pub const L1_ALPHAS: [f64; 4] = [0.0, 0.1, 1.0, 10.0];
    pub const PCA_EXPLAINED: [f64; 3] = [0.8, 0.9, 1.0];

    pub fn new(learning_rate: f64, n_estimators: usize, max_depth: usize, l1_alpha: f64) -> Self {
        GbtHyperParams {
            learning_rate,
            n_estimators,
            max_depth,
            l1_alpha,
            pca_explained_variance: 1.0,
        }
    }

    /// The full search grid, 324 points.
    pub fn full_grid() -> Vec<GbtHyperParams> {
        Self::grid(&Self::LEARNING_RATES, &Self::N_ESTIMATORS, &Self::MAX_DEPTHS, &Self::L1_ALPHAS, &Self::PCA_EXPLAINED)
    }

    pub fn grid(lrs: &[f64], trees: &[usize], depths: &[usize], alphas: &[f64], pca: &[f64]) -> Vec<GbtHyperParams> {
        let mut out = Vec::new();
        for &learning_rate in lrs {
            for &n_estimators in trees {
                for &max_depth in depths {
                    for &l1_alpha in alphas {
                        for &pca_explained_variance in pca {
                            out.push(GbtHyperParams {
                                learning_rate,
                                n_estimators,
                                max_depth,
                                l1_alpha,
                                pca_explained_variance,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::domain("learning_rate must be positive"));
        }
        if !(self.l1_alpha >= 0.0) {
            return Err(Error::domain("l1_alpha must be nonnegative"));
        }
        if !(self.pca_explained_variance > 0.0 && self.pca_explained_variance <= 1.0) {
            return Err(Error::domain("pca_explained_variance must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Nodes in preorder; node 0 is the root. `x[feature] < threshold` goes
/// left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] < threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value } => Some(*value),
            Node::Split { .. } => None,
        })
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub format_version: u32,
    pub n_features: usize,
    /// Prior log-odds of the positive class.
    pub base_margin: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    /// Mean training log-loss after each round.
    pub train_loss: Vec<f64>,
}

impl GbtModel {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base_margin + self.trees.iter().map(|t| self.learning_rate * t.predict(row)).sum::<f64>()
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }

    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self.predict_proba_row(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: GbtModel = serde_json::from_str(text)?;
        if model.format_version != FORMAT_VERSION {
            return Err(Error::Data(format!("unsupported model format version {}", model.format_version)));
        }
        Ok(model)
    }
}

pub fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

/// Structure score of a node with gradient sum `g` and hessian sum `h`.
pub fn node_score(g: f64, h: f64, alpha: f64) -> f64 {
    let t = soft_threshold(g, alpha);
    t * t / (h + LAMBDA)
}

pub fn leaf_weight(g: f64, h: f64, alpha: f64) -> f64 {
    -soft_threshold(g, alpha) / (h + LAMBDA)
}

/// Loss reduction of splitting a parent into the given children.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, alpha: f64) -> f64 {
    0.5 * (node_score(gl, hl, alpha) + node_score(gr, hr, alpha) - node_score(gl + gr, hl + hr, alpha))
}

pub fn train_gbt(data: &Dataset, hp: &GbtHyperParams) -> Result<GbtModel> {
    data.check()?;
    hp.validate()?;
    if data.n_features() == 0 {
        return Err(Error::domain("boosting needs at least one feature"));
    }
    require_both_classes(&data.y)?;
    let n = data.len();
    let d = data.n_features();
    let pos = data.y.iter().filter(|&&v| v == 1).count() as f64;
    let prior = pos / n as f64;
    let base_margin = (prior / (1.0 - prior)).ln();

    // Row order per feature, sorted once; children inherit it by stable
    // partition.
    let sorted: Vec<Vec<u32>> = (0..d)
        .map(|f| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| data.x[a as usize][f].total_cmp(&data.x[b as usize][f]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut margin = vec![base_margin; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(hp.n_estimators);
    let mut train_loss = Vec::with_capacity(hp.n_estimators);
    for _ in 0..hp.n_estimators {
        for i in 0..n {
            let p = sigmoid(margin[i]);
            grad[i] = p - f64::from(data.y[i]);
            hess[i] = p * (1.0 - p);
        }
        let mut builder = TreeBuilder {
            x: &data.x,
            grad: &grad,
            hess: &hess,
            alpha: hp.l1_alpha,
            max_depth: hp.max_depth,
            nodes: Vec::new(),
            in_node: vec![false; n],
        };
        builder.grow(sorted.clone(), 0);
        let tree = Tree { nodes: builder.nodes };
        for (i, m) in margin.iter_mut().enumerate() {
            *m += hp.learning_rate * tree.predict(&data.x[i]);
        }
        trees.push(tree);
        let proba: Vec<f64> = margin.iter().map(|&m| sigmoid(m)).collect();
        train_loss.push(super::log_loss(&proba, &data.y));
    }
    Ok(GbtModel {
        format_version: FORMAT_VERSION,
        n_features: d,
        base_margin,
        learning_rate: hp.learning_rate,
        trees,
        train_loss,
    })
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    alpha: f64,
    max_depth: usize,
    nodes: Vec<Node>,
    in_node: Vec<bool>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    /// Appends the subtree for the rows in `sorted` and returns its index.
    fn grow(&mut self, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let rows = &sorted[0];
        let g: f64 = rows.iter().map(|&i| self.grad[i as usize]).sum();
        let h: f64 = rows.iter().map(|&i| self.hess[i as usize]).sum();
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: leaf_weight(g, h, self.alpha),
        });
        if depth >= self.max_depth {
            return at;
        }
        let Some(best) = self.best_split(&sorted, g, h) else {
            return at;
        };

        let rows = sorted[best.feature].clone();
        for &i in &rows {
            self.in_node[i as usize] = self.x[i as usize][best.feature] < best.threshold;
        }
        let mut left = Vec::with_capacity(sorted.len());
        let mut right = Vec::with_capacity(sorted.len());
        for list in sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&i| self.in_node[i as usize]);
            left.push(l);
            right.push(r);
        }
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        at
    }

    /// Highest-gain split with positive gain; ties keep the lowest feature,
    /// then the lowest threshold.
    fn best_split(&self, sorted: &[Vec<u32>], g: f64, h: f64) -> Option<BestSplit> {
        let mut best: Option<BestSplit> = None;
        for (feature, rows) in sorted.iter().enumerate() {
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..rows.len().saturating_sub(1) {
                let i = rows[k] as usize;
                gl += self.grad[i];
                hl += self.hess[i];
                let here = self.x[i][feature];
                let next = self.x[rows[k + 1] as usize][feature];
                if next <= here {
                    continue;
                }
                let hr = h - hl;
                if hl < MIN_CHILD_WEIGHT || hr < MIN_CHILD_WEIGHT {
                    continue;
                }
                let gain = split_gain(gl, hl, g - gl, hr, self.alpha);
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mid = here + (next - here) / 2.0;
                    // Guard against a midpoint that rounds onto `next`.
                    let threshold = if mid > here && mid < next { mid } else { next };
                    best = Some(BestSplit { gain, feature, threshold });
                }
            }
        }
        best
    }
}
