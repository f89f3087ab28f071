//! Random forests over binary features.
//!
//! Two learners share one tree builder: [`BitClassifier`] predicts a whole
//! output bit vector from a leaf that stores per-bit counts, and
//! [`ForestRegressor`] predicts one characterization metric from the
//! configuration bits. Rows with identical inputs are pooled before
//! growing, so cost scales with the number of distinct inputs.

mod io;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characterize::{CharDataset, Metric};
use crate::error::{Error, Result};
use crate::matching::TrainingSet;
use crate::operator::AxoConfig;
use crate::rng::{self, Purpose};

pub use io::{load_model, parse_model, render_model, save_model, ForestModel, MODEL_MAGIC, MODEL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSubset {
    Sqrt,
    All,
    Fixed(usize),
}

impl FeatureSubset {
    /// Number of non-constant features examined per split.
    pub fn count(self, n_features: usize) -> usize {
        let k = match self {
            FeatureSubset::Sqrt => (n_features as f64).sqrt() as usize,
            FeatureSubset::All => n_features,
            FeatureSubset::Fixed(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

impl fmt::Display for FeatureSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSubset::Sqrt => f.write_str("sqrt"),
            FeatureSubset::All => f.write_str("all"),
            FeatureSubset::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

impl FromStr for FeatureSubset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(FeatureSubset::Sqrt),
            "all" => Ok(FeatureSubset::All),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k >= 1)
                .map(FeatureSubset::Fixed)
                .ok_or_else(|| Error::InvalidParam(format!("unknown feature subset '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub features_per_split: FeatureSubset,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 128,
            max_depth: 16,
            min_samples_leaf: 1,
            features_per_split: FeatureSubset::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    /// Depth that never binds: a path cannot test a binary feature twice.
    pub const UNLIMITED_DEPTH: usize = 64;

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::InvalidParam("n_trees, max_depth and min_samples_leaf must be >= 1".into()));
        }
        if let FeatureSubset::Fixed(0) = self.features_per_split {
            return Err(Error::InvalidParam("fixed feature count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Tree grid evaluated by [`grid_search_regressor`].
pub const GRID_TREES: [usize; 3] = [64, 128, 256];
pub const GRID_DEPTHS: [usize; 3] = [8, 16, 24];

pub(crate) const LEAF: u32 = u32::MAX;

/// A split tests `input[feature] == 1` (threshold 0.5) and goes right when
/// true. A leaf has `feature == LEAF` and `left` indexing the leaf table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Node {
    pub feature: u32,
    pub left: u32,
    pub right: u32,
}

/// Flattened tree. `leaves` holds `stride` values per leaf: the in-bag
/// weight followed by per-bit one counts for classifiers, or the mean alone
/// for regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<Node>,
    pub(crate) leaves: Vec<f64>,
    pub(crate) stride: usize,
}

impl DecisionTree {
    fn leaf_of(&self, input: &[u8]) -> &[f64] {
        let mut n = self.nodes[0];
        while n.feature != LEAF {
            n = self.nodes[if input[n.feature as usize] == 1 { n.right } else { n.left } as usize];
        }
        let i = n.left as usize * self.stride;
        &self.leaves[i..i + self.stride]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len() / self.stride
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, i: usize) -> usize {
            let n = t.nodes[i];
            if n.feature == LEAF {
                0
            } else {
                1 + walk(t, n.left as usize).max(walk(t, n.right as usize))
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Criterion {
    Gini,
    Mse,
}

impl Criterion {
    /// Impurity times weight, from the weight and per-target sums.
    fn total(self, w: f64, s: &[f64]) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match self {
            Criterion::Gini => s.iter().map(|&o| 2.0 * o * (w - o) / w).sum::<f64>() / s.len() as f64,
            Criterion::Mse => (s[1] - s[0] * s[0] / w).max(0.0),
        }
    }

    fn is_pure(self, total: f64, s: &[f64]) -> bool {
        match self {
            Criterion::Gini => total == 0.0,
            Criterion::Mse => total <= 1e-12 * s[1].abs().max(f64::MIN_POSITIVE),
        }
    }
}

/// Rows pooled by identical input.
struct Pooled<'a> {
    inputs: Vec<&'a [u8]>,
    row_group: Vec<u32>,
}

fn pool<'a>(rows: impl Iterator<Item = &'a [u8]>) -> Pooled<'a> {
    let mut index: HashMap<&'a [u8], u32> = HashMap::new();
    let mut inputs = Vec::new();
    let mut row_group = Vec::new();
    for r in rows {
        let g = *index.entry(r).or_insert_with(|| {
            inputs.push(r);
            (inputs.len() - 1) as u32
        });
        row_group.push(g);
    }
    Pooled { inputs, row_group }
}

struct Grower<'a> {
    inputs: &'a [&'a [u8]],
    n_features: usize,
    m: usize,
    weight: Vec<f64>,
    sums: Vec<f64>,
    crit: Criterion,
    params: ForestParams,
    k: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    leaf_stats: Vec<(f64, Vec<f64>)>,
}

impl Grower<'_> {
    fn stats(&self, members: &[u32]) -> (f64, Vec<f64>) {
        let mut w = 0.0;
        let mut s = vec![0.0; self.m];
        for &g in members {
            let g = g as usize;
            w += self.weight[g];
            for (a, b) in s.iter_mut().zip(&self.sums[g * self.m..(g + 1) * self.m]) {
                *a += b;
            }
        }
        (w, s)
    }

    fn best_split(&mut self, members: &[u32], w: f64, s: &[f64], parent: f64) -> Option<usize> {
        let min_leaf = self.params.min_samples_leaf as f64;
        let mut order: Vec<usize> = (0..self.n_features).collect();
        let mut evaluated = 0;
        let mut best: Option<(f64, usize)> = None;
        let mut sr = vec![0.0; self.m];
        let mut sl = vec![0.0; self.m];
        for i in 0..self.n_features {
            if evaluated >= self.k {
                break;
            }
            let j = self.rng.gen_range(i..self.n_features);
            order.swap(i, j);
            let f = order[i];
            let mut wr = 0.0;
            sr.iter_mut().for_each(|v| *v = 0.0);
            for &g in members {
                let g = g as usize;
                if self.inputs[g][f] == 1 {
                    wr += self.weight[g];
                    for (a, b) in sr.iter_mut().zip(&self.sums[g * self.m..(g + 1) * self.m]) {
                        *a += b;
                    }
                }
            }
            if wr == 0.0 || wr == w {
                continue;
            }
            evaluated += 1;
            let wl = w - wr;
            if wl < min_leaf || wr < min_leaf {
                continue;
            }
            for ((l, a), b) in sl.iter_mut().zip(s).zip(&sr) {
                *l = a - b;
            }
            let child = self.crit.total(wl, &sl) + self.crit.total(wr, &sr);
            // Children never exceed the parent in exact arithmetic; the slack
            // absorbs rounding so zero-gain splits stay eligible.
            if child <= parent + 1e-9 * parent.abs().max(1e-300) && best.is_none_or(|b| child < b.0) {
                best = Some((child, f));
            }
        }
        best.map(|b| b.1)
    }

    fn grow(&mut self, members: Vec<u32>, depth: usize) -> u32 {
        let (w, s) = self.stats(&members);
        let total = self.crit.total(w, &s);
        let idx = self.nodes.len();
        self.nodes.push(Node { feature: LEAF, left: 0, right: 0 });
        let splittable = depth < self.params.max_depth
            && w >= 2.0 * self.params.min_samples_leaf as f64
            && !self.crit.is_pure(total, &s);
        if splittable {
            if let Some(f) = self.best_split(&members, w, &s, total) {
                let (right, left): (Vec<u32>, Vec<u32>) =
                    members.into_iter().partition(|&g| self.inputs[g as usize][f] == 1);
                let l = self.grow(left, depth + 1);
                let r = self.grow(right, depth + 1);
                self.nodes[idx] = Node { feature: f as u32, left: l, right: r };
                return idx as u32;
            }
        }
        self.nodes[idx].left = self.leaf_stats.len() as u32;
        self.leaf_stats.push((w, s));
        idx as u32
    }
}

/// Grows one tree. `targets` has `m` values per row. Returns the tree
/// and the per-row in-bag counts.
fn grow_tree(
    pooled: &Pooled<'_>,
    targets: &[f64],
    m: usize,
    n_features: usize,
    crit: Criterion,
    params: &ForestParams,
    tree: usize,
) -> (DecisionTree, Vec<u32>) {
    let n = pooled.row_group.len();
    let mut counts = vec![0u32; n];
    if params.bootstrap {
        let mut rng = rng::stream(params.seed, Purpose::Bootstrap, tree as u64);
        for _ in 0..n {
            counts[rng.gen_range(0..n)] += 1;
        }
    } else {
        counts.iter_mut().for_each(|c| *c = 1);
    }
    let n_groups = pooled.inputs.len();
    let mut weight = vec![0.0; n_groups];
    let mut sums = vec![0.0; n_groups * m];
    for (r, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let g = pooled.row_group[r] as usize;
        weight[g] += c as f64;
        for j in 0..m {
            sums[g * m + j] += c as f64 * targets[r * m + j];
        }
    }
    let members: Vec<u32> = (0..n_groups as u32).filter(|&g| weight[g as usize] > 0.0).collect();
    let mut grower = Grower {
        inputs: &pooled.inputs,
        n_features,
        m,
        weight,
        sums,
        crit,
        params: *params,
        k: params.features_per_split.count(n_features),
        rng: rng::stream(params.seed, Purpose::Features, tree as u64),
        nodes: Vec::new(),
        leaf_stats: Vec::new(),
    };
    grower.grow(members, 0);
    let (stride, leaves) = match crit {
        Criterion::Gini => {
            (1 + m, grower.leaf_stats.iter().flat_map(|(w, s)| std::iter::once(*w).chain(s.iter().copied())).collect())
        }
        Criterion::Mse => (1, grower.leaf_stats.iter().map(|(w, s)| s[0] / w).collect()),
    };
    (DecisionTree { nodes: grower.nodes, leaves, stride }, counts)
}

/// Multi-output classifier: one forest, vector leaves, per-bit vote.
#[derive(Debug, Clone, PartialEq)]
pub struct BitClassifier {
    pub params: ForestParams,
    pub n_features: usize,
    pub n_outputs: usize,
    pub trees: Vec<DecisionTree>,
}

impl BitClassifier {
    fn check_input(&self, input: &[u8]) -> Result<()> {
        if input.len() != self.n_features {
            return Err(Error::WidthMismatch { expected: self.n_features, got: input.len() });
        }
        Ok(())
    }

    /// Number of trees voting 1 for each output bit.
    pub fn votes(&self, input: &[u8]) -> Result<Vec<u32>> {
        self.check_input(input)?;
        let mut votes = vec![0u32; self.n_outputs];
        for t in &self.trees {
            let leaf = t.leaf_of(input);
            let w = leaf[0];
            for (v, &ones) in votes.iter_mut().zip(&leaf[1..]) {
                // Leaf majority; a tie keeps the LUT.
                *v += (2.0 * ones >= w) as u32;
            }
        }
        Ok(votes)
    }

    /// Per-bit majority over trees, ties resolved to 1.
    pub fn predict(&self, input: &[u8]) -> Result<Vec<u8>> {
        let n = self.trees.len() as u32;
        Ok(self.votes(input)?.into_iter().map(|v| (2 * v >= n) as u8).collect())
    }
}

pub fn predict_bits(model: &BitClassifier, input: &[u8]) -> Result<Vec<u8>> {
    model.predict(input)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierReport {
    pub rows: usize,
    pub per_bit_accuracy: Vec<f64>,
    /// `hamming_histogram[d]` counts rows whose prediction is `d` bits off.
    pub hamming_histogram: Vec<u64>,
    pub mean_hamming: f64,
    pub max_hamming: usize,
}

pub fn train_classifier(t: &TrainingSet, params: &ForestParams) -> Result<(BitClassifier, ClassifierReport)> {
    params.validate()?;
    if t.rows.len() < 2 {
        return Err(Error::InvalidParam(format!("classifier needs >= 2 rows, got {}", t.rows.len())));
    }
    let m = t.output_width;
    let pooled = pool(t.rows.iter().map(|r| r.input.as_slice()));
    let targets: Vec<f64> = t.rows.iter().flat_map(|r| r.output.iter().map(|&b| b as f64)).collect();
    let trees: Vec<DecisionTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|i| grow_tree(&pooled, &targets, m, t.input_width, Criterion::Gini, params, i).0)
        .collect();
    let model = BitClassifier { params: *params, n_features: t.input_width, n_outputs: m, trees };
    let report = hamming_eval(&model, t)?;
    Ok((model, report))
}

/// Hamming distance between recorded and predicted outputs over `holdout`.
pub fn hamming_eval(model: &BitClassifier, holdout: &TrainingSet) -> Result<ClassifierReport> {
    if holdout.rows.is_empty() {
        return Err(Error::Empty("holdout has no rows".into()));
    }
    if holdout.input_width != model.n_features {
        return Err(Error::WidthMismatch { expected: model.n_features, got: holdout.input_width });
    }
    if holdout.output_width != model.n_outputs {
        return Err(Error::WidthMismatch { expected: model.n_outputs, got: holdout.output_width });
    }
    let pooled = pool(holdout.rows.iter().map(|r| r.input.as_slice()));
    let predictions: Vec<Vec<u8>> = pooled.inputs.par_iter().map(|i| model.predict(i)).collect::<Result<_>>()?;
    let mut correct = vec![0u64; model.n_outputs];
    let mut hist = vec![0u64; model.n_outputs + 1];
    for (r, &g) in holdout.rows.iter().zip(&pooled.row_group) {
        let p = &predictions[g as usize];
        let mut d = 0;
        for (j, (a, b)) in r.output.iter().zip(p).enumerate() {
            if a == b {
                correct[j] += 1;
            } else {
                d += 1;
            }
        }
        hist[d] += 1;
    }
    let n = holdout.rows.len();
    let total: u64 = hist.iter().enumerate().map(|(d, c)| d as u64 * c).sum();
    Ok(ClassifierReport {
        rows: n,
        per_bit_accuracy: correct.iter().map(|&c| c as f64 / n as f64).collect(),
        max_hamming: hist.iter().rposition(|&c| c > 0).unwrap_or(0),
        mean_hamming: total as f64 / n as f64,
        hamming_histogram: hist,
    })
}

/// Regression forest estimating one metric from configuration bits.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestRegressor {
    pub params: ForestParams,
    pub n_features: usize,
    pub target: Metric,
    pub trees: Vec<DecisionTree>,
}

impl ForestRegressor {
    pub fn predict(&self, input: &[u8]) -> Result<f64> {
        if input.len() != self.n_features {
            return Err(Error::WidthMismatch { expected: self.n_features, got: input.len() });
        }
        Ok(self.trees.iter().map(|t| t.leaf_of(input)[0]).sum::<f64>() / self.trees.len() as f64)
    }

    pub fn predict_config(&self, config: &AxoConfig) -> Result<f64> {
        self.predict(&config.to_bits())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressorReport {
    pub target: Metric,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_rmse: f64,
    pub test_rmse: f64,
    /// Test RMSE divided by the target's range over the whole dataset.
    pub test_rmse_scaled: f64,
    pub train_r2: f64,
    pub test_r2: f64,
    pub oob_rmse: Option<f64>,
}

fn rmse_r2(pred: &[f64], truth: &[f64]) -> (f64, f64) {
    if truth.is_empty() {
        return (0.0, 1.0);
    }
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    ((ss_res / n).sqrt(), r2)
}

/// Seeded 80/20 split of `n` rows into (train, test) indices.
pub fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed, Purpose::Split, 0));
    let n_test = ((n as f64 * 0.2).round() as usize).clamp(1, n.saturating_sub(1));
    let test = idx.split_off(n - n_test);
    (idx, test)
}

/// Fits `params` on an 80/20 split of `dataset` and reports both sides.
pub fn train_regressor(
    dataset: &CharDataset,
    target: Metric,
    params: &ForestParams,
) -> Result<(ForestRegressor, RegressorReport)> {
    params.validate()?;
    if dataset.len() < 2 {
        return Err(Error::InvalidParam(format!("regressor needs >= 2 records, got {}", dataset.len())));
    }
    let bits: Vec<Vec<u8>> = dataset.records.iter().map(|r| r.config.to_bits()).collect();
    let y = dataset.values(target);
    let (train, test) = split_indices(dataset.len(), params.seed);
    let n_features = dataset.kind.config_length();

    let pooled = pool(train.iter().map(|&i| bits[i].as_slice()));
    let targets: Vec<f64> = train.iter().flat_map(|&i| [y[i], y[i] * y[i]]).collect();
    let grown: Vec<(DecisionTree, Vec<u32>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(&pooled, &targets, 2, n_features, Criterion::Mse, params, t))
        .collect();

    let oob_rmse = params.bootstrap.then(|| {
        let mut sse = 0.0;
        let mut n = 0usize;
        for (r, &i) in train.iter().enumerate() {
            let outs: Vec<f64> = grown.iter().filter(|(_, c)| c[r] == 0).map(|(t, _)| t.leaf_of(&bits[i])[0]).collect();
            if !outs.is_empty() {
                let p = outs.iter().sum::<f64>() / outs.len() as f64;
                sse += (p - y[i]) * (p - y[i]);
                n += 1;
            }
        }
        if n > 0 {
            (sse / n as f64).sqrt()
        } else {
            f64::NAN
        }
    });
    let oob_rmse = oob_rmse.filter(|v| !v.is_nan());

    let model =
        ForestRegressor { params: *params, n_features, target, trees: grown.into_iter().map(|(t, _)| t).collect() };
    let eval = |rows: &[usize]| -> Result<(f64, f64)> {
        let pred: Vec<f64> = rows.iter().map(|&i| model.predict(&bits[i])).collect::<Result<_>>()?;
        let truth: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
        Ok(rmse_r2(&pred, &truth))
    };
    let (train_rmse, train_r2) = eval(&train)?;
    let (test_rmse, test_r2) = eval(&test)?;
    let (lo, hi) = crate::stats::bounds(&y);
    let report = RegressorReport {
        target,
        train_rows: train.len(),
        test_rows: test.len(),
        train_rmse,
        test_rmse,
        test_rmse_scaled: if hi > lo { test_rmse / (hi - lo) } else { 0.0 },
        train_r2,
        test_r2,
        oob_rmse,
    };
    Ok((model, report))
}

#[derive(Debug, Clone)]
pub struct GridSearch {
    pub model: ForestRegressor,
    pub report: RegressorReport,
    /// `(n_trees, max_depth, test_rmse)` for every grid point.
    pub results: Vec<(usize, usize, f64)>,
}

/// Trains every grid point on the same split and keeps the lowest test RMSE
/// (first wins on ties).
pub fn grid_search_regressor(dataset: &CharDataset, target: Metric, base: &ForestParams) -> Result<GridSearch> {
    let mut best: Option<(ForestRegressor, RegressorReport)> = None;
    let mut results = Vec::new();
    for &n_trees in &GRID_TREES {
        for &max_depth in &GRID_DEPTHS {
            let params = ForestParams { n_trees, max_depth, ..*base };
            let (m, r) = train_regressor(dataset, target, &params)?;
            results.push((n_trees, max_depth, r.test_rmse));
            if best.as_ref().is_none_or(|b| r.test_rmse < b.1.test_rmse) {
                best = Some((m, r));
            }
        }
    }
    let (model, report) = best.expect("grid is non-empty");
    Ok(GridSearch { model, report, results })
}
