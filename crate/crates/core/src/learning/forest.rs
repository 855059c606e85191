//! Random forests of gini-split decision trees, one forest per label.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::model::{BinaryScorer, ModelConfig, ModelKind, MultiLabelModel};
use crate::error::{Error, Result};
use crate::labels::{ReasonLabel, NUM_LABELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeight {
    /// Each class gets `n / (2 · n_class)`.
    Balanced,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    /// `max(1, floor(sqrt(d)))` candidate features per split.
    Sqrt,
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            FeaturesPerSplit::Sqrt => (n_features as f64).sqrt().floor() as usize,
            FeaturesPerSplit::All => n_features,
            FeaturesPerSplit::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub class_weight: ClassWeight,
    pub features_per_split: FeaturesPerSplit,
    pub min_samples_split: usize,
    /// Train each tree on a bootstrap resample; otherwise on the full set.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 1000,
            max_depth: 20,
            class_weight: ClassWeight::Balanced,
            features_per_split: FeaturesPerSplit::Sqrt,
            min_samples_split: 2,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if let FeaturesPerSplit::Count(0) = self.features_per_split {
            return Err(Error::Config("features_per_split must be at least 1".into()));
        }
        Ok(())
    }
}

/// Gini impurity `1 - p² - q²` of a weighted binary node.
pub fn gini(pos_weight: f64, neg_weight: f64) -> Result<f64> {
    if pos_weight < 0.0 || neg_weight < 0.0 {
        return Err(Error::InvalidArgument("gini weights must be non-negative".into()));
    }
    let total = pos_weight + neg_weight;
    if total == 0.0 {
        return Err(Error::InvalidArgument("gini of an empty node".into()));
    }
    Ok(gini_unchecked(pos_weight, neg_weight))
}

fn gini_unchecked(pos: f64, neg: f64) -> f64 {
    let total = pos + neg;
    let p = pos / total;
    let q = neg / total;
    1.0 - p * p - q * q
}

/// `(w_pos, w_neg)` for a binary label column. An absent class gets weight 0.
pub fn class_weights(labels: &[bool], mode: ClassWeight) -> (f64, f64) {
    match mode {
        ClassWeight::Uniform => (1.0, 1.0),
        ClassWeight::Balanced => {
            let n = labels.len() as f64;
            let n_pos = labels.iter().filter(|&&y| y).count() as f64;
            let n_neg = n - n_pos;
            let w = |count: f64| if count > 0.0 { n / (2.0 * count) } else { 0.0 };
            (w(n_pos), w(n_neg))
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one tree, a pure function of the master seed and its position.
pub fn tree_seed(master: u64, label_index: usize, tree_index: usize) -> u64 {
    let lane = ((label_index as u64) << 40) ^ tree_index as u64;
    splitmix64(splitmix64(master) ^ splitmix64(lane))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { score: f64 },
}

/// A binary tree stored as a node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { score } => return *score,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Checks child indices point forward and every node is reachable once.
    pub(crate) fn check_structure(&self, n_features: usize) -> std::result::Result<(), String> {
        if self.nodes.is_empty() {
            return Err("empty tree".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                return Err(format!("node {i} reached twice"));
            }
            match &self.nodes[i] {
                TreeNode::Leaf { score } => {
                    if !(0.0..=1.0).contains(score) {
                        return Err(format!("leaf score {score} outside [0, 1]"));
                    }
                }
                TreeNode::Split {
                    feature,
                    left,
                    right,
                    ..
                } => {
                    if *feature >= n_features {
                        return Err(format!("split on feature {feature} of {n_features}"));
                    }
                    for &c in [left, right] {
                        if c <= i || c >= self.nodes.len() {
                            return Err(format!("node {i} has bad child {c}"));
                        }
                        stack.push(c);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("unreachable nodes".into());
        }
        Ok(())
    }
}

struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    /// Lower impurity wins; exact ties go to the lower feature index, then
    /// the lower threshold.
    fn beats(&self, other: &Candidate) -> bool {
        (self.impurity, self.feature, self.threshold)
            .partial_cmp(&(other.impurity, other.feature, other.threshold))
            .map_or(false, |o| o.is_lt())
    }
}

struct TreeGrower<'a> {
    data: &'a Dataset,
    y: &'a [bool],
    weight: &'a [f64],
    max_depth: usize,
    min_samples_split: usize,
    k_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<TreeNode>,
    importance: Vec<f64>,
    root_weight: f64,
    // Scratch buffer reused across split searches.
    sorted: Vec<(f64, usize)>,
}

impl TreeGrower<'_> {
    fn node_weights(&self, samples: &[usize]) -> (f64, f64) {
        samples.iter().fold((0.0, 0.0), |(p, n), &s| {
            if self.y[s] {
                (p + self.weight[s], n)
            } else {
                (p, n + self.weight[s])
            }
        })
    }

    fn grow(&mut self, samples: &mut [usize], depth: usize) -> usize {
        let (pos, neg) = self.node_weights(samples);
        let total = pos + neg;
        let id = self.nodes.len();
        let leaf_score = if total > 0.0 { pos / total } else { 0.0 };
        self.nodes.push(TreeNode::Leaf { score: leaf_score });

        if depth >= self.max_depth || pos == 0.0 || neg == 0.0 || samples.len() < self.min_samples_split {
            return id;
        }
        let Some(best) = self.best_split(samples) else {
            return id;
        };

        let parent_gini = gini_unchecked(pos, neg);
        let decrease = (total / self.root_weight) * (parent_gini - best.impurity);
        self.importance[best.feature] += decrease.max(0.0);

        let column = self.data.column(best.feature);
        let mut split_at = 0;
        for i in 0..samples.len() {
            if column[samples[i]] <= best.threshold {
                samples.swap(i, split_at);
                split_at += 1;
            }
        }
        let (left_samples, right_samples) = samples.split_at_mut(split_at);
        let left = self.grow(left_samples, depth + 1);
        let right = self.grow(right_samples, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Scans features in a random order until `k_features` non-constant ones
    /// have been evaluated.
    fn best_split(&mut self, samples: &[usize]) -> Option<Candidate> {
        let mut order: Vec<usize> = (0..self.data.n_features()).collect();
        order.shuffle(&mut self.rng);
        let mut best: Option<Candidate> = None;
        let mut evaluated = 0;
        let mut sorted = std::mem::take(&mut self.sorted);
        for feature in order {
            if evaluated == self.k_features {
                break;
            }
            let column = self.data.column(feature);
            sorted.clear();
            sorted.extend(samples.iter().map(|&s| (column[s], s)));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if sorted[0].0 == sorted[sorted.len() - 1].0 {
                continue;
            }
            evaluated += 1;

            let (tot_pos, tot_neg) = self.node_weights(samples);
            let total = tot_pos + tot_neg;
            let (mut lp, mut ln) = (0.0, 0.0);
            for w in 0..sorted.len() - 1 {
                let (value, s) = sorted[w];
                if self.y[s] {
                    lp += self.weight[s];
                } else {
                    ln += self.weight[s];
                }
                let next = sorted[w + 1].0;
                if value == next {
                    continue;
                }
                let (rp, rn) = (tot_pos - lp, tot_neg - ln);
                let (wl, wr) = (lp + ln, rp + rn);
                if wl <= 0.0 || wr <= 0.0 {
                    continue;
                }
                let impurity = (wl * gini_unchecked(lp, ln) + wr * gini_unchecked(rp, rn)) / total;
                let mut threshold = value + (next - value) / 2.0;
                if threshold >= next {
                    threshold = value;
                }
                let cand = Candidate {
                    impurity,
                    feature,
                    threshold,
                };
                if best.as_ref().map_or(true, |b| cand.beats(b)) {
                    best = Some(cand);
                }
            }
        }
        self.sorted = sorted;
        best
    }
}

/// Grows one tree; returns it with its unnormalized impurity decreases.
fn grow_tree(
    data: &Dataset,
    y: &[bool],
    class_w: (f64, f64),
    config: &ForestConfig,
    seed: u64,
) -> (DecisionTree, Vec<f64>) {
    let n = data.n_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut multiplicity = vec![0u32; n];
    if config.bootstrap {
        for _ in 0..n {
            multiplicity[rng.gen_range(0..n)] += 1;
        }
    } else {
        multiplicity.fill(1);
    }
    let weight: Vec<f64> = (0..n)
        .map(|i| f64::from(multiplicity[i]) * if y[i] { class_w.0 } else { class_w.1 })
        .collect();
    let mut samples: Vec<usize> = (0..n).filter(|&i| multiplicity[i] > 0).collect();
    let root_weight: f64 = samples.iter().map(|&i| weight[i]).sum();

    let mut grower = TreeGrower {
        data,
        y,
        weight: &weight,
        max_depth: config.max_depth,
        min_samples_split: config.min_samples_split,
        k_features: config.features_per_split.resolve(data.n_features()),
        rng,
        nodes: Vec::new(),
        importance: vec![0.0; data.n_features()],
        root_weight,
        sorted: Vec::with_capacity(samples.len()),
    };
    if root_weight > 0.0 {
        grower.grow(&mut samples, 0);
    } else {
        grower.nodes.push(TreeNode::Leaf { score: 0.0 });
    }
    (
        DecisionTree {
            nodes: grower.nodes,
        },
        grower.importance,
    )
}

/// Normalizes to unit sum, or leaves all zeros.
pub(crate) fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        v.iter_mut().for_each(|x| *x /= sum);
    } else {
        v.fill(0.0);
    }
    v
}

pub(super) fn train(data: &Dataset, config: &ForestConfig) -> Result<MultiLabelModel> {
    config.validate()?;
    if data.n_rows() < 2 {
        return Err(Error::InvalidArgument(
            "forest training needs at least 2 samples".into(),
        ));
    }
    let d = data.n_features();
    let columns: Vec<Vec<bool>> = ReasonLabel::ALL.iter().map(|&l| data.label_column(l)).collect();
    let weights: Vec<(f64, f64)> = columns
        .iter()
        .map(|y| class_weights(y, config.class_weight))
        .collect();
    let degenerate: Vec<Option<f64>> = columns
        .iter()
        .map(|y| {
            let pos = y.iter().filter(|&&b| b).count();
            if pos == 0 {
                Some(0.0)
            } else if pos == y.len() {
                Some(1.0)
            } else {
                None
            }
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..NUM_LABELS)
        .filter(|&l| degenerate[l].is_none())
        .flat_map(|l| (0..config.n_trees).map(move |t| (l, t)))
        .collect();
    let grown: Vec<(DecisionTree, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(l, t)| grow_tree(data, &columns[l], weights[l], config, tree_seed(config.seed, l, t)))
        .collect();

    let mut grown = grown.into_iter();
    let mut scorers = Vec::with_capacity(NUM_LABELS);
    let mut importances = Vec::with_capacity(NUM_LABELS);
    for constant in &degenerate {
        if let Some(score) = constant {
            scorers.push(BinaryScorer::Constant { score: *score });
            importances.push(vec![0.0; d]);
            continue;
        }
        let mut trees = Vec::with_capacity(config.n_trees);
        let mut summed = vec![0.0; d];
        for (tree, imp) in grown.by_ref().take(config.n_trees) {
            for (s, v) in summed.iter_mut().zip(imp) {
                *s += v;
            }
            trees.push(tree);
        }
        let n_trees = trees.len() as f64;
        summed.iter_mut().for_each(|s| *s /= n_trees);
        importances.push(normalize(summed));
        scorers.push(BinaryScorer::Forest { trees });
    }

    Ok(MultiLabelModel {
        kind: ModelKind::Forest,
        mask: data.mask(),
        feature_names: data.feature_names().to_vec(),
        threshold: None,
        config: ModelConfig::Forest(config.clone()),
        scorers,
        importances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::LabelSet;

    #[test]
    fn gini_examples() {
        assert_eq!(gini(5.0, 5.0).unwrap(), 0.5);
        assert_eq!(gini(10.0, 0.0).unwrap(), 0.0);
        assert_eq!(gini(3.0, 1.0).unwrap(), 0.375);
        assert!(gini(0.0, 0.0).is_err());
        assert!(gini(-1.0, 2.0).is_err());
    }

    #[test]
    fn class_weight_examples() {
        let mut y = vec![true; 50];
        y.extend(vec![false; 50]);
        assert_eq!(class_weights(&y, ClassWeight::Balanced), (1.0, 1.0));
        let mut y = vec![true; 10];
        y.extend(vec![false; 90]);
        let (wp, wn) = class_weights(&y, ClassWeight::Balanced);
        assert_eq!(wp, 5.0);
        assert!((wn - 100.0 / 180.0).abs() < 1e-12);
        assert_eq!(class_weights(&[false; 4], ClassWeight::Balanced), (0.0, 0.5));
        assert_eq!(class_weights(&y, ClassWeight::Uniform), (1.0, 1.0));
    }

    #[test]
    fn features_per_split_resolution() {
        assert_eq!(FeaturesPerSplit::Sqrt.resolve(20), 4);
        assert_eq!(FeaturesPerSplit::Sqrt.resolve(4), 2);
        assert_eq!(FeaturesPerSplit::Sqrt.resolve(1), 1);
        assert_eq!(FeaturesPerSplit::Count(50).resolve(6), 6);
        assert_eq!(FeaturesPerSplit::All.resolve(6), 6);
    }

    #[test]
    fn tree_seeds_differ_by_position() {
        let a = tree_seed(1, 0, 0);
        assert_ne!(a, tree_seed(1, 0, 1));
        assert_ne!(a, tree_seed(1, 1, 0));
        assert_ne!(a, tree_seed(2, 0, 0));
        assert_eq!(a, tree_seed(1, 0, 0));
    }

    fn one_label_dataset(xs: &[f64], ys: &[bool]) -> Dataset {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let targets = ys
            .iter()
            .map(|&y| if y { LabelSet::all() } else { LabelSet::empty() })
            .collect();
        Dataset::new(&rows, targets, vec!["x".into()]).unwrap()
    }

    #[test]
    fn stump_weights_and_importance() {
        let ds = one_label_dataset(&[-2.0, -1.0, 1.0, 2.0], &[false, false, true, true]);
        let cfg = ForestConfig {
            n_trees: 3,
            max_depth: 1,
            bootstrap: false,
            ..ForestConfig::default()
        };
        let model = train(&ds, &cfg).unwrap();
        for l in 0..NUM_LABELS {
            assert_eq!(model.importances[l], vec![1.0]);
        }
        let BinaryScorer::Forest { trees } = &model.scorers[0] else {
            panic!("expected forest")
        };
        assert_eq!(
            trees[0].nodes[0],
            TreeNode::Split {
                feature: 0,
                threshold: 0.0,
                left: 1,
                right: 2
            }
        );
        assert_eq!(trees[0].depth(), 1);
        assert_eq!(model.predict(&[-5.0]).unwrap(), [0.0; 10]);
        assert_eq!(model.predict(&[5.0]).unwrap(), [1.0; 10]);
    }

    #[test]
    fn hand_computed_mdi_two_features() {
        // Feature 0 separates {0,1} from {2,3}; feature 1 then separates 2 from 3.
        // y = [0, 0, 1, 0], no bootstrap, uniform weights, all features.
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let t = |b: bool| if b { LabelSet::all() } else { LabelSet::empty() };
        let ds = Dataset::new(
            &rows,
            vec![t(false), t(false), t(true), t(false)],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: 5,
            class_weight: ClassWeight::Uniform,
            features_per_split: FeaturesPerSplit::All,
            bootstrap: false,
            ..ForestConfig::default()
        };
        let model = train(&ds, &cfg).unwrap();
        // Root gini 1 - (1/4)² - (3/4)² = 0.375.
        // Split on a: children {0,1} pure, {2,3} gini 0.5 → weighted 0.25; decrease 0.125.
        // Split on b: children {0,2} gini 0.5, {1,3} pure → same 0.25; tie → lower index a.
        // Node {2,3} (weight 2/4) split on b → pure; decrease 0.5·0.5 = 0.25.
        // Importance a = 0.125, b = 0.25 → normalized [1/3, 2/3].
        let imp = &model.importances[0];
        assert!((imp[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((imp[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_labels() {
        let ds = one_label_dataset(&[1.0, 2.0, 3.0], &[false, false, false]);
        let model = train(&ds, &ForestConfig { n_trees: 2, ..Default::default() }).unwrap();
        assert_eq!(model.predict(&[100.0]).unwrap(), [0.0; 10]);
        assert!(model.importances.iter().all(|v| v.iter().all(|&x| x == 0.0)));
        let ds = one_label_dataset(&[1.0, 2.0, 3.0], &[true, true, true]);
        let model = train(&ds, &ForestConfig { n_trees: 2, ..Default::default() }).unwrap();
        assert_eq!(model.predict(&[0.0]).unwrap(), [1.0; 10]);
    }

    #[test]
    fn rejects_bad_config_and_tiny_sets() {
        let ds = one_label_dataset(&[1.0], &[true]);
        assert!(train(&ds, &ForestConfig::default()).is_err());
        let ds = one_label_dataset(&[1.0, 2.0], &[true, false]);
        let bad = ForestConfig {
            n_trees: 0,
            ..Default::default()
        };
        assert!(matches!(train(&ds, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn depth_bounded() {
        let xs: Vec<f64> = (0..64).map(f64::from).collect();
        let ys: Vec<bool> = (0..64).map(|i| (i / 3) % 2 == 0).collect();
        let ds = one_label_dataset(&xs, &ys);
        let cfg = ForestConfig {
            n_trees: 5,
            max_depth: 3,
            ..Default::default()
        };
        let model = train(&ds, &cfg).unwrap();
        let BinaryScorer::Forest { trees } = &model.scorers[0] else {
            panic!()
        };
        for t in trees {
            assert!(t.depth() <= 3);
            t.check_structure(1).unwrap();
        }
    }
}
