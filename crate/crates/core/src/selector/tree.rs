use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Label;

/// Tree nodes live in an arena; the root is node 0. A sample goes left when
/// `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        counts: [u32; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        counts: [u32; 2],
    },
}

impl Node {
    pub fn counts(&self) -> [u32; 2] {
        match self {
            Node::Leaf { counts } | Node::Split { counts, .. } => *counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub max_features: usize,
}

pub fn gini(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0] + counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    let p = f64::from(counts[0]) / n;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct Candidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn count(labels: &[Label], idx: &[usize]) -> [u32; 2] {
    let mut c = [0; 2];
    for &i in idx {
        c[labels[i].index()] += 1;
    }
    c
}

/// Lowest weighted child impurity over the midpoints of one feature.
fn best_threshold(
    x: &[Vec<f64>],
    y: &[Label],
    idx: &[usize],
    feature: usize,
    min_leaf: usize,
    total: [u32; 2],
) -> Option<Candidate> {
    let mut pairs: Vec<(f64, Label)> = idx.iter().map(|&i| (x[i][feature], y[i])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let mut left = [0u32; 2];
    let mut best: Option<Candidate> = None;
    for i in 0..n - 1 {
        left[pairs[i].1.index()] += 1;
        let (lo, hi) = (pairs[i].0, pairs[i + 1].0);
        let n_left = i + 1;
        if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let impurity = (n_left as f64 * gini(left) + (n - n_left) as f64 * gini(right)) / n as f64;
        if best.as_ref().is_none_or(|b| impurity < b.impurity) {
            let mid = lo + (hi - lo) / 2.0;
            let threshold = if mid < hi { mid } else { lo };
            best = Some(Candidate {
                feature,
                threshold,
                impurity,
            });
        }
    }
    best
}

fn best_split(
    x: &[Vec<f64>],
    y: &[Label],
    idx: &[usize],
    features: impl IntoIterator<Item = usize>,
    min_leaf: usize,
    total: [u32; 2],
) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for f in features {
        if let Some(c) = best_threshold(x, y, idx, f, min_leaf, total) {
            if best.as_ref().is_none_or(|b| c.impurity < b.impurity) {
                best = Some(c);
            }
        }
    }
    best
}

impl DecisionTree {
    /// Grows a tree on `sample` (indices into `x`, repeats allowed).
    pub(crate) fn fit(x: &[Vec<f64>], y: &[Label], sample: Vec<usize>, params: TreeParams, rng: &mut impl Rng) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let mut nodes = vec![Node::Leaf { counts: [0; 2] }];
        let mut stack = vec![(0usize, sample, 0usize)];
        while let Some((id, idx, depth)) = stack.pop() {
            let counts = count(y, &idx);
            nodes[id] = Node::Leaf { counts };
            let pure = counts[0] == 0 || counts[1] == 0;
            let deep = params.max_depth.is_some_and(|m| depth >= m);
            if pure || deep || idx.len() < 2 * params.min_leaf || d == 0 {
                continue;
            }
            let m = params.max_features.clamp(1, d);
            let chosen = rand::seq::index::sample(rng, d, m).into_vec();
            let split = best_split(x, y, &idx, chosen.iter().copied(), params.min_leaf, counts).or_else(|| {
                let rest = (0..d).filter(|f| !chosen.contains(f));
                best_split(x, y, &idx, rest, params.min_leaf, counts)
            });
            let Some(split) = split else { continue };
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| x[i][split.feature] <= split.threshold);
            let left = nodes.len();
            nodes.push(Node::Leaf { counts: [0; 2] });
            nodes.push(Node::Leaf { counts: [0; 2] });
            nodes[id] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right: left + 1,
                counts,
            };
            stack.push((left + 1, right_idx, depth + 1));
            stack.push((left, left_idx, depth + 1));
        }
        DecisionTree { nodes }
    }

    pub fn leaf_counts(&self, v: &[f64]) -> [u32; 2] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => id = if v[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Majority class of the reached leaf; SQL wins ties.
    pub fn vote(&self, v: &[f64]) -> Label {
        let c = self.leaf_counts(v);
        if c[0] >= c[1] {
            Label::SqlCorrect
        } else {
            Label::E2eCorrect
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gini_values() {
        assert_eq!(gini([0, 0]), 0.0);
        assert_eq!(gini([3, 0]), 0.0);
        assert!((gini([2, 2]) - 0.5).abs() < 1e-15);
        assert!((gini([1, 3]) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn fits_xor_exactly() {
        let x = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = vec![Label::SqlCorrect, Label::E2eCorrect, Label::E2eCorrect, Label::SqlCorrect];
        let params = TreeParams {
            max_depth: None,
            min_leaf: 1,
            max_features: 2,
        };
        let tree = DecisionTree::fit(&x, &y, (0..4).collect(), params, &mut ChaCha8Rng::seed_from_u64(1));
        for (v, l) in x.iter().zip(&y) {
            assert_eq!(tree.vote(v), *l);
        }
        assert_eq!(tree.depth(), 2);
    }

    #[test]
    fn max_depth_zero_is_a_stump_leaf() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = vec![Label::E2eCorrect, Label::E2eCorrect, Label::SqlCorrect];
        let params = TreeParams {
            max_depth: Some(0),
            min_leaf: 1,
            max_features: 1,
        };
        let tree = DecisionTree::fit(&x, &y, (0..3).collect(), params, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(tree.nodes, vec![Node::Leaf { counts: [1, 2] }]);
    }

    #[test]
    fn split_threshold_is_a_midpoint() {
        let x = vec![vec![1.0], vec![3.0]];
        let y = vec![Label::SqlCorrect, Label::E2eCorrect];
        let params = TreeParams {
            max_depth: None,
            min_leaf: 1,
            max_features: 1,
        };
        let tree = DecisionTree::fit(&x, &y, vec![0, 1], params, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(tree.nodes[0], Node::Split { feature: 0, threshold, .. } if threshold == 2.0));
    }
}
