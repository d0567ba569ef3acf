use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::DesignMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Informative features examined per split.
    pub features_per_split: usize,
}

/// Tree node; `left` and `right` index into the tree's node list. Samples
/// with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        samples: usize,
    },
}

/// Binary regression tree grown by greedy squared-error splitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

/// Mean written as an offset from the first value, so a node whose targets
/// are all equal reproduces that value exactly.
fn stable_mean(y: &[f64], samples: &[usize]) -> f64 {
    let first = y[samples[0]];
    let offset: f64 = samples.iter().map(|&i| y[i] - first).sum();
    first + offset / samples.len() as f64
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Candidate {
    /// Higher score wins; ties go to the lower feature, then lower threshold.
    fn beats(&self, other: &Candidate) -> bool {
        self.score > other.score
            || (self.score == other.score
                && (self.feature < other.feature
                    || (self.feature == other.feature && self.threshold < other.threshold)))
    }
}

/// Best threshold on one feature.
///
/// With node-centred targets `c_i = y_i - mean`, the squared error of a split
/// is `sum c^2 - (S_L^2 / n_L + S_R^2 / n_R)`, so maximising
/// `score = S_L^2 / n_L + S_R^2 / n_R` minimises it. Candidate thresholds are
/// midpoints between consecutive distinct sorted values.
fn best_threshold(
    x: &DesignMatrix,
    centred: &[(usize, f64)],
    feature: usize,
    min_leaf: usize,
    total: f64,
    buf: &mut Vec<(f64, f64)>,
) -> Option<Candidate> {
    buf.clear();
    buf.extend(centred.iter().map(|&(i, c)| (x.get(i, feature), c)));
    buf.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = buf.len();
    let mut best: Option<Candidate> = None;
    let mut left_sum = 0.0;
    for k in 1..n {
        left_sum += buf[k - 1].1;
        if k < min_leaf || n - k < min_leaf || buf[k - 1].0 == buf[k].0 {
            continue;
        }
        let right_sum = total - left_sum;
        let score = left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64;
        if best.map_or(true, |b| score > b.score) {
            best = Some(Candidate {
                feature,
                threshold: midpoint(buf[k - 1].0, buf[k].0),
                score,
            });
        }
    }
    best
}

struct Pending {
    node: usize,
    samples: Vec<usize>,
    depth: usize,
}

impl RegressionTree {
    /// A single leaf predicting `value`.
    pub fn constant(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value, samples: 0 }],
        }
    }

    /// Grows a tree on the rows listed in `samples` (repeats allowed).
    ///
    /// At each node features are visited in a random order until
    /// `features_per_split` of them have offered a valid split (or all have
    /// been tried); the best of those is taken if it strictly reduces the
    /// squared error.
    pub fn fit<R: Rng>(
        x: &DesignMatrix,
        y: &[f64],
        samples: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
    ) -> Self {
        let p = x.n_cols();
        let min_leaf = params.min_samples_leaf.max(1);
        let m = params.features_per_split.clamp(1, p);
        let mut nodes = vec![Node::Leaf {
            value: 0.0,
            samples: 0,
        }];
        let mut stack = vec![Pending {
            node: 0,
            samples,
            depth: 0,
        }];
        let mut order: Vec<usize> = (0..p).collect();
        let mut buf = Vec::new();

        while let Some(Pending {
            node,
            samples,
            depth,
        }) = stack.pop()
        {
            let mean = stable_mean(y, &samples);
            let leaf = Node::Leaf {
                value: mean,
                samples: samples.len(),
            };
            let depth_ok = params.max_depth.map_or(true, |d| depth < d);
            if !depth_ok || samples.len() < 2 * min_leaf {
                nodes[node] = leaf;
                continue;
            }
            let centred: Vec<(usize, f64)> = samples.iter().map(|&i| (i, y[i] - mean)).collect();
            let total: f64 = centred.iter().map(|c| c.1).sum();
            let sse: f64 = centred.iter().map(|c| c.1 * c.1).sum();
            if sse == 0.0 {
                nodes[node] = leaf;
                continue;
            }
            let parent_score = total * total / samples.len() as f64;

            order.shuffle(rng);
            let mut best: Option<Candidate> = None;
            let mut informative = 0;
            for &f in &order {
                if informative == m {
                    break;
                }
                if let Some(c) = best_threshold(x, &centred, f, min_leaf, total, &mut buf) {
                    informative += 1;
                    if best.map_or(true, |b| c.beats(&b)) {
                        best = Some(c);
                    }
                }
            }
            let Some(split) = best.filter(|b| b.score - parent_score > 1e-12 * sse) else {
                nodes[node] = leaf;
                continue;
            };

            let (left, right): (Vec<usize>, Vec<usize>) = samples
                .iter()
                .partition(|&&i| x.get(i, split.feature) <= split.threshold);
            let left_id = nodes.len();
            let right_id = left_id + 1;
            nodes.push(Node::Leaf {
                value: 0.0,
                samples: 0,
            });
            nodes.push(Node::Leaf {
                value: 0.0,
                samples: 0,
            });
            nodes[node] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: left_id,
                right: right_id,
            };
            stack.push(Pending {
                node: right_id,
                samples: right,
                depth: depth + 1,
            });
            stack.push(Pending {
                node: left_id,
                samples: left,
                depth: depth + 1,
            });
        }
        Self { nodes }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
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
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub(crate) fn is_well_formed(&self, n_features: usize) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().all(|n| match *n {
                Node::Leaf { value, .. } => value.is_finite(),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    feature < n_features
                        && threshold.is_finite()
                        && left < self.nodes.len()
                        && right < self.nodes.len()
                }
            })
    }
}
