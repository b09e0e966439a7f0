//! Gini CART trees.

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Leaf {
        label: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Sample-weighted impurity decrease of this split.
        gain: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

pub(crate) struct TreeParams {
    pub n_classes: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: usize,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    // First maximum wins, so ties go to the earlier class.
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Candidate {
    /// Larger gain wins; equal gains prefer the smaller threshold, then the
    /// lower feature index.
    fn beats(&self, other: &Candidate) -> bool {
        (self.gain, -self.threshold, std::cmp::Reverse(self.feature))
            .partial_cmp(&(other.gain, -other.threshold, std::cmp::Reverse(other.feature)))
            == Some(std::cmp::Ordering::Greater)
    }
}

impl Tree {
    pub(crate) fn fit<R: Rng>(x: &[Vec<f64>], y: &[usize], samples: Vec<usize>, params: &TreeParams, rng: &mut R) -> Tree {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow(x, y, samples, 0, params, rng);
        tree
    }

    fn grow<R: Rng>(
        &mut self,
        x: &[Vec<f64>],
        y: &[usize],
        samples: Vec<usize>,
        depth: usize,
        params: &TreeParams,
        rng: &mut R,
    ) -> usize {
        let id = self.nodes.len();
        let mut counts = vec![0usize; params.n_classes];
        for &i in &samples {
            counts[y[i]] += 1;
        }
        let n = samples.len();
        let impurity = gini(&counts, n);
        self.nodes.push(Node::Leaf { label: majority(&counts) });

        let depth_ok = params.max_depth.map_or(true, |d| depth < d);
        if impurity == 0.0 || n < params.min_samples_split || !depth_ok {
            return id;
        }
        let Some(best) = self.best_split(x, y, &samples, &counts, impurity, params, rng) else {
            return id;
        };

        let (left, right): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&i| x[i][best.feature] <= best.threshold);
        let l = self.grow(x, y, left, depth + 1, params, rng);
        let r = self.grow(x, y, right, depth + 1, params, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
            gain: best.gain,
        };
        id
    }

    #[allow(clippy::too_many_arguments)]
    fn best_split<R: Rng>(
        &self,
        x: &[Vec<f64>],
        y: &[usize],
        samples: &[usize],
        counts: &[usize],
        impurity: f64,
        params: &TreeParams,
        rng: &mut R,
    ) -> Option<Candidate> {
        let n = samples.len();
        let d = x[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(rng);

        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        let mut sorted = samples.to_vec();
        for feature in features {
            if visited == params.features_per_split {
                break;
            }
            sorted.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
            let first = x[sorted[0]][feature];
            let last = x[sorted[n - 1]][feature];
            // Constant features do not count toward the per-node budget.
            if first == last {
                continue;
            }
            visited += 1;

            let mut left = vec![0usize; params.n_classes];
            for pos in 0..n - 1 {
                left[y[sorted[pos]]] += 1;
                let (a, b) = (x[sorted[pos]][feature], x[sorted[pos + 1]][feature]);
                if a == b {
                    continue;
                }
                let nl = pos + 1;
                let nr = n - nl;
                let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
                let gain = n as f64 * impurity - nl as f64 * gini(&left, nl) - nr as f64 * gini(&right, nr);
                let cand = Candidate {
                    feature,
                    threshold: a + (b - a) / 2.0,
                    gain,
                };
                if best.as_ref().map_or(true, |b| cand.beats(b)) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { label } => return *label,
                Node::Split { feature, threshold, left, right, .. } => {
                    id = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    /// Summed split gains per feature.
    pub(crate) fn gains(&self, n_features: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_features];
        for node in &self.nodes {
            if let Node::Split { feature, gain, .. } = node {
                out[*feature] += gain;
            }
        }
        out
    }
}
