//! CART regression trees with variance-reduction splits.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

/// Column-major feature values with each column's row order sorted by value.
pub(crate) struct Presorted {
    cols: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &Matrix) -> Self {
        let cols: Vec<Vec<f64>> = (0..x.cols())
            .map(|j| (0..x.rows()).map(|i| x.get(i, j)).collect())
            .collect();
        let order = cols
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Self { cols, order }
    }

    fn rows(&self) -> usize {
        self.order.first().map_or(0, Vec::len)
    }
}

struct Work {
    node: usize,
    depth: usize,
    lists: Vec<Vec<u32>>,
}

impl Tree {
    pub fn fit(x: &Matrix, y: &[f64], max_depth: Option<usize>, min_samples_split: usize) -> Result<Self> {
        if x.rows() != y.len() || x.rows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                got: y.len(),
            });
        }
        Ok(Self::fit_presorted(&Presorted::new(x), y, max_depth, min_samples_split))
    }

    pub(crate) fn fit_presorted(
        data: &Presorted,
        y: &[f64],
        max_depth: Option<usize>,
        min_samples_split: usize,
    ) -> Self {
        let n = data.rows();
        let f = data.cols.len();
        let mut nodes = vec![Node::Leaf { value: 0.0 }];
        let mut stack = vec![Work {
            node: 0,
            depth: 0,
            lists: data.order.clone(),
        }];
        let mut goes_left = vec![false; n];

        while let Some(Work { node, depth, lists }) = stack.pop() {
            let rows = &lists[0];
            let count = rows.len();
            let mean = rows.iter().map(|&i| y[i as usize]).sum::<f64>() / count as f64;
            let (lo, hi) = rows
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(y[i as usize]), hi.max(y[i as usize]))
                });
            let at_depth = max_depth.is_some_and(|d| depth >= d);
            if at_depth || count < min_samples_split.max(2) || lo == hi {
                nodes[node] = Node::Leaf { value: mean };
                continue;
            }

            let total: f64 = rows.iter().map(|&i| y[i as usize] - mean).sum();
            let mut best: Option<(f64, usize, f64)> = None;
            for (j, list) in lists.iter().enumerate() {
                let col = &data.cols[j];
                let mut left = 0.0;
                for pos in 0..count - 1 {
                    let id = list[pos] as usize;
                    left += y[id] - mean;
                    let v = col[id];
                    let next = col[list[pos + 1] as usize];
                    if next <= v {
                        continue;
                    }
                    let nl = (pos + 1) as f64;
                    let nr = (count - pos - 1) as f64;
                    let right = total - left;
                    let gain = left * left / nl + right * right / nr;
                    if best.is_none_or(|(g, _, _)| gain > g) {
                        let mut t = v + (next - v) / 2.0;
                        if t >= next {
                            t = v;
                        }
                        best = Some((gain, j, t));
                    }
                }
            }
            let Some((gain, feature, threshold)) = best.filter(|b| b.0 > 0.0) else {
                nodes[node] = Node::Leaf { value: mean };
                continue;
            };
            debug_assert!(gain > 0.0 && feature < f);

            let col = &data.cols[feature];
            for &i in rows {
                goes_left[i as usize] = col[i as usize] <= threshold;
            }
            let mut left_lists = Vec::with_capacity(f);
            let mut right_lists = Vec::with_capacity(f);
            for list in &lists {
                let (l, r): (Vec<u32>, Vec<u32>) = list.iter().partition(|&&i| goes_left[i as usize]);
                left_lists.push(l);
                right_lists.push(r);
            }
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[node] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
            stack.push(Work {
                node: right,
                depth: depth + 1,
                lists: right_lists,
            });
            stack.push(Work {
                node: left,
                depth: depth + 1,
                lists: left_lists,
            });
        }
        Tree { nodes }
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
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

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}
