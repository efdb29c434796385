//! Prefix-sum (binary indexed) tree over nonnegative leaf weights, supporting
//! point updates and weighted index sampling in O(log n).

/// Fenwick tree that also keeps the raw leaf array and a count of nonzero
/// leaves, so exhaustion checks are exact rather than floating-point.
#[derive(Debug, Clone)]
pub struct FenwickTree {
    tree: Vec<f64>,
    leaves: Vec<f64>,
    nonzero: usize,
    mask: usize,
}

impl FenwickTree {
    /// Builds in O(n) from an initial weight vector.
    pub fn from_weights(weights: &[f64]) -> Self {
        let n = weights.len();
        let mut tree = vec![0.0; n + 1];
        tree[1..].copy_from_slice(weights);
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        let mut mask = 1usize;
        while mask * 2 <= n {
            mask *= 2;
        }
        FenwickTree {
            tree,
            leaves: weights.to_vec(),
            nonzero: weights.iter().filter(|&&w| w != 0.0).count(),
            mask,
        }
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn leaf(&self, i: usize) -> f64 {
        self.leaves[i]
    }

    pub fn nonzero_leaves(&self) -> usize {
        self.nonzero
    }

    /// Sum of leaves `0..i`.
    pub fn prefix_sum(&self, i: usize) -> f64 {
        let mut i = i;
        let mut acc = 0.0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }

    pub fn total(&self) -> f64 {
        self.prefix_sum(self.len())
    }

    /// Sets leaf `i` to `w`.
    pub fn set(&mut self, i: usize, w: f64) {
        let delta = w - self.leaves[i];
        if self.leaves[i] == 0.0 && w != 0.0 {
            self.nonzero += 1;
        } else if self.leaves[i] != 0.0 && w == 0.0 {
            self.nonzero -= 1;
        }
        self.leaves[i] = w;
        let mut j = i + 1;
        while j <= self.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    pub fn zero(&mut self, i: usize) {
        if self.leaves[i] != 0.0 {
            self.set(i, 0.0);
        }
    }

    /// Rebuilds internal nodes from the leaf array, clearing accumulated
    /// floating-point drift from incremental updates.
    pub fn rebuild(&mut self) {
        *self = FenwickTree::from_weights(&self.leaves.clone());
    }

    /// Index of the leaf whose cumulative interval contains `u`; requires
    /// `0 <= u < total()`. Guarded against landing on a zero leaf through
    /// rounding at interval boundaries.
    pub fn sample(&self, mut u: f64) -> usize {
        let n = self.len();
        debug_assert!(u >= 0.0);
        let mut pos = 0usize;
        let mut bm = self.mask;
        while bm != 0 {
            let next = pos + bm;
            if next <= n && self.tree[next] <= u {
                u -= self.tree[next];
                pos = next;
            }
            bm >>= 1;
        }
        let mut idx = pos.min(n - 1);
        if self.leaves[idx] == 0.0 {
            let forward = (idx + 1..n).find(|&j| self.leaves[j] != 0.0);
            idx = forward
                .or_else(|| (0..idx).rev().find(|&j| self.leaves[j] != 0.0))
                .unwrap_or(idx);
        }
        idx
    }
}
