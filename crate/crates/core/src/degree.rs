//! Degree sequences: validation, graphicality, and the static pair factor.

use crate::error::{Error, Result};

/// A validated degree sequence for a simple graph on `n` vertices.
///
/// Construction checks that the degree sum is even, every degree fits in
/// `0..=n-1`, and the sequence is graphical.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSequence {
    degrees: Vec<usize>,
    m: usize,
    d_max: usize,
    d_bar: f64,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        let n = degrees.len();
        let sum: u64 = degrees.iter().map(|&d| d as u64).sum();
        if !sum.is_multiple_of(2) {
            return Err(Error::OddDegreeSum(sum));
        }
        for (i, &d) in degrees.iter().enumerate() {
            if n > 0 && d > n - 1 {
                return Err(Error::DegreeOutOfRange {
                    vertex: i,
                    degree: d,
                    max: n - 1,
                });
            }
        }
        if !is_graphical(&degrees) {
            return Err(Error::NotGraphical);
        }
        let d_max = degrees.iter().copied().max().unwrap_or(0);
        let d_bar = if n == 0 { 0.0 } else { sum as f64 / n as f64 };
        Ok(Self {
            degrees,
            m: (sum / 2) as usize,
            d_max,
            d_bar,
        })
    }

    /// `n` copies of `k`.
    pub fn regular(n: usize, k: usize) -> Result<Self> {
        Self::new(vec![k; n])
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Total edge count m = (1/2) Σ d_i.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// Average degree.
    pub fn d_bar(&self) -> f64 {
        self.d_bar
    }
}

/// Erdős–Gallai test: true iff some simple graph realizes the sequence.
///
/// Total function; degrees larger than n-1 simply make it return false.
pub fn is_graphical(degrees: &[usize]) -> bool {
    let n = degrees.len();
    if n == 0 {
        return true;
    }
    let sum: u64 = degrees.iter().map(|&d| d as u64).sum();
    if !sum.is_multiple_of(2) {
        return false;
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    // suffix[i] = sum of sorted[i..]
    let mut suffix = vec![0u64; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + sorted[i] as u64;
    }
    let mut prefix = 0u64;
    for k in 1..=n {
        prefix += sorted[k - 1] as u64;
        // Split the tail at the first index with sorted[i] < k. `sorted` is
        // non-increasing, so partition_point gives it in O(log n).
        let tail = &sorted[k..];
        let cut = tail.partition_point(|&d| d >= k);
        let min_sum = (cut as u64) * (k as u64) + suffix[k + cut];
        if prefix > (k as u64) * (k as u64 - 1) + min_sum {
            return false;
        }
    }
    true
}

/// m = (1/2) Σ d_i; errors on an odd degree sum.
pub fn total_edges(degrees: &[usize]) -> Result<usize> {
    let sum: u64 = degrees.iter().map(|&d| d as u64).sum();
    if !sum.is_multiple_of(2) {
        return Err(Error::OddDegreeSum(sum));
    }
    Ok((sum / 2) as usize)
}

/// The step-independent factor w_ij = 1 - d_i d_j / (4m).
pub fn pair_degree_factor(d_i: usize, d_j: usize, m: usize) -> Result<f64> {
    if m == 0 || d_i == 0 || d_j == 0 {
        return Err(Error::InvalidParameter(
            "pair_degree_factor requires m >= 1 and positive degrees".into(),
        ));
    }
    let prod = d_i * d_j;
    if prod > 4 * m {
        return Err(Error::NegativePairFactor(prod, 4 * m));
    }
    Ok(1.0 - prod as f64 / (4.0 * m as f64))
}
