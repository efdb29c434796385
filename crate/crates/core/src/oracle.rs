//! Exhaustive ground truth for tiny instances: the exact output law of the
//! sequential algorithm (failure branches included) and a two-route check of
//! the conditional-weight identity behind it.

use std::collections::BTreeMap;

use crate::degree::{pair_degree_factor, DegreeSequence};
use crate::dist::{importance_ratio, ReferenceDensity, TargetSpec};
use crate::error::{Error, Result};
use crate::sampler::{pair_index, WeightTable};

/// State-space guards: enumeration is exponential in the edge count.
pub const MAX_ORACLE_N: usize = 5;
pub const MAX_ORACLE_M: usize = 6;

/// Exact law of the sequential run as a map from edge sequences to
/// probabilities. Sequences that exhaust before reaching m edges are kept
/// separately with the partial prefix as key.
#[derive(Debug, Clone, Default)]
pub struct RunDistribution {
    pub complete: BTreeMap<Vec<(usize, usize)>, f64>,
    pub failures: BTreeMap<Vec<(usize, usize)>, f64>,
}

impl RunDistribution {
    /// Sum over all branches; must be 1.
    pub fn total_mass(&self) -> f64 {
        self.complete.values().sum::<f64>() + self.failure_probability()
    }

    pub fn failure_probability(&self) -> f64 {
        self.failures.values().sum()
    }

    /// Probability of realizing `edges` as a set, summed over orderings.
    pub fn matching_probability(&self, edges: &[(usize, usize)]) -> f64 {
        let mut want: Vec<(usize, usize)> =
            edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
        want.sort_unstable();
        self.complete
            .iter()
            .filter(|(seq, _)| {
                let mut got: Vec<(usize, usize)> = seq.to_vec();
                got.sort_unstable();
                got == want
            })
            .map(|(_, p)| p)
            .sum()
    }

    /// Branch probabilities keyed by first placed pair, failure branches
    /// included; empty-key mass is an immediate failure.
    pub fn first_step_marginal(&self) -> BTreeMap<Option<(usize, usize)>, f64> {
        let mut out = BTreeMap::new();
        for (seq, p) in self.complete.iter().chain(self.failures.iter()) {
            *out.entry(seq.first().copied()).or_insert(0.0) += p;
        }
        out
    }
}

/// Expands every edge choice of the sequential law depth-first, multiplying
/// exact step probabilities. Mirrors the sampler's semantics with default
/// options: degree correction on, exhaustion is an absorbing failure.
pub fn enumerate_run_distribution(
    degrees: &DegreeSequence,
    weights: &WeightTable,
    target: &TargetSpec,
    reference: &ReferenceDensity,
) -> Result<RunDistribution> {
    let n = degrees.n();
    let m = degrees.m();
    if n > MAX_ORACLE_N || m > MAX_ORACLE_M {
        return Err(Error::OracleInstanceTooLarge { n, m });
    }
    if weights.n() != n {
        return Err(Error::SizeMismatch(weights.n(), n));
    }
    let d = degrees.degrees();
    let pairs = n * n.saturating_sub(1) / 2;
    // Static part of each pair weight: (f/g)(r_ij) * w_ij.
    let mut static_w = vec![0.0; pairs];
    for i in 0..n {
        for j in i + 1..n {
            if d[i] > 0 && d[j] > 0 {
                let ratio = importance_ratio(target, reference, weights.r(i, j))?;
                if ratio > 0.0 {
                    static_w[pair_index(n, i, j)] = ratio * pair_degree_factor(d[i], d[j], m)?;
                }
            }
        }
    }
    let mut dist = RunDistribution::default();
    let mut remaining = d.to_vec();
    let mut placed = vec![false; pairs];
    let mut seq = Vec::with_capacity(m);
    expand(
        &mut dist,
        &static_w,
        &mut remaining,
        &mut placed,
        &mut seq,
        1.0,
        n,
        m,
    );
    Ok(dist)
}

#[allow(clippy::too_many_arguments)]
fn expand(
    dist: &mut RunDistribution,
    static_w: &[f64],
    remaining: &mut [usize],
    placed: &mut [bool],
    seq: &mut Vec<(usize, usize)>,
    prob: f64,
    n: usize,
    m: usize,
) {
    if seq.len() == m {
        dist.complete.insert(seq.clone(), prob);
        return;
    }
    let mut active = Vec::new();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let idx = pair_index(n, i, j);
            if placed[idx] {
                continue;
            }
            let w = static_w[idx] * (remaining[i] * remaining[j]) as f64;
            if w > 0.0 {
                active.push((idx, i, j, w));
                total += w;
            }
        }
    }
    if active.is_empty() {
        dist.failures.insert(seq.clone(), prob);
        return;
    }
    for (idx, i, j, w) in active {
        placed[idx] = true;
        remaining[i] -= 1;
        remaining[j] -= 1;
        seq.push((i, j));
        expand(
            dist,
            static_w,
            remaining,
            placed,
            seq,
            prob * w / total,
            n,
            m,
        );
        seq.pop();
        remaining[i] += 1;
        remaining[j] += 1;
        placed[idx] = false;
    }
}

/// Checks the conditional-weight identity two ways on a discrete law.
///
/// `X_1..X_n` are iid on `atoms` (value, probability); the index variable `I`
/// picks `i` with probability `c_i X_i / sum_j c_j X_j`. Returns, per atom,
/// the conditional probability `P(X_k = atom | I != k)` computed (a) by
/// exhaustive enumeration over all atom tuples and (b) by the closed-form
/// reweighting of the marginal law, expectations evaluated by the same
/// enumeration. The two vectors agree up to rounding on every valid input.
pub fn conditional_weight_law_check(
    n: usize,
    c: &[f64],
    atoms: &[(f64, f64)],
    k: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(2..=6).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "n must lie in 2..=6, got {n}"
        )));
    }
    if c.len() != n {
        return Err(Error::SizeMismatch(c.len(), n));
    }
    if c.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "index weights c must be positive and finite".into(),
        ));
    }
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "index k = {k} out of range for n = {n}"
        )));
    }
    if atoms.is_empty() || atoms.len() > 8 {
        return Err(Error::InvalidParameter(format!(
            "atom count must lie in 1..=8, got {}",
            atoms.len()
        )));
    }
    if atoms
        .iter()
        .any(|&(x, p)| x < 0.0 || p < 0.0 || !x.is_finite() || !p.is_finite())
    {
        return Err(Error::InvalidParameter(
            "atoms need nonnegative finite values and probabilities".into(),
        ));
    }
    let mass: f64 = atoms.iter().map(|&(_, p)| p).sum();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "atom probabilities sum to {mass}, expected 1"
        )));
    }
    if atoms.iter().all(|&(x, p)| x == 0.0 || p == 0.0) {
        return Err(Error::DegenerateLaw);
    }

    let a = atoms.len();
    // Exhaustive route over full tuples: bin the chooser mass at X_k's atom.
    let mut numer = vec![0.0; a];
    let mut denom = 0.0;
    let mut digits = vec![0usize; n];
    loop {
        let p_tuple: f64 = digits.iter().map(|&d| atoms[d].1).product();
        if p_tuple > 0.0 {
            let s_all: f64 = digits
                .iter()
                .enumerate()
                .map(|(i, &d)| c[i] * atoms[d].0)
                .sum();
            let s_rest = s_all - c[k] * atoms[digits[k]].0;
            let term = if s_all > 0.0 { s_rest / s_all } else { 0.0 };
            numer[digits[k]] += p_tuple * term;
            denom += p_tuple * term;
        }
        if !advance(&mut digits, a) {
            break;
        }
    }
    if denom <= 0.0 {
        return Err(Error::DegenerateLaw);
    }
    let exact: Vec<f64> = numer.iter().map(|x| x / denom).collect();

    // Formula route: reweight the marginal law by the conditional expectation
    // over the other n-1 coordinates.
    let mut formula = vec![0.0; a];
    for (ai, &(x, p_atom)) in atoms.iter().enumerate() {
        let mut rest = vec![0usize; n - 1];
        let mut expect = 0.0;
        loop {
            let p_rest: f64 = rest.iter().map(|&d| atoms[d].1).product();
            if p_rest > 0.0 {
                let mut s_rest = 0.0;
                let mut ci = 0;
                for (i, &cw) in c.iter().enumerate() {
                    if i != k {
                        s_rest += cw * atoms[rest[ci]].0;
                        ci += 1;
                    }
                }
                let den = c[k] * x + s_rest;
                if den > 0.0 {
                    expect += p_rest * s_rest / den;
                }
            }
            if !advance(&mut rest, a) {
                break;
            }
        }
        formula[ai] = expect * p_atom / denom;
    }
    Ok((exact, formula))
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Goodness-of-fit p-value of observed counts against expected probabilities.
/// Zero-probability bins with observations force p = 0.
pub fn chi_square_pvalue(observed: &[u64], expected: &[f64]) -> Result<f64> {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    if observed.len() != expected.len() {
        return Err(Error::SizeMismatch(observed.len(), expected.len()));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::EmptySamples);
    }
    let mut stat = 0.0;
    let mut df = 0i64;
    for (&o, &p) in observed.iter().zip(expected) {
        if p <= 0.0 {
            if o > 0 {
                return Ok(0.0);
            }
            continue;
        }
        let e = total as f64 * p;
        stat += (o as f64 - e) * (o as f64 - e) / e;
        df += 1;
    }
    df -= 1;
    if df < 1 {
        return Ok(1.0);
    }
    let chi = ChiSquared::new(df as f64)
        .map_err(|e| Error::InvalidParameter(format!("chi-square setup: {e}")))?;
    Ok(1.0 - chi.cdf(stat))
}
