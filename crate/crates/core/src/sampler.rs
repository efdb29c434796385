//! The sequential sampler: edge k is drawn with probability proportional to
//! `(f/g)(r_ij) * d_i^k * d_j^k * w_ij` over unplaced pairs, where `d_i^k` is
//! the remaining degree and `w_ij = 1 - d_i d_j / (4m)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::degree::{pair_degree_factor, DegreeSequence};
use crate::dist::{importance_ratio, ReferenceDensity, TargetSpec};
use crate::error::{Error, Result};
use crate::fenwick::FenwickTree;
use crate::geometry::PointCloud;

/// Pair distances are precomputed for clouds up to this many points.
pub const MATERIALIZE_CUTOFF: usize = 3000;

/// Steps between full recomputations of the active weight Z.
const Z_RECOMPUTE_INTERVAL: usize = 1024;

/// Consecutive rejected draws before falling back to an exact linear scan.
const REJECTION_GUARD: usize = 1_000_000;

/// Stub-count threshold below which forced placement checks completability
/// exhaustively before committing to a pair.
const LOOKAHEAD_STUBS: usize = 8;

/// Symmetric nonnegative pair weights r(i,j), stored explicitly or derived
/// from a point cloud with the torus metric.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Explicit {
        n: usize,
        upper: Vec<f64>,
    },
    Cloud {
        cloud: PointCloud,
        cache: Option<Vec<f64>>,
    },
}

impl WeightTable {
    /// Packed upper triangle in row-major pair order (0,1), (0,2), ...,
    /// (n-2, n-1).
    pub fn from_upper_tri(n: usize, upper: Vec<f64>) -> Result<Self> {
        let expect = n * n.saturating_sub(1) / 2;
        if upper.len() != expect {
            return Err(Error::SizeMismatch(upper.len(), expect));
        }
        if let Some(bad) = upper.iter().find(|&&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pair weight {bad} must be finite and nonnegative"
            )));
        }
        Ok(WeightTable {
            repr: Repr::Explicit { n, upper },
        })
    }

    /// Torus distances of a point cloud, materialized for small clouds and
    /// computed on demand otherwise.
    pub fn from_cloud(cloud: PointCloud) -> Self {
        let n = cloud.n();
        let cache = (n <= MATERIALIZE_CUTOFF).then(|| {
            let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    upper.push(cloud.distance(i, j));
                }
            }
            upper
        });
        WeightTable {
            repr: Repr::Cloud { cloud, cache },
        }
    }

    pub fn n(&self) -> usize {
        match &self.repr {
            Repr::Explicit { n, .. } => *n,
            Repr::Cloud { cloud, .. } => cloud.n(),
        }
    }

    /// Weight of the unordered pair {i, j}, i != j.
    pub fn r(&self, i: usize, j: usize) -> f64 {
        debug_assert_ne!(i, j, "diagonal weight r(i,i) is never defined");
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        match &self.repr {
            Repr::Explicit { n, upper } => upper[pair_index(*n, lo, hi)],
            Repr::Cloud { cloud, cache } => match cache {
                Some(upper) => upper[pair_index(cloud.n(), lo, hi)],
                None => cloud.distance(lo, hi),
            },
        }
    }
}

/// Index of pair (i, j), i < j, in row-major upper-triangle order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    row_offset(n, i) + (j - i - 1)
}

fn row_offset(n: usize, i: usize) -> usize {
    i * n - i * (i + 1) / 2
}

/// Inverse of [`pair_index`].
fn unpair_index(n: usize, idx: usize) -> (usize, usize) {
    let nf = n as f64;
    let disc = ((2.0 * nf - 1.0) * (2.0 * nf - 1.0) - 8.0 * idx as f64).max(0.0);
    let mut i = ((2.0 * nf - 1.0 - disc.sqrt()) / 2.0) as usize;
    i = i.min(n - 2);
    while row_offset(n, i) > idx {
        i -= 1;
    }
    while i + 1 < n - 1 && row_offset(n, i + 1) <= idx {
        i += 1;
    }
    (i, idx - row_offset(n, i) + i + 1)
}

/// What to do when the active weight Z hits zero while admissible pairs
/// (unplaced, both endpoints with remaining degree) still exist. The
/// proportional step law is undefined there, so `Fail` ends the run; with
/// `PlaceRemaining` the run keeps going, drawing pairs by remaining degrees
/// alone. Those edges ignore the target law, which is exactly the late-run
/// divergence visible in boundary-regime traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StallAction {
    Fail,
    PlaceRemaining,
}

/// Sampler tunables; the degree-correction factor w_ij can be switched off
/// for ablation runs.
#[derive(Debug, Clone)]
pub struct SamplerOptions {
    pub degree_correction: bool,
    pub on_stall: StallAction,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            degree_correction: true,
            on_stall: StallAction::Fail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    EarlyStop,
    Failure,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Complete => "complete",
            RunStatus::EarlyStop => "early_stop",
            RunStatus::Failure => "failure",
        }
    }
}

/// Result of one run: the placed edges in order, with lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub n: usize,
    pub m: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub status: RunStatus,
    pub gamma: f64,
    pub seed: u64,
}

/// One row per placed edge: step index, progress fraction, edge length, and
/// the normalization Z used for the draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub alpha: f64,
    pub r: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub sample: GraphSample,
    pub trace: Vec<TraceRow>,
    pub warnings: Vec<String>,
    /// Worst relative disagreement between incremental and recomputed Z.
    pub z_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Placed { i: usize, j: usize, r: f64, z: f64 },
    Exhausted,
}

/// Mutable state of one sequential run.
#[derive(Debug, Clone)]
pub struct SamplerState {
    n: usize,
    m: usize,
    base: Vec<usize>,
    remaining: Vec<usize>,
    tree: FenwickTree,
    table: WeightTable,
    edges: Vec<(usize, usize, f64)>,
    placed: std::collections::HashSet<usize>,
    z: f64,
    z_init: f64,
    max_z_drift: f64,
    warnings: Vec<String>,
}

/// Sets up a run with the default options.
pub fn initialize(
    degrees: &DegreeSequence,
    weights: &WeightTable,
    target: &TargetSpec,
    reference: &ReferenceDensity,
) -> Result<SamplerState> {
    initialize_with(
        degrees,
        weights,
        target,
        reference,
        &SamplerOptions::default(),
    )
}

/// Builds the static pair weights b_ij = (f/g)(r_ij) d_i d_j w_ij and the
/// initial normalization Z.
pub fn initialize_with(
    degrees: &DegreeSequence,
    weights: &WeightTable,
    target: &TargetSpec,
    reference: &ReferenceDensity,
    options: &SamplerOptions,
) -> Result<SamplerState> {
    let n = degrees.n();
    if weights.n() != n {
        return Err(Error::SizeMismatch(weights.n(), n));
    }
    let m = degrees.m();
    let d = degrees.degrees();
    let mut warnings = Vec::new();
    let zeros = d.iter().filter(|&&x| x == 0).count();
    if zeros > 0 {
        warnings.push(format!(
            "excluded {zeros} zero-degree vertices from pair sampling"
        ));
    }
    if options.degree_correction && m > 0 {
        let peak = degrees.d_max() * degrees.d_max();
        if peak > 4 * m {
            return Err(Error::NegativePairFactor(peak, 4 * m));
        }
    }
    let pairs = n * n.saturating_sub(1) / 2;
    let mut leaves = vec![0.0; pairs];
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            if d[i] > 0 && d[j] > 0 {
                let ratio = importance_ratio(target, reference, weights.r(i, j))?;
                if ratio > 0.0 {
                    let w = if options.degree_correction {
                        pair_degree_factor(d[i], d[j], m)?
                    } else {
                        1.0
                    };
                    leaves[idx] = ratio * (d[i] * d[j]) as f64 * w;
                }
            }
            idx += 1;
        }
    }
    let tree = FenwickTree::from_weights(&leaves);
    let mut state = SamplerState {
        n,
        m,
        base: d.to_vec(),
        remaining: d.to_vec(),
        tree,
        table: weights.clone(),
        edges: Vec::with_capacity(m),
        placed: std::collections::HashSet::with_capacity(m),
        z: 0.0,
        z_init: 0.0,
        max_z_drift: 0.0,
        warnings,
    };
    state.z = state.recompute_z();
    state.z_init = state.z;
    Ok(state)
}

impl SamplerState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// 1-based index of the next step.
    pub fn k(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn remaining(&self) -> &[usize] {
        &self.remaining
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn max_z_drift(&self) -> f64 {
        self.max_z_drift
    }

    /// Unplaced pairs that can still be drawn (positive static weight and
    /// both endpoints with remaining degree).
    pub fn active_pairs(&self) -> usize {
        self.tree.nonzero_leaves()
    }

    /// Draws one edge with probability exactly p_ij = weight_ij / Z, or
    /// reports exhaustion when no positive-weight pair remains.
    pub fn step(&mut self, rng: &mut impl Rng) -> StepOutcome {
        if self.tree.nonzero_leaves() == 0 {
            return StepOutcome::Exhausted;
        }
        let total = self.tree.total();
        if !(total > 0.0) {
            return StepOutcome::Exhausted;
        }
        // Static leaf draw, then acceptance with the remaining-degree ratio;
        // together this is an exact draw from the current step law.
        let mut rejections = 0usize;
        let (pair, i, j) = loop {
            if rejections >= REJECTION_GUARD {
                break self.linear_scan_draw(rng);
            }
            let u = rng.random_range(0.0..total);
            let pair = self.tree.sample(u);
            let (i, j) = unpair_index(self.n, pair);
            let accept = (self.remaining[i] * self.remaining[j]) as f64
                / (self.base[i] * self.base[j]) as f64;
            let v: f64 = rng.random_range(0.0..1.0);
            if v < accept {
                break (pair, i, j);
            }
            rejections += 1;
        };
        let z_used = self.z;
        let r = self.place(pair, i, j);
        StepOutcome::Placed { i, j, r, z: z_used }
    }

    /// Exact O(active pairs) draw from the current conditional law; the
    /// fallback when the rejection loop stalls.
    fn linear_scan_draw(&self, rng: &mut impl Rng) -> (usize, usize, usize) {
        let weight_of = |pair: usize, i: usize, j: usize| {
            let b = self.tree.leaf(pair);
            if b == 0.0 {
                0.0
            } else {
                b * (self.remaining[i] * self.remaining[j]) as f64
                    / (self.base[i] * self.base[j]) as f64
            }
        };
        let mut total = 0.0;
        let mut idx = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                total += weight_of(idx, i, j);
                idx += 1;
            }
        }
        let u = rng.random_range(0.0..total);
        let mut acc = 0.0;
        let mut last = None;
        let mut idx = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let w = weight_of(idx, i, j);
                if w > 0.0 {
                    last = Some((idx, i, j));
                    acc += w;
                    if u < acc {
                        return (idx, i, j);
                    }
                }
                idx += 1;
            }
        }
        last.expect("linear scan requires at least one active pair")
    }

    fn place(&mut self, pair: usize, i: usize, j: usize) -> f64 {
        let r = self.table.r(i, j);
        let t_pair = self.tree.leaf(pair) * (self.remaining[i] * self.remaining[j]) as f64
            / (self.base[i] * self.base[j]) as f64;
        let s_i = self.vertex_sum(i, j);
        let s_j = self.vertex_sum(j, i);
        self.z -= t_pair + s_i + s_j;
        self.tree.zero(pair);
        self.placed.insert(pair);
        self.remaining[i] -= 1;
        self.remaining[j] -= 1;
        if self.remaining[i] == 0 {
            self.zero_vertex(i);
        }
        if self.remaining[j] == 0 {
            self.zero_vertex(j);
        }
        self.edges.push((i, j, r));
        debug_assert_eq!(
            self.remaining.iter().sum::<usize>(),
            2 * (self.m - self.edges.len()),
            "degree conservation violated at step {}",
            self.edges.len()
        );
        if self.edges.len().is_multiple_of(Z_RECOMPUTE_INTERVAL) {
            self.resync_z();
        }
        r
    }

    /// Sum over active pairs (a, t) of b_at * d_t^k / (d_a d_t): the amount Z
    /// loses per unit decrement of vertex a's remaining degree.
    fn vertex_sum(&self, a: usize, skip: usize) -> f64 {
        let mut s = 0.0;
        for t in 0..self.n {
            if t == a || t == skip {
                continue;
            }
            let (lo, hi) = if a < t { (a, t) } else { (t, a) };
            let b = self.tree.leaf(pair_index(self.n, lo, hi));
            if b != 0.0 {
                s += b * self.remaining[t] as f64 / (self.base[a] * self.base[t]) as f64;
            }
        }
        s
    }

    fn zero_vertex(&mut self, a: usize) {
        for t in 0..self.n {
            if t != a {
                let (lo, hi) = if a < t { (a, t) } else { (t, a) };
                self.tree.zero(pair_index(self.n, lo, hi));
            }
        }
    }

    fn recompute_z(&self) -> f64 {
        let mut z = 0.0;
        let mut idx = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let b = self.tree.leaf(idx);
                if b != 0.0 {
                    z += b * (self.remaining[i] * self.remaining[j]) as f64
                        / (self.base[i] * self.base[j]) as f64;
                }
                idx += 1;
            }
        }
        z
    }

    /// Replaces incremental Z with a full recomputation, recording the
    /// relative drift, and rebuilds the tree's internal sums.
    fn resync_z(&mut self) {
        let full = self.recompute_z();
        let scale = if full > 0.0 {
            full
        } else {
            self.z_init.max(f64::MIN_POSITIVE)
        };
        self.max_z_drift = self.max_z_drift.max((self.z - full).abs() / scale);
        self.z = full;
        self.tree.rebuild();
    }

    /// Unplaced pairs whose endpoints both still have remaining degree,
    /// regardless of target mass.
    fn admissible_pairs(&self) -> Vec<(usize, usize)> {
        let alive: Vec<usize> = (0..self.n).filter(|&v| self.remaining[v] > 0).collect();
        let mut out = Vec::new();
        for (a, &u) in alive.iter().enumerate() {
            for &v in &alive[a + 1..] {
                if !self.placed.contains(&pair_index(self.n, u, v)) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Exhaustive check whether the remaining stubs admit a simple completion;
    /// only called on small endgames. `rem` is indexed parallel to `alive`,
    /// `extra` holds hypothetical placements of the current branch.
    fn stubs_completable(
        &self,
        rem: &mut [usize],
        alive: &[usize],
        extra: &mut Vec<(usize, usize)>,
    ) -> bool {
        let Some(a) = (0..alive.len()).find(|&t| rem[t] > 0) else {
            return true;
        };
        for b in a + 1..alive.len() {
            if rem[b] == 0 {
                continue;
            }
            let (u, v) = (alive[a], alive[b]);
            if self.placed.contains(&pair_index(self.n, u, v))
                || extra.iter().any(|&(x, y)| (x, y) == (u, v))
            {
                continue;
            }
            rem[a] -= 1;
            rem[b] -= 1;
            extra.push((u, v));
            let ok = self.stubs_completable(rem, alive, extra);
            extra.pop();
            rem[a] += 1;
            rem[b] += 1;
            if ok {
                return true;
            }
        }
        false
    }

    /// One placement in the stalled regime: draws an admissible pair with
    /// probability proportional to the product of remaining degrees. On small
    /// endgames, candidates that would make completion impossible are pruned
    /// first. Returns None when no admissible pair is left.
    fn forced_step(&mut self, rng: &mut impl Rng) -> Option<(usize, usize, f64)> {
        let mut cands = self.admissible_pairs();
        if cands.is_empty() {
            return None;
        }
        let stubs: usize = self.remaining.iter().sum();
        if stubs <= LOOKAHEAD_STUBS {
            let alive: Vec<usize> = (0..self.n).filter(|&v| self.remaining[v] > 0).collect();
            let keep: Vec<(usize, usize)> = cands
                .iter()
                .copied()
                .filter(|&(u, v)| {
                    let mut rem: Vec<usize> = alive.iter().map(|&t| self.remaining[t]).collect();
                    rem[alive.iter().position(|&t| t == u).unwrap()] -= 1;
                    rem[alive.iter().position(|&t| t == v).unwrap()] -= 1;
                    let mut extra = vec![(u, v)];
                    self.stubs_completable(&mut rem, &alive, &mut extra)
                })
                .collect();
            if !keep.is_empty() {
                cands = keep;
            }
        }
        let weight = |u: usize, v: usize| (self.remaining[u] * self.remaining[v]) as f64;
        let total: f64 = cands.iter().map(|&(u, v)| weight(u, v)).sum();
        let pick = rng.random_range(0.0..total);
        let mut acc = 0.0;
        let mut chosen = *cands.last().unwrap();
        for &(u, v) in &cands {
            acc += weight(u, v);
            if pick < acc {
                chosen = (u, v);
                break;
            }
        }
        let (u, v) = chosen;
        let r = self.place(pair_index(self.n, u, v), u, v);
        Some((u, v, r))
    }
}

/// Runs the sequential algorithm to `min(floor(gamma*m), m)` edges with the
/// default options.
pub fn run(
    degrees: &DegreeSequence,
    weights: &WeightTable,
    target: &TargetSpec,
    reference: &ReferenceDensity,
    gamma: f64,
    seed: u64,
) -> Result<RunOutput> {
    run_with(
        degrees,
        weights,
        target,
        reference,
        gamma,
        seed,
        &SamplerOptions::default(),
    )
}

pub fn run_with(
    degrees: &DegreeSequence,
    weights: &WeightTable,
    target: &TargetSpec,
    reference: &ReferenceDensity,
    gamma: f64,
    seed: u64,
    options: &SamplerOptions,
) -> Result<RunOutput> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    let mut state = initialize_with(degrees, weights, target, reference, options)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let m = state.m;
    let goal = if gamma < 1.0 {
        (gamma * m as f64).floor() as usize
    } else {
        m
    };
    let mut trace = Vec::with_capacity(goal);
    let mut exhausted = false;
    let mut forced = 0usize;
    let mut stall_k = 0usize;
    while state.edges.len() < goal {
        match state.step(&mut rng) {
            StepOutcome::Placed { r, z, .. } => {
                let k = state.edges.len();
                trace.push(TraceRow {
                    k,
                    alpha: k as f64 / m as f64,
                    r,
                    z,
                });
            }
            StepOutcome::Exhausted => match options.on_stall {
                StallAction::Fail => {
                    exhausted = true;
                    break;
                }
                StallAction::PlaceRemaining => match state.forced_step(&mut rng) {
                    Some((_, _, r)) => {
                        let k = state.edges.len();
                        if forced == 0 {
                            stall_k = k;
                        }
                        forced += 1;
                        trace.push(TraceRow {
                            k,
                            alpha: k as f64 / m as f64,
                            r,
                            z: 0.0,
                        });
                    }
                    None => {
                        exhausted = true;
                        break;
                    }
                },
            },
        }
    }
    if forced > 0 {
        let noun = if forced == 1 { "edge" } else { "edges" };
        state.warnings.push(format!(
            "placed {forced} {noun} with zero target mass after the active weight vanished at step {stall_k}"
        ));
    }
    state.resync_z();
    let status = if exhausted {
        RunStatus::Failure
    } else if gamma < 1.0 {
        RunStatus::EarlyStop
    } else {
        RunStatus::Complete
    };
    let SamplerState {
        edges,
        warnings,
        max_z_drift,
        ..
    } = state;
    Ok(RunOutput {
        sample: GraphSample {
            n: degrees.n(),
            m,
            edges,
            status,
            gamma,
            seed,
        },
        trace,
        warnings,
        z_drift: max_z_drift,
    })
}

/// True iff the sample is complete and realizes the prescribed degrees
/// exactly.
pub fn verify_degrees(sample: &GraphSample, degrees: &DegreeSequence) -> bool {
    if sample.status != RunStatus::Complete || sample.n != degrees.n() {
        return false;
    }
    let mut realized = vec![0usize; sample.n];
    for &(i, j, _) in &sample.edges {
        if i >= sample.n || j >= sample.n || i == j {
            return false;
        }
        realized[i] += 1;
        realized[j] += 1;
    }
    realized == degrees.degrees()
}
