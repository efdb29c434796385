//! Desk-scale studies: convergence of the empirical edge-length law in n,
//! boundary-regime traces, an empirical early-stop threshold, and the
//! analytic lower bound for it.

use rayon::prelude::*;

use crate::degree::DegreeSequence;
use crate::dist::{
    auto_reference, default_normal_support, estimate_tau, make_truncated_normal, ratio_bound,
    ReferenceDensity, TargetSpec, DEFAULT_RATIO_GRID,
};
use crate::error::{Error, Result};
use crate::geometry::generate_uniform;
use crate::metrics::{empirical_law, w1_empirical_target, EmpiricalLaw};
use crate::sampler::{run_with, RunStatus, SamplerOptions, StallAction, TraceRow, WeightTable};

/// Retry budget per convergence cell; stranded endgames are rare but real,
/// so a fresh run seed is drawn deterministically until the cell completes.
const MAX_CELL_ATTEMPTS: u64 = 16;

/// Torus distances for dimension 2 admit the analytic density only up to 1/2.
const ANALYTIC_LIMIT: f64 = 0.5;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds study coordinates into one stream seed.
fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ p))
}

const TAG_CLOUD: u64 = 0x63_6c6f_7564;
const TAG_RUN: u64 = 0x72_756e;

/// Uniform 2-torus cloud plus its packed pair distances.
fn cloud_distances(n: usize, seed: u64) -> (WeightTable, Vec<f64>) {
    let cloud = generate_uniform(n, 2, seed);
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            dists.push(cloud.distance(i, j));
        }
    }
    let table = WeightTable::from_cloud(cloud);
    (table, dists)
}

/// Analytic reference when the target support stays inside its validity
/// window, otherwise a smoothed histogram of the observed distances.
fn study_reference(target: &TargetSpec, dists: &[f64]) -> Result<ReferenceDensity> {
    let (lo, hi) = target.support();
    if lo >= 0.0 && hi <= ANALYTIC_LIMIT {
        return ReferenceDensity::torus_analytic(2);
    }
    auto_reference(dists)
}

fn study_options() -> SamplerOptions {
    SamplerOptions {
        on_stall: StallAction::PlaceRemaining,
        ..SamplerOptions::default()
    }
}

/// One run of a convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub seed: u64,
    pub status: RunStatus,
    pub d_k: Option<f64>,
    pub c_estimate: f64,
}

/// Rows for every (n, seed) cell with per-n medians over completed runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub medians: Vec<(usize, Option<f64>)>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn completion_rate(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let done = self
            .rows
            .iter()
            .filter(|r| r.status == RunStatus::Complete)
            .count();
        done as f64 / self.rows.len() as f64
    }

    pub fn median_for(&self, n: usize) -> Option<f64> {
        self.medians
            .iter()
            .find(|&&(m, _)| m == n)
            .and_then(|&(_, d)| d)
    }

    /// Growth exponent of C over the sweep; ~0 when the target is fixed.
    pub fn tau_estimate(&self) -> Option<f64> {
        let pairs: Vec<(usize, f64)> = self
            .medians
            .iter()
            .map(|&(n, _)| (n, self.rows.iter().find(|r| r.n == n).map(|r| r.c_estimate)))
            .filter_map(|(n, c)| c.map(|c| (n, c)))
            .collect();
        estimate_tau(&pairs)
    }
}

fn median(sorted: &[f64]) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    })
}

/// Runs the sampler to completion over `n_list` x `reps` cells and reports
/// d_K between each completed sample's law and the target. Cells run
/// concurrently; rows are sorted by (n, seed) so output is
/// schedule-independent. Failed cells retry with fresh run seeds up to a
/// fixed budget and keep status `failure` if the budget is exhausted.
pub fn convergence_study(
    n_list: &[usize],
    degree: usize,
    target: &TargetSpec,
    reps: usize,
    master_seed: u64,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty n list".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    for &n in n_list {
        DegreeSequence::regular(n, degree)?;
    }
    let cells: Vec<(usize, u64)> = n_list
        .iter()
        .flat_map(|&n| (0..reps as u64).map(move |rep| (n, rep)))
        .collect();
    let opts = study_options();
    let results: Vec<Result<(ConvergenceRow, Vec<String>)>> = cells
        .par_iter()
        .map(|&(n, rep)| -> Result<(ConvergenceRow, Vec<String>)> {
            let degrees = DegreeSequence::regular(n, degree)?;
            let cloud_seed = derive_seed(master_seed, &[n as u64, rep, TAG_CLOUD]);
            let (table, dists) = cloud_distances(n, cloud_seed);
            let reference = study_reference(target, &dists)?;
            let c_estimate = ratio_bound(target, &reference, DEFAULT_RATIO_GRID)?.c_estimate;
            let mut warnings = Vec::new();
            let mut row = ConvergenceRow {
                n,
                seed: rep,
                status: RunStatus::Failure,
                d_k: None,
                c_estimate,
            };
            for attempt in 0..MAX_CELL_ATTEMPTS {
                let run_seed = derive_seed(master_seed, &[n as u64, rep, TAG_RUN, attempt]);
                let out = run_with(&degrees, &table, target, &reference, 1.0, run_seed, &opts)?;
                if out.sample.status == RunStatus::Complete {
                    let law = empirical_law(&out.sample)?;
                    row.status = RunStatus::Complete;
                    row.d_k = Some(w1_empirical_target(&law, target));
                    if attempt > 0 {
                        warnings.push(format!(
                            "n={n} seed={rep}: completed after {} attempts",
                            attempt + 1
                        ));
                    }
                    break;
                }
            }
            if row.status != RunStatus::Complete {
                warnings.push(format!(
                    "n={n} seed={rep}: failed all {MAX_CELL_ATTEMPTS} attempts"
                ));
            }
            Ok((row, warnings))
        })
        .collect();
    let mut rows = Vec::with_capacity(cells.len());
    let mut warnings = Vec::new();
    for res in results {
        let (row, warn) = res?;
        rows.push(row);
        warnings.extend(warn);
    }
    rows.sort_by_key(|r| (r.n, r.seed));
    let mut medians = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut ds: Vec<f64> = rows
            .iter()
            .filter(|r| r.n == n && r.status == RunStatus::Complete)
            .filter_map(|r| r.d_k)
            .collect();
        ds.sort_unstable_by(f64::total_cmp);
        medians.push((n, median(&ds)));
    }
    Ok(ConvergenceReport {
        rows,
        medians,
        warnings,
    })
}

/// Trace of one boundary-regime run.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub mean: f64,
    pub rep: u64,
    pub status: RunStatus,
    pub final_alpha: f64,
    pub rows: Vec<TraceRow>,
}

/// Runs gamma = 1 with shrinking normal targets and keeps the per-step
/// (k, alpha, r) trace; failures are recorded with their final alpha and
/// never retried, since late divergence is the phenomenon of interest.
pub fn boundary_trace_study(
    n: usize,
    degree: usize,
    means: &[f64],
    rel_sd: f64,
    reps: usize,
    master_seed: u64,
) -> Result<Vec<BoundaryTrace>> {
    if means.is_empty() {
        return Err(Error::InvalidParameter("empty means list".into()));
    }
    if !(rel_sd > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relative sd must be positive, got {rel_sd}"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    let degrees = DegreeSequence::regular(n, degree)?;
    let m = degrees.m();
    let opts = study_options();
    let cells: Vec<(usize, u64)> = (0..means.len())
        .flat_map(|mi| (0..reps as u64).map(move |rep| (mi, rep)))
        .collect();
    let traces: Vec<Result<BoundaryTrace>> = cells
        .par_iter()
        .map(|&(mi, rep)| -> Result<BoundaryTrace> {
            let mean = means[mi];
            let sigma = rel_sd * mean;
            let target = make_truncated_normal(mean, sigma, default_normal_support(mean, sigma))?;
            let cloud_seed = derive_seed(master_seed, &[mi as u64, rep, TAG_CLOUD]);
            let (table, dists) = cloud_distances(n, cloud_seed);
            let reference = study_reference(&target, &dists)?;
            let run_seed = derive_seed(master_seed, &[mi as u64, rep, TAG_RUN]);
            let out = run_with(&degrees, &table, &target, &reference, 1.0, run_seed, &opts)?;
            Ok(BoundaryTrace {
                mean,
                rep,
                status: out.sample.status,
                final_alpha: out.sample.edges.len() as f64 / m as f64,
                rows: out.trace,
            })
        })
        .collect();
    traces.into_iter().collect()
}

/// Empirical early-stop threshold estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaStarEstimate {
    pub gamma_hat: f64,
    /// Set when no grid value qualified and the estimate fell back to 0.
    pub warning: bool,
}

/// Estimates the largest grid fraction gamma (step 0.05) at which at least
/// 90% of reps reach floor(gamma * m) edges with prefix-law d_K within
/// `tol_dk`. Each rep runs once to its end; prefixes are evaluated per grid
/// value from the trace.
pub fn estimate_gamma_star(
    n: usize,
    degree: usize,
    target: &TargetSpec,
    tol_dk: f64,
    reps: usize,
    master_seed: u64,
) -> Result<GammaStarEstimate> {
    if !(tol_dk > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "d_K tolerance must be positive, got {tol_dk}"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    let degrees = DegreeSequence::regular(n, degree)?;
    let m = degrees.m();
    let opts = study_options();
    // qualifies[rep][gi] for grid gamma = (gi + 1) / 20.
    let per_rep: Vec<Result<[bool; 20]>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<[bool; 20]> {
            let cloud_seed = derive_seed(master_seed, &[rep, TAG_CLOUD]);
            let (table, dists) = cloud_distances(n, cloud_seed);
            let reference = study_reference(target, &dists)?;
            let run_seed = derive_seed(master_seed, &[rep, TAG_RUN]);
            let out = run_with(&degrees, &table, target, &reference, 1.0, run_seed, &opts)?;
            let lengths: Vec<f64> = out.sample.edges.iter().map(|&(_, _, r)| r).collect();
            let mut quals = [false; 20];
            for (gi, qual) in quals.iter_mut().enumerate() {
                let goal = (gi + 1) * m / 20;
                if lengths.len() < goal {
                    continue;
                }
                *qual = if goal == 0 {
                    true
                } else {
                    let law = EmpiricalLaw::from_lengths(&lengths[..goal])?;
                    w1_empirical_target(&law, target) <= tol_dk
                };
            }
            Ok(quals)
        })
        .collect();
    let mut counts = [0usize; 20];
    for quals in per_rep {
        for (gi, q) in quals?.iter().enumerate() {
            if *q {
                counts[gi] += 1;
            }
        }
    }
    let need = (0.9 * reps as f64 - 1e-9).ceil() as usize;
    for gi in (0..20).rev() {
        if counts[gi] >= need {
            return Ok(GammaStarEstimate {
                gamma_hat: (gi + 1) as f64 / 20.0,
                warning: false,
            });
        }
    }
    Ok(GammaStarEstimate {
        gamma_hat: 0.0,
        warning: true,
    })
}

/// Inputs of the analytic early-stop bound: C bounds the importance ratio,
/// d_max and d_bar describe the degrees, eta and c are the slack constants
/// of the remaining-pair and pair-correction estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBoundInputs {
    pub c_ratio: f64,
    pub d_max: usize,
    pub d_bar: f64,
    pub eta: f64,
    pub c: f64,
    pub epsilon_grid: Vec<f64>,
}

impl GammaBoundInputs {
    pub fn new(c_ratio: f64, d_max: usize, d_bar: f64) -> Self {
        GammaBoundInputs {
            c_ratio,
            d_max,
            d_bar,
            eta: 1.0,
            c: 1.0,
            epsilon_grid: default_epsilon_grid(),
        }
    }
}

/// 0.01, 0.02, ..., 0.99.
pub fn default_epsilon_grid() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

/// Default pair-correction slack 1 - d_max^2 / (4m).
pub fn degree_corrected_c(d_max: usize, m: usize) -> f64 {
    1.0 - (d_max * d_max) as f64 / (4 * m) as f64
}

/// Evaluates the analytic threshold: for each epsilon, the unique root in
/// (0, 1) of gamma / (1 - gamma)^2 = L(eps) * d_bar * eta / (C * d^2) with
/// L(eps) = d^2 / (c (1 - eps)) + 1 / eps^2, found by bisection. The
/// threshold must hold at every epsilon, so the binding value is the
/// smallest root over the grid.
pub fn gamma_lower_bound(inputs: &GammaBoundInputs) -> Result<f64> {
    if !(inputs.c_ratio > 0.0) || !inputs.c_ratio.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ratio bound C must be positive and finite, got {}",
            inputs.c_ratio
        )));
    }
    if inputs.d_max == 0 {
        return Err(Error::InvalidParameter("d_max must be at least 1".into()));
    }
    if !(inputs.d_bar > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "average degree must be positive, got {}",
            inputs.d_bar
        )));
    }
    if !(inputs.eta > 0.0 && inputs.eta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eta must lie in (0, 1], got {}",
            inputs.eta
        )));
    }
    if !(inputs.c > 0.0 && inputs.c <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "c must lie in (0, 1], got {}",
            inputs.c
        )));
    }
    if inputs.epsilon_grid.is_empty() {
        return Err(Error::InvalidParameter("empty epsilon grid".into()));
    }
    if inputs.epsilon_grid.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::InvalidParameter(
            "epsilon grid values must lie in (0, 1)".into(),
        ));
    }
    let d2 = (inputs.d_max * inputs.d_max) as f64;
    let mut best: Option<f64> = None;
    for &eps in &inputs.epsilon_grid {
        let l = d2 / (inputs.c * (1.0 - eps)) + 1.0 / (eps * eps);
        let rhs = l * inputs.d_bar * inputs.eta / (inputs.c_ratio * d2);
        let root = solve_gamma(rhs);
        best = Some(match best {
            Some(b) => b.min(root),
            None => root,
        });
    }
    Ok(best.unwrap())
}

/// Root of gamma / (1 - gamma)^2 = rhs in (0, 1); the left side increases
/// strictly from 0 to infinity.
fn solve_gamma(rhs: f64) -> f64 {
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let h = mid / ((1.0 - mid) * (1.0 - mid));
        if h < rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_uniform;

    fn ac5_target() -> TargetSpec {
        make_truncated_normal(0.2, 0.03, (0.05, 0.35)).unwrap()
    }

    #[test]
    fn seed_derivation_is_stable_and_spread() {
        let a = derive_seed(7, &[1, 2, 3]);
        assert_eq!(a, derive_seed(7, &[1, 2, 3]));
        assert_ne!(a, derive_seed(7, &[1, 2, 4]));
        assert_ne!(a, derive_seed(8, &[1, 2, 3]));
        assert_ne!(a, derive_seed(7, &[1, 3, 2]));
    }

    #[test]
    fn gamma_bound_matches_independent_root() {
        // Oracle: minimize L on a fine grid, then invert gamma/(1-gamma)^2
        // by Newton from an interior start.
        let (c_ratio, d, d_bar) = (1.0_f64, 3usize, 3.0_f64);
        let d2 = (d * d) as f64;
        let mut l_min = f64::INFINITY;
        for i in 1..100 {
            let e = i as f64 / 100.0;
            l_min = l_min.min(d2 / (1.0 - e) + 1.0 / (e * e));
        }
        let rhs = l_min * d_bar / (c_ratio * d2);
        let mut g = 0.5_f64;
        for _ in 0..80 {
            let f = g / ((1.0 - g) * (1.0 - g)) - rhs;
            let fp = (1.0 + g) / (1.0 - g).powi(3);
            g -= f / fp;
        }
        let got = gamma_lower_bound(&GammaBoundInputs::new(c_ratio, d, d_bar)).unwrap();
        assert!((got - g).abs() < 1e-10, "{got} vs oracle {g}");
        assert!((got - 0.69).abs() < 0.01, "expected about 0.69, got {got}");
    }

    #[test]
    fn gamma_bound_monotonicity_grid() {
        let base = GammaBoundInputs::new(1.0, 3, 3.0);
        let mut prev = f64::INFINITY;
        for c_ratio in [1.0, 2.0, 5.0, 10.0] {
            let v = gamma_lower_bound(&GammaBoundInputs {
                c_ratio,
                ..base.clone()
            })
            .unwrap();
            assert!(v < prev, "not decreasing in C at {c_ratio}");
            assert!(v > 0.0 && v < 1.0);
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for d_max in [2, 3, 5, 8] {
            let v = gamma_lower_bound(&GammaBoundInputs {
                d_max,
                ..base.clone()
            })
            .unwrap();
            assert!(v <= prev, "not non-increasing in d_max at {d_max}");
            prev = v;
        }
        let mut prev = 0.0;
        for d_bar in [1.0, 2.0, 3.0] {
            let v = gamma_lower_bound(&GammaBoundInputs {
                d_bar,
                ..base.clone()
            })
            .unwrap();
            assert!(v >= prev, "not non-decreasing in d_bar at {d_bar}");
            prev = v;
        }
        let mut prev = 0.0;
        for eta in [0.25, 0.5, 1.0] {
            let v = gamma_lower_bound(&GammaBoundInputs {
                eta,
                ..base.clone()
            })
            .unwrap();
            assert!(v >= prev, "not non-decreasing in eta at {eta}");
            prev = v;
        }
        // A huge ratio bound drives the threshold toward 0.
        let tiny = gamma_lower_bound(&GammaBoundInputs::new(1e9, 3, 3.0)).unwrap();
        assert!(tiny < 1e-6 && tiny > 0.0);
    }

    #[test]
    fn gamma_bound_rejects_bad_inputs() {
        let ok = GammaBoundInputs::new(1.0, 3, 3.0);
        assert!(gamma_lower_bound(&ok).is_ok());
        for bad in [
            GammaBoundInputs {
                c_ratio: 0.0,
                ..ok.clone()
            },
            GammaBoundInputs {
                d_max: 0,
                ..ok.clone()
            },
            GammaBoundInputs {
                d_bar: -1.0,
                ..ok.clone()
            },
            GammaBoundInputs {
                eta: 0.0,
                ..ok.clone()
            },
            GammaBoundInputs {
                eta: 1.5,
                ..ok.clone()
            },
            GammaBoundInputs {
                c: 0.0,
                ..ok.clone()
            },
            GammaBoundInputs {
                epsilon_grid: vec![],
                ..ok.clone()
            },
            GammaBoundInputs {
                epsilon_grid: vec![0.5, 1.0],
                ..ok.clone()
            },
        ] {
            assert!(gamma_lower_bound(&bad).is_err());
        }
        assert!((degree_corrected_c(3, 300) - (1.0 - 9.0 / 1200.0)).abs() < 1e-15);
    }

    #[test]
    fn convergence_smoke_schema_and_determinism() {
        let target = ac5_target();
        let a = convergence_study(&[32, 64], 3, &target, 3, 11).unwrap();
        assert_eq!(a.rows.len(), 6);
        for (idx, row) in a.rows.iter().enumerate() {
            assert_eq!(row.n, if idx < 3 { 32 } else { 64 });
            assert_eq!(row.seed, (idx % 3) as u64);
            if row.status == RunStatus::Complete {
                assert!(row.d_k.unwrap() >= 0.0);
            } else {
                assert!(row.d_k.is_none());
            }
            assert!(row.c_estimate > 1.0);
        }
        assert!(a.completion_rate() > 0.0);
        assert_eq!(a.medians.len(), 2);
        let b = convergence_study(&[32, 64], 3, &target, 3, 11).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.n, y.n);
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.status, y.status);
            match (x.d_k, y.d_k) {
                (Some(u), Some(v)) => assert_eq!(u.to_bits(), v.to_bits()),
                (None, None) => {}
                other => panic!("determinism broke: {other:?}"),
            }
        }
        let c = convergence_study(&[32], 3, &target, 1, 12).unwrap();
        assert_eq!(c.rows.len(), 1);
        if let (Some(d1), Some(d2)) = (a.rows[0].d_k, c.rows[0].d_k) {
            assert_ne!(d1.to_bits(), d2.to_bits());
        }
        assert!(convergence_study(&[], 3, &target, 2, 0).is_err());
        assert!(convergence_study(&[33], 3, &target, 2, 0).is_err());
        assert!(convergence_study(&[32], 3, &target, 0, 0).is_err());
    }

    #[test]
    fn convergence_tau_is_flat_for_fixed_target() {
        let target = ac5_target();
        let rep = convergence_study(&[32, 48, 64], 3, &target, 2, 5).unwrap();
        let tau = rep.tau_estimate().unwrap();
        assert!(tau.abs() < 1e-9, "fixed target must give tau 0, got {tau}");
    }

    #[test]
    fn boundary_traces_schema_and_determinism() {
        let a = boundary_trace_study(40, 3, &[0.25], 0.15, 2, 31).unwrap();
        assert_eq!(a.len(), 2);
        for t in &a {
            assert_eq!(t.mean, 0.25);
            assert!(t.final_alpha > 0.0 && t.final_alpha <= 1.0);
            for row in &t.rows {
                assert!(row.alpha > 0.0 && row.alpha <= 1.0);
                assert!(row.r >= 0.0);
            }
            match t.status {
                RunStatus::Complete => assert_eq!(t.final_alpha, 1.0),
                RunStatus::Failure => assert!(t.final_alpha < 1.0),
                RunStatus::EarlyStop => unreachable!(),
            }
        }
        let b = boundary_trace_study(40, 3, &[0.25], 0.15, 2, 31).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.rows.len(), y.rows.len());
            for (u, v) in x.rows.iter().zip(&y.rows) {
                assert_eq!(u.r.to_bits(), v.r.to_bits());
                assert_eq!(u.z.to_bits(), v.z.to_bits());
            }
        }
        // Wide target support exercises the histogram reference fallback.
        let c = boundary_trace_study(40, 3, &[0.32], 0.15, 1, 7).unwrap();
        assert_eq!(c.len(), 1);
        assert!(boundary_trace_study(40, 3, &[], 0.15, 1, 0).is_err());
        assert!(boundary_trace_study(40, 3, &[0.2], 0.0, 1, 0).is_err());
        assert!(boundary_trace_study(40, 3, &[0.2], 0.15, 0, 0).is_err());
    }

    #[test]
    fn gamma_star_flat_ratio_reaches_one() {
        // Target built from the same distance histogram as the reference, so
        // f = g and every pair stays available; completion is routine and
        // prefix laws track the target.
        let n = 60;
        let (_, dists) = cloud_distances(n, derive_seed(91, &[0, TAG_CLOUD]));
        let ReferenceDensity::Histogram(hist) = auto_reference(&dists).unwrap() else {
            unreachable!()
        };
        let target = TargetSpec::from_histogram(hist);
        let est = estimate_gamma_star(n, 3, &target, 0.08, 5, 91).unwrap();
        assert_eq!(est.gamma_hat, 1.0);
        assert!(!est.warning);
    }

    #[test]
    fn gamma_star_impossible_target_warns() {
        let target = make_uniform(0.8, 0.9).unwrap();
        let est = estimate_gamma_star(40, 3, &target, 0.05, 3, 17).unwrap();
        assert_eq!(est.gamma_hat, 0.0);
        assert!(est.warning);
    }

    #[test]
    fn gamma_star_validation() {
        let target = ac5_target();
        assert!(estimate_gamma_star(40, 3, &target, 0.0, 2, 0).is_err());
        assert!(estimate_gamma_star(40, 3, &target, 0.05, 0, 0).is_err());
        assert!(estimate_gamma_star(41, 3, &target, 0.05, 2, 0).is_err());
    }
}
