//! Unit-torus point clouds, periodic distances, and the analytic distance density.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::dist::HistogramDensity;
use crate::error::{Error, Result};

/// Candidate attempts per active point in Bridson dart throwing.
const BRIDSON_K: usize = 30;

/// A finite set of points on the unit torus `[0,1)^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    /// Validates that every point has `dim` coordinates, each in `[0,1)`.
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "point dimension must be at least 1".into(),
            ));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch(dim, p.len()));
            }
            for &c in p {
                if !(0.0..1.0).contains(&c) {
                    return Err(Error::InvalidParameter(format!(
                        "coordinate {c} lies outside [0,1)"
                    )));
                }
            }
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Torus distance between stored points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        wrapped_distance(&self.points[i], &self.points[j])
    }
}

/// Draws `n` independent uniformly distributed points on `[0,1)^dim`.
pub fn generate_uniform(n: usize, dim: usize, seed: u64) -> PointCloud {
    assert!(
        n >= 1 && dim >= 1,
        "generate_uniform needs n >= 1, dim >= 1"
    );
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    PointCloud { dim, points }
}

/// Bridson dart throwing on the torus: a maximal-ish packing in which all
/// pairwise torus distances are at least `radius`.
pub fn generate_poisson_disk(radius: f64, dim: usize, seed: u64) -> Result<PointCloud> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!(
            "poisson-disk supports dim 1..=3, got {dim}"
        )));
    }
    if !(radius > 0.0) || radius >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "poisson-disk radius must lie in (0, 1/2), got {radius}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // Cell diagonal <= radius, so each cell holds at most one accepted point.
    let side = ((dim as f64).sqrt() / radius).ceil() as usize;
    let cell = 1.0 / side as f64;
    let reach = (radius / cell).ceil() as i64;
    let mut grid: Vec<Option<usize>> = vec![None; side.pow(dim as u32)];

    let cell_of = |p: &[f64]| -> Vec<usize> {
        p.iter()
            .map(|&c| ((c * side as f64) as usize).min(side - 1))
            .collect()
    };
    let linear = |cells: &[usize]| cells.iter().fold(0, |acc, &c| acc * side + c);

    let first: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
    grid[linear(&cell_of(&first))] = Some(0);
    let mut points = vec![first];
    let mut active = vec![0usize];

    while !active.is_empty() {
        let slot = rng.random_range(0..active.len());
        let center = points[active[slot]].clone();
        let mut placed = false;
        for _ in 0..BRIDSON_K {
            let cand = annulus_candidate(&mut rng, &center, radius);
            let base = cell_of(&cand);
            let free = neighbor_cells(&base, reach, side)
                .into_iter()
                .all(|ci| grid[ci].is_none_or(|j| wrapped_distance(&cand, &points[j]) >= radius));
            if free {
                let id = points.len();
                grid[linear(&base)] = Some(id);
                points.push(cand);
                active.push(id);
                placed = true;
                break;
            }
        }
        if !placed {
            active.swap_remove(slot);
        }
    }
    Ok(PointCloud { dim, points })
}

/// Rejection-samples a displacement with norm in `[radius, 2*radius)` and
/// wraps the shifted point back onto the torus.
fn annulus_candidate(rng: &mut ChaCha12Rng, center: &[f64], radius: f64) -> Vec<f64> {
    loop {
        let disp: Vec<f64> = center
            .iter()
            .map(|_| rng.random_range(-2.0 * radius..2.0 * radius))
            .collect();
        let norm2: f64 = disp.iter().map(|v| v * v).sum();
        if norm2 >= radius * radius && norm2 < 4.0 * radius * radius {
            return center
                .iter()
                .zip(&disp)
                .map(|(c, d)| wrap01(c + d))
                .collect();
        }
    }
}

/// Wraps into `[0,1)`; `rem_euclid` alone can round up to exactly 1.0 for
/// tiny negative inputs.
fn wrap01(v: f64) -> f64 {
    let w = v.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Linear indices of all grid cells within `reach` cells of `base` per axis,
/// wrapped; deduplicated because small grids alias under wrapping.
fn neighbor_cells(base: &[usize], reach: i64, side: usize) -> Vec<usize> {
    let dim = base.len();
    let span = (2 * reach + 1) as usize;
    let mut out = Vec::with_capacity(span.pow(dim as u32));
    let mut offsets = vec![-reach; dim];
    'outer: loop {
        let mut idx = 0;
        for (b, o) in base.iter().zip(&offsets) {
            let c = (*b as i64 + o).rem_euclid(side as i64) as usize;
            idx = idx * side + c;
        }
        out.push(idx);
        let mut d = 0;
        loop {
            offsets[d] += 1;
            if offsets[d] <= reach {
                break;
            }
            offsets[d] = -reach;
            d += 1;
            if d == dim {
                break 'outer;
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Euclidean length of the componentwise wrapped difference
/// `min(|x_i-y_i|, 1-|x_i-y_i|)`.
pub fn torus_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    Ok(wrapped_distance(x, y))
}

fn wrapped_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = (a - b).abs();
            let w = d.min(1.0 - d);
            w * w
        })
        .sum::<f64>()
        .sqrt()
}

/// Density of the torus distance of two independent uniform points.
///
/// The closed form is exact only for `r <= 1/2`; beyond that callers must
/// fall back to a histogram estimate.
pub fn torus_distance_density(r: f64, dim: usize) -> Result<f64> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidParameter(format!(
            "analytic distance density requires dim 1 or 2, got {dim}"
        )));
    }
    if !(0.0..=0.5).contains(&r) {
        return Err(Error::OutsideValidityWindow(r));
    }
    Ok(match dim {
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI * r,
    })
}

/// Histogram density estimate with additive smoothing, strictly positive on
/// every bin of the support.
pub fn estimate_density_histogram(
    samples: &[f64],
    bins: usize,
    support: (f64, f64),
) -> Result<HistogramDensity> {
    HistogramDensity::from_samples(samples, bins, support)
}
