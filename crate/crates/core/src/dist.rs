//! Target density f, reference density g, and the importance ratio with its
//! bound C.

use std::path::PathBuf;
use std::str::FromStr;

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::torus_distance_density;

/// Default grid resolution for [`ratio_bound`].
pub const DEFAULT_RATIO_GRID: usize = 10_000;

/// Default relative standard deviation for [`normal_rel`].
pub const DEFAULT_REL_SD: f64 = 0.15;

/// Piecewise-constant probability density over contiguous bins.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramDensity {
    edges: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl HistogramDensity {
    /// Smoothed histogram estimate from raw samples binned uniformly over
    /// `support`.
    pub fn from_samples(samples: &[f64], bins: usize, support: (f64, f64)) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        if bins == 0 {
            return Err(Error::InvalidParameter(
                "histogram needs at least one bin".into(),
            ));
        }
        let (lo, hi) = support;
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "support [{lo}, {hi}] must have positive length"
            )));
        }
        let width = (hi - lo) / bins as f64;
        let mut masses = vec![0.0; bins];
        for &s in samples {
            if !(lo..=hi).contains(&s) {
                return Err(Error::SampleOutsideSupport(s, lo, hi));
            }
            let b = (((s - lo) / width) as usize).min(bins - 1);
            masses[b] += 1.0;
        }
        let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
        Self::build(edges, masses, true)
    }

    /// Builds from explicit `(lo, hi, mass)` rows; bins must be contiguous
    /// and in increasing order.
    pub fn from_rows(rows: &[(f64, f64, f64)], smooth: bool) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut edges = Vec::with_capacity(rows.len() + 1);
        let mut masses = Vec::with_capacity(rows.len());
        for &(lo, hi, mass) in rows {
            if !(hi > lo) {
                return Err(Error::Parse {
                    kind: "histogram",
                    detail: format!("bin [{lo}, {hi}] has nonpositive width"),
                });
            }
            if !(mass >= 0.0 && mass.is_finite()) {
                return Err(Error::Parse {
                    kind: "histogram",
                    detail: format!("bin [{lo}, {hi}] has invalid mass {mass}"),
                });
            }
            match edges.last() {
                None => edges.push(lo),
                Some(&prev) if (lo - prev).abs() <= 1e-9 => {}
                Some(&prev) => {
                    return Err(Error::Parse {
                        kind: "histogram",
                        detail: format!("bin starting at {lo} is not contiguous with {prev}"),
                    });
                }
            }
            edges.push(hi);
            masses.push(mass);
        }
        Self::build(edges, masses, smooth)
    }

    /// Normalizes masses into a density; optional additive smoothing of
    /// `1e-6/bins` relative mass per bin keeps every bin strictly positive.
    fn build(edges: Vec<f64>, mut masses: Vec<f64>, smooth: bool) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::VanishingMass);
        }
        if smooth {
            let add = total * 1e-6 / masses.len() as f64;
            for m in &mut masses {
                *m += add;
            }
        }
        let total: f64 = masses.iter().sum();
        let mut density = Vec::with_capacity(masses.len());
        let mut cdf = Vec::with_capacity(edges.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for (i, &m) in masses.iter().enumerate() {
            density.push(m / (total * (edges[i + 1] - edges[i])));
            acc += m / total;
            cdf.push(acc);
        }
        *cdf.last_mut().unwrap() = 1.0;
        Ok(Self {
            edges,
            density,
            cdf,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    pub fn bins(&self) -> usize {
        self.density.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    /// Density at `r`; zero outside the support.
    pub fn density(&self, r: f64) -> f64 {
        let (lo, hi) = self.support();
        if r < lo || r > hi {
            return 0.0;
        }
        self.density[self.bin_of(r)]
    }

    /// Piecewise-linear distribution function.
    pub fn cdf(&self, r: f64) -> f64 {
        let (lo, hi) = self.support();
        if r <= lo {
            return 0.0;
        }
        if r >= hi {
            return 1.0;
        }
        let b = self.bin_of(r);
        let w = self.edges[b + 1] - self.edges[b];
        self.cdf[b] + (self.cdf[b + 1] - self.cdf[b]) * (r - self.edges[b]) / w
    }

    fn bin_of(&self, r: f64) -> usize {
        let idx = self.edges.partition_point(|&e| e <= r);
        idx.saturating_sub(1).min(self.density.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TargetKind {
    TruncNormal {
        mu: f64,
        sigma: f64,
        lo: f64,
        hi: f64,
        cdf_lo: f64,
        norm: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    Histogram(HistogramDensity),
}

/// Target edge-length distribution with compact support `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    kind: TargetKind,
}

impl TargetSpec {
    /// Wraps a histogram density as a target.
    pub fn from_histogram(hist: HistogramDensity) -> Self {
        TargetSpec {
            kind: TargetKind::Histogram(hist),
        }
    }

    /// Density f; zero outside the support.
    pub fn density(&self, r: f64) -> f64 {
        match &self.kind {
            TargetKind::TruncNormal {
                mu,
                sigma,
                lo,
                hi,
                norm,
                ..
            } => {
                if r < *lo || r > *hi {
                    return 0.0;
                }
                let normal = Normal::new(*mu, *sigma).expect("validated sigma");
                normal.pdf(r) / norm
            }
            TargetKind::Uniform { a, b } => {
                if r < *a || r > *b {
                    0.0
                } else {
                    1.0 / (b - a)
                }
            }
            TargetKind::Histogram(h) => h.density(r),
        }
    }

    /// Distribution function F with F(a) = 0 and F(b) = 1.
    pub fn cdf(&self, r: f64) -> f64 {
        match &self.kind {
            TargetKind::TruncNormal {
                mu,
                sigma,
                lo,
                hi,
                cdf_lo,
                norm,
            } => {
                if r <= *lo {
                    return 0.0;
                }
                if r >= *hi {
                    return 1.0;
                }
                let normal = Normal::new(*mu, *sigma).expect("validated sigma");
                ((normal.cdf(r) - cdf_lo) / norm).clamp(0.0, 1.0)
            }
            TargetKind::Uniform { a, b } => ((r - a) / (b - a)).clamp(0.0, 1.0),
            TargetKind::Histogram(h) => h.cdf(r),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            TargetKind::TruncNormal { lo, hi, .. } => (*lo, *hi),
            TargetKind::Uniform { a, b } => (*a, *b),
            TargetKind::Histogram(h) => h.support(),
        }
    }
}

/// Normal density restricted to `support` and renormalized.
pub fn make_truncated_normal(mu: f64, sigma: f64, support: (f64, f64)) -> Result<TargetSpec> {
    let (lo, hi) = support;
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "support [{lo}, {hi}] must have positive length"
        )));
    }
    let normal = Normal::new(mu, sigma).expect("validated sigma");
    let cdf_lo = normal.cdf(lo);
    let norm = normal.cdf(hi) - cdf_lo;
    if norm < 1e-300 {
        return Err(Error::VanishingMass);
    }
    Ok(TargetSpec {
        kind: TargetKind::TruncNormal {
            mu,
            sigma,
            lo,
            hi,
            cdf_lo,
            norm,
        },
    })
}

/// Uniform target on `[a, b]`.
pub fn make_uniform(a: f64, b: f64) -> Result<TargetSpec> {
    if !(a < b) {
        return Err(Error::InvalidParameter(format!(
            "uniform needs a < b, got [{a}, {b}]"
        )));
    }
    Ok(TargetSpec {
        kind: TargetKind::Uniform { a, b },
    })
}

/// Truncated normal with sd = `rel * mu` and the default support.
pub fn normal_rel(mu: f64, rel: f64) -> Result<TargetSpec> {
    if !(mu > 0.0 && rel > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "normal_rel needs mu > 0 and rel > 0, got mu = {mu}, rel = {rel}"
        )));
    }
    let sigma = rel * mu;
    make_truncated_normal(mu, sigma, default_normal_support(mu, sigma))
}

/// Default truncation window for normal targets: `[max(0, mu-5sigma), mu+5sigma]`.
pub fn default_normal_support(mu: f64, sigma: f64) -> (f64, f64) {
    ((mu - 5.0 * sigma).max(0.0), mu + 5.0 * sigma)
}

/// Reference (ambient) edge-length density g.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceDensity {
    TorusAnalytic { dim: usize },
    Histogram(HistogramDensity),
}

impl ReferenceDensity {
    /// Analytic torus-distance density; only dims 1 and 2 have a closed form.
    pub fn torus_analytic(dim: usize) -> Result<Self> {
        torus_distance_density(0.0, dim)?;
        Ok(ReferenceDensity::TorusAnalytic { dim })
    }

    /// Uniform reference on `[a, b]` as a single-bin histogram.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Ok(ReferenceDensity::Histogram(HistogramDensity::from_rows(
            &[(a, b, 1.0)],
            false,
        )?))
    }

    pub fn density(&self, r: f64) -> Result<f64> {
        match self {
            ReferenceDensity::TorusAnalytic { dim } => torus_distance_density(r, *dim),
            ReferenceDensity::Histogram(h) => Ok(h.density(r)),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            ReferenceDensity::TorusAnalytic { .. } => (0.0, 0.5),
            ReferenceDensity::Histogram(h) => h.support(),
        }
    }
}

/// Bin count for the automatic reference histogram over observed distances.
pub const AUTO_REFERENCE_BINS: usize = 256;

/// Smoothed histogram of the observed pair distances on `[0, max r]`: the
/// fallback reference when no analytic form applies.
pub fn auto_reference(dists: &[f64]) -> Result<ReferenceDensity> {
    let max_r = dists.iter().copied().fold(0.0_f64, f64::max);
    Ok(ReferenceDensity::Histogram(HistogramDensity::from_samples(
        dists,
        AUTO_REFERENCE_BINS,
        (0.0, max_r),
    )?))
}

/// f(r)/g(r), with the conventions: 0 wherever f vanishes; error when f
/// demands a length the reference says is impossible.
pub fn importance_ratio(target: &TargetSpec, reference: &ReferenceDensity, r: f64) -> Result<f64> {
    let f = target.density(r);
    if f == 0.0 {
        return Ok(0.0);
    }
    let g = reference.density(r)?;
    if g == 0.0 {
        return Err(Error::SupportMismatch(r));
    }
    Ok(f / g)
}

/// Diagnostics for the importance-ratio bound C.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioDiagnostics {
    /// Grid maximum of f/g over the target support (a lower bound of the sup).
    pub c_estimate: f64,
    /// Optional growth exponent fitted from a sweep of C over n.
    pub tau_estimate: Option<f64>,
}

/// Estimates C = sup_{r in I} f(r)/g(r) by maximizing over midpoints of a
/// uniform grid on the target support.
pub fn ratio_bound(
    target: &TargetSpec,
    reference: &ReferenceDensity,
    grid: usize,
) -> Result<RatioDiagnostics> {
    if grid < 2 {
        return Err(Error::InvalidParameter(format!(
            "ratio grid must have at least 2 points, got {grid}"
        )));
    }
    let (a, b) = target.support();
    let w = (b - a) / grid as f64;
    let mut c = 0.0f64;
    for i in 0..grid {
        let r = a + (i as f64 + 0.5) * w;
        c = c.max(importance_ratio(target, reference, r)?);
    }
    Ok(RatioDiagnostics {
        c_estimate: c,
        tau_estimate: None,
    })
}

/// Least-squares slope of ln C against ln n across a sweep; `None` when the
/// sweep is too short or degenerate.
pub fn estimate_tau(sweep: &[(usize, f64)]) -> Option<f64> {
    if sweep.len() < 2 {
        return None;
    }
    if sweep.iter().any(|&(n, c)| n == 0 || !(c > 0.0)) {
        return None;
    }
    let k = sweep.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(n, c) in sweep {
        let x = (n as f64).ln();
        let y = c.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = k * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((k * sxy - sx * sy) / denom)
}

/// Parsed form of a target spec string, before any file I/O.
///
/// Grammar: `normal:mu=<f>,sigma=<f>[,lo=<f>,hi=<f>]`, `uniform:a=<f>,b=<f>`,
/// `hist:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetRequest {
    Normal {
        mu: f64,
        sigma: f64,
        lo: Option<f64>,
        hi: Option<f64>,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    Hist(PathBuf),
}

impl TargetRequest {
    /// Resolves everything except `hist:` (which needs file I/O).
    pub fn build(&self) -> Result<Option<TargetSpec>> {
        match self {
            TargetRequest::Normal { mu, sigma, lo, hi } => {
                let default = default_normal_support(*mu, *sigma);
                let support = (lo.unwrap_or(default.0), hi.unwrap_or(default.1));
                make_truncated_normal(*mu, *sigma, support).map(Some)
            }
            TargetRequest::Uniform { a, b } => make_uniform(*a, *b).map(Some),
            TargetRequest::Hist(_) => Ok(None),
        }
    }
}

impl FromStr for TargetRequest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "normal" => {
                let kv = parse_kv(rest, "target")?;
                let (mut mu, mut sigma, mut lo, mut hi) = (None, None, None, None);
                for (k, v) in kv {
                    match k.as_str() {
                        "mu" => set_once(&mut mu, v, "mu")?,
                        "sigma" => set_once(&mut sigma, v, "sigma")?,
                        "lo" => set_once(&mut lo, v, "lo")?,
                        "hi" => set_once(&mut hi, v, "hi")?,
                        other => {
                            return Err(Error::Parse {
                                kind: "target",
                                detail: format!("unknown key '{other}' in normal spec"),
                            });
                        }
                    }
                }
                Ok(TargetRequest::Normal {
                    mu: require(mu, "mu", "target")?,
                    sigma: require(sigma, "sigma", "target")?,
                    lo,
                    hi,
                })
            }
            "uniform" => {
                let kv = parse_kv(rest, "target")?;
                let (mut a, mut b) = (None, None);
                for (k, v) in kv {
                    match k.as_str() {
                        "a" => set_once(&mut a, v, "a")?,
                        "b" => set_once(&mut b, v, "b")?,
                        other => {
                            return Err(Error::Parse {
                                kind: "target",
                                detail: format!("unknown key '{other}' in uniform spec"),
                            });
                        }
                    }
                }
                Ok(TargetRequest::Uniform {
                    a: require(a, "a", "target")?,
                    b: require(b, "b", "target")?,
                })
            }
            "hist" if !rest.is_empty() => Ok(TargetRequest::Hist(PathBuf::from(rest))),
            _ => Err(Error::Parse {
                kind: "target",
                detail: format!("unknown target spec '{s}'"),
            }),
        }
    }
}

/// Parsed form of a reference spec string: `torus-analytic`, `hist:<path>`,
/// or `auto` (histogram of all pair distances).
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceRequest {
    TorusAnalytic,
    Hist(PathBuf),
    Auto,
}

impl FromStr for ReferenceRequest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus-analytic" => Ok(ReferenceRequest::TorusAnalytic),
            "auto" => Ok(ReferenceRequest::Auto),
            _ => match s.split_once(':') {
                Some(("hist", path)) if !path.is_empty() => {
                    Ok(ReferenceRequest::Hist(PathBuf::from(path)))
                }
                _ => Err(Error::Parse {
                    kind: "reference",
                    detail: format!("unknown reference spec '{s}'"),
                }),
            },
        }
    }
}

fn parse_kv(s: &str, what: &'static str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Error::Parse {
            kind: what,
            detail: format!("expected key=value, got '{part}'"),
        })?;
        let parsed: f64 = v.trim().parse().map_err(|_| Error::Parse {
            kind: what,
            detail: format!("bad number '{v}' for key '{k}'"),
        })?;
        out.push((k.trim().to_string(), parsed));
    }
    Ok(out)
}

fn set_once(slot: &mut Option<f64>, v: f64, key: &str) -> Result<()> {
    if slot.replace(v).is_some() {
        return Err(Error::Parse {
            kind: "target",
            detail: format!("duplicate key '{key}'"),
        });
    }
    Ok(())
}

fn require(slot: Option<f64>, key: &str, kind: &'static str) -> Result<f64> {
    slot.ok_or_else(|| Error::Parse {
        kind,
        detail: format!("missing required key '{key}'"),
    })
}
