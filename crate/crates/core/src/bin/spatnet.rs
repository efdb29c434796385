//! Command-line front end: point-cloud generation, graph sampling, distance
//! checks, and batch studies.
//!
//! Exit codes: 0 success, 1 negative check result, 2 usage or validation
//! error, 3 sampler failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spatnet::degree::{is_graphical, DegreeSequence};
use spatnet::dist::{
    auto_reference, ratio_bound, HistogramDensity, ReferenceDensity, ReferenceRequest,
    TargetRequest, TargetSpec, DEFAULT_RATIO_GRID,
};
use spatnet::error::Error;
use spatnet::experiments::{boundary_trace_study, convergence_study};
use spatnet::geometry::{generate_poisson_disk, generate_uniform};
use spatnet::io::{
    format_sig, read_degree_file, read_edge_lengths, read_histogram_rows, read_points_csv,
    read_weights_tsv, sample_metadata, write_edges_tsv, write_json, write_points_csv,
    write_trace_csv,
};
use spatnet::metrics::{empirical_law, w1_empirical_target, EmpiricalLaw};
use spatnet::sampler::{run_with, RunStatus, SamplerOptions, StallAction, WeightTable};

#[derive(Parser)]
#[command(
    name = "spatnet",
    version,
    about = "Random graphs with prescribed degrees and edge lengths"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a point cloud on the unit torus
    GenPoints(GenPointsArgs),
    /// Sample a graph with prescribed degrees and target edge-length law
    Sample(SampleArgs),
    /// W1 distance between an edge list's lengths and a target law
    Distance(DistanceArgs),
    /// Report whether a degree file is graphical
    CheckDegrees {
        /// File with one degree per line
        degrees: PathBuf,
    },
    /// Batch studies over many runs
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PointMode {
    Uniform,
    PoissonDisk,
}

#[derive(Args)]
struct GenPointsArgs {
    /// Number of points (uniform mode only; the packing decides otherwise)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: usize,
    #[arg(long, value_enum)]
    mode: PointMode,
    /// Minimum pairwise distance (poisson-disk mode only)
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    /// Degree source: a file with one degree per line, or `regular:<k>`
    #[arg(long)]
    degrees: String,
    /// Points CSV; pair weights are torus distances
    #[arg(long)]
    points: Option<PathBuf>,
    /// Explicit pair weights TSV (`i<TAB>j<TAB>r`, 1-indexed, all pairs)
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Target law: `normal:mu=..,sigma=..[,lo=..,hi=..]`, `uniform:a=..,b=..`, `hist:<path>`
    #[arg(long)]
    target: String,
    /// Reference law: `torus-analytic`, `hist:<path>`, `auto`; default picks
    /// the analytic form when the points dimension and target support allow
    #[arg(long)]
    reference: Option<String>,
    /// Stop after floor(gamma * m) edges
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_edges: PathBuf,
    #[arg(long)]
    out_trace: PathBuf,
    #[arg(long)]
    out_meta: PathBuf,
    /// End with status `failure` when the active weight hits zero early,
    /// instead of placing the remaining edges by degrees alone
    #[arg(long)]
    strict: bool,
    /// Record wall time in metadata (breaks byte determinism across runs)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    target: String,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(subcommand)]
    which: ExperimentCmd,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// d_K of completed samples against the target over a sweep of n
    Convergence {
        /// Comma-separated n values
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        target: String,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        master_seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Per-step traces for shrinking normal targets
    Boundary {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        degree: usize,
        /// Comma-separated target means
        #[arg(long, value_delimiter = ',')]
        means: Vec<f64>,
        #[arg(long, default_value_t = 0.15)]
        rel_sd: f64,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        master_seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> spatnet::Result<u8> {
    match cli.cmd {
        Cmd::GenPoints(a) => cmd_gen_points(a),
        Cmd::Sample(a) => cmd_sample(a),
        Cmd::Distance(a) => cmd_distance(a),
        Cmd::CheckDegrees { degrees } => cmd_check_degrees(&degrees),
        Cmd::Experiment(a) => match a.which {
            ExperimentCmd::Convergence {
                n_list,
                degree,
                target,
                reps,
                master_seed,
                out_dir,
            } => cmd_convergence(&n_list, degree, &target, reps, master_seed, &out_dir),
            ExperimentCmd::Boundary {
                n,
                degree,
                means,
                rel_sd,
                reps,
                master_seed,
                out_dir,
            } => cmd_boundary(n, degree, &means, rel_sd, reps, master_seed, &out_dir),
        },
    }
}

fn cmd_gen_points(a: GenPointsArgs) -> spatnet::Result<u8> {
    if a.dim == 0 {
        return Err(Error::InvalidParameter("--dim must be at least 1".into()));
    }
    let cloud = match a.mode {
        PointMode::Uniform => {
            if a.radius.is_some() {
                return Err(Error::InvalidParameter(
                    "--radius requires --mode poisson-disk".into(),
                ));
            }
            let n =
                a.n.ok_or_else(|| Error::InvalidParameter("uniform mode requires --n".into()))?;
            if n == 0 {
                return Err(Error::InvalidParameter("--n must be at least 1".into()));
            }
            generate_uniform(n, a.dim, a.seed)
        }
        PointMode::PoissonDisk => {
            if a.n.is_some() {
                return Err(Error::InvalidParameter(
                    "--n cannot be combined with poisson-disk; the packing determines the count"
                        .into(),
                ));
            }
            let radius = a.radius.ok_or_else(|| {
                Error::InvalidParameter("poisson-disk mode requires --radius".into())
            })?;
            generate_poisson_disk(radius, a.dim, a.seed)?
        }
    };
    write_points_csv(&a.out, &cloud)?;
    println!("wrote {} points to {}", cloud.n(), a.out.display());
    Ok(0)
}

fn cmd_sample(a: SampleArgs) -> spatnet::Result<u8> {
    let started = Instant::now();
    let (table, dists, dim) = load_weights(a.points.as_deref(), a.weights.as_deref())?;
    let degrees = parse_degree_source(&a.degrees, table.n())?;
    let target = build_target(&a.target)?;
    let reference = build_reference(a.reference.as_deref(), &target, dim, &dists)?;
    let options = SamplerOptions {
        on_stall: if a.strict {
            StallAction::Fail
        } else {
            StallAction::PlaceRemaining
        },
        ..SamplerOptions::default()
    };
    let out = run_with(
        &degrees, &table, &target, &reference, a.gamma, a.seed, &options,
    )?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let c_estimate = ratio_bound(&target, &reference, DEFAULT_RATIO_GRID)
        .ok()
        .map(|d| d.c_estimate);
    let d_k = if out.sample.status != RunStatus::Failure && !out.sample.edges.is_empty() {
        Some(w1_empirical_target(&empirical_law(&out.sample)?, &target))
    } else {
        None
    };
    write_edges_tsv(&a.out_edges, &out.sample)?;
    write_trace_csv(&a.out_trace, &out.trace)?;
    let wall = a.timings.then(|| started.elapsed().as_millis() as u64);
    write_json(
        &a.out_meta,
        &sample_metadata(&out.sample, c_estimate, d_k, wall),
    )?;
    println!("status {}", out.sample.status.as_str());
    Ok(if out.sample.status == RunStatus::Failure {
        3
    } else {
        0
    })
}

type LoadedWeights = (WeightTable, Vec<f64>, Option<usize>);

/// Exactly one of points/weights; returns the table, packed distances, and
/// the point dimension when known.
fn load_weights(points: Option<&Path>, weights: Option<&Path>) -> spatnet::Result<LoadedWeights> {
    match (points, weights) {
        (Some(p), None) => {
            let cloud = read_points_csv(p)?;
            let (n, dim) = (cloud.n(), cloud.dim());
            let mut dists = Vec::with_capacity(n * n.saturating_sub(1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    dists.push(cloud.distance(i, j));
                }
            }
            Ok((WeightTable::from_cloud(cloud), dists, Some(dim)))
        }
        (None, Some(w)) => {
            let (table, dists) = read_weights_tsv(w)?;
            Ok((table, dists, None))
        }
        _ => Err(Error::InvalidParameter(
            "exactly one of --points or --weights is required".into(),
        )),
    }
}

fn parse_degree_source(src: &str, n: usize) -> spatnet::Result<DegreeSequence> {
    if let Some(k) = src.strip_prefix("regular:") {
        let k: usize = k.parse().map_err(|_| Error::Parse {
            kind: "degrees",
            detail: format!("bad regular degree '{k}'"),
        })?;
        DegreeSequence::regular(n, k)
    } else {
        let degrees = read_degree_file(Path::new(src))?;
        if degrees.len() != n {
            return Err(Error::SizeMismatch(n, degrees.len()));
        }
        DegreeSequence::new(degrees)
    }
}

fn build_target(spec: &str) -> spatnet::Result<TargetSpec> {
    let req: TargetRequest = spec.parse()?;
    if let Some(t) = req.build()? {
        return Ok(t);
    }
    let TargetRequest::Hist(path) = req else {
        unreachable!("only hist targets defer to file IO");
    };
    let rows = read_histogram_rows(&path)?;
    Ok(TargetSpec::from_histogram(HistogramDensity::from_rows(
        &rows, false,
    )?))
}

/// Explicit reference spec, or the default rule: analytic torus density when
/// the points dimension is 1 or 2 and the target support sits inside
/// [0, 1/2]; otherwise a histogram of the observed distances.
fn build_reference(
    spec: Option<&str>,
    target: &TargetSpec,
    dim: Option<usize>,
    dists: &[f64],
) -> spatnet::Result<ReferenceDensity> {
    let req = match spec {
        Some(s) => s.parse::<ReferenceRequest>()?,
        None => {
            let (lo, hi) = target.support();
            if matches!(dim, Some(1) | Some(2)) && lo >= 0.0 && hi <= 0.5 {
                ReferenceRequest::TorusAnalytic
            } else {
                ReferenceRequest::Auto
            }
        }
    };
    match req {
        ReferenceRequest::TorusAnalytic => {
            let d = dim.ok_or_else(|| {
                Error::InvalidParameter(
                    "torus-analytic reference needs --points; explicit weights carry no dimension"
                        .into(),
                )
            })?;
            ReferenceDensity::torus_analytic(d)
        }
        ReferenceRequest::Auto => auto_reference(dists),
        ReferenceRequest::Hist(path) => {
            let rows = read_histogram_rows(&path)?;
            Ok(ReferenceDensity::Histogram(HistogramDensity::from_rows(
                &rows, false,
            )?))
        }
    }
}

fn cmd_distance(a: DistanceArgs) -> spatnet::Result<u8> {
    let lengths = read_edge_lengths(&a.edges)?;
    let law = EmpiricalLaw::from_lengths(&lengths)?;
    let target = build_target(&a.target)?;
    println!("{}", format_sig(w1_empirical_target(&law, &target), 9));
    Ok(0)
}

fn cmd_check_degrees(path: &Path) -> spatnet::Result<u8> {
    let degrees = read_degree_file(path)?;
    if is_graphical(&degrees) {
        println!("graphical");
        Ok(0)
    } else {
        println!("not graphical");
        Ok(1)
    }
}

fn cmd_convergence(
    n_list: &[usize],
    degree: usize,
    target_spec: &str,
    reps: usize,
    master_seed: u64,
    out_dir: &Path,
) -> spatnet::Result<u8> {
    let target = build_target(target_spec)?;
    let report = convergence_study(n_list, degree, &target, reps, master_seed)?;
    fs::create_dir_all(out_dir)?;
    let mut text = String::from("n,seed,status,d_K,C_estimate\n");
    for r in &report.rows {
        let d_k = r.d_k.map(|v| v.to_string()).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            r.seed,
            r.status.as_str(),
            d_k,
            r.c_estimate
        ));
    }
    fs::write(out_dir.join("report.csv"), text)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("completion_rate {}", report.completion_rate());
    for &(n, med) in &report.medians {
        match med {
            Some(v) => println!("median n={n} {v}"),
            None => println!("median n={n} none"),
        }
    }
    if let Some(tau) = report.tau_estimate() {
        println!("tau {tau}");
    }
    Ok(0)
}

fn cmd_boundary(
    n: usize,
    degree: usize,
    means: &[f64],
    rel_sd: f64,
    reps: usize,
    master_seed: u64,
    out_dir: &Path,
) -> spatnet::Result<u8> {
    let traces = boundary_trace_study(n, degree, means, rel_sd, reps, master_seed)?;
    let trace_dir = out_dir.join("traces");
    fs::create_dir_all(&trace_dir)?;
    let mut text = String::from("mean,rep,status,final_alpha\n");
    for t in &traces {
        text.push_str(&format!(
            "{},{},{},{}\n",
            t.mean,
            t.rep,
            t.status.as_str(),
            t.final_alpha
        ));
        write_trace_csv(
            &trace_dir.join(format!("{}_{}.csv", t.mean, t.rep)),
            &t.rows,
        )?;
    }
    fs::write(out_dir.join("report.csv"), text)?;
    let completed = traces
        .iter()
        .filter(|t| t.status == RunStatus::Complete)
        .count();
    println!("completed {completed}/{}", traces.len());
    Ok(0)
}
