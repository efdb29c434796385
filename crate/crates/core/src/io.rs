//! Flat-file formats shared by the CLI and tests: points CSV, edges TSV,
//! trace CSV, degree lists, explicit weight tables, histogram bin files,
//! and run metadata JSON.
//!
//! All floats are written with Rust's shortest round-trip formatting so
//! identical inputs produce byte-identical files.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::sampler::{pair_index, GraphSample, TraceRow, WeightTable};

fn parse_err(kind: &'static str, detail: String) -> Error {
    Error::Parse { kind, detail }
}

/// Header `id,x0,...`; ids 1..n; one point per row.
pub fn write_points_csv(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut out = String::from("id");
    for d in 0..cloud.dim() {
        out.push_str(&format!(",x{d}"));
    }
    out.push('\n');
    for (i, p) in cloud.points().iter().enumerate() {
        out.push_str(&(i + 1).to_string());
        for c in p {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_points_csv(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err("points", "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols[0] != "id" {
        return Err(parse_err(
            "points",
            format!("header must start with 'id,x0', got '{header}'"),
        ));
    }
    for (k, c) in cols[1..].iter().enumerate() {
        if *c != format!("x{k}") {
            return Err(parse_err(
                "points",
                format!("expected column 'x{k}', got '{c}'"),
            ));
        }
    }
    let dim = cols.len() - 1;
    let mut points: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(parse_err(
                "points",
                format!("expected {} fields, got '{line}'", dim + 1),
            ));
        }
        let id: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err("points", format!("bad id '{}'", fields[0])))?;
        if id != points.len() + 1 {
            return Err(parse_err(
                "points",
                format!(
                    "ids must run 1..n in order, got {id} at row {}",
                    points.len() + 1
                ),
            ));
        }
        let coords = fields[1..]
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err("points", format!("bad coordinate '{f}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(coords);
    }
    PointCloud::new(dim, points)
}

/// One line `i<TAB>j<TAB>r` per edge, 1-indexed, in placement order.
pub fn write_edges_tsv(path: &Path, sample: &GraphSample) -> Result<()> {
    let mut out = String::new();
    for &(i, j, r) in &sample.edges {
        out.push_str(&format!("{}\t{}\t{r}\n", i + 1, j + 1));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Lengths from an edges TSV; also accepts bare one-length-per-line input.
pub fn read_edge_lengths(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let raw = match fields.len() {
            1 => fields[0],
            3 => fields[2],
            _ => {
                return Err(parse_err(
                    "edges",
                    format!("expected 'i<TAB>j<TAB>r' or a bare length, got '{line}'"),
                ));
            }
        };
        out.push(
            raw.trim()
                .parse::<f64>()
                .map_err(|_| parse_err("edges", format!("bad length '{raw}'")))?,
        );
    }
    Ok(out)
}

/// Header `k,alpha,r,Z`, one row per placed edge.
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut out = String::from("k,alpha,r,Z\n");
    for row in rows {
        out.push_str(&format!("{},{},{},{}\n", row.k, row.alpha, row.r, row.z));
    }
    fs::write(path, out)?;
    Ok(())
}

/// One nonnegative integer per line.
pub fn read_degree_file(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(
            t.parse::<usize>()
                .map_err(|_| parse_err("degrees", format!("bad degree '{t}'")))?,
        );
    }
    if out.is_empty() {
        return Err(parse_err("degrees", "no degrees in file".into()));
    }
    Ok(out)
}

/// Explicit pair weights, one line `i<TAB>j<TAB>r` per unordered pair,
/// 1-indexed; every pair of 1..n must appear exactly once, with n taken
/// from the largest index seen. Returns the table plus the packed
/// upper-triangle weights (pair order (1,2), (1,3), ...).
pub fn read_weights_tsv(path: &Path) -> Result<(WeightTable, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    let mut n = 0usize;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                "weights",
                format!("expected 'i<TAB>j<TAB>r', got '{line}'"),
            ));
        }
        let i: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err("weights", format!("bad index '{}'", fields[0])))?;
        let j: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| parse_err("weights", format!("bad index '{}'", fields[1])))?;
        let r: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err("weights", format!("bad weight '{}'", fields[2])))?;
        if i == 0 || j == 0 || i == j {
            return Err(parse_err(
                "weights",
                format!("indices must be distinct and 1-based, got ({i}, {j})"),
            ));
        }
        n = n.max(i).max(j);
        rows.push((i.min(j) - 1, i.max(j) - 1, r));
    }
    if n < 2 {
        return Err(parse_err("weights", "need at least one pair".into()));
    }
    let mut upper: Vec<Option<f64>> = vec![None; n * (n - 1) / 2];
    for (a, b, r) in rows {
        let idx = pair_index(n, a, b);
        if upper[idx].replace(r).is_some() {
            return Err(parse_err(
                "weights",
                format!("duplicate pair ({}, {})", a + 1, b + 1),
            ));
        }
    }
    let missing = upper.iter().filter(|w| w.is_none()).count();
    if missing > 0 {
        return Err(parse_err(
            "weights",
            format!("{missing} of {} pairs missing for n = {n}", upper.len()),
        ));
    }
    let dists: Vec<f64> = upper.into_iter().map(Option::unwrap).collect();
    let table = WeightTable::from_upper_tri(n, dists.clone())?;
    Ok((table, dists))
}

/// CSV rows `lo,hi,mass`; a single leading non-numeric line is treated as a
/// header and skipped.
pub fn read_histogram_rows(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let nums: Option<Vec<f64>> = fields
            .iter()
            .map(|f| f.trim().parse::<f64>().ok())
            .collect();
        match nums {
            Some(v) if v.len() == 3 => out.push((v[0], v[1], v[2])),
            _ if k == 0 => continue,
            _ => {
                return Err(parse_err(
                    "histogram",
                    format!("expected 'lo,hi,mass', got '{line}'"),
                ));
            }
        }
    }
    if out.is_empty() {
        return Err(parse_err("histogram", "no bins in file".into()));
    }
    Ok(out)
}

/// Versioned run metadata; optional diagnostics render as JSON null, so the
/// document never carries NaN.
pub fn sample_metadata(
    sample: &GraphSample,
    c_estimate: Option<f64>,
    d_k: Option<f64>,
    wall_time_ms: Option<u64>,
) -> Value {
    json!({
        "schema": 1,
        "n": sample.n,
        "m": sample.m,
        "status": sample.status.as_str(),
        "edges_placed": sample.edges.len(),
        "gamma": sample.gamma,
        "seed": sample.seed,
        "C_estimate": c_estimate,
        "d_K": d_k,
        "wall_time_ms": wall_time_ms,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| parse_err("json", e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Decimal with a fixed number of significant digits: 0.25 at 9 digits
/// renders as "0.250000000".
pub fn format_sig(v: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if v == 0.0 || !v.is_finite() {
        return format!("{:.*}", digits - 1, v);
    }
    let exp = v.abs().log10().floor() as i32;
    let prec = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{v:.prec$}")
}
