//! Text formats: arc data files, arc metadata, the region descriptor and
//! the matrix format.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::arc_tracer::KArc;
use crate::error::{Error, Result};
use crate::region_builder::Region;
use crate::stochastic_lab::StochasticMatrix;

/// Default number of samples written per arc.
pub const DEFAULT_SAMPLE_BUDGET: usize = 512;

/// Indices of at most `budget` samples spread uniformly in arc length,
/// always including both ends.
pub fn downsample_indices(points: &[Complex64], budget: usize) -> Vec<usize> {
    let m = points.len();
    if m <= budget.max(2) {
        return (0..m).collect();
    }
    let mut cum = Vec::with_capacity(m);
    let mut total = 0.0;
    cum.push(0.0);
    for w in points.windows(2) {
        total += (w[1] - w[0]).norm();
        cum.push(total);
    }
    let mut out: Vec<usize> = Vec::with_capacity(budget);
    let mut j = 0;
    for k in 0..budget {
        let target = total * k as f64 / (budget - 1) as f64;
        while j + 1 < m && cum[j + 1] <= target {
            j += 1;
        }
        let pick = if j + 1 < m && cum[j + 1] - target < target - cum[j] {
            j + 1
        } else {
            j
        };
        if out.last() != Some(&pick) {
            out.push(pick);
        }
    }
    if out[0] != 0 {
        out.insert(0, 0);
    }
    if *out.last().unwrap() != m - 1 {
        out.push(m - 1);
    }
    out
}

fn push_point(out: &mut String, z: Complex64) {
    // 17 significant digits round-trip every double
    writeln!(out, "{:.16e} {:.16e}", z.re, z.im).unwrap();
}

/// `"x y"` per sample, alpha ascending, at most `budget` lines.
pub fn arc_dat(arc: &KArc, budget: usize) -> String {
    let points: Vec<Complex64> = arc.points().collect();
    let mut out = String::new();
    for i in downsample_indices(&points, budget) {
        push_point(&mut out, points[i]);
    }
    out
}

/// `key: value` metadata for an arc file.
pub fn arc_meta(arc: &KArc, written: usize) -> String {
    let c = &arc.checks;
    let mut out = String::new();
    writeln!(out, "pair: {} {}", arc.pair().lo, arc.pair().hi).unwrap();
    writeln!(out, "n: {}", arc.poly.n).unwrap();
    writeln!(out, "type: {}", arc.kind()).unwrap();
    writeln!(out, "provenance: {}", arc.provenance).unwrap();
    writeln!(out, "status: {}", arc.status.label()).unwrap();
    writeln!(out, "samples: {written}").unwrap();
    writeln!(out, "traced_samples: {}", arc.len()).unwrap();
    writeln!(out, "max_residual: {:e}", c.max_residual.max(c.max_full_residual)).unwrap();
    writeln!(out, "sector_ok: {}", c.sector_ok()).unwrap();
    writeln!(out, "simple: {}", c.simple).unwrap();
    out
}

/// Parses a `key: value` file.
pub fn parse_meta(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(':'))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// Base file name (without extension) of an arc.
pub fn arc_stem(arc: &KArc) -> String {
    format!("arc_{}", arc.pair().slug())
}

/// Writes `<stem>.dat` and `<stem>.meta` for each arc into `dir`.
pub fn write_arc_bundle(dir: &Path, arcs: &[KArc], budget: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(arcs.len());
    for arc in arcs {
        let stem = arc_stem(arc);
        let dat = arc_dat(arc, budget);
        let lines = dat.lines().count();
        let path = dir.join(format!("{stem}.dat"));
        fs::write(&path, dat)?;
        fs::write(dir.join(format!("{stem}.meta")), arc_meta(arc, lines))?;
        written.push(path);
    }
    Ok(written)
}

/// `"p/q x y"` per distinct endpoint of `arcs`, in the order met.
pub fn endpoints_text(arcs: &[KArc]) -> String {
    let mut seen = Vec::new();
    for arc in arcs {
        for f in [arc.pair().lo, arc.pair().hi] {
            if !seen.contains(&f) {
                seen.push(f);
            }
        }
    }
    seen.sort();
    let mut out = String::new();
    for f in seen {
        let z = f.root_of_unity();
        writeln!(out, "{f} {:.16e} {:.16e}", z.re, z.im).unwrap();
    }
    out
}

/// The closed boundary polyline, one point per line.
pub fn boundary_dat(region: &Region) -> String {
    let mut out = String::new();
    for z in &region.boundary {
        push_point(&mut out, *z);
    }
    out
}

#[derive(Serialize)]
struct ArcEntry {
    pair: String,
    #[serde(rename = "type")]
    kind: String,
    provenance: String,
    status: String,
    file: String,
}

#[derive(Serialize)]
struct Tolerances {
    weld: f64,
    endpoint: f64,
    residual: f64,
    sector_slack: f64,
    guard_floor: f64,
    initial_points: usize,
    refinement_cap: usize,
}

#[derive(Serialize)]
struct Descriptor {
    n: u64,
    arcs: Vec<ArcEntry>,
    boundary_points: usize,
    boundary_file: String,
    tolerances: Tolerances,
}

/// JSON descriptor of a built region. Arc files are referenced by the
/// names [`write_arc_bundle`] uses.
pub fn region_descriptor(region: &Region, boundary_file: &str) -> String {
    let arcs = region
        .arcs
        .iter()
        .map(|a| ArcEntry {
            pair: a.pair().to_string(),
            kind: a.kind().label().to_string(),
            provenance: a.provenance.to_string(),
            status: a.status.label().to_string(),
            file: format!("{}.dat", arc_stem(a)),
        })
        .collect();
    let t = &region.config.tracking;
    let d = Descriptor {
        n: region.n,
        arcs,
        boundary_points: region.boundary.len(),
        boundary_file: boundary_file.to_string(),
        tolerances: Tolerances {
            weld: region.config.weld_tol,
            endpoint: crate::arc_tracer::ENDPOINT_TOL,
            residual: crate::arc_tracer::RESIDUAL_TOL,
            sector_slack: crate::arc_tracer::SECTOR_SLACK,
            guard_floor: t.guard_floor,
            initial_points: t.initial_points,
            refinement_cap: t.refinement_cap,
        },
    };
    serde_json::to_string_pretty(&d).expect("descriptor serializes") + "\n"
}

/// First line `n`, then `n` rows of `n` numbers.
pub fn parse_matrix(text: &str) -> Result<StochasticMatrix> {
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
    let data = tokens
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad entry {t:?}: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    if data.len() != n * n {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            n * n,
            data.len()
        )));
    }
    StochasticMatrix::new(n, data)
}

pub fn format_matrix(a: &StochasticMatrix) -> String {
    let mut out = format!("{}\n", a.n());
    for i in 0..a.n() {
        let row: Vec<String> = a.row(i).iter().map(|x| format!("{x:.17e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a point written as `a+bi`, `a-bi`, `a`, or `bi`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot read {s:?} as a complex number"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(
            body[..k].parse().map_err(|_| bad())?,
            imag(&body[k..])?,
        )),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}
