use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use karc_core::arc_tracer::{construct_arc, KArc, Status};
use karc_core::farey::{farey_sequence, upper_half_pairs, FareyPair};
use karc_core::io::{
    boundary_dat, endpoints_text, format_matrix, parse_complex, parse_matrix, region_descriptor,
    write_arc_bundle,
};
use karc_core::ito_poly::classify as classify_pair;
use karc_core::region_builder::{
    build_region, eigenvalue_cloud, extremality_probe, Region, RegionConfig,
};
use karc_core::root_engine::TrackingConfig;
use karc_core::stochastic_lab::{digraph_flags, realization_fidelity, spectrum as eigenvalues, Primitivity};
use karc_core::Error;
use num_complex::Complex64;
use rayon::prelude::*;

pub const DEFAULT_TRIALS: usize = 10_000;
pub const CLOUD_TOL: f64 = 1e-6;
pub const SHADOW_TOL: f64 = 1e-8;
const FIDELITY_ALPHAS: usize = 100;
const CHAR_POLY_TOL: f64 = 1e-10;
const TYPE0_TOL: f64 = 1e-9;
const ARC_SPECTRUM_TOL: f64 = 1e-8;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable input, unwritable output.
    Usage(String),
    /// A numerical computation broke down.
    Math(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Math(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Math(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidOrder(_)
            | Error::UnsupportedOrder(..)
            | Error::Domain(_)
            | Error::Parse(_)
            | Error::Precondition(_)
            | Error::Io(_) => CliError::Usage(e.to_string()),
            other => CliError::Math(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type Out<'a> = &'a mut dyn Write;
type CmdResult = Result<bool, CliError>;

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn verdict(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))
}

fn write_bundle(dir: &Path, arcs: &[KArc], samples: usize) -> Result<(), CliError> {
    create_dir(dir)?;
    write_arc_bundle(dir, arcs, samples)
        .map(|_| ())
        .map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))
}

pub fn farey(out: Out, n: u64) -> CmdResult {
    for f in farey_sequence(n)? {
        writeln!(out, "{f}")?;
    }
    Ok(true)
}

pub fn classify(out: Out, n: u64) -> CmdResult {
    for pair in upper_half_pairs(n)? {
        let poly = classify_pair(pair, n)?;
        writeln!(
            out,
            "{} {} {} {} {} {}",
            pair.lo, pair.hi, poly.kind, poly.q, poly.s, poly.d
        )?;
    }
    Ok(true)
}

/// Every upper-half arc of order `n` (or just `filter`), constructed in
/// parallel and returned in Farey order.
pub fn construct_all(n: u64, filter: Option<&str>) -> Result<Vec<(FareyPair, karc_core::Result<KArc>)>, CliError> {
    let pairs = match filter {
        Some(s) => {
            if n < 3 {
                return Err(Error::UnsupportedOrder(n, 3).into());
            }
            let pair = FareyPair::parse(s, n).map_err(|e| CliError::Usage(e.to_string()))?;
            if !pair.lies_in_upper_half() {
                return Err(CliError::Usage(format!(
                    "{pair} is not in the upper half; use its mirror {}",
                    pair.mirror()
                )));
            }
            vec![pair]
        }
        None => upper_half_pairs(n)?,
    };
    let cfg = TrackingConfig::default();
    Ok(pairs
        .into_par_iter()
        .map(|pair| (pair, construct_arc(pair, &cfg)))
        .collect())
}

/// Prints the summary table; returns the arcs that were built and whether
/// all of them passed.
fn arc_table(out: Out, built: Vec<(FareyPair, karc_core::Result<KArc>)>) -> Result<(Vec<KArc>, bool), CliError> {
    writeln!(
        out,
        "{:<14} {:<4} {:<36} {:<10} {:>12} {:>6} {:>6} {:>6}",
        "pair", "type", "provenance", "status", "max_resid", "sector", "simple", "ok"
    )?;
    let mut arcs = Vec::new();
    let mut all = true;
    for (pair, res) in built {
        match res {
            Ok(arc) => {
                let c = &arc.checks;
                let ok = arc.contracts_hold();
                all &= ok;
                writeln!(
                    out,
                    "{:<14} {:<4} {:<36} {:<10} {:>12.3e} {:>6} {:>6} {:>6}",
                    format!("{} {}", pair.lo, pair.hi),
                    arc.kind().label(),
                    arc.provenance.to_string(),
                    arc.status.label(),
                    c.max_residual.max(c.max_full_residual),
                    yes(c.sector_ok()),
                    yes(c.simple),
                    verdict(ok),
                )?;
                arcs.push(arc);
            }
            Err(e) => {
                all = false;
                writeln!(out, "{:<14} FAIL: {e}", format!("{} {}", pair.lo, pair.hi))?;
            }
        }
    }
    Ok((arcs, all))
}

pub fn arcs(out: Out, n: u64, pair: Option<&str>, samples: usize, dir: &Path) -> CmdResult {
    let built = construct_all(n, pair)?;
    let (arcs, all) = arc_table(out, built)?;
    write_bundle(dir, &arcs, samples)?;
    let heuristic = arcs.iter().filter(|a| a.status == Status::Heuristic).count();
    writeln!(
        out,
        "{} arcs written to {} ({heuristic} heuristic)",
        arcs.len(),
        dir.display()
    )?;
    Ok(all)
}

fn build(n: u64) -> Result<Region, CliError> {
    Ok(build_region(n, &RegionConfig::default())?)
}

pub fn region(out: Out, n: u64, samples: usize, dir: &Path) -> CmdResult {
    let region = build(n)?;
    let report = region.check_invariants()?;
    write_bundle(dir, &region.arcs, samples)?;
    write_file(&dir.join("boundary.dat"), &boundary_dat(&region))?;
    write_file(
        &dir.join("region.json"),
        &region_descriptor(&region, "boundary.dat"),
    )?;
    writeln!(out, "n: {n}")?;
    writeln!(out, "arcs: {} ({} upper)", region.arcs.len(), region.upper_arcs().len())?;
    writeln!(out, "vertices: {}", region.boundary.len())?;
    writeln!(out, "closed: {}", yes(report.closed))?;
    writeln!(out, "max modulus: {:.17}", report.max_modulus)?;
    writeln!(out, "conjugate gap: {:.3e}", report.conjugate_gap)?;
    writeln!(out, "roots of unity in order: {}", yes(report.vertices_in_order))?;
    writeln!(out, "unit circle only at endpoints: {}", yes(report.unit_circle_ok))?;
    writeln!(out, "arc contracts: {}", yes(report.arcs_ok))?;
    writeln!(out, "invariants: {}", verdict(report.all_ok()))?;
    writeln!(out, "descriptor: {}", dir.join("region.json").display())?;
    Ok(report.all_ok())
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("tolerance must be finite and non-negative, got {tol}")))
    }
}

pub fn check(out: Out, n: u64, z: &str, tol: f64, gammas: &[f64]) -> CmdResult {
    check_tol(tol)?;
    let z = parse_complex(z)?;
    if gammas.iter().any(|&g| !(g > 1.0)) {
        return Err(CliError::Usage("every gamma must exceed 1".into()));
    }
    let region = build(n)?;
    let dist = region.boundary_distance(z);
    let place = if dist <= tol {
        "boundary"
    } else if region.contains(z, 0.0) {
        "inside"
    } else {
        "outside"
    };
    writeln!(out, "{place}")?;
    writeln!(out, "distance to boundary: {dist:.3e}")?;
    if !gammas.is_empty() {
        if place != "boundary" {
            return Err(CliError::Usage(format!(
                "the extremality probe needs a boundary point; {z} is {place}"
            )));
        }
        let report = extremality_probe(&region, z, gammas)?;
        for (g, outside) in &report.outside {
            writeln!(
                out,
                "probe: {} at gamma={g}",
                if *outside { "outside" } else { "inside" }
            )?;
        }
        writeln!(out, "extremal: {}", yes(report.extremal()))?;
    }
    Ok(true)
}

pub fn verify(out: Out, n: u64, trials: usize, seed: u64, tol: f64, dir: &Path) -> CmdResult {
    check_tol(tol)?;
    let region = build(n)?;
    let mut all = true;

    let cloud = eigenvalue_cloud(&region, trials, seed, tol)?;
    let ok = cloud.outside.is_empty();
    all &= ok;
    writeln!(
        out,
        "cloud containment: {} matrices, {} eigenvalues, {} outside (tol {tol:e}, seed {seed}, radius error {:.1e}) {}",
        cloud.matrices,
        cloud.eigenvalues,
        cloud.outside.len(),
        cloud.radius_error,
        verdict(ok)
    )?;
    if let Some(a) = &cloud.offender {
        create_dir(dir)?;
        let path = dir.join("offending_matrix.txt");
        write_file(&path, &format_matrix(a))?;
        let (k, z, d) = cloud.outside[0];
        writeln!(out, "  matrix {k}: eigenvalue {z} is {d:.3e} outside; dumped to {}", path.display())?;
    }

    let fid = realization_fidelity(region.upper_arcs(), FIDELITY_ALPHAS)?;
    let ok = fid.char_poly_error <= CHAR_POLY_TOL
        && fid.type0_spectrum_error <= TYPE0_TOL
        && fid.arc_spectrum_error <= ARC_SPECTRUM_TOL;
    all &= ok;
    writeln!(
        out,
        "realization fidelity: {} arcs, char poly {:.1e}, type 0 spectrum {:.1e}, arc samples {:.1e} {}",
        fid.arcs,
        fid.char_poly_error,
        fid.type0_spectrum_error,
        fid.arc_spectrum_error,
        verdict(ok)
    )?;
    if !ok {
        let realized: Vec<KArc> = region
            .upper_arcs()
            .iter()
            .filter(|a| a.status == Status::Theorem)
            .cloned()
            .collect();
        write_bundle(dir, &realized, usize::MAX)?;
        writeln!(out, "  realized arcs dumped to {}", dir.display())?;
    }

    let worst = region.shadows.iter().map(|s| s.deviation).fold(0.0, f64::max);
    let ok = worst <= SHADOW_TOL;
    all &= ok;
    writeln!(
        out,
        "power-vs-trace agreement: {} power arcs, max deviation {worst:.1e} (tol {SHADOW_TOL:e}) {}",
        region.shadows.len(),
        verdict(ok)
    )?;
    for s in &region.shadows {
        writeln!(out, "  {} {:.1e}", s.pair, s.deviation)?;
    }
    if !ok {
        let bad: Vec<KArc> = region
            .shadows
            .iter()
            .filter(|s| s.deviation > SHADOW_TOL)
            .map(|s| s.traced.clone())
            .collect();
        write_bundle(dir, &bad, usize::MAX)?;
        writeln!(out, "  traced shadows dumped to {}", dir.display())?;
    }

    let report = region.check_invariants()?;
    all &= report.all_ok();
    writeln!(
        out,
        "region invariants: {} arcs, {} vertices {}",
        region.arcs.len(),
        region.boundary.len(),
        verdict(report.all_ok())
    )?;
    writeln!(out, "overall: {}", verdict(all))?;
    Ok(all)
}

pub fn plot(
    out: Out,
    n: u64,
    svg_path: Option<&Path>,
    dat_dir: Option<&Path>,
    full: bool,
    samples: usize,
) -> CmdResult {
    if svg_path.is_none() && dat_dir.is_none() {
        return Err(CliError::Usage("plot needs --svg FILE and/or --dat DIR".into()));
    }
    let built = construct_all(n, None)?;
    let mut arcs = Vec::with_capacity(built.len());
    let mut all = true;
    for (pair, res) in built {
        match res {
            Ok(arc) => {
                all &= arc.contracts_hold();
                arcs.push(arc);
            }
            Err(e) => {
                writeln!(out, "{pair}: {e}")?;
                return Ok(false);
            }
        }
    }
    if let Some(dir) = dat_dir {
        write_bundle(dir, &arcs, samples)?;
        write_file(&dir.join("endpoints.txt"), &endpoints_text(&arcs))?;
        writeln!(out, "{} arc files and endpoints.txt written to {}", arcs.len(), dir.display())?;
    }
    if let Some(path) = svg_path {
        write_file(path, &crate::svg::render(n, &arcs, full, samples))?;
        writeln!(out, "figure written to {}", path.display())?;
    }
    Ok(all)
}

fn format_point(z: Complex64) -> String {
    format!("{:.15e}{:+.15e}i", z.re, z.im)
}

pub fn spectrum(out: Out, file: &Path) -> CmdResult {
    let text = fs::read_to_string(file)
        .map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
    let a = parse_matrix(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
    let mut roots = eigenvalues(&a)?.roots;
    roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    writeln!(out, "eigenvalues:")?;
    for z in &roots {
        writeln!(out, "  {}", format_point(*z))?;
    }
    let rho = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    writeln!(out, "spectral radius: {rho:.15}")?;
    let flags = digraph_flags(&a);
    writeln!(out, "irreducible: {}", yes(flags.irreducible))?;
    let prim = match flags.primitivity {
        Some(Primitivity::Primitive) => "yes".to_string(),
        Some(Primitivity::Imprimitive { period }) => format!("no (period {period})"),
        Some(Primitivity::Undefined) => "undefined".to_string(),
        None => "no (reducible)".to_string(),
    };
    writeln!(out, "primitive: {prim}")?;
    Ok(true)
}
