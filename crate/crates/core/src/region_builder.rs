//! The closed boundary of the eigenvalue region for order `n`, membership
//! queries against it, and the convex-hull tools behind the extremality
//! argument.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arc_tracer::{
    build_power_arc, conjugate_arc, find_power_recipe, power_trace_deviation, trace_arc,
    trace_type0, KArc, PowerRecipe, ENDPOINT_TOL,
};
use crate::error::{Error, Result};
use crate::farey::{farey_sequence, upper_half_pairs, FareyPair};
use crate::geometry::{convex_hull, hull_contains_point, hull_insert, BoundaryIndex};
use crate::ito_poly::{classify, ItoType};
use crate::root_engine::TrackingConfig;
use crate::stochastic_lab::{random_stochastic_with, spectrum, StochasticMatrix};

/// Membership tolerance used by [`extremality_probe`]. Points on a
/// boundary segment that lies along a ray from the origin must still count
/// as members after rounding.
pub const PROBE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionConfig {
    pub tracking: TrackingConfig,
    /// Largest accepted gap between the shared endpoint of adjacent arcs.
    pub weld_tol: f64,
    /// Also trace power-reachable arcs directly and compare.
    pub shadow_traces: bool,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            tracking: TrackingConfig::default(),
            weld_tol: 1e-8,
            shadow_traces: true,
        }
    }
}

/// A power-built arc traced directly for comparison.
#[derive(Debug, Clone)]
pub struct Shadow {
    pub pair: FareyPair,
    pub recipe: PowerRecipe,
    pub traced: KArc,
    /// Largest pointwise distance between the trace and the power arc.
    pub deviation: f64,
}

#[derive(Debug, Clone)]
pub struct Region {
    pub n: u64,
    /// Arcs in traversal order: the upper half from 1 to -1, then the
    /// conjugates from -1 back to 1.
    pub arcs: Vec<KArc>,
    /// Closed polyline; the first point is repeated at the end.
    pub boundary: Vec<Complex64>,
    /// Smallest distance between consecutive boundary points.
    pub resolution: f64,
    pub shadows: Vec<Shadow>,
    pub config: RegionConfig,
    index: BoundaryIndex,
}

/// Results of the region-level invariant checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub closed: bool,
    pub max_modulus: f64,
    /// Largest distance from a conjugated boundary point to the boundary.
    pub conjugate_gap: f64,
    /// Every root of unity of the Farey sequence is hit, in circular order.
    pub vertices_in_order: bool,
    /// Boundary points on the unit circle are exactly the arc endpoints.
    pub unit_circle_ok: bool,
    pub arcs_ok: bool,
}

impl RegionReport {
    pub fn all_ok(&self) -> bool {
        self.closed
            && self.max_modulus <= 1.0 + ENDPOINT_TOL
            && self.conjugate_gap <= ENDPOINT_TOL
            && self.vertices_in_order
            && self.unit_circle_ok
            && self.arcs_ok
    }
}

fn build_upper_arc(
    pair: FareyPair,
    traced: &[Option<KArc>],
    pairs: &[FareyPair],
    cfg: &RegionConfig,
) -> Result<(KArc, Option<Shadow>)> {
    let poly = classify(pair, pair.order)?;
    if let Some(recipe) = find_power_recipe(pair)? {
        let base = pairs
            .iter()
            .position(|p| *p == recipe.base)
            .and_then(|i| traced[i].as_ref())
            .ok_or_else(|| {
                Error::InternalInconsistency(format!("base arc {} was not traced", recipe.base))
            })?;
        let arc = build_power_arc(base, &recipe, pair)?;
        let shadow = if cfg.shadow_traces {
            let direct = trace_arc(&poly, &cfg.tracking)?;
            let deviation = power_trace_deviation(base, &recipe, &direct)?;
            Some(Shadow {
                pair,
                recipe,
                traced: direct,
                deviation,
            })
        } else {
            None
        };
        return Ok((arc, shadow));
    }
    Ok((trace_arc(&poly, &cfg.tracking)?, None))
}

/// Builds the upper-half arcs (segment, traced Type I, power or traced
/// Type II/III), conjugates them and welds everything into one closed
/// polyline.
pub fn build_region(n: u64, cfg: &RegionConfig) -> Result<Region> {
    let pairs = upper_half_pairs(n)?;
    // Type 0 and I first: they are the bases of the power arcs
    let traced: Vec<Option<KArc>> = pairs
        .par_iter()
        .map(|&pair| {
            let poly = classify(pair, n)?;
            match poly.kind {
                ItoType::Type0 => trace_type0(n, &cfg.tracking).map(Some),
                ItoType::TypeI => trace_arc(&poly, &cfg.tracking).map(Some),
                _ => Ok(None),
            }
            .map_err(|e| e.for_pair(pair))
        })
        .collect::<Result<_>>()?;
    let rest: Vec<Option<(KArc, Option<Shadow>)>> = pairs
        .par_iter()
        .zip(&traced)
        .map(|(&pair, done)| {
            if done.is_some() {
                return Ok(None);
            }
            build_upper_arc(pair, &traced, &pairs, cfg)
                .map(Some)
                .map_err(|e| e.for_pair(pair))
        })
        .collect::<Result<_>>()?;

    let mut upper = Vec::with_capacity(pairs.len());
    let mut shadows = Vec::new();
    for (done, built) in traced.into_iter().zip(rest) {
        match (done, built) {
            (Some(arc), _) => upper.push(arc),
            (None, Some((arc, shadow))) => {
                upper.push(arc);
                shadows.extend(shadow);
            }
            (None, None) => unreachable!("every pair is built in one of the passes"),
        }
    }
    let mut arcs = upper.clone();
    for arc in upper.iter().rev() {
        arcs.push(conjugate_arc(arc).map_err(|e| e.for_pair(arc.pair()))?);
    }
    let boundary = weld(&arcs, cfg.weld_tol)?;
    let resolution = boundary
        .windows(2)
        .map(|w| (w[1] - w[0]).norm())
        .fold(f64::INFINITY, f64::min);
    let index = BoundaryIndex::new(&boundary[..boundary.len() - 1]);
    Ok(Region {
        n,
        arcs,
        boundary,
        resolution,
        shadows,
        config: *cfg,
        index,
    })
}

/// Arc samples ordered from the lower to the higher Farey endpoint.
fn oriented(arc: &KArc) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = arc.points().collect();
    if arc.poly.start() != arc.pair().lo {
        pts.reverse();
    }
    pts
}

fn weld(arcs: &[KArc], tol: f64) -> Result<Vec<Complex64>> {
    let mut out: Vec<Complex64> = Vec::new();
    for arc in arcs {
        let pts = oriented(arc);
        if let Some(last) = out.last_mut() {
            let gap = (*last - pts[0]).norm();
            if gap > tol {
                return Err(Error::InvariantViolation(format!(
                    "arc {} starts {gap:e} away from the previous arc",
                    arc.pair()
                )));
            }
            *last = (*last + pts[0]) * 0.5;
            out.extend_from_slice(&pts[1..]);
        } else {
            out.extend_from_slice(&pts);
        }
    }
    let gap = (out[0] - out[out.len() - 1]).norm();
    if gap > tol {
        return Err(Error::InvariantViolation(format!(
            "boundary does not close: gap {gap:e}"
        )));
    }
    let mid = (out[0] + out[out.len() - 1]) * 0.5;
    out[0] = mid;
    let last = out.len() - 1;
    out[last] = mid;
    Ok(out)
}

impl Region {
    /// The arcs in the closed upper half-plane, ordered by Farey pair.
    pub fn upper_arcs(&self) -> &[KArc] {
        &self.arcs[..self.arcs.len() / 2]
    }

    /// Inside the polyline or within `tol` of it.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.index.contains(z, tol)
    }

    /// Distance from `z` to the boundary polyline.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        self.index.distance(z)
    }

    pub fn check_invariants(&self) -> Result<RegionReport> {
        let b = &self.boundary;
        let closed = b.first() == b.last();
        let max_modulus = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let conjugate_gap = b
            .iter()
            .map(|z| self.index.distance_within(z.conj(), 1e-6).min(1.0))
            .fold(0.0, f64::max);

        // arc endpoints, in traversal order
        let fractions = farey_sequence(self.n)?;
        let mut vertices_in_order = self.arcs.len() + 1 == fractions.len();
        let mut endpoints = Vec::new();
        for (arc, f) in self.arcs.iter().zip(&fractions) {
            let pts = oriented(arc);
            endpoints.push(pts[0]);
            if (pts[0] - f.root_of_unity()).norm() > ENDPOINT_TOL
                || arc.pair().lo != *f
            {
                vertices_in_order = false;
            }
        }
        endpoints.push(b[0]);
        let unit_circle_ok = b
            .iter()
            .filter(|z| z.norm() >= 1.0 - ENDPOINT_TOL)
            .all(|z| endpoints.iter().any(|e| (z - e).norm() <= ENDPOINT_TOL));
        let arcs_ok = self.arcs.iter().all(KArc::contracts_hold);
        Ok(RegionReport {
            closed,
            max_modulus,
            conjugate_gap,
            vertices_in_order,
            unit_circle_ok,
            arcs_ok,
        })
    }
}

/// Outcome of testing random stochastic matrices against a region.
#[derive(Debug, Clone)]
pub struct CloudReport {
    pub matrices: usize,
    pub eigenvalues: usize,
    /// `(matrix index, eigenvalue, distance to the boundary)`
    pub outside: Vec<(usize, Complex64, f64)>,
    /// Largest `| max |lambda| - 1 |` over the matrices.
    pub radius_error: f64,
    /// The first matrix with an eigenvalue outside, if any.
    pub offender: Option<StochasticMatrix>,
}

/// Draws `trials` matrices from one generator seeded with `seed` and
/// checks every eigenvalue against `region` with tolerance `tol`.
pub fn eigenvalue_cloud(region: &Region, trials: usize, seed: u64, tol: f64) -> Result<CloudReport> {
    let n = region.n as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrices: Vec<StochasticMatrix> = (0..trials)
        .map(|_| random_stochastic_with(n, &mut rng))
        .collect();
    let spectra: Vec<Vec<Complex64>> = matrices
        .par_iter()
        .map(|a| spectrum(a).map(|s| s.roots))
        .collect::<Result<_>>()?;
    let mut report = CloudReport {
        matrices: trials,
        eigenvalues: 0,
        outside: Vec::new(),
        radius_error: 0.0,
        offender: None,
    };
    for (k, roots) in spectra.iter().enumerate() {
        report.eigenvalues += roots.len();
        let rho = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        report.radius_error = report.radius_error.max((rho - 1.0).abs());
        for z in roots {
            if !region.contains(*z, tol) {
                report.outside.push((k, *z, region.boundary_distance(*z)));
                if report.offender.is_none() {
                    report.offender = Some(matrices[k].clone());
                }
            }
        }
    }
    Ok(report)
}

/// Membership of `z` in `conv(1, lambda, ..., lambda^p)`.
pub fn hull_contains(lambda: Complex64, p: u64, z: Complex64) -> bool {
    let mut pts = Vec::with_capacity(p as usize + 1);
    let mut w = Complex64::new(1.0, 0.0);
    pts.push(w);
    for _ in 0..p {
        w *= lambda;
        pts.push(w);
    }
    hull_contains_point(&convex_hull(&pts), z, 1e-12)
}

/// Search cap of [`dubuc_malik_q`].
pub const DUBUC_MALIK_CAP: u64 = 10_000;

/// Least `q >= 2` with `lambda^q` in `conv(1, lambda, ..., lambda^(q-1))`.
pub fn dubuc_malik_q(lambda: Complex64) -> Result<u64> {
    if !(lambda.norm() < 1.0) || (lambda.im == 0.0 && lambda.re > 0.0) {
        return Err(Error::Domain(format!(
            "{lambda} must lie in the open unit disc off the positive real axis"
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut hull = vec![one];
    let mut w = one;
    for q in 2..=DUBUC_MALIK_CAP {
        // hull of 1, ..., lambda^(q-1)
        w *= lambda;
        if !hull_contains_point(&hull, w, 0.0) {
            hull_insert(&mut hull, w);
        }
        if hull_contains_point(&hull, w * lambda, 1e-12) {
            return Ok(q);
        }
    }
    Err(Error::NotFound(format!(
        "no q <= {DUBUC_MALIK_CAP} for {lambda}"
    )))
}

/// Distances from `lambda = a + bi` to the line through `1` and
/// `gamma lambda` and to the line through `gamma lambda` and
/// `gamma^2 lambda^2`.
pub fn chord_distances(a: f64, b: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(b > 0.0) || !(gamma > 1.0) {
        return Err(Error::Domain(format!(
            "need b > 0 and gamma > 1, got b = {b}, gamma = {gamma}"
        )));
    }
    let g = gamma;
    let l1 = ((g * a - 1.0).powi(2) + (g * b).powi(2)).sqrt();
    let d1 = b * (g - 1.0) / l1;
    let (x1, y1) = (g * a, g * b);
    let (x2, y2) = (g * g * (a * a - b * b), 2.0 * g * g * a * b);
    let l2 = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt();
    let d2 = g * g * (g - 1.0) * b * (a * a + b * b) / l2;
    Ok((d1, d2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalityReport {
    pub z: Complex64,
    /// `(gamma, gamma z lies outside the region)`
    pub outside: Vec<(f64, bool)>,
    /// Chord distances per gamma, when `Im z != 0`.
    pub chords: Vec<(f64, f64, f64)>,
}

impl ExtremalityReport {
    /// `gamma z` left the region for every probed `gamma`.
    pub fn extremal(&self) -> bool {
        self.outside.iter().all(|(_, out)| *out)
    }
}

/// Probes whether scaling a boundary point `z` outward leaves the region.
/// This is numerical evidence at polyline resolution, not a proof.
pub fn extremality_probe(region: &Region, z: Complex64, gammas: &[f64]) -> Result<ExtremalityReport> {
    let tol = region.config.weld_tol;
    if region.index.distance_within(z, tol) > tol {
        return Err(Error::Precondition(format!(
            "{z} is not on the boundary of the order-{} region",
            region.n
        )));
    }
    let mut outside = Vec::with_capacity(gammas.len());
    let mut chords = Vec::new();
    for &g in gammas {
        if !(g > 1.0) {
            return Err(Error::Domain(format!("gamma = {g} must exceed 1")));
        }
        outside.push((g, !region.contains(z * g, PROBE_TOL)));
        if z.im != 0.0 {
            let (d1, d2) = chord_distances(z.re, z.im.abs(), g)?;
            chords.push((g, d1, d2));
        }
    }
    Ok(ExtremalityReport { z, outside, chords })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit_root;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn region(n: u64) -> Region {
        build_region(n, &RegionConfig::default()).unwrap()
    }

    /// Distance from `p` to the line through `u` and `v`, via the
    /// triangle-area formula.
    fn line_distance(p: (f64, f64), u: (f64, f64), v: (f64, f64)) -> f64 {
        let area2 = ((v.0 - u.0) * (u.1 - p.1) - (u.0 - p.0) * (v.1 - u.1)).abs();
        area2 / ((v.0 - u.0).hypot(v.1 - u.1))
    }

    #[test]
    fn chord_distance_examples() {
        let (d1, d2) = chord_distances(0.0, 1.0, 2.0).unwrap();
        assert!((d1 - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((d2 - 4.0 / 20f64.sqrt()).abs() < 1e-15);
        assert!(chord_distances(0.3, 0.0, 2.0).is_err());
        assert!(chord_distances(0.3, 0.2, 1.0).is_err());
        let (e1, e2) = chord_distances(0.4, 1e-9, 1.5).unwrap();
        assert!(e1 < 1e-8 && e2 < 1e-8);
    }

    #[test]
    fn chord_distances_match_generic_formula() {
        for &(a, b, g) in &[(0.3, 0.5, 1.2), (-0.6, 0.2, 1.01), (0.1, 0.9, 3.0), (-0.2, 0.7, 1.5)] {
            let (d1, d2) = chord_distances(a, b, g).unwrap();
            let p = (a, b);
            let gl = (g * a, g * b);
            let gl2 = (g * g * (a * a - b * b), 2.0 * g * g * a * b);
            assert!((d1 - line_distance(p, (1.0, 0.0), gl)).abs() < 1e-13);
            assert!((d2 - line_distance(p, gl, gl2)).abs() < 1e-13);
        }
    }

    #[test]
    fn hull_examples() {
        assert!(hull_contains(c(0.0, 0.9), 4, c(0.6561, 0.0)));
        assert!(hull_contains(c(-0.5, 0.0), 1, c(0.0, 0.0)));
        assert!(!hull_contains(c(0.0, 0.9), 1, c(-1.0, 0.0)));
    }

    #[test]
    fn dubuc_malik_examples() {
        assert_eq!(dubuc_malik_q(c(-0.5, 0.0)).unwrap(), 2);
        assert_eq!(dubuc_malik_q(c(0.0, 0.9)).unwrap(), 4);
        let q = dubuc_malik_q(c(0.5, 0.5)).unwrap();
        assert!(q > 2);
        // the defining property, checked from scratch
        let l = c(0.5, 0.5);
        assert!(hull_contains(l, q - 1, l.powu(q as u32)));
        for k in 2..q {
            assert!(!hull_contains(l, k - 1, l.powu(k as u32)));
        }
        assert!(matches!(dubuc_malik_q(c(0.5, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(dubuc_malik_q(c(0.0, 1.0)), Err(Error::Domain(_))));
        assert!(matches!(
            dubuc_malik_q(Complex64::from_polar(0.999_999_9, 1e-4)),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn order_three_is_a_triangle_with_a_whisker() {
        let r = region(3);
        assert_eq!(r.arcs.len(), 4);
        for k in 0..3 {
            let v = unit_root(k, 3);
            assert!(r.boundary.iter().any(|z| (z - v).norm() < 1e-15));
        }
        // away from the whisker the boundary is the triangle
        let tri = [unit_root(0, 3), unit_root(1, 3), unit_root(2, 3)];
        for z in &r.boundary {
            let d = (0..3)
                .map(|i| crate::geometry::segment_distance(*z, tri[i], tri[(i + 1) % 3]))
                .fold(f64::INFINITY, f64::min);
            let whisker = z.im.abs() < 1e-7 && z.re <= -0.5;
            assert!(d < 1e-9 || whisker, "{z}");
        }
        assert!(r.check_invariants().unwrap().all_ok());
    }

    #[test]
    fn order_four_membership() {
        let r = region(4);
        assert!(r.check_invariants().unwrap().all_ok());
        assert!(r.contains(c(0.0, 0.0), 0.0));
        assert!(!r.contains(c(1.1, 0.0), 1e-9));
        assert!(r.contains(unit_root(1, 3) * 0.99, 0.0));
        assert!(r.boundary.iter().any(|z| (z - c(0.0, 1.0)).norm() < 1e-15));
        let seg = &r.arcs[0];
        assert_eq!(seg.pair().to_string(), "(0/1, 1/4)");
    }

    #[test]
    fn order_eight_census() {
        let r = region(8);
        assert_eq!(r.upper_arcs().len(), 11);
        assert_eq!(r.arcs.len(), 22);
        assert_eq!(r.shadows.len(), 4);
        for s in &r.shadows {
            assert!(s.deviation <= 1e-8, "{}: {:e}", s.pair, s.deviation);
        }
        assert!(r.check_invariants().unwrap().all_ok());
    }

    #[test]
    fn probes() {
        let r4 = region(4);
        let rep = extremality_probe(&r4, c(0.0, 1.0), &[1.05]).unwrap();
        assert!(rep.extremal());
        let arc = &r4.upper_arcs()[1];
        let mid = arc.samples[arc.len() / 2].1;
        assert!(extremality_probe(&r4, mid, &[1.01]).unwrap().extremal());
        assert!(matches!(
            extremality_probe(&r4, c(0.0, 0.0), &[1.01]),
            Err(Error::Precondition(_))
        ));
        let r3 = region(3);
        let rep = extremality_probe(&r3, c(-0.75, 0.0), &[1.01]).unwrap();
        assert!(!rep.extremal());
    }
}
