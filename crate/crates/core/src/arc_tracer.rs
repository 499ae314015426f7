//! K-arcs: the distinguished root path of a reduced Ito polynomial running
//! from `exp(2 pi i p/q)` at `alpha = 0` to `exp(2 pi i r/s)` at `alpha = 1`.
//!
//! Type 0 arcs are straight segments. Type I arcs are traced and carry the
//! sector, modulus, forbidden-ray and simplicity guarantees. Some Type II
//! and III arcs are pointwise powers of Type I arcs ([`find_power_recipe`]);
//! the rest are traced with the same machinery and flagged heuristic.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey::{FareyFraction, FareyPair};
use crate::ito_poly::{classify, horner, ItoPolynomial, ItoType};
use crate::root_engine::{track_paths, uniform_grid, PolynomialFamily, TrackingConfig};
use crate::turns;

/// Endpoint accuracy demanded of every arc.
pub const ENDPOINT_TOL: f64 = 1e-9;
/// How close a tracked path must start to `exp(2 pi i p/q)` to be a candidate.
pub const START_MATCH_TOL: f64 = 1e-6;
/// Absolute slack on `Arg/2pi` for the sector condition.
pub const SECTOR_SLACK: f64 = 1e-9;
/// Largest accepted residual of the reduced and of the full Ito polynomial.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Angular tolerance of the forbidden-ray detector.
pub const RAY_TOL: f64 = 1e-8;
/// Two samples closer than this count as a self-intersection.
pub const SIMPLICITY_FLOOR: f64 = 1e-9;
/// Consecutive stored samples are at least this far apart. Adaptive
/// refinement near a zero cluster can produce thousands of samples within
/// rounding distance of an endpoint; they carry no information.
pub const MIN_SAMPLE_SPACING: f64 = 1e-5;

/// How a power arc's parameter relates to its base arc's parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParameterMap {
    /// `gamma = 1 - alpha`
    Reverse,
    /// `gamma = alpha`
    Preserve,
}

impl ParameterMap {
    pub fn apply(&self, alpha: f64) -> f64 {
        match self {
            ParameterMap::Reverse => 1.0 - alpha,
            ParameterMap::Preserve => alpha,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ParameterMap::Reverse => "reverse",
            ParameterMap::Preserve => "preserve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Traced,
    Segment,
    Power {
        base: FareyPair,
        exponent: u64,
        map: ParameterMap,
        conjugated: bool,
    },
    Conjugate {
        base: FareyPair,
    },
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::Traced => "traced",
            Provenance::Segment => "segment",
            Provenance::Power { .. } => "power",
            Provenance::Conjugate { .. } => "conjugate",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Power {
                base,
                exponent,
                map,
                conjugated,
            } => {
                let bar = if *conjugated { "conj " } else { "" };
                write!(f, "power {bar}{base}^{exponent} ({})", map.label())
            }
            Provenance::Conjugate { base } => write!(f, "conjugate of {base}"),
            other => f.write_str(other.label()),
        }
    }
}

/// Whether the arc's boundary property is backed by a theorem or only
/// observed numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Theorem,
    Heuristic,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Theorem => "theorem",
            Status::Heuristic => "heuristic",
        }
    }
}

/// A sample lying on a forbidden ray `k pi / m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayViolation {
    pub alpha: f64,
    pub lambda: Complex64,
    pub k: u64,
    pub m: u64,
}

/// Post-condition measurements, filled in for every constructed arc.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcChecks {
    /// Distance of the computed endpoints from the exact roots of unity,
    /// measured before they are snapped onto them.
    pub endpoint_error: f64,
    /// Worst residual of the arc's own reduced polynomial.
    pub max_residual: f64,
    /// Worst residual of the full Ito polynomial.
    pub max_full_residual: f64,
    pub max_modulus: f64,
    /// Largest modulus over `alpha` in `[0.01, 0.99]`.
    pub interior_modulus: f64,
    /// First sample outside the sector, as `(alpha, Arg/2pi)`.
    pub sector_violation: Option<(f64, f64)>,
    pub simple: bool,
    /// Only computed for Type I arcs.
    pub forbidden_ray: Option<RayViolation>,
}

impl ArcChecks {
    pub fn residual_ok(&self) -> bool {
        self.max_residual <= RESIDUAL_TOL && self.max_full_residual <= RESIDUAL_TOL
    }

    pub fn sector_ok(&self) -> bool {
        self.sector_violation.is_none()
    }

    /// Every invariant that applies to an arc of this type holds.
    pub fn all_ok(&self, kind: ItoType) -> bool {
        let base = self.endpoint_error <= ENDPOINT_TOL
            && self.residual_ok()
            && self.max_modulus <= 1.0 + ENDPOINT_TOL
            && self.sector_ok()
            && self.simple;
        if kind == ItoType::TypeI {
            base && self.interior_modulus < 1.0 - 1e-6 && self.forbidden_ray.is_none()
        } else {
            base
        }
    }
}

/// A boundary arc sampled as `(alpha, lambda(alpha))`, alpha ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct KArc {
    pub poly: ItoPolynomial,
    pub samples: Vec<(f64, Complex64)>,
    pub provenance: Provenance,
    pub status: Status,
    pub checks: ArcChecks,
}

impl KArc {
    fn assemble(
        poly: ItoPolynomial,
        samples: Vec<(f64, Complex64)>,
        provenance: Provenance,
        status: Status,
    ) -> KArc {
        let checks = run_checks(&poly, &samples);
        KArc {
            poly,
            samples,
            provenance,
            status,
            checks,
        }
    }

    pub fn pair(&self) -> FareyPair {
        self.poly.pair
    }

    pub fn kind(&self) -> ItoType {
        self.poly.kind
    }

    pub fn sector(&self) -> (FareyFraction, FareyFraction) {
        self.poly.sector()
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.samples.iter().map(|(_, z)| *z)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// All post-conditions that apply to this arc's type hold.
    pub fn contracts_hold(&self) -> bool {
        self.checks.all_ok(self.kind())
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The root on this arc at an arbitrary `alpha`: Newton on the arc's
    /// reduced polynomial, started from linear interpolation of the
    /// neighboring samples.
    pub fn value_at(&self, alpha: f64) -> Result<Complex64> {
        crate::ito_poly::check_alpha(alpha)?;
        let idx = self.samples.partition_point(|(a, _)| *a < alpha);
        if idx < self.samples.len() && self.samples[idx].0 == alpha {
            return Ok(self.samples[idx].1);
        }
        if idx == 0 || idx == self.samples.len() {
            return Err(Error::Precondition(format!(
                "alpha = {alpha} is outside the sampled range"
            )));
        }
        let (a0, z0) = self.samples[idx - 1];
        let (a1, z1) = self.samples[idx];
        let w = (alpha - a0) / (a1 - a0);
        let start = z0 + (z1 - z0) * w;
        let reach = (z1 - z0).norm().max(MIN_SAMPLE_SPACING);
        let mut z = start;
        for _ in 0..60 {
            let (p, dp) = self.poly.eval_reduced_unchecked(alpha, z);
            if p.norm() == 0.0 {
                break;
            }
            if dp.norm() == 0.0 {
                return Err(Error::InternalInconsistency(format!(
                    "vanishing derivative on {} at alpha = {alpha}",
                    self.pair()
                )));
            }
            let step = p / dp;
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
                break;
            }
        }
        if (z - start).norm() > reach {
            return Err(Error::InternalInconsistency(format!(
                "Newton left the arc {} at alpha = {alpha}",
                self.pair()
            )));
        }
        Ok(z)
    }
}

/// Reduced Ito polynomial as a root-tracking family.
struct ReducedFamily<'a>(&'a ItoPolynomial);

impl PolynomialFamily for ReducedFamily<'_> {
    fn degree(&self) -> usize {
        self.0.degree()
    }

    fn coefficients(&self, alpha: f64) -> Vec<Complex64> {
        self.0
            .reduced_coefficients(alpha)
            .expect("tracking grids stay inside [0, 1]")
            .into_iter()
            .map(|c| Complex64::new(c, 0.0))
            .collect()
    }

    fn evaluate(&self, alpha: f64, t: Complex64) -> (Complex64, Complex64) {
        self.0.eval_reduced_unchecked(alpha, t)
    }

    fn has_real_coefficients(&self) -> bool {
        true
    }
}

/// Distance of `Arg z / 2pi` outside the sector `[lo, hi]`, measured on the
/// circle so that values just below 1 count as just below 0.
fn sector_excess(z: Complex64, lo: f64, hi: f64) -> f64 {
    let t = turns(z);
    [t - 1.0, t, t + 1.0]
        .iter()
        .map(|&u| (lo - u).max(u - hi).max(0.0))
        .fold(f64::INFINITY, f64::min)
}

fn run_checks(poly: &ItoPolynomial, samples: &[(f64, Complex64)]) -> ArcChecks {
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    let endpoint_error = (first.1 - poly.start_point())
        .norm()
        .max((last.1 - poly.end_point()).norm())
        .max(first.0.abs())
        .max((last.0 - 1.0).abs());
    let (lo, hi) = poly.sector();
    let (lo, hi) = (lo.to_f64(), hi.to_f64());
    let mut checks = ArcChecks {
        endpoint_error,
        max_residual: 0.0,
        max_full_residual: 0.0,
        max_modulus: 0.0,
        interior_modulus: 0.0,
        sector_violation: None,
        simple: true,
        forbidden_ray: None,
    };
    for &(alpha, z) in samples {
        let r = poly.eval_reduced_unchecked(alpha, z).0.norm();
        checks.max_residual = checks.max_residual.max(r);
        checks.max_full_residual = checks.max_full_residual.max(poly.eval_full(alpha, z).norm());
        checks.max_modulus = checks.max_modulus.max(z.norm());
        if (0.01..=0.99).contains(&alpha) {
            checks.interior_modulus = checks.interior_modulus.max(z.norm());
        }
        if checks.sector_violation.is_none() && sector_excess(z, lo, hi) > SECTOR_SLACK {
            checks.sector_violation = Some((alpha, turns(z)));
        }
    }
    checks.simple = is_simple(samples);
    if poly.kind == ItoType::TypeI {
        checks.forbidden_ray = first_ray_hit(poly, samples);
    }
    checks
}

fn first_ray_hit(poly: &ItoPolynomial, samples: &[(f64, Complex64)]) -> Option<RayViolation> {
    for &(alpha, z) in samples {
        if alpha <= 0.0 || alpha >= 1.0 {
            continue;
        }
        let theta = turns(z) * 2.0 * std::f64::consts::PI;
        for m in [poly.s, poly.q] {
            // rays k pi / m; k = 0 and k = m are the real ones
            let x = theta * m as f64 / std::f64::consts::PI;
            let k = x.round();
            let off = (x - k).abs() * std::f64::consts::PI / m as f64;
            let k = (k as u64) % (2 * m);
            if k % m != 0 && off < RAY_TOL {
                return Some(RayViolation {
                    alpha,
                    lambda: z,
                    k,
                    m,
                });
            }
        }
    }
    None
}

fn is_simple(samples: &[(f64, Complex64)]) -> bool {
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            if samples[i].0 != samples[j].0
                && (samples[i].1 - samples[j].1).norm() <= SIMPLICITY_FLOOR
            {
                return false;
            }
        }
    }
    true
}

/// Scans the interior samples of a Type I arc for points on a nonreal
/// forbidden ray `k pi/s` or `k pi/q`.
pub fn forbidden_ray_violation(arc: &KArc) -> Option<RayViolation> {
    first_ray_hit(&arc.poly, &arc.samples)
}

/// True when no two samples with different `alpha` coincide to within
/// [`SIMPLICITY_FLOOR`].
pub fn simplicity_check(arc: &KArc) -> bool {
    is_simple(&arc.samples)
}

/// The segment from 1 to `exp(2 pi i/n)`, the arc of the pair `(0/1, 1/n)`.
pub fn trace_type0(n: u64, cfg: &TrackingConfig) -> Result<KArc> {
    crate::farey::check_order(n)?;
    if n < 3 {
        return Err(Error::UnsupportedOrder(n, 3));
    }
    let pair = FareyPair {
        lo: FareyFraction::ZERO,
        hi: FareyFraction::new_unchecked(1, n),
        order: n,
    };
    let poly = classify(pair, n)?;
    let end = poly.end_point();
    let samples = uniform_grid(cfg.initial_points.max(2))
        .into_iter()
        .map(|a| {
            let z = if a == 1.0 {
                end
            } else {
                Complex64::new(1.0 - a, 0.0) + end * a
            };
            (a, z)
        })
        .collect();
    Ok(KArc::assemble(poly, samples, Provenance::Segment, Status::Theorem))
}

/// Keeps the endpoints and every sample at least [`MIN_SAMPLE_SPACING`]
/// from the previously kept one and from the final point.
/// Distance from the real axis below which samples are re-derived from the
/// local quadratic.
const AXIS_BAND: f64 = 1e-6;

/// Near a real double root the root finder returns `c +- iy` with `y` at
/// noise level whether or not the true pair is real. The local quadratic
/// of the real polynomial at `c` decides: real roots come back with zero
/// imaginary part, the branch nearest `prev` is kept.
fn settle_near_axis(
    poly: &ItoPolynomial,
    alpha: f64,
    z: Complex64,
    prev: Complex64,
    upper: bool,
) -> Result<Complex64> {
    if z.im == 0.0 || z.im.abs() >= AXIS_BAND {
        return Ok(z);
    }
    let c = z.re;
    let (p, dp) = poly.eval_reduced(alpha, Complex64::new(c, 0.0))?;
    let coeffs = poly.reduced_coefficients(alpha)?;
    let d2: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .skip(2)
        .map(|(k, a)| a * (k * (k - 1)) as f64)
        .collect();
    let a = horner(&d2, Complex64::new(c, 0.0)).re / 2.0;
    let (b, c0) = (dp.re, p.re);
    if a == 0.0 {
        return Ok(z);
    }
    let disc = b * b - 4.0 * a * c0;
    let candidate = if disc >= 0.0 {
        let r = disc.sqrt();
        [(-b + r) / (2.0 * a), (-b - r) / (2.0 * a)]
            .into_iter()
            .map(|d| Complex64::new(c + d, 0.0))
            .min_by(|u, v| (u - prev).norm().total_cmp(&(v - prev).norm()))
            .unwrap()
    } else {
        let im = (-disc).sqrt() / (2.0 * a.abs());
        let sign = if upper || z.im > 0.0 { 1.0 } else { -1.0 };
        Complex64::new(c - b / (2.0 * a), sign * im)
    };
    let before = poly.eval_reduced(alpha, z)?.0.norm();
    let after = poly.eval_reduced(alpha, candidate)?.0.norm();
    if (candidate - z).norm() <= AXIS_BAND && after <= before.max(RESIDUAL_TOL * 1e-3) {
        Ok(candidate)
    } else {
        Ok(z)
    }
}

fn thin(samples: Vec<(f64, Complex64)>) -> Vec<(f64, Complex64)> {
    let last = *samples.last().unwrap();
    let mut out = vec![samples[0]];
    for &(a, z) in &samples[1..samples.len() - 1] {
        let prev = out.last().unwrap().1;
        if (z - prev).norm() >= MIN_SAMPLE_SPACING && (z - last.1).norm() >= MIN_SAMPLE_SPACING {
            out.push((a, z));
        }
    }
    out.push(last);
    out
}

/// Traces the arc of a Type I, II or III polynomial.
pub fn trace_arc(poly: &ItoPolynomial, cfg: &TrackingConfig) -> Result<KArc> {
    let pair = poly.pair;
    if poly.kind == ItoType::Type0 {
        return Err(Error::Precondition(format!(
            "{pair} is a segment; use trace_type0"
        )));
    }
    let grid = uniform_grid(cfg.initial_points);
    let tracked =
        track_paths(&ReducedFamily(poly), &grid, cfg).map_err(|e| e.for_pair(pair))?;
    let (start, end) = (poly.start_point(), poly.end_point());
    let last = tracked.grid.len() - 1;

    let starters: Vec<usize> = (0..tracked.paths.len())
        .filter(|&k| (tracked.paths[k][0] - start).norm() <= START_MATCH_TOL)
        .collect();
    if starters.is_empty() {
        return Err(Error::ArcIdentification {
            pair,
            detail: format!("no root within {START_MATCH_TOL:e} of {start} at alpha = 0"),
        });
    }
    let end_gap = |k: usize| (tracked.paths[k][last] - end).norm();
    let chosen = starters
        .iter()
        .copied()
        .filter(|&k| end_gap(k) <= START_MATCH_TOL)
        .min_by(|&a, &b| end_gap(a).total_cmp(&end_gap(b)));

    let path: Vec<Complex64> = match chosen {
        Some(k) => tracked.paths[k].clone(),
        None => {
            // Two branches met at a multiple root and the matching carried
            // the start branch elsewhere. Join the start branch to the end
            // branch where they meet.
            let enders: Vec<usize> = (0..tracked.paths.len())
                .filter(|&k| end_gap(k) <= START_MATCH_TOL)
                .collect();
            let mut best: Option<(f64, usize, usize, usize)> = None;
            for &a in &starters {
                for &b in &enders {
                    for j in 0..=last {
                        let gap = (tracked.paths[a][j] - tracked.paths[b][j]).norm();
                        if best.is_none_or(|(g, ..)| gap < g) {
                            best = Some((gap, a, b, j));
                        }
                    }
                }
            }
            let limit = 4.0 * cfg.guard_floor;
            match best {
                Some((gap, a, b, j)) if gap <= limit => tracked.paths[a][..=j]
                    .iter()
                    .chain(&tracked.paths[b][j + 1..])
                    .copied()
                    .collect(),
                _ => {
                    return Err(Error::ArcIdentification {
                        pair,
                        detail: format!("no root path from {start} reaches {end}"),
                    })
                }
            }
        }
    };

    let mut samples: Vec<(f64, Complex64)> =
        tracked.grid.iter().copied().zip(path).collect();
    let raw_gap = (samples[0].1 - start).norm().max((samples[last].1 - end).norm());
    samples[0].1 = start;
    samples[last].1 = end;
    let upper = poly.sector().1 <= FareyFraction::HALF;
    for j in 1..last {
        let prev = samples[j - 1].1;
        let (alpha, z) = samples[j];
        samples[j].1 = settle_near_axis(poly, alpha, z, prev, upper)?;
    }
    let samples = thin(samples);

    let status = if poly.kind == ItoType::TypeI {
        Status::Theorem
    } else {
        Status::Heuristic
    };
    let mut arc = KArc::assemble(*poly, samples, Provenance::Traced, status);
    arc.checks.endpoint_error = arc.checks.endpoint_error.max(raw_gap);
    if poly.kind == ItoType::TypeI {
        if let Some((alpha, t)) = arc.checks.sector_violation {
            return Err(Error::SectorViolation {
                pair,
                alpha,
                turns: t,
            });
        }
    }
    Ok(arc)
}

/// Traces or builds the arc of any pair: segments for Type 0, tracing
/// otherwise.
pub fn trace_pair(pair: FareyPair, cfg: &TrackingConfig) -> Result<KArc> {
    let poly = classify(pair, pair.order)?;
    if poly.kind == ItoType::Type0 {
        trace_type0(pair.order, cfg)
    } else {
        trace_arc(&poly, cfg)
    }
}

/// The arc of any pair, preferring the power construction when one
/// applies (the base Type I arc is traced on the way).
pub fn construct_arc(pair: FareyPair, cfg: &TrackingConfig) -> Result<KArc> {
    match find_power_recipe(pair)? {
        Some(recipe) => {
            let base = trace_pair(recipe.base, cfg).map_err(|e| e.for_pair(recipe.base))?;
            build_power_arc(&base, &recipe, pair).map_err(|e| e.for_pair(pair))
        }
        None => trace_pair(pair, cfg).map_err(|e| e.for_pair(pair)),
    }
}

/// The two power constructions on the arc of `(1/m, 1/(m-1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PowerCase {
    /// `m = d k`: power arc of `(1/k, d/(m-1))`.
    I,
    /// `m - 1 = d k`: power arc of `(d/m, 1/k)`.
    II,
}

/// The pair reached by the `d`-th power of the arc of `(1/m, 1/(m-1))`.
/// Accepts exactly when both pairs are Farey pairs of order `n`.
pub fn power_pair(d: u64, m: u64, n: u64, case: PowerCase) -> Result<FareyPair> {
    crate::farey::check_order(n)?;
    if !(1 < d && d < m && m <= n) {
        return Err(Error::NotAPowerPair(format!(
            "need 1 < d < m <= n, got d = {d}, m = {m}, n = {n}"
        )));
    }
    let (k, lo, hi) = match case {
        PowerCase::I => {
            if m % d != 0 {
                return Err(Error::NotAPowerPair(format!("{d} does not divide {m}")));
            }
            let k = m / d;
            (k, (1, k), (d, m - 1))
        }
        PowerCase::II => {
            if (m - 1) % d != 0 {
                return Err(Error::NotAPowerPair(format!("{d} does not divide {}", m - 1)));
            }
            let k = (m - 1) / d;
            (k, (d, m), (1, k))
        }
    };
    let bound = match case {
        PowerCase::I => m + k - 1,
        PowerCase::II => m + k,
    };
    if k < 2 || n >= bound {
        return Err(Error::NotAPowerPair(format!(
            "k = {k} with n = {n} >= {bound} for d = {d}, m = {m}"
        )));
    }
    let lo = FareyFraction::new(lo.0, lo.1)?;
    let hi = FareyFraction::new(hi.0, hi.1)?;
    let base_lo = FareyFraction::new(1, m)?;
    let base_hi = FareyFraction::new(1, m - 1)?;
    if !crate::farey::are_neighbors(base_lo, base_hi, n)? || !crate::farey::are_neighbors(lo, hi, n)? {
        return Err(Error::NotAPowerPair(format!(
            "d = {d}, m = {m} does not give Farey pairs of order {n}"
        )));
    }
    Ok(FareyPair { lo, hi, order: n })
}

/// How to obtain an arc from a Type I arc: raise to `exponent`, map the
/// parameter, and optionally conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PowerRecipe {
    pub base: FareyPair,
    pub exponent: u64,
    pub map: ParameterMap,
    pub conjugate: bool,
}

/// The raw pair and recipe of the `d`-th power of `(1/m, 1/(m-1))` when
/// it is usable for arc construction. Case II needs `n < m + k - 1`, one
/// less than what makes the pairs Farey pairs.
fn power_recipe(d: u64, m: u64, n: u64, case: PowerCase) -> Option<(FareyPair, PowerRecipe)> {
    let target = power_pair(d, m, n, case).ok()?;
    if case == PowerCase::II {
        let k = (m - 1) / d;
        if n >= m + k - 1 {
            return None;
        }
    }
    let base = FareyPair {
        lo: FareyFraction::new_unchecked(1, m),
        hi: FareyFraction::new_unchecked(1, m - 1),
        order: n,
    };
    if classify(base, n).ok()?.kind != ItoType::TypeI {
        return None;
    }
    let map = match case {
        PowerCase::I => ParameterMap::Reverse,
        PowerCase::II => ParameterMap::Preserve,
    };
    Some((
        target,
        PowerRecipe {
            base,
            exponent: d,
            map,
            conjugate: false,
        },
    ))
}

/// For `n = 4 l`, the square of the arc of `((2l-1)/(4l), l/(2l+1))` runs
/// over `((2l-1)/(2l), 2l/(2l+1))`.
fn near_half_recipe(n: u64) -> Option<(FareyPair, PowerRecipe)> {
    if n % 4 != 0 || n < 4 {
        return None;
    }
    let l = n / 4;
    let base = FareyPair {
        lo: FareyFraction::new(2 * l - 1, 4 * l).ok()?,
        hi: FareyFraction::new(l, 2 * l + 1).ok()?,
        order: n,
    };
    let target = FareyPair {
        lo: FareyFraction::new(2 * l - 1, 2 * l).ok()?,
        hi: FareyFraction::new(2 * l, 2 * l + 1).ok()?,
        order: n,
    };
    if classify(base, n).ok()?.kind != ItoType::TypeI || classify(target, n).is_err() {
        return None;
    }
    Some((
        target,
        PowerRecipe {
            base,
            exponent: 2,
            map: ParameterMap::Reverse,
            conjugate: false,
        },
    ))
}

/// Finds a power construction for `target`, directly or through its
/// mirror image (then conjugating). Pairs of Type 0 or I have none.
pub fn find_power_recipe(target: FareyPair) -> Result<Option<PowerRecipe>> {
    let n = target.order;
    let poly = classify(target, n)?;
    if matches!(poly.kind, ItoType::Type0 | ItoType::TypeI) {
        return Ok(None);
    }
    let mut candidates = Vec::new();
    for m in 3..=n {
        for d in 2..m {
            for case in [PowerCase::I, PowerCase::II] {
                candidates.extend(power_recipe(d, m, n, case));
            }
        }
    }
    candidates.extend(near_half_recipe(n));
    for (pair, recipe) in candidates {
        if pair == target {
            return Ok(Some(recipe));
        }
        if pair.mirror() == target {
            return Ok(Some(PowerRecipe {
                conjugate: true,
                ..recipe
            }));
        }
    }
    Ok(None)
}

/// Applies `recipe` to the traced Type I arc of `recipe.base`, producing
/// the arc of `target`.
pub fn build_power_arc(base: &KArc, recipe: &PowerRecipe, target: FareyPair) -> Result<KArc> {
    if base.pair() != recipe.base || base.kind() != ItoType::TypeI {
        return Err(Error::Precondition(format!(
            "power base must be the Type I arc of {}, got {}",
            recipe.base,
            base.pair()
        )));
    }
    let poly = classify(target, target.order)?;
    let d = recipe.exponent as u32;
    let mut samples: Vec<(f64, Complex64)> = base
        .samples
        .iter()
        .map(|&(a, z)| {
            let w = z.powu(d);
            (recipe.map.apply(a), if recipe.conjugate { w.conj() } else { w })
        })
        .collect();
    if recipe.map == ParameterMap::Reverse {
        samples.reverse();
    }
    let (start, end) = (poly.start_point(), poly.end_point());
    let last = samples.len() - 1;
    let gap = (samples[0].1 - start).norm().max((samples[last].1 - end).norm());
    if gap > ENDPOINT_TOL {
        return Err(Error::PowerMap(format!(
            "{}^{d} ({}) misses the endpoints of {target} by {gap:e}",
            recipe.base,
            recipe.map.label()
        )));
    }
    samples[0].1 = start;
    samples[last].1 = end;
    let provenance = Provenance::Power {
        base: recipe.base,
        exponent: recipe.exponent,
        map: recipe.map,
        conjugated: recipe.conjugate,
    };
    let mut arc = KArc::assemble(poly, samples, provenance, base.status);
    arc.checks.endpoint_error = arc.checks.endpoint_error.max(gap);
    Ok(arc)
}

/// The `d`-th power of the Type I arc of `(1/m, 1/(m-1))` in one of the two
/// divisibility cases.
pub fn power_arc(base: &KArc, d: u64, case: PowerCase) -> Result<KArc> {
    let n = base.poly.n;
    let pair = base.pair();
    if pair.lo.numer() != 1 || pair.hi.numer() != 1 || pair.hi.denom() + 1 != pair.lo.denom() {
        return Err(Error::Precondition(format!(
            "{pair} is not of the form (1/m, 1/(m-1))"
        )));
    }
    let m = pair.lo.denom();
    let target = power_pair(d, m, n, case)?;
    let (_, recipe) = power_recipe(d, m, n, case).ok_or_else(|| {
        Error::NotAPowerPair(format!(
            "d = {d}, m = {m}, n = {n}: the arc construction needs n < m + k - 1"
        ))
    })?;
    build_power_arc(base, &recipe, target)
}

/// The mirror-image arc `(alpha, conj lambda)` over the mirrored pair.
pub fn conjugate_arc(base: &KArc) -> Result<KArc> {
    let pair = base.pair();
    let poly = classify(pair.mirror(), pair.order)?;
    let samples = base.samples.iter().map(|&(a, z)| (a, z.conj())).collect();
    Ok(KArc::assemble(
        poly,
        samples,
        Provenance::Conjugate { base: pair },
        base.status,
    ))
}

/// Largest distance between the samples of a traced arc and the power
/// construction evaluated at the same parameter values.
pub fn power_trace_deviation(base: &KArc, recipe: &PowerRecipe, traced: &KArc) -> Result<f64> {
    let d = recipe.exponent as u32;
    let mut worst = 0.0f64;
    for &(gamma, mu) in &traced.samples {
        let w = base.value_at(recipe.map.apply(gamma))?.powu(d);
        let w = if recipe.conjugate { w.conj() } else { w };
        worst = worst.max((w - mu).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::upper_half_pairs;
    use crate::unit_root;

    fn pair(s: &str, n: u64) -> FareyPair {
        FareyPair::parse(s, n).unwrap()
    }

    fn traced(s: &str, n: u64) -> KArc {
        trace_pair(pair(s, n), &TrackingConfig::default()).unwrap()
    }

    #[test]
    fn segment_values() {
        let cfg = TrackingConfig::default();
        let arc = trace_type0(4, &cfg).unwrap();
        let mid = arc.value_at(0.5).unwrap();
        assert!((mid - Complex64::new(0.5, 0.5)).norm() < 1e-15);
        let arc3 = trace_type0(3, &cfg).unwrap();
        assert_eq!(arc3.samples.last().unwrap().1, unit_root(1, 3));
        // a + |b| tan(pi/8) = 1 along the whole segment
        let arc8 = trace_type0(8, &cfg).unwrap();
        let t = (std::f64::consts::PI / 8.0).tan();
        for z in arc8.points() {
            assert!((z.re + z.im.abs() * t - 1.0).abs() < 1e-15);
        }
        assert!(arc8.checks.all_ok(ItoType::Type0));
        assert!(matches!(trace_type0(2, &cfg), Err(Error::UnsupportedOrder(2, 3))));
    }

    #[test]
    fn type_one_arc_for_n4() {
        let arc = traced("1/4,1/3", 4);
        assert_eq!(arc.provenance, Provenance::Traced);
        assert_eq!(arc.status, Status::Theorem);
        let z = arc.value_at(0.5).unwrap();
        let oracle = crate::test_oracles::cubic_complex_root();
        assert!((z - oracle).norm() < 1e-12, "{z} vs {oracle}");
        let t = turns(z);
        assert!((0.25..=1.0 / 3.0).contains(&t));
        assert!(arc.checks.all_ok(ItoType::TypeI), "{:?}", arc.checks);
        assert!(forbidden_ray_violation(&arc).is_none());
        assert!(simplicity_check(&arc));
    }

    #[test]
    fn type_one_endpoints_n8() {
        let arc = traced("1/8,1/7", 8);
        assert_eq!(arc.samples[0], (0.0, unit_root(1, 7)));
        assert_eq!(*arc.samples.last().unwrap(), (1.0, unit_root(1, 8)));
        assert!(arc.checks.all_ok(ItoType::TypeI));
    }

    #[test]
    fn heuristic_type_two_arc() {
        let arc = traced("1/3,3/8", 8);
        assert_eq!(arc.kind(), ItoType::TypeII);
        assert_eq!(arc.status, Status::Heuristic);
        for &(a, z) in &arc.samples {
            let r = crate::ito_poly::eval_full_ito(arc.pair(), 8, a, z).norm();
            assert!(r < 1e-9, "alpha {a}: {r:e}");
        }
        assert!(arc.checks.all_ok(ItoType::TypeII), "{:?}", arc.checks);
    }

    #[test]
    fn n3_arc_passes_through_the_double_root() {
        let arc = traced("1/3,1/2", 3);
        assert_eq!(arc.samples[0].1, Complex64::new(-1.0, 0.0));
        assert_eq!(arc.samples.last().unwrap().1, unit_root(1, 3));
        // the path runs along [-1, -1/2] and then up the line Re = -1/2
        for &(alpha, z) in &arc.samples {
            let on_whisker = z.im.abs() < 1e-7 && z.re <= -0.5 + 1e-7;
            let on_line = (z.re + 0.5).abs() < 1e-7 && z.im >= -1e-7;
            assert!(on_whisker || on_line, "{z}");
            // real roots below the double root at alpha = 1/4
            if alpha < 0.25 - 1e-6 {
                assert_eq!(z.im, 0.0, "alpha {alpha}");
            }
            assert!(z.im >= 0.0);
        }
        assert!(arc.contracts_hold(), "{:?}", arc.checks);
    }

    #[test]
    fn ray_detector_self_test() {
        let mut arc = traced("1/4,1/3", 4);
        assert!(forbidden_ray_violation(&arc).is_none());
        let s = arc.poly.s as f64;
        let fake = Complex64::from_polar(0.9, std::f64::consts::PI / s);
        let mid = arc.samples.len() / 2;
        arc.samples[mid].1 = fake;
        let hit = forbidden_ray_violation(&arc).unwrap();
        assert_eq!((hit.k, hit.m), (1, arc.poly.s));
    }

    #[test]
    fn simplicity_detector_self_test() {
        let mut arc = traced("1/4,1/3", 4);
        let mid = arc.samples.len() / 2;
        arc.samples[mid + 3].1 = arc.samples[mid].1;
        assert!(!simplicity_check(&arc));
        arc.samples.truncate(1);
        assert!(simplicity_check(&arc));
    }

    #[test]
    fn power_pairs() {
        let p = power_pair(2, 8, 8, PowerCase::I).unwrap();
        assert_eq!(p, pair("1/4,2/7", 8));
        let p = power_pair(2, 7, 8, PowerCase::II).unwrap();
        assert_eq!(p, pair("2/7,1/3", 8));
        // accepted as Farey pairs, but not for arc construction
        assert_eq!(power_pair(3, 7, 8, PowerCase::II).unwrap(), pair("3/7,1/2", 8));
        assert!(power_recipe(3, 7, 8, PowerCase::II).is_none());
        assert!(matches!(power_pair(3, 8, 8, PowerCase::I), Err(Error::NotAPowerPair(_))));
        assert!(matches!(power_pair(2, 6, 8, PowerCase::I), Err(Error::NotAPowerPair(_))));
    }

    #[test]
    fn power_recipes_for_n8() {
        let mut found = Vec::new();
        for p in upper_half_pairs(8).unwrap() {
            if let Some(r) = find_power_recipe(p).unwrap() {
                found.push((p.to_string(), r.base.to_string(), r.exponent, r.conjugate));
            }
        }
        let expect = [
            ("(1/5, 1/4)", "(3/8, 2/5)", 2, true),
            ("(1/4, 2/7)", "(1/8, 1/7)", 2, false),
            ("(2/7, 1/3)", "(1/7, 1/6)", 2, false),
            ("(3/7, 1/2)", "(1/8, 1/7)", 4, true),
        ];
        let expect: Vec<_> = expect
            .iter()
            .map(|(a, b, d, c)| (a.to_string(), b.to_string(), *d, *c))
            .collect();
        assert_eq!(found, expect);
        assert!(find_power_recipe(pair("1/3,3/8", 8)).unwrap().is_none());
    }

    #[test]
    fn power_arcs_match_traces_n8() {
        let cfg = TrackingConfig::default();
        for target in ["1/4,2/7", "2/7,1/3", "1/5,1/4", "3/7,1/2"] {
            let target = pair(target, 8);
            let recipe = find_power_recipe(target).unwrap().unwrap();
            let base = trace_pair(recipe.base, &cfg).unwrap();
            let power = build_power_arc(&base, &recipe, target).unwrap();
            assert!(power.checks.all_ok(power.kind()), "{target}: {:?}", power.checks);
            let direct = trace_pair(target, &cfg).unwrap();
            let dev = power_trace_deviation(&base, &recipe, &direct).unwrap();
            assert!(dev <= 1e-8, "{target}: {dev:e}");
        }
    }

    #[test]
    fn power_arc_cases() {
        let base = traced("1/8,1/7", 8);
        let sq = power_arc(&base, 2, PowerCase::I).unwrap();
        assert_eq!(sq.pair(), pair("1/4,2/7", 8));
        assert!(sq.checks.residual_ok());
        let fourth = power_arc(&base, 4, PowerCase::I).unwrap();
        assert_eq!(fourth.pair(), pair("1/2,4/7", 8));
        let conj = conjugate_arc(&fourth).unwrap();
        assert_eq!(conj.pair(), pair("3/7,1/2", 8));
        assert!(conj.checks.all_ok(conj.kind()));
        let base7 = traced("1/7,1/6", 8);
        let sq7 = power_arc(&base7, 2, PowerCase::II).unwrap();
        assert_eq!(sq7.pair(), pair("2/7,1/3", 8));
        assert!(matches!(power_arc(&base7, 3, PowerCase::II), Err(Error::NotAPowerPair(_))));
        // the wrong parameter map is caught at the endpoints
        let wrong = PowerRecipe {
            base: base.pair(),
            exponent: 2,
            map: ParameterMap::Preserve,
            conjugate: false,
        };
        assert!(matches!(
            build_power_arc(&base, &wrong, pair("1/4,2/7", 8)),
            Err(Error::PowerMap(_))
        ));
    }

    #[test]
    fn conjugation() {
        let seg = trace_type0(4, &TrackingConfig::default()).unwrap();
        let c = conjugate_arc(&seg).unwrap();
        assert!((c.value_at(0.5).unwrap() - Complex64::new(0.5, -0.5)).norm() < 1e-15);
        assert_eq!(c.pair(), pair("3/4,1/1", 4));
        let cc = conjugate_arc(&c).unwrap();
        assert_eq!(cc.samples, seg.samples);
    }

    #[test]
    fn every_arc_up_to_n8_is_consistent() {
        let cfg = TrackingConfig::default();
        for n in 3..=8 {
            for p in upper_half_pairs(n).unwrap() {
                let arc = trace_pair(p, &cfg).unwrap();
                assert!(arc.contracts_hold(), "n={n} {p}: {:?}", arc.checks);
                let built = construct_arc(p, &cfg).unwrap();
                assert!(built.contracts_hold(), "n={n} {p}: {:?}", built.checks);
            }
        }
    }
}
