//! All-roots solving and continuous root-path tracking for one-parameter
//! polynomial families `alpha -> P_alpha`, `alpha in [0, 1]`.
//!
//! Path tracking follows each root from one grid point to the next:
//! predict with the previous value, correct by Newton, then match the
//! corrected points to a freshly solved root set by minimum-weight perfect
//! matching. A step is accepted only when every path moves less than half
//! the smallest pairwise root distance (never less than `guard_floor`);
//! otherwise the interval is bisected.

mod aberth;
pub mod matching;

use num_complex::Complex64;

pub use aberth::{Coefficients, Evaluator};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative correction size at which an iterate counts as converged.
    pub step_tol: f64,
    pub max_iter: usize,
    /// Restarts from a rotated circle when the scaled residual stays large.
    pub restarts: usize,
    /// Acceptable scaled residual `|P(r)| / (max|c| * max(1,|r|)^deg)`.
    pub residual_bound: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step_tol: 4.0 * f64::EPSILON,
            max_iter: 600,
            restarts: 4,
            residual_bound: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// Largest scaled residual over the roots.
    pub residual_bound: f64,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Groups roots closer than `tol` (single linkage) and returns
    /// `(centroid, multiplicity)` per group.
    pub fn clusters(&self, tol: f64) -> Vec<(Complex64, usize)> {
        let n = self.roots.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn find(label: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while label[r] != r {
                r = label[r];
            }
            label[i] = r;
            r
        }
        for i in 0..n {
            for j in i + 1..n {
                if (self.roots[i] - self.roots[j]).norm() <= tol {
                    let (a, b) = (find(&mut label, i), find(&mut label, j));
                    label[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
        for i in 0..n {
            let r = find(&mut label, i);
            match groups.iter_mut().find(|g| g.0 == r) {
                Some(g) => {
                    g.1 += self.roots[i];
                    g.2 += 1;
                }
                None => groups.push((r, self.roots[i], 1)),
            }
        }
        groups
            .into_iter()
            .map(|(_, sum, m)| (sum / m as f64, m))
            .collect()
    }
}

fn scaled_residual(coeffs: &[Complex64], root: Complex64) -> f64 {
    let deg = coeffs.len() - 1;
    let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let (p, _) = Coefficients(coeffs).eval(root);
    p.norm() / (cmax * root.norm().max(1.0).powi(deg as i32))
}

/// All roots of a dense polynomial given by ascending complex coefficients.
pub fn all_roots(coefficients: &[Complex64]) -> Result<RootSet> {
    all_roots_with(coefficients, &SolverConfig::default())
}

pub fn all_roots_with(coefficients: &[Complex64], cfg: &SolverConfig) -> Result<RootSet> {
    let degree = coefficients.len().saturating_sub(1);
    if degree == 0 {
        return Err(Error::DegeneratePolynomial(
            "degree must be at least 1".into(),
        ));
    }
    let lead = coefficients[degree];
    if lead.norm() == 0.0 || !lead.is_finite() {
        return Err(Error::DegeneratePolynomial(
            "leading coefficient is zero".into(),
        ));
    }
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::DegeneratePolynomial(
            "non-finite coefficient".into(),
        ));
    }
    // exact zero roots from vanishing low-order coefficients
    let zeros = coefficients.iter().take_while(|c| c.norm() == 0.0).count();
    let monic: Vec<Complex64> = coefficients[zeros..].iter().map(|c| c / lead).collect();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let m = monic.len() - 1;
    if m == 1 {
        roots.push(-monic[0]);
    } else if m > 1 {
        let eval = Coefficients(&monic);
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for attempt in 0..=cfg.restarts {
            let twist = 0.7 * attempt as f64;
            let mut z = aberth::initial_guesses(&monic, twist);
            aberth::iterate(&eval, &mut z, cfg.step_tol, cfg.max_iter);
            let res = z
                .iter()
                .map(|r| scaled_residual(&monic, *r))
                .fold(0.0, f64::max);
            let better = best.as_ref().is_none_or(|(b, _)| res < *b);
            if better {
                best = Some((res, z));
            }
            if res <= cfg.residual_bound {
                break;
            }
        }
        let (res, z) = best.expect("at least one attempt");
        if !(res <= cfg.residual_bound) {
            let mut all = roots;
            all.extend(z);
            return Err(Error::ConvergenceFailure {
                iterations: cfg.max_iter * (cfg.restarts + 1),
                residual: res,
                best: all,
            });
        }
        roots.extend(z);
    }
    let residual_bound = roots
        .iter()
        .map(|r| scaled_residual(coefficients, *r))
        .fold(0.0, f64::max);
    Ok(RootSet {
        roots,
        residual_bound,
    })
}

/// Polishes an approximate root set with Aberth iterations driven by an
/// arbitrary evaluator (typically a factored form that is more accurate
/// than the expanded coefficients near clusters).
pub fn polish<E: Evaluator + ?Sized>(eval: &E, roots: &mut [Complex64], cfg: &SolverConfig) {
    aberth::iterate(eval, roots, cfg.step_tol, cfg.max_iter);
}

/// A one-parameter family of polynomials of constant degree.
pub trait PolynomialFamily: Sync {
    fn degree(&self) -> usize;

    /// Ascending coefficients at `alpha`.
    fn coefficients(&self, alpha: f64) -> Vec<Complex64>;

    /// Value and `t`-derivative at `alpha`. Defaults to Horner on the
    /// coefficients; families with a better-conditioned factored form
    /// should override it.
    fn evaluate(&self, alpha: f64, t: Complex64) -> (Complex64, Complex64) {
        let c = self.coefficients(alpha);
        Coefficients(&c).eval(t)
    }

    fn has_real_coefficients(&self) -> bool {
        false
    }
}

/// Adapts a coefficient closure to [`PolynomialFamily`].
pub struct CoefficientFamily<F> {
    pub degree: usize,
    pub coefficients: F,
    pub real: bool,
}

impl<F: Fn(f64) -> Vec<Complex64> + Sync> PolynomialFamily for CoefficientFamily<F> {
    fn degree(&self) -> usize {
        self.degree
    }

    fn coefficients(&self, alpha: f64) -> Vec<Complex64> {
        (self.coefficients)(alpha)
    }

    fn has_real_coefficients(&self) -> bool {
        self.real
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingConfig {
    /// Number of uniformly spaced points in the starting grid.
    pub initial_points: usize,
    /// Maximum total number of grid points after adaptive bisection.
    pub refinement_cap: usize,
    /// Lower bound on the per-step displacement guard.
    pub guard_floor: f64,
    /// Distance under which roots are reported as one multiple root.
    pub cluster_tol: f64,
    pub solver: SolverConfig,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            initial_points: 64,
            refinement_cap: 1 << 16,
            guard_floor: 1e-3,
            cluster_tol: 1e-6,
            solver: SolverConfig::default(),
        }
    }
}

/// `m` equally spaced points from 0 to 1 inclusive.
pub fn uniform_grid(m: usize) -> Vec<f64> {
    assert!(m >= 2, "a grid needs both endpoints");
    (0..m)
        .map(|i| if i + 1 == m { 1.0 } else { i as f64 / (m - 1) as f64 })
        .collect()
}

/// Root paths over a refined grid: `paths[k][j]` is path `k` at `grid[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootPaths {
    pub grid: Vec<f64>,
    pub paths: Vec<Vec<Complex64>>,
    /// Largest accepted single-step displacement.
    pub matching_quality: f64,
}

impl RootPaths {
    pub fn roots_at(&self, j: usize) -> Vec<Complex64> {
        self.paths.iter().map(|p| p[j]).collect()
    }
}

/// Solves the family at one parameter value: global solve on the expanded
/// coefficients, then polish against the family's own evaluator.
pub fn solve_family<F: PolynomialFamily + ?Sized>(
    family: &F,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<Vec<Complex64>> {
    let coeffs = family.coefficients(alpha);
    if coeffs.len() != family.degree() + 1 {
        return Err(Error::Precondition(format!(
            "family degree changed at alpha = {alpha}"
        )));
    }
    let mut roots = match all_roots_with(&coeffs, cfg) {
        Ok(set) => set.roots,
        // a near-multiple cluster can stall the expanded-form solve; the
        // polish below usually recovers it
        Err(Error::ConvergenceFailure { best, .. }) => best,
        Err(e) => return Err(e),
    };
    let eval = |t: Complex64| family.evaluate(alpha, t);
    polish(&eval, &mut roots, cfg);
    Ok(roots)
}

fn min_pairwise_distance(points: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

/// Newton correction of a predicted root; keeps the prediction when Newton
/// does not improve the residual or wanders further than `reach`.
fn newton_correct<F: PolynomialFamily + ?Sized>(
    family: &F,
    alpha: f64,
    start: Complex64,
    reach: f64,
) -> Complex64 {
    let mut z = start;
    let (mut p, mut dp) = family.evaluate(alpha, z);
    let p0 = p.norm();
    for _ in 0..8 {
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !next.is_finite() {
            break;
        }
        z = next;
        (p, dp) = family.evaluate(alpha, z);
    }
    if p.norm() <= p0 && (z - start).norm() <= reach {
        z
    } else {
        start
    }
}

/// Tracks all root paths of `family` over `grid`, bisecting adaptively
/// where the displacement guard is violated.
pub fn track_paths<F: PolynomialFamily + ?Sized>(
    family: &F,
    grid: &[f64],
    cfg: &TrackingConfig,
) -> Result<RootPaths> {
    if grid.len() < 2 || grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
        return Err(Error::Precondition(
            "grid must start at 0 and end at 1".into(),
        ));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition(
            "grid must be strictly increasing".into(),
        ));
    }
    let degree = family.degree();
    let mut current = solve_family(family, grid[0], &cfg.solver)?;
    if current.len() != degree {
        return Err(Error::InternalInconsistency(format!(
            "expected {degree} roots, found {}",
            current.len()
        )));
    }
    let mut alpha = grid[0];
    let mut out_grid = vec![alpha];
    let mut paths: Vec<Vec<Complex64>> = current.iter().map(|z| vec![*z]).collect();
    let mut total_points = grid.len();
    let mut quality = 0.0f64;

    let mut pending: Vec<f64> = grid[1..].iter().rev().copied().collect();
    while let Some(&target) = pending.last() {
        let fresh = solve_family(family, target, &cfg.solver)?;
        let sep = min_pairwise_distance(&current);
        let guard = (0.5 * sep).max(cfg.guard_floor);
        let predicted: Vec<Complex64> = current
            .iter()
            .map(|z| newton_correct(family, target, *z, guard))
            .collect();
        let cost: Vec<Vec<f64>> = predicted
            .iter()
            .map(|p| fresh.iter().map(|f| (p - f).norm_sqr()).collect())
            .collect();
        let assignment = matching::min_cost_assignment(&cost);
        let next: Vec<Complex64> = assignment.iter().map(|&j| fresh[j]).collect();
        let displacement = current
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);

        if displacement < guard {
            for (path, z) in paths.iter_mut().zip(&next) {
                path.push(*z);
            }
            out_grid.push(target);
            quality = quality.max(displacement);
            alpha = target;
            current = next;
            pending.pop();
            continue;
        }

        let mid = 0.5 * (alpha + target);
        if total_points >= cfg.refinement_cap || !(mid > alpha && mid < target) {
            return Err(Error::PathAmbiguity {
                lo: alpha,
                hi: target,
            });
        }
        total_points += 1;
        pending.push(mid);
    }

    Ok(RootPaths {
        grid: out_grid,
        paths,
        matching_quality: quality,
    })
}
