//! Aberth–Ehrlich simultaneous iteration.

use num_complex::Complex64;

/// Something that evaluates a polynomial and its derivative.
pub trait Evaluator {
    fn eval(&self, t: Complex64) -> (Complex64, Complex64);
}

/// Horner evaluation of ascending complex coefficients.
pub struct Coefficients<'a>(pub &'a [Complex64]);

impl Evaluator for Coefficients<'_> {
    fn eval(&self, t: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.0.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }
}

impl<F: Fn(Complex64) -> (Complex64, Complex64)> Evaluator for F {
    fn eval(&self, t: Complex64) -> (Complex64, Complex64) {
        self(t)
    }
}

/// Starting points on a circle around the root centroid. `twist` rotates
/// the circle so that restarts begin from different points.
pub(crate) fn initial_guesses(monic: &[Complex64], twist: f64) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let center = -monic[n - 1] / n as f64;
    // Fujiwara-type bound on the root moduli about the centroid.
    let shifted = taylor_shift(monic, center);
    let mut radius = 0.0f64;
    for k in 0..n {
        let c = shifted[k].norm();
        if c > 0.0 {
            radius = radius.max(c.powf(1.0 / (n - k) as f64));
        }
    }
    if radius == 0.0 {
        radius = 1.0;
    }
    let offset = 0.4 + twist;
    (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + offset;
            center + Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Coefficients of `p(t + c)`.
fn taylor_shift(coeffs: &[Complex64], c: Complex64) -> Vec<Complex64> {
    let mut a = coeffs.to_vec();
    let n = a.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = a[j + 1];
            a[j] += c * next;
        }
    }
    a
}

/// Runs Aberth iterations in place. Returns the number of sweeps used and
/// whether the corrections settled below `tol` (relative to `max(1, |z|)`).
pub(crate) fn iterate<E: Evaluator + ?Sized>(
    eval: &E,
    roots: &mut [Complex64],
    tol: f64,
    max_iter: usize,
) -> (usize, bool) {
    let n = roots.len();
    if n == 0 {
        return (0, true);
    }
    let mut settled = vec![false; n];
    for sweep in 1..=max_iter {
        let mut max_step = 0.0f64;
        for i in 0..n {
            if settled[i] {
                continue;
            }
            let z = roots[i];
            let (p, dp) = eval.eval(z);
            if p == Complex64::new(0.0, 0.0) {
                settled[i] = true;
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &other) in roots.iter().enumerate() {
                if j != i {
                    let diff = z - other;
                    if diff.norm_sqr() > 0.0 {
                        s += diff.inv();
                    }
                }
            }
            let denom = dp - p * s;
            let step = if denom.norm_sqr() > 0.0 && denom.is_finite() {
                p / denom
            } else {
                // exactly coincident iterates: nudge apart
                Complex64::new(1e-8, 1e-8) * (1.0 + i as f64)
            };
            if !step.is_finite() {
                continue;
            }
            roots[i] = z - step;
            let rel = step.norm() / z.norm().max(1.0);
            if rel <= tol {
                settled[i] = true;
            }
            max_step = max_step.max(rel);
        }
        if settled.iter().all(|s| *s) || max_step <= tol {
            return (sweep, true);
        }
    }
    (max_iter, false)
}
