//! Independent reference computations for unit tests. Nothing here calls
//! into the root engine.

use num_complex::Complex64;

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real root and complex pair of `t^3 + t^2 + t + 0.5`
/// (bisection, then the quadratic formula on the deflated factor).
pub fn cubic_roots() -> (f64, Complex64, Complex64) {
    let f = |t: f64| ((t + 1.0) * t + 1.0) * t + 0.5;
    let r = bisect(f, -1.0, 0.0);
    // t^3 + t^2 + t + 0.5 = (t - r)(t^2 + b t + c)
    let b = 1.0 + r;
    let c = 1.0 + r * b;
    let disc = b * b - 4.0 * c;
    assert!(disc < 0.0);
    let im = (-disc).sqrt() / 2.0;
    (
        r,
        Complex64::new(-b / 2.0, im),
        Complex64::new(-b / 2.0, -im),
    )
}

/// The root of `t^3 + t^2 + t + 0.5` in the upper half-plane.
pub fn cubic_complex_root() -> Complex64 {
    cubic_roots().1
}

/// All roots of `t^4 - 0.5 t - 0.5 = (t - 1)(t^3 + t^2 + t + 0.5)`.
pub fn quartic_roots() -> Vec<Complex64> {
    let (r, z, zc) = cubic_roots();
    vec![Complex64::new(1.0, 0.0), Complex64::new(r, 0.0), z, zc]
}

#[test]
fn oracle_values() {
    let (r, z, _) = cubic_roots();
    assert!((r + 0.6478).abs() < 1e-4);
    assert!((z.re + 0.1761).abs() < 1e-3 && (z.im - 0.8607).abs() < 1e-3);
}
