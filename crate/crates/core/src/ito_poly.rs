//! Ito polynomials and their reduced forms.
//!
//! For a Farey pair with endpoint denominators `q <= s` and `d = floor(n/q)`
//! the Ito polynomial is
//!
//! ```text
//! P(t) = t^s (t^q - beta)^d - alpha^d t^(q d),   beta = 1 - alpha.
//! ```
//!
//! Its nonzero roots are the roots of one of four reduced polynomials:
//!
//! | type | condition      | reduced polynomial                       | degree |
//! |------|----------------|------------------------------------------|--------|
//! | 0    | `d = n`        | `(t - beta)^n - alpha^n`                 | `n`    |
//! | I    | `d = 1`        | `t^s - beta t^(s-q) - alpha`             | `s`    |
//! | II   | `s > q d`      | `t^(s-qd) (t^q - beta)^d - alpha^d`      | `s`    |
//! | III  | `s < q d`      | `(t^q - beta)^d - alpha^d t^(qd-s)`      | `q d`  |
//!
//! Evaluation always goes through the factored form; the expanded
//! coefficient vector exists only to seed the global root solve.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey::{FareyFraction, FareyPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ItoType {
    Type0,
    TypeI,
    TypeII,
    TypeIII,
}

impl ItoType {
    pub fn label(&self) -> &'static str {
        match self {
            ItoType::Type0 => "0",
            ItoType::TypeI => "I",
            ItoType::TypeII => "II",
            ItoType::TypeIII => "III",
        }
    }
}

impl fmt::Display for ItoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A classified reduced Ito polynomial. `(p, q)` is the endpoint with the
/// smaller denominator, so the arc runs from `exp(2 pi i p/q)` at
/// `alpha = 0` to `exp(2 pi i r/s)` at `alpha = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ItoPolynomial {
    pub pair: FareyPair,
    pub n: u64,
    pub p: u64,
    pub q: u64,
    pub r: u64,
    pub s: u64,
    pub d: u64,
    pub kind: ItoType,
}

/// Classifies a Farey pair of order `n`.
pub fn classify(pair: FareyPair, n: u64) -> Result<ItoPolynomial> {
    crate::farey::check_order(n)?;
    if !crate::farey::are_neighbors(pair.lo, pair.hi, n)? {
        return Err(Error::Precondition(format!(
            "{pair} is not a Farey pair of order {n}"
        )));
    }
    let (start, end) = if pair.lo.denom() <= pair.hi.denom() {
        (pair.lo, pair.hi)
    } else {
        (pair.hi, pair.lo)
    };
    let (p, q, r, s) = (start.numer(), start.denom(), end.numer(), end.denom());
    let d = n / q;
    // q = 1 gives s = n = q d; every other pair has gcd(q, s) = 1 < q
    if d != n && s == q * d {
        return Err(Error::InternalInconsistency(format!(
            "{pair}: s = q * floor(n/q) = {s} contradicts gcd(q, s) = 1"
        )));
    }
    let kind = if d == n {
        ItoType::Type0
    } else if d == 1 {
        ItoType::TypeI
    } else if s > q * d {
        ItoType::TypeII
    } else {
        ItoType::TypeIII
    };
    Ok(ItoPolynomial {
        pair: FareyPair { order: n, ..pair },
        n,
        p,
        q,
        r,
        s,
        d,
        kind,
    })
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} is outside [0, 1]")));
    }
    Ok(())
}

/// Exact binomial coefficient; exact for every `n <= 64`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Ascending coefficients of `(t^q - beta)^d`, placed starting at power `shift`.
fn add_binomial_power(coeffs: &mut [f64], q: usize, d: u64, beta: f64, shift: usize) {
    for j in 0..=d {
        let c = binomial(d, j) as f64;
        let sign = if (d - j) % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[shift + q * j as usize] += sign * c * beta.powi((d - j) as i32);
    }
}

impl ItoPolynomial {
    pub fn start(&self) -> FareyFraction {
        FareyFraction::new_unchecked(self.p, self.q)
    }

    pub fn end(&self) -> FareyFraction {
        FareyFraction::new_unchecked(self.r, self.s)
    }

    /// `exp(2 pi i p/q)`, the arc value at `alpha = 0`.
    pub fn start_point(&self) -> Complex64 {
        crate::unit_root(self.p, self.q)
    }

    /// `exp(2 pi i r/s)`, the arc value at `alpha = 1`.
    pub fn end_point(&self) -> Complex64 {
        crate::unit_root(self.r, self.s)
    }

    pub fn degree(&self) -> usize {
        match self.kind {
            ItoType::Type0 => self.n as usize,
            ItoType::TypeI | ItoType::TypeII => self.s as usize,
            ItoType::TypeIII => (self.q * self.d) as usize,
        }
    }

    /// Sector `(min, max)` of `Arg/2pi` spanned by the endpoints.
    pub fn sector(&self) -> (FareyFraction, FareyFraction) {
        (self.pair.lo, self.pair.hi)
    }

    /// Dense ascending coefficients of the monic reduced polynomial.
    pub fn reduced_coefficients(&self, alpha: f64) -> Result<Vec<f64>> {
        check_alpha(alpha)?;
        let beta = 1.0 - alpha;
        let (q, s, d) = (self.q as usize, self.s as usize, self.d);
        let mut c = vec![0.0; self.degree() + 1];
        match self.kind {
            ItoType::Type0 => {
                let n = self.n;
                add_binomial_power(&mut c, 1, n, beta, 0);
                c[0] -= alpha.powi(n as i32);
            }
            ItoType::TypeI => {
                c[s] = 1.0;
                c[s - q] -= beta;
                c[0] -= alpha;
            }
            ItoType::TypeII => {
                add_binomial_power(&mut c, q, d, beta, s - q * d as usize);
                c[0] -= alpha.powi(d as i32);
            }
            ItoType::TypeIII => {
                add_binomial_power(&mut c, q, d, beta, 0);
                c[q * d as usize - s] -= alpha.powi(d as i32);
            }
        }
        Ok(c)
    }

    /// Factored evaluation of the reduced polynomial and its `t`-derivative.
    pub fn eval_reduced(&self, alpha: f64, t: Complex64) -> Result<(Complex64, Complex64)> {
        check_alpha(alpha)?;
        Ok(self.eval_reduced_unchecked(alpha, t))
    }

    pub(crate) fn eval_reduced_unchecked(&self, alpha: f64, t: Complex64) -> (Complex64, Complex64) {
        let beta = 1.0 - alpha;
        let one = Complex64::new(1.0, 0.0);
        let pow = |z: Complex64, k: u64| -> Complex64 {
            if k == 0 {
                one
            } else {
                z.powu(k as u32)
            }
        };
        let (q, s, d) = (self.q, self.s, self.d);
        match self.kind {
            ItoType::Type0 => {
                let n = self.n;
                let u = t - beta;
                let un1 = pow(u, n - 1);
                (un1 * u - alpha.powi(n as i32), un1 * n as f64)
            }
            ItoType::TypeI => {
                let e = s - q;
                let te1 = pow(t, e - 1);
                let te = te1 * t;
                let tq1 = pow(t, q - 1);
                let w = tq1 * t - beta;
                let value = te * w - alpha;
                let deriv = te1 * w * e as f64 + te * tq1 * q as f64;
                (value, deriv)
            }
            ItoType::TypeII => {
                let e = s - q * d;
                let te1 = pow(t, e - 1);
                let te = te1 * t;
                let tq1 = pow(t, q - 1);
                let w = tq1 * t - beta;
                let wd1 = pow(w, d - 1);
                let wd = wd1 * w;
                let value = te * wd - alpha.powi(d as i32);
                let deriv = te1 * wd * e as f64 + te * wd1 * tq1 * (d * q) as f64;
                (value, deriv)
            }
            ItoType::TypeIII => {
                let e = q * d - s;
                let te1 = pow(t, e - 1);
                let te = te1 * t;
                let tq1 = pow(t, q - 1);
                let w = tq1 * t - beta;
                let wd1 = pow(w, d - 1);
                let ad = alpha.powi(d as i32);
                let value = wd1 * w - te * ad;
                let deriv = wd1 * tq1 * (d * q) as f64 - te1 * ad * e as f64;
                (value, deriv)
            }
        }
    }

    /// The unreduced Ito polynomial `t^s (t^q - beta)^d - alpha^d t^(qd)`.
    pub fn eval_full(&self, alpha: f64, t: Complex64) -> Complex64 {
        eval_ito(self.q, self.s, self.d, alpha, t)
    }
}

fn eval_ito(q: u64, s: u64, d: u64, alpha: f64, t: Complex64) -> Complex64 {
    let beta = 1.0 - alpha;
    let w = t.powu(q as u32) - beta;
    t.powu(s as u32) * w.powu(d as u32) - t.powu((q * d) as u32) * alpha.powi(d as i32)
}

/// Full Ito polynomial for `pair` at order `n`, with `q <= s` chosen by
/// denominator.
pub fn eval_full_ito(pair: FareyPair, n: u64, alpha: f64, t: Complex64) -> Complex64 {
    let (q, s) = if pair.lo.denom() <= pair.hi.denom() {
        (pair.lo.denom(), pair.hi.denom())
    } else {
        (pair.hi.denom(), pair.lo.denom())
    };
    eval_ito(q, s, n / q, alpha, t)
}

/// Horner evaluation of ascending real coefficients at a complex point.
pub fn horner(coeffs: &[f64], t: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::upper_half_pairs;
    use crate::unit_root;
    use proptest::prelude::*;

    fn pair(a: &str, n: u64) -> FareyPair {
        FareyPair::parse(a, n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classify_examples_order_eight() {
        let p = classify(pair("1/8,1/7", 8), 8).unwrap();
        assert_eq!((p.q, p.s, p.d, p.kind), (7, 8, 1, ItoType::TypeI));
        let p = classify(pair("1/4,2/7", 8), 8).unwrap();
        assert_eq!((p.q, p.s, p.d, p.kind), (4, 7, 2, ItoType::TypeIII));
        let p = classify(pair("1/3,3/8", 8), 8).unwrap();
        assert_eq!((p.q, p.s, p.d, p.kind), (3, 8, 2, ItoType::TypeII));
        let p = classify(pair("0/1,1/8", 8), 8).unwrap();
        assert_eq!((p.q, p.d, p.kind), (1, 8, ItoType::Type0));
    }

    #[test]
    fn classification_is_total() {
        for n in 3..=32 {
            for pr in upper_half_pairs(n).unwrap() {
                let poly = classify(pr, n).unwrap();
                assert!(poly.q <= poly.s);
                assert_eq!(crate::farey::gcd(poly.q, poly.s), 1);
                if poly.kind != ItoType::Type0 {
                    assert_ne!(poly.s, poly.q * poly.d);
                }
                let is_zero = pr.lo == FareyFraction::ZERO;
                assert_eq!(poly.kind == ItoType::Type0, is_zero, "{pr}");
                if poly.kind == ItoType::TypeI && n >= 4 {
                    assert!(poly.q > 2);
                }
            }
        }
    }

    #[test]
    fn classify_rejects_non_pairs() {
        let bogus = FareyPair {
            lo: FareyFraction::new(1, 4).unwrap(),
            hi: FareyFraction::new(1, 2).unwrap(),
            order: 4,
        };
        assert!(matches!(classify(bogus, 4), Err(Error::Precondition(_))));
    }

    #[test]
    fn reduced_coefficient_examples() {
        let p1 = classify(pair("1/4,1/3", 4), 4).unwrap();
        assert_eq!(
            p1.reduced_coefficients(0.5).unwrap(),
            vec![-0.5, -0.5, 0.0, 0.0, 1.0]
        );
        let p0 = classify(pair("0/1,1/3", 3), 3).unwrap();
        assert_eq!(p0.reduced_coefficients(1.0).unwrap(), vec![-1.0, 0.0, 0.0, 1.0]);
        // s > qd: the reduced form keeps the t^(s - qd) factor
        let p2 = classify(pair("1/3,3/8", 8), 8).unwrap();
        assert_eq!(
            p2.reduced_coefficients(0.0).unwrap(),
            vec![0.0, 0.0, 1.0, 0.0, 0.0, -2.0, 0.0, 0.0, 1.0]
        );
        let p3 = classify(pair("1/4,2/7", 8), 8).unwrap();
        assert_eq!(
            p3.reduced_coefficients(0.0).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 1.0]
        );
        assert!(matches!(p1.reduced_coefficients(1.5), Err(Error::Domain(_))));
        assert!(matches!(p1.reduced_coefficients(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn endpoint_factorizations() {
        // alpha = 0: zeros 0 (s - q times) and the q-th roots of unity;
        // alpha = 1: the s-th roots of unity.
        for n in 4..=12 {
            for pr in upper_half_pairs(n).unwrap() {
                let poly = classify(pr, n).unwrap();
                if poly.kind != ItoType::TypeI {
                    continue;
                }
                let (q, s) = (poly.q as usize, poly.s as usize);
                let mut at0 = vec![0.0; s + 1];
                at0[s] = 1.0;
                at0[s - q] = -1.0;
                assert_eq!(poly.reduced_coefficients(0.0).unwrap(), at0);
                let mut at1 = vec![0.0; s + 1];
                at1[s] = 1.0;
                at1[0] = -1.0;
                assert_eq!(poly.reduced_coefficients(1.0).unwrap(), at1);
                for k in 0..q as u64 {
                    let (v, _) = poly.eval_reduced(0.0, unit_root(k, q as u64)).unwrap();
                    assert!(v.norm() < 1e-14);
                }
                for k in 0..s as u64 {
                    let (v, _) = poly.eval_reduced(1.0, unit_root(k, s as u64)).unwrap();
                    assert!(v.norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        let p1 = classify(pair("1/4,1/3", 4), 4).unwrap();
        assert_eq!(p1.eval_reduced(0.5, c(1.0, 0.0)).unwrap().0.norm(), 0.0);
        // s - q = 1: a simple zero at the origin
        let (v, dv) = p1.eval_reduced(0.0, c(0.0, 0.0)).unwrap();
        assert_eq!(v.norm(), 0.0);
        assert_eq!(dv.norm(), 1.0);
        // s - q = 3: value and derivative both vanish
        let p3 = classify(pair("3/8,2/5", 8), 8).unwrap();
        let (v, dv) = p3.eval_reduced(0.0, c(0.0, 0.0)).unwrap();
        assert_eq!(v.norm(), 0.0);
        assert_eq!(dv.norm(), 0.0);
        for n in 3..=9u64 {
            let p0 = classify(pair(&format!("0/1,1/{n}"), n), n).unwrap();
            for &alpha in &[0.0, 0.3, 0.77, 1.0] {
                for k in 0..n {
                    let t = (1.0 - alpha) + unit_root(k, n) * alpha;
                    assert!(p0.eval_reduced(alpha, t).unwrap().0.norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn type_one_zero_has_multiplicity_s_minus_q() {
        let p = classify(pair("1/7,1/6", 8), 8).unwrap();
        let c0 = p.reduced_coefficients(0.0).unwrap();
        let lead_zeros = c0.iter().take_while(|x| **x == 0.0).count();
        assert_eq!(lead_zeros as u64, p.s - p.q);
    }

    #[test]
    fn full_ito_examples() {
        for n in 3..=10 {
            for pr in upper_half_pairs(n).unwrap() {
                let poly = classify(pr, n).unwrap();
                let z0 = eval_full_ito(pr, n, 0.0, poly.start_point());
                let z1 = eval_full_ito(pr, n, 1.0, poly.end_point());
                assert!(z0.norm() < 1e-12, "{pr} {z0}");
                assert!(z1.norm() < 1e-12, "{pr} {z1}");
            }
        }
        // root of t^3 + t^2 + t + 0.5, located by bisection on the real
        // factor and deflation in the test oracle below
        let t = crate::test_oracles::cubic_complex_root();
        let v = eval_full_ito(pair("1/4,1/3", 4), 4, 0.5, t);
        assert!(v.norm() < 1e-9, "{v}");
    }

    #[test]
    fn binomials_exact() {
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 4), 0);
    }

    fn any_poly() -> impl Strategy<Value = ItoPolynomial> {
        (3u64..=16).prop_flat_map(|n| {
            let pairs = upper_half_pairs(n).unwrap();
            (0..pairs.len()).prop_map(move |i| classify(pairs[i], n).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn expanded_and_factored_forms_agree(
            poly in any_poly(),
            alpha in 0.0f64..=1.0,
            re in -1.2f64..1.2,
            im in -1.2f64..1.2,
        ) {
            let t = c(re, im);
            let coeffs = poly.reduced_coefficients(alpha).unwrap();
            let expanded = horner(&coeffs, t);
            let (factored, _) = poly.eval_reduced(alpha, t).unwrap();
            // relative to the size of the terms being summed
            let scale: f64 = coeffs.iter().enumerate()
                .map(|(k, c)| c.abs() * t.norm().powi(k as i32))
                .sum();
            prop_assert!((expanded - factored).norm() <= 1e-12 * scale.max(1e-300),
                "{:?} {} {}", poly.kind, expanded, factored);
        }

        #[test]
        fn derivative_matches_finite_difference(
            poly in any_poly(),
            alpha in 0.0f64..=1.0,
            re in -1.0f64..1.0,
            im in -1.0f64..1.0,
        ) {
            let t = c(re, im);
            let h = 1e-6;
            let (_, dv) = poly.eval_reduced(alpha, t).unwrap();
            let fd = (poly.eval_reduced(alpha, t + h).unwrap().0
                - poly.eval_reduced(alpha, t - h).unwrap().0) / (2.0 * h);
            prop_assert!((dv - fd).norm() <= 1e-5 * (1.0 + dv.norm()));
        }
    }
}
