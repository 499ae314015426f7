//! Farey fractions of order `n` and their neighbor relation, in exact
//! 64-bit integer arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported order. Keeps every cross product `p * s` below 2^63.
pub const MAX_ORDER: u64 = 1_000_000;

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn check_order(n: u64) -> Result<()> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidOrder(n));
    }
    Ok(())
}

/// A reduced fraction `p/q` with `0 <= p <= q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FareyFraction {
    p: u64,
    q: u64,
}

impl FareyFraction {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 || p > q || q > MAX_ORDER {
            return Err(Error::InvariantViolation(format!(
                "{p}/{q} is not a fraction in [0, 1] with denominator <= {MAX_ORDER}"
            )));
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvariantViolation(format!("{p}/{q} is not reduced")));
        }
        Ok(Self { p, q })
    }

    pub(crate) const fn new_unchecked(p: u64, q: u64) -> Self {
        Self { p, q }
    }

    pub const ZERO: FareyFraction = FareyFraction { p: 0, q: 1 };
    pub const ONE: FareyFraction = FareyFraction { p: 1, q: 1 };
    pub const HALF: FareyFraction = FareyFraction { p: 1, q: 2 };

    pub fn numer(&self) -> u64 {
        self.p
    }

    pub fn denom(&self) -> u64 {
        self.q
    }

    pub fn to_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// `1 - p/q`, the fraction of the mirrored point on the unit circle.
    pub fn mirror(&self) -> Self {
        Self {
            p: self.q - self.p,
            q: self.q,
        }
    }

    /// The unit-circle point `exp(2 pi i p/q)`.
    pub fn root_of_unity(&self) -> num_complex::Complex64 {
        crate::unit_root(self.p, self.q)
    }
}

impl Ord for FareyFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.p as u128 * other.q as u128).cmp(&(other.p as u128 * self.q as u128))
    }
}

impl PartialOrd for FareyFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FareyFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for FareyFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s
            .trim()
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("expected p/q, got {s:?}")))?;
        let p = p
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("numerator of {s:?}: {e}")))?;
        let q = q
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("denominator of {s:?}: {e}")))?;
        FareyFraction::new(p, q)
    }
}

/// Two consecutive Farey fractions of order `order`, stored in increasing
/// rational order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FareyPair {
    pub lo: FareyFraction,
    pub hi: FareyFraction,
    pub order: u64,
}

impl FareyPair {
    /// Builds a pair from two fractions in either order, checking the
    /// neighbor criterion.
    pub fn new(a: FareyFraction, b: FareyFraction, order: u64) -> Result<Self> {
        check_order(order)?;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !are_neighbors(lo, hi, order)? {
            return Err(Error::InvariantViolation(format!(
                "{lo} and {hi} are not Farey neighbors of order {order}"
            )));
        }
        Ok(Self { lo, hi, order })
    }

    /// The mirrored pair `(1 - hi, 1 - lo)`.
    pub fn mirror(&self) -> Self {
        Self {
            lo: self.hi.mirror(),
            hi: self.lo.mirror(),
            order: self.order,
        }
    }

    pub fn lies_in_upper_half(&self) -> bool {
        self.hi <= FareyFraction::HALF
    }

    /// Parses `"a/b,c/d"`.
    pub fn parse(s: &str, order: u64) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected a/b,c/d, got {s:?}")))?;
        FareyPair::new(a.parse()?, b.parse()?, order)
    }

    /// File-name friendly label, e.g. `1-8_1-7`.
    pub fn slug(&self) -> String {
        format!(
            "{}-{}_{}-{}",
            self.lo.p, self.lo.q, self.hi.p, self.hi.q
        )
    }
}

impl fmt::Display for FareyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// All reduced `p/q` with `0 <= p <= q <= n`, increasing.
pub fn farey_sequence(n: u64) -> Result<Vec<FareyFraction>> {
    check_order(n)?;
    // next-term recurrence
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    let mut out = vec![FareyFraction::new_unchecked(0, 1)];
    while c <= n {
        let k = (n + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
        out.push(FareyFraction::new_unchecked(a, b));
    }
    Ok(out)
}

/// Neighbor test: `|p s - q r| = 1` and `q + s > n`.
pub fn are_neighbors(a: FareyFraction, b: FareyFraction, n: u64) -> Result<bool> {
    check_order(n)?;
    for f in [a, b] {
        if f.q == 0 || f.p > f.q || gcd(f.p, f.q) != 1 {
            return Err(Error::InvariantViolation(format!("{f} is not reduced")));
        }
        if f.q > n {
            return Err(Error::InvariantViolation(format!(
                "{f} has denominator above the order {n}"
            )));
        }
    }
    let cross = (a.p as i128 * b.q as i128 - a.q as i128 * b.p as i128).abs();
    Ok(cross == 1 && a.q + b.q > n)
}

/// Consecutive pairs of `farey_sequence(n)` with `hi <= 1/2`.
pub fn upper_half_pairs(n: u64) -> Result<Vec<FareyPair>> {
    check_order(n)?;
    if n < 3 {
        return Err(Error::UnsupportedOrder(n, 3));
    }
    let seq = farey_sequence(n)?;
    Ok(seq
        .windows(2)
        .take_while(|w| w[1] <= FareyFraction::HALF)
        .map(|w| FareyPair {
            lo: w[0],
            hi: w[1],
            order: n,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64, q: u64) -> FareyFraction {
        FareyFraction::new(p, q).unwrap()
    }

    fn brute_force(n: u64) -> Vec<FareyFraction> {
        let mut v = Vec::new();
        for q in 1..=n {
            for p in 0..=q {
                if gcd(p, q) == 1 {
                    v.push(f(p, q));
                }
            }
        }
        v.sort();
        v
    }

    fn totients(n: usize) -> Vec<u64> {
        let mut phi: Vec<u64> = (0..=n as u64).collect();
        for i in 2..=n {
            if phi[i] == i as u64 {
                for j in (i..=n).step_by(i) {
                    phi[j] -= phi[j] / i as u64;
                }
            }
        }
        phi
    }

    #[test]
    fn order_one_is_just_the_integers() {
        assert_eq!(farey_sequence(1).unwrap(), vec![f(0, 1), f(1, 1)]);
    }

    #[test]
    fn order_four() {
        let expected = vec![f(0, 1), f(1, 4), f(1, 3), f(1, 2), f(2, 3), f(3, 4), f(1, 1)];
        assert_eq!(farey_sequence(4).unwrap(), expected);
        assert_eq!(brute_force(4), expected);
    }

    #[test]
    fn order_eight_lower_half() {
        let expected = [
            (0, 1),
            (1, 8),
            (1, 7),
            (1, 6),
            (1, 5),
            (1, 4),
            (2, 7),
            (1, 3),
            (3, 8),
            (2, 5),
            (3, 7),
            (1, 2),
        ]
        .map(|(p, q)| f(p, q));
        let got: Vec<_> = farey_sequence(8)
            .unwrap()
            .into_iter()
            .filter(|x| *x <= FareyFraction::HALF)
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn zero_order_rejected() {
        assert!(matches!(farey_sequence(0), Err(Error::InvalidOrder(0))));
        assert!(matches!(
            farey_sequence(MAX_ORDER + 1),
            Err(Error::InvalidOrder(_))
        ));
    }

    #[test]
    fn recurrence_matches_enumeration() {
        for n in 1..=40 {
            assert_eq!(farey_sequence(n).unwrap(), brute_force(n), "n = {n}");
        }
    }

    #[test]
    fn length_matches_totient_sum() {
        let phi = totients(200);
        for n in 1..=200u64 {
            let expected = 1 + phi[1..=n as usize].iter().sum::<u64>();
            assert_eq!(farey_sequence(n).unwrap().len() as u64, expected);
        }
    }

    #[test]
    fn neighbor_examples() {
        assert!(are_neighbors(f(1, 3), f(1, 2), 4).unwrap());
        assert!(!are_neighbors(f(1, 4), f(1, 2), 4).unwrap());
        for n in 1..30 {
            assert!(are_neighbors(f(0, 1), f(1, n), n).unwrap());
        }
    }

    #[test]
    fn unreduced_input_is_an_error() {
        let bad = FareyFraction::new_unchecked(2, 4);
        assert!(matches!(
            are_neighbors(bad, f(1, 1), 4),
            Err(Error::InvariantViolation(_))
        ));
        assert!(FareyFraction::new(2, 4).is_err());
        assert!(FareyFraction::new(3, 2).is_err());
    }

    #[test]
    fn neighbor_criterion_is_exactly_adjacency() {
        for n in 1..=64u64 {
            let seq = farey_sequence(n).unwrap();
            for i in 0..seq.len() {
                for j in i + 1..seq.len() {
                    let adjacent = j == i + 1;
                    assert_eq!(
                        are_neighbors(seq[i], seq[j], n).unwrap(),
                        adjacent,
                        "n = {n}: {} {}",
                        seq[i],
                        seq[j]
                    );
                }
            }
        }
    }

    #[test]
    fn upper_half_examples() {
        let p = |a: (u64, u64), b: (u64, u64), n| FareyPair {
            lo: f(a.0, a.1),
            hi: f(b.0, b.1),
            order: n,
        };
        assert_eq!(
            upper_half_pairs(3).unwrap(),
            vec![p((0, 1), (1, 3), 3), p((1, 3), (1, 2), 3)]
        );
        assert_eq!(
            upper_half_pairs(4).unwrap(),
            vec![p((0, 1), (1, 4), 4), p((1, 4), (1, 3), 4), p((1, 3), (1, 2), 4)]
        );
        assert_eq!(upper_half_pairs(8).unwrap().len(), 11);
        assert!(matches!(
            upper_half_pairs(2),
            Err(Error::UnsupportedOrder(2, 3))
        ));
    }

    #[test]
    fn pair_denominators_are_coprime() {
        for n in 3..=64 {
            for pair in upper_half_pairs(n).unwrap() {
                assert_eq!(gcd(pair.lo.denom(), pair.hi.denom()), 1);
            }
        }
    }

    #[test]
    fn parse_pair() {
        let pair = FareyPair::parse("1/3,3/8", 8).unwrap();
        assert_eq!(pair.lo, f(1, 3));
        assert_eq!(pair.hi, f(3, 8));
        assert_eq!(pair.slug(), "1-3_3-8");
        assert!(FareyPair::parse("1/3,1/2", 8).is_err());
        assert!(FareyPair::parse("garbage", 8).is_err());
    }
}
