//! Numerical construction of the region of all eigenvalues of `n x n`
//! stochastic matrices.
//!
//! The boundary of the region is a chain of arcs joining the unit-circle
//! points `exp(2 pi i p/q)` for consecutive Farey fractions `p/q`. Each arc
//! is a root path `alpha -> lambda(alpha)` of an Ito polynomial. This crate
//! enumerates the Farey pairs ([`farey`]), classifies their polynomials
//! ([`ito_poly`]), tracks root paths ([`root_engine`]), builds and checks the
//! arcs ([`arc_tracer`]), assembles the region ([`region_builder`]) and
//! cross-checks everything against explicit stochastic matrices
//! ([`stochastic_lab`]).

pub mod arc_tracer;
pub mod error;
pub mod farey;
pub mod geometry;
pub mod io;
pub mod ito_poly;
pub mod region_builder;
pub mod root_engine;
pub mod stochastic_lab;

#[cfg(test)]
pub(crate) mod test_oracles;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `exp(2 pi i p/q)`, exact on the axes.
pub fn unit_root(p: u64, q: u64) -> Complex64 {
    let k = p % q;
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * k == q {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == q {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * k == 3 * q {
        return Complex64::new(0.0, -1.0);
    }
    let theta = 2.0 * std::f64::consts::PI * k as f64 / q as f64;
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

/// `Arg z / 2 pi` folded into `[0, 1)`.
pub fn turns(z: Complex64) -> f64 {
    let t = z.im.atan2(z.re) / (2.0 * std::f64::consts::PI);
    if t < 0.0 {
        t + 1.0
    } else {
        t
    }
}
