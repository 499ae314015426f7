//! Explicit stochastic matrices: realizations of the Type 0 and Type I
//! polynomials, random samples, spectra and digraph structure.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::arc_tracer::KArc;
use crate::error::{Error, Result};
use crate::farey::gcd;
use crate::ito_poly::ItoType;
use crate::root_engine::{all_roots, uniform_grid, RootSet};

/// Row sums must be 1 to within this.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A dense, row-major, entrywise nonnegative matrix with unit row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    /// Checks nonnegativity and row sums.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::Precondition(format!(
                "need {n} x {n} entries, got {}",
                data.len()
            )));
        }
        for i in 0..n {
            let row = &data[i * n..(i + 1) * n];
            if let Some(x) = row.iter().find(|x| !(**x >= 0.0)) {
                return Err(Error::InvariantViolation(format!(
                    "row {i} has entry {x}"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvariantViolation(format!(
                    "row {i} sums to {sum}"
                )));
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition("matrix is not square".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

fn check_unit(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} is outside [0, 1]")));
    }
    Ok(())
}

/// `beta I + alpha C` with `C` the cyclic shift `C[i][i+1 mod n] = 1`.
pub fn realize_type0(n: usize, alpha: f64) -> Result<StochasticMatrix> {
    check_unit(alpha)?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] += 1.0 - alpha;
        data[i * n + (i + 1) % n] += alpha;
    }
    StochasticMatrix::new(n, data)
}

/// Companion matrix of `t^s - beta t^(s-q) - alpha`: rows `e_2, ..., e_s`
/// and a last row with `alpha` in the first column and `beta` in column
/// `s - q + 1`.
pub fn realize_type1(q: usize, s: usize, alpha: f64) -> Result<StochasticMatrix> {
    check_unit(alpha)?;
    if !(2 <= q && q < s) || gcd(q as u64, s as u64) != 1 {
        return Err(Error::Domain(format!(
            "need 2 <= q < s with gcd(q, s) = 1, got q = {q}, s = {s}"
        )));
    }
    let mut data = vec![0.0; s * s];
    for i in 0..s - 1 {
        data[i * s + i + 1] = 1.0;
    }
    let last = (s - 1) * s;
    data[last] += alpha;
    data[last + s - q] += 1.0 - alpha;
    StochasticMatrix::new(s, data)
}

/// Characteristic polynomial `det(t I - A)`, ascending and monic, through
/// a Householder reduction to Hessenberg form and the Hessenberg
/// determinant recurrence.
pub fn char_poly(a: &StochasticMatrix) -> Vec<f64> {
    char_poly_dense(&a.to_dmatrix())
}

pub(crate) fn char_poly_dense(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let h = nalgebra::linalg::Hessenberg::new(m.clone()).unpack_h();
    // p[k] = characteristic polynomial of the leading k x k block
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    for k in 0..n {
        // (t - h_kk) p_k
        let prev = &p[k];
        let mut next = vec![0.0; k + 2];
        for (i, c) in prev.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= h[(k, k)] * c;
        }
        // - sum_i h_ik (prod_{j=i+1..k} h_{j,j-1}) p_i
        let mut sub = 1.0;
        for i in (0..k).rev() {
            sub *= h[(i + 1, i)];
            if sub == 0.0 {
                break;
            }
            let coef = h[(i, k)] * sub;
            for (j, c) in p[i].iter().enumerate() {
                next[j] -= coef * c;
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

/// All eigenvalues, from the real Schur form; falls back to the roots of
/// the characteristic polynomial if the QR iteration stalls.
pub fn spectrum(a: &StochasticMatrix) -> Result<RootSet> {
    let m = a.to_dmatrix();
    let roots: Vec<Complex64> = match Schur::try_new(m, f64::EPSILON, 10_000) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => {
            let c: Vec<Complex64> = char_poly(a).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            return all_roots(&c);
        }
    };
    let c = char_poly(a);
    let residual_bound = roots
        .iter()
        .map(|z| crate::ito_poly::horner(&c, *z).norm())
        .fold(0.0, f64::max);
    Ok(RootSet {
        roots,
        residual_bound,
    })
}

/// Matrix with independent rows drawn uniformly from the probability
/// simplex (normalized exponentials), reproducible from `seed`.
pub fn random_stochastic(n: usize, seed: u64) -> StochasticMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_stochastic_with(n, &mut rng)
}

/// As [`random_stochastic`], drawing from a caller-owned generator.
pub fn random_stochastic_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StochasticMatrix {
    assert!(n > 0, "n must be positive");
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n {
        let row: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = row.iter().sum();
        let start = data.len();
        data.extend(row.iter().map(|x| x / total));
        // push the rounding error of the row sum into its largest entry
        let sum: f64 = data[start..].iter().sum();
        let (k, _) = data[start..]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        data[start + k] += 1.0 - sum;
    }
    StochasticMatrix::new(n, data).expect("normalized rows are stochastic")
}

/// How well the explicit matrices reproduce the Type 0 and Type I arcs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FidelityReport {
    /// Worst coefficient error of the Type I characteristic polynomials.
    pub char_poly_error: f64,
    /// Worst distance between Type 0 spectra and `beta + alpha w^k`.
    pub type0_spectrum_error: f64,
    /// Worst distance from an arc sample to its matrix's spectrum.
    pub arc_spectrum_error: f64,
    pub arcs: usize,
}

/// Compares each Type 0 and Type I arc with its realizing matrices: the
/// characteristic polynomial on `alpha_count` uniform parameter values and
/// the spectrum at every arc sample.
pub fn realization_fidelity(arcs: &[KArc], alpha_count: usize) -> Result<FidelityReport> {
    let mut report = FidelityReport::default();
    let nearest = |set: &[Complex64], z: Complex64| {
        set.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min)
    };
    for arc in arcs {
        let poly = &arc.poly;
        let realize = |alpha: f64| match poly.kind {
            ItoType::Type0 => realize_type0(poly.n as usize, alpha),
            _ => realize_type1(poly.q as usize, poly.s as usize, alpha),
        };
        match poly.kind {
            ItoType::Type0 => {
                for alpha in uniform_grid(alpha_count) {
                    let roots = spectrum(&realize(alpha)?)?.roots;
                    for k in 0..poly.n {
                        let z = crate::unit_root(k, poly.n) * alpha + (1.0 - alpha);
                        report.type0_spectrum_error =
                            report.type0_spectrum_error.max(nearest(&roots, z));
                    }
                }
            }
            ItoType::TypeI => {
                for alpha in uniform_grid(alpha_count) {
                    let got = char_poly(&realize(alpha)?);
                    let want = poly.reduced_coefficients(alpha)?;
                    for (a, b) in got.iter().zip(&want) {
                        report.char_poly_error = report.char_poly_error.max((a - b).abs());
                    }
                }
            }
            _ => continue,
        }
        for &(alpha, z) in &arc.samples {
            let roots = spectrum(&realize(alpha)?)?.roots;
            report.arc_spectrum_error = report.arc_spectrum_error.max(nearest(&roots, z));
        }
        report.arcs += 1;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitivity {
    Primitive,
    Imprimitive { period: u64 },
    /// A single vertex without a loop has no closed walks.
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigraphFlags {
    pub irreducible: bool,
    /// `None` for reducible matrices.
    pub primitivity: Option<Primitivity>,
}

impl DigraphFlags {
    pub fn primitive(&self) -> bool {
        self.primitivity == Some(Primitivity::Primitive)
    }
}

/// Irreducibility and primitivity of the digraph of positive entries.
pub fn digraph_flags(a: &StochasticMatrix) -> DigraphFlags {
    let pattern: Vec<bool> = a.data.iter().map(|x| *x > 0.0).collect();
    pattern_flags(a.n, &pattern)
}

/// As [`digraph_flags`], for a row-major zero pattern.
pub fn pattern_flags(n: usize, pattern: &[bool]) -> DigraphFlags {
    assert_eq!(pattern.len(), n * n);
    let edge = |i: usize, j: usize| pattern[i * n + j];
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let e = if forward { edge(u, v) } else { edge(v, u) };
                if e && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|s| *s)
    };
    if !(reach(true) && reach(false)) {
        return DigraphFlags {
            irreducible: false,
            primitivity: None,
        };
    }
    if n == 1 && !edge(0, 0) {
        return DigraphFlags {
            irreducible: true,
            primitivity: Some(Primitivity::Undefined),
        };
    }
    // BFS levels; the period is the gcd of level[u] + 1 - level[v] over edges
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if edge(u, v) && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut period = 0u64;
    for u in 0..n {
        for v in 0..n {
            if edge(u, v) {
                let diff = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs();
                period = gcd(period, diff);
            }
        }
    }
    let primitivity = if period == 1 {
        Primitivity::Primitive
    } else {
        Primitivity::Imprimitive { period }
    };
    DigraphFlags {
        irreducible: true,
        primitivity: Some(primitivity),
    }
}
