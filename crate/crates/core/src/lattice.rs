//! Exact integer and rational linear algebra on lattices.

use std::fmt;

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

pub type IntMatrix = Vec<Vec<BigInt>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

/// A point of the lattice N = Z^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(pub Vec<BigInt>);

/// A point of N_Q = Q^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalVector(pub Vec<BigRational>);

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        LatticeVector(coords)
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); dim])
    }

    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[k] = BigInt::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn to_rational(&self) -> RationalVector {
        RationalVector(self.0.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        LatticeVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn dot(&self, other: &Self) -> BigInt {
        dot(&self.0, &other.0)
    }

    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// The primitive lattice vector on the same ray.
    pub fn primitive(&self) -> Result<Self> {
        let g = self.content();
        if g.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(LatticeVector(self.0.iter().map(|c| c / &g).collect()))
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl RationalVector {
    pub fn zero(dim: usize) -> Self {
        RationalVector(vec![BigRational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn dot_int(&self, v: &LatticeVector) -> BigRational {
        self.0
            .iter()
            .zip(&v.0)
            .fold(BigRational::zero(), |acc, (a, b)| acc + a * BigRational::from_integer(b.clone()))
    }

    pub fn dot(&self, other: &Self) -> BigRational {
        rat_dot(&self.0, &other.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        RationalVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        RationalVector(self.0.iter().map(|a| a * k).collect())
    }

    /// Denominator lcm; the vector scaled by it is integral.
    pub fn denominator(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()))
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    /// The primitive lattice vector spanning the ray through a nonzero rational vector.
    pub fn primitive_ray(&self) -> Result<LatticeVector> {
        let d = self.denominator();
        let scaled: Vec<BigInt> = self.0.iter().map(|c| (c * BigRational::from_integer(d.clone())).to_integer()).collect();
        LatticeVector(scaled).primitive()
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

pub fn rat_dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn int(x: i64) -> BigInt {
    BigInt::from(x)
}

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn to_rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

pub fn to_rat_matrix(m: &[Vec<BigInt>]) -> RatMatrix {
    m.iter().map(|r| r.iter().map(to_rat).collect()).collect()
}

pub fn int_matrix(rows: &[&[i64]]) -> IntMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> IntMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Determinant of a square integer matrix (fraction-free Bareiss elimination).
pub fn determinant(m: &[Vec<BigInt>]) -> Result<BigInt> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
    }
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a: IntMatrix = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

/// Smith normal form: returns (U, D, V) with U * A * V = D, U and V unimodular,
/// D diagonal with nonnegative entries d_1 | d_2 | ...
pub fn smith_normal_form(a: &[Vec<BigInt>]) -> (IntMatrix, IntMatrix, IntMatrix) {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut d: IntMatrix = a.to_vec();
    let mut u = identity(m);
    let mut v = identity(n);
    let mut t = 0;
    while t < m.min(n) {
        // Pick the nonzero entry of minimal absolute value in the lower-right block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !d[i][j].is_zero() && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if d[i][t].is_zero() {
                    continue;
                }
                let q = d[i][t].div_floor(&d[t][t]);
                row_axpy(&mut d, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                if !d[i][t].is_zero() {
                    d.swap(t, i);
                    u.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..n {
                if d[t][j].is_zero() {
                    continue;
                }
                let q = d[t][j].div_floor(&d[t][t]);
                col_axpy(&mut d, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                if !d[t][j].is_zero() {
                    swap_cols(&mut d, t, j);
                    swap_cols(&mut v, t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Divisibility: the pivot must divide the whole remaining block.
            let mut fix = None;
            'outer: for i in t + 1..m {
                for j in t + 1..n {
                    if !(&d[i][j] % &d[t][t]).is_zero() {
                        fix = Some(i);
                        break 'outer;
                    }
                }
            }
            match fix {
                Some(i) => {
                    let one = -BigInt::one();
                    row_axpy(&mut d, t, i, &one);
                    row_axpy(&mut u, t, i, &one);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    (u, d, v)
}

/// Nonzero invariant factors of an integer matrix.
pub fn smith_invariants(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let (_, d, _) = smith_normal_form(a);
    let k = d.len().min(d.first().map_or(0, |r| r.len()));
    (0..k).map(|i| d[i][i].clone()).filter(|x| !x.is_zero()).collect()
}

fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

fn swap_cols(m: &mut IntMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

// row[i] -= q * row[t]
fn row_axpy(m: &mut IntMatrix, i: usize, t: usize, q: &BigInt) {
    let src = m[t].clone();
    for (x, s) in m[i].iter_mut().zip(src) {
        *x -= q * s;
    }
}

// col[j] -= q * col[t]
fn col_axpy(m: &mut IntMatrix, j: usize, t: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let s = row[t].clone();
        row[j] -= q * s;
    }
}

/// Reduced row echelon form over Q. Returns the matrix and its pivot columns.
pub fn rref(m: &[Vec<BigRational>]) -> (RatMatrix, Vec<usize>) {
    let mut a: RatMatrix = m.to_vec();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &[Vec<BigRational>]) -> usize {
    rref(m).1.len()
}

pub fn int_rank(m: &[Vec<BigInt>]) -> usize {
    rank(&to_rat_matrix(m))
}

/// Basis of the right kernel {x : M x = 0}, one vector per free column.
pub fn nullspace(m: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    let (r, pivots) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); cols];
            x[f] = BigRational::one();
            for (row, &p) in pivots.iter().enumerate() {
                x[p] = -r[row][f].clone();
            }
            x
        })
        .collect()
}

/// Integer kernel basis, each vector primitive.
pub fn int_nullspace(m: &[Vec<BigInt>], cols: usize) -> Vec<LatticeVector> {
    nullspace(&to_rat_matrix(m), cols)
        .into_iter()
        .map(|v| RationalVector(v).primitive_ray().expect("kernel basis vectors are nonzero"))
        .collect()
}

/// Solves M x = b over Q. Free variables are set to zero, so the answer is the
/// unique solution supported on the lowest-index pivot columns.
pub fn solve_exact(m: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let aug: RatMatrix = m
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = r[row][cols].clone();
    }
    Some(x)
}

/// Whether M x = b has an integer solution.
pub fn int_solvable(m: &[Vec<BigInt>], b: &[BigInt]) -> bool {
    // U M V = D; M x = b  <=>  D y = U b with x = V y.
    let (u, d, _) = smith_normal_form(m);
    let ub: Vec<BigInt> = u.iter().map(|row| dot(row, b)).collect();
    let cols = m.first().map_or(0, |r| r.len());
    for (i, val) in ub.iter().enumerate() {
        let di = if i < cols { d[i][i].clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !val.is_zero() {
                return false;
            }
        } else if !(val % &di).is_zero() {
            return false;
        }
    }
    true
}

/// Completes a primitive vector to a unimodular basis; returns a matrix whose
/// first row is `v`.
pub fn unimodular_completion(v: &LatticeVector) -> Result<IntMatrix> {
    if !v.is_primitive() {
        return Err(Error::Invalid(format!("{v} is not primitive")));
    }
    let n = v.dim();
    // v as a 1 x n matrix: U v V = (1,0..0), so v = e_1 V^{-1}; rows of V^{-1} form the basis.
    let (_, _, vmat) = smith_normal_form(std::slice::from_ref(&v.0));
    let inv = unimodular_inverse(&vmat);
    let mut basis = inv;
    basis[0] = v.0.clone();
    debug_assert_eq!(determinant(&basis).map(|d| d.abs()), Ok(BigInt::one()));
    let _ = n;
    Ok(basis)
}

/// Inverse of a unimodular integer matrix.
pub fn unimodular_inverse(m: &[Vec<BigInt>]) -> IntMatrix {
    let n = m.len();
    let mut aug: RatMatrix = to_rat_matrix(m)
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    aug = rref(&aug).0;
    aug.iter().map(|r| r[n..].iter().map(|x| x.to_integer()).collect()).collect()
}

/// Inverse of a square rational matrix, if invertible.
pub fn rat_inverse(m: &[Vec<BigRational>]) -> Option<RatMatrix> {
    let n = m.len();
    let aug: RatMatrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(r.iter().map(|row| row[n..].to_vec()).collect())
}
