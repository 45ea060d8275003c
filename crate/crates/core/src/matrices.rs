//! Integer matrices on the positive cone: fold and unfold matrices, products,
//! Perron-Frobenius data and the projective size of column cones.
//!
//! Matrix indices in the public constructors are 1-based, as in the usual
//! notation `T_ij`, `M_ij`.

use crate::error::{OslError, Result};
use crate::numeric::{self, default_precision, Float, Q, Z};
use num::{BigInt, One, Signed, Zero};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<Z>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

impl IntMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = BigInt::one();
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        IntMatrix { dim, entries: vec![BigInt::zero(); dim * dim] }
    }

    pub fn from_rows(rows: Vec<Vec<Z>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(OslError::DimensionMismatch { expected: dim, found: row.len() });
            }
            entries.extend(row);
        }
        Ok(IntMatrix { dim, entries })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
            .expect("square literal")
    }

    /// Permutation matrix with `P e_k = e_{perm[k]}` (0-based images).
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = Self::zeros(n);
        for (k, &p) in perm.iter().enumerate() {
            m.set(p, k, BigInt::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Z {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Z) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Z>> {
        (0..self.dim).map(|i| self.entries[i * self.dim..(i + 1) * self.dim].to_vec()).collect()
    }

    pub fn column(&self, k: usize) -> Vec<Z> {
        (0..self.dim).map(|i| self.get(i, k).clone()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.dim != other.dim {
            return Err(OslError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * n + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> IntMatrix {
        let mut acc = Self::identity(self.dim);
        for _ in 0..k {
            acc = acc.mul(self).expect("same dimension");
        }
        acc
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|x| !x.is_negative())
    }

    pub fn apply_ints(&self, v: &[Z]) -> Result<Vec<Z>> {
        if v.len() != self.dim {
            return Err(OslError::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok((0..self.dim)
            .map(|i| (0..self.dim).fold(BigInt::zero(), |acc, j| acc + self.get(i, j) * &v[j]))
            .collect())
    }

    pub fn apply_rationals(&self, v: &[Q]) -> Result<Vec<Q>> {
        if v.len() != self.dim {
            return Err(OslError::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        // Over a common denominator the product is integer.
        let den = v.iter().fold(BigInt::one(), |d, x| num::integer::lcm(d, x.denom().clone()));
        let nums: Vec<Z> = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
        Ok(self.apply_ints(&nums)?.into_iter().map(|n| Q::new(n, den.clone())).collect())
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> Z {
        let n = self.dim;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Exact inverse when the determinant is a unit.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        let n = self.dim;
        let det = self.determinant();
        if det.abs() != BigInt::one() {
            return None;
        }
        let mut a: Vec<Vec<Q>> = self.rows().into_iter().map(|r| r.into_iter().map(Q::from_integer).collect()).collect();
        let mut inv: Vec<Vec<Q>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero())?;
            a.swap(c, p);
            inv.swap(c, p);
            let piv = a[c][c].clone();
            for j in 0..n {
                a[c][j] = &a[c][j] / &piv;
                inv[c][j] = &inv[c][j] / &piv;
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c].clone();
                    for j in 0..n {
                        let t = &f * &a[c][j];
                        a[r][j] -= t;
                        let t = &f * &inv[c][j];
                        inv[r][j] -= t;
                    }
                }
            }
        }
        let rows = inv.into_iter().map(|r| r.into_iter().map(|x| x.to_integer()).collect()).collect();
        IntMatrix::from_rows(rows).ok()
    }
}

/// Vector in the closed positive cone with exact rational entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PosVector {
    entries: Vec<Q>,
    degenerate: bool,
}

impl PosVector {
    /// Strictly positive vector of dimension at least 2.
    pub fn new(entries: Vec<Q>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(OslError::DimensionMismatch { expected: 2, found: entries.len() });
        }
        if entries.iter().any(|x| !x.is_positive()) {
            return Err(OslError::NonPositive);
        }
        Ok(PosVector { entries, degenerate: false })
    }

    /// Nonnegative vector; a zero coordinate sets the degenerate flag.
    pub fn nonnegative(entries: Vec<Q>) -> Result<Self> {
        if entries.iter().any(|x| x.is_negative()) {
            return Err(OslError::NonPositive);
        }
        let degenerate = entries.iter().any(|x| x.is_zero());
        Ok(PosVector { entries, degenerate })
    }

    pub fn from_ratios(pairs: &[(i64, i64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(n, d)| numeric::q(n, d)).collect())
    }

    pub fn entries(&self) -> &[Q] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Q> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn sum(&self) -> Q {
        numeric::sum(&self.entries)
    }

    pub fn min_entry(&self) -> Q {
        self.entries.iter().min().cloned().unwrap_or_else(Q::zero)
    }
}

/// `T_ij`: identity with -1 at (i, j).
pub fn fold_matrix(i: usize, j: usize, n: usize) -> Result<IntMatrix> {
    check_pair(i, j, n)?;
    let mut m = IntMatrix::identity(n);
    m.set(i - 1, j - 1, BigInt::from(-1));
    Ok(m)
}

/// `M_ij = T_ij^{-1}`: identity with +1 at (i, j).
pub fn unfold_matrix(i: usize, j: usize, n: usize) -> Result<IntMatrix> {
    check_pair(i, j, n)?;
    let mut m = IntMatrix::identity(n);
    m.set(i - 1, j - 1, BigInt::one());
    Ok(m)
}

fn check_pair(i: usize, j: usize, n: usize) -> Result<()> {
    if i == j || i == 0 || j == 0 || i > n || j > n {
        return Err(OslError::InvalidIndices { i, j, n });
    }
    Ok(())
}

pub fn apply(m: &IntMatrix, v: &PosVector) -> Result<PosVector> {
    PosVector::nonnegative(m.apply_rationals(v.entries())?)
}

pub fn normalize(v: &PosVector) -> Result<PosVector> {
    let s = v.sum();
    if s.is_zero() {
        return Err(OslError::ZeroVector);
    }
    PosVector::nonnegative(v.entries().iter().map(|x| x / &s).collect())
}

/// Normalizes a raw nonnegative rational vector to sum one.
pub fn normalize_entries(v: &[Q]) -> Result<Vec<Q>> {
    let s = numeric::sum(v);
    if s.is_zero() || v.iter().any(|x| x.is_negative()) {
        return Err(OslError::ZeroVector);
    }
    Ok(v.iter().map(|x| x / &s).collect())
}

pub fn is_positive(m: &IntMatrix) -> bool {
    m.entries.iter().all(|x| x.is_positive())
}

#[derive(Clone, Debug)]
pub struct PFData {
    pub eigenvalue: Float,
    pub eigenvector: Vec<Float>,
    pub residual: Float,
    pub precision: usize,
    pub iterations: usize,
}

impl PFData {
    pub fn eigenvector_f64(&self) -> Vec<f64> {
        self.eigenvector.iter().map(numeric::float_to_f64).collect()
    }

    pub fn eigenvalue_f64(&self) -> f64 {
        numeric::float_to_f64(&self.eigenvalue)
    }

    /// ℓ¹ distance from the eigenvector to a rational point, on the float backend.
    pub fn l1_distance_to(&self, target: &[Q]) -> Float {
        let bits = self.precision;
        self.eigenvector
            .iter()
            .zip(target)
            .fold(numeric::float_zero(bits), |acc, (a, b)| {
                let d = a.clone() - numeric::rational_to_float(b, bits);
                acc + if d < numeric::float_zero(bits) { -d } else { d }
            })
    }
}

pub const PF_ITERATION_CAP: usize = 100_000;
const PF_SQUARINGS: usize = 6;

pub fn pf_eigen(m: &IntMatrix) -> Result<PFData> {
    pf_eigen_with_precision(m, default_precision())
}

/// Power iteration on a normalized power of `m`, Rayleigh-quotient eigenvalue,
/// stopping once `‖Mv − λv‖₁ < 2^{-bits/2}`.
pub fn pf_eigen_with_precision(m: &IntMatrix, bits: usize) -> Result<PFData> {
    if !is_positive(m) {
        return Err(OslError::NotPrimitive);
    }
    let bits = bits.max(64);
    let work = bits + 32;
    let n = m.dim();
    let mf: Vec<Vec<Float>> = (0..n)
        .map(|i| (0..n).map(|j| numeric::int_to_float(m.get(i, j), work)).collect())
        .collect();
    let mut b = mf.clone();
    for _ in 0..PF_SQUARINGS {
        b = float_mat_mul(&b, &b, work);
        let mx = b.iter().flatten().max_by(|x, y| x.partial_cmp(y).unwrap()).cloned().unwrap();
        for row in b.iter_mut() {
            for x in row.iter_mut() {
                *x = x.clone() / mx.clone();
            }
        }
    }
    let tol = Float::ONE.with_precision(work).value() >> (bits / 2) as isize;
    let mut v: Vec<Float> = vec![numeric::int_to_float(&BigInt::one(), work) / numeric::int_to_float(&BigInt::from(n), work); n];
    let mut iterations = 0;
    loop {
        let (lambda, residual) = rayleigh_residual(&mf, &v, work);
        if residual < tol {
            return Ok(PFData {
                eigenvalue: lambda.with_precision(bits).value(),
                eigenvector: v.into_iter().map(|x| x.with_precision(bits).value()).collect(),
                residual: residual.with_precision(bits).value(),
                precision: bits,
                iterations,
            });
        }
        if iterations >= PF_ITERATION_CAP {
            return Err(OslError::Precision { iterations });
        }
        v = l1_normalize(float_mat_vec(&b, &v, work), work);
        iterations += 1;
    }
}

fn float_mat_mul(a: &[Vec<Float>], b: &[Vec<Float>], bits: usize) -> Vec<Vec<Float>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(numeric::float_zero(bits), |acc, k| acc + a[i][k].clone() * b[k][j].clone()))
                .collect()
        })
        .collect()
}

fn float_mat_vec(a: &[Vec<Float>], v: &[Float], bits: usize) -> Vec<Float> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(numeric::float_zero(bits), |acc, (x, y)| acc + x.clone() * y.clone()))
        .collect()
}

fn l1_normalize(v: Vec<Float>, bits: usize) -> Vec<Float> {
    let s = v.iter().fold(numeric::float_zero(bits), |acc, x| acc + x.clone());
    v.into_iter().map(|x| x / s.clone()).collect()
}

fn rayleigh_residual(m: &[Vec<Float>], v: &[Float], bits: usize) -> (Float, Float) {
    let mv = float_mat_vec(m, v, bits);
    let num = v.iter().zip(&mv).fold(numeric::float_zero(bits), |acc, (a, b)| acc + a.clone() * b.clone());
    let den = v.iter().fold(numeric::float_zero(bits), |acc, a| acc + a.clone() * a.clone());
    let lambda = num / den;
    let zero = numeric::float_zero(bits);
    let residual = mv.iter().zip(v).fold(numeric::float_zero(bits), |acc, (a, b)| {
        let d = a.clone() - lambda.clone() * b.clone();
        acc + if d < zero { -d } else { d }
    });
    (lambda, residual)
}

/// Maximal ℓ¹ distance between the normalized columns of `m`.
pub fn cone_diameter(m: &IntMatrix) -> Result<Q> {
    if !m.is_nonnegative() {
        return Err(OslError::NonPositive);
    }
    let n = m.dim();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let c: Vec<Q> = m.column(k).into_iter().map(Q::from_integer).collect();
        cols.push(normalize_entries(&c).map_err(|_| OslError::ZeroColumn(k))?);
    }
    let mut best = Q::zero();
    for a in 0..n {
        for b in a + 1..n {
            let d = cols[a].iter().zip(&cols[b]).fold(Q::zero(), |acc, (x, y)| acc + (x - y).abs());
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}
