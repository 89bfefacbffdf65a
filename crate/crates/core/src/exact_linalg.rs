//! Exact rational scalars and matrices.
//!
//! Everything here is exact: determinants and ranks use fraction-free
//! (Bareiss) elimination on integer matrices obtained by clearing row
//! denominators; inverses use Gauss-Jordan over the rationals.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number (always reduced, positive denominator).
pub type Rat = BigRational;

/// Integer coordinate vector.
pub type IntVec = Vec<BigInt>;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or `p`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rat::from_integer(p))
        }
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Floor of a rational as an integer.
pub fn floor_rat(r: &Rat) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Ceiling of a rational as an integer.
pub fn ceil_rat(r: &Rat) -> BigInt {
    -((-r.numer()).div_floor(r.denom()))
}

/// Serde adapter writing a `Rat` as a `"p/q"` string; accepts strings or integers.
pub mod rat_serde {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RatRepr {
        Str(String),
        Int(i64),
    }

    impl RatRepr {
        pub(crate) fn into_rat<E: serde::de::Error>(self) -> std::result::Result<Rat, E> {
            match self {
                RatRepr::Str(s) => parse_rat(&s).map_err(E::custom),
                RatRepr::Int(i) => Ok(int(i)),
            }
        }
    }

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        RatRepr::deserialize(d)?.into_rat()
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn new(rows: usize, cols: usize, data: Vec<Rat>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RatMat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn diag(entries: &[Rat]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(RatMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Builds from integer rows. Panics on ragged input (intended for literals).
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let v = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        Self::from_rows(v).expect("ragged literal matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, c: &Rat) -> Self {
        RatMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    /// Block diagonal matrix `diag(a, b)`.
    pub fn block_diag(a: &RatMat, b: &RatMat) -> Self {
        let mut m = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                m[(i, j)] = a[(i, j)].clone();
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                m[(a.rows + i, a.cols + j)] = b[(i, j)].clone();
            }
        }
        m
    }

    /// `x^T M x` for an integer vector `x`.
    pub fn eval_i64(&self, x: &[i64]) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..self.rows {
            if x[i] == 0 {
                continue;
            }
            let mut s = Rat::zero();
            for j in 0..self.cols {
                if x[j] != 0 {
                    s += &self[(i, j)] * BigInt::from(x[j]);
                }
            }
            acc += s * BigInt::from(x[i]);
        }
        acc
    }

    /// `M v` for an integer vector `v`.
    pub fn mul_vec_i64(&self, v: &[i64]) -> Vec<Rat> {
        (0..self.rows)
            .map(|i| {
                let mut s = Rat::zero();
                for j in 0..self.cols {
                    if v[j] != 0 {
                        s += &self[(i, j)] * BigInt::from(v[j]);
                    }
                }
                s
            })
            .collect()
    }

    /// Integer matrix with each row scaled by the lcm of its denominators,
    /// together with the scaling factors.
    fn clear_row_denominators(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let mut out = Vec::with_capacity(self.rows);
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let l = self.row(i).iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            out.push(self.row(i).iter().map(|x| (x * &l).to_integer()).collect());
            scales.push(l);
        }
        (out, scales)
    }

    pub fn rank(&self) -> usize {
        let (m, _) = self.clear_row_denominators();
        bareiss(m).0
    }

    pub fn det(&self) -> Result<Rat> {
        if !self.is_square() {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let (m, scales) = self.clear_row_denominators();
        let (_, d) = bareiss(m);
        let s = scales.iter().fold(BigInt::one(), |acc, x| acc * x);
        Ok(Rat::new(d, s))
    }

    /// Inverse and determinant; errors on a singular matrix.
    pub fn inverse_det(&self) -> Result<(RatMat, Rat)> {
        let det = self.det()?;
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !a[(r, c)].is_zero()).ok_or(Error::Singular)?;
            if p != c {
                a.swap_rows(p, c);
                inv.swap_rows(p, c);
            }
            let piv = a[(c, c)].recip();
            for j in 0..n {
                a[(c, j)] = &a[(c, j)] * &piv;
                inv[(c, j)] = &inv[(c, j)] * &piv;
            }
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let f = a[(r, c)].clone();
                for j in 0..n {
                    let t = &a[(c, j)] * &f;
                    a[(r, j)] -= t;
                    let t = &inv[(c, j)] * &f;
                    inv[(r, j)] -= t;
                }
            }
        }
        Ok((inv, det))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Least common multiple of all entry denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }
}

impl Index<(usize, usize)> for RatMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &RatMat {
    type Output = RatMat;
    fn mul(self, rhs: &RatMat) -> RatMat {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = RatMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for RatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rat).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for RatMat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> =
            (0..self.rows).map(|i| self.row(i).iter().map(format_rat).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatMat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<rat_serde::RatRepr>> = Vec::deserialize(d)?;
        let rows = raw
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.into_rat()).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        RatMat::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Fraction-free elimination. Returns (rank, determinant); the determinant
/// is only meaningful for square input and is zero when rank-deficient.
fn bareiss(mut m: Vec<Vec<BigInt>>) -> (usize, BigInt) {
    let rows = m.len();
    if rows == 0 {
        return (0, BigInt::one());
    }
    let cols = m[0].len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        if p != r {
            m.swap(p, r);
            sign = -sign;
        }
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    let det = if r == rows && rows == cols { sign * prev } else { BigInt::zero() };
    (r, det)
}

/// Rank of an integer matrix given as rows.
pub fn int_rank(rows: &[Vec<BigInt>]) -> usize {
    bareiss(rows.to_vec()).0
}

/// Determinant of a square integer matrix given as rows.
pub fn int_det(rows: &[Vec<BigInt>]) -> BigInt {
    bareiss(rows.to_vec()).1
}

/// Exact `L D L^T` factorisation of a symmetric matrix.
pub fn ldlt(q: &RatMat) -> Result<(RatMat, RatMat)> {
    if !q.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = q.rows();
    let mut l = RatMat::identity(n);
    let mut d = vec![Rat::zero(); n];
    for j in 0..n {
        let mut dj = q[(j, j)].clone();
        for k in 0..j {
            dj -= &l[(j, k)] * &l[(j, k)] * &d[k];
        }
        if dj.is_zero() {
            return Err(Error::SingularPrincipalMinor);
        }
        for i in j + 1..n {
            let mut s = q[(i, j)].clone();
            for k in 0..j {
                s -= &l[(i, k)] * &l[(j, k)] * &d[k];
            }
            l[(i, j)] = s / &dj;
        }
        d[j] = dj;
    }
    Ok((l, RatMat::diag(&d)))
}

/// Column-style Hermite normal form of an integer matrix with full row rank.
///
/// Returns the `n x n` lower-triangular `H` with positive diagonal and
/// `0 <= H[i][j] < H[i][i]` for `j < i`, whose columns span the same lattice
/// as the columns of `m`.
pub fn hnf(m: &[Vec<BigInt>]) -> Result<Vec<Vec<BigInt>>> {
    let n = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension("ragged rows".into()));
    }
    if cols < n {
        return Err(Error::NotFullRank);
    }
    // Work column-wise: a[j] is column j.
    let mut a: Vec<Vec<BigInt>> = (0..cols).map(|j| (0..n).map(|i| m[i][j].clone()).collect()).collect();
    for i in 0..n {
        for j in i + 1..cols {
            if a[j][i].is_zero() {
                continue;
            }
            let x = a[i][i].clone();
            let y = a[j][i].clone();
            let e = x.extended_gcd(&y);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let xg = &x / &g;
            let yg = &y / &g;
            let ci = a[i].clone();
            let cj = a[j].clone();
            a[i] = ci.iter().zip(&cj).map(|(p, q)| &s * p + &t * q).collect();
            a[j] = ci.iter().zip(&cj).map(|(p, q)| &xg * q - &yg * p).collect();
        }
        if a[i][i].is_zero() {
            return Err(Error::NotFullRank);
        }
        if a[i][i].is_negative() {
            a[i] = a[i].iter().map(|v| -v).collect();
        }
        for j in 0..i {
            let q = a[j][i].div_floor(&a[i][i]);
            if !q.is_zero() {
                let ci = a[i].clone();
                for (v, w) in a[j].iter_mut().zip(&ci) {
                    *v -= &q * w;
                }
            }
        }
    }
    Ok((0..n).map(|i| (0..n).map(|j| a[j][i].clone()).collect()).collect())
}
