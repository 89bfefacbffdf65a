//! Minkowski reduction (n <= 4), Schiemann reduction (n = 3) and the
//! constraint catalog describing Schiemann's domain in `R^6`.
//!
//! Ternary forms are embedded as `(q11, q22, q33, q12, q13, q23)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cones::{rank_of, Ray};
use crate::error::{Error, Result};
use crate::exact_linalg::{format_rat, int, int_det, rat_serde, Rat, RatMat};
use crate::forms::{enumerate_up_to, gram, is_positive_definite, EnumerationDomain, LatticeBasis, QuadraticForm};

/// A ternary form as the vector `(q11, q22, q33, q12, q13, q23)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form3Vec(pub [Rat; 6]);

impl Form3Vec {
    pub fn from_i64(v: [i64; 6]) -> Self {
        Form3Vec(v.map(int))
    }

    pub fn from_form(q: &QuadraticForm) -> Result<Self> {
        if q.dim() != 3 {
            return Err(Error::Dimension(format!("expected a ternary form, got dim {}", q.dim())));
        }
        let e = |i, j| q.entry(i, j).clone();
        Ok(Form3Vec([e(0, 0), e(1, 1), e(2, 2), e(0, 1), e(0, 2), e(1, 2)]))
    }

    pub fn to_form(&self) -> QuadraticForm {
        let [a, b, c, d, e, f] = self.0.clone();
        let m = RatMat::from_rows(vec![
            vec![a, d.clone(), e.clone()],
            vec![d, b, f.clone()],
            vec![e, f, c],
        ])
        .expect("3x3");
        QuadraticForm::new(m).expect("symmetric by construction")
    }

    /// `c . v` for an integer functional `c`.
    pub fn dot(&self, c: &[i64]) -> Rat {
        self.0.iter().zip(c).map(|(x, &ci)| x * BigInt::from(ci)).sum()
    }
}

impl Serialize for Form3Vec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.0.iter().map(format_rat).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Form3Vec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "rat_serde")] Rat);
        let v: Vec<W> = Vec::deserialize(d)?;
        let v: Vec<Rat> = v.into_iter().map(|w| w.0).collect();
        let arr: [Rat; 6] = v.try_into().map_err(|_| serde::de::Error::custom("expected 6 entries"))?;
        Ok(Form3Vec(arr))
    }
}

/// A homogeneous linear inequality `c . v >= 0` (or `> 0`) on form coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LinearInequality {
    pub coeffs: Vec<i64>,
    pub strict: bool,
}

/// Index of coordinate `q_ij` in the embedding: diagonal first, then `i < j`
/// in row-major order.
pub fn coord_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        return i;
    }
    let mut k = n;
    for a in 0..n {
        for b in a + 1..n {
            if (a, b) == (i, j) {
                return k;
            }
            k += 1;
        }
    }
    unreachable!()
}

/// Form coordinates in the embedding order.
pub fn form_coords(q: &QuadraticForm) -> Vec<Rat> {
    let n = q.dim();
    let mut v: Vec<Rat> = (0..n).map(|i| q.entry(i, i).clone()).collect();
    for a in 0..n {
        for b in a + 1..n {
            v.push(q.entry(a, b).clone());
        }
    }
    v
}

/// Functional `c` with `c . coords(q) = q(x)`.
pub fn value_functional(x: &[i64]) -> Vec<i64> {
    let n = x.len();
    let mut c = vec![0; n * (n + 1) / 2];
    for i in 0..n {
        c[i] = x[i] * x[i];
    }
    for a in 0..n {
        for b in a + 1..n {
            c[coord_index(n, a, b)] = 2 * x[a] * x[b];
        }
    }
    c
}

/// The finite Minkowski inequality system for `n <= 4`: `q11 > 0`,
/// `q_kk <= q_{k+1,k+1}`, and `q(x) >= q_kk` for all `x` with entries in
/// `{-1, 0, 1}`, `x_k = 1`, `x_j = 0` for `j > k`, `x != e_k`.
pub fn minkowski_conditions(n: usize) -> Result<Vec<LinearInequality>> {
    if n == 0 || n > 4 {
        return Err(Error::MinkowskiDimension(n));
    }
    let m = n * (n + 1) / 2;
    let mut out = Vec::new();
    let mut first = vec![0; m];
    first[0] = 1;
    out.push(LinearInequality { coeffs: first, strict: true });
    for k in 0..n - 1 {
        let mut c = vec![0; m];
        c[k + 1] = 1;
        c[k] = -1;
        out.push(LinearInequality { coeffs: c, strict: false });
    }
    for k in 0..n {
        let count = 3usize.pow(k as u32);
        for code in 0..count {
            let mut x = vec![0i64; n];
            let mut r = code;
            for xi in x.iter_mut().take(k) {
                *xi = (r % 3) as i64 - 1;
                r /= 3;
            }
            x[k] = 1;
            if x.iter().take(k).all(|&v| v == 0) {
                continue;
            }
            let mut c = value_functional(&x);
            c[k] -= 1;
            out.push(LinearInequality { coeffs: c, strict: false });
        }
    }
    Ok(out)
}

fn holds(ineq: &LinearInequality, coords: &[Rat]) -> bool {
    let s: Rat = coords.iter().zip(&ineq.coeffs).map(|(x, &c)| x * BigInt::from(c)).sum();
    if ineq.strict {
        s.is_positive()
    } else {
        !s.is_negative()
    }
}

pub fn is_minkowski_reduced(q: &QuadraticForm) -> Result<bool> {
    let conds = minkowski_conditions(q.dim())?;
    let coords = form_coords(q);
    Ok(conds.iter().all(|c| holds(c, &coords)))
}

/// Successive minima `lambda_1 <= ... <= lambda_n` with witnessing vectors,
/// chosen greedily in enumeration order (lexicographic from the last coordinate).
pub fn successive_minima(q: &QuadraticForm) -> Result<Vec<(Vec<i64>, Rat)>> {
    let n = q.dim();
    let bound = (0..n).map(|i| q.entry(i, i).clone()).max().unwrap_or_else(Rat::zero);
    let mut cands: Vec<(Vec<i64>, Rat)> = enumerate_up_to(q, &bound, EnumerationDomain::zstar())?.collect();
    cands.sort_by(|a, b| a.1.cmp(&b.1));
    let mut chosen: Vec<(Vec<i64>, Rat)> = Vec::new();
    let mut rows: Vec<Ray> = Vec::new();
    for (x, v) in cands {
        rows.push(x.clone());
        if rank_of(&rows) == rows.len() {
            chosen.push((x, v));
            if chosen.len() == n {
                break;
            }
        } else {
            rows.pop();
        }
    }
    if chosen.len() < n {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(chosen)
}

/// Basis of successive minima for `n <= 3`; its Gram form is Minkowski reduced.
///
/// Ties among shortest candidates are broken by enumeration order, i.e.
/// lexicographically from the last coordinate, over sign-normalised vectors.
pub fn greedy_reduce_basis(basis: &LatticeBasis) -> Result<LatticeBasis> {
    let n = basis.dim();
    if n > 3 {
        return Err(Error::GreedyDimension(n));
    }
    let q = gram(basis);
    let mins = successive_minima(&q)?;
    let b: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| BigInt::from(mins[j].0[i])).collect()).collect();
    if int_det(&b).abs() != BigInt::from(1) {
        return Err(Error::GreedyDimension(n));
    }
    let bm = RatMat::from_rows(b.into_iter().map(|r| r.into_iter().map(Rat::from_integer).collect()).collect())?;
    LatticeBasis::new(basis.matrix() * &bm)
}

/// Facet-condition implication pairs `(c, d)`: `c . f = 0  =>  d . f >= 0`.
pub fn implication_pairs() -> Vec<(Ray, Ray)> {
    vec![
        (vec![0, 0, 0, 1, 0, 0], vec![0, 0, 0, 0, 0, 1]),
        (vec![0, 0, 0, 0, 1, 0], vec![0, 0, 0, 0, 0, 1]),
        (vec![-1, 1, 0, 0, 0, 0], vec![0, 0, 0, 0, 1, -1]),
        (vec![-1, 1, 0, 0, 0, 0], vec![0, 0, 0, 0, 1, 1]),
        (vec![0, -1, 1, 0, 0, 0], vec![0, 0, 0, 1, -1, 0]),
        (vec![1, 1, 0, -2, -2, 2], vec![-1, 0, 0, 1, 2, 0]),
        (vec![1, 0, 0, -2, 0, 0], vec![0, 0, 0, 0, -1, 2]),
        (vec![1, 0, 0, 0, -2, 0], vec![0, 0, 0, -1, 0, 2]),
        (vec![0, 1, 0, 0, 0, -2], vec![0, 0, 0, -1, 2, 0]),
    ]
}

/// Whether a ternary form (as a coordinate vector) is Schiemann reduced.
pub fn is_schiemann_reduced(v: &Form3Vec) -> bool {
    let coords = v.0.to_vec();
    let mink = minkowski_conditions(3).expect("n = 3");
    if !mink.iter().all(|c| holds(c, &coords)) {
        return false;
    }
    let [f11, f22, _f33, f12, f13, f23] = &v.0;
    if f12.is_negative() || f13.is_negative() {
        return false;
    }
    if (f23 * int(2) + f22).is_negative() || (f23 * int(2) + f22).is_zero() {
        return false;
    }
    let _ = f11;
    implication_pairs().iter().all(|(c, d)| !v.dot(c).is_zero() || !v.dot(d).is_negative())
}

/// The unique Schiemann-reduced representative of a positive definite ternary form.
///
/// Every Minkowski-reduced representative has diagonal equal to the
/// successive minima, so all of them arise from triples of vectors of those
/// exact values forming a unimodular matrix; the Schiemann-reduced ones are
/// filtered from that finite list.
pub fn schiemann_reduce(q: &QuadraticForm) -> Result<Form3Vec> {
    let reps = schiemann_candidates(q)?;
    if reps.len() != 1 {
        return Err(Error::UniquenessViolation(reps.len()));
    }
    Ok(reps.into_iter().next().expect("one element"))
}

/// All distinct Schiemann-reduced forms equivalent to `q` (should be exactly one).
pub fn schiemann_candidates(q: &QuadraticForm) -> Result<BTreeSet<Form3Vec>> {
    if q.dim() != 3 {
        return Err(Error::Dimension(format!("expected a ternary form, got dim {}", q.dim())));
    }
    if !is_positive_definite(q) {
        return Err(Error::NotPositiveDefinite);
    }
    let mins = successive_minima(q)?;
    let lam: Vec<Rat> = mins.iter().map(|m| m.1.clone()).collect();
    let all: Vec<(Vec<i64>, Rat)> = enumerate_up_to(q, &lam[2], EnumerationDomain::full())?
        .filter(|(x, _)| x.iter().any(|&v| v != 0))
        .collect();
    let with = |t: &Rat| all.iter().filter(|(_, v)| v == t).map(|(x, _)| x.clone()).collect::<Vec<_>>();
    let (s1, s2, s3) = (with(&lam[0]), with(&lam[1]), with(&lam[2]));
    let mut out = BTreeSet::new();
    for b1 in &s1 {
        for b2 in &s2 {
            let cross = [
                b1[1] * b2[2] - b1[2] * b2[1],
                b1[2] * b2[0] - b1[0] * b2[2],
                b1[0] * b2[1] - b1[1] * b2[0],
            ];
            if cross == [0, 0, 0] {
                continue;
            }
            for b3 in &s3 {
                let det = cross[0] * b3[0] + cross[1] * b3[1] + cross[2] * b3[2];
                if det.abs() != 1 {
                    continue;
                }
                let b = RatMat::from_i64(&[
                    &[b1[0], b2[0], b3[0]],
                    &[b1[1], b2[1], b3[1]],
                    &[b1[2], b2[2], b3[2]],
                ]);
                let v = Form3Vec::from_form(&q.transform(&b))?;
                if is_schiemann_reduced(&v) {
                    out.insert(v);
                }
            }
        }
    }
    Ok(out)
}

/// Closed description of the closure of Schiemann's domain.
pub fn closure_system() -> Vec<Ray> {
    vec![
        vec![1, 0, 0, 0, 0, 0],
        vec![-1, 1, 0, 0, 0, 0],
        vec![0, -1, 1, 0, 0, 0],
        vec![0, 0, 0, 1, 0, 0],
        vec![1, 0, 0, -2, 0, 0],
        vec![0, 0, 0, 0, 1, 0],
        vec![1, 0, 0, 0, -2, 0],
        vec![0, 1, 0, 0, 0, 2],
        vec![0, 1, 0, 0, 0, -2],
        vec![1, 1, 0, -2, -2, 2],
    ]
}

/// The eleven edges of the closed Schiemann domain.
pub fn schiemann_edges() -> Vec<Ray> {
    vec![
        vec![0, 0, 1, 0, 0, 0],
        vec![0, 2, 2, 0, 0, 1],
        vec![0, 2, 2, 0, 0, -1],
        vec![2, 2, 2, 0, 0, 1],
        vec![2, 2, 2, 0, 0, -1],
        vec![2, 2, 2, 0, 1, 1],
        vec![2, 2, 2, 0, 1, -1],
        vec![2, 2, 2, 1, 0, 1],
        vec![2, 2, 2, 1, 0, -1],
        vec![2, 2, 2, 1, 1, 0],
        vec![2, 2, 2, 1, 1, 1],
    ]
}

/// The sets describing Schiemann's domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintCatalog {
    /// Closed inequalities (conditions 1a and 1b without the strict ones).
    pub a_set: Vec<Ray>,
    /// Strict inequalities `q11 > 0`, `q22 + 2 q23 > 0`.
    pub b_set: Vec<Ray>,
    /// Facet implications.
    pub c_pairs: Vec<(Ray, Ray)>,
    /// Edges of the closure.
    pub m_edges: Vec<Ray>,
}

pub fn catalog() -> ConstraintCatalog {
    let strict_first = vec![1, 0, 0, 0, 0, 0];
    let superseded = vec![0, 1, 0, 0, 0, 2];
    let mut a_set: Vec<Ray> = minkowski_conditions(3)
        .expect("n = 3")
        .into_iter()
        .filter(|c| !c.strict && c.coeffs != superseded)
        .map(|c| c.coeffs)
        .collect();
    a_set.push(vec![0, 0, 0, 1, 0, 0]);
    a_set.push(vec![0, 0, 0, 0, 1, 0]);
    ConstraintCatalog {
        a_set,
        b_set: vec![strict_first, superseded],
        c_pairs: implication_pairs(),
        m_edges: schiemann_edges(),
    }
}
