//! Integral equivalence of forms and congruence of lattices.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_linalg::{int_det, Rat, RatMat};
use crate::forms::{enumerate_up_to, gram, is_positive_definite, EnumerationDomain, LatticeBasis, QuadraticForm};

/// Exact lower bound for the smallest eigenvalue: `det(Q) / U^(n-1)` with
/// `U` the largest absolute row sum.
pub fn lambda_min_lower_bound(q: &QuadraticForm) -> Result<Rat> {
    if !is_positive_definite(q) {
        return Err(Error::NotPositiveDefinite);
    }
    let n = q.dim();
    let m = q.matrix();
    let u = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<Rat>())
        .max()
        .expect("non-empty");
    let mut denom = Rat::one();
    for _ in 1..n {
        denom *= &u;
    }
    Ok(q.det() / denom)
}

/// A unimodular `B` with `B^T Q1 B = Q2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceWitness {
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
}

impl EquivalenceWitness {
    pub fn matrix(&self) -> RatMat {
        let rows: Vec<&[i64]> = self.b.iter().map(|r| r.as_slice()).collect();
        RatMat::from_i64(&rows)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent(EquivalenceWitness),
    NotEquivalent,
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent(_))
    }
}

fn scaled_integer(q: &QuadraticForm, d: &BigInt) -> Result<Vec<Vec<i128>>> {
    let n = q.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = q.entry(i, j) * Rat::from_integer(d.clone());
                    v.to_integer().to_i128().ok_or(Error::Overflow)
                })
                .collect()
        })
        .collect()
}

struct Search<'a> {
    order: Vec<usize>,
    cands: Vec<Vec<(Vec<i64>, Vec<i128>)>>,
    m2: &'a [Vec<i128>],
    chosen: Vec<usize>,
}

impl Search<'_> {
    fn dfs(&mut self, depth: usize) -> Option<Vec<Vec<i64>>> {
        let n = self.order.len();
        if depth == n {
            let mut b = vec![vec![0i64; n]; n];
            for (k, &col) in self.order.iter().enumerate() {
                let x = &self.cands[k][self.chosen[k]].0;
                for i in 0..n {
                    b[i][col] = x[i];
                }
            }
            let big: Vec<Vec<BigInt>> = b.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
            return if int_det(&big).abs().is_one() { Some(b) } else { None };
        }
        let col = self.order[depth];
        for c in 0..self.cands[depth].len() {
            let ok = (0..depth).all(|k| {
                let prev = &self.cands[k][self.chosen[k]].1;
                let x = &self.cands[depth][c].0;
                let dot: i128 = x.iter().zip(prev).map(|(&a, &b)| a as i128 * b).sum();
                dot == self.m2[self.order[k]][col]
            });
            if !ok {
                continue;
            }
            self.chosen.push(c);
            if let Some(b) = self.dfs(depth + 1) {
                return Some(b);
            }
            self.chosen.pop();
        }
        None
    }
}

/// Decides whether `Q2 = B^T Q1 B` for some unimodular `B`.
///
/// Column `b_j` must satisfy `Q1(b_j) = (Q2)_jj`, so candidates come from a
/// complete enumeration of that value; partial Gram entries prune the search.
pub fn integral_equivalence(q1: &QuadraticForm, q2: &QuadraticForm) -> Result<Equivalence> {
    if q1.dim() != q2.dim() {
        return Err(Error::Dimension(format!("{} vs {}", q1.dim(), q2.dim())));
    }
    if !is_positive_definite(q1) || !is_positive_definite(q2) {
        return Err(Error::NotPositiveDefinite);
    }
    if q1.det() != q2.det() {
        return Ok(Equivalence::NotEquivalent);
    }
    let n = q1.dim();
    let d = q1.matrix().denominator_lcm().lcm(&q2.matrix().denominator_lcm());
    let m1 = scaled_integer(q1, &d)?;
    let m2 = scaled_integer(q2, &d)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| q2.entry(a, a).cmp(q2.entry(b, b)).then(a.cmp(&b)));
    let lb = lambda_min_lower_bound(q1)?;
    let mut cands = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let target = q2.entry(j, j).clone();
        let norm_bound = &target / &lb;
        let domain = if k == 0 { EnumerationDomain::zstar() } else { EnumerationDomain::full() };
        let mut list = Vec::new();
        for (x, v) in enumerate_up_to(q1, &target, domain)? {
            if v != target {
                continue;
            }
            let norm: i64 = x.iter().map(|t| t * t).sum();
            if Rat::from_integer(BigInt::from(norm)) > norm_bound {
                continue;
            }
            let y: Vec<i128> = (0..n).map(|i| (0..n).map(|l| m1[i][l] * x[l] as i128).sum()).collect();
            list.push((x, y));
        }
        if list.is_empty() {
            return Ok(Equivalence::NotEquivalent);
        }
        cands.push(list);
    }
    let mut s = Search { order, cands, m2: &m2, chosen: Vec::new() };
    Ok(match s.dfs(0) {
        Some(b) => Equivalence::Equivalent(EquivalenceWitness { b }),
        None => Equivalence::NotEquivalent,
    })
}

/// Congruence of lattices, decided on Gram forms.
pub fn lattice_congruent(a1: &LatticeBasis, a2: &LatticeBasis) -> Result<Equivalence> {
    integral_equivalence(&gram(a1), &gram(a2))
}

/// Vectors of squared length `s` and the multiset of their pairwise dot products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorProfile {
    pub count: usize,
    pub dots: BTreeMap<Rat, u64>,
}

pub fn shortest_vector_profile(basis: &LatticeBasis, s: &Rat) -> Result<VectorProfile> {
    if !s.is_positive() {
        return Err(Error::InvalidParameter("s must be positive".into()));
    }
    let q = gram(basis);
    let vs: Vec<Vec<i64>> = enumerate_up_to(&q, s, EnumerationDomain::full())?
        .filter(|(_, v)| v == s)
        .map(|(x, _)| x)
        .collect();
    let qx: Vec<Vec<Rat>> = vs.iter().map(|x| q.matrix().mul_vec_i64(x)).collect();
    let mut dots = BTreeMap::new();
    for a in &vs {
        for b in &qx {
            let d: Rat = a.iter().zip(b).map(|(&u, w)| w * BigInt::from(u)).sum();
            *dots.entry(d).or_insert(0) += 1;
        }
    }
    Ok(VectorProfile { count: vs.len(), dots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::int;

    #[test]
    fn lower_bound_examples() {
        let i3 = QuadraticForm::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        assert_eq!(lambda_min_lower_bound(&i3).unwrap(), int(1));
        let d = QuadraticForm::from_i64(&[&[1, 0], &[0, 4]]).unwrap();
        let lb = lambda_min_lower_bound(&d).unwrap();
        assert!(lb > int(0) && lb <= int(1));
    }

    #[test]
    fn planted_equivalence() {
        let q = QuadraticForm::from_i64(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]).unwrap();
        let b = RatMat::from_i64(&[&[1, 2, 0], &[0, 1, -1], &[0, 0, 1]]);
        let p = q.transform(&b);
        match integral_equivalence(&q, &p).unwrap() {
            Equivalence::Equivalent(w) => assert_eq!(q.transform(&w.matrix()), p),
            Equivalence::NotEquivalent => panic!("planted pair not found"),
        }
    }

    #[test]
    fn determinant_mismatch() {
        let a = QuadraticForm::from_i64(&[&[2, 0], &[0, 2]]).unwrap();
        let b = QuadraticForm::from_i64(&[&[2, 0], &[0, 4]]).unwrap();
        assert_eq!(integral_equivalence(&a, &b).unwrap(), Equivalence::NotEquivalent);
    }

    #[test]
    fn profile_of_z2() {
        let z2 = LatticeBasis::from_i64(&[&[1, 0], &[0, 1]]).unwrap();
        let p = shortest_vector_profile(&z2, &int(1)).unwrap();
        assert_eq!(p.count, 4);
        assert_eq!(p.dots.get(&int(1)), Some(&4));
        assert_eq!(p.dots.get(&int(-1)), Some(&4));
        assert_eq!(p.dots.get(&int(0)), Some(&8));
    }
}
