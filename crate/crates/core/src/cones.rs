//! Exact pointed polyhedral cones.
//!
//! A cone is `Pc(A, B) = {x : a.x >= 0 (a in A), b.x > 0 (b in B)}`. Edges of
//! the closure `Pc(A u B, {})` are kept as primitive integer rays and are
//! updated incrementally when a halfspace is added (double description).
//! Each edge carries the set of constraint rows it lies on; 2-faces are
//! recognised combinatorially from these incidence sets.

use std::fmt;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_linalg::{int_rank, Rat, RatMat};

/// Integer vector used for cone normals and edge rays.
pub type Ray = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Row {
    normal: Ray,
    strict: bool,
}

#[derive(Clone, Debug)]
struct Edge {
    ray: Ray,
    /// Rows `a` with `a.ray = 0`.
    active: FixedBitSet,
}

/// Pointed polyhedral cone with closed and strict constraints.
#[derive(Clone, Debug)]
pub struct Cone {
    dim: usize,
    rows: Vec<Row>,
    edges: Vec<Edge>,
}

pub fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Divides by the gcd of the entries; the zero vector is returned unchanged.
pub fn primitive(v: &[i128]) -> Result<Ray> {
    let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
    let g = if g == 0 { 1 } else { g };
    v.iter().map(|&x| (x / g).to_i64().ok_or(Error::Overflow)).collect()
}

/// Exact rank of an integer matrix given by rows.
pub fn rank_of(rows: &[Ray]) -> usize {
    match rank_i128(rows) {
        Some(r) => r,
        None => {
            let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            int_rank(&big)
        }
    }
}

/// Fraction-free elimination with row content removal; `None` on overflow.
fn rank_i128(rows: &[Ray]) -> Option<usize> {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(p, rank);
        let piv = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for j in c..cols {
                row[j] = piv[c].checked_mul(row[j])?.checked_sub(f.checked_mul(piv[j])?)?;
            }
            let g = row.iter().fold(0i128, |g, &x| g.gcd(&x));
            if g > 1 {
                row.iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    Some(rank)
}

impl Cone {
    /// Simplicial cone `{x : a_i.x >= 0}` for `d` linearly independent normals.
    pub fn simplicial(normals: &[Ray]) -> Result<Cone> {
        let d = normals.len();
        if normals.iter().any(|n| n.len() != d) || rank_of(normals) != d {
            return Err(Error::NotPointed);
        }
        let a = RatMat::from_rows(
            normals.iter().map(|r| r.iter().map(|&x| Rat::from_integer(BigInt::from(x))).collect()).collect(),
        )?;
        let (inv, _) = a.inverse_det()?;
        let rows: Vec<Row> = normals.iter().map(|n| Row { normal: n.clone(), strict: false }).collect();
        let mut edges = Vec::with_capacity(d);
        for i in 0..d {
            let col = inv.col(i);
            let l = col.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
            let ints: Vec<i128> = col
                .iter()
                .map(|x| (x * &l).to_integer().to_i128().ok_or(Error::Overflow))
                .collect::<Result<_>>()?;
            let mut active = FixedBitSet::with_capacity(d);
            for j in 0..d {
                if j != i {
                    active.insert(j);
                }
            }
            edges.push(Edge { ray: primitive(&ints)?, active });
        }
        let mut c = Cone { dim: d, rows, edges };
        c.sort_edges();
        Ok(c)
    }

    /// Non-negative orthant of `R^d`.
    pub fn orthant(d: usize) -> Cone {
        let normals: Vec<Ray> = (0..d).map(|i| unit(d, i)).collect();
        Cone::simplicial(&normals).expect("unit vectors are independent")
    }

    /// Builds `seed n Pc(closed, strict)` by adding the constraints one by one.
    pub fn from_system(seed: &Cone, closed: &[Ray], strict: &[Ray]) -> Result<Cone> {
        if !seed.is_pointed() {
            return Err(Error::NotPointed);
        }
        let mut c = seed.clone();
        for v in closed {
            c.add_in_place(v, false)?;
        }
        for v in strict {
            c.add_in_place(v, true)?;
        }
        c.sort_edges();
        Ok(c)
    }

    /// Builds `Pc(closed, strict)` from scratch, seeding with a simplicial cone
    /// on a maximal independent subset of the constraints.
    pub fn from_constraints(dim: usize, closed: &[Ray], strict: &[Ray]) -> Result<Cone> {
        let all: Vec<(Ray, bool)> = closed
            .iter()
            .map(|v| (v.clone(), false))
            .chain(strict.iter().map(|v| (v.clone(), true)))
            .collect();
        if all.iter().any(|(v, _)| v.len() != dim) {
            return Err(Error::Dimension("constraint length differs from ambient dimension".into()));
        }
        let mut basis: Vec<Ray> = Vec::new();
        let mut chosen = vec![false; all.len()];
        for (i, (v, _)) in all.iter().enumerate() {
            if basis.len() == dim {
                break;
            }
            basis.push(v.clone());
            if rank_of(&basis) == basis.len() {
                chosen[i] = true;
            } else {
                basis.pop();
            }
        }
        if basis.len() < dim {
            return Err(Error::NotPointed);
        }
        let mut c = Cone::simplicial(&basis)?;
        let mut k = 0;
        for (i, (_, strict)) in all.iter().enumerate() {
            if chosen[i] {
                c.rows[k].strict = *strict;
                k += 1;
            }
        }
        for (i, (v, strict)) in all.iter().enumerate() {
            if !chosen[i] {
                c.add_in_place(v, *strict)?;
            }
        }
        c.sort_edges();
        Ok(c)
    }

    /// Product cone `a x b` in `R^{d1 + d2}`.
    pub fn product(a: &Cone, b: &Cone) -> Cone {
        let (d1, d2) = (a.dim, b.dim);
        let mut rows = Vec::with_capacity(a.rows.len() + b.rows.len());
        for r in &a.rows {
            let mut n = r.normal.clone();
            n.extend(std::iter::repeat(0).take(d2));
            rows.push(Row { normal: n, strict: r.strict });
        }
        for r in &b.rows {
            let mut n = vec![0; d1];
            n.extend_from_slice(&r.normal);
            rows.push(Row { normal: n, strict: r.strict });
        }
        let total = rows.len();
        let (ra, rb) = (a.rows.len(), b.rows.len());
        let mut edges = Vec::with_capacity(a.edges.len() + b.edges.len());
        for e in &a.edges {
            let mut ray = e.ray.clone();
            ray.extend(std::iter::repeat(0).take(d2));
            let mut active = FixedBitSet::with_capacity(total);
            active.extend(e.active.ones());
            active.insert_range(ra..ra + rb);
            edges.push(Edge { ray, active });
        }
        for e in &b.edges {
            let mut ray = vec![0; d1];
            ray.extend_from_slice(&e.ray);
            let mut active = FixedBitSet::with_capacity(total);
            active.insert_range(0..ra);
            active.extend(e.active.ones().map(|i| i + ra));
            edges.push(Edge { ray, active });
        }
        let mut c = Cone { dim: d1 + d2, rows, edges };
        c.sort_edges();
        c
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn closed(&self) -> Vec<&Ray> {
        self.rows.iter().filter(|r| !r.strict).map(|r| &r.normal).collect()
    }

    pub fn strict(&self) -> Vec<&Ray> {
        self.rows.iter().filter(|r| r.strict).map(|r| &r.normal).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Ray> {
        self.edges.iter().map(|e| &e.ray)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.rows.len()
    }

    /// Dimension of the cone (rank of its edge set).
    pub fn cone_dim(&self) -> usize {
        let rays: Vec<Ray> = self.edges.iter().map(|e| e.ray.clone()).collect();
        rank_of(&rays)
    }

    /// Returns the cone intersected with `v.x >= 0` (or `> 0` when strict).
    pub fn add_halfspace(&self, v: &[i64], strict: bool) -> Result<Cone> {
        let mut c = self.clone();
        c.add_in_place(v, strict)?;
        c.sort_edges();
        Ok(c)
    }

    /// In-place halfspace addition; edges are left unsorted.
    pub fn add_in_place(&mut self, v: &[i64], strict: bool) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!("normal of length {} in R^{}", v.len(), self.dim)));
        }
        if let Some(r) = self.rows.iter_mut().find(|r| r.normal == v) {
            r.strict |= strict;
            return Ok(());
        }
        let idx = self.rows.len();
        let total = idx + 1;
        self.rows.push(Row { normal: v.to_vec(), strict });
        let s: Vec<i128> = self.edges.iter().map(|e| dot(v, &e.ray)).collect();
        let any_neg = s.iter().any(|&x| x < 0);
        let any_pos = s.iter().any(|&x| x > 0);
        let threshold = self.dim.saturating_sub(2);

        let mut new_edges: Vec<Edge> = Vec::new();
        if any_neg && any_pos {
            let pos: Vec<usize> = (0..s.len()).filter(|&i| s[i] > 0).collect();
            let neg: Vec<usize> = (0..s.len()).filter(|&i| s[i] < 0).collect();
            let mut common = FixedBitSet::with_capacity(idx);
            for &p in &pos {
                for &n in &neg {
                    common.clone_from(&self.edges[p].active);
                    common.intersect_with(&self.edges[n].active);
                    if common.count_ones(..) < threshold {
                        continue;
                    }
                    let blocked = self
                        .edges
                        .iter()
                        .enumerate()
                        .any(|(k, e)| k != p && k != n && common.is_subset(&e.active));
                    if blocked {
                        continue;
                    }
                    let (sp, sn) = (s[p], -s[n]);
                    let kp = &self.edges[p].ray;
                    let kn = &self.edges[n].ray;
                    let mut ray = Vec::with_capacity(self.dim);
                    for j in 0..self.dim {
                        let a = sp.checked_mul(kn[j] as i128).ok_or(Error::Overflow)?;
                        let b = sn.checked_mul(kp[j] as i128).ok_or(Error::Overflow)?;
                        ray.push(a.checked_add(b).ok_or(Error::Overflow)?);
                    }
                    let mut active = common.clone();
                    active.grow(total);
                    active.insert(idx);
                    new_edges.push(Edge { ray: primitive(&ray)?, active });
                }
            }
        }
        let mut kept = Vec::with_capacity(self.edges.len() + new_edges.len());
        for (e, &si) in std::mem::take(&mut self.edges).into_iter().zip(&s) {
            if si < 0 {
                continue;
            }
            let mut e = e;
            e.active.grow(total);
            if si == 0 {
                e.active.insert(idx);
            }
            kept.push(e);
        }
        kept.extend(new_edges);
        self.edges = kept;
        Ok(())
    }

    /// Sorts edges lexicographically and drops duplicates.
    pub fn sort_edges(&mut self) {
        self.edges.sort_by(|a, b| a.ray.cmp(&b.ray));
        self.edges.dedup_by(|a, b| a.ray == b.ray);
    }

    /// Pairs of edges spanning a 2-face, decided by the rank of their common
    /// active constraints (`dim of the intersection of hyperplanes = 2`).
    pub fn adjacent_edge_pairs(&self) -> Vec<(Ray, Ray)> {
        let mut out = Vec::new();
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                let mut common = self.edges[i].active.clone();
                common.intersect_with(&self.edges[j].active);
                let normals: Vec<Ray> = common.ones().map(|r| self.rows[r].normal.clone()).collect();
                if self.dim >= 2 && rank_of(&normals) == self.dim - 2 {
                    out.push((self.edges[i].ray.clone(), self.edges[j].ray.clone()));
                }
            }
        }
        out
    }

    /// Whether `Pc(closed, strict)` is empty.
    pub fn is_empty(&self) -> bool {
        let has_strict = self.rows.iter().any(|r| r.strict);
        if self.edges.is_empty() {
            return has_strict;
        }
        self.rows
            .iter()
            .enumerate()
            .any(|(i, r)| r.strict && self.edges.iter().all(|e| e.active.contains(i)))
    }

    /// Whether the (non-empty) cone lies in the hyperplane `c.x = 0`.
    pub fn contained_in_hyperplane(&self, c: &[i64]) -> Result<bool> {
        if self.is_empty() {
            return Err(Error::VacuousContainment);
        }
        Ok(self.edges.iter().all(|e| dot(c, &e.ray) == 0))
    }

    /// For a cone of pairs `(f, g)` in `R^{2m}`: whether every edge has `f = g`.
    pub fn contained_in_diagonal(&self) -> bool {
        let m = self.dim / 2;
        self.edges.iter().all(|e| e.ray[..m] == e.ray[m..])
    }

    pub fn is_pointed(&self) -> bool {
        let rays: Vec<&Ray> = self.edges().collect();
        !rays.iter().any(|r| {
            let neg: Ray = r.iter().map(|x| -x).collect();
            rays.contains(&&neg)
        })
    }

    /// Drops closed constraints incident to fewer than `dim - 1` edges, where
    /// `dim` is the dimension of the cone. Strict constraints are kept.
    pub fn prune_constraints(&self) -> Cone {
        let mut c = self.clone();
        c.prune_in_place();
        c
    }

    pub fn prune_in_place(&mut self) {
        if self.edges.is_empty() {
            return;
        }
        let d = self.cone_dim();
        let need = d.saturating_sub(1);
        let keep: Vec<usize> = (0..self.rows.len())
            .filter(|&i| {
                self.rows[i].strict || self.edges.iter().filter(|e| e.active.contains(i)).count() >= need
            })
            .collect();
        if keep.len() == self.rows.len() {
            return;
        }
        let rows = keep.iter().map(|&i| self.rows[i].clone()).collect();
        for e in &mut self.edges {
            let mut active = FixedBitSet::with_capacity(keep.len());
            for (new, &old) in keep.iter().enumerate() {
                if e.active.contains(old) {
                    active.insert(new);
                }
            }
            e.active = active;
        }
        self.rows = rows;
    }

    /// Deterministic key of the sorted primitive edge set.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut rays: Vec<&Ray> = self.edges().collect();
        rays.sort();
        let mut out = Vec::with_capacity(4 + rays.len() * self.dim * 8);
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for r in rays {
            for &x in r {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    /// Whether `x` satisfies every constraint of the closure.
    pub fn closure_contains(&self, x: &[i64]) -> bool {
        self.rows.iter().all(|r| dot(&r.normal, x) >= 0)
    }

    /// Whether `x` lies in `Pc(closed, strict)` itself.
    pub fn contains(&self, x: &[i64]) -> bool {
        self.rows.iter().all(|r| {
            let s = dot(&r.normal, x);
            if r.strict {
                s > 0
            } else {
                s >= 0
            }
        })
    }

    /// Whether the closure of `self` lies in the closure of `other`.
    pub fn closure_subset_of(&self, other: &Cone) -> bool {
        self.edges.iter().all(|e| other.closure_contains(&e.ray))
    }

    /// JSON-friendly dump.
    pub fn dump(&self) -> ConeDump {
        ConeDump {
            dim: self.dim,
            closed: self.closed().into_iter().cloned().collect(),
            strict: self.strict().into_iter().cloned().collect(),
            edges: self.edges().cloned().collect(),
        }
    }
}

/// Serialised form of a cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeDump {
    pub dim: usize,
    pub closed: Vec<Ray>,
    pub strict: Vec<Ray>,
    pub edges: Vec<Ray>,
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(&self.dump()).map_err(|_| fmt::Error)?)
    }
}

pub fn unit(d: usize, i: usize) -> Ray {
    let mut v = vec![0; d];
    v[i] = 1;
    v
}

/// Exact rational point check helper: whether `x` (rational) satisfies `a.x >= 0`.
pub fn rational_dot_sign(a: &[i64], x: &[Rat]) -> std::cmp::Ordering {
    let s: Rat = a.iter().zip(x).map(|(&ai, xi)| xi * BigInt::from(ai)).sum();
    if s.is_zero() {
        std::cmp::Ordering::Equal
    } else if s.is_positive() {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Less
    }
}
