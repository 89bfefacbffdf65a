//! Minimal sets of subsets of `Z^3_*` under the preorder given by the
//! eleven edge forms of the closed Schiemann domain.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::in_zstar;
use crate::reduction::schiemann_edges;

/// The sublattice-union `Lambda` on which a pair of forms is known to agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LambdaVariant {
    /// `e1 Z`
    E1Line,
    /// `e1 Z + e2 Z`
    E1E2Plane,
    /// `(e1 Z + e2 Z) u (e1 Z + e3 Z)`
    UnionPlanes,
}

impl LambdaVariant {
    pub fn contains(self, x: &[i64]) -> bool {
        match self {
            LambdaVariant::E1Line => x[1] == 0 && x[2] == 0,
            LambdaVariant::E1E2Plane => x[2] == 0,
            LambdaVariant::UnionPlanes => x[2] == 0 || x[1] == 0,
        }
    }

    /// Membership in `X = Z^3_* \ Lambda`.
    pub fn in_domain(self, x: &[i64]) -> bool {
        in_zstar(x) && !self.contains(x)
    }

    fn y_set(self, a: i64) -> Vec<Vec<i64>> {
        match self {
            LambdaVariant::E1Line => vec![vec![a, 1, 0]],
            LambdaVariant::E1E2Plane => vec![vec![a, 0, 1]],
            LambdaVariant::UnionPlanes => vec![vec![a, 1, 1], vec![a, -1, 1]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LambdaVariant::E1Line => "E1Line",
            LambdaVariant::E1E2Plane => "E1E2Plane",
            LambdaVariant::UnionPlanes => "UnionPlanes",
        }
    }
}

/// Either all of `Z^3_*` or `Z^3_* \ Lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MinDomain {
    Full,
    Punctured(LambdaVariant),
}

impl MinDomain {
    pub fn contains(self, x: &[i64]) -> bool {
        match self {
            MinDomain::Full => in_zstar(x),
            MinDomain::Punctured(l) => l.in_domain(x),
        }
    }
}

/// A query `MIN(X \ removed)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MinQuery {
    pub domain: MinDomain,
    pub removed: BTreeSet<Vec<i64>>,
}

impl MinQuery {
    pub fn new(domain: MinDomain, removed: impl IntoIterator<Item = Vec<i64>>) -> Self {
        MinQuery { domain, removed: removed.into_iter().collect() }
    }

    pub fn lambda(lambda: LambdaVariant, removed: impl IntoIterator<Item = Vec<i64>>) -> Self {
        Self::new(MinDomain::Punctured(lambda), removed)
    }

    /// Whether `x` lies in `X \ removed`.
    pub fn admits(&self, x: &[i64]) -> bool {
        self.domain.contains(x) && !self.removed.contains(x)
    }

    /// Removed points that actually lie in the domain.
    fn effective_removed(&self) -> Vec<Vec<i64>> {
        self.removed.iter().filter(|x| self.domain.contains(x)).cloned().collect()
    }
}

fn edge_table() -> &'static [[i64; 6]; 11] {
    static T: OnceLock<[[i64; 6]; 11]> = OnceLock::new();
    T.get_or_init(|| {
        let e = schiemann_edges();
        std::array::from_fn(|i| std::array::from_fn(|j| e[i][j]))
    })
}

/// Values `m(x)` for the eleven edge forms, in catalog order.
pub fn m_values(x: &[i64]) -> [i64; 11] {
    let (a, b, c) = (x[0], x[1], x[2]);
    let mono = [a * a, b * b, c * c, 2 * a * b, 2 * a * c, 2 * b * c];
    edge_table().map(|m| m.iter().zip(&mono).map(|(u, v)| u * v).sum())
}

/// `x <= y` in the preorder: `m(x) <= m(y)` for every edge form `m`.
pub fn precedes(x: &[i64], y: &[i64]) -> bool {
    let (vx, vy) = (m_values(x), m_values(y));
    vx.iter().zip(&vy).all(|(a, b)| a <= b)
}

fn norm2(x: &[i64]) -> i64 {
    x.iter().map(|v| v * v).sum()
}

fn ball(bound: i64, mut keep: impl FnMut(&[i64]) -> bool) -> Vec<Vec<i64>> {
    let r = (bound as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let x = [a, b, c];
                if norm2(&x) < bound && keep(&x) {
                    out.push(x.to_vec());
                }
            }
        }
    }
    out
}

/// Minimal elements of a finite candidate set, using that `x <= y` forces `|x| <= |y|`.
fn minimal_elements(mut pts: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    pts.sort_by_key(|x| (norm2(x), x.clone()));
    pts.dedup();
    let vals: Vec<[i64; 11]> = pts.iter().map(|x| m_values(x)).collect();
    let le = |i: usize, j: usize| vals[i].iter().zip(&vals[j]).all(|(a, b)| a <= b);
    let mut mins: Vec<usize> = Vec::new();
    let mut start = 0;
    while start < pts.len() {
        let n = norm2(&pts[start]);
        let mut end = start;
        while end < pts.len() && norm2(&pts[end]) == n {
            end += 1;
        }
        let mut fresh = Vec::new();
        for i in start..end {
            if mins.iter().any(|&m| le(m, i)) {
                continue;
            }
            if (start..end).any(|j| j != i && le(j, i)) {
                continue;
            }
            fresh.push(i);
        }
        mins.extend(fresh);
        start = end;
    }
    let mut out: Vec<Vec<i64>> = mins.into_iter().map(|i| pts[i].clone()).collect();
    out.sort();
    out
}

fn compute(q: &MinQuery) -> Result<Vec<Vec<i64>>> {
    let lambda = match q.domain {
        MinDomain::Full => {
            let e1 = vec![1, 0, 0];
            if q.removed.contains(&e1) {
                // Z^3_* minus e1 equals Z^3_* minus the line e1 Z.
                let sub = MinQuery::lambda(LambdaVariant::E1Line, q.removed.iter().cloned());
                return compute(&sub);
            }
            let pts = ball(24, |x| q.admits(x));
            let mut pts = pts;
            pts.push(e1);
            return finish(minimal_elements(pts));
        }
        MinDomain::Punctured(l) => l,
    };
    let mut a = 1;
    let ys = loop {
        let ys = lambda.y_set(a);
        if ys.iter().all(|y| q.admits(y)) {
            break ys;
        }
        a += 1;
    };
    let bound = 8 * (a * a + 2);
    let mut pts = ball(bound, |x| q.admits(x));
    pts.extend(ys);
    finish(minimal_elements(pts))
}

fn finish(v: Vec<Vec<i64>>) -> Result<Vec<Vec<i64>>> {
    if v.is_empty() {
        return Err(Error::InvalidParameter("empty minimal set".into()));
    }
    Ok(v)
}

type CacheKey = (MinDomain, Vec<Vec<i64>>);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<Vec<Vec<i64>>>>> {
    static C: OnceLock<Mutex<HashMap<CacheKey, Arc<Vec<Vec<i64>>>>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `MIN(X \ removed)`, sorted lexicographically. Results are memoised.
pub fn min_set(q: &MinQuery) -> Result<Arc<Vec<Vec<i64>>>> {
    let key = (q.domain, q.effective_removed());
    if let Some(v) = cache().lock().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(compute(q)?);
    cache().lock().expect("cache lock").insert(key, v.clone());
    Ok(v)
}

/// Brute-force minimal set over the ball `|x| <= radius`.
pub fn min_set_oracle(q: &MinQuery, radius: i64) -> Vec<Vec<i64>> {
    let pts = ball(radius * radius + 1, |x| q.admits(x));
    let mut out: Vec<Vec<i64>> = pts
        .iter()
        .filter(|x| !pts.iter().any(|y| y != *x && precedes(y, x)))
        .cloned()
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preorder_basics() {
        assert!(precedes(&[1, 0, 0], &[0, 1, 0]));
        assert!(precedes(&[0, 1, 0], &[0, 1, 0]));
        assert!(!precedes(&[0, 1, 0], &[1, 0, 0]));
        assert_eq!(m_values(&[1, 0, 0]), [0, 0, 0, 2, 2, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn full_base_case() {
        let q = MinQuery::new(MinDomain::Full, []);
        assert_eq!(*min_set(&q).unwrap(), vec![vec![1, 0, 0]]);
    }

    #[test]
    fn punctured_domains_match_oracle() {
        for l in [LambdaVariant::E1Line, LambdaVariant::E1E2Plane, LambdaVariant::UnionPlanes] {
            let q = MinQuery::lambda(l, []);
            assert_eq!(*min_set(&q).unwrap(), min_set_oracle(&q, 10), "{l:?}");
        }
        let q = MinQuery::lambda(LambdaVariant::UnionPlanes, [vec![1, 1, 1]]);
        assert_eq!(*min_set(&q).unwrap(), min_set_oracle(&q, 12));
        let q = MinQuery::lambda(LambdaVariant::E1Line, [vec![0, 1, 0], vec![1, 1, 0], vec![-1, 1, 0]]);
        assert_eq!(*min_set(&q).unwrap(), min_set_oracle(&q, 14));
    }

    #[test]
    fn removed_outside_domain_ignored() {
        let a = MinQuery::lambda(LambdaVariant::E1Line, [vec![1, 0, 0]]);
        let b = MinQuery::lambda(LambdaVariant::E1Line, []);
        assert_eq!(min_set(&a).unwrap(), min_set(&b).unwrap());
    }
}
