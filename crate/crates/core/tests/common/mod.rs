//! Generators and property suites shared by the integration targets.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use torus_core::cones::{Cone, Ray};
use torus_core::congruence::{integral_equivalence, Equivalence};
use torus_core::exact_linalg::{int, int_det, int_rank, Rat, RatMat};
use torus_core::forms::{is_positive_definite, isospectral_up_to, QuadraticForm, SpectralComparison};
use torus_core::minset::{min_set, LambdaVariant, MinDomain, MinQuery};
use torus_core::reduction::{is_minkowski_reduced, is_schiemann_reduced, schiemann_reduce, successive_minima};

pub type Outcome = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn finish<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Outcome {
    r.map_err(|e| e.to_string())
}

/// Integer matrix `A` with entries in `[-r, r]`, as rows.
pub fn int_matrix(n: usize, r: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-r..=r, n), n)
}

/// Positive definite integral form `A^T A + D` with small `D >= 0`.
pub fn pd_form(n: usize) -> impl Strategy<Value = QuadraticForm> {
    (int_matrix(n, 2), prop::collection::vec(0i64..3, n)).prop_filter_map("singular", move |(a, d)| {
        let mut q = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                q[i][j] = (0..n).map(|k| a[k][i] * a[k][j]).sum();
            }
            q[i][i] += d[i];
        }
        let rows: Vec<&[i64]> = q.iter().map(|r| r.as_slice()).collect();
        let f = QuadraticForm::from_i64(&rows).ok()?;
        is_positive_definite(&f).then_some(f)
    })
}

/// Unimodular matrix from a word in elementary column operations.
pub fn unimodular(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec((0u8..3, 0..n, 0..n, -2i64..=2), 0..6).prop_map(move |ops| {
        let mut b: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        for (op, i, j, m) in ops {
            match op {
                0 if i != j => (0..n).for_each(|r| b[r][i] += m * b[r][j]),
                1 => (0..n).for_each(|r| b[r].swap(i, j)),
                2 => (0..n).for_each(|r| b[r][i] = -b[r][i]),
                _ => {}
            }
        }
        b
    })
}

pub fn ratmat(b: &[Vec<i64>]) -> RatMat {
    let rows: Vec<&[i64]> = b.iter().map(|r| r.as_slice()).collect();
    RatMat::from_i64(&rows)
}

fn det_i64(rows: &[Vec<i64>]) -> BigInt {
    let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    int_det(&big)
}

/// Edges of the closed cone `{x : Cx >= 0}` by brute force over row subsets.
pub fn brute_edges(dim: usize, rows: &[Ray]) -> BTreeSet<Ray> {
    let mut out = BTreeSet::new();
    let m = rows.len();
    let mut pick = vec![0usize; dim - 1];
    fn rec(start: usize, depth: usize, m: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if depth == pick.len() {
            f(pick);
            return;
        }
        for i in start..m {
            pick[depth] = i;
            rec(i + 1, depth + 1, m, pick, f);
        }
    }
    rec(0, 0, m, &mut pick, &mut |idx| {
        let sub: Vec<Vec<i64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        // Generalised cross product of the dim-1 rows.
        let v: Vec<i64> = (0..dim)
            .map(|c| {
                let minor: Vec<Vec<i64>> = sub.iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, &x)| x).collect()).collect();
                let d = det_i64(&minor);
                let d: i64 = d.try_into().expect("small");
                if c % 2 == 0 { d } else { -d }
            })
            .collect();
        if v.iter().all(|&x| x == 0) {
            return;
        }
        let g = v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
        let v: Vec<i64> = v.iter().map(|x| x / g).collect();
        for s in [1, -1] {
            let w: Vec<i64> = v.iter().map(|x| s * x).collect();
            if rows.iter().all(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum::<i64>() >= 0) {
                out.insert(w);
            }
        }
    });
    out
}

/// Edges and emptiness of random systems agree with brute force.
pub fn cone_oracle(cases: u32) -> Outcome {
    let strat = (3usize..=5).prop_flat_map(|d| {
        (Just(d), prop::collection::vec(prop::collection::vec(-3i64..=3, d), d..d + 5), 0usize..3)
    });
    finish(runner(cases).run(&strat, |(d, rows, n_strict)| {
        let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        prop_assume!(int_rank(&big) == d);
        let n_strict = n_strict.min(rows.len());
        let (closed, strict) = rows.split_at(rows.len() - n_strict);
        let c = Cone::from_constraints(d, closed, strict).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let got: BTreeSet<Ray> = c.edges().cloned().collect();
        let want = brute_edges(d, &rows);
        prop_assert_eq!(&got, &want);
        let nonempty = if want.is_empty() {
            strict.is_empty()
        } else {
            strict.iter().all(|b| want.iter().any(|e| b.iter().zip(e).map(|(x, y)| x * y).sum::<i64>() > 0))
        };
        prop_assert_eq!(c.is_empty(), !nonempty);
        Ok(())
    }))
}

const EDGES: [[i64; 6]; 11] = [
    [0, 0, 1, 0, 0, 0],
    [0, 2, 2, 0, 0, 1],
    [0, 2, 2, 0, 0, -1],
    [2, 2, 2, 0, 0, 1],
    [2, 2, 2, 0, 0, -1],
    [2, 2, 2, 0, 1, 1],
    [2, 2, 2, 0, 1, -1],
    [2, 2, 2, 1, 0, 1],
    [2, 2, 2, 1, 0, -1],
    [2, 2, 2, 1, 1, 0],
    [2, 2, 2, 1, 1, 1],
];

fn mvals(x: &[i64]) -> [i64; 11] {
    let (a, b, c) = (x[0], x[1], x[2]);
    EDGES.map(|m| m[0] * a * a + m[1] * b * b + m[2] * c * c + 2 * (m[3] * a * b + m[4] * a * c + m[5] * b * c))
}

fn zstar(x: &[i64]) -> bool {
    match x.iter().rev().find(|&&v| v != 0) {
        None => false,
        Some(&l) => l > 0 && x.iter().fold(0i64, |g, &v| num_integer::gcd(g, v)) == 1,
    }
}

/// Minimal elements of `X \ removed` within the ball `|x| <= r`.
pub fn brute_min(domain: MinDomain, removed: &BTreeSet<Vec<i64>>, r: i64) -> Vec<Vec<i64>> {
    let inside = |x: &[i64]| {
        zstar(x)
            && !removed.contains(x)
            && match domain {
                MinDomain::Full => true,
                MinDomain::Punctured(LambdaVariant::E1Line) => !(x[1] == 0 && x[2] == 0),
                MinDomain::Punctured(LambdaVariant::E1E2Plane) => x[2] != 0,
                MinDomain::Punctured(LambdaVariant::UnionPlanes) => x[1] != 0 && x[2] != 0,
            }
    };
    let mut pts = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let x = vec![a, b, c];
                if a * a + b * b + c * c <= r * r && inside(&x) {
                    pts.push((mvals(&x), x));
                }
            }
        }
    }
    let mut out: Vec<Vec<i64>> = pts
        .iter()
        .filter(|(vx, x)| !pts.iter().any(|(vy, y)| y != x && vy.iter().zip(vx).all(|(p, q)| p <= q)))
        .map(|(_, x)| x.clone())
        .collect();
    out.sort();
    out
}

/// MIN sets against brute force over a ball containing every candidate.
pub fn min_oracle(cases: u32) -> Outcome {
    let domain = prop_oneof![
        Just(MinDomain::Full),
        Just(MinDomain::Punctured(LambdaVariant::E1Line)),
        Just(MinDomain::Punctured(LambdaVariant::E1E2Plane)),
        Just(MinDomain::Punctured(LambdaVariant::UnionPlanes)),
    ];
    let removed = prop::collection::btree_set(prop::collection::vec(-1i64..=1, 3), 0..5);
    finish(runner(cases).run(&(domain, removed), |(domain, removed)| {
        let q = MinQuery::new(domain, removed.iter().cloned());
        let got = min_set(&q).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&*got, &brute_min(domain, &removed, 8));
        Ok(())
    }))
}

/// Exactly one Schiemann-reduced representative, invariant under `B^T q B`.
pub fn schiemann_uniqueness(cases: u32) -> Outcome {
    finish(runner(cases).run(&(pd_form(3), unimodular(3)), |(q, b)| {
        let p = q.transform(&ratmat(&b));
        let r1 = schiemann_reduce(&q).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let r2 = schiemann_reduce(&p).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&r1, &r2);
        prop_assert!(is_schiemann_reduced(&r1));
        prop_assert_eq!(r1.to_form().det(), q.det());
        Ok(())
    }))
}

/// Diagonal of a reduced ternary form equals its successive minima.
pub fn minima_on_diagonal(cases: u32) -> Outcome {
    finish(runner(cases).run(&pd_form(3), |q| {
        let f = schiemann_reduce(&q).map_err(|e| TestCaseError::fail(e.to_string()))?.to_form();
        prop_assert!(is_minkowski_reduced(&f).unwrap());
        let lam = successive_minima(&f).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for i in 0..3 {
            prop_assert_eq!(f.entry(i, i), &lam[i].1);
        }
        // Brute-force first minimum over a box.
        let mut best: Option<Rat> = None;
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                for c in -4i64..=4 {
                    if (a, b, c) != (0, 0, 0) {
                        let v = f.eval(&[a, b, c]);
                        if best.as_ref().map_or(true, |m| v < *m) {
                            best = Some(v);
                        }
                    }
                }
            }
        }
        prop_assert_eq!(best.as_ref(), Some(f.entry(0, 0)));
        Ok(())
    }))
}

/// Rectangular tori: isospectral exactly when the sorted diagonals agree.
pub fn rectangular_tori(cases: u32) -> Outcome {
    let strat = (1usize..=3).prop_flat_map(|n| {
        (prop::collection::vec(1i64..=8, n), prop::collection::vec(1i64..=8, n), any::<bool>())
    });
    finish(runner(cases).run(&strat, |(a, mut b, permute)| {
        if permute {
            b = a.clone();
            b.reverse();
        }
        let fa = QuadraticForm::new(RatMat::diag(&a.iter().map(|&x| int(x)).collect::<Vec<_>>())).unwrap();
        let fb = QuadraticForm::new(RatMat::diag(&b.iter().map(|&x| int(x)).collect::<Vec<_>>())).unwrap();
        let tmax = int(*a.iter().chain(&b).max().unwrap());
        let same = isospectral_up_to(&fa, &fb, &tmax).unwrap() == SpectralComparison::Equal;
        let (mut sa, mut sb) = (a.clone(), b.clone());
        sa.sort();
        sb.sort();
        prop_assert_eq!(same, sa == sb);
        Ok(())
    }))
}

/// Planted pairs `(Q, B^T Q B)` are recognised, with a valid witness.
pub fn planted_equivalence(cases: u32) -> Outcome {
    let strat = (2usize..=4).prop_flat_map(|n| (pd_form(n), unimodular(n)));
    finish(runner(cases).run(&strat, |(q, b)| {
        let p = q.transform(&ratmat(&b));
        match integral_equivalence(&q, &p).map_err(|e| TestCaseError::fail(e.to_string()))? {
            Equivalence::Equivalent(w) => {
                prop_assert_eq!(q.transform(&w.matrix()), p);
                prop_assert_eq!(det_i64(&w.b).magnitude().clone(), num_bigint::BigUint::from(1u8));
            }
            Equivalence::NotEquivalent => return Err(TestCaseError::fail("planted pair missed")),
        }
        Ok(())
    }))
}
