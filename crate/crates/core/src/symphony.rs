//! Covering-refinement over pairs of Schiemann-reduced ternary forms.
//!
//! A pair `(f, g)` lives in `R^12`: coordinates `0..6` hold `f`, `6..12`
//! hold `g`, each in `(q11, q22, q33, q12, q13, q23)` order.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::cones::{Cone, ConeDump, Ray};
use crate::error::{Error, Result};
use crate::minset::{min_set, LambdaVariant, MinQuery};
use crate::reduction::{catalog, implication_pairs};

/// Which factor of the pair a functional reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    F,
    G,
}

/// Linear functional on the pair space.
pub type EvalFunctional = [i64; 12];

/// Functional whose dot with `(f, g)` is `f(x)` (side F) or `g(x)` (side G).
pub fn eval_functional(x: &[i64], side: Side) -> EvalFunctional {
    let mut v = [0i64; 12];
    let o = if side == Side::F { 0 } else { 6 };
    let mono = [x[0] * x[0], x[1] * x[1], x[2] * x[2], 2 * x[0] * x[1], 2 * x[0] * x[2], 2 * x[1] * x[2]];
    v[o..o + 6].copy_from_slice(&mono);
    v
}

fn sub(a: &EvalFunctional, b: &EvalFunctional) -> EvalFunctional {
    std::array::from_fn(|i| a[i] - b[i])
}

fn lift(c: &[i64], side: Side) -> Ray {
    let mut v = vec![0; 12];
    let o = if side == Side::F { 0 } else { 6 };
    v[o..o + 6].copy_from_slice(c);
    v
}

fn diff_coords(idx: &[usize]) -> Vec<Ray> {
    idx.iter()
        .map(|&i| {
            let mut v = vec![0; 12];
            v[i] = 1;
            v[i + 6] = -1;
            v
        })
        .collect()
}

/// Adds facet-condition consequences until the cone is stable.
pub fn saturate(cone: &mut Cone) -> Result<()> {
    let pairs = implication_pairs();
    let lifted: Vec<(Ray, Ray)> = [Side::F, Side::G]
        .iter()
        .flat_map(|&s| pairs.iter().map(move |(c, d)| (lift(c, s), lift(d, s))))
        .collect();
    loop {
        if cone.is_empty() {
            return Ok(());
        }
        let mut changed = false;
        for (c, d) in &lifted {
            if cone.edges().all(|e| crate::cones::dot(c, e) == 0)
                && cone.edges().any(|e| crate::cones::dot(d, e) < 0)
            {
                cone.add_in_place(d, false)?;
                changed = true;
                if cone.is_empty() {
                    return Ok(());
                }
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

/// Largest `Lambda` with `f = g` on it over the whole cone.
pub fn detect_lambda(cone: &Cone) -> Result<LambdaVariant> {
    let holds = |idx: &[usize]| diff_coords(idx).iter().all(|c| cone.edges().all(|e| crate::cones::dot(c, e) == 0));
    if !holds(&[0]) {
        return Err(Error::NotDuetCone);
    }
    if !holds(&[1, 3]) {
        return Ok(LambdaVariant::E1Line);
    }
    if !holds(&[2, 4]) {
        return Ok(LambdaVariant::E1E2Plane);
    }
    Ok(LambdaVariant::UnionPlanes)
}

/// A cone of pairs together with its bookkeeping.
#[derive(Clone, Debug)]
pub struct InTuneCone {
    pub cone: Cone,
    pub lambda: LambdaVariant,
    pub xs: Vec<Ray>,
    pub ys: Vec<Ray>,
}

#[derive(Serialize)]
pub struct InTuneDump {
    pub cone: ConeDump,
    pub lambda: LambdaVariant,
    pub xs: Vec<Ray>,
    pub ys: Vec<Ray>,
}

impl InTuneCone {
    pub fn k(&self) -> usize {
        self.xs.len()
    }

    pub fn is_solo(&self) -> bool {
        self.cone.contained_in_diagonal()
    }

    /// Deduplication key: edges, `Lambda` and both sequences.
    pub fn key(&self) -> Vec<u8> {
        let mut k = self.cone.canonical_key();
        k.push(self.lambda as u8);
        for s in [&self.xs, &self.ys] {
            k.extend_from_slice(&(s.len() as u32).to_le_bytes());
            for x in s {
                for &v in x {
                    k.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        k
    }

    pub fn dump(&self) -> InTuneDump {
        InTuneDump { cone: self.cone.dump(), lambda: self.lambda, xs: self.xs.clone(), ys: self.ys.clone() }
    }
}

/// `C_p x C_p` cut by `f11 = g11`, saturated.
pub fn initial_cone() -> Result<InTuneCone> {
    let cat = catalog();
    let base = Cone::from_constraints(6, &cat.a_set, &cat.b_set)?;
    let mut cone = Cone::product(&base, &base);
    let d = diff_coords(&[0]).remove(0);
    let neg: Ray = d.iter().map(|v| -v).collect();
    cone.add_in_place(&d, false)?;
    cone.add_in_place(&neg, false)?;
    saturate(&mut cone)?;
    cone.prune_in_place();
    cone.sort_edges();
    let lambda = detect_lambda(&cone)?;
    Ok(InTuneCone { cone, lambda, xs: vec![vec![1, 0, 0]], ys: vec![vec![1, 0, 0]] })
}

/// The initial covering `{T0}`.
pub fn initial_covering() -> Result<Covering> {
    let t = initial_cone()?;
    Ok(Covering { active: vec![t], solos: Vec::new(), iteration: 0, elapsed_ms: 0 })
}

/// Constraints placing the side's factor in `S(X, seq ++ [new])` given that it
/// already lies in `S(X, seq)`: `f(last) <= f(new)` and `f(new) <= f(m)` for all
/// `m` in `MIN(X \ (seq ++ [new]))`.
pub fn s_cone_constraints(lambda: LambdaVariant, seq: &[Ray], new: &[i64], side: Side) -> Result<Vec<EvalFunctional>> {
    let fnew = eval_functional(new, side);
    let mut out = Vec::new();
    if let Some(last) = seq.last() {
        out.push(sub(&fnew, &eval_functional(last, side)));
    }
    let q = MinQuery::lambda(lambda, seq.iter().cloned().chain(std::iter::once(new.to_vec())));
    for m in min_set(&q)?.iter() {
        out.push(sub(&eval_functional(m, side), &fnew));
    }
    Ok(out)
}

/// Outcome of refining one cone.
#[derive(Debug)]
pub enum Refinement {
    /// The cone lies in the diagonal and is kept as it is.
    Solo,
    Children { cones: Vec<InTuneCone>, computed: u64, fallbacks: u64 },
}

fn with_rows(cone: &Cone, rows: &[EvalFunctional]) -> Result<Cone> {
    let mut c = cone.clone();
    for r in rows {
        c.add_in_place(r, false)?;
        if c.is_empty() {
            break;
        }
    }
    Ok(c)
}

fn equal_on(cone: &Cone, x: &[i64], y: &[i64]) -> bool {
    let d = sub(&eval_functional(x, Side::F), &eval_functional(y, Side::G));
    cone.edges().all(|e| crate::cones::dot(&d, e) == 0)
}

/// Bookkeeping after `Lambda` grows: keep the longest prefix with matching
/// counts outside the new `Lambda`, drop entries inside it, then keep the
/// longest prefix on which `f(x_i) = g(y_i)` holds across the cone.
fn retune(cone: &Cone, lambda: LambdaVariant, xs: &[Ray], ys: &[Ray]) -> (Vec<Ray>, Vec<Ray>, bool) {
    let outside = |s: &[Ray]| s.iter().filter(|v| !lambda.contains(v)).count();
    let r = (0..=xs.len()).rev().find(|&r| outside(&xs[..r]) == outside(&ys[..r])).unwrap_or(0);
    let xf: Vec<Ray> = xs[..r].iter().filter(|v| !lambda.contains(v)).cloned().collect();
    let yf: Vec<Ray> = ys[..r].iter().filter(|v| !lambda.contains(v)).cloned().collect();
    let good = xf.iter().zip(&yf).take_while(|(x, y)| equal_on(cone, x, y)).count();
    let fell_back = good < xf.len();
    (xf[..good].to_vec(), yf[..good].to_vec(), fell_back)
}

/// Refines one in-tune cone.
pub fn refine_cone(t: &InTuneCone) -> Result<Refinement> {
    if t.is_solo() {
        return Ok(Refinement::Solo);
    }
    let qx = MinQuery::lambda(t.lambda, t.xs.iter().cloned());
    let qy = MinQuery::lambda(t.lambda, t.ys.iter().cloned());
    let mx = min_set(&qx)?;
    let my = min_set(&qy)?;
    let mut g_rows = Vec::with_capacity(my.len());
    for y in my.iter() {
        g_rows.push(s_cone_constraints(t.lambda, &t.ys, y, Side::G)?);
    }
    let mut cones = Vec::new();
    let mut computed = 0;
    let mut fallbacks = 0;
    for x in mx.iter() {
        let tx = with_rows(&t.cone, &s_cone_constraints(t.lambda, &t.xs, x, Side::F)?)?;
        computed += 1;
        if tx.is_empty() {
            continue;
        }
        let fx = eval_functional(x, Side::F);
        for (y, rows) in my.iter().zip(&g_rows) {
            let eq = sub(&fx, &eval_functional(y, Side::G));
            let neq: EvalFunctional = eq.map(|v| -v);
            let mut all = rows.clone();
            all.push(eq);
            all.push(neq);
            let mut c = with_rows(&tx, &all)?;
            computed += 1;
            if c.is_empty() {
                continue;
            }
            saturate(&mut c)?;
            if c.is_empty() {
                continue;
            }
            c.prune_in_place();
            c.sort_edges();
            if !c.is_pointed() {
                return Err(Error::NotPointed);
            }
            let lambda = detect_lambda(&c)?;
            let mut xs = t.xs.clone();
            let mut ys = t.ys.clone();
            xs.push(x.clone());
            ys.push(y.clone());
            if lambda != t.lambda {
                let (a, b, fell) = retune(&c, lambda, &xs, &ys);
                if fell {
                    fallbacks += 1;
                }
                xs = a;
                ys = b;
            }
            cones.push(InTuneCone { cone: c, lambda, xs, ys });
        }
    }
    Ok(Refinement::Children { cones, computed, fallbacks })
}

/// A covering: cones still to refine and cones already in the diagonal.
#[derive(Clone, Debug)]
pub struct Covering {
    pub active: Vec<InTuneCone>,
    pub solos: Vec<InTuneCone>,
    pub iteration: usize,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub elapsed_ms: u128,
    pub active_cones: usize,
    pub solo_cones: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub iterations: Vec<IterationStats>,
    /// No active cones remain.
    pub terminated: bool,
    /// Every cone of the last covering lies in the diagonal.
    pub all_diagonal: bool,
    pub cones_computed: u64,
    pub retune_fallbacks: u64,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub max_iter: usize,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    pub dump_dir: Option<PathBuf>,
}

fn dump(dir: &PathBuf, iteration: usize, cones: &[InTuneCone]) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidParameter(format!("dump: {e}"));
    std::fs::create_dir_all(dir).map_err(io)?;
    let f = File::create(dir.join(format!("iter_{iteration:02}.jsonl"))).map_err(io)?;
    let mut w = BufWriter::new(f);
    for c in cones {
        let line = serde_json::to_string(&c.dump()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        writeln!(w, "{line}").map_err(io)?;
    }
    Ok(())
}

/// Runs the refinement, calling `on_iter` after each covering is formed.
///
/// Iteration `i` reports the covering `T_i`; iteration 0 is the initial one.
/// Returns the report and the last covering.
pub fn run_with(opts: &RunOptions, mut on_iter: impl FnMut(&IterationStats)) -> Result<(Report, Covering)> {
    if opts.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let start = Instant::now();
    let mut active = vec![initial_cone()?];
    let mut solos: Vec<InTuneCone> = Vec::new();
    let mut solo_keys: HashSet<Vec<u8>> = HashSet::new();
    let mut stats = Vec::new();
    let mut computed: u64 = 1;
    let mut fallbacks: u64 = 0;
    let mut iteration = 0;
    loop {
        let (live, solo): (Vec<InTuneCone>, Vec<InTuneCone>) = active.into_iter().partition(|c| !c.is_solo());
        for s in solo {
            if solo_keys.insert(s.key()) {
                solos.push(s);
            }
        }
        active = live;
        let st = IterationStats {
            iteration,
            elapsed_ms: start.elapsed().as_millis(),
            active_cones: active.len(),
            solo_cones: solos.len() as u64,
        };
        info!("iteration {} active {} solo {}", st.iteration, st.active_cones, st.solo_cones);
        on_iter(&st);
        stats.push(st);
        if let Some(dir) = &opts.dump_dir {
            dump(dir, iteration, &active)?;
        }
        if active.is_empty() || iteration >= opts.max_iter {
            break;
        }
        let mut next: Vec<InTuneCone> = Vec::new();
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        for chunk in active.chunks(512) {
            let results: Vec<Result<Refinement>> = pool.install(|| chunk.par_iter().map(refine_cone).collect());
            for r in results {
                match r? {
                    Refinement::Solo => unreachable!("solo cones are filtered before refinement"),
                    Refinement::Children { cones, computed: c, fallbacks: f } => {
                        computed += c;
                        fallbacks += f;
                        for child in cones {
                            if seen.insert(child.key()) {
                                next.push(child);
                            }
                        }
                    }
                }
            }
        }
        active = next;
        iteration += 1;
    }
    if fallbacks > 0 {
        warn!("{fallbacks} cones kept a shortened sequence after Lambda grew");
    }
    let terminated = active.is_empty();
    let all_diagonal = active.iter().chain(&solos).all(|c| c.cone.contained_in_diagonal());
    let report = Report {
        iterations: stats,
        terminated,
        all_diagonal,
        cones_computed: computed,
        retune_fallbacks: fallbacks,
    };
    let covering = Covering { active, solos, iteration, elapsed_ms: start.elapsed().as_millis() };
    Ok((report, covering))
}

pub fn run(opts: &RunOptions) -> Result<Report> {
    Ok(run_with(opts, |_| {})?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functionals() {
        assert_eq!(eval_functional(&[1, 0, 0], Side::F), [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(eval_functional(&[1, 1, 0], Side::F), [1, 1, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(eval_functional(&[0, 1, -1], Side::G)[6..], [0, 1, 1, 0, 0, -2]);
    }

    #[test]
    fn initial_cone_shape() {
        let t = initial_cone().unwrap();
        assert_eq!(t.lambda, LambdaVariant::E1Line);
        assert!(!t.is_solo());
        let d = diff_coords(&[0]).remove(0);
        assert!(t.cone.contained_in_hyperplane(&d).unwrap());
        let mut again = t.cone.clone();
        saturate(&mut again).unwrap();
        assert_eq!(again.canonical_key(), t.cone.canonical_key());
    }

    #[test]
    fn saturation_adds_facet_condition() {
        let cat = catalog();
        let base = Cone::from_constraints(6, &cat.a_set, &cat.b_set).unwrap();
        let mut c = Cone::product(&base, &base);
        let f12 = lift(&[0, 0, 0, 1, 0, 0], Side::F);
        c.add_in_place(&f12.iter().map(|v| -v).collect::<Vec<_>>(), false).unwrap();
        saturate(&mut c).unwrap();
        let f23 = lift(&[0, 0, 0, 0, 0, 1], Side::F);
        assert!(c.edges().all(|e| crate::cones::dot(&f23, e) >= 0));
    }

    #[test]
    fn first_refinements() {
        let report = run(&RunOptions { max_iter: 3, jobs: 1, dump_dir: None }).unwrap();
        let counts: Vec<usize> = report.iterations.iter().map(|s| s.active_cones).collect();
        assert_eq!(counts, vec![1, 1, 4, 42]);
        assert!(!report.terminated);
    }
}
