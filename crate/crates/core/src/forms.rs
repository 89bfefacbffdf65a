//! Quadratic forms, lattice bases, exact enumeration and representation numbers.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact_linalg::{format_rat, int, ldlt, rat_to_f64, Rat, RatMat};

/// Symmetric rational matrix `Q` with `q(x) = x^T Q x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FormRepr", into = "FormRepr")]
pub struct QuadraticForm {
    q: RatMat,
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    dim: usize,
    #[serde(rename = "Q")]
    q: RatMat,
}

impl TryFrom<FormRepr> for QuadraticForm {
    type Error = Error;
    fn try_from(r: FormRepr) -> Result<Self> {
        if r.q.rows() != r.dim {
            return Err(Error::Dimension(format!("dim {} but Q has {} rows", r.dim, r.q.rows())));
        }
        QuadraticForm::new(r.q)
    }
}

impl From<QuadraticForm> for FormRepr {
    fn from(f: QuadraticForm) -> Self {
        FormRepr { dim: f.dim(), q: f.q }
    }
}

impl QuadraticForm {
    pub fn new(q: RatMat) -> Result<Self> {
        if !q.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(QuadraticForm { q })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(RatMat::from_i64(rows))
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn matrix(&self) -> &RatMat {
        &self.q
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rat {
        &self.q[(i, j)]
    }

    pub fn eval(&self, x: &[i64]) -> Rat {
        self.q.eval_i64(x)
    }

    pub fn det(&self) -> Rat {
        self.q.det().expect("square by construction")
    }

    /// `B^T Q B`.
    pub fn transform(&self, b: &RatMat) -> QuadraticForm {
        QuadraticForm { q: &(&b.transpose() * &self.q) * b }
    }

    pub fn scale(&self, c: &Rat) -> QuadraticForm {
        QuadraticForm { q: self.q.scale(c) }
    }

    /// Dual form `Q^{-1}`.
    pub fn dual(&self) -> Result<QuadraticForm> {
        Ok(QuadraticForm { q: self.q.inverse_det()?.0 })
    }
}

/// Invertible rational basis matrix `A`; the lattice is `A Z^n` (columns).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BasisRepr", into = "BasisRepr")]
pub struct LatticeBasis {
    a: RatMat,
}

#[derive(Serialize, Deserialize)]
struct BasisRepr {
    dim: usize,
    #[serde(rename = "A")]
    a: RatMat,
}

impl TryFrom<BasisRepr> for LatticeBasis {
    type Error = Error;
    fn try_from(r: BasisRepr) -> Result<Self> {
        if r.a.rows() != r.dim {
            return Err(Error::Dimension(format!("dim {} but A has {} rows", r.dim, r.a.rows())));
        }
        LatticeBasis::new(r.a)
    }
}

impl From<LatticeBasis> for BasisRepr {
    fn from(b: LatticeBasis) -> Self {
        BasisRepr { dim: b.dim(), a: b.a }
    }
}

impl LatticeBasis {
    pub fn new(a: RatMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("basis matrix must be square".into()));
        }
        if a.det()?.is_zero() {
            return Err(Error::Singular);
        }
        Ok(LatticeBasis { a })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(RatMat::from_i64(rows))
    }

    /// Basis whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<Rat>]) -> Result<Self> {
        let rows = RatMat::from_rows(cols.to_vec())?;
        Self::new(rows.transpose())
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn matrix(&self) -> &RatMat {
        &self.a
    }

    pub fn volume(&self) -> Rat {
        self.a.det().expect("square by construction").abs()
    }

    /// Lattice vector `A x`.
    pub fn vector(&self, x: &[i64]) -> Vec<Rat> {
        self.a.mul_vec_i64(x)
    }

    /// Whether a rational vector lies in the lattice.
    pub fn contains(&self, v: &[Rat]) -> bool {
        let (inv, _) = self.a.inverse_det().expect("invertible by construction");
        (0..self.dim()).all(|i| {
            let mut s = Rat::zero();
            for (j, vj) in v.iter().enumerate() {
                s += &inv[(i, j)] * vj;
            }
            s.is_integer()
        })
    }
}

/// Gram form `A^T A`.
pub fn gram(basis: &LatticeBasis) -> QuadraticForm {
    QuadraticForm { q: &basis.a.transpose() * &basis.a }
}

/// Dual basis `(A^{-1})^T`.
pub fn dual_basis(basis: &LatticeBasis) -> LatticeBasis {
    let (inv, _) = basis.a.inverse_det().expect("invertible by construction");
    LatticeBasis { a: inv.transpose() }
}

/// Block-diagonal basis of the product lattice.
pub fn direct_product(b1: &LatticeBasis, b2: &LatticeBasis) -> LatticeBasis {
    LatticeBasis { a: RatMat::block_diag(&b1.a, &b2.a) }
}

/// Orthogonal sum of two forms.
pub fn form_sum(q1: &QuadraticForm, q2: &QuadraticForm) -> QuadraticForm {
    QuadraticForm { q: RatMat::block_diag(&q1.q, &q2.q) }
}

/// Positive definiteness via the pivots of `L D L^T`.
pub fn is_positive_definite(q: &QuadraticForm) -> bool {
    match ldlt(&q.q) {
        Ok((_, d)) => (0..q.dim()).all(|i| d[(i, i)].is_positive()),
        Err(_) => false,
    }
}

/// Which subset of `Z^n` an enumeration ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainTag {
    FullInteger,
    /// Primitive vectors whose last non-zero coordinate is positive.
    ZStar,
    ZStarMinusE1Line,
    ZStarMinusE1E2Plane,
    ZStarMinusUnionPlanes,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnumerationDomain {
    pub tag: DomainTag,
    pub removed: BTreeSet<Vec<i64>>,
}

impl EnumerationDomain {
    pub fn new(tag: DomainTag) -> Self {
        EnumerationDomain { tag, removed: BTreeSet::new() }
    }

    pub fn full() -> Self {
        Self::new(DomainTag::FullInteger)
    }

    pub fn zstar() -> Self {
        Self::new(DomainTag::ZStar)
    }

    pub fn with_removed(mut self, removed: impl IntoIterator<Item = Vec<i64>>) -> Self {
        self.removed.extend(removed);
        self
    }

    fn signed(&self) -> bool {
        self.tag != DomainTag::FullInteger
    }

    /// Full membership test (used for leaves and by tests).
    pub fn contains(&self, x: &[i64]) -> bool {
        if self.removed.contains(x) {
            return false;
        }
        if self.tag == DomainTag::FullInteger {
            return true;
        }
        if !in_zstar(x) {
            return false;
        }
        let zero_from = |k: usize| x.iter().skip(k).all(|&v| v == 0);
        match self.tag {
            DomainTag::FullInteger | DomainTag::ZStar => true,
            DomainTag::ZStarMinusE1Line => !zero_from(1),
            DomainTag::ZStarMinusE1E2Plane => !zero_from(2),
            DomainTag::ZStarMinusUnionPlanes => {
                !zero_from(2) && !(x.len() >= 2 && x[1] == 0 && zero_from(3))
            }
        }
    }
}

/// Membership in `Z^n_*`: primitive with positive last non-zero coordinate.
pub fn in_zstar(x: &[i64]) -> bool {
    match x.iter().rev().find(|&&v| v != 0) {
        None => false,
        Some(&last) => last > 0 && x.iter().fold(0i64, |g, &v| g.gcd(&v)) == 1,
    }
}

/// Exact Fincke-Pohst style enumeration of `{x in domain : q(x) <= tmax}`.
///
/// Vectors come out ordered lexicographically by `(x_n, x_{n-1}, ..., x_1)`.
pub struct Enumerator {
    n: usize,
    /// `l[j][i]` for `j > i`: the unit lower-triangular factor.
    l: Vec<Vec<Rat>>,
    d: Vec<Rat>,
    tmax: Rat,
    domain: EnumerationDomain,
    x: Vec<i64>,
    hi: Vec<i64>,
    center: Vec<Rat>,
    partial: Vec<Rat>,
    level: usize,
    done: bool,
}

impl Enumerator {
    pub fn new(q: &QuadraticForm, tmax: &Rat, domain: EnumerationDomain) -> Result<Self> {
        let n = q.dim();
        let (l, d) = ldlt(&q.q).map_err(|_| Error::NotPositiveDefinite)?;
        let d: Vec<Rat> = (0..n).map(|i| d[(i, i)].clone()).collect();
        if d.iter().any(|v| !v.is_positive()) {
            return Err(Error::NotPositiveDefinite);
        }
        let l = (0..n).map(|j| (0..n).map(|i| l[(j, i)].clone()).collect()).collect();
        let mut e = Enumerator {
            n,
            l,
            d,
            tmax: tmax.clone(),
            domain,
            x: vec![0; n],
            hi: vec![0; n],
            center: vec![Rat::zero(); n],
            partial: vec![Rat::zero(); n],
            level: n.saturating_sub(1),
            done: n == 0 || tmax.is_negative(),
        };
        if !e.done {
            let top = n - 1;
            e.enter_level(top);
        }
        Ok(e)
    }

    /// Sets up bounds for `level`, given coordinates above it.
    fn enter_level(&mut self, level: usize) {
        let mut c = Rat::zero();
        for j in level + 1..self.n {
            if self.x[j] != 0 {
                c += &self.l[j][level] * BigInt::from(self.x[j]);
            }
        }
        let budget = &self.tmax - &self.partial[level];
        let s = &budget / &self.d[level];
        let (mut lo, hi) = int_range(&c, &s);
        if self.domain.signed() && self.x[level + 1..].iter().all(|&v| v == 0) {
            lo = lo.max(if level == 0 { 1 } else { 0 });
        }
        self.center[level] = c;
        self.hi[level] = hi;
        self.x[level] = lo - 1;
        self.level = level;
    }
}

impl Iterator for Enumerator {
    type Item = (Vec<i64>, Rat);

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let i = self.level;
            self.x[i] += 1;
            if self.x[i] > self.hi[i] {
                if i + 1 == self.n {
                    self.done = true;
                    return None;
                }
                self.level = i + 1;
                continue;
            }
            let y = &self.center[i] + int(self.x[i]);
            let value = &self.partial[i] + &self.d[i] * &y * &y;
            if i == 0 {
                if self.domain.contains(&self.x) {
                    return Some((self.x.clone(), value));
                }
            } else {
                self.partial[i - 1] = value;
                self.enter_level(i - 1);
            }
        }
        None
    }
}

/// Integers `x` with `(x + c)^2 <= s`, as an inclusive range (possibly empty).
fn int_range(c: &Rat, s: &Rat) -> (i64, i64) {
    if s.is_negative() {
        return (1, 0);
    }
    let cf = rat_to_f64(c);
    let sf = rat_to_f64(s).max(0.0).sqrt();
    let fits = |x: i64| {
        let y = c + int(x);
        &y * &y <= *s
    };
    let below_center = |x: i64| (c + int(x)) <= Rat::zero();
    let above_center = |x: i64| (c + int(x)) >= Rat::zero();
    let mut hi = (-cf + sf).floor() as i64;
    while below_center(hi + 1) || fits(hi + 1) {
        hi += 1;
    }
    while !(below_center(hi) || fits(hi)) {
        hi -= 1;
    }
    let mut lo = (-cf - sf).ceil() as i64;
    while above_center(lo - 1) || fits(lo - 1) {
        lo -= 1;
    }
    while !(above_center(lo) || fits(lo)) {
        lo += 1;
    }
    (lo, hi)
}

/// Streams all `(x, q(x))` with `x` in the domain and `q(x) <= tmax`.
pub fn enumerate_up_to(q: &QuadraticForm, tmax: &Rat, domain: EnumerationDomain) -> Result<Enumerator> {
    Enumerator::new(q, tmax, domain)
}

/// Finite prefix of the representation numbers of a form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepSpectrum {
    pub cutoff: Rat,
    pub entries: Vec<(Rat, u64)>,
}

impl RepSpectrum {
    pub fn multiplicity(&self, t: &Rat) -> u64 {
        self.entries
            .binary_search_by(|(v, _)| v.cmp(t))
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Total count of enumerated vectors.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, m)| m).sum()
    }

    /// Restriction to values `<= t`.
    pub fn truncate(&self, t: &Rat) -> RepSpectrum {
        RepSpectrum {
            cutoff: t.clone().min(self.cutoff.clone()),
            entries: self.entries.iter().filter(|(v, _)| v <= t).cloned().collect(),
        }
    }

    /// Spectrum of the orthogonal sum, i.e. the convolution of both spectra.
    pub fn convolve(&self, other: &RepSpectrum) -> RepSpectrum {
        let cutoff = self.cutoff.clone().min(other.cutoff.clone());
        let mut acc: BTreeMap<Rat, u64> = BTreeMap::new();
        for (a, m) in &self.entries {
            for (b, k) in &other.entries {
                let v = a + b;
                if v <= cutoff {
                    *acc.entry(v).or_insert(0) += m * k;
                }
            }
        }
        RepSpectrum { cutoff, entries: acc.into_iter().collect() }
    }
}

impl Serialize for RepSpectrum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<(String, u64)> = self.entries.iter().map(|(v, m)| (format_rat(v), *m)).collect();
        rows.serialize(s)
    }
}

pub fn representation_numbers(q: &QuadraticForm, tmax: &Rat, domain: EnumerationDomain) -> Result<RepSpectrum> {
    let mut acc: BTreeMap<Rat, u64> = BTreeMap::new();
    for (_, v) in enumerate_up_to(q, tmax, domain)? {
        *acc.entry(v).or_insert(0) += 1;
    }
    Ok(RepSpectrum { cutoff: tmax.clone(), entries: acc.into_iter().collect() })
}

/// Outcome of a bounded spectral comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SpectralComparison {
    Equal,
    FirstMismatch {
        #[serde(with = "crate::exact_linalg::rat_serde")]
        value: Rat,
        m1: u64,
        m2: u64,
    },
    DimensionMismatch { dim1: usize, dim2: usize },
}

/// First value where two spectra differ, if any.
pub fn compare_spectra(s1: &RepSpectrum, s2: &RepSpectrum) -> SpectralComparison {
    let mut values: BTreeSet<&Rat> = s1.entries.iter().map(|(v, _)| v).collect();
    values.extend(s2.entries.iter().map(|(v, _)| v));
    for v in values {
        let (m1, m2) = (s1.multiplicity(v), s2.multiplicity(v));
        if m1 != m2 {
            return SpectralComparison::FirstMismatch { value: v.clone(), m1, m2 };
        }
    }
    SpectralComparison::Equal
}

/// Compares representation numbers over `Z^n` for all values `<= tmax`.
pub fn isospectral_up_to(q1: &QuadraticForm, q2: &QuadraticForm, tmax: &Rat) -> Result<SpectralComparison> {
    if q1.dim() != q2.dim() {
        return Ok(SpectralComparison::DimensionMismatch { dim1: q1.dim(), dim2: q2.dim() });
    }
    let s1 = representation_numbers(q1, tmax, EnumerationDomain::full())?;
    let s2 = representation_numbers(q2, tmax, EnumerationDomain::full())?;
    Ok(compare_spectra(&s1, &s2))
}

/// Theta series coefficients: the representation numbers of the Gram form.
pub fn theta_coefficients(basis: &LatticeBasis, tmax: &Rat) -> Result<RepSpectrum> {
    representation_numbers(&gram(basis), tmax, EnumerationDomain::full())
}

/// Both sides of the Poisson summation formula in floating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoissonCheck {
    /// Heat trace over the dual lattice.
    pub lhs: f64,
    /// `vol / (4 pi t)^{n/2}` times the Gaussian sum over the lattice.
    pub rhs: f64,
    pub rel_err: f64,
}

/// Truncated Poisson summation check.
///
/// The primal sum runs over `|gamma| <= radius`; the dual sum over
/// `|gamma*| <= radius / (4 pi t)`, which balances the two Gaussian tails.
pub fn poisson_check(basis: &LatticeBasis, t: f64, radius: f64) -> Result<PoissonCheck> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    let n = basis.dim() as f64;
    let pi = std::f64::consts::PI;
    let primal_cut = ceil_f64_rat(radius * radius);
    let dual_radius = radius / (4.0 * pi * t);
    let dual_cut = ceil_f64_rat(dual_radius * dual_radius);
    let mut primal = 0.0;
    for (_, v) in enumerate_up_to(&gram(basis), &primal_cut, EnumerationDomain::full())? {
        primal += (-rat_to_f64(&v) / (4.0 * t)).exp();
    }
    let mut dual = 0.0;
    for (_, v) in enumerate_up_to(&gram(&dual_basis(basis)), &dual_cut, EnumerationDomain::full())? {
        dual += (-4.0 * pi * pi * rat_to_f64(&v) * t).exp();
    }
    let vol = rat_to_f64(&basis.volume());
    let rhs = vol / (4.0 * pi * t).powf(n / 2.0) * primal;
    let lhs = dual;
    Ok(PoissonCheck { lhs, rhs, rel_err: ((lhs - rhs) / lhs).abs() })
}

fn ceil_f64_rat(x: f64) -> Rat {
    Rat::from_integer(BigInt::from(x.ceil().max(0.0).to_i64().unwrap_or(i64::MAX)))
}

/// Shortest non-zero value of a positive definite form.
pub fn minimum(q: &QuadraticForm) -> Result<Rat> {
    let bound = (0..q.dim()).map(|i| q.entry(i, i).clone()).max().unwrap_or_else(Rat::one);
    enumerate_up_to(q, &bound, EnumerationDomain::zstar())?
        .map(|(_, v)| v)
        .min()
        .ok_or(Error::NotPositiveDefinite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::rat;

    fn ints(rows: &[&[i64]]) -> QuadraticForm {
        QuadraticForm::from_i64(rows).unwrap()
    }

    #[test]
    fn gram_of_d3() {
        let b = LatticeBasis::from_i64(&[&[1, 1, 0], &[1, -1, 1], &[0, 0, -1]]).unwrap();
        assert_eq!(gram(&b), ints(&[&[2, 0, 1], &[0, 2, -1], &[1, -1, 2]]));
    }

    #[test]
    fn dual_of_scaled_identity() {
        let b = LatticeBasis::from_i64(&[&[2, 0], &[0, 2]]).unwrap();
        let d = dual_basis(&b);
        assert_eq!(d.matrix(), &RatMat::diag(&[rat(1, 2), rat(1, 2)]));
        assert_eq!(dual_basis(&d), b);
    }

    #[test]
    fn positive_definiteness() {
        assert!(is_positive_definite(&ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])));
        assert!(!is_positive_definite(&ints(&[&[1, 0], &[0, -1]])));
        assert!(!is_positive_definite(&ints(&[&[0, 0], &[0, 1]])));
    }

    #[test]
    fn enumerate_unit_ball() {
        let q = ints(&[&[1, 0], &[0, 1]]);
        let v: Vec<_> = enumerate_up_to(&q, &int(1), EnumerationDomain::full()).unwrap().collect();
        assert_eq!(v.len(), 5);
        let order: Vec<Vec<i64>> = v.into_iter().map(|(x, _)| x).collect();
        assert_eq!(order, vec![vec![0, -1], vec![-1, 0], vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn enumerate_zstar_i3() {
        let q = ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let norm1: Vec<_> = enumerate_up_to(&q, &int(1), EnumerationDomain::zstar()).unwrap().collect();
        assert_eq!(norm1.len(), 3);
        let norm2 = enumerate_up_to(&q, &int(2), EnumerationDomain::zstar()).unwrap().count();
        assert_eq!(norm2, 9);
    }

    #[test]
    fn rep_numbers_i2() {
        let s = representation_numbers(&ints(&[&[1, 0], &[0, 1]]), &int(2), EnumerationDomain::full()).unwrap();
        assert_eq!(s.entries, vec![(int(0), 1), (int(1), 4), (int(2), 4)]);
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"[["0",1],["1",4],["2",4]]"#);
    }

    #[test]
    fn mismatch_diag() {
        let r = isospectral_up_to(&ints(&[&[1, 0], &[0, 1]]), &ints(&[&[1, 0], &[0, 2]]), &int(4)).unwrap();
        assert_eq!(r, SpectralComparison::FirstMismatch { value: int(1), m1: 4, m2: 2 });
    }

    #[test]
    fn theta_of_z() {
        let s = theta_coefficients(&LatticeBasis::from_i64(&[&[1]]).unwrap(), &int(9)).unwrap();
        assert_eq!(s.entries, vec![(int(0), 1), (int(1), 2), (int(4), 2), (int(9), 2)]);
    }

    #[test]
    fn int_range_exact() {
        assert_eq!(int_range(&Rat::zero(), &int(4)), (-2, 2));
        assert_eq!(int_range(&rat(1, 2), &rat(1, 4)), (-1, 0));
        let (lo, hi) = int_range(&rat(1, 3), &rat(1, 100));
        assert!(lo > hi);
    }

    #[test]
    fn form_json_round_trip() {
        let q = QuadraticForm::new(RatMat::from_rows(vec![vec![rat(1, 2), int(0)], vec![int(0), int(1)]]).unwrap()).unwrap();
        let js = serde_json::to_string(&q).unwrap();
        assert_eq!(js, r#"{"dim":2,"Q":[["1/2","0"],["0","1"]]}"#);
        assert_eq!(serde_json::from_str::<QuadraticForm>(&js).unwrap(), q);
        assert!(serde_json::from_str::<QuadraticForm>(r#"{"dim":2,"Q":[[1,2],[3,4]]}"#).is_err());
    }

    #[test]
    fn poisson_small() {
        let z = LatticeBasis::from_i64(&[&[1]]).unwrap();
        assert!(poisson_check(&z, 1.0, 20.0).unwrap().rel_err < 1e-9);
        let z2 = LatticeBasis::from_i64(&[&[2, 0], &[0, 2]]).unwrap();
        assert!(poisson_check(&z2, 0.5, 20.0).unwrap().rel_err < 1e-9);
    }
}
