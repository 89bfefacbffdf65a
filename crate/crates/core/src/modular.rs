//! Levels, the Sturm-type cutoff and the isospectrality certificate for
//! rational positive definite forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_linalg::{int, Rat, RatMat};
use crate::forms::{compare_spectra, is_positive_definite, representation_numbers, EnumerationDomain, QuadraticForm, SpectralComparison};

/// Integer entries with even diagonal.
pub fn is_even(q: &QuadraticForm) -> bool {
    let m = q.matrix();
    m.is_integral() && (0..q.dim()).all(|i| m[(i, i)].to_integer().is_even())
}

/// Least common multiple of the denominators of the off-diagonal entries and
/// of the halved diagonal entries.
fn even_denominator(m: &RatMat) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let d = if i == j { (&m[(i, i)] / int(2)).denom().clone() } else { m[(i, j)].denom().clone() };
            c = c.lcm(&d);
        }
    }
    c
}

fn to_u64(b: &BigInt) -> Result<u64> {
    b.to_u64().ok_or(Error::Overflow)
}

/// Minimal positive integer `c` with `cQ` even, and `cQ` itself.
pub fn even_rescale(q: &QuadraticForm) -> Result<(u64, QuadraticForm)> {
    let c = even_denominator(q.matrix());
    let scaled = q.scale(&Rat::from_integer(c.clone()));
    Ok((to_u64(&c)?, scaled))
}

/// Smallest `N` such that `N Q^{-1}` is even.
pub fn level(q: &QuadraticForm) -> Result<u64> {
    if !is_even(q) {
        return Err(Error::NotEven);
    }
    if !is_positive_definite(q) {
        return Err(Error::NotPositiveDefinite);
    }
    let (inv, _) = q.matrix().inverse_det()?;
    to_u64(&even_denominator(&inv))
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `mu0(N) = N prod_{p | N} (1 + 1/p)`.
pub fn mu0(n: u64) -> Result<Rat> {
    if n == 0 {
        return Err(Error::InvalidParameter("level must be positive".into()));
    }
    let mut m = Rat::from_integer(BigInt::from(n));
    for p in prime_divisors(n) {
        m *= Rat::new(BigInt::from(p + 1), BigInt::from(p));
    }
    Ok(m)
}

/// `floor(mu0(N) k / 12) + 1` for weight `k = dim / 2`.
pub fn sturm_cutoff(dim: usize, n: u64) -> Result<u64> {
    if dim % 2 == 1 {
        return Err(Error::OddDimension(dim));
    }
    let k = Rat::from_integer(BigInt::from(dim / 2));
    let v = (mu0(n)? * k / int(12)).floor().to_integer() + BigInt::one();
    to_u64(&v)
}

/// `diag(2, Q)` for a form of odd dimension.
pub fn pad_to_even_dim(q: &QuadraticForm) -> Result<QuadraticForm> {
    if q.dim() % 2 == 0 {
        return Err(Error::Dimension(format!("already of even dimension {}", q.dim())));
    }
    QuadraticForm::new(RatMat::block_diag(&RatMat::from_i64(&[&[2]]), q.matrix()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Isospectral,
    NotIsospectral,
    NotApplicable,
}

/// Outcome of [`certify_isospectral`]. Values refer to the even rescalings
/// `cP`, `cQ` (padded to even dimension if needed).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub det_equal: bool,
    pub scale: Option<u64>,
    pub level: Option<u64>,
    pub level_other: Option<u64>,
    pub cutoff: Option<u64>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub checked_to: Option<Rat>,
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub mismatch: Option<SpectralComparison>,
    /// The cutoff theorem is stated for real-valued characters; this is
    /// assumed, not checked.
    pub assumes_real_character: bool,
}

fn ser_opt_rat<S: serde::Serializer>(r: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&crate::exact_linalg::format_rat(r)),
        None => s.serialize_none(),
    }
}

impl Certificate {
    fn new(verdict: Verdict) -> Self {
        Certificate {
            det_equal: false,
            scale: None,
            level: None,
            level_other: None,
            cutoff: None,
            checked_to: None,
            verdict,
            reason: None,
            mismatch: None,
            assumes_real_character: true,
        }
    }

    fn with_reason(mut self, r: impl Into<String>) -> Self {
        self.reason = Some(r.into());
        self
    }
}

/// Decides isospectrality of two positive definite rational forms.
///
/// Both are rescaled to even forms by their minimal constants and padded to
/// even dimension; then determinants, levels and representation numbers up
/// to twice the cutoff are compared (coefficient `a_n` of the theta series of
/// an even form counts vectors of value `2n`).
pub fn certify_isospectral(p: &QuadraticForm, q: &QuadraticForm) -> Result<Certificate> {
    if p.dim() != q.dim() {
        return Ok(Certificate::new(Verdict::NotApplicable).with_reason(format!("dimensions {} and {}", p.dim(), q.dim())));
    }
    if !is_positive_definite(p) || !is_positive_definite(q) {
        return Ok(Certificate::new(Verdict::NotApplicable).with_reason("form not positive definite"));
    }
    let (cp, mut pe) = even_rescale(p)?;
    let (cq, mut qe) = even_rescale(q)?;
    if cp != cq {
        return Ok(Certificate::new(Verdict::NotApplicable)
            .with_reason(format!("even rescaling constants differ ({cp} vs {cq})")));
    }
    if pe.dim() % 2 == 1 {
        pe = pad_to_even_dim(&pe)?;
        qe = pad_to_even_dim(&qe)?;
    }
    let mut cert = Certificate::new(Verdict::NotIsospectral);
    cert.scale = Some(cp);
    cert.det_equal = pe.det() == qe.det();
    if !cert.det_equal {
        return Ok(cert.with_reason("determinants differ"));
    }
    let (np, nq) = (level(&pe)?, level(&qe)?);
    cert.level = Some(np);
    cert.level_other = Some(nq);
    if np != nq {
        return Ok(cert.with_reason("levels differ"));
    }
    let cutoff = sturm_cutoff(pe.dim(), np)?;
    cert.cutoff = Some(cutoff);
    let tmax = Rat::from_integer(BigInt::from(cutoff) * 2);
    let s1 = representation_numbers(&pe, &tmax, EnumerationDomain::full())?;
    let s2 = representation_numbers(&qe, &tmax, EnumerationDomain::full())?;
    cert.checked_to = Some(tmax);
    match compare_spectra(&s1, &s2) {
        SpectralComparison::Equal => cert.verdict = Verdict::Isospectral,
        m => {
            cert.reason = Some("representation numbers differ".into());
            cert.mismatch = Some(m);
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::rat;

    fn diag(v: &[i64]) -> QuadraticForm {
        QuadraticForm::new(RatMat::diag(&v.iter().map(|&x| int(x)).collect::<Vec<_>>())).unwrap()
    }

    #[test]
    fn rescale_examples() {
        let (c, q) = even_rescale(&diag(&[2, 2])).unwrap();
        assert_eq!(c, 1);
        assert!(is_even(&q));
        assert_eq!(even_rescale(&diag(&[1, 1])).unwrap().0, 2);
        let h = QuadraticForm::new(RatMat::from_rows(vec![vec![int(1), rat(1, 3)], vec![rat(1, 3), int(1)]]).unwrap()).unwrap();
        assert_eq!(even_rescale(&h).unwrap().0, 6);
    }

    #[test]
    fn level_examples() {
        assert_eq!(level(&diag(&[2, 2])).unwrap(), 4);
        assert_eq!(level(&diag(&[1, 1])), Err(Error::NotEven));
        let a2 = QuadraticForm::from_i64(&[&[2, 1], &[1, 2]]).unwrap();
        assert_eq!(level(&a2).unwrap(), 3);
    }

    #[test]
    fn mu0_and_cutoff() {
        assert_eq!(mu0(1).unwrap(), int(1));
        assert_eq!(mu0(12).unwrap(), int(24));
        assert_eq!(mu0(7).unwrap(), int(8));
        assert_eq!(sturm_cutoff(16, 1).unwrap(), 1);
        assert_eq!(sturm_cutoff(3, 1), Err(Error::OddDimension(3)));
    }

    #[test]
    fn padding() {
        assert_eq!(pad_to_even_dim(&diag(&[2])).unwrap(), diag(&[2, 2]));
        assert!(pad_to_even_dim(&diag(&[2, 2])).is_err());
    }

    #[test]
    fn certify_simple() {
        let q = QuadraticForm::from_i64(&[&[2, 1], &[1, 4]]).unwrap();
        assert_eq!(certify_isospectral(&q, &q).unwrap().verdict, Verdict::Isospectral);
        let c = certify_isospectral(&diag(&[2, 2]), &diag(&[2, 4])).unwrap();
        assert_eq!(c.verdict, Verdict::NotIsospectral);
        assert!(!c.det_equal);
        let odd = certify_isospectral(&diag(&[1, 2, 3]), &diag(&[1, 2, 3])).unwrap();
        assert_eq!(odd.verdict, Verdict::Isospectral);
    }
}
