//! Linear codes over `Z/qZ`, Construction A and the two code relations that
//! force isospectral preimages.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{hnf, Rat, RatMat};
use crate::forms::LatticeBasis;

/// Default bound on the number of codewords materialised.
pub const DEFAULT_CODEWORD_CAP: usize = 1 << 20;

/// A submodule of `(Z/qZ)^n` given by generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodeRepr")]
pub struct LinearCode {
    pub q: u64,
    pub n: usize,
    pub generators: Vec<Vec<u64>>,
}

#[derive(Deserialize)]
struct CodeRepr {
    q: u64,
    n: usize,
    generators: Vec<Vec<i64>>,
}

impl TryFrom<CodeRepr> for LinearCode {
    type Error = Error;
    fn try_from(r: CodeRepr) -> Result<Self> {
        LinearCode::new(r.q, r.n, &r.generators)
    }
}

impl LinearCode {
    /// Reduces generators mod `q`; `q = 1` is allowed as the degenerate case.
    pub fn new(q: u64, n: usize, generators: &[Vec<i64>]) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("modulus must be positive".into()));
        }
        let mut gens = Vec::with_capacity(generators.len());
        for g in generators {
            if g.len() != n {
                return Err(Error::Dimension(format!("generator of length {} in a code of length {n}", g.len())));
            }
            gens.push(g.iter().map(|&x| x.rem_euclid(q as i64) as u64).collect());
        }
        Ok(LinearCode { q, n, generators: gens })
    }

    /// Code generated by an explicit list of codewords.
    pub fn from_words(q: u64, words: &[Vec<i64>]) -> Result<Self> {
        let n = words.first().map_or(0, |w| w.len());
        Self::new(q, n, words)
    }

    pub fn codewords(&self) -> Result<BTreeSet<Vec<u64>>> {
        self.codewords_capped(DEFAULT_CODEWORD_CAP)
    }

    /// Span closure under adding generators.
    pub fn codewords_capped(&self, cap: usize) -> Result<BTreeSet<Vec<u64>>> {
        let zero = vec![0u64; self.n];
        let mut seen = BTreeSet::from([zero.clone()]);
        let mut frontier = vec![zero];
        while let Some(w) = frontier.pop() {
            for g in &self.generators {
                let s: Vec<u64> = w.iter().zip(g).map(|(a, b)| (a + b) % self.q).collect();
                if seen.insert(s.clone()) {
                    if seen.len() > cap {
                        return Err(Error::CodeTooLarge(cap));
                    }
                    frontier.push(s);
                }
            }
        }
        Ok(seen)
    }

    pub fn contains(&self, x: &[i64]) -> Result<bool> {
        let r: Vec<u64> = x.iter().map(|&v| v.rem_euclid(self.q as i64) as u64).collect();
        Ok(self.codewords()?.contains(&r))
    }
}

/// Basis of `pi_q^{-1}(C)`: the Hermite normal form of `[c_1 ... c_k | qI]`.
pub fn construction_a(code: &LinearCode) -> Result<LatticeBasis> {
    let n = code.n;
    let k = code.generators.len();
    let m: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigInt> = code.generators.iter().map(|g| BigInt::from(g[i])).collect();
            row.extend((0..n).map(|j| BigInt::from(if i == j { code.q } else { 0 })));
            debug_assert_eq!(row.len(), k + n);
            row
        })
        .collect();
    let h = hnf(&m)?;
    let rows = h.into_iter().map(|r| r.into_iter().map(Rat::from_integer).collect()).collect();
    LatticeBasis::new(RatMat::from_rows(rows)?)
}

fn integer_columns(basis: &LatticeBasis) -> Result<Vec<Vec<BigInt>>> {
    let a = basis.matrix();
    if !a.is_integral() {
        return Err(Error::NotIntegral);
    }
    Ok((0..a.cols()).map(|j| a.col(j).iter().map(|x| x.to_integer()).collect()).collect())
}

/// The `vol(L)`-nary code `pi_q(L)` of an integer lattice.
pub fn code_of_integer_lattice(basis: &LatticeBasis) -> Result<LinearCode> {
    integer_columns(basis)?;
    let q = basis.volume().to_integer();
    code_of_integer_lattice_mod(basis, q.to_u64().ok_or(Error::Overflow)?)
}

/// Smallest `e > 0` with `e Z^n` contained in `L`.
pub fn lattice_exponent(basis: &LatticeBasis) -> Result<u64> {
    integer_columns(basis)?;
    let (inv, _) = basis.matrix().inverse_det()?;
    inv.denominator_lcm().to_u64().ok_or(Error::Overflow)
}

/// `pi_q(L)` for any `q` with `q Z^n` contained in `L`.
pub fn code_of_integer_lattice_mod(basis: &LatticeBasis, q: u64) -> Result<LinearCode> {
    let cols = integer_columns(basis)?;
    let e = lattice_exponent(basis)?;
    if q == 0 || q % e != 0 {
        return Err(Error::InvalidParameter(format!("{q} Z^n is not contained in the lattice (exponent {e})")));
    }
    let qb = BigInt::from(q);
    let gens: Vec<Vec<i64>> = cols
        .iter()
        .map(|c| c.iter().map(|x| x.mod_floor(&qb).to_i64().expect("below q")).collect())
        .collect();
    LinearCode::new(q, basis.dim(), &gens)
}

fn check_compatible(c1: &LinearCode, c2: &LinearCode) -> bool {
    c1.q == c2.q && c1.n == c2.n
}

/// Equal multisets of sorted codewords.
pub fn same_weight_distribution(c1: &LinearCode, c2: &LinearCode) -> Result<bool> {
    if !check_compatible(c1, c2) {
        return Ok(false);
    }
    let (w1, w2) = (c1.codewords()?, c2.codewords()?);
    if w1.len() != w2.len() {
        return Ok(false);
    }
    let shape = |ws: &BTreeSet<Vec<u64>>| {
        let mut v: Vec<Vec<u64>> = ws
            .iter()
            .map(|w| {
                let mut s = w.clone();
                s.sort_unstable();
                s
            })
            .collect();
        v.sort();
        v
    };
    Ok(shape(&w1) == shape(&w2))
}

/// A bijection `C1 -> C2` with `(c2)_k = +-(c1)_k` for every coordinate.
pub type Pairing = Vec<(Vec<u64>, Vec<u64>)>;

/// Perfect matching for the absolute-value relation, or `None`.
///
/// The relation is an equivalence (`c ~ d` iff `min(c_k, q - c_k)` agrees
/// coordinatewise), so a matching exists iff each class has the same size on
/// both sides.
pub fn absolute_pairing(c1: &LinearCode, c2: &LinearCode) -> Result<Option<Pairing>> {
    if !check_compatible(c1, c2) {
        return Ok(None);
    }
    let q = c1.q;
    let class = |w: &Vec<u64>| w.iter().map(|&x| x.min((q - x) % q)).collect::<Vec<u64>>();
    let group = |ws: BTreeSet<Vec<u64>>| {
        let mut m: BTreeMap<Vec<u64>, Vec<Vec<u64>>> = BTreeMap::new();
        for w in ws {
            m.entry(class(&w)).or_default().push(w);
        }
        m
    };
    let (g1, g2) = (group(c1.codewords()?), group(c2.codewords()?));
    if g1.len() != g2.len() {
        return Ok(None);
    }
    let mut out = Vec::new();
    for ((k1, v1), (k2, v2)) in g1.into_iter().zip(g2) {
        if k1 != k2 || v1.len() != v2.len() {
            return Ok(None);
        }
        out.extend(v1.into_iter().zip(v2));
    }
    Ok(Some(out))
}

/// Image of `x` under the coordinatewise bijection attached to a pairing.
pub fn pairing_map(pairing: &Pairing, q: u64, x: &[i64]) -> Option<Vec<i64>> {
    let qi = q as i64;
    let c1: Vec<u64> = x.iter().map(|&v| v.rem_euclid(qi) as u64).collect();
    let (_, c2) = pairing.iter().find(|(a, _)| *a == c1)?;
    Some(
        x.iter()
            .zip(c1.iter().zip(c2))
            .map(|(&xk, (&a, &b))| {
                let t = (xk - a as i64).div_euclid(qi);
                if a == b {
                    xk
                } else {
                    b as i64 - qi * (t + 1)
                }
            })
            .collect(),
    )
}
