//! Named lattices, forms and codes.

use serde::Serialize;

use crate::codes::LinearCode;
use crate::error::{Error, Result};
use crate::exact_linalg::{int, parse_rat, rat, Rat, RatMat};
use crate::forms::{direct_product, LatticeBasis, QuadraticForm};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "payload")]
pub enum CatalogData {
    LatticeBasis(LatticeBasis),
    QuadraticForm(QuadraticForm),
    LatticePair(LatticeBasis, LatticeBasis),
    FormPair(QuadraticForm, QuadraticForm),
    CodePair(LinearCode, LinearCode),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    #[serde(flatten)]
    pub data: CatalogData,
}

fn unit(n: usize, i: usize) -> Vec<Rat> {
    (0..n).map(|k| if k == i { int(1) } else { int(0) }).collect()
}

fn sum(a: &[Rat], b: &[Rat], sign: i64) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y * int(sign)).collect()
}

/// `{e1 + e2, e_{j-1} - e_j}` for `j = 2..n`.
pub fn dn(n: usize) -> Result<LatticeBasis> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("D_n needs n >= 2, got {n}")));
    }
    let mut cols = vec![sum(&unit(n, 0), &unit(n, 1), 1)];
    for j in 1..n {
        cols.push(sum(&unit(n, j - 1), &unit(n, j), -1));
    }
    LatticeBasis::from_columns(&cols)
}

/// `{e1 + e2, e_{j-1} - e_j, 1/2 (1, ..., 1)}` for `j = 2..n-1`, `4 | n`.
pub fn en(n: usize) -> Result<LatticeBasis> {
    if n == 0 || n % 4 != 0 {
        return Err(Error::InvalidParameter(format!("E_n needs 4 | n, got {n}")));
    }
    let mut cols = vec![sum(&unit(n, 0), &unit(n, 1), 1)];
    for j in 1..n - 1 {
        cols.push(sum(&unit(n, j - 1), &unit(n, j), -1));
    }
    cols.push(vec![rat(1, 2); n]);
    LatticeBasis::from_columns(&cols)
}

/// `(E8 x E8, E16)`.
pub fn milnor_pair() -> Result<(LatticeBasis, LatticeBasis)> {
    let e8 = en(8)?;
    Ok((direct_product(&e8, &e8), en(16)?))
}

/// `(D12, E8 x D4)`.
pub fn kneser_pair() -> Result<(LatticeBasis, LatticeBasis)> {
    Ok((dn(12)?, direct_product(&en(8)?, &dn(4)?)))
}

pub fn schiemann4d_pair() -> (QuadraticForm, QuadraticForm) {
    let s1 = QuadraticForm::from_i64(&[&[4, 2, 0, 1], &[2, 8, 3, 1], &[0, 3, 10, 5], &[1, 1, 5, 10]]).expect("symmetric");
    let s2 = QuadraticForm::from_i64(&[&[4, 0, 1, 1], &[0, 8, 1, -4], &[1, 1, 8, 2], &[1, -4, 2, 10]]).expect("symmetric");
    (s1, s2)
}

/// `T_+` (`plus = true`) or `T_-`.
pub fn conway_sloane_t(plus: bool) -> LatticeBasis {
    let s = if plus { 3 } else { -3 };
    LatticeBasis::from_i64(&[&[s, 1, 1, 1], &[-1, s, -1, 1], &[-1, 1, s, -1], &[-1, -1, 1, s]]).expect("det 144")
}

/// Gram forms `(1/12) T_+^T diag(a,b,c,d) T_+` and the same with `T_-`.
pub fn conway_sloane(a: &Rat, b: &Rat, c: &Rat, d: &Rat) -> Result<(QuadraticForm, QuadraticForm)> {
    let ds = [a.clone(), b.clone(), c.clone(), d.clone()];
    if ds.iter().any(|x| *x <= int(0)) {
        return Err(Error::InvalidParameter("a, b, c, d must be positive".into()));
    }
    let diag = QuadraticForm::new(RatMat::diag(&ds).scale(&rat(1, 12)))?;
    Ok((diag.transform(conway_sloane_t(true).matrix()), diag.transform(conway_sloane_t(false).matrix())))
}

/// `(Lambda, Omega)`.
pub fn prop6dim_pair() -> (LatticeBasis, LatticeBasis) {
    let lambda = LatticeBasis::from_i64(&[
        &[1, 1, 0, 0, 0, 0],
        &[1, -1, 0, 0, 0, 0],
        &[0, 0, 1, 1, 0, 0],
        &[0, 0, 1, -1, 0, 0],
        &[0, 0, 0, 0, 1, 1],
        &[0, 0, 0, 0, 1, -1],
    ])
    .expect("invertible");
    let omega = LatticeBasis::from_i64(&[
        &[1, 1, 0, 0, 0, 1],
        &[0, 0, 0, 0, 1, 1],
        &[1, -1, 1, 0, 0, 0],
        &[0, 0, 0, 0, 1, -1],
        &[0, 0, 1, 0, 1, 0],
        &[0, 0, 0, 2, 1, 1],
    ])
    .expect("invertible");
    (lambda, omega)
}

fn words(rows: &[&str]) -> Vec<Vec<i64>> {
    rows.iter().map(|r| r.bytes().map(|b| (b - b'0') as i64).collect()).collect()
}

/// Binary codes `(C1, C2)` with all codewords as generators.
pub fn prop6dim_codes() -> (LinearCode, LinearCode) {
    let c1 = words(&["000000", "110000", "001100", "000011", "111100", "110011", "001111", "111111"]);
    let c2 = words(&["000000", "101000", "001010", "100010", "010111", "110101", "011101", "111111"]);
    (LinearCode::from_words(2, &c1).expect("length 6"), LinearCode::from_words(2, &c2).expect("length 6"))
}

/// `A_n = [e_1, ..., e_{n-1}, 1/2 (1, ..., 1)]`.
pub fn vdw_basis(n: usize) -> Result<LatticeBasis> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("needs n >= 4, got {n}")));
    }
    let mut cols: Vec<Vec<Rat>> = (0..n - 1).map(|i| unit(n, i)).collect();
    cols.push(vec![rat(1, 2); n]);
    LatticeBasis::from_columns(&cols)
}

fn parse_call(name: &str) -> Result<(&str, Vec<&str>)> {
    let name = name.trim();
    match name.find('(') {
        None => Ok((name, Vec::new())),
        Some(i) => {
            let inner = name[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in {name:?}")))?;
            Ok((&name[..i], inner.split(',').map(str::trim).collect()))
        }
    }
}

fn one_usize(args: &[&str]) -> Result<usize> {
    match args {
        [a] => a.parse().map_err(|_| Error::Parse(format!("expected an integer, got {a:?}"))),
        _ => Err(Error::Parse(format!("expected one argument, got {}", args.len()))),
    }
}

/// Names accepted by [`get`].
pub const NAMES: &[&str] = &[
    "dn(n)",
    "en(n)",
    "milnor_pair",
    "kneser_pair",
    "schiemann4d_pair",
    "conway_sloane(a,b,c,d)",
    "prop6dim_pair",
    "prop6dim_codes",
    "vdw_basis(n)",
];

/// Looks up an entry such as `dn(4)` or `conway_sloane(1,7,13,19)`.
pub fn get(name: &str) -> Result<CatalogEntry> {
    let (head, args) = parse_call(name)?;
    let no_args = |d: CatalogData| {
        if args.is_empty() {
            Ok(d)
        } else {
            Err(Error::Parse(format!("{head} takes no arguments")))
        }
    };
    let data = match head {
        "dn" => CatalogData::LatticeBasis(dn(one_usize(&args)?)?),
        "en" => CatalogData::LatticeBasis(en(one_usize(&args)?)?),
        "vdw_basis" => CatalogData::LatticeBasis(vdw_basis(one_usize(&args)?)?),
        "milnor_pair" => {
            let (a, b) = milnor_pair()?;
            no_args(CatalogData::LatticePair(a, b))?
        }
        "kneser_pair" => {
            let (a, b) = kneser_pair()?;
            no_args(CatalogData::LatticePair(a, b))?
        }
        "schiemann4d_pair" => {
            let (a, b) = schiemann4d_pair();
            no_args(CatalogData::FormPair(a, b))?
        }
        "prop6dim_pair" => {
            let (a, b) = prop6dim_pair();
            no_args(CatalogData::LatticePair(a, b))?
        }
        "prop6dim_codes" => {
            let (a, b) = prop6dim_codes();
            no_args(CatalogData::CodePair(a, b))?
        }
        "conway_sloane" => {
            let v: Vec<Rat> = args.iter().map(|a| parse_rat(a)).collect::<Result<_>>()?;
            let [a, b, c, d] = v.as_slice() else {
                return Err(Error::Parse(format!("conway_sloane takes 4 arguments, got {}", v.len())));
            };
            let (p, m) = conway_sloane(a, b, c, d)?;
            CatalogData::FormPair(p, m)
        }
        _ => return Err(Error::Parse(format!("unknown catalog entry {name:?}"))),
    };
    Ok(CatalogEntry { name: name.trim().to_string(), data })
}
