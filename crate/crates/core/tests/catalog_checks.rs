use torus_core::catalog::{self, get, CatalogData};
use torus_core::codes::{code_of_integer_lattice, construction_a, same_weight_distribution, LinearCode};
use torus_core::congruence::{integral_equivalence, lambda_min_lower_bound, lattice_congruent};
use torus_core::exact_linalg::{int, rat, rat_to_f64, RatMat};
use torus_core::forms::{gram, is_positive_definite, isospectral_up_to, LatticeBasis, QuadraticForm, SpectralComparison};
use torus_core::modular::{certify_isospectral, even_rescale, is_even, level, Verdict};

#[test]
fn dn_and_en() {
    assert_eq!(gram(&catalog::dn(3).unwrap()).det(), int(4));
    for n in [4, 8, 12, 16] {
        let g = gram(&catalog::en(n).unwrap());
        assert!(is_positive_definite(&g));
        if n % 8 == 0 {
            assert!(is_even(&g), "E{n}");
            assert_eq!(g.det(), int(1));
        }
    }
    assert!(get("en(6)").is_err());
    assert!(get("dn(1)").is_err());
}

#[test]
fn e8_basis_in_set() {
    let b = catalog::en(8).unwrap();
    assert_eq!(b.volume(), int(1));
    for j in 0..8 {
        let v = b.matrix().col(j);
        let twice: Vec<i64> = v.iter().map(|x| (x * int(2)).to_integer().try_into().unwrap()).collect();
        let all_int = twice.iter().all(|x| x % 2 == 0);
        let all_half = twice.iter().all(|x| x % 2 != 0);
        assert!(all_int || all_half);
        assert_eq!(twice.iter().sum::<i64>() % 4, 0);
    }
}

#[test]
fn levels() {
    assert_eq!(level(&gram(&catalog::en(8).unwrap())).unwrap(), 1);
    let two = QuadraticForm::new(RatMat::diag(&[int(2), int(2)])).unwrap();
    assert_eq!(level(&two).unwrap(), 4);
    let (s1, s2) = catalog::schiemann4d_pair();
    assert_eq!(level(&s1).unwrap(), 1729);
    assert_eq!(level(&s2).unwrap(), 1729);
}

#[test]
fn conway_sloane_rescale() {
    let (p, _) = catalog::conway_sloane(&int(1), &int(7), &int(13), &int(19)).unwrap();
    let (c, cp) = even_rescale(&p).unwrap();
    assert_eq!(c, 1);
    assert!(is_even(&cp));
    let (h, _) = catalog::conway_sloane(&int(1), &int(2), &int(3), &int(4)).unwrap();
    let (c, ch) = even_rescale(&h).unwrap();
    assert!(is_even(&ch));
    assert!(c > 1);
}

#[test]
fn conway_sloane_contains_schiemann_pair() {
    let (p, m) = catalog::conway_sloane(&int(1), &int(7), &int(13), &int(19)).unwrap();
    let (s1, s2) = catalog::schiemann4d_pair();
    let hit = |a: &QuadraticForm| {
        integral_equivalence(a, &s1).unwrap().is_equivalent() || integral_equivalence(a, &s2).unwrap().is_equivalent()
    };
    assert!(hit(&p));
    assert!(hit(&m));
    assert!(!integral_equivalence(&p, &m).unwrap().is_equivalent());
}

#[test]
fn schiemann_lower_bound_below_eigenvalue() {
    let (s1, _) = catalog::schiemann4d_pair();
    let lb = rat_to_f64(&lambda_min_lower_bound(&s1).unwrap());
    // Smallest eigenvalue by inverse power iteration on the float matrix.
    let m: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| rat_to_f64(s1.entry(i, j))).collect()).collect();
    let mut x = vec![1.0, 0.3, -0.2, 0.1];
    for _ in 0..200 {
        let y = solve(&m, &x);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.iter().map(|v| v / norm).collect();
    }
    let mx: Vec<f64> = (0..4).map(|i| (0..4).map(|j| m[i][j] * x[j]).sum()).collect();
    let rayleigh: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
    assert!(lb > 0.0 && lb <= rayleigh + 1e-9, "{lb} vs {rayleigh}");
}

fn solve(m: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut a: Vec<Vec<f64>> = m.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

#[test]
fn certify_catalog_pairs() {
    let (a, b) = catalog::milnor_pair().unwrap();
    let c = certify_isospectral(&gram(&a), &gram(&b)).unwrap();
    assert_eq!(c.verdict, Verdict::Isospectral);
    assert_eq!((c.level, c.cutoff), (Some(1), Some(1)));
    let (l, o) = catalog::prop6dim_pair();
    assert_eq!(certify_isospectral(&gram(&l), &gram(&o)).unwrap().verdict, Verdict::Isospectral);
}

#[test]
fn certificate_agrees_with_enumeration() {
    let (s1, s2) = catalog::schiemann4d_pair();
    let c = certify_isospectral(&s1, &s2).unwrap();
    let four = int(4 * c.cutoff.unwrap() as i64);
    assert_eq!(isospectral_up_to(&s1, &s2, &four).unwrap(), SpectralComparison::Equal);
}

#[test]
fn vdw_properties() {
    let a4 = catalog::vdw_basis(4).unwrap();
    let e4 = vec![int(0), int(0), int(0), int(1)];
    assert!(a4.contains(&e4));
    let g = gram(&a4);
    assert_eq!(g.eval(&[-1, -1, -1, 2]), g.entry(3, 3).clone());
    let cols: Vec<Vec<_>> = vec![a4.matrix().col(0), a4.matrix().col(1), a4.matrix().col(2), e4];
    let sub = LatticeBasis::from_columns(&cols).unwrap();
    assert_ne!(sub.volume(), a4.volume());
    for n in 5..9 {
        let a = catalog::vdw_basis(n).unwrap();
        let mut en = vec![int(0); n];
        en[n - 1] = int(1);
        assert!(a.contains(&en));
        assert!(int(1) < gram(&a).entry(n - 1, n - 1).clone());
    }
    assert!(catalog::vdw_basis(3).is_err());
}

#[test]
fn prop6dim_codes_weights_and_lattices() {
    let (c1, c2) = catalog::prop6dim_codes();
    assert!(same_weight_distribution(&c1, &c2).unwrap());
    let (l1, l2) = (construction_a(&c1).unwrap(), construction_a(&c2).unwrap());
    assert_eq!(isospectral_up_to(&gram(&l1), &gram(&l2), &int(12)).unwrap(), SpectralComparison::Equal);
    let (lam, om) = catalog::prop6dim_pair();
    assert!(lattice_congruent(&lam, &lam).unwrap().is_equivalent());
    assert!(!lattice_congruent(&lam, &om).unwrap().is_equivalent());
}

#[test]
fn code_round_trips() {
    let two_z2 = LatticeBasis::from_i64(&[&[2, 0], &[0, 2]]).unwrap();
    let c = code_of_integer_lattice(&two_z2).unwrap();
    assert_eq!(c.q, 4);
    let back = construction_a(&c).unwrap();
    assert!(lattice_congruent(&back, &two_z2).unwrap().is_equivalent());
    assert_eq!(back.volume(), two_z2.volume());
    let d3 = catalog::dn(3).unwrap();
    let c = code_of_integer_lattice(&d3).unwrap();
    let even = LinearCode::new(2, 3, &[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
    assert_eq!(c.codewords().unwrap(), even.codewords().unwrap());
    let z3 = LatticeBasis::new(RatMat::identity(3)).unwrap();
    let c = code_of_integer_lattice(&z3).unwrap();
    assert_eq!(c.q, 1);
    assert_eq!(construction_a(&c).unwrap().volume(), int(1));
    let half = LatticeBasis::new(RatMat::diag(&[rat(1, 2), int(1)])).unwrap();
    assert!(code_of_integer_lattice(&half).is_err());
}

#[test]
fn entries_serialize() {
    for name in ["schiemann4d_pair", "prop6dim_codes", "dn(4)", "conway_sloane(1,1/2,3,4)"] {
        let e = get(name).unwrap();
        let js = serde_json::to_value(&e).unwrap();
        assert_eq!(js["name"], name);
        match e.data {
            CatalogData::FormPair(..) | CatalogData::CodePair(..) | CatalogData::LatticeBasis(_) => {}
            _ => panic!("{name}"),
        }
    }
}
