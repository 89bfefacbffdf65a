//! Quick runs of the randomized suites; the acceptance target runs them at full size.

mod common;

#[test]
fn cone_oracle() {
    common::cone_oracle(100).unwrap();
}

#[test]
fn min_oracle() {
    common::min_oracle(50).unwrap();
}

#[test]
fn schiemann_uniqueness() {
    common::schiemann_uniqueness(100).unwrap();
}

#[test]
fn minima_on_diagonal() {
    common::minima_on_diagonal(50).unwrap();
}

#[test]
fn rectangular_tori() {
    common::rectangular_tori(50).unwrap();
}

#[test]
fn planted_equivalence() {
    common::planted_equivalence(100).unwrap();
}
