mod common;

use common::*;
use relci_core::homalg::{poincare_truncation, bass_truncation, verify_t2, verify_t9, tor_table};
use relci_core::resolve::Sequence;

#[test]
fn hypersurface_poincare_series() {
    let s = hypersurface_pair(8);
    let p = poincare_truncation(&s, Sequence::F, 8).unwrap();
    // minimal resolution of k over k[x,y]/(x^2): ranks 1, 2, 2, 2, ...
    assert_eq!(p.coefficients, vec![1, 2, 2, 2, 2, 2, 2, 2, 2]);
    let b = bass_truncation(&s, Sequence::F, 8).unwrap();
    assert_eq!(b.coefficients, vec![1, 2, 2, 2, 2, 2, 2, 2, 2]);
    let (t, _) = tor_table(&s, Sequence::F).unwrap();
    eprintln!("{:?}", t.entries);
}

#[test]
fn hypersurface_pair_comparison() {
    let s = hypersurface_pair(6);
    let r = verify_t2(&s).unwrap();
    for c in &r.checks {
        eprintln!("{} {} {}", c.name, c.passed, c.detail);
    }
    assert!(r.passed());
}

#[test]
fn annihilator_variant_comparison() {
    let s = annihilator_variant(6);
    let r = verify_t9(&s).unwrap();
    for c in &r.checks {
        eprintln!("{} {} {}", c.name, c.passed, c.detail);
    }
    assert!(r.passed());
}

#[test]
fn two_sequence_comparison() {
    let t0 = std::time::Instant::now();
    let s = two_sequence(6);
    let r = verify_t2(&s).unwrap();
    for c in &r.checks {
        eprintln!("{} {} {}", c.name, c.passed, c.detail);
    }
    eprintln!("{:?} {:?}", r.series, t0.elapsed());
    assert!(r.passed());
}
