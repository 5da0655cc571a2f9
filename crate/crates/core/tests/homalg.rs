mod common;

use common::*;
use relci_core::graded::{GradedMatrix, ModulePresentation};
use relci_core::homalg::{base_ring_data, ext_table, poincare_truncation, tor_table, Functor};
use relci_core::resolve::{Scenario, Sequence};

#[test]
fn free_module_has_tor_in_degree_zero_only() {
    // f = f' = x^2, I = (x^2), M = R
    let q = ring(&["x", "y"]);
    let f = poly(&q, &[(1, &[2, 0])]);
    let mut sp = spec(&q, vec![], vec![f.clone()], vec![f], vec![], 5, 6);
    sp.m = ModulePresentation::free(vec![0]);
    let s = Scenario::new(sp).unwrap();
    let (t, _) = tor_table(&s, Sequence::F).unwrap();
    // Tor_0 = R ⊗ k = k
    assert_eq!(t.entries.into_iter().collect::<Vec<_>>(), vec![((0, 0), 1)]);
    let p = poincare_truncation(&s, Sequence::F, 5).unwrap();
    assert_eq!(p.coefficients, vec![1, 0, 0, 0, 0, 0]);
}

#[test]
fn zero_module_gives_zero_tables() {
    let q = ring(&["x", "y"]);
    let x = poly(&q, &[(1, &[1, 0])]);
    let one = poly(&q, &[(1, &[0, 0])]);
    let mut sp = spec(&q, vec![x.clone(), poly(&q, &[(1, &[0, 1])])], vec![poly(&q, &[(1, &[2, 0])])], vec![relci_core::graded::Poly::zero()], vec![(0, x.clone(), x)], 4, 5);
    sp.n = ModulePresentation::new(GradedMatrix::from_rows(&[1, 1], vec![0], vec![0], vec![vec![one]]).unwrap());
    let s = Scenario::new(sp).unwrap();
    assert!(tor_table(&s, Sequence::F).unwrap().0.entries.is_empty());
    assert!(ext_table(&s, Sequence::F).unwrap().0.entries.is_empty());
}

#[test]
fn empty_sequence_matches_base_ring() {
    let q = ring(&["x", "y"]);
    let s = Scenario::new(spec(&q, vec![], vec![], vec![], vec![], 4, 5)).unwrap();
    let p = poincare_truncation(&s, Sequence::F, 4).unwrap();
    // Koszul complex on x, y: 1, 2, 1
    assert_eq!(p.coefficients, vec![1, 2, 1, 0, 0]);
    assert_eq!(base_ring_data(&s, Functor::Tor).unwrap().series.coefficients, p.coefficients);
}

#[test]
fn ext_zero_is_hom_and_dims_match_tor() {
    let s = hypersurface_pair(6);
    let (e, _) = ext_table(&s, Sequence::F).unwrap();
    let (t, _) = tor_table(&s, Sequence::F).unwrap();
    assert_eq!(e.get(0, 0), 1);
    // over k the totals agree by duality; Ext^i sits in internal degree -i
    assert_eq!(e.totals(), t.totals());
    assert_eq!(e.get(3, -3), 2);
    assert!(!e.window_limited);
}

#[test]
fn chi_acts_on_ext_as_degree_two_operator() {
    // Ext_R(k,k) = k[u] ⊗ Λ(η) with |u| = |η| = 1 and χ = u²:
    // Ext^0 -> Ext^2 has rank 1, Ext^i -> Ext^(i+2) is bijective for i >= 1
    let s = hypersurface_pair(6);
    let (_, ops) = ext_table(&s, Sequence::F).unwrap();
    let field = field();
    let m0 = &ops.chi[&(0, 0, 0)];
    assert_eq!((m0.rows(), m0.cols()), (2, 1));
    assert_eq!(relci_core::exactlin::rank(&field, m0), 1);
    for i in 1..=4 {
        let m = &ops.chi[&(0, i, -i)];
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(relci_core::exactlin::rank(&field, m), 2);
    }
}
