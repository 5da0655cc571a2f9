mod common;

use std::sync::Arc;

use common::*;
use relci_core::dgcore::KoszulAlgebra;
use relci_core::graded::{ModulePresentation, Poly, PresentedModule};
use relci_core::perturb::perturb;
use relci_core::resolve::{
    check_acyclic, koszul_homology_witness, semifree_resolution, universal_resolution, DividedPowerTensor,
    ResolutionWindow, Scenario, Sequence,
};
use relci_core::Error;

fn k_over(q: &Arc<relci_core::graded::Ring<relci_core::PrimeField>>, d: i32) -> PresentedModule<relci_core::PrimeField> {
    PresentedModule::new(q.clone(), residue_field(q), d)
}

#[test]
fn residue_field_over_polynomial_ring_has_ranks_one_one() {
    let q = ring(&["x"]);
    let a = Arc::new(KoszulAlgebra::new(q.clone(), vec![]).unwrap());
    let w = ResolutionWindow::new(4, 5).unwrap();
    let res = semifree_resolution(a, &k_over(&q, 5), w).unwrap();
    // 0 -> Q(-1) -x-> Q -> k
    assert_eq!(res.ranks(), vec![1, 1, 0, 0, 0, 0]);
    assert!(check_acyclic(&res.module, &k_over(&q, 5), w).unwrap());
}

#[test]
fn residue_field_over_koszul_complex_of_a_square() {
    let q = ring(&["x"]);
    let x2 = poly(&q, &[(1, &[2])]);
    let e = Arc::new(KoszulAlgebra::koszul(q.clone(), "xi", &[x2]).unwrap());
    let w = ResolutionWindow::new(5, 6).unwrap();
    let res = semifree_resolution(e, &k_over(&q, 6), w).unwrap();
    // one new generator in each homological degree: e_p of internal degree p
    assert_eq!(res.ranks(), vec![1; 7]);
    let degs: Vec<_> = res.module.generators().iter().map(|g| (g.hdeg, g.ideg)).collect();
    assert_eq!(degs, (0..7).map(|p| (p, p)).collect::<Vec<_>>());
    assert!(check_acyclic(&res.module, &k_over(&q, 6), w).unwrap());
}

#[test]
fn koszul_regularity() {
    let q = ring(&["x", "y"]);
    let x = poly(&q, &[(1, &[1, 0])]);
    let y = poly(&q, &[(1, &[0, 1])]);
    let reg = KoszulAlgebra::koszul(q.clone(), "xi", &[x.clone(), y]).unwrap();
    assert_eq!(koszul_homology_witness(&Arc::new(reg), 6), None);
    // (x, x): the cycle xi1 - xi2 of internal degree 1 is not a boundary
    let bad = KoszulAlgebra::koszul(q.clone(), "xi", &[x.clone(), x]).unwrap();
    assert_eq!(koszul_homology_witness(&Arc::new(bad), 6), Some((1, 1)));
    let empty = KoszulAlgebra::koszul(q, "xi", &[]).unwrap();
    assert_eq!(koszul_homology_witness(&Arc::new(empty), 6), None);
}

#[test]
fn scenario_rejects_witness_outside_annihilator() {
    // M = N = Q/(x), g = -y does not kill M
    let q = ring(&["x", "y"]);
    let x = poly(&q, &[(1, &[1, 0])]);
    let mut sp = spec(
        &q,
        vec![x.clone()],
        vec![poly(&q, &[(1, &[2, 0])])],
        vec![poly(&q, &[(1, &[2, 0]), (1, &[1, 1])])],
        vec![(0, x.clone(), poly(&q, &[(-1, &[0, 1])]))],
        4,
        5,
    );
    sp.m = ModulePresentation::free(vec![0]).with_ideal_relations(&q, &[x.clone()]);
    sp.n = sp.m.clone();
    match Scenario::new(sp) {
        Err(Error::AnnihilatorViolation(msg)) => assert!(msg.contains("g11"), "{}", msg),
        other => panic!("expected an annihilator violation, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn scenario_rejects_bad_witness_sum() {
    let q = ring(&["x", "y"]);
    let x = poly(&q, &[(1, &[1, 0])]);
    let y = poly(&q, &[(1, &[0, 1])]);
    let sp = spec(
        &q,
        vec![x.clone(), y.clone()],
        vec![poly(&q, &[(1, &[2, 0])])],
        vec![poly(&q, &[(1, &[2, 0]), (1, &[1, 1])])],
        vec![(0, x, y)],
        4,
        5,
    );
    assert!(matches!(Scenario::new(sp), Err(Error::WitnessInvalid(_))));
}

#[test]
fn scenario_rejects_generators_outside_window() {
    let q = ring(&["x", "y"]);
    let x = poly(&q, &[(1, &[1, 0])]);
    let mut sp = spec(&q, vec![x.clone()], vec![poly(&q, &[(1, &[2, 0])])], vec![Poly::zero()], vec![(0, x.clone(), x)], 4, 5);
    sp.n = ModulePresentation::free(vec![7]);
    assert!(matches!(Scenario::new(sp), Err(Error::WindowTooSmall(_))));
}

fn universal_checks(s: &Scenario<relci_core::PrimeField>, which: Sequence) {
    let e = s.koszul(which).unwrap();
    let w = s.window();
    let res = semifree_resolution(e, s.m_over_q(), w).unwrap();
    let seq: Vec<usize> = (0..s.n_seq()).collect();
    let u = universal_resolution(&res.module, &seq).unwrap();
    // H_0 has the Hilbert function of M, higher homology vanishes
    assert!(check_acyclic(u.module(), s.m_over_q(), w).unwrap());
    let x = u.module();
    for a in u.chis() {
        for b in u.chis() {
            let ab = x.compose(a, b);
            let ba = x.compose(b, a);
            assert!(x.hom_difference_witness(&ab, &ba).is_none());
        }
    }
    // U_E(F) is the perturbation of the plain tensor by Σ χ_i λ_i
    let plain = DividedPowerTensor::new(&res.module, u.ring.clone(), &seq, false).unwrap();
    let px = &plain.module;
    let mut delta = px.hom_zero(-1, 0);
    for (i, chi) in plain.chis.iter().enumerate() {
        delta = px.hom_add(&delta, &px.compose(&px.left_mult(i), chi)).unwrap();
    }
    let perturbed = perturb(px, &delta).unwrap();
    for a in 0..x.rank() {
        assert_eq!(perturbed.generator_differential(a), x.generator_differential(a), "generator {}", a);
    }
}

#[test]
fn universal_resolutions_are_acyclic() {
    universal_checks(&hypersurface_pair(5), Sequence::F);
    universal_checks(&hypersurface_pair(5), Sequence::FPrime);
    universal_checks(&two_sequence(5), Sequence::F);
    universal_checks(&two_sequence(5), Sequence::FPrime);
    universal_checks(&annihilator_variant(5), Sequence::F);
}

#[test]
fn universal_resolution_rejects_irregular_sequence() {
    let q = ring(&["x", "y"]);
    let x = poly(&q, &[(1, &[1, 0])]);
    let e = Arc::new(KoszulAlgebra::koszul(q.clone(), "xi", &[x.clone(), x]).unwrap());
    let w = ResolutionWindow::new(3, 4).unwrap();
    let res = semifree_resolution(e, &k_over(&q, 4), w).unwrap();
    assert!(matches!(universal_resolution(&res.module, &[0, 1]), Err(Error::NotKoszulRegular { hdeg: 1, ideg: 1 })));
}
