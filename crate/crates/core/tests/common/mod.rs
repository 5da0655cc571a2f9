#![allow(dead_code)]

use std::sync::Arc;

use relci_core::graded::{ModulePresentation, Poly, PolyRing, Ring};
use relci_core::resolve::{ResolutionWindow, Scenario, ScenarioSpec, Witness};
use relci_core::{Field, PrimeField};

pub type E = <PrimeField as Field>::Elem;

pub fn field() -> PrimeField {
    PrimeField::new(32003).unwrap()
}

pub fn ring(names: &[&str]) -> Arc<Ring<PrimeField>> {
    ring_over(field(), names)
}

pub fn ring_over<F: Field>(field: F, names: &[&str]) -> Arc<Ring<F>> {
    Arc::new(Ring::polynomial(PolyRing::new(field, names).unwrap(), 12))
}

/// Polynomial from `(coefficient, exponents)` pairs.
pub fn poly<F: Field>(q: &Ring<F>, terms: &[(i64, &[u32])]) -> Poly<F::Elem> {
    let f = q.field();
    let mut p = Poly::zero();
    for (c, e) in terms {
        let m = relci_core::graded::Monomial::from_exponents(e).unwrap();
        p = p.add(f, &Poly::term(f, m, f.from_i64(*c)));
    }
    p
}

pub fn residue_field<F: Field>(q: &Ring<F>) -> ModulePresentation<F::Elem> {
    let vars: Vec<_> = (0..q.base().nvars()).map(|i| q.base().var(i)).collect();
    ModulePresentation::free(vec![0]).with_ideal_relations(q, &vars)
}

pub fn spec<F: Field>(
    q: &Arc<Ring<F>>,
    ideal: Vec<Poly<F::Elem>>,
    f: Vec<Poly<F::Elem>>,
    f_prime: Vec<Poly<F::Elem>>,
    witnesses: Vec<(usize, Poly<F::Elem>, Poly<F::Elem>)>,
    t: i32,
    d: i32,
) -> ScenarioSpec<F> {
    let witnesses = witnesses
        .into_iter()
        .enumerate()
        .map(|(k, (i, x, g))| Witness { i, j: k, x, g })
        .collect();
    ScenarioSpec {
        q: q.clone(),
        ideal,
        f,
        f_prime,
        witnesses,
        m: residue_field(q),
        n: residue_field(q),
        window: ResolutionWindow::new(t, d).unwrap(),
    }
}

/// `Q = k[x,y]`, `I = (x,y)`, `f = x^2`, `f' = x^2 + xy`, witness `x·(-y)`.
pub fn hypersurface_pair(t: i32) -> Scenario<PrimeField> {
    hypersurface_pair_over(field(), t)
}

pub fn hypersurface_pair_over<F: Field>(field: F, t: i32) -> Scenario<F> {
    let q = ring_over(field, &["x", "y"]);
    let x = poly(&q, &[(1, &[1, 0])]);
    let y = poly(&q, &[(1, &[0, 1])]);
    let f = poly(&q, &[(1, &[2, 0])]);
    let fp = poly(&q, &[(1, &[2, 0]), (1, &[1, 1])]);
    let g = poly(&q, &[(-1, &[0, 1])]);
    Scenario::new(spec(&q, vec![x.clone(), y], vec![f], vec![fp], vec![(0, x, g)], t, t + 1)).unwrap()
}

/// `f = x^2` with `f' = 0` and witness `x·x`.
pub fn annihilator_variant(t: i32) -> Scenario<PrimeField> {
    let q = ring(&["x", "y"]);
    let x = poly(&q, &[(1, &[1, 0])]);
    let y = poly(&q, &[(1, &[0, 1])]);
    let f = poly(&q, &[(1, &[2, 0])]);
    Scenario::new(spec(&q, vec![x.clone(), y], vec![f], vec![Poly::zero()], vec![(0, x.clone(), x)], t, t + 1)).unwrap()
}

/// `Q = k[x,y,z]`, `f = (x^2, y^2)`, `f' = (x^2+xy, y^2+yz)`.
pub fn two_sequence(t: i32) -> Scenario<PrimeField> {
    let q = ring(&["x", "y", "z"]);
    let x = poly(&q, &[(1, &[1, 0, 0])]);
    let y = poly(&q, &[(1, &[0, 1, 0])]);
    let z = poly(&q, &[(1, &[0, 0, 1])]);
    let f = vec![poly(&q, &[(1, &[2, 0, 0])]), poly(&q, &[(1, &[0, 2, 0])])];
    let fp = vec![
        poly(&q, &[(1, &[2, 0, 0]), (1, &[1, 1, 0])]),
        poly(&q, &[(1, &[0, 2, 0]), (1, &[0, 1, 1])]),
    ];
    let neg = |p: &Poly<E>| p.neg(q.field());
    let w = vec![(0, x.clone(), neg(&y)), (1, y.clone(), neg(&z))];
    Scenario::new(spec(&q, vec![x, y, z], f, fp, w, t, t + 1)).unwrap()
}

/// The hypersurface pair with the witness split as `x·(-2y) + x·y`.
pub fn split_witness_pair(t: i32) -> Scenario<PrimeField> {
    let q = ring(&["x", "y"]);
    let x = poly(&q, &[(1, &[1, 0])]);
    let y = poly(&q, &[(1, &[0, 1])]);
    let f = poly(&q, &[(1, &[2, 0])]);
    let fp = poly(&q, &[(1, &[2, 0]), (1, &[1, 1])]);
    let w = vec![(0, x.clone(), poly(&q, &[(-2, &[0, 1])])), (0, x.clone(), y.clone())];
    Scenario::new(spec(&q, vec![x, y], vec![f], vec![fp], w, t, t + 1)).unwrap()
}
