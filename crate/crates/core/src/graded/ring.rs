use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::poly::{Monomial, Poly, PolyRing};
use crate::error::{Error, Result};
use crate::exactlin::{rref, Matrix, SparseVec};
use crate::field::Field;

/// Degree-`d` piece of `Q/J`: all monomials, the standard ones, and normal
/// forms of the non-standard ones.
#[derive(Clone, Debug)]
pub struct RingPiece<E> {
    monomials: Vec<Monomial>,
    index: BTreeMap<Monomial, usize>,
    standard: Vec<usize>,
    standard_pos: Vec<Option<usize>>,
    normal_form: Vec<Option<SparseVec<E>>>,
}

impl<E: Clone> RingPiece<E> {
    pub fn dim(&self) -> usize {
        self.standard.len()
    }

    /// Standard monomials, degrevlex descending; the k-basis of the piece.
    pub fn basis(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.standard.iter().map(|&i| self.monomials[i])
    }

    pub fn basis_monomial(&self, k: usize) -> Monomial {
        self.monomials[self.standard[k]]
    }

    pub fn ambient_dim(&self) -> usize {
        self.monomials.len()
    }

    /// Position of a standard monomial in the basis.
    pub fn position(&self, m: Monomial) -> Option<usize> {
        self.index.get(&m).and_then(|&i| self.standard_pos[i])
    }
}

/// `Q/J` for a homogeneous ideal `J` of a polynomial ring `Q`, with degreewise
/// normal forms obtained by linear algebra (no Gröbner bases). `J = 0` gives
/// `Q` itself.
#[derive(Clone, Debug)]
pub struct Ring<F: Field> {
    base: PolyRing<F>,
    ideal: Vec<Poly<F::Elem>>,
    ideal_degrees: Vec<u32>,
    cached_up_to: i32,
    pieces: Vec<RingPiece<F::Elem>>,
}

impl<F: Field> Ring<F> {
    pub fn polynomial(base: PolyRing<F>, max_degree: i32) -> Self {
        Self::quotient(base, Vec::new(), max_degree).expect("the zero ideal is homogeneous")
    }

    /// Pieces are precomputed for degrees `0..=max_degree`; larger degrees are
    /// computed on demand without caching.
    pub fn quotient(base: PolyRing<F>, ideal: Vec<Poly<F::Elem>>, max_degree: i32) -> Result<Self> {
        let mut gens = Vec::new();
        let mut degs = Vec::new();
        for g in ideal {
            if g.is_zero() {
                continue;
            }
            let d = g.homogeneous_degree(base.weights()).ok_or_else(|| {
                Error::NotHomogeneous(alloc::format!("ideal generator {}", base.render(&g)))
            })?;
            gens.push(g);
            degs.push(d);
        }
        let mut ring = Self { base, ideal: gens, ideal_degrees: degs, cached_up_to: -1, pieces: Vec::new() };
        let pieces = (0..=max_degree.max(-1)).map(|d| ring.compute_piece(d)).collect();
        ring.pieces = pieces;
        ring.cached_up_to = max_degree;
        Ok(ring)
    }

    pub fn base(&self) -> &PolyRing<F> {
        &self.base
    }

    pub fn field(&self) -> &F {
        self.base.field()
    }

    pub fn ideal(&self) -> &[Poly<F::Elem>] {
        &self.ideal
    }

    pub fn is_polynomial_ring(&self) -> bool {
        self.ideal.is_empty()
    }

    fn compute_piece(&self, d: i32) -> RingPiece<F::Elem> {
        let field = self.field();
        let monomials = self.base.monomials(d);
        let index: BTreeMap<Monomial, usize> = monomials.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let n = monomials.len();
        let mut rows: Vec<F::Elem> = Vec::new();
        let mut nrows = 0;
        for (g, &gd) in self.ideal.iter().zip(&self.ideal_degrees) {
            if gd as i32 > d {
                continue;
            }
            for u in self.base.monomials(d - gd as i32) {
                let mut row = vec![field.zero(); n];
                for (m, c) in g.terms() {
                    row[index[&m.mul(u)]] = c.clone();
                }
                rows.extend(row);
                nrows += 1;
            }
        }
        let mut standard_pos = vec![None; n];
        let mut normal_form = vec![None; n];
        let mut standard = Vec::new();
        if nrows == 0 {
            for i in 0..n {
                standard_pos[i] = Some(i);
            }
            standard = (0..n).collect();
        } else {
            let red = rref(field, &Matrix::new(nrows, n, rows).expect("row data sized"));
            let mut is_pivot = vec![false; n];
            for &p in &red.pivots {
                is_pivot[p] = true;
            }
            for i in 0..n {
                if !is_pivot[i] {
                    standard_pos[i] = Some(standard.len());
                    standard.push(i);
                }
            }
            for (r, &p) in red.pivots.iter().enumerate() {
                let nf: SparseVec<F::Elem> = standard
                    .iter()
                    .enumerate()
                    .filter(|(_, &col)| !field.is_zero(&red.matrix[(r, col)]))
                    .map(|(k, &col)| (k, field.neg(&red.matrix[(r, col)])))
                    .collect();
                normal_form[p] = Some(nf);
            }
        }
        RingPiece { monomials, index, standard, standard_pos, normal_form }
    }

    pub fn piece(&self, d: i32) -> Cow<'_, RingPiece<F::Elem>> {
        if d >= 0 && d <= self.cached_up_to {
            Cow::Borrowed(&self.pieces[d as usize])
        } else {
            Cow::Owned(self.compute_piece(d))
        }
    }

    pub fn dim(&self, d: i32) -> usize {
        if d < 0 {
            0
        } else {
            self.piece(d).dim()
        }
    }

    /// Coordinates of a homogeneous degree-`d` polynomial in the standard
    /// basis of `(Q/J)_d`; terms of other degrees are ignored.
    pub fn coords(&self, p: &Poly<F::Elem>, d: i32) -> SparseVec<F::Elem> {
        let piece = self.piece(d);
        self.coords_in(&piece, p)
    }

    pub fn coords_in(&self, piece: &RingPiece<F::Elem>, p: &Poly<F::Elem>) -> SparseVec<F::Elem> {
        let field = self.field();
        let mut acc: BTreeMap<usize, F::Elem> = BTreeMap::new();
        for (m, c) in p.terms() {
            let Some(&i) = piece.index.get(m) else { continue };
            match piece.standard_pos[i] {
                Some(k) => add_into(field, &mut acc, k, c.clone()),
                None => {
                    for (k, v) in piece.normal_form[i].as_ref().expect("non-standard monomial has a normal form") {
                        add_into(field, &mut acc, *k, field.mul(c, v));
                    }
                }
            }
        }
        acc.into_iter().filter(|(_, v)| !field.is_zero(v)).collect()
    }

    pub fn from_coords(&self, d: i32, coords: &SparseVec<F::Elem>) -> Poly<F::Elem> {
        let piece = self.piece(d);
        Poly::from_terms(self.field(), coords.iter().map(|(k, c)| (piece.basis_monomial(*k), c.clone())).collect())
    }

    /// Normal form of a polynomial (homogeneous components reduced separately).
    pub fn reduce(&self, p: &Poly<F::Elem>) -> Poly<F::Elem> {
        if self.ideal.is_empty() || p.is_zero() {
            return p.clone();
        }
        let mut degrees: Vec<u32> = p.terms().iter().map(|(m, _)| self.base.degree(*m)).collect();
        degrees.sort_unstable();
        degrees.dedup();
        let mut out = Poly::zero();
        for d in degrees {
            let piece = self.piece(d as i32);
            let c = self.coords_in(&piece, p);
            let part = Poly::from_terms(
                self.field(),
                c.into_iter().map(|(k, v)| (piece.basis_monomial(k), v)).collect(),
            );
            out = out.add(self.field(), &part);
        }
        out
    }

    pub fn mul(&self, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> Poly<F::Elem> {
        self.reduce(&a.mul(self.field(), b))
    }

    pub fn is_zero_elem(&self, p: &Poly<F::Elem>) -> bool {
        self.reduce(p).is_zero()
    }

    pub fn render(&self, p: &Poly<F::Elem>) -> String {
        self.base.render(p)
    }

    /// Ring with the same variables modulo `J + extra`.
    pub fn quotient_by(&self, extra: &[Poly<F::Elem>], max_degree: i32) -> Result<Self> {
        let mut gens = self.ideal.clone();
        gens.extend(extra.iter().cloned());
        Self::quotient(self.base.clone(), gens, max_degree)
    }
}

fn add_into<F: Field>(field: &F, acc: &mut BTreeMap<usize, F::Elem>, k: usize, v: F::Elem) {
    match acc.get_mut(&k) {
        Some(e) => *e = field.add(e, &v),
        None => {
            acc.insert(k, v);
        }
    }
}
