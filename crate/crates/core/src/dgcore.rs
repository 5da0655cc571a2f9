//! Koszul-type DG algebras (exterior algebras over a graded ring with
//! `∂ξ_k = f_k`), semifree DG modules over them, and algebra-linear maps.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exactlin::{sparse_rank, Echelon, Insertion, SparseVec};
use crate::field::Field;
use crate::graded::{Poly, Ring};

/// Subset of exterior generators, bit `k` for `ξ_k`.
pub type Mask = u32;

pub const MAX_GENERATORS: usize = 16;

/// Sign of `ξ_a · ξ_b` relative to `ξ_{a∪b}`: `None` if they share a
/// generator, `Some(true)` for a minus sign.
pub fn mul_sign(a: Mask, b: Mask) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut parity = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        parity ^= (a >> (j + 1)).count_ones() & 1;
        rest &= rest - 1;
    }
    Some(parity == 1)
}

/// Terms `(k, negative, w \ k)` of `∂ξ_w = Σ ± f_k ξ_{w \ k}`.
pub fn boundary_terms(w: Mask) -> impl Iterator<Item = (usize, bool, Mask)> {
    let mut rest = w;
    let mut before = 0u32;
    core::iter::from_fn(move || {
        if rest == 0 {
            return None;
        }
        let k = rest.trailing_zeros();
        rest &= rest - 1;
        let neg = before & 1 == 1;
        before += 1;
        Some((k as usize, neg, w & !(1 << k)))
    })
}

/// Exterior algebra `A = R⟨ξ_1..ξ_n⟩` over a graded ring `R` with
/// `∂ξ_k = f_k ∈ R`, `ξ_k` in bidegree `(1, deg f_k)`.
#[derive(Clone, Debug)]
pub struct KoszulAlgebra<F: Field> {
    ring: Arc<Ring<F>>,
    names: Vec<String>,
    boundaries: Vec<Poly<F::Elem>>,
    degrees: Vec<i32>,
    by_popcount: Vec<Vec<Mask>>,
}

impl<F: Field> KoszulAlgebra<F> {
    /// Generators with explicit internal degrees; each boundary must be zero
    /// or homogeneous of that degree.
    pub fn new(ring: Arc<Ring<F>>, generators: Vec<(String, Poly<F::Elem>, i32)>) -> Result<Self> {
        if generators.len() > MAX_GENERATORS {
            return Err(Error::Invalid(format!(
                "at most {} exterior generators are supported, got {}",
                MAX_GENERATORS,
                generators.len()
            )));
        }
        let mut names = Vec::new();
        let mut boundaries = Vec::new();
        let mut degrees = Vec::new();
        for (name, f, d) in generators {
            let f = ring.reduce(&f);
            if !f.is_homogeneous_of(ring.base().weights(), d) && !f.is_zero() {
                return Err(Error::NotHomogeneous(format!("boundary of {} must have degree {}", name, d)));
            }
            if d < 0 {
                return Err(Error::Invalid(format!("generator {} has negative degree", name)));
            }
            names.push(name);
            boundaries.push(f);
            degrees.push(d);
        }
        let n = names.len();
        let mut by_popcount = vec![Vec::new(); n + 1];
        for w in 0..(1u32 << n) {
            by_popcount[w.count_ones() as usize].push(w);
        }
        Ok(Self { ring, names, boundaries, degrees, by_popcount })
    }

    /// The Koszul complex on `seq`, generators named `prefix1, prefix2, ...`.
    pub fn koszul(ring: Arc<Ring<F>>, prefix: &str, seq: &[Poly<F::Elem>]) -> Result<Self> {
        let weights = ring.base().weights().to_vec();
        let gens = seq
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let d = f
                    .homogeneous_degree(&weights)
                    .ok_or_else(|| Error::NotHomogeneous(format!("{}{} boundary", prefix, i + 1)))?;
                Ok((format!("{}{}", prefix, i + 1), f.clone(), d as i32))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ring, gens)
    }

    /// The same generators over another ring (boundaries reduced there).
    pub fn base_change(&self, ring: Arc<Ring<F>>) -> Result<Self> {
        let gens = (0..self.ngens())
            .map(|k| (self.names[k].clone(), self.boundaries[k].clone(), self.degrees[k]))
            .collect();
        Self::new(ring, gens)
    }

    pub fn ring(&self) -> &Arc<Ring<F>> {
        &self.ring
    }

    pub fn field(&self) -> &F {
        self.ring.field()
    }

    pub fn ngens(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, k: usize) -> &str {
        &self.names[k]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn boundary(&self, k: usize) -> &Poly<F::Elem> {
        &self.boundaries[k]
    }

    pub fn degree(&self, k: usize) -> i32 {
        self.degrees[k]
    }

    pub fn mask_degree(&self, w: Mask) -> i32 {
        let mut d = 0;
        let mut rest = w;
        while rest != 0 {
            d += self.degrees[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        d
    }

    /// All masks with `count` generators, ascending.
    pub fn masks_of_size(&self, count: usize) -> &[Mask] {
        self.by_popcount.get(count).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn render_mask(&self, w: Mask) -> String {
        if w == 0 {
            return "1".into();
        }
        let mut parts = Vec::new();
        for k in 0..self.ngens() {
            if w >> k & 1 == 1 {
                parts.push(self.names[k].clone());
            }
        }
        parts.join("*")
    }

    pub fn generator(&self, k: usize) -> AlgebraElement<F::Elem> {
        AlgebraElement::monomial(1 << k, Poly::one(self.field()))
    }

    pub fn multiply(&self, a: &AlgebraElement<F::Elem>, b: &AlgebraElement<F::Elem>) -> AlgebraElement<F::Elem> {
        let mut out = AlgebraElement::zero();
        for (wa, pa) in &a.terms {
            for (wb, pb) in &b.terms {
                let Some(neg) = mul_sign(*wa, *wb) else { continue };
                let p = self.ring.mul(pa, pb);
                out.add_term(self.field(), wa | wb, if neg { p.neg(self.field()) } else { p });
            }
        }
        out
    }

    pub fn differential(&self, a: &AlgebraElement<F::Elem>) -> AlgebraElement<F::Elem> {
        let mut out = AlgebraElement::zero();
        for (w, p) in &a.terms {
            for (k, neg, rest) in boundary_terms(*w) {
                let q = self.ring.mul(p, &self.boundaries[k]);
                out.add_term(self.field(), rest, if neg { q.neg(self.field()) } else { q });
            }
        }
        out
    }
}

/// Element of a [`KoszulAlgebra`]: ring coefficients on exterior monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement<E> {
    terms: BTreeMap<Mask, Poly<E>>,
}

impl<E: Clone> AlgebraElement<E> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn monomial(w: Mask, coeff: Poly<E>) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(w, coeff);
        }
        Self { terms }
    }

    pub fn scalar(coeff: Poly<E>) -> Self {
        Self::monomial(0, coeff)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Poly<E>)> {
        self.terms.iter().map(|(w, p)| (*w, p))
    }

    pub fn coeff(&self, w: Mask) -> Option<&Poly<E>> {
        self.terms.get(&w)
    }

    fn add_term<F: Field<Elem = E>>(&mut self, field: &F, w: Mask, p: Poly<E>) {
        add_poly_entry(field, &mut self.terms, w, p);
    }

    pub fn add<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, p) in &other.terms {
            out.add_term(field, *w, p.clone());
        }
        out
    }
}

fn add_poly_entry<K: Ord, F: Field>(field: &F, map: &mut BTreeMap<K, Poly<F::Elem>>, key: K, p: Poly<F::Elem>) {
    if p.is_zero() {
        return;
    }
    match map.entry(key) {
        alloc::collections::btree_map::Entry::Vacant(v) => {
            v.insert(p);
        }
        alloc::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get().add(field, &p);
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

/// Element `Σ p · ξ_w e_a` of a semifree module, keyed by `(a, w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModElem<E> {
    terms: BTreeMap<(usize, Mask), Poly<E>>,
}

impl<E: Clone> Default for ModElem<E> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<E: Clone> ModElem<E> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn basis(a: usize, w: Mask, coeff: Poly<E>) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((a, w), coeff);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, Mask, &Poly<E>)> {
        self.terms.iter().map(|((a, w), p)| (*a, *w, p))
    }

    pub fn get(&self, a: usize, w: Mask) -> Option<&Poly<E>> {
        self.terms.get(&(a, w))
    }

    pub fn add_term<F: Field<Elem = E>>(&mut self, field: &F, a: usize, w: Mask, p: Poly<E>) {
        add_poly_entry(field, &mut self.terms, (a, w), p);
    }

    pub fn add_assign<F: Field<Elem = E>>(&mut self, field: &F, other: &Self) {
        for ((a, w), p) in &other.terms {
            self.add_term(field, *a, *w, p.clone());
        }
    }

    pub fn sub_assign<F: Field<Elem = E>>(&mut self, field: &F, other: &Self) {
        for ((a, w), p) in &other.terms {
            self.add_term(field, *a, *w, p.neg(field));
        }
    }

    pub fn add<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(field, other);
        out
    }

    pub fn sub<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        let mut out = self.clone();
        out.sub_assign(field, other);
        out
    }

    pub fn neg<F: Field<Elem = E>>(&self, field: &F) -> Self {
        Self { terms: self.terms.iter().map(|(k, p)| (*k, p.neg(field))).collect() }
    }

    pub fn scale<F: Field<Elem = E>>(&self, field: &F, c: &E) -> Self {
        if field.is_zero(c) {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(k, p)| (*k, p.scale(field, c))).collect() }
    }

    /// `p · self` in the ring `ring`.
    pub fn mul_poly<F: Field<Elem = E>>(&self, ring: &Ring<F>, p: &Poly<E>) -> Self {
        let mut out = Self::zero();
        for ((a, w), q) in &self.terms {
            out.add_term(ring.field(), *a, *w, ring.mul(p, q));
        }
        out
    }

    /// `ξ_v · self` with Koszul signs.
    pub fn left_mul_mask<F: Field<Elem = E>>(&self, field: &F, v: Mask) -> Self {
        let mut out = Self::zero();
        for ((a, w), p) in &self.terms {
            if let Some(neg) = mul_sign(v, *w) {
                out.add_term(field, *a, v | w, if neg { p.neg(field) } else { p.clone() });
            }
        }
        out
    }

    /// `x · self` for an algebra element `x`.
    pub fn left_mul<F: Field<Elem = E>>(&self, ring: &Ring<F>, x: &AlgebraElement<E>) -> Self {
        let mut out = Self::zero();
        for (v, c) in x.terms() {
            out.add_assign(ring.field(), &self.left_mul_mask(ring.field(), v).mul_poly(ring, c));
        }
        out
    }

    /// Drop every term on generators for which `keep` is false.
    pub fn filter_generators(&self, keep: impl Fn(usize) -> bool) -> Self {
        Self { terms: self.terms.iter().filter(|((a, _), _)| keep(*a)).map(|(k, p)| (*k, p.clone())).collect() }
    }

    /// Relabel generators; terms mapped to `None` are dropped.
    pub fn map_generators(&self, field: &impl Field<Elem = E>, f: impl Fn(usize) -> Option<usize>) -> Self {
        let mut out = Self::zero();
        for ((a, w), p) in &self.terms {
            if let Some(b) = f(*a) {
                out.add_term(field, b, *w, p.clone());
            }
        }
        out
    }
}

/// A basis element of a semifree module, in bidegree `(hdeg, ideg)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub hdeg: i32,
    pub ideg: i32,
    pub label: String,
}

/// Degrees through which a truncated object is complete.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub max_hdeg: i32,
    pub max_ideg: i32,
}

impl Window {
    pub fn contains(&self, hdeg: i32, ideg: i32) -> bool {
        hdeg <= self.max_hdeg && ideg <= self.max_ideg
    }
}

/// k-basis of a bidegree piece: one block of ring monomials per `(a, w)`.
#[derive(Clone, Debug)]
pub struct Layout {
    pub hdeg: i32,
    pub ideg: i32,
    pub blocks: Vec<Block>,
    index: BTreeMap<(usize, Mask), usize>,
    pub total: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub generator: usize,
    pub mask: Mask,
    /// internal degree of the ring coefficient
    pub ring_degree: i32,
    pub offset: usize,
    pub dim: usize,
}

impl Layout {
    pub fn block_of(&self, a: usize, w: Mask) -> Option<&Block> {
        self.index.get(&(a, w)).map(|&i| &self.blocks[i])
    }

    pub fn locate(&self, idx: usize) -> (&Block, usize) {
        let b = match self.blocks.binary_search_by(|b| b.offset.cmp(&idx)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (&self.blocks[b], idx - self.blocks[b].offset)
    }
}

/// Semifree DG module over a [`KoszulAlgebra`] on a finite basis, complete
/// through its window. The differential of each basis element involves only
/// basis elements of strictly lower homological degree.
#[derive(Clone, Debug)]
pub struct SemifreeDGModule<F: Field> {
    algebra: Arc<KoszulAlgebra<F>>,
    gens: Vec<Generator>,
    diff: Vec<ModElem<F::Elem>>,
    window: Window,
}

impl<F: Field> SemifreeDGModule<F> {
    /// Checks degrees, the semifree filtration, and `∂² = 0`.
    pub fn new(
        algebra: Arc<KoszulAlgebra<F>>,
        gens: Vec<Generator>,
        diff: Vec<ModElem<F::Elem>>,
        window: Window,
    ) -> Result<Self> {
        let m = Self::new_unchecked(algebra, gens, diff, window)?;
        m.check_degrees()?;
        m.check_square_zero()?;
        Ok(m)
    }

    pub(crate) fn new_unchecked(
        algebra: Arc<KoszulAlgebra<F>>,
        gens: Vec<Generator>,
        diff: Vec<ModElem<F::Elem>>,
        window: Window,
    ) -> Result<Self> {
        if gens.len() != diff.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} generators but {} differentials",
                gens.len(),
                diff.len()
            )));
        }
        Ok(Self { algebra, gens, diff, window })
    }

    pub(crate) fn push_generator(&mut self, g: Generator, d: ModElem<F::Elem>) {
        self.gens.push(g);
        self.diff.push(d);
    }

    pub fn algebra(&self) -> &Arc<KoszulAlgebra<F>> {
        &self.algebra
    }

    pub fn ring(&self) -> &Arc<Ring<F>> {
        self.algebra.ring()
    }

    pub fn field(&self) -> &F {
        self.algebra.field()
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generator_differential(&self, a: usize) -> &ModElem<F::Elem> {
        &self.diff[a]
    }

    pub fn basis_hdeg(&self, a: usize, w: Mask) -> i32 {
        self.gens[a].hdeg + w.count_ones() as i32
    }

    pub fn basis_ideg(&self, a: usize, w: Mask) -> i32 {
        self.gens[a].ideg + self.algebra.mask_degree(w)
    }

    pub fn render_basis(&self, a: usize, w: Mask) -> String {
        if w == 0 {
            self.gens[a].label.clone()
        } else {
            format!("{}*{}", self.algebra.render_mask(w), self.gens[a].label)
        }
    }

    /// Bidegree of a nonzero homogeneous element.
    pub fn degree_of(&self, x: &ModElem<F::Elem>) -> Option<(i32, i32)> {
        let weights = self.ring().base().weights();
        x.terms().next().map(|(a, w, p)| {
            (self.basis_hdeg(a, w), self.basis_ideg(a, w) + p.homogeneous_degree(weights).unwrap_or(0) as i32)
        })
    }

    fn check_degrees(&self) -> Result<()> {
        let weights = self.ring().base().weights().to_vec();
        for (a, dx) in self.diff.iter().enumerate() {
            let g = &self.gens[a];
            for (b, w, p) in dx.terms() {
                if self.gens[b].hdeg >= g.hdeg {
                    return Err(Error::Invalid(format!(
                        "differential of {} involves {} of homological degree {}",
                        g.label, self.gens[b].label, self.gens[b].hdeg
                    )));
                }
                let found = (self.basis_hdeg(b, w), self.basis_ideg(b, w) + p.homogeneous_degree(&weights).unwrap_or(0) as i32);
                if found != (g.hdeg - 1, g.ideg) || !p.is_homogeneous_of(&weights, found.1 - self.basis_ideg(b, w)) {
                    return Err(Error::DegreeMismatch { expected: (g.hdeg - 1, g.ideg), found });
                }
            }
        }
        Ok(())
    }

    /// `∂(ξ_w e_a) = ∂(ξ_w) e_a + (-1)^{|w|} ξ_w ∂e_a`.
    pub fn d_basis(&self, a: usize, w: Mask) -> ModElem<F::Elem> {
        let field = self.field();
        let mut out = ModElem::zero();
        for (k, neg, rest) in boundary_terms(w) {
            let f = self.algebra.boundary(k);
            out.add_term(field, a, rest, if neg { f.neg(field) } else { f.clone() });
        }
        let tail = self.diff[a].left_mul_mask(field, w);
        if w.count_ones() % 2 == 1 {
            out.sub_assign(field, &tail);
        } else {
            out.add_assign(field, &tail);
        }
        out
    }

    pub fn apply_d(&self, x: &ModElem<F::Elem>) -> ModElem<F::Elem> {
        let ring = self.ring();
        let mut out = ModElem::zero();
        for (a, w, p) in x.terms() {
            out.add_assign(ring.field(), &self.d_basis(a, w).mul_poly(ring, p));
        }
        out
    }

    pub fn check_square_zero(&self) -> Result<()> {
        for a in 0..self.rank() {
            if !self.apply_d(&self.diff[a]).is_zero() {
                return Err(Error::DifferentialNotSquareZero { witness: self.gens[a].label.clone() });
            }
        }
        Ok(())
    }

    /// Spot check of the Leibniz rule on `ξ_k · (ξ_w e_a)` for all `k`, `w`
    /// and generators `a`.
    pub fn check_leibniz(&self) -> bool {
        let field = self.field();
        let n = self.algebra.ngens();
        for a in 0..self.rank() {
            for w in 0..(1u32 << n) {
                let x = ModElem::basis(a, w, Poly::one(field));
                for k in 0..n {
                    let lhs = self.apply_d(&x.left_mul_mask(field, 1 << k));
                    let mut rhs = x.mul_poly(self.ring(), self.algebra.boundary(k));
                    rhs.sub_assign(field, &self.apply_d(&x).left_mul_mask(field, 1 << k));
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// k-basis of the `(h, j)` piece: for each generator and exterior monomial
    /// of the right homological degree, the ring monomials of the remaining
    /// internal degree.
    pub fn layout(&self, h: i32, j: i32) -> Layout {
        let ring = self.ring();
        let mut blocks = Vec::new();
        let mut index = BTreeMap::new();
        let mut total = 0;
        for (a, g) in self.gens.iter().enumerate() {
            let k = h - g.hdeg;
            if k < 0 || k as usize > self.algebra.ngens() {
                continue;
            }
            for &w in self.algebra.masks_of_size(k as usize) {
                let rd = j - g.ideg - self.algebra.mask_degree(w);
                let dim = ring.dim(rd);
                if dim == 0 {
                    continue;
                }
                index.insert((a, w), blocks.len());
                blocks.push(Block { generator: a, mask: w, ring_degree: rd, offset: total, dim });
                total += dim;
            }
        }
        Layout { hdeg: h, ideg: j, blocks, index, total }
    }

    /// Coordinates of a homogeneous element of the layout's bidegree.
    pub fn coords(&self, layout: &Layout, x: &ModElem<F::Elem>) -> SparseVec<F::Elem> {
        let ring = self.ring();
        let mut out = Vec::new();
        for (a, w, p) in x.terms() {
            let Some(b) = layout.block_of(a, w) else { continue };
            for (k, c) in ring.coords(p, b.ring_degree) {
                out.push((b.offset + k, c));
            }
        }
        out.sort_by_key(|(i, _)| *i);
        out
    }

    pub fn from_coords(&self, layout: &Layout, v: &SparseVec<F::Elem>) -> ModElem<F::Elem> {
        let ring = self.ring();
        let mut parts: BTreeMap<usize, SparseVec<F::Elem>> = BTreeMap::new();
        for (i, c) in v {
            let (b, _) = layout.locate(*i);
            let bi = layout.index[&(b.generator, b.mask)];
            parts.entry(bi).or_default().push((*i - b.offset, c.clone()));
        }
        let mut out = ModElem::zero();
        for (bi, coords) in parts {
            let b = &layout.blocks[bi];
            out.add_term(ring.field(), b.generator, b.mask, ring.from_coords(b.ring_degree, &coords));
        }
        out
    }

    /// The ring-monomial basis element at flat index `i` of the layout.
    pub fn basis_element(&self, layout: &Layout, i: usize) -> ModElem<F::Elem> {
        let (b, k) = layout.locate(i);
        let u = self.ring().piece(b.ring_degree).basis_monomial(k);
        ModElem::basis(b.generator, b.mask, Poly::monomial(self.field(), u))
    }

    /// Columns of `∂ : X_{(h,j)} → X_{(h-1,j)}` in the two layouts.
    pub fn d_matrix(&self, src: &Layout, tgt: &Layout) -> Vec<SparseVec<F::Elem>> {
        let field = self.field();
        let mut cols = Vec::with_capacity(src.total);
        for b in &src.blocks {
            let d = self.d_basis(b.generator, b.mask);
            let piece = self.ring().piece(b.ring_degree);
            for u in piece.basis() {
                let img = d.mul_poly(self.ring(), &Poly::monomial(field, u));
                cols.push(self.coords(tgt, &img));
            }
        }
        cols
    }

    /// `dim_k H_i(X)_j` for `i <= max_i`, `j <= max_j`.
    pub fn homology_dims(&self, max_i: i32, max_j: i32) -> Result<BTreeMap<(i32, i32), usize>> {
        if max_i + 1 > self.window.max_hdeg || max_j > self.window.max_ideg {
            return Err(Error::WindowTooSmall(format!(
                "homology through ({}, {}) needs the module through homological degree {}; it is built through ({}, {})",
                max_i,
                max_j,
                max_i + 1,
                self.window.max_hdeg,
                self.window.max_ideg
            )));
        }
        let lo = self.gens.iter().map(|g| g.ideg).min().unwrap_or(0);
        let mut out = BTreeMap::new();
        for j in lo..=max_j {
            let mut layouts: Vec<Layout> = (0..=max_i + 1).map(|h| self.layout(h, j)).collect();
            let mut ranks = vec![0usize; max_i as usize + 2];
            for h in 1..=(max_i + 1) as usize {
                let cols = self.d_matrix(&layouts[h], &layouts[h - 1]);
                ranks[h] = sparse_rank(self.field(), layouts[h - 1].total, &cols);
            }
            for h in 0..=max_i as usize {
                let dim = layouts[h].total - ranks[h] - ranks[h + 1];
                if dim > 0 {
                    out.insert((h as i32, j), dim);
                }
            }
            layouts.clear();
        }
        Ok(out)
    }
}

/// Algebra-linear map of bidegree `(hshift, ishift)` given by generator
/// images; extended by `α(ξ_w e) = (-1)^{hshift·|w|} ξ_w α(e)`. An image is
/// only stored when its target lies in the module's window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DGHom<E> {
    pub hshift: i32,
    pub ishift: i32,
    images: Vec<Option<ModElem<E>>>,
}

impl<E: Clone> DGHom<E> {
    pub fn images(&self) -> &[Option<ModElem<E>>] {
        &self.images
    }

    pub fn image(&self, a: usize) -> Option<&ModElem<E>> {
        self.images[a].as_ref()
    }

    pub fn set_image(&mut self, a: usize, x: ModElem<E>) {
        self.images[a] = Some(x);
    }
}

impl<F: Field> SemifreeDGModule<F> {
    fn in_window(&self, a: usize, hshift: i32, ishift: i32) -> bool {
        self.window.contains(self.gens[a].hdeg + hshift, self.gens[a].ideg + ishift)
    }

    /// Hom whose images are produced by `f` on generators within the window.
    pub fn hom_from_fn(
        &self,
        hshift: i32,
        ishift: i32,
        mut f: impl FnMut(usize) -> ModElem<F::Elem>,
    ) -> DGHom<F::Elem> {
        let images = (0..self.rank()).map(|a| self.in_window(a, hshift, ishift).then(|| f(a))).collect();
        DGHom { hshift, ishift, images }
    }

    /// Hom with no images computed yet; fill with [`DGHom::set_image`].
    pub fn hom_empty(&self, hshift: i32, ishift: i32) -> DGHom<F::Elem> {
        DGHom { hshift, ishift, images: vec![None; self.rank()] }
    }

    pub fn hom_identity(&self) -> DGHom<F::Elem> {
        let one = Poly::one(self.field());
        self.hom_from_fn(0, 0, |a| ModElem::basis(a, 0, one.clone()))
    }

    pub fn hom_zero(&self, hshift: i32, ishift: i32) -> DGHom<F::Elem> {
        self.hom_from_fn(hshift, ishift, |_| ModElem::zero())
    }

    /// Multiplication by a homogeneous ring element of degree `deg`.
    pub fn hom_scalar(&self, p: &Poly<F::Elem>, deg: i32) -> DGHom<F::Elem> {
        self.hom_from_fn(0, deg, |a| ModElem::basis(a, 0, p.clone()))
    }

    /// `λ_k`: left multiplication by `ξ_k`.
    pub fn left_mult(&self, k: usize) -> DGHom<F::Elem> {
        let one = Poly::one(self.field());
        self.hom_from_fn(1, self.algebra.degree(k), |a| ModElem::basis(a, 1 << k, one.clone()))
    }

    /// The elementary map `e_a ↦ e_b`, all other generators to zero.
    pub fn elementary(&self, a: usize, b: usize) -> DGHom<F::Elem> {
        let one = Poly::one(self.field());
        let hs = self.gens[b].hdeg - self.gens[a].hdeg;
        let is = self.gens[b].ideg - self.gens[a].ideg;
        self.hom_from_fn(hs, is, |c| if c == a { ModElem::basis(b, 0, one.clone()) } else { ModElem::zero() })
    }

    /// The differential as a hom (only generator images; `∂` itself is not
    /// algebra-linear, so this is used for bookkeeping only).
    pub fn differential_images(&self) -> DGHom<F::Elem> {
        self.hom_from_fn(-1, 0, |a| self.diff[a].clone())
    }

    /// `α(x)`, or `None` if some needed generator image lies outside the window.
    pub fn eval(&self, alpha: &DGHom<F::Elem>, x: &ModElem<F::Elem>) -> Option<ModElem<F::Elem>> {
        let ring = self.ring();
        let field = self.field();
        let mut out = ModElem::zero();
        for (a, w, p) in x.terms() {
            let img = alpha.images[a].as_ref()?;
            let mut t = img.left_mul_mask(field, w).mul_poly(ring, p);
            if alpha.hshift.rem_euclid(2) == 1 && w.count_ones() % 2 == 1 {
                t = t.neg(field);
            }
            out.add_assign(field, &t);
        }
        Some(out)
    }

    /// `α ∘ β`, defined on generators where both steps are.
    pub fn compose(&self, alpha: &DGHom<F::Elem>, beta: &DGHom<F::Elem>) -> DGHom<F::Elem> {
        let images = beta
            .images
            .iter()
            .enumerate()
            .map(|(a, img)| {
                if !self.in_window(a, alpha.hshift + beta.hshift, alpha.ishift + beta.ishift) {
                    return None;
                }
                img.as_ref().and_then(|x| self.eval(alpha, x))
            })
            .collect();
        DGHom { hshift: alpha.hshift + beta.hshift, ishift: alpha.ishift + beta.ishift, images }
    }

    pub fn hom_add(&self, alpha: &DGHom<F::Elem>, beta: &DGHom<F::Elem>) -> Result<DGHom<F::Elem>> {
        self.hom_combine(alpha, beta, false)
    }

    pub fn hom_sub(&self, alpha: &DGHom<F::Elem>, beta: &DGHom<F::Elem>) -> Result<DGHom<F::Elem>> {
        self.hom_combine(alpha, beta, true)
    }

    fn hom_combine(&self, alpha: &DGHom<F::Elem>, beta: &DGHom<F::Elem>, subtract: bool) -> Result<DGHom<F::Elem>> {
        if (alpha.hshift, alpha.ishift) != (beta.hshift, beta.ishift) {
            return Err(Error::DegreeMismatch {
                expected: (alpha.hshift, alpha.ishift),
                found: (beta.hshift, beta.ishift),
            });
        }
        let field = self.field();
        let images = alpha
            .images
            .iter()
            .zip(&beta.images)
            .map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => Some(if subtract { x.sub(field, y) } else { x.add(field, y) }),
                _ => None,
            })
            .collect();
        Ok(DGHom { hshift: alpha.hshift, ishift: alpha.ishift, images })
    }

    pub fn hom_scale(&self, alpha: &DGHom<F::Elem>, c: &F::Elem) -> DGHom<F::Elem> {
        let field = self.field();
        DGHom {
            hshift: alpha.hshift,
            ishift: alpha.ishift,
            images: alpha.images.iter().map(|x| x.as_ref().map(|x| x.scale(field, c))).collect(),
        }
    }

    /// Graded commutator `[α, β] = αβ - (-1)^{|α||β|} βα`.
    pub fn bracket(&self, alpha: &DGHom<F::Elem>, beta: &DGHom<F::Elem>) -> DGHom<F::Elem> {
        let ab = self.compose(alpha, beta);
        let ba = self.compose(beta, alpha);
        let odd = (alpha.hshift * beta.hshift).rem_euclid(2) == 1;
        let field = self.field();
        let images = ab
            .images
            .into_iter()
            .zip(ba.images)
            .map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => Some(if odd { x.add(field, &y) } else { x.sub(field, &y) }),
                _ => None,
            })
            .collect();
        DGHom { hshift: ab.hshift, ishift: ab.ishift, images }
    }

    /// `[∂, α] = ∂α - (-1)^{|α|} α∂`, the Hom-complex differential.
    pub fn d_bracket(&self, alpha: &DGHom<F::Elem>) -> DGHom<F::Elem> {
        let field = self.field();
        let odd = alpha.hshift.rem_euclid(2) == 1;
        let images = (0..self.rank())
            .map(|a| {
                if !self.in_window(a, alpha.hshift - 1, alpha.ishift) {
                    return None;
                }
                let first = self.apply_d(alpha.images[a].as_ref()?);
                let second = self.eval(alpha, &self.diff[a])?;
                Some(if odd { first.add(field, &second) } else { first.sub(field, &second) })
            })
            .collect();
        DGHom { hshift: alpha.hshift - 1, ishift: alpha.ishift, images }
    }

    /// Whether all computed images vanish.
    pub fn hom_is_zero(&self, alpha: &DGHom<F::Elem>) -> bool {
        alpha.images.iter().flatten().all(|x| x.is_zero())
    }

    /// First generator where both maps are defined and differ.
    pub fn hom_difference_witness(&self, alpha: &DGHom<F::Elem>, beta: &DGHom<F::Elem>) -> Option<usize> {
        if (alpha.hshift, alpha.ishift) != (beta.hshift, beta.ishift) {
            return Some(0);
        }
        (0..self.rank()).find(|&a| matches!((&alpha.images[a], &beta.images[a]), (Some(x), Some(y)) if x != y))
    }

    /// `γ` graded-commutes with the identity, every `λ_k`, and every
    /// elementary map, on all generators where the brackets are defined.
    pub fn is_central(&self, gamma: &DGHom<F::Elem>) -> bool {
        let mut family = vec![self.hom_identity()];
        family.extend((0..self.algebra.ngens()).map(|k| self.left_mult(k)));
        if family.iter().any(|s| !self.hom_is_zero(&self.bracket(gamma, s))) {
            return false;
        }
        (0..self.rank()).all(|a| (0..self.rank()).all(|b| self.hom_is_zero(&self.bracket(gamma, &self.elementary(a, b)))))
    }

    /// `γ` graded-commutes with each map of `family`.
    pub fn commutes_with(&self, gamma: &DGHom<F::Elem>, family: &[&DGHom<F::Elem>]) -> bool {
        family.iter().all(|s| self.hom_is_zero(&self.bracket(gamma, s)))
    }
}

/// Dimension of the homology `ker d_out / im d_in` of a k-linear piece, with
/// `dim` the dimension of the middle space.
pub fn homology_dim<F: Field>(
    field: &F,
    dim: usize,
    d_out: &[SparseVec<F::Elem>],
    out_dim: usize,
    d_in: &[SparseVec<F::Elem>],
) -> usize {
    dim - sparse_rank(field, out_dim, d_out) - sparse_rank(field, dim, d_in)
}

/// Basis of a homology piece: cycle representatives together with an
/// echelon form of `[boundaries | representatives]` for reading off
/// homology coordinates of any cycle.
#[derive(Clone, Debug)]
pub struct HomologyBasis<F: Field> {
    pub representatives: Vec<SparseVec<F::Elem>>,
    echelon: Echelon<F>,
    rep_index: Vec<usize>,
}

impl<F: Field> HomologyBasis<F> {
    /// `cycles` must span the kernel of the outgoing differential and
    /// `boundaries` the image of the incoming one.
    pub fn new(field: &F, dim: usize, boundaries: &[SparseVec<F::Elem>], cycles: Vec<SparseVec<F::Elem>>) -> Self {
        let mut echelon = Echelon::new(field.clone(), dim);
        for b in boundaries {
            echelon.insert(b);
        }
        let mut representatives = Vec::new();
        let mut rep_index = Vec::new();
        for z in cycles {
            let idx = echelon.columns_inserted();
            if matches!(echelon.insert(&z), Insertion::Pivot) {
                representatives.push(z);
                rep_index.push(idx);
            }
        }
        Self { representatives, echelon, rep_index }
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    /// Homology coordinates of a cycle, or `None` if it is not in the span of
    /// boundaries and representatives (i.e. not a cycle).
    pub fn coordinates(&self, z: &SparseVec<F::Elem>) -> Option<Vec<F::Elem>> {
        let field = &self.echelon_field();
        let sol = self.echelon.solve(z)?;
        let mut out = vec![field.zero(); self.rep_index.len()];
        for (i, c) in sol {
            if let Ok(k) = self.rep_index.binary_search(&i) {
                out[k] = c;
            }
        }
        Some(out)
    }

    fn echelon_field(&self) -> F {
        self.echelon.field().clone()
    }
}
