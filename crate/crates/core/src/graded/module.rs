use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::poly::Poly;
use super::ring::Ring;
use crate::error::{Error, Result};
use crate::exactlin::{rref, sparse_kernel, Echelon, Insertion, Matrix, SparseVec};
use crate::field::Field;

/// Layout of the degree-`d` piece of `⊕ R(-a_i)`: generator-major, standard
/// monomials in degrevlex order within each block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreePiece {
    pub offsets: Vec<usize>,
    pub dims: Vec<usize>,
    pub total: usize,
}

impl FreePiece {
    pub fn new<F: Field>(ring: &Ring<F>, degrees: &[i32], d: i32) -> Self {
        let dims: Vec<usize> = degrees.iter().map(|&a| ring.dim(d - a)).collect();
        let mut offsets = Vec::with_capacity(dims.len());
        let mut total = 0;
        for &n in &dims {
            offsets.push(total);
            total += n;
        }
        Self { offsets, dims, total }
    }

    /// Generator and monomial position of a flat index.
    pub fn locate(&self, idx: usize) -> (usize, usize) {
        let g = match self.offsets.binary_search(&idx) {
            Ok(mut g) => {
                // skip empty blocks sharing the offset
                while self.dims[g] == 0 {
                    g += 1;
                }
                g
            }
            Err(g) => g - 1,
        };
        (g, idx - self.offsets[g])
    }
}

/// Homogeneous matrix between graded free modules, stored by sparse columns.
/// Entry `(i, j)` has degree `source[j] - target[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMatrix<E> {
    source: Vec<i32>,
    target: Vec<i32>,
    cols: Vec<Vec<(usize, Poly<E>)>>,
}

impl<E: Clone> GradedMatrix<E> {
    pub fn from_columns(
        weights: &[u32],
        source: Vec<i32>,
        target: Vec<i32>,
        cols: Vec<Vec<(usize, Poly<E>)>>,
    ) -> Result<Self> {
        if cols.len() != source.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} columns for a source of rank {}",
                cols.len(),
                source.len()
            )));
        }
        for (j, col) in cols.iter().enumerate() {
            for (i, p) in col {
                let Some(&t) = target.get(*i) else {
                    return Err(Error::DimensionMismatch(format!("row {} out of range", i)));
                };
                if !p.is_homogeneous_of(weights, source[j] - t) {
                    return Err(Error::NotHomogeneous(format!(
                        "entry ({}, {}) should have degree {}",
                        i,
                        j,
                        source[j] - t
                    )));
                }
            }
        }
        let cols = cols.into_iter().map(|c| c.into_iter().filter(|(_, p)| !p.is_zero()).collect()).collect();
        Ok(Self { source, target, cols })
    }

    /// Dense row-major entry grid; zero polynomials allowed.
    pub fn from_rows(weights: &[u32], source: Vec<i32>, target: Vec<i32>, rows: Vec<Vec<Poly<E>>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); source.len()];
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != source.len() {
                return Err(Error::DimensionMismatch(format!("row {} has {} entries", i, row.len())));
            }
            for (j, p) in row.into_iter().enumerate() {
                cols[j].push((i, p));
            }
        }
        Self::from_columns(weights, source, target, cols)
    }

    pub fn zero(source: Vec<i32>, target: Vec<i32>) -> Self {
        let cols = vec![Vec::new(); source.len()];
        Self { source, target, cols }
    }

    pub fn source(&self) -> &[i32] {
        &self.source
    }

    pub fn target(&self) -> &[i32] {
        &self.target
    }

    pub fn column(&self, j: usize) -> &[(usize, Poly<E>)] {
        &self.cols[j]
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly<E> {
        self.cols[j].iter().find(|(r, _)| *r == i).map(|(_, p)| p.clone()).unwrap_or_else(Poly::zero)
    }

    /// `self * other`
    pub fn compose<F: Field<Elem = E>>(&self, ring: &Ring<F>, other: &Self) -> Result<Self> {
        if other.target != self.source {
            return Err(Error::DimensionMismatch("composition of incompatible graded matrices".into()));
        }
        let field = ring.field();
        let cols = other
            .cols
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, Poly<E>> = BTreeMap::new();
                for (k, b) in col {
                    for (i, a) in &self.cols[*k] {
                        let prod = ring.mul(a, b);
                        let e = acc.entry(*i).or_insert_with(Poly::zero);
                        *e = e.add(field, &prod);
                    }
                }
                acc.into_iter().filter(|(_, p)| !p.is_zero()).collect()
            })
            .collect();
        Ok(Self { source: other.source.clone(), target: self.target.clone(), cols })
    }
}

/// Sparse columns of the degree-`d` piece of a homogeneous map, with the row
/// dimension.
pub fn graded_piece_sparse<F: Field>(
    ring: &Ring<F>,
    mat: &GradedMatrix<F::Elem>,
    d: i32,
) -> (usize, Vec<SparseVec<F::Elem>>) {
    let field = ring.field();
    let tgt = FreePiece::new(ring, &mat.target, d);
    let mut target_pieces = BTreeMap::new();
    for &t in &mat.target {
        target_pieces.entry(d - t).or_insert_with(|| ring.piece(d - t));
    }
    let mut cols = Vec::new();
    for (j, &s) in mat.source.iter().enumerate() {
        let src_piece = ring.piece(d - s);
        for u in src_piece.basis() {
            let mut acc: BTreeMap<usize, F::Elem> = BTreeMap::new();
            for (i, p) in &mat.cols[j] {
                let piece: &Cow<_> = &target_pieces[&(d - mat.target[*i])];
                for (k, c) in ring.coords_in(piece, &p.mul_monomial(u)) {
                    let idx = tgt.offsets[*i] + k;
                    match acc.get_mut(&idx) {
                        Some(e) => *e = field.add(e, &c),
                        None => {
                            acc.insert(idx, c);
                        }
                    }
                }
            }
            cols.push(acc.into_iter().filter(|(_, v)| !field.is_zero(v)).collect());
        }
    }
    (tgt.total, cols)
}

/// Matrix of the degree-`d` piece of `mat` in the degrevlex monomial bases.
pub fn graded_piece<F: Field>(ring: &Ring<F>, mat: &GradedMatrix<F::Elem>, d: i32) -> Matrix<F::Elem> {
    let field = ring.field();
    let (rows, cols) = graded_piece_sparse(ring, mat, d);
    let mut m = Matrix::zeros(field, rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col {
            m[(*i, j)] = v.clone();
        }
    }
    m
}

/// Cokernel presentation `⊕ R(-b_j) -> ⊕ R(-a_i) -> M -> 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulePresentation<E> {
    relations: GradedMatrix<E>,
}

impl<E: Clone> ModulePresentation<E> {
    pub fn new(relations: GradedMatrix<E>) -> Self {
        Self { relations }
    }

    /// Free module on generators of the given degrees.
    pub fn free(generators: Vec<i32>) -> Self {
        Self { relations: GradedMatrix::zero(Vec::new(), generators) }
    }

    pub fn generators(&self) -> &[i32] {
        self.relations.target()
    }

    pub fn relations(&self) -> &GradedMatrix<E> {
        &self.relations
    }

    /// The same module with every generator of `ideal` times every module
    /// generator appended as a relation (an `R = Q/I` presentation viewed over
    /// `Q`).
    pub fn with_ideal_relations<F: Field<Elem = E>>(&self, ring: &Ring<F>, ideal: &[Poly<E>]) -> Self {
        let weights = ring.base().weights();
        let gens = self.generators().to_vec();
        let mut source = self.relations.source.clone();
        let mut cols = self.relations.cols.clone();
        for g in ideal {
            let Some(d) = g.homogeneous_degree(weights) else { continue };
            for (i, &a) in gens.iter().enumerate() {
                source.push(a + d as i32);
                cols.push(vec![(i, g.clone())]);
            }
        }
        Self { relations: GradedMatrix { source, target: gens, cols } }
    }
}

/// Degree-`d` piece of a presented module: the ambient free piece modulo the
/// span of relation images, with a normal-form basis (non-pivot coordinates).
#[derive(Clone, Debug)]
pub struct ModulePiece<E> {
    pub ambient: FreePiece,
    basis: Vec<usize>,
    basis_pos: Vec<Option<usize>>,
    normal_form: Vec<Option<SparseVec<E>>>,
}

impl<E: Clone> ModulePiece<E> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Ambient (free-module) index of basis vector `k`.
    pub fn lift(&self, k: usize) -> usize {
        self.basis[k]
    }
}

/// A finitely presented graded module over a [`Ring`], with degreewise
/// normal forms.
#[derive(Clone, Debug)]
pub struct PresentedModule<F: Field> {
    ring: Arc<Ring<F>>,
    presentation: ModulePresentation<F::Elem>,
    cached_up_to: i32,
    pieces: Vec<ModulePiece<F::Elem>>,
}

impl<F: Field> PresentedModule<F> {
    pub fn new(ring: Arc<Ring<F>>, presentation: ModulePresentation<F::Elem>, max_degree: i32) -> Self {
        let mut m = Self { ring, presentation, cached_up_to: -1, pieces: Vec::new() };
        let lo = m.min_generator_degree();
        let pieces = (0..=max_degree.max(-1)).map(|d| m.compute_piece(d + lo)).collect();
        m.pieces = pieces;
        m.cached_up_to = max_degree;
        m
    }

    pub fn ring(&self) -> &Arc<Ring<F>> {
        &self.ring
    }

    pub fn presentation(&self) -> &ModulePresentation<F::Elem> {
        &self.presentation
    }

    pub fn min_generator_degree(&self) -> i32 {
        self.presentation.generators().iter().copied().min().unwrap_or(0)
    }

    fn compute_piece(&self, d: i32) -> ModulePiece<F::Elem> {
        let field = self.ring.field();
        let ambient = FreePiece::new(&self.ring, self.presentation.generators(), d);
        let n = ambient.total;
        let (_, cols) = graded_piece_sparse(&self.ring, &self.presentation.relations, d);
        let mut data = Vec::with_capacity(cols.len() * n);
        let mut nrows = 0;
        for c in cols.iter().filter(|c| !c.is_empty()) {
            let mut row = vec![field.zero(); n];
            for (i, v) in c {
                row[*i] = v.clone();
            }
            data.extend(row);
            nrows += 1;
        }
        let mut basis = Vec::new();
        let mut basis_pos = vec![None; n];
        let mut normal_form = vec![None; n];
        if nrows == 0 {
            basis = (0..n).collect();
            for (i, p) in basis_pos.iter_mut().enumerate() {
                *p = Some(i);
            }
        } else {
            let red = rref(field, &Matrix::new(nrows, n, data).expect("row data sized"));
            let mut is_pivot = vec![false; n];
            for &p in &red.pivots {
                is_pivot[p] = true;
            }
            for i in 0..n {
                if !is_pivot[i] {
                    basis_pos[i] = Some(basis.len());
                    basis.push(i);
                }
            }
            for (r, &p) in red.pivots.iter().enumerate() {
                let nf = basis
                    .iter()
                    .enumerate()
                    .filter(|(_, &col)| !field.is_zero(&red.matrix[(r, col)]))
                    .map(|(k, &col)| (k, field.neg(&red.matrix[(r, col)])))
                    .collect();
                normal_form[p] = Some(nf);
            }
        }
        ModulePiece { ambient, basis, basis_pos, normal_form }
    }

    pub fn piece(&self, d: i32) -> Cow<'_, ModulePiece<F::Elem>> {
        let k = d - self.min_generator_degree();
        if k >= 0 && k <= self.cached_up_to {
            Cow::Borrowed(&self.pieces[k as usize])
        } else {
            Cow::Owned(self.compute_piece(d))
        }
    }

    pub fn dim(&self, d: i32) -> usize {
        self.piece(d).dim()
    }

    /// Quotient coordinates of an ambient vector of the degree-`d` piece.
    pub fn reduce_in(&self, piece: &ModulePiece<F::Elem>, v: &SparseVec<F::Elem>) -> SparseVec<F::Elem> {
        let field = self.ring.field();
        let mut acc = vec![field.zero(); piece.basis.len()];
        for (i, c) in v {
            match piece.basis_pos[*i] {
                Some(k) => acc[k] = field.add(&acc[k], c),
                None => {
                    for (k, e) in piece.normal_form[*i].as_ref().expect("pivot position has a normal form") {
                        acc[*k] = field.add(&acc[*k], &field.mul(c, e));
                    }
                }
            }
        }
        acc.into_iter().enumerate().filter(|(_, v)| !field.is_zero(v)).collect()
    }

    /// Matrix (sparse columns) of multiplication by a homogeneous ring element
    /// `c` of degree `deg_c`, from degree `d` to degree `d + deg_c`.
    pub fn action(&self, c: &Poly<F::Elem>, deg_c: i32, d: i32) -> Vec<SparseVec<F::Elem>> {
        let src = self.piece(d);
        let tgt = self.piece(d + deg_c);
        self.action_between(&src, d, &tgt, d + deg_c, c)
    }

    pub fn action_between(
        &self,
        src: &ModulePiece<F::Elem>,
        src_degree: i32,
        tgt: &ModulePiece<F::Elem>,
        tgt_degree: i32,
        c: &Poly<F::Elem>,
    ) -> Vec<SparseVec<F::Elem>> {
        let gens = self.presentation.generators();
        (0..src.dim())
            .map(|k| {
                if tgt.dim() == 0 || c.is_zero() {
                    return Vec::new();
                }
                let (g, pos) = src.ambient.locate(src.lift(k));
                let u = self.ring.piece(src_degree - gens[g]).basis_monomial(pos);
                let coords = self.ring.coords(&c.mul_monomial(u), tgt_degree - gens[g]);
                let ambient: SparseVec<F::Elem> =
                    coords.into_iter().map(|(i, e)| (tgt.ambient.offsets[g] + i, e)).collect();
                self.reduce_in(tgt, &ambient)
            })
            .collect()
    }

    /// Whether `c` annihilates every generator.
    pub fn annihilated_by(&self, c: &Poly<F::Elem>) -> bool {
        let weights = self.ring.base().weights();
        let Some(dc) = c.homogeneous_degree(weights) else {
            return c.is_zero();
        };
        let gens = self.presentation.generators();
        gens.iter().enumerate().all(|(g, &a)| {
            let d = a + dc as i32;
            let tgt = self.piece(d);
            let coords = self.ring.coords(c, dc as i32);
            let ambient: SparseVec<F::Elem> =
                coords.into_iter().map(|(i, e)| (tgt.ambient.offsets[g] + i, e)).collect();
            self.reduce_in(&tgt, &ambient).is_empty()
        })
    }
}

/// `dim_k` of the degree-`d` piece of the cokernel.
pub fn hilbert_function<F: Field>(ring: &Ring<F>, m: &ModulePresentation<F::Elem>, d: i32) -> usize {
    let (rows, cols) = graded_piece_sparse(ring, m.relations(), d);
    rows - crate::exactlin::sparse_rank(ring.field(), rows, &cols)
}

/// Minimal homogeneous generators, in degrees up to `max_degree`, of the
/// kernel of `mat` as a module: in each degree, the kernel basis vectors that
/// are independent modulo ring multiples of earlier generators.
pub fn kernel_gens_up_to<F: Field>(
    ring: &Ring<F>,
    mat: &GradedMatrix<F::Elem>,
    max_degree: i32,
) -> Vec<(i32, Vec<Poly<F::Elem>>)> {
    let field = ring.field();
    let source = mat.source();
    let mut gens: Vec<(i32, Vec<Poly<F::Elem>>)> = Vec::new();
    let start = source.iter().copied().min().unwrap_or(0);
    for d in start..=max_degree {
        let (rows, cols) = graded_piece_sparse(ring, mat, d);
        let layout = FreePiece::new(ring, source, d);
        let kernel = sparse_kernel(field, rows, &cols);
        if kernel.is_empty() {
            continue;
        }
        let mut span = Echelon::new(field.clone(), layout.total);
        for (gd, col) in &gens {
            for u in ring.piece(d - gd).basis() {
                let shifted: Vec<Poly<F::Elem>> = col.iter().map(|p| ring.reduce(&p.mul_monomial(u))).collect();
                span.insert(&column_coords(ring, &layout, &shifted, source, d));
            }
        }
        for v in kernel {
            if matches!(span.insert(&v), Insertion::Pivot) {
                gens.push((d, vector_to_column(ring, &layout, source, d, &v)));
            }
        }
    }
    gens
}

/// Coordinates of a homogeneous column (one polynomial per generator) in the
/// degree-`d` piece.
pub fn column_coords<F: Field>(
    ring: &Ring<F>,
    layout: &FreePiece,
    col: &[Poly<F::Elem>],
    degrees: &[i32],
    d: i32,
) -> SparseVec<F::Elem> {
    let mut out = Vec::new();
    for (i, p) in col.iter().enumerate() {
        for (k, c) in ring.coords(p, d - degrees[i]) {
            out.push((layout.offsets[i] + k, c));
        }
    }
    out
}

pub fn vector_to_column<F: Field>(
    ring: &Ring<F>,
    layout: &FreePiece,
    degrees: &[i32],
    d: i32,
    v: &SparseVec<F::Elem>,
) -> Vec<Poly<F::Elem>> {
    let mut parts: Vec<SparseVec<F::Elem>> = vec![Vec::new(); degrees.len()];
    for (idx, c) in v {
        let (g, pos) = layout.locate(*idx);
        parts[g].push((pos, c.clone()));
    }
    parts.iter().enumerate().map(|(g, p)| ring.from_coords(d - degrees[g], p)).collect()
}
