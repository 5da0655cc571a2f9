//! Exact linear algebra over a [`Field`].
//!
//! [`Matrix`] with [`rref`], [`solve`] and [`kernel_basis`] is the dense
//! reference API. [`Echelon`] is an incremental sparse column-echelon form used
//! for the large, very sparse degreewise systems; it makes the same choices as
//! the dense routines (pivots are the first independent columns, free
//! variables are set to zero, kernel vectors are the free-variable basis).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn new(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn zeros<F: Field<Elem = E>>(field: &F, rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, field.zero())
    }

    pub fn identity<F: Field<Elem = E>>(field: &F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = field.one();
        }
        m
    }

    pub fn from_rows<F: Field<Elem = E>>(field: &F, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows.iter().flat_map(|r| r.iter().map(|&v| field.from_i64(v))).collect();
        Self { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)].clone());
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn mul<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let mut out = Self::zeros(field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if field.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let mut acc = out[(i, j)].clone();
                    field.mul_add_assign(&mut acc, a, &other[(k, j)]);
                    out[(i, j)] = acc;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec<F: Field<Elem = E>>(&self, field: &F, v: &[E]) -> Vec<E> {
        assert_eq!(v.len(), self.cols, "vector length must match column count");
        (0..self.rows)
            .map(|i| {
                let mut acc = field.zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    field.mul_add_assign(&mut acc, a, b);
                }
                acc
            })
            .collect()
    }

    pub fn is_zero<F: Field<Elem = E>>(&self, field: &F) -> bool {
        self.data.iter().all(|e| field.is_zero(e))
    }
}

impl<E> core::ops::Index<(usize, usize)> for Matrix<E> {
    type Output = E;
    fn index(&self, (i, j): (usize, usize)) -> &E {
        &self.data[i * self.cols + j]
    }
}

impl<E> core::ops::IndexMut<(usize, usize)> for Matrix<E> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        &mut self.data[i * self.cols + j]
    }
}

impl<E: fmt::Debug> fmt::Debug for Matrix<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref<E> {
    pub matrix: Matrix<E>,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Reduced row echelon form by Gauss-Jordan elimination.
pub fn rref<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Rref<F::Elem> {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !field.is_zero(&a[(i, c)])) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = field.inv(&a[(r, c)]).expect("pivot is nonzero");
        for j in c..cols {
            a[(r, j)] = field.mul(&a[(r, j)], &inv);
        }
        for i in 0..rows {
            if i == r || field.is_zero(&a[(i, c)]) {
                continue;
            }
            let factor = a[(i, c)].clone();
            for j in c..cols {
                let sub = field.mul(&factor, &a[(r, j)]);
                a[(i, j)] = field.sub(&a[(i, j)], &sub);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let rank = pivots.len();
    Rref { matrix: a, pivots, rank }
}

pub fn rank<F: Field>(field: &F, m: &Matrix<F::Elem>) -> usize {
    rref(field, m).rank
}

/// Particular solution of `a x = b`; free variables are zero.
pub fn solve<F: Field>(field: &F, a: &Matrix<F::Elem>, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(alloc::format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    let n = a.cols;
    let mut data = Vec::with_capacity(a.rows * (n + 1));
    for i in 0..a.rows {
        data.extend_from_slice(a.row(i));
        data.push(b[i].clone());
    }
    let aug = Matrix { rows: a.rows, cols: n + 1, data };
    let red = rref(field, &aug);
    if red.pivots.last() == Some(&n) {
        return Err(Error::NoSolution);
    }
    let mut x = vec![field.zero(); n];
    for (row, &c) in red.pivots.iter().enumerate() {
        x[c] = red.matrix[(row, n)].clone();
    }
    Ok(x)
}

/// Free-variable basis of the null space, one vector per non-pivot column.
pub fn kernel_basis<F: Field>(field: &F, a: &Matrix<F::Elem>) -> Vec<Vec<F::Elem>> {
    let red = rref(field, a);
    let mut is_pivot = vec![false; a.cols];
    for &c in &red.pivots {
        is_pivot[c] = true;
    }
    (0..a.cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![field.zero(); a.cols];
            v[free] = field.one();
            for (row, &pc) in red.pivots.iter().enumerate() {
                v[pc] = field.neg(&red.matrix[(row, free)]);
            }
            v
        })
        .collect()
}

/// Sparse vector: strictly increasing indices, no stored zeros.
pub type SparseVec<E> = Vec<(usize, E)>;

pub fn sparse_from_dense<F: Field>(field: &F, v: &[F::Elem]) -> SparseVec<F::Elem> {
    v.iter()
        .enumerate()
        .filter(|(_, e)| !field.is_zero(e))
        .map(|(i, e)| (i, e.clone()))
        .collect()
}

pub fn dense_from_sparse<F: Field>(field: &F, dim: usize, v: &SparseVec<F::Elem>) -> Vec<F::Elem> {
    let mut out = vec![field.zero(); dim];
    for (i, e) in v {
        out[*i] = e.clone();
    }
    out
}

/// Outcome of inserting a column into an [`Echelon`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Insertion<E> {
    /// The column is independent of the previous ones and became a pivot.
    Pivot,
    /// The column depends on earlier pivot columns; the vector is the
    /// resulting kernel element (1 at the inserted column).
    Dependent(SparseVec<E>),
}

/// Incremental column echelon form of the column sequence `c_0, c_1, ...`
/// inserted so far, in an ambient space of dimension `dim`.
///
/// Each stored row is a reduced combination of inserted columns with leading
/// coefficient 1 at its pivot index; the combination is tracked so that
/// preimages and kernel vectors can be read off.
#[derive(Clone, Debug)]
pub struct Echelon<F: Field> {
    field: F,
    dim: usize,
    pivot_row: Vec<Option<usize>>,
    rows: Vec<SparseVec<F::Elem>>,
    combos: Vec<SparseVec<F::Elem>>,
    pivot_columns: Vec<usize>,
    inserted: usize,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: F, dim: usize) -> Self {
        Self {
            field,
            dim,
            pivot_row: vec![None; dim],
            rows: Vec::new(),
            combos: Vec::new(),
            pivot_columns: Vec::new(),
            inserted: 0,
        }
    }

    /// Echelon form of all columns of a sparse column list.
    pub fn from_columns(field: F, dim: usize, cols: &[SparseVec<F::Elem>]) -> Self {
        let mut e = Self::new(field, dim);
        for c in cols {
            e.insert(c);
        }
        e
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn columns_inserted(&self) -> usize {
        self.inserted
    }

    /// Indices of the inserted columns that became pivots, ascending.
    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivot_columns
    }

    fn reduce_dense(&self, acc: &mut [F::Elem], combo: &mut [F::Elem], track: bool) {
        let f = &self.field;
        for i in 0..self.dim {
            if f.is_zero(&acc[i]) {
                continue;
            }
            let Some(r) = self.pivot_row[i] else { continue };
            let c = acc[i].clone();
            for (j, v) in &self.rows[r] {
                acc[*j] = f.sub(&acc[*j], &f.mul(&c, v));
            }
            if track {
                for (j, v) in &self.combos[r] {
                    combo[*j] = f.add(&combo[*j], &f.mul(&c, v));
                }
            }
        }
    }

    /// Insert the next column.
    pub fn insert(&mut self, col: &SparseVec<F::Elem>) -> Insertion<F::Elem> {
        let f = self.field.clone();
        let idx = self.inserted;
        self.inserted += 1;
        let mut acc = vec![f.zero(); self.dim];
        for (i, v) in col {
            acc[*i] = v.clone();
        }
        let mut combo = vec![f.zero(); idx + 1];
        self.reduce_dense(&mut acc, &mut combo, true);
        // residual = col - sum combo_j c_j
        let residual = sparse_from_dense(&f, &acc);
        match residual.first() {
            None => {
                let mut k: SparseVec<F::Elem> = combo
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| !f.is_zero(e))
                    .map(|(i, e)| (i, f.neg(e)))
                    .collect();
                k.push((idx, f.one()));
                Insertion::Dependent(k)
            }
            Some((lead, lead_val)) => {
                let lead = *lead;
                let inv = f.inv(lead_val).expect("leading entry is nonzero");
                let row: SparseVec<F::Elem> = residual.iter().map(|(i, e)| (*i, f.mul(e, &inv))).collect();
                // row = inv * (col - sum combo_j c_j)
                let mut cmb: SparseVec<F::Elem> = combo
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| !f.is_zero(e))
                    .map(|(i, e)| (i, f.neg(&f.mul(e, &inv))))
                    .collect();
                cmb.push((idx, inv));
                self.pivot_row[lead] = Some(self.rows.len());
                self.rows.push(row);
                self.combos.push(cmb);
                self.pivot_columns.push(idx);
                Insertion::Pivot
            }
        }
    }

    pub fn contains(&self, v: &SparseVec<F::Elem>) -> bool {
        let f = &self.field;
        let mut acc = dense_from_sparse(f, self.dim, v);
        self.reduce_dense(&mut acc, &mut [], false);
        acc.iter().all(|e| f.is_zero(e))
    }

    /// Coefficients `x` (indexed by inserted column) with `sum x_j c_j = b`,
    /// supported on pivot columns, or `None` if `b` is not in the span.
    pub fn solve(&self, b: &SparseVec<F::Elem>) -> Option<SparseVec<F::Elem>> {
        let f = &self.field;
        let mut acc = dense_from_sparse(f, self.dim, b);
        let mut combo = vec![f.zero(); self.inserted];
        self.reduce_dense(&mut acc, &mut combo, true);
        if acc.iter().any(|e| !f.is_zero(e)) {
            return None;
        }
        Some(sparse_from_dense(f, &combo))
    }

    /// Residual of `v` after reduction by the stored pivots.
    pub fn reduce(&self, v: &SparseVec<F::Elem>) -> SparseVec<F::Elem> {
        let f = &self.field;
        let mut acc = dense_from_sparse(f, self.dim, v);
        self.reduce_dense(&mut acc, &mut [], false);
        sparse_from_dense(f, &acc)
    }
}

/// Kernel of a sparse column matrix (ambient row dimension `dim`), as the
/// free-variable basis.
pub fn sparse_kernel<F: Field>(field: &F, dim: usize, cols: &[SparseVec<F::Elem>]) -> Vec<SparseVec<F::Elem>> {
    let mut e = Echelon::new(field.clone(), dim);
    cols.iter()
        .filter_map(|c| match e.insert(c) {
            Insertion::Dependent(k) => Some(k),
            Insertion::Pivot => None,
        })
        .collect()
}

pub fn sparse_rank<F: Field>(field: &F, dim: usize, cols: &[SparseVec<F::Elem>]) -> usize {
    Echelon::from_columns(field.clone(), dim, cols).rank()
}

/// Columns of a dense matrix as sparse vectors.
pub fn sparse_columns<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Vec<SparseVec<F::Elem>> {
    (0..m.cols()).map(|j| sparse_from_dense(field, &m.column(j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use proptest::prelude::*;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    #[test]
    fn rref_identity_and_zero() {
        let f = f5();
        let id = Matrix::identity(&f, 2);
        let r = rref(&f, &id);
        assert_eq!(r.matrix, id);
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(r.rank, 2);

        let z = Matrix::zeros(&f, 3, 4);
        let r = rref(&f, &z);
        assert_eq!(r.matrix, z);
        assert!(r.pivots.is_empty());
        assert_eq!(r.rank, 0);
    }

    #[test]
    fn rref_dependent_rows() {
        let f = f5();
        let m = Matrix::from_rows(&f, &[vec![1, 2], vec![2, 4]]);
        let r = rref(&f, &m);
        assert_eq!(r.matrix, Matrix::from_rows(&f, &[vec![1, 2], vec![0, 0]]));
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn solve_examples() {
        let f = f5();
        let id = Matrix::identity(&f, 3);
        assert_eq!(solve(&f, &id, &[1, 4, 2]).unwrap(), vec![1, 4, 2]);

        let a = Matrix::from_rows(&f, &[vec![1], vec![0]]);
        assert_eq!(solve(&f, &a, &[0, 1]), Err(Error::NoSolution));

        let a = Matrix::from_rows(&f, &[vec![1, 1]]);
        assert_eq!(solve(&f, &a, &[3]).unwrap(), vec![3, 0]);
    }

    #[test]
    fn kernel_examples() {
        let f = f5();
        assert!(kernel_basis(&f, &Matrix::identity(&f, 3)).is_empty());
        let k = kernel_basis(&f, &Matrix::zeros(&f, 2, 3));
        assert_eq!(k, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let k = kernel_basis(&f, &Matrix::from_rows(&f, &[vec![1, 1]]));
        assert_eq!(k, vec![vec![f.from_i64(-1), 1]]);
    }

    fn small_matrix() -> impl Strategy<Value = (usize, usize, Vec<i64>)> {
        (0usize..6, 0usize..6).prop_flat_map(|(r, c)| (Just(r), Just(c), proptest::collection::vec(-3i64..4, r * c)))
    }

    proptest! {
        #[test]
        fn rref_idempotent((r, c, d) in small_matrix()) {
            let f = PrimeField::new(7).unwrap();
            let m = Matrix::new(r, c, d.iter().map(|&v| f.from_i64(v)).collect()).unwrap();
            let once = rref(&f, &m);
            let twice = rref(&f, &once.matrix);
            prop_assert_eq!(once.matrix, twice.matrix);
        }

        #[test]
        fn rank_nullity((r, c, d) in small_matrix()) {
            let f = PrimeField::new(7).unwrap();
            let m = Matrix::new(r, c, d.iter().map(|&v| f.from_i64(v)).collect()).unwrap();
            let k = kernel_basis(&f, &m);
            prop_assert_eq!(rank(&f, &m) + k.len(), c);
            for v in &k {
                prop_assert!(m.mul_vec(&f, v).iter().all(|e| *e == 0));
            }
        }

        #[test]
        fn solve_round_trip((r, c, d) in small_matrix(), x in proptest::collection::vec(-3i64..4, 6)) {
            let f = PrimeField::new(7).unwrap();
            let m = Matrix::new(r, c, d.iter().map(|&v| f.from_i64(v)).collect()).unwrap();
            let x: Vec<u32> = x[..c].iter().map(|&v| f.from_i64(v)).collect();
            let b = m.mul_vec(&f, &x);
            let sol = solve(&f, &m, &b).unwrap();
            prop_assert_eq!(m.mul_vec(&f, &sol), b);
        }

        // The sparse echelon makes the same deterministic choices as the dense RREF.
        #[test]
        fn echelon_agrees_with_rref((r, c, d) in small_matrix(), bv in proptest::collection::vec(-3i64..4, 6)) {
            let f = PrimeField::new(7).unwrap();
            let m = Matrix::new(r, c, d.iter().map(|&v| f.from_i64(v)).collect()).unwrap();
            let cols = sparse_columns(&f, &m);
            let ech = Echelon::from_columns(f, r, &cols);
            let red = rref(&f, &m);
            prop_assert_eq!(ech.pivot_columns(), &red.pivots[..]);
            let dense_kernel: Vec<_> = kernel_basis(&f, &m).iter().map(|v| sparse_from_dense(&f, v)).collect();
            prop_assert_eq!(sparse_kernel(&f, r, &cols), dense_kernel);
            let b: Vec<u32> = bv[..r].iter().map(|&v| f.from_i64(v)).collect();
            let dense = solve(&f, &m, &b).ok().map(|x| sparse_from_dense(&f, &x));
            prop_assert_eq!(ech.solve(&sparse_from_dense(&f, &b)), dense);
        }
    }
}
