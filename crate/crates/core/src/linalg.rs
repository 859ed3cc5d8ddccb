//! Matrices over GF(q) and subspaces in canonical form.
//!
//! A subspace is stored as the canonical matrix obtained from its reduced
//! row echelon basis by [`tau`]. Two subspaces are equal exactly when their
//! canonical matrices are equal.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::field::Field;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is not in reduced row echelon form")]
    NotReduced,
    #[error("matrix has a zero row")]
    RankDeficient,
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("vector length {got} does not match ambient dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("entry {0} is not a field element")]
    BadEntry(u32),
    #[error("row lengths differ")]
    Ragged,
}

/// Dense row-major matrix of field element indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(rows * cols, data.len());
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(cols: usize, rows: &[Vec<u32>]) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::Ragged);
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn identity(k: usize, cols: usize) -> Self {
        let mut m = Matrix::zeros(k, cols);
        for i in 0..k {
            m.data[i * cols + i] = 1;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u32] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    fn check_entries(&self, field: &Field) -> Result<(), LinalgError> {
        match self.data.iter().find(|&&x| x >= field.q()) {
            Some(&x) => Err(LinalgError::BadEntry(x)),
            None => Ok(()),
        }
    }

    fn leading(&self, i: usize) -> Option<usize> {
        self.row(i).iter().position(|&x| x != 0)
    }
}

fn row_axpy(field: &Field, dst: &mut [u32], c: u32, src: &[u32]) {
    // dst -= c * src
    if c == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d = field.sub(*d, field.mul(c, s));
        }
    }
}

fn row_scale(field: &Field, row: &mut [u32], c: u32) {
    for x in row.iter_mut() {
        *x = field.mul(*x, c);
    }
}

/// Reduced row echelon form of the row span, zero rows removed, together
/// with the pivot columns.
pub fn rref(field: &Field, m: &Matrix) -> (Matrix, Vec<usize>) {
    let cols = m.cols;
    let mut rows: Vec<Vec<u32>> = m.to_rows();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = field.inv(rows[r][c]);
        row_scale(field, &mut rows[r], inv);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                row_axpy(field, row, f, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    let data = rows.concat();
    (Matrix { rows: r, cols, data }, pivots)
}

fn is_rref(m: &Matrix) -> Result<Vec<usize>, LinalgError> {
    let mut pivots = Vec::with_capacity(m.rows);
    for i in 0..m.rows {
        let lead = m.leading(i).ok_or(LinalgError::RankDeficient)?;
        if pivots.last().is_some_and(|&p| p >= lead) || m.get(i, lead) != 1 {
            return Err(LinalgError::NotReduced);
        }
        if (0..m.rows).any(|r| r != i && m.get(r, lead) != 0) {
            return Err(LinalgError::NotReduced);
        }
        pivots.push(lead);
    }
    Ok(pivots)
}

/// The canonical transformation of a full-rank reduced row echelon matrix.
///
/// Works from the last column leftwards: a zero column is skipped; otherwise
/// the lowest remaining row with a nonzero entry there is scaled to 1 in
/// that column, the column is cleared from the other remaining rows, and the
/// row is set aside in place. The output is in row echelon form with the
/// same pivots and row span as the input.
pub fn tau(field: &Field, m: &Matrix) -> Result<Matrix, LinalgError> {
    is_rref(m)?;
    Ok(tau_unchecked(field, m.clone()))
}

fn tau_unchecked(field: &Field, mut m: Matrix) -> Matrix {
    let cols = m.cols;
    let mut active: Vec<usize> = (0..m.rows).collect();
    for c in (0..cols).rev() {
        if active.is_empty() {
            break;
        }
        let Some(pos) = active.iter().rposition(|&i| m.get(i, c) != 0) else {
            continue;
        };
        let i = active.remove(pos);
        let inv = field.inv(m.get(i, c));
        row_scale(field, &mut m.row_mut(i)[..=c], inv);
        let pivot_row: Vec<u32> = m.row(i)[..=c].to_vec();
        for &r in &active {
            let f = m.get(r, c);
            if f != 0 {
                row_axpy(field, &mut m.row_mut(r)[..=c], f, &pivot_row);
            }
        }
    }
    m
}

/// A subspace of GF(q)^n held in canonical form.
#[derive(Clone)]
pub struct Subspace {
    field: Field,
    n: usize,
    matrix: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    /// Canonical form of the row span of `basis` (any rank).
    pub fn from_basis(field: &Field, basis: &Matrix) -> Result<Self, LinalgError> {
        basis.check_entries(field)?;
        let (r, pivots) = rref(field, basis);
        let matrix = tau_unchecked(field, r);
        Ok(Subspace { field: field.clone(), n: basis.cols, matrix, pivots })
    }

    pub fn from_rows(field: &Field, n: usize, rows: &[Vec<u32>]) -> Result<Self, LinalgError> {
        Subspace::from_basis(field, &Matrix::from_rows(n, rows)?)
    }

    /// Wraps rows already known to be canonical.
    pub(crate) fn from_canonical_rows(field: &Field, n: usize, rows: &[Vec<u32>]) -> Self {
        let matrix = Matrix::from_rows(n, rows).expect("rows have ambient length");
        let pivots = (0..matrix.rows).map(|i| matrix.leading(i).expect("nonzero row")).collect();
        let s = Subspace { field: field.clone(), n, matrix, pivots };
        debug_assert!(s.is_canonical(), "rows are not canonical: {s:?}");
        s
    }

    /// `[I_k | 0]`.
    pub fn simple(field: &Field, n: usize, k: usize) -> Self {
        assert!(k <= n);
        Subspace {
            field: field.clone(),
            n,
            matrix: Matrix::identity(k, n),
            pivots: (0..k).collect(),
        }
    }

    pub fn zero(field: &Field, n: usize) -> Self {
        Subspace::simple(field, n, 0)
    }

    pub fn full(field: &Field, n: usize) -> Self {
        Subspace::simple(field, n, n)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.matrix.to_rows()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        self.matrix.row(i)
    }

    pub fn is_simple(&self) -> bool {
        self.matrix == Matrix::identity(self.dim(), self.n)
    }

    /// Re-derives the canonical form from scratch and compares.
    pub fn is_canonical(&self) -> bool {
        Subspace::from_basis(&self.field, &self.matrix)
            .map(|s| s.matrix == self.matrix)
            .unwrap_or(false)
    }

    /// Reduced row echelon basis.
    pub fn rref(&self) -> Matrix {
        rref(&self.field, &self.matrix).0
    }

    fn check_compatible(&self, other: &Subspace) -> Result<(), LinalgError> {
        if !self.field.same_as(&other.field) {
            return Err(LinalgError::FieldMismatch(self.field.q(), other.field.q()));
        }
        if self.n != other.n {
            return Err(LinalgError::AmbientMismatch(self.n, other.n));
        }
        Ok(())
    }

    /// Remainder of `v` after elimination against the echelon rows; zero iff
    /// `v` lies in the subspace.
    pub(crate) fn reduce(&self, v: &mut [u32]) {
        let f = &self.field;
        for (i, &p) in self.pivots.iter().enumerate() {
            if v[p] != 0 {
                let row = self.matrix.row(i);
                let c = f.mul(v[p], f.inv(row[p]));
                row_axpy(f, v, c, row);
            }
        }
    }

    pub fn contains(&self, v: &[u32]) -> Result<bool, LinalgError> {
        if v.len() != self.n {
            return Err(LinalgError::LengthMismatch { expected: self.n, got: v.len() });
        }
        if let Some(&x) = v.iter().find(|&&x| x >= self.field.q()) {
            return Err(LinalgError::BadEntry(x));
        }
        let mut w = v.to_vec();
        self.reduce(&mut w);
        Ok(w.iter().all(|&x| x == 0))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.n == other.n
            && self.dim() <= other.dim()
            && (0..self.dim()).all(|i| {
                let mut w = self.matrix.row(i).to_vec();
                other.reduce(&mut w);
                w.iter().all(|&x| x == 0)
            })
    }

    /// Sum and intersection together (Zassenhaus): reduce
    /// `[[A, A], [B, 0]]`; rows with a nonzero left half span `A + B`,
    /// the right halves of the remaining rows span `A ∩ B`.
    pub fn sum_and_intersection(&self, other: &Subspace) -> Result<(Subspace, Subspace), LinalgError> {
        self.check_compatible(other)?;
        let n = self.n;
        let mut rows = Vec::with_capacity(self.dim() + other.dim());
        for r in self.rows() {
            let mut row = r.clone();
            row.extend_from_slice(&r);
            rows.push(row);
        }
        for r in other.rows() {
            let mut row = r;
            row.extend(std::iter::repeat_n(0, n));
            rows.push(row);
        }
        let stacked = Matrix::from_rows(2 * n, &rows)?;
        let (red, pivots) = rref(&self.field, &stacked);
        let mut sum_rows = Vec::new();
        let mut int_rows = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            let row = red.row(i);
            if p < n {
                sum_rows.push(row[..n].to_vec());
            } else {
                int_rows.push(row[n..].to_vec());
            }
        }
        Ok((
            Subspace::from_rows(&self.field, n, &sum_rows)?,
            Subspace::from_rows(&self.field, n, &int_rows)?,
        ))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        Ok(self.sum_and_intersection(other)?.1)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_compatible(other)?;
        let mut rows = self.rows();
        rows.extend(other.rows());
        Subspace::from_rows(&self.field, self.n, &rows)
    }

    /// Orthogonal complement under the standard dot product.
    pub fn dual(&self) -> Subspace {
        let f = &self.field;
        let r = self.rref();
        let mut is_pivot = vec![false; self.n];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let mut rows = Vec::with_capacity(self.n - self.dim());
        for free in (0..self.n).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0; self.n];
            v[free] = 1;
            for (i, &p) in self.pivots.iter().enumerate() {
                v[p] = f.neg(r.get(i, free));
            }
            rows.push(v);
        }
        Subspace::from_rows(f, self.n, &rows).expect("well-formed rows")
    }

    /// Every vector of the subspace (q^k of them).
    pub fn vectors(&self) -> Vec<Vec<u32>> {
        let f = &self.field;
        let mut out = vec![vec![0u32; self.n]];
        for i in 0..self.dim() {
            let row = self.matrix.row(i);
            let mut next = Vec::with_capacity(out.len() * f.q() as usize);
            for v in &out {
                for c in 0..f.q() {
                    let mut w = v.clone();
                    for (x, &r) in w.iter_mut().zip(row) {
                        *x = f.add(*x, f.mul(c, r));
                    }
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }

    /// Image under a linear map given by its matrix acting on row vectors.
    pub fn map(&self, a: &Matrix) -> Subspace {
        assert_eq!(a.rows(), self.n);
        let f = &self.field;
        let rows: Vec<Vec<u32>> = (0..self.dim())
            .map(|i| vec_mat(f, self.matrix.row(i), a))
            .collect();
        Subspace::from_rows(f, a.cols(), &rows).expect("well-formed rows")
    }

    /// Flattened entries, the key used for lexicographic comparison.
    pub fn key(&self) -> &[u32] {
        self.matrix.data()
    }
}

pub(crate) fn vec_mat(f: &Field, v: &[u32], a: &Matrix) -> Vec<u32> {
    let mut out = vec![0u32; a.cols()];
    for (i, &x) in v.iter().enumerate() {
        if x != 0 {
            for (o, &y) in out.iter_mut().zip(a.row(i)) {
                if y != 0 {
                    *o = f.add(*o, f.mul(x, y));
                }
            }
        }
    }
    out
}

pub fn mat_mul(f: &Field, a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols(), b.rows());
    let rows: Vec<Vec<u32>> = (0..a.rows()).map(|i| vec_mat(f, a.row(i), b)).collect();
    Matrix::from_rows(b.cols(), &rows).unwrap()
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.matrix == other.matrix && self.field.same_as(&other.field)
    }
}

impl Eq for Subspace {}

impl Hash for Subspace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.matrix.hash(state);
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, self.dim(), self.key()).cmp(&(other.n, other.dim(), other.key()))
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace{:?}", self.rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn gf(q: u64) -> Field {
        Field::with_order(q).unwrap()
    }

    fn span_set(s: &Subspace) -> BTreeSet<Vec<u32>> {
        s.vectors().into_iter().collect()
    }

    #[test]
    fn rref_examples() {
        let f = gf(5);
        let m = Matrix::from_rows(3, &[vec![2, 0, 1], vec![0, 0, 3]]).unwrap();
        let (r, p) = rref(&f, &m);
        assert_eq!(r.to_rows(), vec![vec![1, 0, 0], vec![0, 0, 1]]);
        assert_eq!(p, vec![0, 2]);

        let id = Matrix::identity(3, 3);
        assert_eq!(rref(&f, &id), (id.clone(), vec![0, 1, 2]));

        let (z, p) = rref(&f, &Matrix::zeros(2, 3));
        assert_eq!((z.rows(), z.cols()), (0, 3));
        assert!(p.is_empty());
    }

    #[test]
    fn tau_worked_example() {
        let f = gf(5);
        let m = Matrix::from_rows(
            5,
            &[vec![1, 0, 3, 0, 1], vec![0, 1, 2, 0, 4], vec![0, 0, 0, 1, 2]],
        )
        .unwrap();
        let t = tau(&f, &m).unwrap();
        assert_eq!(
            t.to_rows(),
            vec![vec![1, 1, 0, 0, 0], vec![0, 2, 4, 1, 0], vec![0, 0, 0, 3, 1]]
        );
    }

    #[test]
    fn tau_fixed_points_and_errors() {
        let f = gf(3);
        let padded = Matrix::identity(2, 4);
        assert_eq!(tau(&f, &padded).unwrap(), padded);
        let single = Matrix::from_rows(3, &[vec![1, 2, 1]]).unwrap();
        assert_eq!(tau(&f, &single).unwrap(), single);
        let not_reduced = Matrix::from_rows(2, &[vec![2, 1]]).unwrap();
        assert_eq!(tau(&f, &not_reduced).unwrap_err(), LinalgError::NotReduced);
        let zero_row = Matrix::from_rows(2, &[vec![1, 0], vec![0, 0]]).unwrap();
        assert_eq!(tau(&f, &zero_row).unwrap_err(), LinalgError::RankDeficient);
    }

    #[test]
    fn canonicalize_examples() {
        let f2 = gf(2);
        let s = Subspace::from_rows(&f2, 2, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(s.rows(), vec![vec![1, 0], vec![0, 1]]);

        // (2,4) over GF(5): rref gives (1,2); tau scales the last entry to 1,
        // giving 3*(1,2) = (3,1).
        let f5 = gf(5);
        let s = Subspace::from_rows(&f5, 2, &[vec![2, 4]]).unwrap();
        assert_eq!(s.rows(), vec![vec![3, 1]]);
        assert!(s.contains(&[2, 4]).unwrap());

        let z = Subspace::from_rows(&f2, 3, &[]).unwrap();
        assert_eq!(z.dim(), 0);
        assert_eq!(z.ambient(), 3);
    }

    #[test]
    fn intersect_and_sum() {
        let f = gf(2);
        let a = Subspace::from_rows(&f, 2, &[vec![1, 0]]).unwrap();
        let b = Subspace::from_rows(&f, 2, &[vec![0, 1]]).unwrap();
        assert_eq!(a.intersect(&b).unwrap().dim(), 0);
        assert_eq!(a.sum(&b).unwrap().dim(), 2);
        assert_eq!(a.intersect(&a).unwrap(), a);
        assert_eq!(a.sum(&a).unwrap(), a);

        // two planes inside span(e0, e1, e2) of GF(2)^4
        let p1 = Subspace::from_rows(&f, 4, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0]]).unwrap();
        let p2 = Subspace::from_rows(&f, 4, &[vec![1, 1, 0, 0], vec![0, 0, 1, 0]]).unwrap();
        let i = p1.intersect(&p2).unwrap();
        assert_eq!(i.dim(), 1);
        let brute: BTreeSet<_> = span_set(&p1).intersection(&span_set(&p2)).cloned().collect();
        assert_eq!(brute, span_set(&i));

        let other = Subspace::zero(&f, 3);
        assert_eq!(a.intersect(&other).unwrap_err(), LinalgError::AmbientMismatch(2, 3));
        let g3 = Subspace::zero(&gf(3), 2);
        assert!(matches!(a.sum(&g3), Err(LinalgError::FieldMismatch(2, 3))));
    }

    #[test]
    fn dual_examples() {
        let f = gf(2);
        assert_eq!(Subspace::full(&f, 3).dual().dim(), 0);
        let e0 = Subspace::from_rows(&f, 3, &[vec![1, 0, 0]]).unwrap();
        assert_eq!(e0.dual().rows(), vec![vec![0, 1, 0], vec![0, 0, 1]]);

        let f3 = gf(3);
        let a = Subspace::from_rows(&f3, 4, &[vec![1, 2, 0, 1], vec![0, 1, 1, 2]]).unwrap();
        let d = a.dual();
        assert_eq!(d.dim(), 2);
        // brute force: all vectors orthogonal to A's basis
        let dot = |x: &[u32], y: &[u32]| {
            x.iter().zip(y).fold(0, |acc, (&u, &v)| f3.add(acc, f3.mul(u, v)))
        };
        let mut orth = BTreeSet::new();
        for i in 0..81u32 {
            let v: Vec<u32> = (0..4).map(|j| (i / 3u32.pow(j)) % 3).collect();
            if a.rows().iter().all(|r| dot(r, &v) == 0) {
                orth.insert(v);
            }
        }
        assert_eq!(orth, span_set(&d));
        assert_eq!(d.dual(), a);
    }

    #[test]
    fn simplicity() {
        let f = gf(2);
        assert!(Subspace::simple(&f, 4, 2).is_simple());
        assert!(!Subspace::from_rows(&f, 2, &[vec![1, 1]]).unwrap().is_simple());
        assert!(Subspace::zero(&f, 3).is_simple());
    }

    #[test]
    fn containment() {
        let f = gf(3);
        let a = Subspace::from_rows(&f, 4, &[vec![1, 2, 0, 1], vec![0, 1, 1, 2]]).unwrap();
        assert!(a.contains(&[0, 0, 0, 0]).unwrap());
        for v in a.vectors() {
            assert!(a.contains(&v).unwrap());
        }
        assert_eq!(a.vectors().len(), 9);
        let e0 = Subspace::from_rows(&f, 2, &[vec![1, 0]]).unwrap();
        assert!(!e0.contains(&[0, 1]).unwrap());
        assert!(matches!(e0.contains(&[0]), Err(LinalgError::LengthMismatch { .. })));
        assert!(matches!(e0.contains(&[0, 7]), Err(LinalgError::BadEntry(7))));
    }
}
