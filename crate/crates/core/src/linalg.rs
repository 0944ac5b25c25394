//! Dense matrices over a [`FieldSpec`] with exact Gaussian elimination.
//!
//! Every "span" question the codes ask (axiom checks, decoding, repair
//! coefficients) bottoms out in [`Matrix::rref`]. Pivoting takes the first
//! nonzero entry in a column; over a field the result does not depend on the
//! pivot order.

use std::fmt;

use thiserror::Error;

use crate::field::{FieldSpec, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inconsistent system: equation {row} has a nonzero residual")]
    NoSolution { row: usize },
    #[error("matrix is singular")]
    Singular,
}

/// `dst += factor * src`, elementwise.
#[inline]
pub fn axpy(field: &FieldSpec, dst: &mut [Symbol], src: &[Symbol], factor: Symbol) {
    if factor == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d = field.add(*d, field.mul(factor, s));
        }
    }
}

pub fn dot(field: &FieldSpec, a: &[Symbol], b: &[Symbol]) -> Symbol {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| field.mul_add(acc, x, y))
}

pub fn scale(field: &FieldSpec, v: &[Symbol], c: Symbol) -> Vec<Symbol> {
    v.iter().map(|&x| field.mul(c, x)).collect()
}

pub fn add_vec(field: &FieldSpec, a: &[Symbol], b: &[Symbol]) -> Vec<Symbol> {
    a.iter().zip(b).map(|(&x, &y)| field.add(x, y)).collect()
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form plus bookkeeping.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: Matrix,
    /// Pivot column of each of the first `rank` rows.
    pub pivots: Vec<usize>,
    /// `origin[i]` is the input row that ended up at position `i`.
    pub origin: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl Matrix {
    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix { field: field.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(field: &FieldSpec, rows: usize, cols: usize, data: Vec<Symbol>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { field: field.clone(), rows, cols, data })
    }

    /// Builds a matrix from rows of equal length. An empty row list needs the
    /// column count, so use [`Matrix::zeros`] for that case.
    pub fn from_rows<R: AsRef<[Symbol]>>(field: &FieldSpec, rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch(format!("row {i} has length {} not {cols}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { field: field.clone(), rows: rows.len(), cols, data })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Symbol] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Symbol] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Symbol]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn push_row(&mut self, row: &[Symbol]) -> Result<(), LinalgError> {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        if row.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!("row of length {} into {} columns", row.len(), self.cols)));
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    /// Vertical concatenation.
    pub fn stack(field: &FieldSpec, blocks: &[&Matrix]) -> Result<Self, LinalgError> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut out = Matrix::zeros(field, 0, cols);
        for b in blocks {
            if b.cols != cols {
                return Err(LinalgError::DimensionMismatch("stacked blocks differ in width".into()));
            }
            out.data.extend_from_slice(&b.data);
            out.rows += b.rows;
        }
        Ok(out)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(&self.field, 0, self.cols);
        for &i in idx {
            out.data.extend_from_slice(self.row(i));
            out.rows += 1;
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(&self.field, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a != 0 {
                    let src = &other.data[k * other.cols..(k + 1) * other.cols];
                    let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                    axpy(&self.field, dst, src, a);
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Symbol]) -> Result<Vec<Symbol>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!("{} columns times vector of length {}", self.cols, v.len())));
        }
        Ok(self.row_iter().map(|r| dot(&self.field, r, v)).collect())
    }

    /// Like [`Matrix::mul_vec`] but writes into `out` and skips the length check.
    #[inline]
    pub fn mul_vec_into(&self, v: &[Symbol], out: &mut [Symbol]) {
        for (o, r) in out.iter_mut().zip(self.row_iter()) {
            *o = dot(&self.field, r, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Gauss-Jordan elimination to reduced row echelon form.
    pub fn rref(&self) -> Echelon {
        let f = &self.field;
        let mut m = self.clone();
        let mut origin: Vec<usize> = (0..self.rows).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                swap_rows(&mut m, p, r);
                origin.swap(p, r);
            }
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for x in m.row_mut(r) {
                *x = f.mul(*x, inv);
            }
            let pivot_row = m.row(r).to_vec();
            for i in 0..self.rows {
                if i != r {
                    let factor = m.get(i, c);
                    if factor != 0 {
                        axpy(f, m.row_mut(i), &pivot_row, f.neg(factor));
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { reduced: m, pivots, origin }
    }

    /// Row rank.
    pub fn rank(&self) -> usize {
        // Forward elimination only; cheaper than a full rref.
        let f = &self.field;
        let mut m = self.clone();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                swap_rows(&mut m, p, r);
            }
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            let pivot_row: Vec<Symbol> = m.row(r).iter().map(|&x| f.mul(x, inv)).collect();
            for i in r + 1..self.rows {
                let factor = m.get(i, c);
                if factor != 0 {
                    axpy(f, m.row_mut(i), &pivot_row, f.neg(factor));
                }
            }
            r += 1;
        }
        r
    }

    pub fn determinant(&self) -> Result<Symbol, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let f = &self.field;
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1;
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| m.get(i, c) != 0) else {
                return Ok(0);
            };
            if p != c {
                swap_rows(&mut m, p, c);
                det = f.neg(det);
            }
            let pivot = m.get(c, c);
            det = f.mul(det, pivot);
            let inv = f.inv(pivot).expect("pivot is nonzero");
            let pivot_row: Vec<Symbol> = m.row(c).iter().map(|&x| f.mul(x, inv)).collect();
            for i in c + 1..n {
                let factor = m.get(i, c);
                if factor != 0 {
                    axpy(f, m.row_mut(i), &pivot_row, f.neg(factor));
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        match self.solve_matrix(&Matrix::identity(&self.field, self.rows)) {
            Ok(sol) if sol.unique => Ok(sol.x),
            Ok(_) | Err(LinalgError::NoSolution { .. }) => Err(LinalgError::Singular),
            Err(e) => Err(e),
        }
    }

    /// Solves `self * x = b`. Underdetermined systems return one solution
    /// (free variables set to zero) with `unique = false`.
    pub fn solve(&self, b: &[Symbol]) -> Result<Solution<Vec<Symbol>>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!("{} equations, right-hand side of length {}", self.rows, b.len())));
        }
        let rhs = Matrix::from_vec(&self.field, self.rows, 1, b.to_vec())?;
        let sol = self.solve_matrix(&rhs)?;
        Ok(Solution { x: sol.x.data, unique: sol.unique })
    }

    /// Solves `self * X = B` for all columns of `B` at once.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Solution<Matrix>, LinalgError> {
        if b.rows != self.rows {
            return Err(LinalgError::DimensionMismatch(format!("{} equations, right-hand side with {} rows", self.rows, b.rows)));
        }
        let width = self.cols + b.cols;
        let mut aug = Matrix::zeros(&self.field, self.rows, width);
        for r in 0..self.rows {
            aug.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            aug.row_mut(r)[self.cols..].copy_from_slice(b.row(r));
        }
        let ech = aug.rref_limited(self.cols);
        let rank = ech.rank();
        for i in rank..self.rows {
            if ech.reduced.row(i)[self.cols..].iter().any(|&x| x != 0) {
                return Err(LinalgError::NoSolution { row: ech.origin[i] });
            }
        }
        let mut x = Matrix::zeros(&self.field, self.cols, b.cols);
        for (i, &pc) in ech.pivots.iter().enumerate() {
            x.row_mut(pc).copy_from_slice(&ech.reduced.row(i)[self.cols..]);
        }
        Ok(Solution { x, unique: rank == self.cols })
    }

    /// rref that only pivots within the first `limit` columns.
    fn rref_limited(&self, limit: usize) -> Echelon {
        let f = &self.field;
        let mut m = self.clone();
        let mut origin: Vec<usize> = (0..self.rows).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                swap_rows(&mut m, p, r);
                origin.swap(p, r);
            }
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for x in m.row_mut(r) {
                *x = f.mul(*x, inv);
            }
            let pivot_row = m.row(r).to_vec();
            for i in 0..self.rows {
                if i != r {
                    let factor = m.get(i, c);
                    if factor != 0 {
                        axpy(f, m.row_mut(i), &pivot_row, f.neg(factor));
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { reduced: m, pivots, origin }
    }

    /// Basis of the right null space `{x : self * x = 0}`, one vector per free
    /// column in increasing column order. Each basis vector has a 1 at its
    /// free column and zeros at the other free columns.
    pub fn nullspace(&self) -> NullSpace {
        let ech = self.rref();
        let pivot_set: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &ech.pivots {
                v[p] = true;
            }
            v
        };
        let free: Vec<usize> = (0..self.cols).filter(|&c| !pivot_set[c]).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![0; self.cols];
            v[fc] = 1;
            for (i, &pc) in ech.pivots.iter().enumerate() {
                v[pc] = self.field.neg(ech.reduced.get(i, fc));
            }
            basis.push(v);
        }
        NullSpace { basis, free_columns: free }
    }

    /// Indices of a maximal linearly independent subset of rows, chosen
    /// greedily in row order.
    pub fn independent_rows(&self) -> Vec<usize> {
        let mut acc = IncrementalBasis::new(&self.field, self.cols);
        (0..self.rows).filter(|&i| acc.insert(self.row(i))).collect()
    }
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let cols = m.cols;
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let (first, second) = m.data.split_at_mut(hi * cols);
    first[lo * cols..(lo + 1) * cols].swap_with_slice(&mut second[..cols]);
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub x: T,
    pub unique: bool,
}

#[derive(Debug, Clone)]
pub struct NullSpace {
    pub basis: Vec<Vec<Symbol>>,
    pub free_columns: Vec<usize>,
}

/// Coefficients `c` with `sum c[i] * generators[i] = target`, or `None`.
pub fn in_span<G: AsRef<[Symbol]>>(field: &FieldSpec, target: &[Symbol], generators: &[G]) -> Option<Vec<Symbol>> {
    if generators.is_empty() {
        return target.iter().all(|&x| x == 0).then(Vec::new);
    }
    let g = Matrix::from_rows(field, generators).ok()?;
    if g.cols != target.len() {
        return None;
    }
    g.transpose().solve(target).ok().map(|s| s.x)
}

/// Expresses every row of `targets` as a combination of the rows of
/// `generators`. Returns the coefficient matrix `C` with `C * generators =
/// targets`, or the index of the first target outside the row span.
pub fn express_rows(generators: &Matrix, targets: &Matrix) -> Result<Matrix, usize> {
    let sol = generators.transpose().solve_matrix(&targets.transpose()).map_err(|e| match e {
        LinalgError::NoSolution { .. } => first_outside(generators, targets),
        _ => 0,
    })?;
    Ok(sol.x.transpose())
}

fn first_outside(generators: &Matrix, targets: &Matrix) -> usize {
    let base = generators.rank();
    (0..targets.rows)
        .find(|&i| {
            let mut m = generators.clone();
            m.push_row(targets.row(i)).expect("same width");
            m.rank() > base
        })
        .unwrap_or(0)
}

/// Row-echelon basis that grows one vector at a time; used for greedy
/// independence filtering and incremental rank tracking.
#[derive(Debug, Clone)]
pub struct IncrementalBasis {
    field: FieldSpec,
    width: usize,
    // Each stored row is normalized with a leading 1 at `leads[i]`.
    rows: Vec<Vec<Symbol>>,
    leads: Vec<usize>,
}

impl IncrementalBasis {
    pub fn new(field: &FieldSpec, width: usize) -> Self {
        IncrementalBasis { field: field.clone(), width, rows: Vec::new(), leads: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    fn reduce(&self, v: &[Symbol]) -> Vec<Symbol> {
        let mut w = v.to_vec();
        for (row, &lead) in self.rows.iter().zip(&self.leads) {
            let c = w[lead];
            if c != 0 {
                axpy(&self.field, &mut w, row, self.field.neg(c));
            }
        }
        w
    }

    pub fn contains(&self, v: &[Symbol]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Adds `v` if it is independent of the current rows; returns whether it was added.
    pub fn insert(&mut self, v: &[Symbol]) -> bool {
        assert_eq!(v.len(), self.width, "vector width");
        let mut w = self.reduce(v);
        let Some(lead) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = self.field.inv(w[lead]).expect("nonzero");
        for x in w.iter_mut() {
            *x = self.field.mul(*x, inv);
        }
        self.rows.push(w);
        self.leads.push(lead);
        true
    }
}
