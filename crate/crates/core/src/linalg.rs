//! Dense exact linear algebra over cyclotomic scalars.
//!
//! Everything downstream (fiber quotients, kernels of raising operators,
//! window closures) is small and exact, so plain Gaussian elimination
//! with exact division does the job.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cyclotomic::Cyclotomic;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Cyclotomic>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Cyclotomic::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Cyclotomic::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cyclotomic) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Cyclotomic>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Standard basis matrix `E_ij` (zero-based).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.set(i, j, Cyclotomic::one());
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Cyclotomic {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cyclotomic) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Cyclotomic] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Cyclotomic::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Cyclotomic::neg).collect(),
        }
    }

    pub fn scale(&self, s: &Cyclotomic) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.mul(s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Cyclotomic]) -> Vec<Cyclotomic> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Cyclotomic::zero();
                for (j, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        let a = self.get(i, j);
                        if !a.is_zero() {
                            acc = acc.add(&a.mul(x));
                        }
                    }
                }
                acc
            })
            .collect()
    }

    pub fn trace(&self) -> Cyclotomic {
        assert_eq!(self.rows, self.cols);
        let mut acc = Cyclotomic::zero();
        for i in 0..self.rows {
            acc = acc.add(self.get(i, i));
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * other.rows + k, j * other.cols + l, a.mul(b));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::identity(self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = self.get(row, col).inv().expect("nonzero pivot");
            for j in col..self.cols {
                let v = self.get(row, j).mul(&inv);
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r != row && !self.get(r, col).is_zero() {
                    let f = self.get(r, col).clone();
                    for j in col..self.cols {
                        let v = self.get(r, j).sub(&f.mul(self.get(row, j)));
                        self.set(r, j, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right kernel `{x : self * x = 0}`.
    pub fn kernel_basis(&self) -> Vec<Vec<Cyclotomic>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_rows: Vec<(usize, usize)> =
            pivots.iter().enumerate().map(|(r, &c)| (r, c)).collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![Cyclotomic::zero(); self.cols];
                v[fc] = Cyclotomic::one();
                for &(r, c) in &pivot_rows {
                    v[c] = m.get(r, fc).neg();
                }
                v
            })
            .collect()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// JSON form: nested arrays of scalars.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<Cyclotomic>>);

impl Matrix {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson((0..self.rows).map(|i| self.row(i).to_vec()).collect())
    }

    pub fn from_json(json: &MatrixJson) -> Self {
        Matrix::from_rows(json.0.clone())
    }
}

/// Incrementally built row space in echelon form, for closures and rank
/// tracking.
#[derive(Debug, Clone, Default)]
pub struct Span {
    rows: Vec<Vec<Cyclotomic>>, // echelon, monic leading entries
    leads: Vec<usize>,
}

impl Span {
    pub fn new() -> Self {
        Span::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<Cyclotomic>] {
        &self.rows
    }

    /// Reduces `v` against the span; inserts the residue if nonzero.
    /// Returns true when the span grew.
    pub fn insert(&mut self, mut v: Vec<Cyclotomic>) -> bool {
        loop {
            let Some(lead) = v.iter().position(|c| !c.is_zero()) else {
                return false;
            };
            match self.leads.iter().position(|&l| l == lead) {
                Some(k) => {
                    let f = v[lead].clone();
                    let row = self.rows[k].clone();
                    for (slot, r) in v.iter_mut().zip(&row) {
                        *slot = slot.sub(&f.mul(r));
                    }
                }
                None => {
                    let inv = v[lead].inv().expect("nonzero lead");
                    for slot in v.iter_mut() {
                        *slot = slot.mul(&inv);
                    }
                    // keep echelon order by leading column
                    let at = self.leads.iter().position(|&l| l > lead).unwrap_or(self.leads.len());
                    self.leads.insert(at, lead);
                    self.rows.insert(at, v);
                    return true;
                }
            }
        }
    }

    pub fn contains(&self, v: &[Cyclotomic]) -> bool {
        let mut probe = self.clone();
        !probe.insert(v.to_vec())
    }
}

/// Coordinates of vectors in the column span of a fixed basis matrix.
pub struct ColumnSolver {
    basis: Matrix,
    reduced: Matrix,   // rref of [basis | I]
    pivots: Vec<usize>,
}

impl ColumnSolver {
    /// `basis` columns must be linearly independent.
    pub fn new(basis: Matrix) -> Self {
        let n = basis.nrows();
        let k = basis.ncols();
        let mut aug = Matrix::zeros(n, k + n);
        for i in 0..n {
            for j in 0..k {
                aug.set(i, j, basis.get(i, j).clone());
            }
            aug.set(i, k + i, Cyclotomic::one());
        }
        let pivots: Vec<usize> = aug.rref().into_iter().filter(|&c| c < k).collect();
        assert_eq!(pivots.len(), k, "basis columns must be independent");
        ColumnSolver { basis, reduced: aug, pivots }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Solves `basis * x = v`; `None` if `v` is outside the span.
    pub fn solve(&self, v: &[Cyclotomic]) -> Option<Vec<Cyclotomic>> {
        let n = self.basis.nrows();
        let k = self.basis.ncols();
        assert_eq!(v.len(), n);
        // The recorded row operations act on v through the identity block.
        let mut coords = vec![Cyclotomic::zero(); k];
        for (row, &col) in self.pivots.iter().enumerate() {
            let mut acc = Cyclotomic::zero();
            for (j, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    let t = self.reduced.get(row, k + j);
                    if !t.is_zero() {
                        acc = acc.add(&t.mul(x));
                    }
                }
            }
            coords[col] = acc;
        }
        // Residue check: rows of the transform beyond the rank must
        // annihilate v.
        let back = self.basis.mul_vec(&coords);
        if back.iter().zip(v).all(|(a, b)| a == b) {
            Some(coords)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::Cyclotomic as C;

    fn ci(k: i64) -> C {
        C::from_integer(k)
    }

    fn m2(a: i64, b: i64, c: i64, d: i64) -> Matrix {
        Matrix::from_rows(vec![vec![ci(a), ci(b)], vec![ci(c), ci(d)]])
    }

    #[test]
    fn product_and_trace() {
        let a = m2(1, 2, 3, 4);
        let b = m2(0, 1, 1, 0);
        assert_eq!(a.mul(&b), m2(2, 1, 4, 3));
        assert_eq!(a.trace(), ci(5));
    }

    #[test]
    fn kron_shapes() {
        let a = m2(1, 0, 0, -1);
        let b = Matrix::identity(2);
        let k = a.kron(&b);
        assert_eq!(k.nrows(), 4);
        assert_eq!(*k.get(0, 0), ci(1));
        assert_eq!(*k.get(3, 3), ci(-1));
        assert_eq!(*k.get(2, 2), ci(-1));
    }

    #[test]
    fn rank_and_kernel() {
        let a = m2(1, 2, 2, 4);
        assert_eq!(a.rank(), 1);
        let k = a.kernel_basis();
        assert_eq!(k.len(), 1);
        assert!(a.mul_vec(&k[0]).iter().all(C::is_zero));
    }

    #[test]
    fn nilpotent_power() {
        let e = Matrix::unit(2, 0, 1);
        assert!(e.pow(2).is_zero());
        assert!(!e.pow(1).is_zero());
    }

    #[test]
    fn span_grows_and_reduces() {
        let mut s = Span::new();
        assert!(s.insert(vec![ci(0), ci(2), ci(4)]));
        assert!(s.insert(vec![ci(1), ci(1), ci(1)]));
        assert!(!s.insert(vec![ci(2), ci(4), ci(6)]));
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&[ci(1), ci(3), ci(5)]));
        assert!(!s.contains(&[ci(0), ci(0), ci(1)]));
    }

    #[test]
    fn column_solver_round_trip() {
        let basis = Matrix::from_rows(vec![
            vec![ci(1), ci(1)],
            vec![ci(0), ci(2)],
            vec![ci(1), ci(0)],
        ]);
        let solver = ColumnSolver::new(basis.clone());
        let v = basis.mul_vec(&[ci(3), ci(-2)]);
        assert_eq!(solver.solve(&v), Some(vec![ci(3), ci(-2)]));
        assert_eq!(solver.solve(&[ci(0), ci(0), ci(1)]), None);
    }
}
