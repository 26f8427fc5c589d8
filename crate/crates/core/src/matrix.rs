//! Dense matrices over a prime field.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::galois::{Felt, FieldError, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatError {
    #[error("shape mismatch in {op}: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    Shape { op: &'static str, left_rows: usize, left_cols: usize, right_rows: usize, right_cols: usize },
    #[error("entry count {found} does not match shape {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, found: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A `rows x cols` matrix over GF(p), stored row-major with canonical entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Mat {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Matrix with a single one at `(row, col)`.
    pub fn unit(field: PrimeField, rows: usize, cols: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(field, rows, cols);
        m.data[row * cols + col] = 1;
        m
    }

    /// Builds from canonical row-major residues.
    pub fn from_canonical(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self, MatError> {
        if data.len() != rows * cols {
            return Err(MatError::EntryCount { rows, cols, found: data.len() });
        }
        if let Some(&bad) = data.iter().find(|&&v| v >= field.modulus()) {
            return Err(FieldError::NonCanonical { value: bad as u64, p: field.modulus() }.into());
        }
        Ok(Self { field, rows, cols, data })
    }

    /// Builds from arbitrary integers, reducing each entry.
    pub fn from_i64(field: PrimeField, rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must match shape");
        let data = entries.iter().map(|&v| field.reduce(v).value()).collect();
        Self { field, rows, cols, data }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major residues.
    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Felt {
        self.field.elem(self.entry(i, j) as u64)
    }

    /// Sets a raw residue; the value is reduced mod p.
    #[inline]
    pub fn set_raw(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.field.modulus();
    }

    pub fn set(&mut self, i: usize, j: usize, v: Felt) {
        assert_eq!(v.field(), self.field, "element from a different field");
        self.data[i * self.cols + j] = v.value();
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn check_field(&self, other: &Mat) -> Result<(), MatError> {
        if self.field != other.field {
            return Err(FieldError::FieldMismatch { left: self.field.modulus(), right: other.field.modulus() }.into());
        }
        Ok(())
    }

    fn shape_err(&self, op: &'static str, other: &Mat) -> MatError {
        MatError::Shape {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat, MatError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(self.shape_err("matmul", other));
        }
        let p = self.field.modulus() as u64;
        let mut out = Mat::zeros(self.field, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(other.row(k)) {
                    // a, b < 2^31, so a*b < 2^62 and one pending product fits.
                    *slot = (*slot + a as u64 * b as u64) % p;
                }
            }
            for (dst, &v) in out.data[i * other.cols..(i + 1) * other.cols].iter_mut().zip(&acc) {
                *dst = v as u32;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Mat) -> Result<Mat, MatError> {
        self.check_field(other)?;
        if self.shape() != other.shape() {
            return Err(self.shape_err("add", other));
        }
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add_raw(a, b)).collect();
        Ok(Mat { field: f, rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat, MatError> {
        self.check_field(other)?;
        if self.shape() != other.shape() {
            return Err(self.shape_err("sub", other));
        }
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub_raw(a, b)).collect();
        Ok(Mat { field: f, rows: self.rows, cols: self.cols, data })
    }

    /// In-place `self += other`.
    pub fn add_assign(&mut self, other: &Mat) -> Result<(), MatError> {
        self.check_field(other)?;
        if self.shape() != other.shape() {
            return Err(self.shape_err("add_assign", other));
        }
        let f = self.field;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = f.add_raw(*a, b);
        }
        Ok(())
    }

    pub fn scale(&self, c: Felt) -> Mat {
        assert_eq!(c.field(), self.field, "scalar from a different field");
        let f = self.field;
        let data = self.data.iter().map(|&a| f.mul_raw(a, c.value())).collect();
        Mat { field: f, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn hstack(&self, other: &Mat) -> Result<Mat, MatError> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(self.shape_err("hstack", other));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Mat { field: self.field, rows: self.rows, cols, data })
    }

    pub fn vstack(&self, other: &Mat) -> Result<Mat, MatError> {
        self.check_field(other)?;
        if self.cols != other.cols {
            // A 0-row operand carries no entries; its column count is irrelevant.
            if self.rows == 0 {
                return Ok(other.clone());
            }
            if other.rows == 0 {
                return Ok(self.clone());
            }
            return Err(self.shape_err("vstack", other));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(Mat { field: self.field, rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Copy of the `rows x cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        let mut out = Mat::zeros(self.field, rows, cols);
        for i in 0..rows {
            let src = (r0 + i) * self.cols + c0;
            out.data[i * cols..(i + 1) * cols].copy_from_slice(&self.data[src..src + cols]);
        }
        out
    }

    /// Overwrites the block at `(r0, c0)` with `src`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Mat) {
        assert_eq!(src.field, self.field, "block from a different field");
        assert!(r0 + src.rows <= self.rows && c0 + src.cols <= self.cols, "block out of range");
        for i in 0..src.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + src.cols].copy_from_slice(src.row(i));
        }
    }

    /// `self[row] -= factor * self[pivot]`, touching columns `from..`.
    #[inline]
    fn eliminate_row(&mut self, row: usize, pivot: usize, factor: u32, from: usize) {
        let f = self.field;
        let cols = self.cols;
        let (dst, src) = if row < pivot {
            let (a, b) = self.data.split_at_mut(pivot * cols);
            (&mut a[row * cols..(row + 1) * cols], &b[..cols])
        } else {
            let (a, b) = self.data.split_at_mut(row * cols);
            (&mut b[..cols], &a[pivot * cols..(pivot + 1) * cols])
        };
        for (d, &s) in dst[from..].iter_mut().zip(&src[from..]) {
            if s != 0 {
                *d = f.sub_raw(*d, f.mul_raw(factor, s));
            }
        }
    }

    /// Gaussian elimination in place with first-nonzero pivoting, scanning
    /// columns left to right and only choosing pivots in columns `< limit`.
    /// Returns the pivot columns; row `i` holds the pivot for `pivots[i]`.
    fn eliminate(&mut self, limit: usize, reduced: bool) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..limit.min(self.cols) {
            if next == self.rows {
                break;
            }
            let Some(pr) = (next..self.rows).find(|&r| self.entry(r, col) != 0) else {
                continue;
            };
            if pr != next {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, next * self.cols + j);
                }
            }
            let inv = f.inv_raw(self.entry(next, col)).expect("pivot is nonzero");
            if inv != 1 {
                for v in &mut self.data[next * self.cols + col..(next + 1) * self.cols] {
                    *v = f.mul_raw(*v, inv);
                }
            }
            let start = if reduced { 0 } else { next + 1 };
            for r in start..self.rows {
                if r == next {
                    continue;
                }
                let factor = self.entry(r, col);
                if factor != 0 {
                    self.eliminate_row(r, next, factor, col);
                }
            }
            pivots.push(col);
            next += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        // Eliminate along the shorter dimension.
        let mut m = if self.rows > self.cols { self.transpose() } else { self.clone() };
        let cols = m.cols;
        m.eliminate(cols, false).len()
    }

    /// Reduced row-echelon form and its pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let cols = m.cols;
        let pivots = m.eliminate(cols, true);
        (m, pivots)
    }

    /// Finds `D` with `D * a = b`, or `None` when no such `D` exists.
    ///
    /// Solved as the transposed system `a^T D^T = b^T`; free variables are
    /// fixed to zero, so the result is deterministic.
    pub fn solve_right(a: &Mat, b: &Mat) -> Result<Option<Mat>, MatError> {
        a.check_field(b)?;
        if a.cols != b.cols {
            return Err(a.shape_err("solve_right", b));
        }
        let unknowns = a.rows;
        let rhs = b.rows;
        // Augmented [a^T | b^T], one row per column of a.
        let mut aug = a.transpose().hstack(&b.transpose())?;
        let pivots = aug.eliminate(unknowns, true);
        for r in pivots.len()..aug.rows {
            if aug.row(r)[unknowns..].iter().any(|&v| v != 0) {
                return Ok(None);
            }
        }
        // D^T has shape unknowns x rhs.
        let mut d = Mat::zeros(a.field, rhs, unknowns);
        for (r, &c) in pivots.iter().enumerate() {
            for k in 0..rhs {
                d.data[k * unknowns + c] = aug.entry(r, unknowns + k);
            }
        }
        Ok(Some(d))
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat<{}>{}x{} [", self.field, self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", v)?;
            }
        }
        write!(f, "]")
    }
}
