//! Dense complex vectors and row-major matrices.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// A non-empty complex vector with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec(Vec<C64>);

impl CVec {
    /// Validates length and finiteness.
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return dim_err("vector length must be positive");
        }
        if let Some(i) = entries.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(entries))
    }

    /// Internal constructor for values produced by finite arithmetic on
    /// already-validated inputs.
    pub(crate) fn from_raw(entries: Vec<C64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "vector length must be positive");
        Self(vec![ZERO; len])
    }

    /// Standard basis vector `e_index`.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = ONE;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVec) -> C64 {
        inner(&self.0, &other.0)
    }

    pub fn scale(&self, alpha: C64) -> CVec {
        CVec(self.0.iter().map(|z| z * alpha).collect())
    }

    pub fn sub(&self, other: &CVec) -> CVec {
        CVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &CVec) -> CVec {
        CVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Index<usize> for CVec {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVec {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

/// A complex `rows × cols` matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return dim_err("matrix dimensions must be positive");
        }
        if data.len() != rows * cols {
            return dim_err(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            ));
        }
        if let Some(i) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self::from_raw(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_columns(columns: &[CVec]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return dim_err("at least one column required");
        };
        let rows = first.len();
        if columns.iter().any(|c| c.len() != rows) {
            return dim_err("columns have different lengths");
        }
        let cols = columns.len();
        let mut data = vec![ZERO; rows * cols];
        for (l, c) in columns.iter().enumerate() {
            for (i, z) in c.iter().enumerate() {
                data[i * cols + l] = *z;
            }
        }
        Ok(Self::from_raw(rows, cols, data))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, l: usize) -> CVec {
        CVec::from_raw((0..self.rows).map(|i| self[(i, l)]).collect())
    }

    pub fn frobenius_sqr(&self) -> f64 {
        norm_sqr(&self.data)
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sqr().sqrt()
    }

    /// Frobenius inner product `⟨self, other⟩_F = Σ conj(self_ij)·other_ij`.
    pub fn inner(&self, other: &CMat) -> C64 {
        inner(&self.data, &other.data)
    }

    pub fn scale(&self, alpha: C64) -> CMat {
        CMat::from_raw(self.rows, self.cols, self.data.iter().map(|z| z * alpha).collect())
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMat::from_raw(self.rows, self.cols, data)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matvec(&self, x: &CVec) -> Result<CVec> {
        if x.len() != self.cols {
            return dim_err(format!(
                "matvec: matrix has {} columns, vector has length {}",
                self.cols,
                x.len()
            ));
        }
        Ok(CVec::from_raw(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(x.iter())
                        .fold(ZERO, |acc, (a, b)| acc + a * b)
                })
                .collect(),
        ))
    }

    /// `Q·x` for `x` given by its support and values.
    pub fn matvec_sparse(&self, support: &[usize], values: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            *o = support
                .iter()
                .zip(values)
                .fold(ZERO, |acc, (&l, v)| acc + row[l] * v);
        }
        out
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// Standalone matrix-vector product.
pub fn matvec(q: &CMat, x: &CVec) -> Result<CVec> {
    q.matvec(x)
}
