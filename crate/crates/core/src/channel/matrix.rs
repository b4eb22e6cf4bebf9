use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape { rows, cols });
        }
        Ok(Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        Ok(m)
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
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: other.rows,
            });
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.cols,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Squared Frobenius distance to `other`.
    pub fn distance_sqr(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum())
    }

    /// Copy of the rows in `range`.
    pub fn row_block(&self, range: Range<usize>) -> Result<Self> {
        if range.end > self.rows || range.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: range.end,
            });
        }
        let data = self.data[range.start * self.cols..range.end * self.cols].to_vec();
        Ok(Self {
            rows: range.len(),
            cols: self.cols,
            data,
        })
    }

    /// Copy of the columns in `range`.
    pub fn col_block(&self, range: Range<usize>) -> Result<Self> {
        if range.end > self.cols || range.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: range.end,
            });
        }
        let cols = range.len();
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(&self.data[r * self.cols + range.start..r * self.cols + range.end]);
        }
        Ok(Self {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Horizontal concatenation `[a | b | ...]`; all parts share a row count.
    pub fn hconcat(parts: &[&ChannelMatrix]) -> Result<Self> {
        let first = parts.first().ok_or(Error::InvalidShape { rows: 0, cols: 0 })?;
        let rows = first.rows;
        if let Some(bad) = parts.iter().find(|m| m.rows != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                actual: bad.rows,
            });
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for m in parts {
                data.extend_from_slice(&m.data[r * m.cols..(r + 1) * m.cols]);
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Writes `self * x` into `out`.
    pub fn mul_vec_into(&self, x: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        if out.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: out.len(),
            });
        }
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            *o = row.iter().zip(x).map(|(h, v)| h * v).sum();
        }
        Ok(())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        self.mul_vec_into(x, &mut out)?;
        Ok(out)
    }

    /// `||self * x||^2` without allocating. `x.len()` must equal `cols`.
    #[inline]
    pub fn image_norm_sqr(&self, x: &[Complex64]) -> f64 {
        debug_assert_eq!(x.len(), self.cols);
        let mut acc = 0.0;
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let v: Complex64 = row.iter().zip(x).map(|(h, v)| h * v).sum();
            acc += v.norm_sqr();
        }
        acc
    }
}
