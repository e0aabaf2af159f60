//! Row-major observation tables.
//!
//! A [`DataMatrix`] owns `n × d` values, one observation per row. Estimators
//! and the executor work on [`MatrixView`]s, which borrow a contiguous range
//! of rows without copying.

use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl DataMatrix {
    /// Builds a matrix from row-major values.
    pub fn new(values: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values do not fill a {rows}x{cols} matrix",
                values.len()
            )));
        }
        Ok(DataMatrix { values, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.concat(), rows.len(), cols)
    }

    pub fn from_column(values: Vec<f64>) -> Self {
        let rows = values.len();
        DataMatrix {
            values,
            rows,
            cols: 1,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn view(&self) -> MatrixView<'_> {
        MatrixView {
            values: &self.values,
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

/// Borrowed, read-only block of consecutive rows.
#[derive(Debug, Clone, Copy)]
pub struct MatrixView<'a> {
    values: &'a [f64],
    rows: usize,
    cols: usize,
}

impl<'a> MatrixView<'a> {
    pub fn new(values: &'a [f64], rows: usize, cols: usize) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values do not fill a {rows}x{cols} view",
                values.len()
            )));
        }
        Ok(MatrixView { values, rows, cols })
    }

    /// A single-column view over a sample.
    pub fn column_of(values: &'a [f64]) -> Self {
        MatrixView {
            values,
            rows: values.len(),
            cols: 1,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &'a [f64] {
        self.values
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &'a [f64]> + 'a {
        let (values, cols) = (self.values, self.cols);
        (0..self.rows).map(move |i| &values[i * cols..(i + 1) * cols])
    }

    /// Copies column `j` out.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    /// Sub-view over a half-open row range.
    pub fn slice_rows(&self, range: Range<usize>) -> MatrixView<'a> {
        assert!(range.end <= self.rows, "row range out of bounds");
        MatrixView {
            values: &self.values[range.start * self.cols..range.end * self.cols],
            rows: range.len(),
            cols: self.cols,
        }
    }

    pub fn to_owned(&self) -> DataMatrix {
        DataMatrix {
            values: self.values.to_vec(),
            rows: self.rows,
            cols: self.cols,
        }
    }
}

impl<'a> From<&'a DataMatrix> for MatrixView<'a> {
    fn from(m: &'a DataMatrix) -> Self {
        m.view()
    }
}
