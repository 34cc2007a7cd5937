//! Column-major complex matrix used for subcarrier grids and range-Doppler
//! maps. Columns are contiguous so per-symbol DFTs run directly on slices.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Build from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut g = Self::zeros(rows, cols);
        for c in 0..cols {
            let col = g.col_mut(c);
            for (r, v) in col.iter_mut().enumerate() {
                *v = f(r, c);
            }
        }
        g
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[col * self.rows + row] = v;
    }

    #[inline]
    pub fn col(&self, col: usize) -> &[Complex64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, col: usize) -> &mut [Complex64] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn set_col(&mut self, col: usize, values: &[Complex64]) {
        self.col_mut(col).copy_from_slice(values);
    }

    /// Copy row `row` into `out` (length `cols`).
    pub fn row_copy(&self, row: usize, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.cols);
        for (c, v) in out.iter_mut().enumerate() {
            *v = self.data[c * self.rows + row];
        }
    }

    pub fn set_row(&mut self, row: usize, values: &[Complex64]) {
        debug_assert_eq!(values.len(), self.cols);
        for (c, v) in values.iter().enumerate() {
            self.data[c * self.rows + row] = *v;
        }
    }

    /// Flat view of all elements (column-major).
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Element-wise map into a new grid.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}
