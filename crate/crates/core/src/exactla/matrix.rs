use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::HierarchicalModel;

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: entries.len() });
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<BigInt>], cols: usize) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
        }
        Ok(IntMatrix { rows: rows.len(), cols, entries: rows.concat() })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        Self::from_rows(&big, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column_sum(&self, c: usize) -> BigInt {
        (0..self.rows).map(|r| self.get(r, c)).sum()
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out.entries[r * other.cols + c] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        out
    }

    /// Nonzero entries of each column as `(row, value)` lists.
    pub(crate) fn column_supports(&self) -> Vec<Vec<(usize, BigInt)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r).iter().enumerate() {
                if !v.is_zero() {
                    cols[c].push((r, v.clone()));
                }
            }
        }
        cols
    }

    pub fn to_file(&self) -> MatrixFile {
        MatrixFile {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| i64::try_from(v).map_or_else(|_| MatrixEntry::Text(v.to_string()), MatrixEntry::Int)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Int(i64),
    Text(String),
}

/// On-disk matrix: `{"rows", "cols", "entries"}` with entries row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<MatrixEntry>,
}

/// The `nu × p` 0/1 configuration matrix: the column of cell `i` stacks the
/// indicator vectors of the marginal cells `i_{D_k}`, facet blocks in facet order.
pub fn configuration_matrix(model: &HierarchicalModel) -> IntMatrix {
    let p = model.num_cells();
    let mut a = IntMatrix::zeros(model.nu(), p);
    let mut offset = 0;
    for &d in model.facets() {
        for (k, r) in model.marginal_indices(d).into_iter().enumerate() {
            a.set(offset + r, k, BigInt::one());
        }
        offset += model.marginal_size(d);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independence_2x2() {
        let m = HierarchicalModel::from_lists(&[2, 2], &[&[1], &[2]]).unwrap();
        let a = configuration_matrix(&m);
        assert_eq!((a.rows(), a.cols()), (4, 4));
        let cols: Vec<Vec<i64>> =
            (0..4).map(|c| (0..4).map(|r| i64::try_from(a.get(r, c)).unwrap()).collect()).collect();
        assert_eq!(cols, vec![vec![1, 0, 1, 0], vec![1, 0, 0, 1], vec![0, 1, 1, 0], vec![0, 1, 0, 1]]);
    }

    #[test]
    fn column_sums_equal_facet_count() {
        let m = HierarchicalModel::from_lists(&[2, 3], &[&[1], &[2]]).unwrap();
        let a = configuration_matrix(&m);
        assert_eq!((a.rows(), a.cols()), (5, 6));
        assert!((0..6).all(|c| a.column_sum(c) == BigInt::from(2)));
    }

    #[test]
    fn sudoku_row_sums() {
        let m = HierarchicalModel::from_lists(&[3, 3, 3, 3, 9], &[&[1, 2, 5], &[3, 4, 5], &[1, 3, 5], &[1, 2, 3, 4]])
            .unwrap();
        let a = configuration_matrix(&m);
        assert_eq!((a.rows(), a.cols()), (324, 729));
        // row sum of a facet block = |I_{D^C}|
        let mut offset = 0;
        for &d in m.facets() {
            let expect = BigInt::from(m.marginal_size(d.complement(5)));
            for r in offset..offset + m.marginal_size(d) {
                assert_eq!(a.row(r).iter().sum::<BigInt>(), expect);
            }
            offset += m.marginal_size(d);
        }
        assert!(a.entries().iter().all(|v| v.is_zero() || v.is_one()));
    }

    #[test]
    fn products() {
        let a = IntMatrix::from_i64_rows(&[vec![1, 2], vec![3, 4]]).unwrap();
        let b = a.mul(&IntMatrix::identity(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.transpose().get(0, 1), &BigInt::from(3));
        let v = a.mul_vec(&[BigInt::from(1), BigInt::from(-1)]).unwrap();
        assert_eq!(v, vec![BigInt::from(-1), BigInt::from(-1)]);
    }
}
