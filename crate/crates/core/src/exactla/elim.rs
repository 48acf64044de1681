//! Fraction-free Gauss–Jordan elimination over the integers.
//!
//! Rows are combined as `row_i * (pivot / g) - pivot_row * (a / g)` with
//! `g = gcd(pivot, a)` and then divided by their content, so every
//! intermediate stays integral and primitive. Elimination first runs on
//! checked `i128`; on overflow it restarts on `BigInt`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::matrix::IntMatrix;
use super::table::{scale_to_integers, CellTable, Rational};
use crate::error::{Error, Result};
use crate::perm::CellPermutation;

mod fraction_free {
    use std::cmp::Ordering;

    use num_bigint::BigInt;
    use num_integer::Integer;

    pub(super) trait Scalar: Clone + PartialEq + std::fmt::Debug {
        fn zero() -> Self;
        fn is_zero(&self) -> bool;
        fn cmp_abs(&self, other: &Self) -> Ordering;
        fn gcd(&self, other: &Self) -> Self;
        fn div_exact(&self, other: &Self) -> Self;
        fn is_one(&self) -> bool;
        fn is_negative(&self) -> bool;
        fn neg(&self) -> Self;
        /// `a * b - c * d`
        fn mul_sub(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self>;
        fn checked_mul(&self, other: &Self) -> Option<Self>;
    }

    impl Scalar for i128 {
        fn zero() -> Self {
            0
        }
        fn is_zero(&self) -> bool {
            *self == 0
        }
        fn cmp_abs(&self, other: &Self) -> Ordering {
            self.unsigned_abs().cmp(&other.unsigned_abs())
        }
        fn gcd(&self, other: &Self) -> Self {
            Integer::gcd(self, other)
        }
        fn div_exact(&self, other: &Self) -> Self {
            self / other
        }
        fn is_one(&self) -> bool {
            *self == 1
        }
        fn is_negative(&self) -> bool {
            *self < 0
        }
        fn neg(&self) -> Self {
            -self
        }
        fn mul_sub(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
            i128::checked_mul(*a, *b)?.checked_sub(i128::checked_mul(*c, *d)?)
        }
        fn checked_mul(&self, other: &Self) -> Option<Self> {
            i128::checked_mul(*self, *other)
        }
    }

    impl Scalar for BigInt {
        fn zero() -> Self {
            num_traits::Zero::zero()
        }
        fn is_zero(&self) -> bool {
            num_traits::Zero::is_zero(self)
        }
        fn cmp_abs(&self, other: &Self) -> Ordering {
            self.magnitude().cmp(other.magnitude())
        }
        fn gcd(&self, other: &Self) -> Self {
            Integer::gcd(self, other)
        }
        fn div_exact(&self, other: &Self) -> Self {
            self / other
        }
        fn is_one(&self) -> bool {
            num_traits::One::is_one(self)
        }
        fn is_negative(&self) -> bool {
            num_traits::Signed::is_negative(self)
        }
        fn neg(&self) -> Self {
            -self
        }
        fn mul_sub(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
            Some(a * b - c * d)
        }
        fn checked_mul(&self, other: &Self) -> Option<Self> {
            Some(self * other)
        }
    }

    pub(super) fn divide_by_content<T: Scalar>(row: &mut [T]) {
        let mut g = T::zero();
        for v in row.iter().filter(|v| !v.is_zero()) {
            g = g.gcd(v);
            if g.is_one() {
                return;
            }
        }
        if g.is_zero() || g.is_one() {
            return;
        }
        for v in row.iter_mut() {
            if !v.is_zero() {
                *v = v.div_exact(&g);
            }
        }
    }

    pub(super) fn rref_generic<T: Scalar>(mut rows: Vec<Vec<T>>, cols: usize) -> Option<(Vec<Vec<T>>, Vec<usize>)> {
        rows.retain(|r| r.iter().any(|v| !v.is_zero()));
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows.len() {
                break;
            }
            let Some(best) = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&a, &b| rows[a][c].cmp_abs(&rows[b][c]))
            else {
                continue;
            };
            rows.swap(r, best);
            if rows[r][c].is_negative() {
                for v in rows[r].iter_mut() {
                    *v = v.neg();
                }
            }
            let (before, rest) = rows.split_at_mut(r);
            let (pivot_row, after) = rest.split_first_mut().expect("pivot row exists");
            let pivot = pivot_row[c].clone();
            for row in before.iter_mut().chain(after.iter_mut()) {
                if row[c].is_zero() {
                    continue;
                }
                let g = pivot.gcd(&row[c]);
                let mp = pivot.div_exact(&g);
                let ma = row[c].div_exact(&g);
                for (v, pv) in row.iter_mut().zip(pivot_row.iter()) {
                    if pv.is_zero() {
                        if !mp.is_one() && !v.is_zero() {
                            *v = v.checked_mul(&mp)?;
                        }
                    } else {
                        *v = T::mul_sub(v, &mp, pv, &ma)?;
                    }
                }
                divide_by_content(row);
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        Some((rows, pivots))
    }
}

use fraction_free::{divide_by_content, rref_generic};

/// Reduced row echelon form of an integer matrix, scaled row-wise to stay integral.
///
/// Row `i` has a nonzero entry at `pivots[i]` and every other row is zero in that column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    pub cols: usize,
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
}

fn to_small(rows: &[Vec<BigInt>]) -> Option<Vec<Vec<i128>>> {
    rows.iter().map(|r| r.iter().map(|v| v.to_i64().map(i128::from)).collect()).collect()
}

fn to_big(rows: Vec<Vec<i128>>) -> Vec<Vec<BigInt>> {
    rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect()
}

/// Reduced echelon form of the rows of an integer matrix.
pub fn echelonize(rows: &[Vec<BigInt>], cols: usize) -> Echelon {
    if let Some(small) = to_small(rows) {
        if let Some((out, pivots)) = rref_generic(small, cols) {
            return Echelon { cols, rows: to_big(out), pivots };
        }
    }
    let (out, pivots) = rref_generic(rows.to_vec(), cols).expect("BigInt elimination cannot overflow");
    Echelon { cols, rows: out, pivots }
}

/// Rank over `Q`.
pub fn rank(a: &IntMatrix) -> usize {
    echelonize(&a.row_vecs(), a.cols()).pivots.len()
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Integer basis of the solutions of `row · y = 0` for every row.
    pub fn null_space(&self) -> Vec<Vec<BigInt>> {
        let mut is_pivot = vec![false; self.cols];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let scale = self
                    .rows
                    .iter()
                    .zip(&self.pivots)
                    .filter(|(row, _)| !row[f].is_zero())
                    .fold(BigInt::one(), |acc, (row, &c)| acc.lcm(&row[c]));
                let mut v = vec![BigInt::zero(); self.cols];
                v[f] = scale.clone();
                for (row, &c) in self.rows.iter().zip(&self.pivots) {
                    if !row[f].is_zero() {
                        v[c] = -(&row[f] * (&scale / &row[c]));
                    }
                }
                divide_by_content(&mut v);
                v
            })
            .collect()
    }

    /// Reduces an integer vector against the echelon rows; zero iff it lies in their span.
    pub fn reduce(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut x = x.to_vec();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if x[c].is_zero() {
                continue;
            }
            let g = Integer::gcd(&row[c], &x[c]);
            let mp = &row[c] / &g;
            let ma = &x[c] / &g;
            for (v, rv) in x.iter_mut().zip(row) {
                if rv.is_zero() {
                    if !v.is_zero() {
                        *v *= &mp;
                    }
                } else {
                    *v = &*v * &mp - rv * &ma;
                }
            }
            divide_by_content(&mut x);
        }
        x
    }
}

/// A subspace of `Q^n` given by linearly independent integer vectors and
/// their echelon form.
#[derive(Clone, Debug)]
pub struct Basis {
    dim: usize,
    vectors: Vec<Vec<BigInt>>,
    echelon: Echelon,
}

impl Basis {
    /// Spans the given vectors; dependent vectors are dropped.
    pub fn span(vectors: &[Vec<BigInt>], dim: usize) -> Result<Basis> {
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        let echelon = echelonize(vectors, dim);
        Ok(Basis { dim, vectors: echelon.rows.clone(), echelon })
    }

    fn from_independent(vectors: Vec<Vec<BigInt>>, dim: usize) -> Basis {
        let echelon = echelonize(&vectors, dim);
        debug_assert_eq!(echelon.rank(), vectors.len());
        Basis { dim, vectors, echelon }
    }

    /// Ambient dimension.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the subspace.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<BigInt>] {
        &self.vectors
    }

    pub fn echelon(&self) -> &Echelon {
        &self.echelon
    }

    pub fn contains_integers(&self, x: &[BigInt]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.echelon.reduce(x).iter().all(Zero::is_zero))
    }

    pub fn contains_rationals(&self, x: &[Rational]) -> Result<bool> {
        self.contains_integers(&scale_to_integers(x))
    }
}

/// Basis of `{y : A y = 0}` with integer entries.
pub fn kernel_basis(a: &IntMatrix) -> Basis {
    let ech = echelonize(&a.row_vecs(), a.cols());
    Basis::from_independent(ech.null_space(), a.cols())
}

/// Basis of the row space of `A`.
pub fn row_space_basis(a: &IntMatrix) -> Basis {
    let echelon = echelonize(&a.row_vecs(), a.cols());
    Basis { dim: a.cols(), vectors: echelon.rows.clone(), echelon }
}

/// True iff `x` lies in the span of `basis`.
pub fn member(basis: &Basis, x: &CellTable) -> Result<bool> {
    basis.contains_rationals(x.values())
}

/// Dimension of the intersection of two subspaces.
pub fn intersection_dim(a: &Basis, b: &Basis) -> Result<usize> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: a.ambient_dim(), got: b.ambient_dim() });
    }
    let mut all = a.vectors().to_vec();
    all.extend_from_slice(b.vectors());
    let sum = echelonize(&all, a.ambient_dim()).rank();
    Ok(a.len() + b.len() - sum)
}

/// True iff `g` maps `ker A` into itself, checked as `A (g v) = 0` for every basis vector `v`.
pub fn stabilizes_kernel(a: &IntMatrix, kb: &Basis, g: &CellPermutation) -> Result<bool> {
    KernelCheck::new(a, kb)?.stabilized_by(g)
}

/// Precomputed data for repeated [`stabilizes_kernel`] queries against one matrix.
pub struct KernelCheck {
    rows: usize,
    cols: usize,
    support: Vec<Vec<(usize, i128)>>,
    vectors: Vec<Vec<(usize, i128)>>,
    big: Option<(Vec<Vec<(usize, BigInt)>>, Vec<Vec<(usize, BigInt)>>)>,
}

impl KernelCheck {
    pub fn new(a: &IntMatrix, kb: &Basis) -> Result<Self> {
        if kb.ambient_dim() != a.cols() {
            return Err(Error::DimensionMismatch { expected: a.cols(), got: kb.ambient_dim() });
        }
        let big_support = a.column_supports();
        let big_vectors: Vec<Vec<(usize, BigInt)>> = kb
            .vectors()
            .iter()
            .map(|v| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(k, x)| (k, x.clone())).collect())
            .collect();
        let narrow = |list: &Vec<(usize, BigInt)>| -> Option<Vec<(usize, i128)>> {
            list.iter().map(|(k, x)| x.to_i64().map(|s| (*k, i128::from(s)))).collect()
        };
        let support: Option<Vec<_>> = big_support.iter().map(narrow).collect();
        let vectors: Option<Vec<_>> = big_vectors.iter().map(narrow).collect();
        Ok(match (support, vectors) {
            (Some(support), Some(vectors)) => {
                KernelCheck { rows: a.rows(), cols: a.cols(), support, vectors, big: None }
            }
            _ => KernelCheck {
                rows: a.rows(),
                cols: a.cols(),
                support: Vec::new(),
                vectors: Vec::new(),
                big: Some((big_support, big_vectors)),
            },
        })
    }

    pub fn stabilized_by(&self, g: &CellPermutation) -> Result<bool> {
        if g.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: g.len() });
        }
        // A (g v) = Σ_k v_k · column_{g(k)}
        if let Some((support, vectors)) = &self.big {
            let mut acc = vec![BigInt::zero(); self.rows];
            for v in vectors {
                acc.iter_mut().for_each(|a| a.set_zero());
                for (k, x) in v {
                    for (r, c) in &support[g.apply(*k)] {
                        acc[*r] += c * x;
                    }
                }
                if acc.iter().any(|a| !a.is_zero()) {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        let mut acc = vec![0i128; self.rows];
        for v in &self.vectors {
            acc.iter_mut().for_each(|a| *a = 0);
            for &(k, x) in v {
                for &(r, c) in &self.support[g.apply(k)] {
                    acc[r] = c
                        .checked_mul(x)
                        .and_then(|t| acc[r].checked_add(t))
                        .ok_or_else(|| Error::Defect("kernel check overflowed i128".into()))?;
                }
            }
            if acc.iter().any(|&a| a != 0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::configuration_matrix;
    use crate::model::HierarchicalModel;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(&IntMatrix::zeros(3, 4)), 0);
        assert_eq!(rank(&IntMatrix::identity(5)), 5);
        let m = HierarchicalModel::from_lists(&[2, 3], &[&[1], &[2]]).unwrap();
        assert_eq!(rank(&configuration_matrix(&m)), 4);
        let a = IntMatrix::from_i64_rows(&[vec![2, 4, 6], vec![3, 6, 9], vec![1, 0, 1]]).unwrap();
        assert_eq!(rank(&a), 2);
    }

    #[test]
    fn kernels() {
        let m = HierarchicalModel::from_lists(&[2, 2], &[&[1], &[2]]).unwrap();
        let a = configuration_matrix(&m);
        let kb = kernel_basis(&a);
        assert_eq!(kb.len(), 1);
        let v = &kb.vectors()[0];
        assert!(v == &big(&[1, -1, -1, 1]) || v == &big(&[-1, 1, 1, -1]));

        let sat = HierarchicalModel::from_lists(&[2, 3], &[&[1, 2]]).unwrap();
        assert!(kernel_basis(&configuration_matrix(&sat)).is_empty());

        let ind = HierarchicalModel::from_lists(&[2, 3], &[&[1], &[2]]).unwrap();
        let a = configuration_matrix(&ind);
        let kb = kernel_basis(&a);
        assert_eq!(kb.len(), 2);
        for v in kb.vectors() {
            assert!(a.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn kernel_of_overflowing_matrix() {
        let huge = i64::MAX / 3;
        let a = IntMatrix::from_i64_rows(&[vec![huge, huge - 1, 7], vec![huge - 5, 3, huge]]).unwrap();
        let kb = kernel_basis(&a);
        assert_eq!(kb.len(), 1);
        assert!(a.mul_vec(&kb.vectors()[0]).unwrap().iter().all(Zero::is_zero));
    }

    #[test]
    fn membership() {
        let m = HierarchicalModel::from_lists(&[2, 2], &[&[1], &[2]]).unwrap();
        let a = configuration_matrix(&m);
        let rows = row_space_basis(&a);
        assert_eq!(rows.len(), 3);
        assert!(member(&rows, &CellTable::zeros(&m)).unwrap());
        assert!(!member(&rows, &CellTable::from_ints(&m, &[1, -1, -1, 1]).unwrap()).unwrap());
        assert!(member(&rows, &CellTable::from_ints(&m, &[7, 7, 9, 9]).unwrap()).unwrap());
        assert!(member(&rows, &CellTable::from_ints(&m, &[1, 2, 3, 4]).unwrap()).unwrap());
        assert!(rows.contains_integers(&big(&[1, 2])).is_err());
    }

    #[test]
    fn stabilizer_checks() {
        let m = HierarchicalModel::from_lists(&[2, 2], &[&[1], &[2]]).unwrap();
        let a = configuration_matrix(&m);
        let kb = kernel_basis(&a);
        assert!(stabilizes_kernel(&a, &kb, &CellPermutation::identity(4)).unwrap());
        // (i, j) -> (j, i) swaps cells 1 and 2
        assert!(stabilizes_kernel(&a, &kb, &CellPermutation::transposition(4, 1, 2)).unwrap());

        let m = HierarchicalModel::from_lists(&[2, 3], &[&[1], &[2]]).unwrap();
        let a = configuration_matrix(&m);
        let kb = kernel_basis(&a);
        // (1,1) <-> (2,2) is cell 0 <-> cell 4
        assert!(!stabilizes_kernel(&a, &kb, &CellPermutation::transposition(6, 0, 4)).unwrap());
        assert!(stabilizes_kernel(&a, &kb, &CellPermutation::identity(5)).is_err());
    }

    #[test]
    fn intersections() {
        let a = Basis::span(&[big(&[1, 0, 0]), big(&[0, 1, 0])], 3).unwrap();
        let b = Basis::span(&[big(&[1, 1, 0]), big(&[0, 0, 1]), big(&[2, 2, 1])], 3).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(intersection_dim(&a, &b).unwrap(), 1);
    }
}
