//! Exact linear algebra over cell tables: the configuration matrix,
//! marginals, ANOVA projections, difference operators and kernel/row-space bases.

mod elim;
mod matrix;
mod table;

pub use elim::{
    echelonize, intersection_dim, kernel_basis, member, rank, row_space_basis, stabilizes_kernel, Basis, Echelon,
    KernelCheck,
};
pub use matrix::{configuration_matrix, IntMatrix, MatrixEntry, MatrixFile};
pub use table::{
    apply_permutation, frac, int, lift, marginal, parse_rational, parse_table, partial_difference, project_increment,
    project_marginal_space, scale_to_integers, CellTable, MarginalTable, Rational, RationalValue, TableFile,
};
