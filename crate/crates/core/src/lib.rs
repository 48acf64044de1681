//! Groups of invariance of hierarchical log-linear models.
//!
//! For a hierarchical model over an `I_1 × … × I_m` contingency table this
//! crate builds the configuration matrix, the pseudofactor poset, and the
//! wreath product of symmetric groups indexed by that poset, then checks the
//! wreath product against the set-wise stabilizer of the kernel of the
//! configuration matrix. All arithmetic is exact.

pub mod analysis;
pub mod catalog;
pub mod error;
pub mod exactla;
pub mod generic;
pub mod model;
pub mod perm;
pub mod poset;
pub mod verify;
pub mod wreath;

pub use error::{Error, Result};
pub use model::{parse_model, project_cell, Cell, FactorSet, HierarchicalModel, MarginalCell};
pub use perm::{CellPermutation, LevelPermutation, Permutation};
