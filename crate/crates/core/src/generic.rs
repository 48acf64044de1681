//! Generic elements of the row space built from powers of a large base.
//!
//! `Y_l = (2b + j)^{l-1}` for `l = 1..n`. Any two distinct coefficient
//! vectors in `{-b..b}^n` give distinct sums `Σ c_l Y_l`, because the sum is
//! a balanced base-`(2b+j)` expansion with digits of magnitude below half the base.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactla::{self, lift, project_increment, CellTable, IntMatrix, MarginalTable, Rational};
use crate::model::{FactorSet, HierarchicalModel};

/// Guard for exhaustive injectivity checks.
pub const MAX_EXHAUSTIVE_VECTORS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationSeq {
    pub n: usize,
    pub b: u64,
    pub j: u64,
    pub values: Vec<BigInt>,
}

impl PerturbationSeq {
    pub fn base(&self) -> u64 {
        2 * self.b + self.j
    }
}

pub fn perturbation_sequence(n: usize, b: u64, j: u64) -> Result<PerturbationSeq> {
    if n == 0 || b == 0 {
        return Err(Error::Validation("n and b must be positive".into()));
    }
    if j == 0 || j > n as u64 {
        return Err(Error::Validation(format!("sequence selector j = {j} is outside 1..={n}")));
    }
    let base = BigInt::from(2 * b + j);
    let mut values = Vec::with_capacity(n);
    let mut cur = BigInt::one();
    for _ in 0..n {
        values.push(cur.clone());
        cur *= &base;
    }
    Ok(PerturbationSeq { n, b, j, values })
}

/// True iff all sums `Σ c_l values_l` with `c ∈ {-b..b}^n` are distinct.
pub fn sums_injective(values: &[BigInt], b: u64) -> Result<bool> {
    let width = 2 * b + 1;
    let count = (0..values.len()).try_fold(1u64, |acc, _| acc.checked_mul(width).filter(|&c| c <= MAX_EXHAUSTIVE_VECTORS));
    let Some(count) = count else {
        return Err(Error::TooLarge(format!(
            "(2b+1)^n exceeds {MAX_EXHAUSTIVE_VECTORS} coefficient vectors"
        )));
    };
    let b = b as i64;
    let mut seen = HashSet::with_capacity(count as usize);
    let mut coeffs = vec![-b; values.len()];
    loop {
        let sum: BigInt = coeffs.iter().zip(values).map(|(&c, y)| y * c).sum();
        if !seen.insert(sum) {
            return Ok(false);
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == coeffs.len() {
                return Ok(true);
            }
            if coeffs[pos] < b {
                coeffs[pos] += 1;
                break;
            }
            coeffs[pos] = -b;
            pos += 1;
        }
    }
}

pub fn injectivity_exhaustive(n: usize, b: u64, j: u64) -> Result<bool> {
    let seq = perturbation_sequence(n, b, j)?;
    sums_injective(&seq.values, b)
}

/// Exact rank of the `n × n` matrix whose rows are `Y^{(1)}, …, Y^{(n)}` for a fixed `b`.
pub fn sequences_rank(n: usize, b: u64) -> Result<usize> {
    let rows = (1..=n as u64)
        .map(|j| perturbation_sequence(n, b, j).map(|s| s.values))
        .collect::<Result<Vec<_>>>()?;
    Ok(exactla::rank(&IntMatrix::from_rows(&rows, n)?))
}

/// A generic table `x(i) = Σ_k θ_{D_k}(i_{D_k})`, with the `θ`s cut from one
/// perturbation sequence (`n = ν`, `b = p`) in facet order.
#[derive(Clone, Debug)]
pub struct GenericTable {
    pub sequence: PerturbationSeq,
    pub thetas: Vec<MarginalTable>,
    pub table: CellTable,
}

pub fn generic_element(model: &HierarchicalModel, j: u64) -> Result<GenericTable> {
    let sequence = perturbation_sequence(model.nu(), model.num_cells() as u64, j)?;
    let mut thetas = Vec::with_capacity(model.facets().len());
    let mut table = CellTable::zeros(model);
    let mut offset = 0;
    for &d in model.facets() {
        let size = model.marginal_size(d);
        let theta = MarginalTable {
            support: d,
            values: sequence.values[offset..offset + size].iter().cloned().map(Rational::from_integer).collect(),
        };
        offset += size;
        table = table.add(&lift(model, &theta)?)?;
        thetas.push(theta);
    }
    Ok(GenericTable { sequence, thetas, table })
}

/// Number of factors with exactly two levels.
pub fn two_level_factors(model: &HierarchicalModel) -> usize {
    model.levels().iter().filter(|&&l| l == 2).count()
}

fn require_level_condition(model: &HierarchicalModel) -> Result<()> {
    let twos = two_level_factors(model);
    if twos > 1 {
        return Err(Error::Precondition(format!(
            "{twos} factors have two levels; at most one is allowed"
        )));
    }
    Ok(())
}

/// Reads a table that depends only on `i_D` as a marginal table.
fn restrict(model: &HierarchicalModel, x: &CellTable, d: FactorSet) -> MarginalTable {
    let mut values = vec![None; model.marginal_size(d)];
    for (k, r) in model.marginal_indices(d).into_iter().enumerate() {
        values[r].get_or_insert_with(|| x.values()[k].clone());
    }
    MarginalTable { support: d, values: values.into_iter().map(|v| v.expect("every marginal cell is hit")).collect() }
}

/// `C(i_D, j_D) = |I_{D^C}| (-1)^{|D ∖ eq|} ∏_{j ∈ eq} (I_j - 1)` where
/// `eq = {j ∈ D : i_j = j_j}`.
pub fn projection_coefficient(model: &HierarchicalModel, d: FactorSet, i: &[usize], j: &[usize]) -> BigInt {
    let rest = BigInt::from(model.marginal_size(d.complement(model.num_factors())));
    let mut c = rest;
    for ((&a, &b), f) in i.iter().zip(j).zip(d.iter()) {
        if a == b {
            c *= model.levels()[f] - 1;
        } else {
            c = -c;
        }
    }
    c
}

/// `φ_D = π_{N_D} θ_D` for the generic `θ_D` of facet `D`, checked to take
/// `|I_D|` distinct values and to agree with the closed form `Σ_j C(i_D, j_D) θ_D(j_D) / |I|`.
pub fn distinct_projection(model: &HierarchicalModel, d: FactorSet) -> Result<MarginalTable> {
    require_level_condition(model)?;
    let k = model
        .facets()
        .iter()
        .position(|&f| f == d)
        .ok_or_else(|| Error::Validation(format!("{d} is not a facet")))?;
    let generic = generic_element(model, 1)?;
    let theta = &generic.thetas[k];
    let phi = restrict(model, &project_increment(model, &lift(model, theta)?, d)?, d);

    let size = model.marginal_size(d);
    let coords: Vec<Vec<usize>> = (0..size)
        .map(|r| {
            let mut out = vec![0; model.num_factors()];
            model.write_marginal(r, d, &mut out);
            d.iter().map(|f| out[f]).collect()
        })
        .collect();
    let p = Rational::from_integer(BigInt::from(model.num_cells()));
    for (r, ci) in coords.iter().enumerate() {
        let sum: Rational = coords
            .iter()
            .zip(&theta.values)
            .map(|(cj, t)| t * Rational::from_integer(projection_coefficient(model, d, ci, cj)))
            .sum();
        if sum / &p != phi.values[r] {
            return Err(Error::Defect(format!("closed-form projection disagrees at marginal cell {r} of {d}")));
        }
    }
    if !all_distinct(&phi.values) {
        return Err(Error::Defect(format!("projection onto N_{d} has repeated values")));
    }
    Ok(phi)
}

/// A table in `N_{[m]}` whose `p` entries are pairwise distinct, built by
/// projecting the generic element of the saturated model.
pub fn faithful_witness(model: &HierarchicalModel) -> Result<CellTable> {
    require_level_condition(model)?;
    let saturated = model.saturated();
    let generic = generic_element(&saturated, 1)?;
    let phi = project_increment(&saturated, &generic.table, saturated.all_factors())?;
    if !all_distinct(phi.values()) {
        return Err(Error::Defect("faithfulness witness has repeated entries".into()));
    }
    CellTable::from_values(model, phi.into_values())
}

pub fn all_distinct(values: &[Rational]) -> bool {
    let mut sorted: Vec<&Rational> = values.iter().collect();
    sorted.sort();
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// `Σ_l c_l Y_l`.
pub fn combination(values: &[BigInt], coeffs: &[i64]) -> BigInt {
    coeffs.iter().zip(values).fold(BigInt::zero(), |acc, (&c, y)| acc + y * c)
}
