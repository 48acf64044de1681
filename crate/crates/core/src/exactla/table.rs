//! Exact rational tables over cells and marginal cell sets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FactorSet, HierarchicalModel};
use crate::perm::CellPermutation;

pub type Rational = BigRational;

/// A table `x(i)` over every cell of a model, in `cell_index` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellTable {
    levels: Vec<usize>,
    values: Vec<Rational>,
}

/// A function on the marginal cell set `I_D`, in mixed-radix order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginalTable {
    pub support: FactorSet,
    pub values: Vec<Rational>,
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl CellTable {
    pub fn zeros(model: &HierarchicalModel) -> Self {
        CellTable { levels: model.levels().to_vec(), values: vec![Rational::zero(); model.num_cells()] }
    }

    pub fn from_values(model: &HierarchicalModel, values: Vec<Rational>) -> Result<Self> {
        if values.len() != model.num_cells() {
            return Err(Error::DimensionMismatch { expected: model.num_cells(), got: values.len() });
        }
        Ok(CellTable { levels: model.levels().to_vec(), values })
    }

    pub fn from_ints(model: &HierarchicalModel, values: &[i64]) -> Result<Self> {
        Self::from_values(model, values.iter().map(|&v| int(v)).collect())
    }

    pub fn from_bigints(model: &HierarchicalModel, values: &[BigInt]) -> Result<Self> {
        Self::from_values(model, values.iter().cloned().map(Rational::from_integer).collect())
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    fn check(&self, model: &HierarchicalModel) -> Result<()> {
        if self.levels != model.levels() {
            return Err(Error::DimensionMismatch { expected: model.num_cells(), got: self.len() });
        }
        Ok(())
    }

    fn zip_with(&self, other: &CellTable, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<CellTable> {
        if self.levels != other.levels {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(CellTable {
            levels: self.levels.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &CellTable) -> Result<CellTable> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CellTable) -> Result<CellTable> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Rational) -> CellTable {
        CellTable { levels: self.levels.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Standard inner product.
    pub fn dot(&self, other: &CellTable) -> Result<Rational> {
        if self.levels != other.levels {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    /// Least common multiple of the denominators times the table, as integers.
    pub fn to_integer_vector(&self) -> Vec<BigInt> {
        scale_to_integers(&self.values)
    }

    pub fn to_file(&self, name: Option<&str>) -> TableFile {
        TableFile { model: name.map(str::to_owned), values: self.values.iter().map(RationalValue::from).collect() }
    }
}

/// Clears denominators of a rational vector.
pub fn scale_to_integers(values: &[Rational]) -> Vec<BigInt> {
    let lcm = values.iter().fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    values.iter().map(|v| v.numer() * (&lcm / v.denom())).collect()
}

/// `x^+(i_D)`: sums of `x` over the fibres of the projection onto `D`.
pub fn marginal(model: &HierarchicalModel, x: &CellTable, d: FactorSet) -> Result<MarginalTable> {
    x.check(model)?;
    let mut values = vec![Rational::zero(); model.marginal_size(d)];
    for (k, r) in model.marginal_indices(d).into_iter().enumerate() {
        values[r] += &x.values[k];
    }
    Ok(MarginalTable { support: d, values })
}

/// Extends `theta` on `I_D` to a table on `I` by `x(i) = theta(i_D)`.
pub fn lift(model: &HierarchicalModel, theta: &MarginalTable) -> Result<CellTable> {
    let d = theta.support;
    if !d.is_subset(model.all_factors()) {
        return Err(Error::Validation(format!("support {d} is not a set of model factors")));
    }
    if theta.values.len() != model.marginal_size(d) {
        return Err(Error::DimensionMismatch { expected: model.marginal_size(d), got: theta.values.len() });
    }
    let values = model.marginal_indices(d).into_iter().map(|r| theta.values[r].clone()).collect();
    CellTable::from_values(model, values)
}

/// `∂_E x`, the composite of `(∂_j x)(i) = x(i) - x(i with i_j = 1)` over `j ∈ E`.
pub fn partial_difference(model: &HierarchicalModel, x: &CellTable, e: FactorSet) -> Result<CellTable> {
    x.check(model)?;
    let mut cur = x.values.clone();
    let levels = model.levels();
    for j in e.iter() {
        let stride: usize = levels[j + 1..].iter().product();
        let block = stride * levels[j];
        let next: Vec<Rational> = (0..cur.len())
            .map(|k| {
                let base = k - (k % block) + (k % stride);
                &cur[k] - &cur[base]
            })
            .collect();
        cur = next;
    }
    CellTable::from_values(model, cur)
}

/// Orthogonal projection onto the incremental subspace `N_E`:
/// `(π x)(i) = Σ_{F⊆E} (-1)^{|E∖F|} x^+(i_F) / |I_{F^C}|`.
pub fn project_increment(model: &HierarchicalModel, x: &CellTable, e: FactorSet) -> Result<CellTable> {
    x.check(model)?;
    let m = model.num_factors();
    let mut out = vec![Rational::zero(); model.num_cells()];
    for f in e.subsets() {
        let marg = marginal(model, x, f)?;
        let mut coef = Rational::new(BigInt::one(), BigInt::from(model.marginal_size(f.complement(m))));
        if (e.len() - f.len()) % 2 == 1 {
            coef = -coef;
        }
        let scaled: Vec<Rational> = marg.values.iter().map(|v| v * &coef).collect();
        for (k, r) in model.marginal_indices(f).into_iter().enumerate() {
            out[k] += &scaled[r];
        }
    }
    CellTable::from_values(model, out)
}

/// Orthogonal projection onto `L_E`: the fibre means over `I_E`, lifted back.
pub fn project_marginal_space(model: &HierarchicalModel, x: &CellTable, e: FactorSet) -> Result<CellTable> {
    let marg = marginal(model, x, e)?;
    let n = Rational::from_integer(BigInt::from(model.marginal_size(e.complement(model.num_factors()))));
    let means = MarginalTable { support: e, values: marg.values.iter().map(|v| v / &n).collect() };
    lift(model, &means)
}

/// `(g y)(i) = y(g^{-1}(i))`: the entry at cell `k` moves to cell `g(k)`.
pub fn apply_permutation(g: &CellPermutation, x: &CellTable) -> Result<CellTable> {
    if g.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: g.len() });
    }
    let mut values = vec![Rational::zero(); x.len()];
    for (k, v) in x.values.iter().enumerate() {
        values[g.apply(k)] = v.clone();
    }
    Ok(CellTable { levels: x.levels.clone(), values })
}

/// A rational in a table file: a JSON integer, or a string `"n"` / `"p/q"` in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalValue {
    Int(i64),
    Text(String),
}

impl From<&Rational> for RationalValue {
    fn from(v: &Rational) -> Self {
        if v.is_integer() {
            match i64::try_from(v.numer()) {
                Ok(i) => RationalValue::Int(i),
                Err(_) => RationalValue::Text(v.numer().to_string()),
            }
        } else {
            RationalValue::Text(format!("{}/{}", v.numer(), v.denom()))
        }
    }
}

impl RationalValue {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            RationalValue::Int(i) => Ok(int(*i)),
            RationalValue::Text(s) => parse_rational(s),
        }
    }
}

/// Parses `"n"` or `"p/q"`; the fraction must be in lowest terms with `q > 0`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        None => Ok(Rational::from_integer(s.trim().parse::<BigInt>().map_err(|_| bad())?)),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if !d.is_positive() {
                return Err(bad());
            }
            let r = Rational::new(n.clone(), d.clone());
            if *r.numer() != n || *r.denom() != d {
                return Err(Error::Parse(format!("rational {s:?} is not in lowest terms")));
            }
            Ok(r)
        }
    }
}

/// On-disk table: `{"model": name?, "values": [...]}` in `cell_index` order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub values: Vec<RationalValue>,
}

pub fn parse_table(model: &HierarchicalModel, text: &str) -> Result<CellTable> {
    let file: TableFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let values = file.values.iter().map(RationalValue::to_rational).collect::<Result<Vec<_>>>()?;
    CellTable::from_values(model, values)
}
