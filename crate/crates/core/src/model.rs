//! Hierarchical model specifications: factors, levels, facets and cells.
//!
//! Factors are 0-based everywhere inside the crate. The model file uses
//! 1-based factor indices and 1-based levels; the conversion happens in
//! [`parse_model`] and [`HierarchicalModel::to_json`] only.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of factors (factor subsets are 64-bit masks).
pub const MAX_FACTORS: usize = 64;

/// A subset of the factor set `[m]`, stored as a bit mask (bit `j` = factor `j`, 0-based).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FactorSet(u64);

impl FactorSet {
    pub const EMPTY: FactorSet = FactorSet(0);

    pub fn from_bits(bits: u64) -> Self {
        FactorSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// All factors `0..m`.
    pub fn full(m: usize) -> Self {
        if m >= 64 {
            FactorSet(u64::MAX)
        } else {
            FactorSet((1u64 << m) - 1)
        }
    }

    pub fn singleton(j: usize) -> Self {
        FactorSet(1u64 << j)
    }

    pub fn from_factors<I: IntoIterator<Item = usize>>(factors: I) -> Self {
        FactorSet(factors.into_iter().fold(0u64, |acc, j| acc | (1u64 << j)))
    }

    pub fn contains(self, j: usize) -> bool {
        j < 64 && self.0 & (1u64 << j) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: FactorSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: FactorSet) -> Self {
        FactorSet(self.0 | other.0)
    }

    pub fn intersection(self, other: FactorSet) -> Self {
        FactorSet(self.0 & other.0)
    }

    pub fn difference(self, other: FactorSet) -> Self {
        FactorSet(self.0 & !other.0)
    }

    /// Complement within `[m]`.
    pub fn complement(self, m: usize) -> Self {
        FactorSet::full(m).difference(self)
    }

    /// Smallest member, if any.
    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(j)
            }
        })
    }

    /// Every subset of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = FactorSet> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full { None } else { Some((cur.wrapping_sub(full)) & full) };
            Some(FactorSet(cur))
        })
    }

    /// 1-based member list, as used in files and reports.
    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|j| j + 1).collect()
    }
}

impl fmt::Debug for FactorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Written 1-based in braces, e.g. `{1,3}`.
impl fmt::Display for FactorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, j) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        write!(f, "}}")
    }
}

/// Level counts `I_1..I_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSpec {
    levels: Vec<usize>,
}

impl LevelSpec {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Validation("a model needs at least one factor".into()));
        }
        if levels.len() > MAX_FACTORS {
            return Err(Error::Validation(format!(
                "at most {MAX_FACTORS} factors are supported, got {}",
                levels.len()
            )));
        }
        if let Some((j, &l)) = levels.iter().enumerate().find(|(_, &l)| l < 2) {
            return Err(Error::Validation(format!(
                "factor {} has {l} levels; every factor needs at least 2",
                j + 1
            )));
        }
        Ok(LevelSpec { levels })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.levels
    }

    pub fn num_factors(&self) -> usize {
        self.levels.len()
    }
}

/// Facets of the simplicial complex: a non-empty antichain of non-empty factor subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetSet {
    facets: Vec<FactorSet>,
}

impl FacetSet {
    /// Validates the antichain condition against `m` factors. Order is preserved.
    pub fn new(facets: Vec<FactorSet>, m: usize) -> Result<Self> {
        if facets.is_empty() {
            return Err(Error::Validation("a model needs at least one facet".into()));
        }
        let full = FactorSet::full(m);
        for (k, d) in facets.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::Validation(format!("facet #{} is empty", k + 1)));
            }
            if !d.is_subset(full) {
                return Err(Error::Validation(format!("facet #{} refers to a factor outside 1..={m}", k + 1)));
            }
        }
        for (a, da) in facets.iter().enumerate() {
            for (b, db) in facets.iter().enumerate() {
                if a == b {
                    continue;
                }
                if da == db {
                    return Err(Error::Validation(format!("duplicate facet {da}")));
                }
                if da.is_subset(*db) {
                    return Err(Error::Validation(format!(
                        "facets are not an antichain: {da} is contained in {db}"
                    )));
                }
            }
        }
        Ok(FacetSet { facets })
    }

    pub fn as_slice(&self) -> &[FactorSet] {
        &self.facets
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }
}

/// A 1-based cell `(i_1, ..., i_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell(pub Vec<usize>);

/// Restriction of a cell to a factor subset; coordinates in ascending factor order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarginalCell {
    pub support: FactorSet,
    pub coordinates: Vec<usize>,
}

/// A hierarchical log-linear model: levels plus the facets of its simplicial complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierarchicalModel {
    name: Option<String>,
    levels: LevelSpec,
    facets: FacetSet,
    num_cells: usize,
    nu: usize,
}

impl HierarchicalModel {
    pub fn new(levels: LevelSpec, facets: FacetSet) -> Result<Self> {
        let m = levels.num_factors();
        if let Some(d) = facets.as_slice().iter().find(|d| !d.is_subset(FactorSet::full(m))) {
            return Err(Error::Validation(format!("facet {d} refers to a factor outside 1..={m}")));
        }
        let num_cells = levels
            .as_slice()
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l))
            .ok_or_else(|| Error::Validation("number of cells overflows".into()))?;
        let mut model = HierarchicalModel { name: None, levels, facets, num_cells, nu: 0 };
        model.nu = model.facets.as_slice().iter().map(|&d| model.marginal_size(d)).sum();
        Ok(model)
    }

    /// Convenience constructor from 1-based facet lists, e.g. `&[&[1, 2], &[2, 3]]`.
    pub fn from_lists(levels: &[usize], facets: &[&[usize]]) -> Result<Self> {
        let levels = LevelSpec::new(levels.to_vec())?;
        let m = levels.num_factors();
        let sets = facets
            .iter()
            .map(|f| one_based_set(f, m))
            .collect::<Result<Vec<_>>>()?;
        HierarchicalModel::new(levels, FacetSet::new(sets, m)?)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn levels(&self) -> &[usize] {
        self.levels.as_slice()
    }

    pub fn num_factors(&self) -> usize {
        self.levels.num_factors()
    }

    pub fn facets(&self) -> &[FactorSet] {
        self.facets.as_slice()
    }

    /// `p = |I|`.
    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    /// `nu = sum_k |I_{D_k}|`, the number of rows of the configuration matrix.
    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn all_factors(&self) -> FactorSet {
        FactorSet::full(self.num_factors())
    }

    /// `|I_D|`.
    pub fn marginal_size(&self, d: FactorSet) -> usize {
        d.iter().map(|j| self.levels()[j]).product()
    }

    /// Index of a cell in mixed-radix order, last factor fastest.
    pub fn cell_index(&self, cell: &Cell) -> Result<usize> {
        if cell.0.len() != self.num_factors() {
            return Err(Error::Validation(format!(
                "cell has {} coordinates, model has {} factors",
                cell.0.len(),
                self.num_factors()
            )));
        }
        let mut k = 0;
        for (j, (&i, &l)) in cell.0.iter().zip(self.levels()).enumerate() {
            if i == 0 || i > l {
                return Err(Error::Validation(format!("level {i} of factor {} is outside 1..={l}", j + 1)));
            }
            k = k * l + (i - 1);
        }
        Ok(k)
    }

    /// Inverse of [`cell_index`](Self::cell_index).
    pub fn index_cell(&self, k: usize) -> Result<Cell> {
        if k >= self.num_cells {
            return Err(Error::Validation(format!("cell index {k} is outside 0..{}", self.num_cells)));
        }
        let mut coords = vec![0; self.num_factors()];
        self.decode_into(k, &mut coords);
        Ok(Cell(coords.into_iter().map(|c| c + 1).collect()))
    }

    /// Writes the 0-based coordinates of cell `k` into `out`.
    pub(crate) fn decode_into(&self, mut k: usize, out: &mut [usize]) {
        for j in (0..self.num_factors()).rev() {
            let l = self.levels()[j];
            out[j] = k % l;
            k /= l;
        }
    }

    /// Encodes 0-based coordinates of the factors in `d` (ascending) into the
    /// mixed-radix index of the marginal cell set `I_D`.
    pub(crate) fn marginal_index(&self, coords: &[usize], d: FactorSet) -> usize {
        d.iter().fold(0, |acc, j| acc * self.levels()[j] + coords[j])
    }

    /// For each cell index, its marginal index on `d`.
    pub(crate) fn marginal_indices(&self, d: FactorSet) -> Vec<usize> {
        let mut coords = vec![0; self.num_factors()];
        (0..self.num_cells)
            .map(|k| {
                self.decode_into(k, &mut coords);
                self.marginal_index(&coords, d)
            })
            .collect()
    }

    /// Writes the coordinates of marginal index `r` of `I_D` into `out` at the positions of `d`.
    pub(crate) fn write_marginal(&self, mut r: usize, d: FactorSet, out: &mut [usize]) {
        let members: Vec<usize> = d.iter().collect();
        for &j in members.iter().rev() {
            let l = self.levels()[j];
            out[j] = r % l;
            r /= l;
        }
    }

    /// Every simplex of the complex, `∅` included, ordered by (size, bits).
    pub fn all_simplices(&self) -> Vec<FactorSet> {
        let mut out: Vec<FactorSet> = self.facets().iter().flat_map(|d| d.subsets()).collect();
        out.sort_by_key(|s| (s.len(), s.bits()));
        out.dedup();
        out
    }

    pub fn is_simplex(&self, e: FactorSet) -> bool {
        self.facets().iter().any(|d| e.is_subset(*d))
    }

    /// The model with facet `d` removed.
    pub fn delete_facet(&self, d: FactorSet) -> Result<HierarchicalModel> {
        if !self.facets().contains(&d) {
            return Err(Error::Validation(format!("{d} is not a facet")));
        }
        if self.facets().len() == 1 {
            return Err(Error::Validation("cannot delete the only facet".into()));
        }
        let rest: Vec<FactorSet> = self.facets().iter().copied().filter(|f| *f != d).collect();
        let facets = FacetSet::new(rest, self.num_factors())?;
        let mut out = HierarchicalModel::new(self.levels.clone(), facets)?;
        out.name = self.name.clone();
        Ok(out)
    }

    /// The saturated model on the same levels (single facet `[m]`).
    pub fn saturated(&self) -> HierarchicalModel {
        let facets = FacetSet { facets: vec![self.all_factors()] };
        HierarchicalModel::new(self.levels.clone(), facets).expect("levels already validated")
    }

    pub fn to_file(&self) -> ModelFile {
        let mut facets: Vec<Vec<usize>> = self.facets().iter().map(|d| d.to_one_based()).collect();
        facets.sort();
        ModelFile { name: self.name.clone(), levels: self.levels().to_vec(), facets }
    }

    /// Canonical JSON: facets sorted lexicographically, members ascending.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("model file serializes")
    }
}

/// Restricts a cell to the factors in `d`.
pub fn project_cell(cell: &Cell, d: FactorSet) -> MarginalCell {
    MarginalCell {
        support: d,
        coordinates: d.iter().filter_map(|j| cell.0.get(j).copied()).collect(),
    }
}

fn one_based_set(members: &[usize], m: usize) -> Result<FactorSet> {
    if members.is_empty() {
        return Err(Error::Validation("empty facet".into()));
    }
    let mut set = FactorSet::EMPTY;
    for &j in members {
        if j == 0 || j > m {
            return Err(Error::Validation(format!("factor index {j} is outside 1..={m}")));
        }
        set = set.union(FactorSet::singleton(j - 1));
    }
    Ok(set)
}

/// On-disk model description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub levels: Vec<usize>,
    pub facets: Vec<Vec<usize>>,
}

/// Parses and validates a JSON model description.
///
/// Facets are normalized: members sorted, repeated members within a facet
/// merged, facets sorted lexicographically. A facet listed twice is an error.
pub fn parse_model(text: &str) -> Result<HierarchicalModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let levels = LevelSpec::new(file.levels)?;
    let m = levels.num_factors();
    let mut sets = file
        .facets
        .iter()
        .map(|f| one_based_set(f, m))
        .collect::<Result<Vec<_>>>()?;
    sets.sort_by_key(|s| s.to_one_based());
    let mut model = HierarchicalModel::new(levels, FacetSet::new(sets, m)?)?;
    model.name = file.name;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_counts() {
        let m = parse_model(r#"{"levels":[2,3],"facets":[[1],[2]]}"#).unwrap();
        assert_eq!((m.num_factors(), m.num_cells(), m.nu()), (2, 6, 5));
        let sudoku =
            parse_model(r#"{"levels":[3,3,3,3,9],"facets":[[1,2,5],[3,4,5],[1,3,5],[1,2,3,4]]}"#).unwrap();
        assert_eq!((sudoku.num_cells(), sudoku.nu()), (729, 324));
    }

    #[test]
    fn parse_errors() {
        let bad = [
            r#"{"levels":[2,3],"facets":[[1],[1,2]]}"#,
            r#"{"levels":[1,3],"facets":[[1],[2]]}"#,
            r#"{"levels":[2,3],"facets":[[]]}"#,
            r#"{"levels":[2,3],"facets":[[1],[1]]}"#,
            r#"{"levels":[2,3],"facets":[[3]]}"#,
            r#"{"levels":[2,3],"facets":[[0]]}"#,
            r#"{"levels":[2,3],"facets":[]}"#,
            r#"{"levels":[],"facets":[[1]]}"#,
            r#"{"levels":[2,3],"facets":[[1]"#,
            r#"{"levels":[2,3],"facets":[[1]],"extra":1}"#,
        ];
        for text in bad {
            assert!(parse_model(text).is_err(), "accepted {text}");
        }
        assert!(matches!(parse_model("nope"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_model(r#"{"levels":[2,3],"facets":[[1],[1,2]]}"#),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn parse_normalizes() {
        let m = parse_model(r#"{"name":"x","levels":[2,2,2],"facets":[[3,2],[1,2,2]]}"#).unwrap();
        assert_eq!(m.to_json(), r#"{"name":"x","levels":[2,2,2],"facets":[[1,2],[2,3]]}"#);
        assert_eq!(parse_model(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn radix_order() {
        let m = HierarchicalModel::from_lists(&[2, 3], &[&[1], &[2]]).unwrap();
        assert_eq!(m.cell_index(&Cell(vec![1, 1])).unwrap(), 0);
        assert_eq!(m.cell_index(&Cell(vec![2, 1])).unwrap(), 3);
        assert_eq!(m.index_cell(5).unwrap(), Cell(vec![2, 3]));
        assert!(m.index_cell(6).is_err());
        assert!(m.cell_index(&Cell(vec![3, 1])).is_err());
        assert!(m.cell_index(&Cell(vec![0, 1])).is_err());
        assert!(m.cell_index(&Cell(vec![1])).is_err());
    }

    #[test]
    fn projection() {
        let c = Cell(vec![2, 1, 3]);
        let d = FactorSet::from_factors([0, 2]);
        assert_eq!(project_cell(&c, d).coordinates, vec![2, 3]);
        assert!(project_cell(&c, FactorSet::EMPTY).coordinates.is_empty());
        assert_eq!(project_cell(&c, FactorSet::full(3)).coordinates, vec![2, 1, 3]);
    }

    #[test]
    fn simplices() {
        let m = HierarchicalModel::from_lists(&[2, 2, 2], &[&[1, 2], &[2, 3]]).unwrap();
        let got: Vec<Vec<usize>> = m.all_simplices().iter().map(|s| s.to_one_based()).collect();
        assert_eq!(got, vec![vec![], vec![1], vec![2], vec![3], vec![1, 2], vec![2, 3]]);
        let m = HierarchicalModel::from_lists(&[2, 2], &[&[1]]).unwrap();
        assert_eq!(m.all_simplices().len(), 2);
        let m = HierarchicalModel::from_lists(&[2, 2, 2], &[&[1, 2, 3]]).unwrap();
        assert_eq!(m.all_simplices().len(), 8);
    }

    #[test]
    fn deleting_facets() {
        let m = HierarchicalModel::from_lists(&[2, 2, 2], &[&[1, 2], &[2, 3]]).unwrap();
        let d = m.delete_facet(FactorSet::from_factors([0, 1])).unwrap();
        assert_eq!(d.facets(), &[FactorSet::from_factors([1, 2])]);
        let m = HierarchicalModel::from_lists(&[2; 5], &[&[1, 3], &[2, 4], &[3, 4, 5]]).unwrap();
        let d = m.delete_facet(FactorSet::from_factors([2, 3, 4])).unwrap();
        assert_eq!(d.facets(), &[FactorSet::from_factors([0, 2]), FactorSet::from_factors([1, 3])]);
        let m = HierarchicalModel::from_lists(&[2], &[&[1]]).unwrap();
        assert!(m.delete_facet(FactorSet::singleton(0)).is_err());
        assert!(m.delete_facet(FactorSet::EMPTY).is_err());
    }

    #[test]
    fn subset_enumeration() {
        let s = FactorSet::from_factors([0, 2, 5]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|t| t.is_subset(s)));
        assert_eq!(FactorSet::EMPTY.subsets().count(), 1);
        assert_eq!(s.to_string(), "{1,3,6}");
    }
}
