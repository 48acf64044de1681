//! The wreath product of symmetric groups over the pseudofactor poset.
//!
//! An element `w` holds, for each class `ρ`, one permutation of the marginal
//! cell set `I_ρ` per marginal cell of the ancestor set `A(ρ)`. It acts on
//! cells by `(w i)_ρ = w_ρ(i_{A(ρ)}) i_ρ`, reading the ancestor coordinates
//! from the input cell.

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cell, FactorSet, HierarchicalModel};
use crate::perm::{lexicographic, CellPermutation, LevelPermutation, Permutation};
use crate::poset::{pseudofactor_poset, PseudofactorPoset};

#[derive(Clone, Debug)]
struct ClassTables {
    members: FactorSet,
    ancestors: FactorSet,
    size: usize,
    ancestor_size: usize,
    /// Per cell: index of `i_ρ` in `I_ρ`.
    own: Vec<usize>,
    /// Per cell: index of `i_{A(ρ)}` in `I_{A(ρ)}`.
    anc: Vec<usize>,
    /// Per cell: index of `i_{V(ρ)}` in `I_{V(ρ)}`.
    v: Vec<usize>,
    /// Contribution of `i_ρ = r` to the cell index.
    offset: Vec<usize>,
}

/// `W = ∏_ρ (S_{I_ρ})^{I_{A(ρ)}}` for one model.
#[derive(Clone, Debug)]
pub struct WreathGroup {
    model: HierarchicalModel,
    poset: PseudofactorPoset,
    topo: Vec<usize>,
    tables: Vec<ClassTables>,
}

/// One level permutation per (class, ancestor marginal cell).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WreathElement {
    components: Vec<Vec<LevelPermutation>>,
}

impl WreathElement {
    /// `components[class][ancestor index]`.
    pub fn components(&self) -> &[Vec<LevelPermutation>] {
        &self.components
    }

    pub fn is_identity(&self) -> bool {
        self.components.iter().flatten().all(Permutation::is_identity)
    }
}

impl WreathGroup {
    pub fn new(model: &HierarchicalModel) -> Self {
        let poset = pseudofactor_poset(model);
        let levels = model.levels();
        let m = model.num_factors();
        let strides: Vec<usize> = (0..m).map(|j| levels[j + 1..].iter().product()).collect();
        let tables = (0..poset.len())
            .map(|c| {
                let members = poset.members(c);
                let ancestors = poset.ancestors(c);
                let size = model.marginal_size(members);
                let mut coords = vec![0; m];
                let offset = (0..size)
                    .map(|r| {
                        model.write_marginal(r, members, &mut coords);
                        members.iter().map(|j| coords[j] * strides[j]).sum()
                    })
                    .collect();
                ClassTables {
                    members,
                    ancestors,
                    size,
                    ancestor_size: model.marginal_size(ancestors),
                    own: model.marginal_indices(members),
                    anc: model.marginal_indices(ancestors),
                    v: model.marginal_indices(poset.v(c)),
                    offset,
                }
            })
            .collect();
        let topo = poset.topological_order();
        WreathGroup { model: model.clone(), poset, topo, tables }
    }

    pub fn model(&self) -> &HierarchicalModel {
        &self.model
    }

    pub fn poset(&self) -> &PseudofactorPoset {
        &self.poset
    }

    pub fn num_cells(&self) -> usize {
        self.model.num_cells()
    }

    /// `|I_ρ|` per class.
    pub fn class_sizes(&self) -> Vec<usize> {
        self.tables.iter().map(|t| t.size).collect()
    }

    /// `|I_{A(ρ)}|` per class.
    pub fn ancestor_sizes(&self) -> Vec<usize> {
        self.tables.iter().map(|t| t.ancestor_size).collect()
    }

    pub fn identity(&self) -> WreathElement {
        WreathElement {
            components: self
                .tables
                .iter()
                .map(|t| vec![Permutation::identity(t.size); t.ancestor_size])
                .collect(),
        }
    }

    /// Builds an element after checking table shapes.
    pub fn element(&self, components: Vec<Vec<LevelPermutation>>) -> Result<WreathElement> {
        if components.len() != self.tables.len() {
            return Err(Error::DimensionMismatch { expected: self.tables.len(), got: components.len() });
        }
        for (t, comp) in self.tables.iter().zip(&components) {
            if comp.len() != t.ancestor_size {
                return Err(Error::DimensionMismatch { expected: t.ancestor_size, got: comp.len() });
            }
            if let Some(p) = comp.iter().find(|p| p.len() != t.size) {
                return Err(Error::DimensionMismatch { expected: t.size, got: p.len() });
            }
        }
        Ok(WreathElement { components })
    }

    fn check(&self, w: &WreathElement) -> Result<()> {
        let ok = w.components.len() == self.tables.len()
            && w.components.iter().zip(&self.tables).all(|(c, t)| {
                c.len() == t.ancestor_size && c.iter().all(|p| p.len() == t.size)
            });
        if ok {
            Ok(())
        } else {
            Err(Error::Validation("element does not belong to this group's shape".into()))
        }
    }

    fn act_index(&self, w: &WreathElement, k: usize) -> usize {
        self.tables
            .iter()
            .zip(&w.components)
            .map(|(t, comp)| t.offset[comp[t.anc[k]].apply(t.own[k])])
            .sum()
    }

    /// `w i`, with 1-based cells.
    pub fn act(&self, w: &WreathElement, cell: &Cell) -> Result<Cell> {
        self.check(w)?;
        let k = self.model.cell_index(cell)?;
        self.model.index_cell(self.act_index(w, k))
    }

    /// The permutation of cell indices induced by `w`.
    pub fn to_cell_permutation(&self, w: &WreathElement) -> Result<CellPermutation> {
        self.check(w)?;
        Ok(Permutation::from_vec_unchecked((0..self.num_cells()).map(|k| self.act_index(w, k)).collect()))
    }

    /// `w1 ∘ w2` (apply `w2` first).
    pub fn compose(&self, w1: &WreathElement, w2: &WreathElement) -> Result<WreathElement> {
        let g = self.to_cell_permutation(w1)?.compose(&self.to_cell_permutation(w2)?)?;
        self.factorize(&g)
    }

    pub fn inverse(&self, w: &WreathElement) -> Result<WreathElement> {
        self.factorize(&self.to_cell_permutation(w)?.inverse())
    }

    /// `∏_ρ (|I_ρ|!)^{|I_{A(ρ)}|}`.
    pub fn order(&self) -> BigUint {
        self.tables
            .iter()
            .map(|t| factorial(t.size).pow(t.ancestor_size as u32))
            .product()
    }

    /// True iff for every class `ρ`, `(g i)_{V(ρ)}` depends only on `i_{V(ρ)}`.
    pub fn contains(&self, g: &CellPermutation) -> Result<bool> {
        if g.len() != self.num_cells() {
            return Err(Error::DimensionMismatch { expected: self.num_cells(), got: g.len() });
        }
        Ok(self.tables.iter().all(|t| factors_through(&t.v, g)))
    }

    /// Reads off the components of `g`; fails with [`Error::NotAMember`] outside `W`.
    pub fn factorize(&self, g: &CellPermutation) -> Result<WreathElement> {
        if !self.contains(g)? {
            return Err(Error::NotAMember);
        }
        let mut components = Vec::with_capacity(self.tables.len());
        for t in &self.tables {
            let mut images = vec![vec![usize::MAX; t.size]; t.ancestor_size];
            for k in 0..self.num_cells() {
                images[t.anc[k]][t.own[k]] = t.own[g.apply(k)];
            }
            let perms = images.into_iter().map(Permutation::new).collect::<Result<Vec<_>>>()?;
            components.push(perms);
        }
        Ok(WreathElement { components })
    }

    /// Uniform random element, reproducible from `seed`.
    pub fn sample_uniform(&self, seed: u64) -> WreathElement {
        self.sample_indexed(seed, 0)
    }

    /// Sample number `index` of the sequence determined by `seed`.
    ///
    /// Every (class, ancestor cell) slot draws from its own ChaCha20 stream:
    /// key = `seed` (LE) ‖ `index` (LE) ‖ zeros, stream = position of the slot
    /// when slots are listed class by class in topological order, ancestor
    /// cells ascending. Each slot is an independent Fisher–Yates shuffle.
    pub fn sample_indexed(&self, seed: u64, index: u64) -> WreathElement {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&index.to_le_bytes());
        let mut stream_of = vec![0u64; self.tables.len()];
        let mut next = 0u64;
        for &c in &self.topo {
            stream_of[c] = next;
            next += self.tables[c].ancestor_size as u64;
        }
        let mut components: Vec<Vec<LevelPermutation>> = vec![Vec::new(); self.tables.len()];
        for &c in self.topo.iter().rev() {
            let t = &self.tables[c];
            components[c] = (0..t.ancestor_size)
                .map(|a| {
                    let mut rng = ChaCha20Rng::from_seed(key);
                    rng.set_stream(stream_of[c] + a as u64);
                    let mut image: Vec<usize> = (0..t.size).collect();
                    image.shuffle(&mut rng);
                    Permutation::from_vec_unchecked(image)
                })
                .collect();
        }
        WreathElement { components }
    }

    /// Adjacent transpositions of `I_ρ` applied at a single ancestor cell, for every class.
    pub fn generators(&self) -> Vec<CellPermutation> {
        let mut out = Vec::new();
        for &c in &self.topo {
            let t = &self.tables[c];
            for a in 0..t.ancestor_size {
                for s in 0..t.size.saturating_sub(1) {
                    let mut w = self.identity();
                    w.components[c][a] = Permutation::transposition(t.size, s, s + 1);
                    out.push(self.to_cell_permutation(&w).expect("shape is valid"));
                }
            }
        }
        out
    }

    /// Every element, when the group has at most `limit` elements.
    pub fn elements(&self, limit: usize) -> Result<Vec<WreathElement>> {
        let too_large = || Error::TooLarge(format!("wreath product has more than {limit} elements"));
        if self.order() > BigUint::from(limit) {
            return Err(too_large());
        }
        let mut out = vec![Vec::<Vec<LevelPermutation>>::new()];
        for t in &self.tables {
            let perms: Vec<Permutation> = lexicographic(t.size).collect();
            let mut tables = vec![Vec::<LevelPermutation>::new()];
            for _ in 0..t.ancestor_size {
                tables = tables
                    .into_iter()
                    .flat_map(|prefix| {
                        perms.iter().map(move |p| {
                            let mut next = prefix.clone();
                            next.push(p.clone());
                            next
                        })
                    })
                    .collect();
            }
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    tables.iter().map(move |tab| {
                        let mut next = prefix.clone();
                        next.push(tab.clone());
                        next
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(|components| WreathElement { components }).collect())
    }

    pub fn to_file(&self, w: &WreathElement) -> Result<WreathElementFile> {
        self.check(w)?;
        let mut coords = vec![0; self.model.num_factors()];
        let classes = self
            .tables
            .iter()
            .zip(&w.components)
            .map(|(t, comp)| ClassComponentsFile {
                members: t.members.to_one_based(),
                ancestors: t.ancestors.to_one_based(),
                components: comp
                    .iter()
                    .enumerate()
                    .map(|(a, p)| {
                        self.model.write_marginal(a, t.ancestors, &mut coords);
                        ComponentFile {
                            ancestor_cell: t.ancestors.iter().map(|j| coords[j] + 1).collect(),
                            perm: p.image().to_vec(),
                        }
                    })
                    .collect(),
            })
            .collect();
        Ok(WreathElementFile { classes })
    }

    pub fn from_file(&self, file: &WreathElementFile) -> Result<WreathElement> {
        if file.classes.len() != self.tables.len() {
            return Err(Error::DimensionMismatch { expected: self.tables.len(), got: file.classes.len() });
        }
        let mut components = Vec::with_capacity(self.tables.len());
        for (t, class) in self.tables.iter().zip(&file.classes) {
            if class.members != t.members.to_one_based() {
                return Err(Error::Validation(format!("expected class {}, found {:?}", t.members, class.members)));
            }
            let mut slots: Vec<Option<LevelPermutation>> = vec![None; t.ancestor_size];
            for comp in &class.components {
                let cell: Vec<usize> = comp.ancestor_cell.iter().map(|&i| i.wrapping_sub(1)).collect();
                let anc: Vec<usize> = t.ancestors.iter().collect();
                if cell.len() != anc.len() || cell.iter().zip(&anc).any(|(&i, &j)| i >= self.model.levels()[j]) {
                    return Err(Error::Validation(format!("bad ancestor cell {:?}", comp.ancestor_cell)));
                }
                let a = cell.iter().zip(&anc).fold(0, |acc, (&i, &j)| acc * self.model.levels()[j] + i);
                slots[a] = Some(Permutation::new(comp.perm.clone())?);
            }
            let comp = slots
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Validation(format!("missing ancestor cells for class {}", t.members)))?;
            components.push(comp);
        }
        self.element(components)
    }
}

/// True iff `k ↦ key[g(k)]` is a function of `key[k]`.
fn factors_through(key: &[usize], g: &CellPermutation) -> bool {
    let buckets = key.iter().max().map_or(0, |&b| b + 1);
    let mut image = vec![usize::MAX; buckets];
    for (k, &b) in key.iter().enumerate() {
        let target = key[g.apply(k)];
        if image[b] == usize::MAX {
            image[b] = target;
        } else if image[b] != target {
            return false;
        }
    }
    true
}

/// True iff for every facet `D`, `(g i)_D` depends only on `i_D`.
pub fn facet_criterion_member(model: &HierarchicalModel, g: &CellPermutation) -> Result<bool> {
    if g.len() != model.num_cells() {
        return Err(Error::DimensionMismatch { expected: model.num_cells(), got: g.len() });
    }
    Ok(model.facets().iter().all(|&d| factors_through(&model.marginal_indices(d), g)))
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// On-disk wreath element: one entry per class, one component per ancestor cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WreathElementFile {
    pub classes: Vec<ClassComponentsFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassComponentsFile {
    pub members: Vec<usize>,
    pub ancestors: Vec<usize>,
    pub components: Vec<ComponentFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentFile {
    /// 1-based levels of the ancestor factors, ascending factor order.
    pub ancestor_cell: Vec<usize>,
    /// 0-based one-line image over `I_ρ`.
    pub perm: Vec<usize>,
}
