//! Facet stars, pseudofactors and the pseudofactor poset.
//!
//! Two factors belong to the same pseudofactor when exactly the same facets
//! contain them. Classes are ordered by inclusion of those facet sets
//! ("stars"): `ρ ≤ ρ'` iff `star(ρ) ⊆ star(ρ')`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FactorSet, HierarchicalModel};

/// Facet indices (into `model.facets()`) containing a factor.
pub type Star = BTreeSet<usize>;

/// Largest facet count for which the intersection poset is enumerated.
pub const MAX_INTERSECTION_FACETS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetStar {
    pub factor: usize,
    pub star: Star,
}

pub fn facet_star(model: &HierarchicalModel, factor: usize) -> FacetStar {
    let star = model.facets().iter().enumerate().filter(|(_, d)| d.contains(factor)).map(|(k, _)| k).collect();
    FacetStar { factor, star }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pseudofactor {
    pub members: FactorSet,
    pub star: Star,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudofactorPoset {
    num_factors: usize,
    classes: Vec<Pseudofactor>,
    /// `above[a][b]` iff class `a` > class `b`.
    above: Vec<Vec<bool>>,
    ancestors: Vec<FactorSet>,
    v_sets: Vec<FactorSet>,
}

/// Partitions the factors by their facet stars and orders the classes by star inclusion.
pub fn pseudofactor_poset(model: &HierarchicalModel) -> PseudofactorPoset {
    let m = model.num_factors();
    let mut by_star: BTreeMap<Star, FactorSet> = BTreeMap::new();
    for j in 0..m {
        let entry = by_star.entry(facet_star(model, j).star).or_default();
        *entry = entry.union(FactorSet::singleton(j));
    }
    let mut classes: Vec<Pseudofactor> =
        by_star.into_iter().map(|(star, members)| Pseudofactor { members, star }).collect();
    classes.sort_by_key(|c| c.members.min());

    let n = classes.len();
    let above: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| a != b && classes[b].star.is_subset(&classes[a].star)).collect())
        .collect();
    let ancestors: Vec<FactorSet> = (0..n)
        .map(|b| (0..n).filter(|&a| above[a][b]).fold(FactorSet::EMPTY, |acc, a| acc.union(classes[a].members)))
        .collect();
    let v_sets = classes.iter().zip(&ancestors).map(|(c, a)| c.members.union(*a)).collect();
    PseudofactorPoset { num_factors: m, classes, above, ancestors, v_sets }
}

impl PseudofactorPoset {
    pub fn num_factors(&self) -> usize {
        self.num_factors
    }

    pub fn classes(&self) -> &[Pseudofactor] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn members(&self, class: usize) -> FactorSet {
        self.classes[class].members
    }

    /// Strict order: class `a` > class `b`.
    pub fn greater(&self, a: usize, b: usize) -> bool {
        self.above[a][b]
    }

    /// `A(ρ)`: union of the classes strictly above.
    pub fn ancestors(&self, class: usize) -> FactorSet {
        self.ancestors[class]
    }

    /// `V(ρ) = ρ ∪ A(ρ)`.
    pub fn v(&self, class: usize) -> FactorSet {
        self.v_sets[class]
    }

    pub fn class_of(&self, factor: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.members.contains(factor))
    }

    pub fn find(&self, members: FactorSet) -> Option<usize> {
        self.classes.iter().position(|c| c.members == members)
    }

    /// Cover relations `(lower, upper)` of the Hasse diagram.
    pub fn hasse(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for lo in 0..n {
            for hi in 0..n {
                if self.above[hi][lo] && !(0..n).any(|mid| self.above[hi][mid] && self.above[mid][lo]) {
                    out.push((lo, hi));
                }
            }
        }
        out
    }

    /// All strict relations `(lower, upper)`.
    pub fn relations(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|lo| (0..n).filter(move |&hi| self.above[hi][lo]).map(move |hi| (lo, hi))).collect()
    }

    /// No two distinct classes are comparable.
    pub fn is_trivial_order(&self) -> bool {
        self.above.iter().all(|row| row.iter().all(|&b| !b))
    }

    /// Linear extension listing lower classes first: sorted by height
    /// (longest chain below), ties broken by smallest member factor.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut height = vec![usize::MAX; n];
        // star sizes strictly increase along the order
        let mut by_star: Vec<usize> = (0..n).collect();
        by_star.sort_by_key(|&c| self.classes[c].star.len());
        for &c in &by_star {
            height[c] = (0..n).filter(|&b| self.above[c][b]).map(|b| height[b] + 1).max().unwrap_or(0);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&c| (height[c], self.classes[c].members.min()));
        order
    }

    /// Abbreviated wreath component of a class: `S*_{ρ}` or `S*_{ρ|A(ρ)}`.
    pub fn component_label(&self, class: usize) -> String {
        let a = self.ancestors(class);
        if a.is_empty() {
            format!("S*_{}", self.members(class))
        } else {
            format!("S*_{}|{}", self.members(class), a)
        }
    }

    pub fn report(&self, model: &HierarchicalModel) -> PosetReport {
        let facet_list = |star: &Star| star.iter().map(|&k| model.facets()[k].to_one_based()).collect();
        PosetReport {
            classes: self
                .classes
                .iter()
                .enumerate()
                .map(|(i, c)| ClassReport {
                    members: c.members.to_one_based(),
                    star: facet_list(&c.star),
                    ancestors: self.ancestors(i).to_one_based(),
                    v: self.v(i).to_one_based(),
                    component: self.component_label(i),
                })
                .collect(),
            hasse: self
                .hasse()
                .into_iter()
                .map(|(lo, hi)| HasseEdge { lower: self.members(lo).to_one_based(), upper: self.members(hi).to_one_based() })
                .collect(),
            trivial_order: self.is_trivial_order(),
        }
    }
}

/// `V(ρ)` for the class with exactly these members.
pub fn v_set(poset: &PseudofactorPoset, class: FactorSet) -> Result<FactorSet> {
    poset
        .find(class)
        .map(|c| poset.v(c))
        .ok_or_else(|| Error::Validation(format!("{class} is not a pseudofactor")))
}

/// Intersections of all facet subfamilies; the empty family gives `[m]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionPoset {
    num_factors: usize,
    elements: Vec<FactorSet>,
}

impl IntersectionPoset {
    pub fn elements(&self) -> &[FactorSet] {
        &self.elements
    }

    pub fn contains(&self, s: FactorSet) -> bool {
        self.elements.binary_search_by_key(&(s.len(), s.bits()), |e| (e.len(), e.bits())).is_ok()
    }

    /// `a ≤ b` in reverse inclusion.
    pub fn le(&self, a: FactorSet, b: FactorSet) -> bool {
        b.is_subset(a)
    }

    /// Size of `Q ∖ {[m]}`.
    pub fn proper_len(&self) -> usize {
        self.elements.len() - usize::from(self.contains(FactorSet::full(self.num_factors)))
    }
}

pub fn intersection_poset(model: &HierarchicalModel) -> Result<IntersectionPoset> {
    let k = model.facets().len();
    if k > MAX_INTERSECTION_FACETS {
        return Err(Error::TooLarge(format!(
            "intersection poset enumerates 2^{k} facet families; limit is {MAX_INTERSECTION_FACETS} facets"
        )));
    }
    let full = model.all_factors();
    let mut elements: Vec<FactorSet> = (0u64..1 << k)
        .map(|mask| {
            model
                .facets()
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .fold(full, |acc, (_, d)| acc.intersection(*d))
        })
        .collect();
    elements.sort_by_key(|e| (e.len(), e.bits()));
    elements.dedup();
    Ok(IntersectionPoset { num_factors: model.num_factors(), elements })
}

/// Outcome of validating the map `V: P → Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VMapReport {
    pub injective: bool,
    pub order_preserving: bool,
    pub matches_star_intersection: bool,
    pub image_in_q: bool,
    pub image_size: usize,
    pub q_size_without_full: usize,
    pub surjective: bool,
}

impl VMapReport {
    pub fn is_homomorphism(&self) -> bool {
        self.injective && self.order_preserving && self.matches_star_intersection && self.image_in_q
    }
}

pub fn v_map_report(model: &HierarchicalModel) -> Result<VMapReport> {
    let poset = pseudofactor_poset(model);
    let q = intersection_poset(model)?;
    let n = poset.len();
    let full = model.all_factors();
    let image: BTreeSet<(usize, u64)> = (0..n).map(|c| (poset.v(c).len(), poset.v(c).bits())).collect();
    let injective = image.len() == n;
    // ρ < ρ' must give V(ρ) < V(ρ') in reverse inclusion, i.e. V(ρ) ⊋ V(ρ')
    let order_preserving = poset
        .relations()
        .iter()
        .all(|&(lo, hi)| q.le(poset.v(lo), poset.v(hi)) && poset.v(lo) != poset.v(hi));
    let matches_star_intersection = (0..n).all(|c| {
        let meet = poset.classes()[c].star.iter().fold(full, |acc, &k| acc.intersection(model.facets()[k]));
        meet == poset.v(c)
    });
    let image_in_q = (0..n).all(|c| q.contains(poset.v(c)));
    let q_size_without_full = q.proper_len();
    let image_size = image.len();
    let proper_image = (0..n).filter(|&c| poset.v(c) != full).count();
    Ok(VMapReport {
        injective,
        order_preserving,
        matches_star_intersection,
        image_in_q,
        image_size,
        q_size_without_full,
        surjective: proper_image == q_size_without_full,
    })
}

/// True iff `V` is an injective, order-preserving map into `Q` given by star intersections.
pub fn check_v_homomorphism(model: &HierarchicalModel) -> Result<bool> {
    Ok(v_map_report(model)?.is_homomorphism())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub members: Vec<usize>,
    pub star: Vec<Vec<usize>>,
    pub ancestors: Vec<usize>,
    pub v: Vec<usize>,
    pub component: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HasseEdge {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetReport {
    pub classes: Vec<ClassReport>,
    pub hasse: Vec<HasseEdge>,
    pub trivial_order: bool,
}
