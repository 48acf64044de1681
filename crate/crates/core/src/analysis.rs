//! Structural summary of a model: poset, wreath components, dimensions, conditions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exactla::{configuration_matrix, rank};
use crate::model::HierarchicalModel;
use crate::poset::{v_map_report, PosetReport, VMapReport, MAX_INTERSECTION_FACETS};
use crate::verify::{theorem_conditions, TheoremConditionReport};
use crate::wreath::WreathGroup;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub levels: Vec<usize>,
    pub facets: Vec<Vec<usize>>,
    pub cells: usize,
    pub nu: usize,
    pub poset: PosetReport,
    /// Every strict relation `lower < upper`.
    pub relations: Vec<Relation>,
    pub components: Vec<String>,
    pub group_order: String,
    /// Rank of the configuration matrix by elimination.
    pub dim_row_space: usize,
    /// `Σ_{E∈Δ} ∏_{j∈E} (I_j - 1)`.
    pub dim_row_space_formula: usize,
    pub dim_kernel: usize,
    pub conditions: TheoremConditionReport,
    pub direct_product: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_map: Option<VMapReport>,
}

/// Dimension of `r(A)` predicted by the ANOVA decomposition.
pub fn row_space_dim_formula(model: &HierarchicalModel) -> usize {
    model
        .all_simplices()
        .into_iter()
        .map(|e| e.iter().map(|j| model.levels()[j] - 1).product::<usize>())
        .sum()
}

pub fn analyze(model: &HierarchicalModel) -> Result<AnalysisReport> {
    let group = WreathGroup::new(model);
    let poset = group.poset();
    let order = poset.topological_order();
    let dim_row_space = rank(&configuration_matrix(model));
    let v_map = if model.facets().len() <= MAX_INTERSECTION_FACETS { Some(v_map_report(model)?) } else { None };
    Ok(AnalysisReport {
        name: model.name().map(str::to_owned),
        levels: model.levels().to_vec(),
        facets: model.facets().iter().map(|d| d.to_one_based()).collect(),
        cells: model.num_cells(),
        nu: model.nu(),
        poset: poset.report(model),
        relations: poset
            .relations()
            .into_iter()
            .map(|(lo, hi)| Relation { lower: poset.members(lo).to_one_based(), upper: poset.members(hi).to_one_based() })
            .collect(),
        components: order.iter().map(|&c| poset.component_label(c)).collect(),
        group_order: group.order().to_string(),
        dim_row_space,
        dim_row_space_formula: row_space_dim_formula(model),
        dim_kernel: model.num_cells() - dim_row_space,
        conditions: theorem_conditions(model),
        direct_product: poset.is_trivial_order(),
        v_map,
    })
}

fn braces(v: &[usize]) -> String {
    let inner: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("{{{}}}", inner.join(","))
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(name) = &self.name {
            let _ = writeln!(s, "model: {name}");
        }
        let _ = writeln!(s, "levels: {:?}", self.levels);
        let facets: Vec<String> = self.facets.iter().map(|f| braces(f)).collect();
        let _ = writeln!(s, "facets: {}", facets.join(" "));
        let _ = writeln!(s, "cells: {}  nu: {}", self.cells, self.nu);
        let _ = writeln!(s, "pseudofactors:");
        for c in &self.poset.classes {
            let star: Vec<String> = c.star.iter().map(|f| braces(f)).collect();
            let _ = writeln!(
                s,
                "  {}  star [{}]  A = {}  V = {}",
                braces(&c.members),
                star.join(" "),
                braces(&c.ancestors),
                braces(&c.v)
            );
        }
        let hasse: Vec<String> =
            self.poset.hasse.iter().map(|e| format!("{}<{}", braces(&e.lower), braces(&e.upper))).collect();
        let _ = writeln!(s, "hasse: {}", if hasse.is_empty() { "(none)".to_owned() } else { hasse.join(", ") });
        let rel: Vec<String> =
            self.relations.iter().map(|e| format!("{}<{}", braces(&e.lower), braces(&e.upper))).collect();
        let _ = writeln!(s, "relations: {}", if rel.is_empty() { "(none)".to_owned() } else { rel.join(", ") });
        let _ = writeln!(s, "wreath product: W = {}", self.components.join(" x "));
        let _ = writeln!(s, "group order: {}", self.group_order);
        let _ = writeln!(
            s,
            "dim r(A) = {} (formula {})  dim ker A = {}",
            self.dim_row_space, self.dim_row_space_formula, self.dim_kernel
        );
        let c = &self.conditions;
        let _ = writeln!(
            s,
            "level conditions: {} (facet sizes {:?}, distinct: {}, two-level factors: {})",
            if c.conditions_met { "met" } else { "not met" },
            c.facet_sizes,
            c.distinct_sizes,
            c.two_level_factors
        );
        let _ = writeln!(s, "direct product: {}", self.direct_product);
        if let Some(v) = &self.v_map {
            let _ = writeln!(
                s,
                "V map: injective {}, order-preserving {}, star intersections {}, image {} of {} proper intersections, surjective {}",
                v.injective, v.order_preserving, v.matches_star_intersection, v.image_size, v.q_size_without_full, v.surjective
            );
        }
        s
    }
}
