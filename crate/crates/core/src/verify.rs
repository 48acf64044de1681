//! Checks of the wreath product against the stabilizer of the kernel.
//!
//! The inclusion `W ⊆ G_{ker A}` is tested by sampling members. The reverse
//! inclusion is tested by rejection of random non-members, which is sound but
//! not complete, and exactly by enumerating all `p!` permutations when `p` is small.

use num_bigint::{BigInt, BigUint};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};
use crate::exactla::{
    apply_permutation, configuration_matrix, kernel_basis, CellTable, IntMatrix, KernelCheck,
};
use crate::generic::{all_distinct, faithful_witness};
use crate::model::{Cell, FactorSet, HierarchicalModel};
use crate::perm::{next_permutation, CellPermutation, Permutation};
use crate::wreath::{factorial, WreathGroup};

/// Default cap on `p` for the brute-force stabilizer.
pub const DEFAULT_MAX_CELLS: usize = 8;

/// Environment variable capping the oracle's worker threads.
pub const THREADS_ENV: &str = "TORIC_SYMMETRY_THREADS";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremConditionReport {
    pub facet_sizes: Vec<usize>,
    pub distinct_sizes: bool,
    pub two_level_factors: usize,
    pub conditions_met: bool,
}

/// Facet marginal sizes pairwise distinct and at most one two-level factor.
pub fn theorem_conditions(model: &HierarchicalModel) -> TheoremConditionReport {
    let facet_sizes: Vec<usize> = model.facets().iter().map(|&d| model.marginal_size(d)).collect();
    let mut sorted = facet_sizes.clone();
    sorted.sort_unstable();
    let distinct_sizes = sorted.windows(2).all(|w| w[0] != w[1]);
    let two_level_factors = model.levels().iter().filter(|&&l| l == 2).count();
    TheoremConditionReport {
        facet_sizes,
        distinct_sizes,
        two_level_factors,
        conditions_met: distinct_sizes && two_level_factors <= 1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

/// Result of a randomized suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub outcome: Outcome,
    pub passed: bool,
    pub trials: usize,
    pub examined: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<usize>>,
    pub detail: String,
}

impl SuiteReport {
    fn new(suite: &str, outcome: Outcome, trials: usize, examined: usize, counterexample: Option<Vec<usize>>, detail: String) -> Self {
        SuiteReport {
            suite: suite.to_owned(),
            outcome,
            passed: outcome != Outcome::Fail,
            trials,
            examined,
            counterexample,
            detail,
        }
    }
}

/// Configuration matrix with its kernel, ready for stabilizer queries.
pub struct KernelContext {
    pub matrix: IntMatrix,
    pub kernel_dim: usize,
    check: KernelCheck,
}

impl KernelContext {
    pub fn new(model: &HierarchicalModel) -> Result<Self> {
        let matrix = configuration_matrix(model);
        let kb = kernel_basis(&matrix);
        let check = KernelCheck::new(&matrix, &kb)?;
        Ok(KernelContext { kernel_dim: kb.len(), matrix, check })
    }

    pub fn stabilizes(&self, g: &CellPermutation) -> Result<bool> {
        self.check.stabilized_by(g)
    }
}

/// Samples `trials` elements of `W` and checks each stabilizes `ker A`.
pub fn check_member_invariance(model: &HierarchicalModel, trials: usize, seed: u64) -> Result<SuiteReport> {
    let group = WreathGroup::new(model);
    let ctx = KernelContext::new(model)?;
    for t in 0..trials {
        let g = group.to_cell_permutation(&group.sample_indexed(seed, t as u64))?;
        if !ctx.stabilizes(&g)? {
            return Ok(SuiteReport::new(
                "member-invariance",
                Outcome::Fail,
                trials,
                t + 1,
                Some(g.into_image()),
                format!("sample {t} does not stabilize ker A"),
            ));
        }
    }
    Ok(SuiteReport::new(
        "member-invariance",
        Outcome::Pass,
        trials,
        trials,
        None,
        format!("{trials} sampled members stabilize ker A"),
    ))
}

/// Draws `trials` uniform cell permutations; each one outside `W` must fail to stabilize `ker A`.
///
/// Skipped when the level conditions fail, since the stabilizer may then exceed `W`.
pub fn check_nonmember_rejection(model: &HierarchicalModel, trials: usize, seed: u64) -> Result<SuiteReport> {
    let cond = theorem_conditions(model);
    if !cond.conditions_met {
        return Ok(SuiteReport::new(
            "nonmember-rejection",
            Outcome::Skipped,
            trials,
            0,
            None,
            "level conditions not met".into(),
        ));
    }
    let group = WreathGroup::new(model);
    let ctx = KernelContext::new(model)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rejected = 0;
    for _ in 0..trials {
        let g = Permutation::random(model.num_cells(), &mut rng);
        if group.contains(&g)? {
            continue;
        }
        if ctx.stabilizes(&g)? {
            return Ok(SuiteReport::new(
                "nonmember-rejection",
                Outcome::Fail,
                trials,
                rejected + 1,
                Some(g.into_image()),
                "a non-member of W stabilizes ker A".into(),
            ));
        }
        rejected += 1;
    }
    Ok(SuiteReport::new(
        "nonmember-rejection",
        Outcome::Pass,
        trials,
        rejected,
        None,
        format!("{rejected} non-members rejected"),
    ))
}

/// Every sampled non-identity element must move the faithfulness witness.
pub fn check_faithfulness(model: &HierarchicalModel, trials: usize, seed: u64) -> Result<SuiteReport> {
    let phi = faithful_witness(model)?;
    let distinct = all_distinct(phi.values());
    let group = WreathGroup::new(model);
    let mut moved = 0;
    for t in 0..trials {
        let g = group.to_cell_permutation(&group.sample_indexed(seed, t as u64))?;
        if g.is_identity() {
            continue;
        }
        if apply_permutation(&g, &phi)? == phi {
            return Ok(SuiteReport::new(
                "faithfulness",
                Outcome::Fail,
                trials,
                moved + 1,
                Some(g.into_image()),
                "non-identity element fixes the witness".into(),
            ));
        }
        moved += 1;
    }
    let outcome = if distinct { Outcome::Pass } else { Outcome::Fail };
    Ok(SuiteReport::new(
        "faithfulness",
        outcome,
        trials,
        moved,
        None,
        format!("witness entries distinct: {distinct}; {moved} non-identity samples move it"),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerReport {
    pub p: usize,
    pub examined: u64,
    pub stabilizer_size: u64,
    pub wreath_order: String,
    /// Members of `W` that failed to stabilize (always 0 unless there is a defect).
    pub wreath_not_stabilizing: u64,
    pub equal: bool,
    /// Lexicographically first permutation in the stabilizer but not in `W`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl StabilizerReport {
    /// `|W|` divides the stabilizer order.
    pub fn order_divides(&self) -> bool {
        let w: BigUint = self.wreath_order.parse().expect("order is decimal");
        w != BigUint::from(0u32) && (BigUint::from(self.stabilizer_size) % w) == BigUint::from(0u32)
    }
}

#[derive(Default)]
struct Tally {
    examined: u64,
    stabilizer: u64,
    wreath_not_stabilizing: u64,
    witness: Option<Vec<usize>>,
}

fn worker_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.parse().ok().filter(|&n: &usize| n > 0)
}

/// Enumerates all `p!` cell permutations and compares the stabilizer of `ker A` with `W`.
pub fn brute_force_stabilizer(model: &HierarchicalModel, max_cells: usize) -> Result<StabilizerReport> {
    let p = model.num_cells();
    if p > max_cells {
        return Err(Error::TooLarge(format!("p = {p} exceeds the enumeration cap of {max_cells} cells")));
    }
    let warning = match p {
        0..=8 => None,
        9 => Some("p = 9: enumerating 362,880 permutations".to_owned()),
        _ => Some(format!("p = {p}: enumerating {} permutations; expect long run times", factorial(p))),
    };
    let group = WreathGroup::new(model);
    let ctx = KernelContext::new(model)?;

    let chunk = |first: usize| -> Result<Tally> {
        let mut image: Vec<usize> = std::iter::once(first).chain((0..p).filter(|&k| k != first)).collect();
        let mut tally = Tally::default();
        loop {
            let g = Permutation::from_vec_unchecked(image.clone());
            tally.examined += 1;
            let stab = ctx.stabilizes(&g)?;
            let in_w = group.contains(&g)?;
            if stab {
                tally.stabilizer += 1;
                if !in_w && tally.witness.is_none() {
                    tally.witness = Some(image.clone());
                }
            } else if in_w {
                tally.wreath_not_stabilizing += 1;
            }
            if !next_permutation(&mut image[1..]) {
                break;
            }
        }
        Ok(tally)
    };

    let run = || (0..p.max(1)).into_par_iter().map(|f| if p == 0 { Ok(Tally::default()) } else { chunk(f) }).collect::<Result<Vec<Tally>>>();
    let tallies = match worker_threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Validation(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let mut total = Tally::default();
    for t in tallies {
        total.examined += t.examined;
        total.stabilizer += t.stabilizer;
        total.wreath_not_stabilizing += t.wreath_not_stabilizing;
        if total.witness.is_none() {
            total.witness = t.witness;
        }
    }
    let order = group.order();
    let equal = total.witness.is_none() && total.wreath_not_stabilizing == 0 && BigUint::from(total.stabilizer) == order;
    Ok(StabilizerReport {
        p,
        examined: total.examined,
        stabilizer_size: total.stabilizer,
        wreath_order: order.to_string(),
        wreath_not_stabilizing: total.wreath_not_stabilizing,
        equal,
        witness: total.witness,
        warning,
    })
}

/// One named assertion of a fixture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl FixtureReport {
    fn new(suite: &str, checks: Vec<Check>) -> Self {
        FixtureReport { suite: suite.into(), passed: checks.iter().all(|c| c.passed), checks }
    }
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

/// Table with `+1` at `plus` cells and `-1` at `minus` cells (1-based cells).
pub fn move_table(model: &HierarchicalModel, plus: &[&[usize]], minus: &[&[usize]]) -> Result<CellTable> {
    let mut values = vec![0i64; model.num_cells()];
    for (cells, sign) in [(plus, 1), (minus, -1)] {
        for c in cells {
            values[model.cell_index(&Cell(c.to_vec()))?] += sign;
        }
    }
    CellTable::from_ints(model, &values)
}

fn in_kernel(a: &IntMatrix, x: &CellTable) -> Result<bool> {
    Ok(a.mul_vec(&x.to_integer_vector())?.iter().all(|v| *v == BigInt::from(0)))
}

/// Every element of `∏_j S_{I_j}` as a cell permutation.
pub fn direct_product_elements(model: &HierarchicalModel) -> Result<Vec<CellPermutation>> {
    let m = model.num_factors();
    let per_factor: Vec<Vec<Permutation>> =
        model.levels().iter().map(|&l| crate::perm::lexicographic(l).collect()).collect();
    let total: usize = per_factor.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    for mut n in 0..total {
        let choice: Vec<&Permutation> = per_factor
            .iter()
            .rev()
            .map(|ps| {
                let p = &ps[n % ps.len()];
                n /= ps.len();
                p
            })
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        let image = (0..model.num_cells())
            .map(|k| {
                let cell = model.index_cell(k)?;
                let moved: Vec<usize> = (0..m).map(|j| choice[j].apply(cell.0[j] - 1) + 1).collect();
                model.cell_index(&Cell(moved))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Permutation::new(image)?);
    }
    Ok(out)
}

/// Two indispensable moves of `{1,3},{2,4},{3,4,5}` that a conditional swap
/// of factor 5 identifies but no product of level permutations does.
pub fn markov_fixture() -> Result<FixtureReport> {
    let model = catalog::markov([2; 5]);
    let a = configuration_matrix(&model);
    let m1 = move_table(&model, &[&[1, 1, 1, 1, 1], &[1, 2, 2, 1, 1]], &[&[1, 2, 1, 1, 1], &[1, 1, 2, 1, 1]])?;
    let m2 = move_table(&model, &[&[1, 1, 1, 1, 2], &[1, 2, 2, 1, 1]], &[&[1, 2, 1, 1, 2], &[1, 1, 2, 1, 1]])?;
    let k1 = in_kernel(&a, &m1)?;
    let k2 = in_kernel(&a, &m2)?;

    let group = WreathGroup::new(&model);
    let five = group.poset().find(FactorSet::singleton(4)).ok_or_else(|| Error::Defect("class {5} missing".into()))?;
    let mut components = group.identity().components().to_vec();
    // ancestor cells over factors {3,4}: indices 0, 1 have i_3 = 1
    components[five][0] = Permutation::transposition(2, 0, 1);
    components[five][1] = Permutation::transposition(2, 0, 1);
    let w = group.element(components)?;
    let g = group.to_cell_permutation(&w)?;
    let maps = apply_permutation(&g, &m1)? == m2 && group.contains(&g)?;

    let products = direct_product_elements(&model)?;
    let mut mapper = None;
    for h in &products {
        if apply_permutation(h, &m1)? == m2 {
            mapper = Some(h.clone());
            break;
        }
    }
    Ok(FixtureReport::new(
        "markov",
        vec![
            check("moves-in-kernel", k1 && k2, format!("A·M1 = 0: {k1}, A·M2 = 0: {k2}")),
            check("wreath-maps-m1-to-m2", maps, "swap of factor 5 when i_3 = 1 maps M1 to M2"),
            check(
                "direct-product-cannot",
                mapper.is_none(),
                format!("searched {} direct-product elements, mapper found: {}", products.len(), mapper.is_some()),
            ),
        ],
    ))
}

/// `f(i,j,k,l,c) = (k,l,i,j,c)`: exchanges bands with stacks and rows with columns.
pub fn sudoku_transpose(model: &HierarchicalModel) -> Result<CellPermutation> {
    let image = (0..model.num_cells())
        .map(|k| {
            let c = model.index_cell(k)?.0;
            model.cell_index(&Cell(vec![c[2], c[3], c[0], c[1], c[4]]))
        })
        .collect::<Result<Vec<_>>>()?;
    Permutation::new(image)
}

/// The grid transpose stabilizes `ker A` but lies outside `W`.
pub fn sudoku_fixture() -> Result<FixtureReport> {
    let model = catalog::sudoku();
    let f = sudoku_transpose(&model)?;
    let ctx = KernelContext::new(&model)?;
    let stabilizes = ctx.stabilizes(&f)?;
    let group = WreathGroup::new(&model);
    let in_w = group.contains(&f)?;
    let order = group.order();
    let cond = theorem_conditions(&model);
    let sizes_ok = !cond.conditions_met && cond.facet_sizes.iter().all(|&s| s == 81);
    Ok(FixtureReport::new(
        "sudoku",
        vec![
            check("transpose-stabilizes-kernel", stabilizes, format!("kernel dimension {}", ctx.kernel_dim)),
            check("transpose-not-in-wreath", !in_w, "f does not factor through the pseudofactor poset"),
            check("wreath-order", order == BigUint::from(609_499_054_080u64), format!("|W| = {order}")),
            check(
                "conditions-not-met",
                sizes_ok,
                format!("facet sizes {:?}, conditions met: {}", cond.facet_sizes, cond.conditions_met),
            ),
        ],
    ))
}

/// True iff the poset order is trivial; errors if that disagrees with `|W| = ∏ |I_ρ|!`.
pub fn corollary_direct_product(model: &HierarchicalModel) -> Result<bool> {
    let group = WreathGroup::new(model);
    let trivial = group.poset().is_trivial_order();
    let product: BigUint = group.class_sizes().into_iter().map(factorial).product();
    if trivial != (group.order() == product) {
        return Err(Error::Defect("direct-product criterion disagrees with the group order".into()));
    }
    Ok(trivial)
}
