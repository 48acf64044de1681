//! Acceptance suite: one PASS/FAIL line per criterion, exact values and time limits.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use toric_symmetry::analysis::{analyze, row_space_dim_formula};
use toric_symmetry::catalog;
use toric_symmetry::exactla::{
    configuration_matrix, intersection_dim, kernel_basis, lift, member, partial_difference, project_increment,
    project_marginal_space, rank, row_space_basis, CellTable, IntMatrix, MarginalTable, Rational,
};
use toric_symmetry::generic::{all_distinct, faithful_witness, injectivity_exhaustive, sequences_rank};
use toric_symmetry::perm::lexicographic;
use toric_symmetry::poset::{check_v_homomorphism, pseudofactor_poset, v_map_report};
use toric_symmetry::verify::{
    brute_force_stabilizer, check_member_invariance, check_nonmember_rejection, markov_fixture, sudoku_fixture,
    sudoku_transpose, theorem_conditions, KernelContext, Outcome,
};
use toric_symmetry::wreath::{facet_criterion_member, WreathGroup};
use toric_symmetry::{CellPermutation, FactorSet, HierarchicalModel, Permutation};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok_or<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent < limit, format!("{what} took {spent:.2?}, limit {limit:?}"))
}

fn model(levels: &[usize], facets: &[&[usize]]) -> HierarchicalModel {
    HierarchicalModel::from_lists(levels, facets).expect("valid model")
}

fn random_rational(rng: &mut ChaCha20Rng) -> Rational {
    Rational::new(BigInt::from(rng.gen_range(-20i64..=20)), BigInt::from(rng.gen_range(1i64..=6)))
}

fn random_table(model: &HierarchicalModel, rng: &mut ChaCha20Rng) -> CellTable {
    let values = (0..model.num_cells()).map(|_| random_rational(rng)).collect();
    CellTable::from_values(model, values).unwrap()
}

/// Random element of `r(A)`: a sum of lifted random facet tables.
fn random_row_space_element(model: &HierarchicalModel, rng: &mut ChaCha20Rng) -> CellTable {
    let mut x = CellTable::zeros(model);
    for &d in model.facets() {
        let theta = MarginalTable { support: d, values: (0..model.marginal_size(d)).map(|_| random_rational(rng)).collect() };
        x = x.add(&lift(model, &theta).unwrap()).unwrap();
    }
    x
}

/// Up to three factors with 2..=4 levels and a random antichain of facets.
fn random_model(rng: &mut ChaCha20Rng) -> HierarchicalModel {
    let m = rng.gen_range(1..=3);
    let levels: Vec<usize> = (0..m).map(|_| rng.gen_range(2..=4)).collect();
    let full = (1u64 << m) - 1;
    let mut picks: Vec<u64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=full)).collect();
    picks.sort_unstable();
    picks.dedup();
    let maximal: Vec<Vec<usize>> = picks
        .iter()
        .filter(|&&a| !picks.iter().any(|&b| b != a && a & !b == 0))
        .map(|&a| FactorSet::from_bits(a).to_one_based())
        .collect();
    let refs: Vec<&[usize]> = maximal.iter().map(Vec::as_slice).collect();
    model(&levels, &refs)
}

fn increment_dim(model: &HierarchicalModel, e: FactorSet) -> usize {
    e.iter().map(|j| model.levels()[j] - 1).product()
}

fn c1_oracle_equality() -> Check {
    let start = Instant::now();
    let r = ok_or(brute_force_stabilizer(&model(&[2, 3], &[&[1], &[2]]), 8))?;
    within(start, Duration::from_secs(1), "(2,3) oracle")?;
    ensure(r.examined == 720 && r.stabilizer_size == 12 && r.wreath_order == "12" && r.equal, format!("(2,3): {r:?}"))?;
    ensure(r.wreath_not_stabilizing == 0, "a wreath element failed to stabilize")?;
    let start = Instant::now();
    let r = ok_or(brute_force_stabilizer(&model(&[2, 4], &[&[1], &[2]]), 8))?;
    within(start, Duration::from_secs(30), "(2,4) oracle")?;
    ensure(r.examined == 40_320 && r.stabilizer_size == 48 && r.wreath_order == "48" && r.equal, format!("(2,4): {r:?}"))?;
    Ok("(2,3): 12 of 720; (2,4): 48 of 40320; both equal to W".into())
}

fn c2_strict_inclusion() -> Check {
    let start = Instant::now();
    let r = ok_or(brute_force_stabilizer(&model(&[2, 2], &[&[1], &[2]]), 8))?;
    within(start, Duration::from_secs(1), "(2,2) oracle")?;
    ensure(r.stabilizer_size == 8 && r.wreath_order == "4" && !r.equal, format!("{r:?}"))?;
    let w = r.witness.clone().ok_or("no witness")?;
    // The factor swap (i,j) -> (j,i) on a 2x2 table exchanges cells 1 and 2.
    ensure(w == vec![0, 2, 1, 3], format!("witness {w:?}"))?;
    Ok(format!("stabilizer 8, wreath 4, witness {w:?}"))
}

fn c3_saturated() -> Check {
    let m = model(&[2, 3], &[&[1, 2]]);
    let kb = kernel_basis(&configuration_matrix(&m));
    ensure(kb.is_empty(), format!("kernel dimension {}", kb.len()))?;
    let r = ok_or(brute_force_stabilizer(&m, 8))?;
    ensure(r.stabilizer_size == 720 && r.wreath_order == "720" && r.equal, format!("{r:?}"))?;
    Ok("kernel empty; stabilizer 720 = W".into())
}

fn c4_chain() -> Check {
    let start = Instant::now();
    let m = catalog::chain4([3, 4, 5, 6]);
    let report = ok_or(analyze(&m))?;
    let mut hasse: Vec<(Vec<usize>, Vec<usize>)> =
        report.poset.hasse.iter().map(|e| (e.lower.clone(), e.upper.clone())).collect();
    hasse.sort();
    ensure(hasse == vec![(vec![1], vec![2]), (vec![4], vec![3])], format!("hasse {hasse:?}"))?;
    ensure(report.relations.len() == 2, "extra relations")?;
    let a = configuration_matrix(&m);
    ensure(a.rows() == 62 && a.cols() == 360, format!("matrix {}x{}", a.rows(), a.cols()))?;
    let r = rank(&a);
    ensure(r == 53 && report.dim_row_space == 53 && row_space_dim_formula(&m) == 53, format!("rank {r}"))?;
    let members = ok_or(check_member_invariance(&m, 200, 0))?;
    ensure(members.outcome == Outcome::Pass && members.examined == 200, format!("{members:?}"))?;
    let rejected = ok_or(check_nonmember_rejection(&m, 200, 0))?;
    ensure(rejected.outcome == Outcome::Pass && rejected.examined == 200, format!("{rejected:?}"))?;
    within(start, Duration::from_secs(60), "chain suite")?;
    Ok("hasse {1}<{2}, {4}<{3}; rank 53; 200 members stabilize; 200 non-members rejected".into())
}

fn c5_theorem_equivalence() -> Check {
    let models = [
        catalog::independence(&[2, 3]),
        catalog::uncovered([2, 2, 2]),
        catalog::conditional([2, 3, 2]),
        catalog::cycle(&[2, 3, 2, 2]),
        catalog::markov([2, 2, 2, 2, 3]),
        catalog::three_triangles([2, 2, 2, 2, 2, 3]),
    ];
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut total = 0usize;
    let mut exhaustive = 0usize;
    for m in &models {
        let group = WreathGroup::new(m);
        let agree = |g: &CellPermutation| -> Result<(), String> {
            let a = ok_or(group.contains(g))?;
            let b = ok_or(facet_criterion_member(m, g))?;
            ensure(a == b, format!("{}: disagreement on {g}", m.name().unwrap_or("?")))
        };
        let p = m.num_cells();
        if p <= 8 {
            for g in lexicographic(p) {
                agree(&g)?;
                total += 1;
            }
            exhaustive += 1;
        }
        for t in 0..1000u64 {
            agree(&Permutation::random(p, &mut rng))?;
            // Members, and members perturbed by one transposition, exercise both answers.
            let w = ok_or(group.to_cell_permutation(&group.sample_indexed(7, t)))?;
            agree(&w)?;
            let a = rng.gen_range(0..p);
            let b = rng.gen_range(0..p);
            agree(&ok_or(Permutation::transposition(p, a, b).compose(&w))?)?;
            total += 3;
        }
    }
    Ok(format!("{} models, {total} permutations, {exhaustive} exhaustive, zero disagreements", models.len()))
}

fn c6_markov() -> Check {
    let start = Instant::now();
    let r = ok_or(markov_fixture())?;
    within(start, Duration::from_secs(1), "markov fixture")?;
    ensure(r.passed && r.checks.len() == 3, format!("{r:?}"))?;
    Ok("moves in kernel; wreath element maps M1 to M2; no direct-product mapper".into())
}

fn c7_sudoku() -> Check {
    let start = Instant::now();
    let m = catalog::sudoku();
    let a = configuration_matrix(&m);
    ensure(a.rows() == 324 && a.cols() == 729, format!("matrix {}x{}", a.rows(), a.cols()))?;
    let f = ok_or(sudoku_transpose(&m))?;
    let ctx = ok_or(KernelContext::new(&m))?;
    ensure(ok_or(ctx.stabilizes(&f))?, "f does not stabilize the kernel")?;
    let group = WreathGroup::new(&m);
    ensure(!ok_or(group.contains(&f))?, "f is in W")?;
    ensure(group.order() == 609_499_054_080u64.into(), format!("order {}", group.order()))?;
    let c = theorem_conditions(&m);
    ensure(!c.conditions_met && c.facet_sizes == vec![81; 4], format!("{c:?}"))?;
    let r = ok_or(sudoku_fixture())?;
    ensure(r.passed && r.checks.len() == 4, format!("{r:?}"))?;
    within(start, Duration::from_secs(120), "sudoku fixture")?;
    Ok("f stabilizes ker A, f not in W, |W| = 609499054080, conditions not met".into())
}

fn c8_projections() -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut checked = 0usize;
    for _ in 0..5 {
        let m = random_model(&mut rng);
        let subsets: Vec<FactorSet> = m.all_factors().subsets().collect();
        for e in &subsets {
            let cols: Vec<Vec<BigInt>> = (0..m.num_cells())
                .map(|k| {
                    let mut unit = vec![0i64; m.num_cells()];
                    unit[k] = 1;
                    let d = partial_difference(&m, &CellTable::from_ints(&m, &unit).unwrap(), *e).unwrap();
                    d.to_integer_vector()
                })
                .collect();
            let kernel = m.num_cells() - rank(&ok_or(IntMatrix::from_rows(&cols, m.num_cells()))?);
            let expected: usize = subsets.iter().filter(|f| !e.is_subset(**f)).map(|&f| increment_dim(&m, f)).sum();
            ensure(kernel == expected, format!("{m:?}: dim ker d_{e} = {kernel}, expected {expected}"))?;
        }
        for _ in 0..20 {
            let x = random_table(&m, &mut rng);
            let proj: Vec<CellTable> = subsets.iter().map(|&e| project_increment(&m, &x, e).unwrap()).collect();
            for (a, e) in subsets.iter().enumerate() {
                ensure(project_increment(&m, &proj[a], *e).unwrap() == proj[a], format!("not idempotent on {e}"))?;
                for (b, f) in subsets.iter().enumerate() {
                    if a != b {
                        ensure(project_increment(&m, &proj[b], *e).unwrap().is_zero(), format!("{e} and {f} not orthogonal"))?;
                    }
                }
                let mut sum = CellTable::zeros(&m);
                for (b, f) in subsets.iter().enumerate() {
                    if f.is_subset(*e) {
                        sum = sum.add(&proj[b]).unwrap();
                    }
                }
                ensure(sum == project_marginal_space(&m, &x, *e).unwrap(), format!("sum over subsets of {e} is not the L_E projection"))?;
            }
            checked += 1;
        }
    }
    Ok(format!("5 random models, {checked} tables, exact"))
}

fn example_models() -> Vec<HierarchicalModel> {
    vec![
        catalog::chain4([2, 3, 2, 3]),
        catalog::independence(&[2, 3, 4]),
        catalog::joint_pair([2, 3, 2]),
        catalog::conditional([2, 3, 2]),
        catalog::uncovered([2, 3, 2]),
        catalog::cycle(&[2, 2, 3, 2]),
        catalog::markov([2, 2, 2, 2, 2]),
        catalog::three_triangles([2, 2, 2, 2, 2, 2]),
        catalog::triangle([2, 3, 2]),
    ]
}

fn c9_props_2_and_4() -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mut pairs = 0usize;
    for m in example_models() {
        let row = row_space_basis(&configuration_matrix(&m));
        for &d in m.facets() {
            let Ok(rest) = m.delete_facet(d) else { continue };
            let rest_kernel = kernel_basis(&configuration_matrix(&rest));
            let rest_simplices = rest.all_simplices();
            let removed: Vec<FactorSet> = d.subsets().filter(|e| !rest_simplices.contains(e)).collect();
            let expected: usize = removed.iter().map(|&e| increment_dim(&m, e)).sum();
            let full = ok_or(intersection_dim(&row, &rest_kernel))?;
            let sub = HierarchicalModel::new(
                toric_symmetry::model::LevelSpec::new(m.levels().to_vec()).unwrap(),
                toric_symmetry::model::FacetSet::new(vec![d], m.num_factors()).unwrap(),
            )
            .unwrap();
            let local = ok_or(intersection_dim(&row_space_basis(&configuration_matrix(&sub)), &rest_kernel))?;
            ensure(full == expected && local == expected, format!("{m:?} minus {d}: {full}/{local} vs {expected}"))?;

            let rest_row = row_space_basis(&configuration_matrix(&rest));
            for t in 0..50 {
                let x = match t % 3 {
                    0 => random_row_space_element(&rest, &mut rng),
                    1 => random_row_space_element(&m, &mut rng),
                    _ => random_table(&m, &mut rng),
                };
                let lhs = ok_or(member(&rest_row, &x))?;
                let in_row = ok_or(member(&row, &x))?;
                let killed = removed.iter().all(|&e| partial_difference(&m, &x, e).unwrap().is_zero());
                ensure(lhs == (in_row && killed), format!("{m:?} minus {d}: membership mismatch"))?;
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (model, facet) pairs, 50 tables each"))
}

fn c10_perturbation() -> Check {
    for (n, b) in [(2, 2), (3, 2), (4, 1)] {
        ensure(ok_or(injectivity_exhaustive(n, b, 1))?, format!("sums collide for n={n}, b={b}"))?;
    }
    for n in 1..=6 {
        for b in 1..=3 {
            let r = ok_or(sequences_rank(n, b))?;
            ensure(r == n, format!("rank {r} for n={n}, b={b}"))?;
        }
    }
    Ok("injective for (2,2), (3,2), (4,1); rank n for n <= 6".into())
}

fn histogram(group: &WreathGroup, seed: u64, n: u64) -> BTreeMap<Vec<usize>, usize> {
    let mut h = BTreeMap::new();
    for t in 0..n {
        let g = group.to_cell_permutation(&group.sample_indexed(seed, t)).unwrap();
        *h.entry(g.into_image()).or_insert(0) += 1;
    }
    h
}

fn c11_sampling() -> Check {
    let group = WreathGroup::new(&model(&[2, 3], &[&[1], &[2]]));
    let h = histogram(&group, 11, 12_000);
    ensure(h.len() == 12, format!("{} distinct elements", h.len()))?;
    let (lo, hi) = (*h.values().min().unwrap(), *h.values().max().unwrap());
    ensure(lo >= 850 && hi <= 1150, format!("counts range {lo}..{hi}"))?;
    ensure(histogram(&group, 11, 12_000) == h, "histogram differs for the same seed")?;
    Ok(format!("12 elements, counts in [{lo}, {hi}], reproducible"))
}

fn c12_faithfulness() -> Check {
    for m in [model(&[3, 3], &[&[1, 2]]), catalog::chain4([3, 4, 5, 6])] {
        let phi = ok_or(faithful_witness(&m))?;
        ensure(all_distinct(phi.values()), format!("{m:?}: witness entries repeat"))?;
        let group = WreathGroup::new(&m);
        let mut moved = 0;
        let mut t = 0u64;
        while moved < 100 {
            let g = ok_or(group.to_cell_permutation(&group.sample_indexed(12, t)))?;
            t += 1;
            if g.is_identity() {
                continue;
            }
            let y = ok_or(toric_symmetry::exactla::apply_permutation(&g, &phi))?;
            ensure(y != phi, format!("{m:?}: {g} fixes the witness"))?;
            moved += 1;
        }
    }
    Ok("witness distinct; 100 non-identity samples move it, both models".into())
}

fn c13_v_map() -> Check {
    let mut count = 0;
    for name in catalog::NAMES {
        let m = catalog::by_name(name).unwrap();
        ensure(ok_or(check_v_homomorphism(&m))?, format!("{name}: V is not an injective homomorphism"))?;
        let r = ok_or(v_map_report(&m))?;
        ensure(r.injective && r.order_preserving, format!("{name}: {r:?}"))?;
        ensure(pseudofactor_poset(&m).len() == r.image_size, format!("{name}: image size"))?;
        count += 1;
    }
    for m in example_models() {
        ensure(ok_or(check_v_homomorphism(&m))?, format!("{m:?}: V is not an injective homomorphism"))?;
        count += 1;
    }
    let tri = ok_or(analyze(&catalog::triangle([2, 3, 4])))?;
    let v = tri.v_map.ok_or("no V map report for the triangle")?;
    ensure(!v.surjective && v.image_size == 3 && v.q_size_without_full == 7, format!("triangle {v:?}"))?;
    Ok(format!("{count} models; triangle image 3 of 7, not surjective"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 13] = [
        ("oracle equality when the level conditions hold", c1_oracle_equality),
        ("strict inclusion detected for 2x2 independence", c2_strict_inclusion),
        ("saturated model: full symmetric group", c3_saturated),
        ("chain model structure, rank and suites", c4_chain),
        ("wreath membership equals the facet criterion", c5_theorem_equivalence),
        ("markov fixture", c6_markov),
        ("sudoku fixture", c7_sudoku),
        ("increment projections", c8_projections),
        ("deleted-facet dimension identity and membership", c9_props_2_and_4),
        ("perturbation sequences", c10_perturbation),
        ("sampling uniformity", c11_sampling),
        ("faithfulness witness", c12_faithfulness),
        ("V map into the intersection poset", c13_v_map),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let spent = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({spent:.2?}): {detail}", k + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name} ({spent:.2?}): {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
