//! Named models used throughout the tests, the demos and the CLI.

use crate::model::HierarchicalModel;

fn build(name: &str, levels: &[usize], facets: &[&[usize]]) -> HierarchicalModel {
    HierarchicalModel::from_lists(levels, facets).expect("catalog models are valid").with_name(name)
}

/// Chain `{1,2},{2,3},{3,4}`.
pub fn chain4(levels: [usize; 4]) -> HierarchicalModel {
    build("chain4", &levels, &[&[1, 2], &[2, 3], &[3, 4]])
}

/// Complete independence `{1},…,{m}`.
pub fn independence(levels: &[usize]) -> HierarchicalModel {
    let facets: Vec<Vec<usize>> = (1..=levels.len()).map(|j| vec![j]).collect();
    let refs: Vec<&[usize]> = facets.iter().map(Vec::as_slice).collect();
    build("independence", levels, &refs)
}

/// `{1},{2,3}`: `{2,3}` is a single pseudofactor.
pub fn joint_pair(levels: [usize; 3]) -> HierarchicalModel {
    build("joint_pair", &levels, &[&[1], &[2, 3]])
}

/// `{1,2},{2,3}`: conditional independence of 1 and 3 given 2.
pub fn conditional(levels: [usize; 3]) -> HierarchicalModel {
    build("conditional", &levels, &[&[1, 2], &[2, 3]])
}

/// `{1},{2}` over three factors; factor 3 is uncovered.
pub fn uncovered(levels: [usize; 3]) -> HierarchicalModel {
    build("uncovered", &levels, &[&[1], &[2]])
}

/// Cycle `{1,2},{2,3},…,{m,1}`, `m ≥ 3`.
pub fn cycle(levels: &[usize]) -> HierarchicalModel {
    let m = levels.len();
    assert!(m >= 3, "a cycle needs at least three factors");
    let facets: Vec<Vec<usize>> = (1..=m).map(|j| vec![j, j % m + 1]).collect();
    let refs: Vec<&[usize]> = facets.iter().map(Vec::as_slice).collect();
    build("cycle", levels, &refs)
}

/// `{1,3},{2,4},{3,4,5}`.
pub fn markov(levels: [usize; 5]) -> HierarchicalModel {
    build("markov", &levels, &[&[1, 3], &[2, 4], &[3, 4, 5]])
}

/// `{1,4,5},{2,5,6},{3,4,6}`.
pub fn three_triangles(levels: [usize; 6]) -> HierarchicalModel {
    build("three_triangles", &levels, &[&[1, 4, 5], &[2, 5, 6], &[3, 4, 6]])
}

/// Triangle `{1,2},{2,3},{1,3}` (no-three-way interaction).
pub fn triangle(levels: [usize; 3]) -> HierarchicalModel {
    build("triangle", &levels, &[&[1, 2], &[2, 3], &[1, 3]])
}

/// Sudoku grids as `3×3×3×3×9` tables: band, row, stack, column, digit.
pub fn sudoku() -> HierarchicalModel {
    build("sudoku", &[3, 3, 3, 3, 9], &[&[1, 2, 5], &[3, 4, 5], &[1, 3, 5], &[1, 2, 3, 4]])
}

/// Looks up a catalog model by name with its default levels.
pub fn by_name(name: &str) -> Option<HierarchicalModel> {
    Some(match name {
        "chain4" => chain4([3, 4, 5, 6]),
        "independence" => independence(&[2, 3]),
        "joint_pair" => joint_pair([2, 3, 4]),
        "conditional" => conditional([2, 3, 4]),
        "uncovered" => uncovered([3, 4, 5]),
        "cycle" => cycle(&[3, 4, 5, 6]),
        "markov" => markov([2, 2, 2, 2, 2]),
        "three_triangles" => three_triangles([2, 3, 4, 5, 6, 7]),
        "triangle" => triangle([3, 4, 5]),
        "sudoku" => sudoku(),
        _ => return None,
    })
}

pub const NAMES: [&str; 10] = [
    "chain4",
    "independence",
    "joint_pair",
    "conditional",
    "uncovered",
    "cycle",
    "markov",
    "three_triangles",
    "triangle",
    "sudoku",
];
