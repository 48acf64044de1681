//! Permutations of `0..n` in one-line notation.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection on `0..n`; `image[k]` is the image of `k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

/// Permutation of the cells of a model, indexed by `cell_index`.
pub type CellPermutation = Permutation;

/// Permutation of a marginal cell set `I_rho`, indexed in mixed-radix order.
pub type LevelPermutation = Permutation;

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Validation(format!("not a permutation of 0..{n}")));
            }
        }
        Ok(Permutation { image })
    }

    pub(crate) fn from_vec_unchecked(image: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(image.clone()).is_ok());
        Permutation { image }
    }

    pub fn identity(n: usize) -> Self {
        Permutation { image: (0..n).collect() }
    }

    /// Swaps `a` and `b`, fixing everything else.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(a, b);
        Permutation { image }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.shuffle(rng);
        Permutation { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn into_image(self) -> Vec<usize> {
        self.image
    }

    pub fn apply(&self, k: usize) -> usize {
        self.image[k]
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(k, &i)| k == i)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(Permutation { image: other.image.iter().map(|&k| self.image[k]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (k, &i) in self.image.iter().enumerate() {
            inv[i] = k;
        }
        Permutation { image: inv }
    }

    pub fn to_file(&self) -> PermutationFile {
        PermutationFile { p: self.len(), image: self.image.clone() }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.image)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.image)
    }
}

/// On-disk permutation: `{"p": n, "image": [...]}`, 0-based images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermutationFile {
    pub p: usize,
    pub image: Vec<usize>,
}

impl PermutationFile {
    pub fn into_permutation(self) -> Result<Permutation> {
        if self.image.len() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: self.image.len() });
        }
        Permutation::new(self.image)
    }
}

pub fn parse_permutation(text: &str) -> Result<Permutation> {
    let file: PermutationFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_permutation()
}

/// All permutations of `0..n` in lexicographic order.
pub fn lexicographic(n: usize) -> impl Iterator<Item = Permutation> {
    let mut next = Some((0..n).collect::<Vec<usize>>());
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        if next_permutation(&mut succ) {
            next = Some(succ);
        }
        Some(Permutation { image: cur })
    })
}

/// Advances `v` to its lexicographic successor; false when `v` was the last one.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
