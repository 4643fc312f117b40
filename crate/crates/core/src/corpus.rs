//! Seeded random automorphisms of free groups, built from elementary
//! Nielsen moves on generator images.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{DirEdge, EdgePath};
use crate::map::{from_generator_images, GraphMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nielsen {
    /// `x_i -> x_i x_j`
    RightMultiply(usize, usize),
    /// `x_i -> x_j x_i`
    LeftMultiply(usize, usize),
    /// `x_i -> x_i^-1`
    Invert(usize),
    /// `x_i <-> x_j`
    Swap(usize, usize),
}

impl Nielsen {
    /// Apply to a list of generator images.
    pub fn apply(self, words: &mut [EdgePath]) {
        match self {
            Nielsen::RightMultiply(i, j) => words[i] = words[i].concat(&words[j]).tightened(),
            Nielsen::LeftMultiply(i, j) => words[i] = words[j].concat(&words[i]).tightened(),
            Nielsen::Invert(i) => words[i] = words[i].reversed(),
            Nielsen::Swap(i, j) => words.swap(i, j),
        }
    }

    pub fn random(rank: usize, rng: &mut impl Rng) -> Self {
        assert!(rank >= 1);
        if rank == 1 {
            return Nielsen::Invert(0);
        }
        let i = rng.gen_range(0..rank);
        let mut j = rng.gen_range(0..rank - 1);
        if j >= i {
            j += 1;
        }
        match rng.gen_range(0..8) {
            0..=2 => Nielsen::RightMultiply(i, j),
            3..=5 => Nielsen::LeftMultiply(i, j),
            6 => Nielsen::Invert(i),
            _ => Nielsen::Swap(i, j),
        }
    }
}

/// Generator images of a product of `length` random Nielsen moves.
pub fn random_word_images(rank: usize, length: usize, rng: &mut impl Rng) -> Vec<EdgePath> {
    let mut words: Vec<EdgePath> = (0..rank).map(|i| EdgePath::single(DirEdge::positive(i))).collect();
    for _ in 0..length {
        Nielsen::random(rank, rng).apply(&mut words);
    }
    words
}

pub fn random_automorphism(rank: usize, length: usize, rng: &mut impl Rng) -> GraphMap {
    from_generator_images(&random_word_images(rank, length, rng)).expect("Nielsen products are valid")
}

/// `count` maps of the given rank with word lengths `1..=max_length`.
pub fn corpus(seed: u64, count: usize, rank: usize, max_length: usize) -> Vec<GraphMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_length);
            random_automorphism(rank, len, &mut rng)
        })
        .collect()
}

/// Every signed permutation of the generators of the given rank, in a
/// fixed order.
pub fn signed_permutations(rank: usize) -> Vec<Vec<DirEdge>> {
    let mut perms: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..rank {
        perms = perms
            .into_iter()
            .flat_map(|p| {
                let free: Vec<usize> = (0..rank).filter(|x| !p.contains(x)).collect();
                free.into_iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for p in perms {
        for signs in 0u32..(1 << rank) {
            out.push(p.iter().enumerate().map(|(i, &x)| DirEdge::new(x, signs >> i & 1 == 1)).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stallings::generates_free_group;

    #[test]
    fn corpus_is_deterministic_and_valid() {
        let a = corpus(7, 20, 3, 12);
        let b = corpus(7, 20, 3, 12);
        assert_eq!(a, b);
        for f in &a {
            assert!(generates_free_group(f.edge_images(), 3));
        }
    }

    #[test]
    fn signed_permutation_count() {
        assert_eq!(signed_permutations(1).len(), 2);
        assert_eq!(signed_permutations(3).len(), 48);
    }
}
