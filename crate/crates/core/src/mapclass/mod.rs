//! Mapping classes of sphere bodies, summand permutations of connected sums
//! and the case-by-case classification planner.

pub mod manifold;
pub mod plan;

use thiserror::Error;

use crate::driver::{classify, Classification, ClassifyError, ClassifyOptions};
use crate::graph::Graph;
use crate::map::{from_generator_images, GraphMap};
use crate::stallings::inverse_basis;

pub use manifold::{
    adjust_decompose, factor_interchanges, validate_perm, Adjustment, ManifoldSpec, SlideLetter,
    SlideWord, SpecError, Summand, SummandKind, SummandPerm, S2XS1_LABEL,
};
pub use plan::{plan, Case, Plan, PlanStep};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapClassError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("outer part is not a self-map of a rose")]
    NotRose,
    #[error("outer part is not invertible")]
    NotInvertible,
    #[error("expected {expected} twist coordinates, got {got}")]
    TwistLength { expected: usize, got: usize },
    #[error("twist coordinate {0} is not 0 or 1")]
    TwistValue(u8),
}

/// An outer automorphism together with sphere-twist coordinates. Twists
/// are taken to be central, so they compose by addition mod 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapClassElement {
    outer: GraphMap,
    twists: Vec<u8>,
}

impl MapClassElement {
    pub fn new(outer: GraphMap, twists: Vec<u8>) -> Result<Self, MapClassError> {
        let g = outer.graph();
        if g.vertex_count() != 1 || g.has_anchors() {
            return Err(MapClassError::NotRose);
        }
        let k = g.edge_count();
        if twists.len() != k {
            return Err(MapClassError::TwistLength { expected: k, got: twists.len() });
        }
        if let Some(&t) = twists.iter().find(|&&t| t > 1) {
            return Err(MapClassError::TwistValue(t));
        }
        if inverse_basis(outer.edge_images()).is_err() {
            return Err(MapClassError::NotInvertible);
        }
        Ok(MapClassElement { outer: outer.tightened(), twists })
    }

    pub fn identity(rank: usize) -> Self {
        MapClassElement { outer: GraphMap::identity(Graph::rose(rank)), twists: vec![0; rank] }
    }

    pub fn rank(&self) -> usize {
        self.twists.len()
    }

    pub fn outer(&self) -> &GraphMap {
        &self.outer
    }

    pub fn twists(&self) -> &[u8] {
        &self.twists
    }

    pub fn has_twists(&self) -> bool {
        self.twists.iter().any(|&t| t != 0)
    }

    pub fn is_identity(&self) -> bool {
        self.outer.is_identity() && !self.has_twists()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MapClassElement) -> Result<Self, MapClassError> {
        if self.rank() != other.rank() {
            return Err(MapClassError::RankMismatch(self.rank(), other.rank()));
        }
        let outer = self.outer.compose(&other.outer).expect("same rose");
        let twists = self.twists.iter().zip(&other.twists).map(|(a, b)| a ^ b).collect();
        Ok(MapClassElement { outer, twists })
    }

    pub fn inverse(&self) -> Result<Self, MapClassError> {
        let words = inverse_basis(self.outer.edge_images()).map_err(|_| MapClassError::NotInvertible)?;
        let outer = from_generator_images(&words).map_err(|_| MapClassError::NotInvertible)?;
        Ok(MapClassElement { outer, twists: self.twists.clone() })
    }
}

pub fn mc_compose(u: &MapClassElement, v: &MapClassElement) -> Result<MapClassElement, MapClassError> {
    u.compose(v)
}

pub fn mc_inverse(u: &MapClassElement) -> Result<MapClassElement, MapClassError> {
    u.inverse()
}

#[derive(Debug, Clone)]
pub struct SphereBodyReport {
    pub classification: Classification,
    pub twists: Vec<u8>,
    /// Set when nonzero twists were carried along under the central model.
    pub twist_action_assumed_trivial: bool,
}

/// Classify the outer part; twists are reported unchanged.
pub fn classify_sphere_body(
    u: &MapClassElement,
    opts: &ClassifyOptions,
) -> Result<SphereBodyReport, ClassifyError> {
    let classification = classify(&u.outer, opts)?;
    Ok(SphereBodyReport {
        classification,
        twists: u.twists.clone(),
        twist_action_assumed_trivial: u.has_twists(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::random_automorphism;
    use crate::driver::Outcome;
    use crate::map::rose_map;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn el(ws: &[&str], t: &[u8]) -> MapClassElement {
        MapClassElement::new(rose_map(ws).unwrap(), t.to_vec()).unwrap()
    }

    #[test]
    fn inverse_and_twists() {
        let u = el(&["ab", "a"], &[1, 0]);
        assert!(u.compose(&u.inverse().unwrap()).unwrap().is_identity());
        assert!(u.inverse().unwrap().compose(&u).unwrap().is_identity());
        let t = el(&["a", "b"], &[1, 0]);
        assert!(t.compose(&t).unwrap().is_identity());
        let f = el(&["ab", "a"], &[0, 1]);
        let sq = f.compose(&f).unwrap();
        assert_eq!(sq.twists(), &[0, 0]);
        assert_eq!(sq.outer(), &rose_map(&["aba", "ab"]).unwrap());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            MapClassElement::new(rose_map(&["aa", "b"]).unwrap(), vec![0, 0]),
            Err(MapClassError::NotInvertible)
        );
        assert!(matches!(
            MapClassElement::new(rose_map(&["a", "b"]).unwrap(), vec![0]),
            Err(MapClassError::TwistLength { .. })
        ));
        assert_eq!(
            MapClassElement::new(rose_map(&["a", "b"]).unwrap(), vec![0, 2]),
            Err(MapClassError::TwistValue(2))
        );
        let a = MapClassElement::identity(2);
        let b = MapClassElement::identity(3);
        assert_eq!(a.compose(&b), Err(MapClassError::RankMismatch(2, 3)));
    }

    #[test]
    fn sphere_body_examples() {
        let opts = ClassifyOptions::default();
        let r = classify_sphere_body(&el(&["a", "b"], &[1, 1]), &opts).unwrap();
        assert!(matches!(r.classification.outcome, Outcome::Periodic { period: 1, .. }));
        assert_eq!(r.twists, vec![1, 1]);
        assert!(r.twist_action_assumed_trivial);
        let r = classify_sphere_body(&el(&["ab", "a"], &[0, 0]), &opts).unwrap();
        assert!(matches!(r.classification.outcome, Outcome::TrainTrackGeneric { .. }));
        assert!(!r.twist_action_assumed_trivial);
        let r = classify_sphere_body(&el(&["b", "a"], &[0, 1]), &opts).unwrap();
        assert!(matches!(r.classification.outcome, Outcome::Periodic { period: 2, .. }));
    }

    fn element(seed: u64) -> MapClassElement {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = 1 + (seed % 4) as usize;
        let outer = random_automorphism(rank, 1 + (seed % 9) as usize, &mut rng);
        let twists = (0..rank).map(|i| (seed >> i & 1) as u8).collect();
        MapClassElement::new(outer, twists).unwrap()
    }

    proptest! {
        #[test]
        fn compose_is_associative(s in any::<u64>()) {
            let k = 1 + (s % 4) as usize;
            let pick = |x: u64| {
                let mut rng = ChaCha8Rng::seed_from_u64(x);
                let t = (0..k).map(|i| (x >> i & 1) as u8).collect();
                MapClassElement::new(random_automorphism(k, 1 + (x % 7) as usize, &mut rng), t).unwrap()
            };
            let (u, v, w) = (pick(s), pick(s.wrapping_mul(31) ^ 5), pick(s.wrapping_add(17)));
            let left = u.compose(&v).unwrap().compose(&w).unwrap();
            let right = u.compose(&v.compose(&w).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn two_sided_inverse(s in any::<u64>()) {
            let u = element(s);
            let inv = u.inverse().unwrap();
            prop_assert!(u.compose(&inv).unwrap().is_identity());
            prop_assert!(inv.compose(&u).unwrap().is_identity());
            prop_assert_eq!(u.compose(&MapClassElement::identity(u.rank())).unwrap(), u.clone());
        }
    }
}
