//! Combinatorial classification of handlebody and sphere-body automorphisms.
//!
//! The crate models an automorphism by the homotopy equivalence it induces on
//! a quotient graph, and then
//!
//! * simplifies it with Bestvina-Handel moves ([`moves`]),
//! * measures it with the transition matrix and its Perron root ([`spectra`]),
//! * classifies it as periodic, reducible or train-track generic ([`driver`]),
//! * tracks sphere twists, summand permutations and decomposition plans for
//!   reducible 3-manifolds ([`mapclass`]).

pub mod graph;
pub mod map;
pub mod moves;
pub mod spectra;
pub mod driver;
pub mod corpus;
pub mod mapclass;
pub mod stallings;

pub use graph::{Anchor, DirEdge, EdgePath, EdgeRecord, Graph, GraphError};
pub use map::{format_word, from_generator_images, parse_word, rose, rose_map, GraphMap, MapError};
