//! Graph self-maps: vertices to vertices, edges to edge paths.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DirEdge, EdgePath, Graph, GraphError};
use crate::stallings;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("expected {expected} images, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("image of edge {edge} does not run from f(init) to f(term)")]
    Endpoints { edge: usize },
    #[error("anchor at vertex {0} is not sent to an anchor of equal genus")]
    AnchorImage(usize),
    #[error("two anchors are sent to the same anchor")]
    AnchorCollision,
    #[error("phantom edge {0} is sent outside the phantom loops")]
    PhantomImage(usize),
    #[error("maps live on different graphs")]
    GraphMismatch,
    #[error("iteration count must be positive")]
    ZeroIterate,
    #[error("word {index} is not reduced")]
    UnreducedWord { index: usize },
    #[error("letter {letter:?} outside the alphabet of rank {rank}")]
    Alphabet { letter: char, rank: usize },
    #[error("unexpected character {0:?} in word")]
    BadChar(char),
}

/// A graph self-map. Only images of positive edge orientations are stored;
/// `image(reverse(e))` is the reversed path, so reverse-compatibility holds
/// by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMap {
    graph: Graph,
    vertex_image: Vec<usize>,
    edge_image: Vec<EdgePath>,
}

impl GraphMap {
    pub fn new(
        graph: Graph,
        vertex_image: Vec<usize>,
        edge_image: Vec<EdgePath>,
    ) -> Result<Self, MapError> {
        if vertex_image.len() != graph.vertex_count() {
            return Err(MapError::Arity { expected: graph.vertex_count(), got: vertex_image.len() });
        }
        if edge_image.len() != graph.edge_count() {
            return Err(MapError::Arity { expected: graph.edge_count(), got: edge_image.len() });
        }
        for &w in &vertex_image {
            if w >= graph.vertex_count() {
                return Err(GraphError::VertexOutOfRange(w).into());
            }
        }
        for (e, p) in edge_image.iter().enumerate() {
            let rec = graph.edge(e);
            graph.check_path(p, Some(vertex_image[rec.init]))?;
            let end = match p.last() {
                Some(d) => graph.term(d),
                None => vertex_image[rec.init],
            };
            if end != vertex_image[rec.term] {
                return Err(MapError::Endpoints { edge: e });
            }
            if rec.phantom && p.steps().iter().any(|d| !graph.is_phantom(d.edge())) {
                return Err(MapError::PhantomImage(e));
            }
        }
        let mut hit = std::collections::BTreeSet::new();
        for (&v, a) in graph.anchors() {
            let w = vertex_image[v];
            match graph.anchors().get(&w) {
                Some(b) if b.genus == a.genus => {}
                _ => return Err(MapError::AnchorImage(v)),
            }
            if !hit.insert(w) {
                return Err(MapError::AnchorCollision);
            }
        }
        Ok(GraphMap { graph, vertex_image, edge_image })
    }

    pub fn identity(graph: Graph) -> Self {
        let vertex_image = (0..graph.vertex_count()).collect();
        let edge_image = (0..graph.edge_count()).map(|e| EdgePath::single(DirEdge::positive(e))).collect();
        GraphMap { graph, vertex_image, edge_image }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_image(&self, v: usize) -> usize {
        self.vertex_image[v]
    }

    pub fn vertex_images(&self) -> &[usize] {
        &self.vertex_image
    }

    /// Images of positive orientations, indexed by unoriented edge.
    pub fn edge_images(&self) -> &[EdgePath] {
        &self.edge_image
    }

    pub fn image(&self, d: DirEdge) -> EdgePath {
        let p = &self.edge_image[d.edge()];
        if d.is_reversed() {
            p.reversed()
        } else {
            p.clone()
        }
    }

    /// Concatenation of images without tightening.
    pub fn apply_raw(&self, p: &EdgePath) -> EdgePath {
        let mut out = EdgePath::empty();
        for &d in p.steps() {
            out.extend(&self.image(d));
        }
        out
    }

    pub fn apply(&self, p: &EdgePath) -> Result<EdgePath, MapError> {
        self.graph.check_path(p, None)?;
        Ok(self.apply_raw(p).tightened())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GraphMap) -> Result<GraphMap, MapError> {
        if self.graph != other.graph {
            return Err(MapError::GraphMismatch);
        }
        let vertex_image = other.vertex_image.iter().map(|&v| self.vertex_image[v]).collect();
        let edge_image = other.edge_image.iter().map(|p| self.apply_raw(p).tightened()).collect();
        Ok(GraphMap { graph: self.graph.clone(), vertex_image, edge_image })
    }

    pub fn iterate(&self, n: usize) -> Result<GraphMap, MapError> {
        if n == 0 {
            return Err(MapError::ZeroIterate);
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    pub fn is_tight(&self) -> bool {
        self.edge_image.iter().all(EdgePath::is_reduced)
    }

    /// Real edges whose image is the trivial path.
    pub fn degenerate_edges(&self) -> Vec<usize> {
        self.graph
            .real_edges()
            .into_iter()
            .filter(|&e| self.edge_image[e].is_empty())
            .collect()
    }

    /// Every real edge goes to a single real edge and the map is a bijection
    /// on directed real edges.
    pub fn is_graph_automorphism(&self) -> bool {
        let real = self.graph.real_edges();
        let mut seen = std::collections::BTreeSet::new();
        for &e in &real {
            let p = &self.edge_image[e];
            if p.len() != 1 || self.graph.is_phantom(p.steps()[0].edge()) {
                return false;
            }
            if !seen.insert(p.steps()[0].edge()) {
                return false;
            }
        }
        true
    }

    /// Images tightened; does not resolve degenerate edges.
    pub fn tightened(&self) -> GraphMap {
        GraphMap {
            graph: self.graph.clone(),
            vertex_image: self.vertex_image.clone(),
            edge_image: self.edge_image.iter().map(EdgePath::tightened).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_image.iter().enumerate().all(|(v, &w)| v == w)
            && self
                .edge_image
                .iter()
                .enumerate()
                .all(|(e, p)| p.steps() == [DirEdge::positive(e)])
    }

    /// True iff the images of a generating set of `π₁(G)` generate it.
    pub fn is_pi1_surjective(&self) -> bool {
        stallings::map_is_surjective(self)
    }

    /// Anchor permutation by tag.
    pub fn anchor_permutation(&self) -> BTreeMap<u32, u32> {
        self.graph
            .anchors()
            .iter()
            .map(|(&v, a)| (a.tag, self.graph.anchors()[&self.vertex_image[v]].tag))
            .collect()
    }
}

/// One-vertex graph with `k` loops.
pub fn rose(k: usize) -> Graph {
    Graph::rose(k)
}

/// Rose map sending loop `i` to the path spelled by `words[i]`.
///
/// Letters are generator indices as positive directed edges; an inverse is
/// the reversed edge.
pub fn from_generator_images(words: &[EdgePath]) -> Result<GraphMap, MapError> {
    let k = words.len();
    for (i, w) in words.iter().enumerate() {
        if !w.is_reduced() {
            return Err(MapError::UnreducedWord { index: i });
        }
        for d in w.steps() {
            if d.edge() >= k {
                return Err(GraphError::EdgeOutOfRange(d.edge()).into());
            }
        }
    }
    GraphMap::new(Graph::rose(k), vec![0], words.to_vec())
}

/// Parse a word over `a..z` with a trailing `'` for inverses, e.g. `"ab'a"`.
/// Whitespace is ignored.
pub fn parse_word(s: &str, rank: usize) -> Result<EdgePath, MapError> {
    let mut out: Vec<DirEdge> = Vec::new();
    for c in s.chars() {
        match c {
            'a'..='z' => {
                let g = (c as u8 - b'a') as usize;
                if g >= rank {
                    return Err(MapError::Alphabet { letter: c, rank });
                }
                out.push(DirEdge::positive(g));
            }
            '\'' => match out.last_mut() {
                Some(d) if !d.is_reversed() => *d = d.reverse(),
                _ => return Err(MapError::BadChar(c)),
            },
            c if c.is_whitespace() => {}
            c => return Err(MapError::BadChar(c)),
        }
    }
    Ok(EdgePath::new(out))
}

/// Rose map from single-letter words, e.g. `rose_map(&["ab", "a"])`.
pub fn rose_map(words: &[&str]) -> Result<GraphMap, MapError> {
    let k = words.len();
    let parsed = words.iter().map(|w| parse_word(w, k)).collect::<Result<Vec<_>, _>>()?;
    from_generator_images(&parsed)
}

/// Inverse of [`parse_word`] for ranks up to 26.
pub fn format_word(p: &EdgePath) -> String {
    let mut s = String::new();
    for d in p.steps() {
        s.push((b'a' + d.edge() as u8) as char);
        if d.is_reversed() {
            s.push('\'');
        }
    }
    s
}
