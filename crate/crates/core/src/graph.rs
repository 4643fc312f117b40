//! Finite graphs with a fixed-point-free edge involution, and edge paths.
//!
//! Unoriented edge `i` carries the directed ids `2i` (positive) and `2i + 1`
//! (reversed), so `reverse` is `xor 1`. Vertices are `0..vertex_count`.
//!
//! An anchor is a vertex standing in for a surface component of a
//! compression-body quotient. An anchor of genus `g` carries exactly `g`
//! phantom loop edges; phantom edges are ordinary edges for path purposes but
//! are never counted by the transition matrix and never touched by moves.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has no vertices")]
    Empty,
    #[error("path is not endpoint-compatible at step {position}")]
    MalformedPath { position: usize },
    #[error("path does not start at vertex {expected}")]
    PathStart { expected: usize },
    #[error("phantom edge {0} is not a loop at an anchor")]
    StrayPhantom(usize),
    #[error("anchor {vertex} has genus {genus} but carries {loops} phantom loops")]
    AnchorGenus { vertex: usize, genus: u32, loops: u32 },
    #[error("two anchors carry the same tag {0}")]
    DuplicateAnchorTag(u32),
}

/// A directed edge: unoriented index in the high bits, orientation in bit 0.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DirEdge(pub u32);

impl DirEdge {
    pub fn new(edge: usize, reversed: bool) -> Self {
        DirEdge(((edge as u32) << 1) | reversed as u32)
    }

    pub fn positive(edge: usize) -> Self {
        Self::new(edge, false)
    }

    pub fn edge(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_reversed(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn reverse(self) -> Self {
        DirEdge(self.0 ^ 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for DirEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DirEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_reversed() {
            write!(f, "e{}'", self.edge())
        } else {
            write!(f, "e{}", self.edge())
        }
    }
}

/// A finite sequence of directed edges. Endpoint compatibility is checked
/// against a [`Graph`]; the type itself only knows the letters.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgePath(Vec<DirEdge>);

impl EdgePath {
    pub fn new(steps: Vec<DirEdge>) -> Self {
        EdgePath(steps)
    }

    pub fn empty() -> Self {
        EdgePath(Vec::new())
    }

    pub fn single(d: DirEdge) -> Self {
        EdgePath(vec![d])
    }

    pub fn steps(&self) -> &[DirEdge] {
        &self.0
    }

    pub fn into_steps(self) -> Vec<DirEdge> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<DirEdge> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<DirEdge> {
        self.0.last().copied()
    }

    pub fn reversed(&self) -> Self {
        EdgePath(self.0.iter().rev().map(|d| d.reverse()).collect())
    }

    pub fn concat(&self, other: &EdgePath) -> Self {
        let mut steps = Vec::with_capacity(self.len() + other.len());
        steps.extend_from_slice(&self.0);
        steps.extend_from_slice(&other.0);
        EdgePath(steps)
    }

    pub fn extend(&mut self, other: &EdgePath) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn push(&mut self, d: DirEdge) {
        self.0.push(d);
    }

    /// No step is immediately followed by its reverse.
    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].reverse())
    }

    /// Free reduction. Single left-to-right pass with a stack, which yields
    /// the unique reduced representative.
    pub fn tightened(&self) -> Self {
        let mut out: Vec<DirEdge> = Vec::with_capacity(self.0.len());
        for &d in &self.0 {
            if out.last() == Some(&d.reverse()) {
                out.pop();
            } else {
                out.push(d);
            }
        }
        EdgePath(out)
    }

    /// Number of occurrences of unoriented edge `edge`, in either orientation.
    pub fn count_edge(&self, edge: usize) -> usize {
        self.0.iter().filter(|d| d.edge() == edge).count()
    }
}

impl fmt::Debug for EdgePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl fmt::Display for EdgePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromIterator<DirEdge> for EdgePath {
    fn from_iter<I: IntoIterator<Item = DirEdge>>(iter: I) -> Self {
        EdgePath(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub init: usize,
    pub term: usize,
    pub phantom: bool,
}

/// Anchor data. `tag` survives every move and identifies the anchor across
/// vertex renumberings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Anchor {
    pub genus: u32,
    pub tag: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<EdgeRecord>,
    anchors: BTreeMap<usize, Anchor>,
}

impl Graph {
    /// Plain graph from `(init, term)` pairs.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let edges = edges
            .iter()
            .map(|&(init, term)| EdgeRecord { init, term, phantom: false })
            .collect();
        Self::from_parts(vertex_count, edges, BTreeMap::new())
    }

    pub fn from_parts(
        vertex_count: usize,
        edges: Vec<EdgeRecord>,
        anchors: BTreeMap<usize, Anchor>,
    ) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        for rec in &edges {
            for v in [rec.init, rec.term] {
                if v >= vertex_count {
                    return Err(GraphError::VertexOutOfRange(v));
                }
            }
        }
        let mut tags = std::collections::BTreeSet::new();
        for (&v, a) in &anchors {
            if v >= vertex_count {
                return Err(GraphError::VertexOutOfRange(v));
            }
            if !tags.insert(a.tag) {
                return Err(GraphError::DuplicateAnchorTag(a.tag));
            }
        }
        let mut loops: BTreeMap<usize, u32> = BTreeMap::new();
        for (i, rec) in edges.iter().enumerate() {
            if rec.phantom {
                if rec.init != rec.term || !anchors.contains_key(&rec.init) {
                    return Err(GraphError::StrayPhantom(i));
                }
                *loops.entry(rec.init).or_default() += 1;
            }
        }
        for (&v, a) in &anchors {
            let have = loops.get(&v).copied().unwrap_or(0);
            if have != a.genus {
                return Err(GraphError::AnchorGenus { vertex: v, genus: a.genus, loops: have });
            }
        }
        let g = Graph { vertex_count, edges, anchors };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// One vertex, `k` loops.
    pub fn rose(k: usize) -> Self {
        let edges: Vec<(usize, usize)> = vec![(0, 0); k];
        Graph::new(1, &edges).expect("rose is always valid")
    }

    /// Rose whose vertex is an anchor; the last `phantom` loops are phantom.
    pub fn anchored_rose(real: usize, phantom: usize) -> Self {
        let mut edges: Vec<EdgeRecord> =
            (0..real).map(|_| EdgeRecord { init: 0, term: 0, phantom: false }).collect();
        edges.extend((0..phantom).map(|_| EdgeRecord { init: 0, term: 0, phantom: true }));
        let mut anchors = BTreeMap::new();
        anchors.insert(0, Anchor { genus: phantom as u32, tag: 0 });
        Graph::from_parts(1, edges, anchors).expect("anchored rose is always valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Unoriented edges, phantom loops included.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> &EdgeRecord {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn is_phantom(&self, e: usize) -> bool {
        self.edges[e].phantom
    }

    /// Indices of non-phantom edges, ascending.
    pub fn real_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| !self.edges[e].phantom).collect()
    }

    pub fn real_edge_count(&self) -> usize {
        self.edges.iter().filter(|r| !r.phantom).count()
    }

    pub fn anchors(&self) -> &BTreeMap<usize, Anchor> {
        &self.anchors
    }

    pub fn is_anchor(&self, v: usize) -> bool {
        self.anchors.contains_key(&v)
    }

    pub fn has_anchors(&self) -> bool {
        !self.anchors.is_empty()
    }

    pub fn init(&self, d: DirEdge) -> usize {
        let r = &self.edges[d.edge()];
        if d.is_reversed() {
            r.term
        } else {
            r.init
        }
    }

    pub fn term(&self, d: DirEdge) -> usize {
        self.init(d.reverse())
    }

    /// `|real edges| - |vertices| + 1 + sum of anchor genera`.
    pub fn rank(&self) -> i64 {
        let genus: i64 = self.anchors.values().map(|a| a.genus as i64).sum();
        self.real_edge_count() as i64 - self.vertex_count as i64 + 1 + genus
    }

    /// Rank of the fundamental group of the underlying 1-complex, phantom
    /// loops counted as ordinary loops.
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    /// All directions (outgoing directed edges) at `v`, ascending.
    pub fn directions_at(&self, v: usize) -> Vec<DirEdge> {
        let mut out = Vec::new();
        for (i, r) in self.edges.iter().enumerate() {
            if r.init == v {
                out.push(DirEdge::new(i, false));
            }
            if r.term == v {
                out.push(DirEdge::new(i, true));
            }
        }
        out
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|r| (r.init == v) as usize + (r.term == v) as usize)
            .sum()
    }

    /// All directions of the graph, ascending by id.
    pub fn all_directions(&self) -> Vec<DirEdge> {
        (0..2 * self.edges.len() as u32).map(DirEdge).collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.vertex_count];
        for r in &self.edges {
            adj[r.init].push(r.term);
            adj[r.term].push(r.init);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.vertex_count
    }

    /// Endpoint compatibility of `p`; if `start` is given the path must begin
    /// there (an empty path is then the trivial path at `start`).
    pub fn check_path(&self, p: &EdgePath, start: Option<usize>) -> Result<(), GraphError> {
        for d in p.steps() {
            if d.edge() >= self.edges.len() {
                return Err(GraphError::EdgeOutOfRange(d.edge()));
            }
        }
        if let (Some(s), Some(first)) = (start, p.first()) {
            if self.init(first) != s {
                return Err(GraphError::PathStart { expected: s });
            }
        }
        for (i, w) in p.steps().windows(2).enumerate() {
            if self.term(w[0]) != self.init(w[1]) {
                return Err(GraphError::MalformedPath { position: i + 1 });
            }
        }
        Ok(())
    }

    /// Checked free reduction.
    pub fn tighten(&self, p: &EdgePath) -> Result<EdgePath, GraphError> {
        self.check_path(p, None)?;
        Ok(p.tightened())
    }

    /// Endpoints of a nonempty path.
    pub fn path_endpoints(&self, p: &EdgePath) -> Option<(usize, usize)> {
        Some((self.init(p.first()?), self.term(p.last()?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(e: usize) -> DirEdge {
        DirEdge::positive(e)
    }

    #[test]
    fn involution() {
        for id in 0..20u32 {
            let x = DirEdge(id);
            assert_eq!(x.reverse().reverse(), x);
            assert_ne!(x.reverse(), x);
            assert_eq!(x.reverse().edge(), x.edge());
        }
    }

    #[test]
    fn cancellation_pair() {
        let p = EdgePath::new(vec![d(0), d(0).reverse()]);
        assert!(p.tightened().is_empty());
    }

    #[test]
    fn nested_cancellation() {
        // [a, b, b', a', c] -> [c] on the rose of rank 3
        let g = Graph::rose(3);
        let p = EdgePath::new(vec![d(0), d(1), d(1).reverse(), d(0).reverse(), d(2)]);
        assert_eq!(g.tighten(&p).unwrap(), EdgePath::single(d(2)));
    }

    #[test]
    fn malformed_path_rejected() {
        // two vertices joined by edges 0 and 1.
        let g = Graph::new(2, &[(0, 1), (0, 1)]).unwrap();
        let p = EdgePath::new(vec![d(0), d(1)]);
        assert_eq!(g.tighten(&p), Err(GraphError::MalformedPath { position: 1 }));
        let q = EdgePath::new(vec![d(0), d(1).reverse()]);
        assert!(g.tighten(&q).is_ok());
    }

    #[test]
    fn rank_and_valence() {
        let g = Graph::new(2, &[(0, 1), (0, 1), (1, 1)]).unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(g.valence(1), 4);
        assert_eq!(g.directions_at(0), vec![d(0), d(1)]);
        assert_eq!(Graph::rose(3).rank(), 3);
    }

    #[test]
    fn disconnected_rejected() {
        assert_eq!(Graph::new(2, &[(0, 0)]), Err(GraphError::Disconnected));
    }

    #[test]
    fn anchored_rank_counts_genus() {
        let g = Graph::anchored_rose(2, 1);
        assert_eq!(g.rank(), 3);
        assert_eq!(g.real_edges(), vec![0, 1]);
        let bad = Graph::from_parts(
            1,
            vec![EdgeRecord { init: 0, term: 0, phantom: true }],
            BTreeMap::new(),
        );
        assert_eq!(bad, Err(GraphError::StrayPhantom(0)));
    }
}
