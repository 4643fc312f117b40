//! Stallings folding for finitely generated subgroups of free groups.
//!
//! Every edge of the folding graph carries, besides its letter, a word in the
//! subgroup generators such that reading any based loop gives both the
//! element it spells and an expression of that element in the generators.
//! Labels are kept consistent under folds by re-gauging at a non-base vertex.

use std::collections::BTreeMap;

use crate::graph::{DirEdge, EdgePath};
use crate::map::GraphMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("words do not form a basis of the free group")]
pub struct NotABasis;

#[derive(Debug, Clone)]
struct FoldEdge {
    from: usize,
    to: usize,
    letter: usize,
    label: EdgePath,
    alive: bool,
}

struct Folder {
    edges: Vec<FoldEdge>,
    incident: Vec<Vec<usize>>,
    alive_vertex: Vec<bool>,
    relation: bool,
}

const BASE: usize = 0;

fn inv(p: &EdgePath) -> EdgePath {
    p.reversed()
}

fn mul(a: &EdgePath, b: &EdgePath) -> EdgePath {
    a.concat(b).tightened()
}

impl Folder {
    fn new(words: &[EdgePath]) -> Self {
        let mut f = Folder {
            edges: Vec::new(),
            incident: vec![Vec::new()],
            alive_vertex: vec![true],
            relation: false,
        };
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() {
                // generator i maps to the identity
                f.relation = true;
                continue;
            }
            let gen = EdgePath::single(DirEdge::positive(i));
            let mut cur = BASE;
            for (j, &d) in w.steps().iter().enumerate() {
                let next = if j + 1 == w.len() { BASE } else { f.new_vertex() };
                let label = if j == 0 { gen.clone() } else { EdgePath::empty() };
                let (from, to, label) =
                    if d.is_reversed() { (next, cur, inv(&label)) } else { (cur, next, label) };
                f.add_edge(from, to, d.edge(), label);
                cur = next;
            }
        }
        f
    }

    fn new_vertex(&mut self) -> usize {
        self.incident.push(Vec::new());
        self.alive_vertex.push(true);
        self.incident.len() - 1
    }

    fn add_edge(&mut self, from: usize, to: usize, letter: usize, label: EdgePath) {
        let id = self.edges.len();
        self.edges.push(FoldEdge { from, to, letter, label, alive: true });
        self.incident[from].push(id);
        if to != from {
            self.incident[to].push(id);
        }
    }

    /// Edge ends at `u`: (edge, outgoing?) with outgoing meaning the edge is
    /// read forward when leaving `u`.
    fn ends_at(&self, u: usize) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for &e in &self.incident[u] {
            let fe = &self.edges[e];
            if !fe.alive {
                continue;
            }
            if fe.from == u {
                out.push((e, true));
            }
            if fe.to == u {
                out.push((e, false));
            }
        }
        out
    }

    fn traverse(&self, (e, fwd): (usize, bool)) -> (usize, EdgePath) {
        let fe = &self.edges[e];
        if fwd {
            (fe.to, fe.label.clone())
        } else {
            (fe.from, inv(&fe.label))
        }
    }

    fn gauge(&mut self, t: usize, g: &EdgePath) {
        let gi = inv(g);
        for &e in &self.incident[t].clone() {
            let fe = &mut self.edges[e];
            if !fe.alive {
                continue;
            }
            if fe.from == t {
                fe.label = mul(g, &fe.label);
            }
            if fe.to == t {
                fe.label = mul(&fe.label, &gi);
            }
        }
    }

    fn merge(&mut self, keep: usize, gone: usize) {
        let moved = std::mem::take(&mut self.incident[gone]);
        for &e in &moved {
            let fe = &mut self.edges[e];
            if fe.from == gone {
                fe.from = keep;
            }
            if fe.to == gone {
                fe.to = keep;
            }
        }
        for e in moved {
            if !self.incident[keep].contains(&e) {
                self.incident[keep].push(e);
            }
        }
        self.alive_vertex[gone] = false;
    }

    fn fold_once(&mut self, u: usize) -> Option<Vec<usize>> {
        let mut seen: BTreeMap<(usize, bool), (usize, bool)> = BTreeMap::new();
        for end in self.ends_at(u) {
            let key = (self.edges[end.0].letter, end.1);
            if let Some(&first) = seen.get(&key) {
                return Some(self.fold_pair(u, first, end));
            }
            seen.insert(key, end);
        }
        None
    }

    fn fold_pair(&mut self, u: usize, end1: (usize, bool), end2: (usize, bool)) -> Vec<usize> {
        let (t1, l1) = self.traverse(end1);
        let (t2, l2) = self.traverse(end2);
        if t1 == t2 {
            if l1 != l2 {
                self.relation = true;
            }
            self.kill(end2.0);
            return vec![u, t1];
        }
        if t2 != BASE && t2 != u {
            self.gauge(t2, &mul(&inv(&l1), &l2));
        } else if t1 != BASE && t1 != u {
            self.gauge(t1, &mul(&inv(&l2), &l1));
        } else if t2 == u {
            self.gauge(u, &mul(&inv(&l1), &l2));
        } else {
            self.gauge(u, &mul(&inv(&l2), &l1));
        }
        debug_assert_eq!(self.traverse(end1).1, self.traverse(end2).1);
        let (t1, _) = self.traverse(end1);
        let (t2, _) = self.traverse(end2);
        self.kill(end2.0);
        let (keep, gone) = if t2 == BASE { (t2, t1) } else { (t1, t2) };
        self.merge(keep, gone);
        vec![u, keep]
    }

    fn kill(&mut self, e: usize) {
        self.edges[e].alive = false;
    }

    fn fold_all(&mut self) {
        let mut work: Vec<usize> = (0..self.incident.len()).collect();
        while let Some(u) = work.pop() {
            if !self.alive_vertex[u] {
                continue;
            }
            if let Some(touched) = self.fold_once(u) {
                work.extend(touched);
            }
        }
    }

    /// Labels of the loops at the base if the folded graph is the rose of
    /// the given rank.
    fn rose_labels(&self, rank: usize) -> Option<Vec<EdgePath>> {
        let mut labels: Vec<Option<EdgePath>> = vec![None; rank];
        let mut count = 0;
        for fe in self.edges.iter().filter(|e| e.alive) {
            if fe.from != BASE || fe.to != BASE || fe.letter >= rank {
                return None;
            }
            if labels[fe.letter].is_some() {
                return None;
            }
            labels[fe.letter] = Some(fe.label.clone());
            count += 1;
        }
        if count != rank {
            return None;
        }
        labels.into_iter().collect()
    }
}

/// Whether `words` generate the free group of the given rank.
pub fn generates_free_group(words: &[EdgePath], rank: usize) -> bool {
    if rank == 0 {
        return true;
    }
    let mut f = Folder::new(words);
    f.fold_all();
    f.rose_labels(rank).is_some()
}

/// Given images `words[i]` of the generators under an automorphism of the
/// free group of rank `words.len()`, return the generator images of the
/// inverse automorphism.
pub fn inverse_basis(words: &[EdgePath]) -> Result<Vec<EdgePath>, NotABasis> {
    let rank = words.len();
    let mut f = Folder::new(words);
    f.fold_all();
    if f.relation {
        return Err(NotABasis);
    }
    f.rose_labels(rank).ok_or(NotABasis)
}

/// Letters of a path read as a word in the non-tree edges of a spanning tree.
fn spanning_tree_letters(f: &GraphMap) -> (Vec<Option<usize>>, Vec<EdgePath>) {
    let g = f.graph();
    let n = g.vertex_count();
    // BFS tree from vertex 0
    let mut parent_edge: Vec<Option<DirEdge>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut in_tree = vec![false; g.edge_count()];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for d in g.directions_at(v) {
            let w = g.term(d);
            if !seen[w] {
                seen[w] = true;
                in_tree[d.edge()] = true;
                parent_edge[w] = Some(d);
                queue.push_back(w);
            }
        }
    }
    let mut letter: Vec<Option<usize>> = vec![None; g.edge_count()];
    let mut next = 0;
    for e in 0..g.edge_count() {
        if !in_tree[e] {
            letter[e] = Some(next);
            next += 1;
        }
    }
    let tree_path = |mut v: usize| {
        let mut steps = Vec::new();
        while let Some(d) = parent_edge[v] {
            steps.push(d);
            v = g.init(d);
        }
        steps.reverse();
        EdgePath::new(steps)
    };
    let read = |p: &EdgePath| -> EdgePath {
        p.steps()
            .iter()
            .filter_map(|d| letter[d.edge()].map(|l| DirEdge::new(l, d.is_reversed())))
            .collect::<EdgePath>()
            .tightened()
    };
    let mut images = Vec::new();
    for e in 0..g.edge_count() {
        if in_tree[e] {
            continue;
        }
        let d = DirEdge::positive(e);
        let loop_path = tree_path(g.init(d))
            .concat(&EdgePath::single(d))
            .concat(&tree_path(g.term(d)).reversed());
        images.push(read(&f.apply_raw(&loop_path)));
    }
    (letter, images)
}

pub(crate) fn map_is_surjective(f: &GraphMap) -> bool {
    let (_, images) = spanning_tree_letters(f);
    generates_free_group(&images, f.graph().betti())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{parse_word, rose_map};

    fn words(ws: &[&str]) -> Vec<EdgePath> {
        ws.iter().map(|w| parse_word(w, ws.len()).unwrap()).collect()
    }

    #[test]
    fn fibonacci_inverse() {
        // a -> ab, b -> a; inverse a -> b, b -> b'a
        let inv = inverse_basis(&words(&["ab", "a"])).unwrap();
        assert_eq!(inv, words(&["b", "b'a"]));
    }

    #[test]
    fn non_basis_detected() {
        assert_eq!(inverse_basis(&words(&["aa", "b"])), Err(NotABasis));
        assert_eq!(inverse_basis(&words(&["a", "a"])), Err(NotABasis));
        assert!(!generates_free_group(&words(&["ab", "ba"]), 2));
    }

    #[test]
    fn inverse_composes_to_identity() {
        let cases: &[&[&str]] = &[&["ab", "a"], &["b", "c", "ab"], &["ab'", "ba'b", "cab"], &["a'", "ba"]];
        for ws in cases {
            let f = rose_map(ws).unwrap();
            let ginv = inverse_basis(f.edge_images()).unwrap();
            let g = crate::map::from_generator_images(&ginv).unwrap();
            assert!(f.compose(&g).unwrap().is_identity(), "{ws:?}");
            assert!(g.compose(&f).unwrap().is_identity(), "{ws:?}");
        }
    }

    #[test]
    fn surjectivity_on_theta_graph() {
        // theta graph: two vertices, three edges; identity is surjective
        let g = crate::graph::Graph::new(2, &[(0, 1), (0, 1), (0, 1)]).unwrap();
        let f = GraphMap::identity(g.clone());
        assert!(f.is_pi1_surjective());
        // collapse onto one loop: e0 -> e0, e1 -> e0, e2 -> e0 kills rank
        let e0 = EdgePath::single(DirEdge::positive(0));
        let h = GraphMap::new(g, vec![0, 1], vec![e0.clone(), e0.clone(), e0]).unwrap();
        assert!(!h.is_pi1_surjective());
    }
}
