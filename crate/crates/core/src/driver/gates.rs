//! Gate structure of a tight map and the finite back-tracking certificates
//! built on it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DirEdge, EdgePath};
use crate::map::GraphMap;
use crate::spectra::growth::{path_turns, turn, Turn, TurnCountedWord, MATERIALIZE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("edge {0} has a degenerate image")]
pub struct DegenerateImage(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateStructure {
    /// First step of the image of each direction, indexed by `DirEdge::index`.
    derivative: Vec<DirEdge>,
    gate_of: Vec<usize>,
    /// Gates at each vertex, directions sorted.
    gates: Vec<Vec<Vec<DirEdge>>>,
    illegal: BTreeSet<Turn>,
}

fn derivative_of(f: &GraphMap) -> Result<Vec<DirEdge>, DegenerateImage> {
    f.graph()
        .all_directions()
        .into_iter()
        .map(|d| f.image(d).first().ok_or(DegenerateImage(d.edge())))
        .collect()
}

pub fn gates(f: &GraphMap) -> Result<GateStructure, DegenerateImage> {
    let g = f.graph();
    let derivative = derivative_of(f)?;
    let dirs = g.all_directions();
    // two directions share a gate iff their iterates agree after |D| steps
    let mut eventual: Vec<DirEdge> = dirs.clone();
    for _ in 0..dirs.len() {
        eventual = eventual.iter().map(|d| derivative[d.index()]).collect();
    }
    let mut gate_ids: BTreeMap<(usize, DirEdge), usize> = BTreeMap::new();
    let mut gate_of = vec![0; dirs.len()];
    let mut gates: Vec<Vec<Vec<DirEdge>>> = vec![Vec::new(); g.vertex_count()];
    let mut local: Vec<BTreeMap<DirEdge, usize>> = vec![BTreeMap::new(); g.vertex_count()];
    for (i, &d) in dirs.iter().enumerate() {
        let v = g.init(d);
        let next = gate_ids.len();
        let id = *gate_ids.entry((v, eventual[i])).or_insert(next);
        gate_of[d.index()] = id;
        let slot = local[v].len();
        let k = *local[v].entry(eventual[i]).or_insert(slot);
        if k == gates[v].len() {
            gates[v].push(Vec::new());
        }
        gates[v][k].push(d);
    }
    for list in gates.iter_mut() {
        for gate in list.iter_mut() {
            gate.sort();
        }
        list.sort();
    }
    let mut illegal = BTreeSet::new();
    for list in &gates {
        for gate in list {
            for (i, &a) in gate.iter().enumerate() {
                for &b in &gate[i + 1..] {
                    illegal.insert(turn(a, b));
                }
            }
        }
    }
    Ok(GateStructure { derivative, gate_of, gates, illegal })
}

impl GateStructure {
    pub fn derivative(&self, d: DirEdge) -> DirEdge {
        self.derivative[d.index()]
    }

    pub fn gates_at(&self, v: usize) -> &[Vec<DirEdge>] {
        &self.gates[v]
    }

    pub fn gate_count(&self) -> usize {
        self.gates.iter().map(Vec::len).sum()
    }

    pub fn same_gate(&self, a: DirEdge, b: DirEdge) -> bool {
        self.gate_of[a.index()] == self.gate_of[b.index()]
    }

    pub fn illegal_turns(&self) -> &BTreeSet<Turn> {
        &self.illegal
    }

    pub fn is_illegal(&self, t: Turn) -> bool {
        self.illegal.contains(&t)
    }

    /// Smallest `k >= 1` with `Df^k(a) = Df^k(b)`, for an illegal turn.
    pub fn depth(&self, (a, b): Turn) -> Option<usize> {
        let (mut x, mut y) = (a, b);
        for k in 1..=self.derivative.len() {
            x = self.derivative(x);
            y = self.derivative(y);
            if x == y {
                return Some(k);
            }
        }
        None
    }

    /// `(edge, position, turn)` for every illegal turn crossed by the image of
    /// a real edge; `position` is the index of the step that starts the turn.
    pub fn crossings(&self, f: &GraphMap) -> Vec<(usize, usize, Turn)> {
        let mut out = Vec::new();
        for e in f.graph().real_edges() {
            for (pos, t) in path_turns(&f.edge_images()[e]).enumerate() {
                if self.is_illegal(t) {
                    out.push((e, pos, t));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackTrack {
    /// Tightening `f^power(edge)` cancels at `position` of the untightened
    /// concatenation.
    Cancellation { edge: usize, power: usize, position: usize },
    /// The image of `edge` crosses an illegal turn at `position`.
    IllegalTurn { edge: usize, position: usize, first: DirEdge, second: DirEdge },
}

fn first_cancellation(p: &EdgePath) -> Option<usize> {
    p.steps().windows(2).position(|w| w[1] == w[0].reverse())
}

/// A back-tracking witness, or `None` when the gate criterion certifies
/// that no iterate ever cancels.
pub fn has_back_tracking(f: &GraphMap, depth: usize) -> Option<BackTrack> {
    for e in f.graph().real_edges() {
        if let Some(position) = first_cancellation(&f.edge_images()[e]) {
            return Some(BackTrack::Cancellation { edge: e, power: 1, position });
        }
    }
    let gs = match gates(f) {
        Ok(gs) => gs,
        Err(DegenerateImage(e)) => {
            return Some(BackTrack::Cancellation { edge: e, power: 1, position: 0 });
        }
    };
    let crossings = gs.crossings(f);
    let &(edge, position, (first, second)) = crossings.first()?;
    for k in 2..=depth {
        for e in f.graph().real_edges() {
            let mut w = EdgePath::single(DirEdge::positive(e));
            for _ in 1..k {
                w = f.apply_raw(&w).tightened();
                if w.len() > MATERIALIZE_CAP {
                    break;
                }
            }
            if w.len() > MATERIALIZE_CAP {
                continue;
            }
            if let Some(position) = first_cancellation(&f.apply_raw(&w)) {
                return Some(BackTrack::Cancellation { edge: e, power: k, position });
            }
        }
    }
    Some(BackTrack::IllegalTurn { edge, position, first, second })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub holds: bool,
    pub depth: usize,
    /// Smallest power, then smallest edge, whose image cancels.
    pub failure: Option<(usize, usize)>,
    pub gate_criterion: bool,
}

/// Checks that `f^k(e)` needs no tightening for `k <= n`, and that no image
/// crosses an illegal turn.
pub fn certify_train_track(f: &GraphMap, n: usize) -> Certificate {
    let gate_criterion = gates(f).map(|gs| gs.crossings(f).is_empty()).unwrap_or(false);
    let ec = f.graph().edge_count();
    let edges = f.graph().real_edges();
    let mut failure = None;
    if !f.is_tight() || !f.degenerate_edges().is_empty() {
        let e = edges
            .iter()
            .copied()
            .find(|&e| !f.edge_images()[e].is_reduced() || f.edge_images()[e].is_empty())
            .unwrap_or(0);
        failure = Some((e, 1));
    } else {
        let mut words: Vec<TurnCountedWord> = edges.iter().map(|&e| TurnCountedWord::edge(e, ec)).collect();
        'outer: for k in 1..=n {
            for (i, w) in words.iter_mut().enumerate() {
                let cancels = w.turns().keys().any(|&(a, b)| f.image(a).first() == f.image(b).first());
                if cancels {
                    failure = Some((edges[i], k));
                    break 'outer;
                }
                match w.apply(f) {
                    Ok(next) => *w = next,
                    Err(_) => {
                        failure = Some((edges[i], k));
                        break 'outer;
                    }
                }
            }
        }
    }
    Certificate { holds: failure.is_none() && gate_criterion, depth: n, failure, gate_criterion }
}

/// Order of the permutation of directed real edges induced by a graph
/// automorphism.
pub fn automorphism_order(f: &GraphMap) -> Option<usize> {
    if !f.is_graph_automorphism() {
        return None;
    }
    let g = f.graph();
    let mut order = 1usize;
    let mut seen = BTreeSet::new();
    for e in g.real_edges() {
        let start = DirEdge::positive(e);
        if seen.contains(&start) {
            continue;
        }
        let mut len = 0;
        let mut d = start;
        loop {
            seen.insert(d);
            d = f.image(d).steps()[0];
            len += 1;
            if d == start {
                break;
            }
        }
        order = num_integer::lcm(order, len);
    }
    Some(order)
}

/// Smallest `k <= bound` with `f^k` the identity on edges after tightening.
pub fn periodic_order(f: &GraphMap, bound: usize) -> Option<usize> {
    if let Some(k) = automorphism_order(f) {
        // phantom images and vertices follow along only for honest automorphisms
        return (k <= bound && f.iterate(k).ok()?.tightened().is_identity()).then_some(k);
    }
    let mut g = f.tightened();
    for k in 1..=bound {
        if g.is_identity() {
            return Some(k);
        }
        if g.edge_images().iter().map(EdgePath::len).sum::<usize>() > MATERIALIZE_CAP {
            return None;
        }
        g = f.compose(&g).ok()?;
    }
    None
}
