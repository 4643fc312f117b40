use std::cmp::Ordering;

use thiserror::Error;

use crate::driver::gates::{automorphism_order, certify_train_track, gates, Certificate};
use crate::graph::DirEdge;
use crate::map::GraphMap;
use crate::moves::{
    collapse_invariant_forest, find_invariant_forests, fold, pull_tight_steps, valence_one_homotopy,
    valence_two_homotopy_collapsing, Move, MoveError,
};
use crate::spectra::{
    is_irreducible, perron, transition_matrix, untightened_matrix, AlgebraicRoot, PerronData,
    SpectraError, TransitionMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub max_moves: usize,
    pub tol: f64,
    pub certificate_depth: usize,
    /// Accept graphs with anchors.
    pub anchored: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { max_moves: 200, tol: 1e-12, certificate_depth: 8, anchored: false }
    }
}

#[derive(Debug, Clone)]
pub struct MoveRecord {
    pub step: usize,
    pub mv: Move,
    /// Spectral radius of the untightened counts after the move; `None` when
    /// every count is zero.
    pub lambda: Option<AlgebraicRoot>,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Periodic { period: usize, perron: PerronData },
    Reducible { witness: Vec<usize>, block: TransitionMatrix, perron: PerronData },
    TrainTrackGeneric { perron: PerronData, certificate: Certificate },
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Periodic { .. } => "periodic",
            Outcome::Reducible { .. } => "reducible",
            Outcome::TrainTrackGeneric { .. } => "train_track_generic",
        }
    }

    pub fn perron(&self) -> &PerronData {
        match self {
            Outcome::Periodic { perron, .. }
            | Outcome::Reducible { perron, .. }
            | Outcome::TrainTrackGeneric { perron, .. } => perron,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub outcome: Outcome,
    pub move_log: Vec<MoveRecord>,
    /// The map the outcome describes.
    pub map: GraphMap,
    pub anchored_model: bool,
}

#[derive(Debug, Clone, Error)]
pub enum ClassifyError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("move budget of {max_moves} exhausted")]
    Budget { max_moves: usize, map: Box<GraphMap>, move_log: Vec<MoveRecord> },
    #[error("illegal turns remain but none can be folded")]
    Stuck { map: Box<GraphMap>, move_log: Vec<MoveRecord> },
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

struct Run {
    opts: ClassifyOptions,
    log: Vec<MoveRecord>,
    cur: GraphMap,
}

/// Largest real root of the untightened count matrix.
pub fn untightened_lambda(f: &GraphMap, tol: f64) -> Option<AlgebraicRoot> {
    let m = untightened_matrix(f);
    perron(&m, tol).ok().map(|d| d.root)
}

impl Run {
    fn record(&mut self, mv: Move, map: GraphMap) -> Result<(), ClassifyError> {
        if self.log.len() >= self.opts.max_moves {
            return Err(ClassifyError::Budget {
                max_moves: self.opts.max_moves,
                map: Box::new(self.cur.clone()),
                move_log: self.log.clone(),
            });
        }
        debug_assert_eq!(map.graph().rank(), self.cur.graph().rank());
        let lambda = untightened_lambda(&map, self.opts.tol);
        self.log.push(MoveRecord { step: self.log.len(), mv, lambda });
        self.cur = map;
        Ok(())
    }

    fn current_lambda(&self) -> Option<AlgebraicRoot> {
        untightened_lambda(&self.cur, self.opts.tol)
    }

    /// Tighten and collapse until no such move applies; true if anything
    /// changed.
    fn clean(&mut self) -> Result<bool, ClassifyError> {
        if !self.cur.is_tight() || !self.cur.degenerate_edges().is_empty() {
            for (mv, map) in pull_tight_steps(&self.cur)? {
                self.record(mv, map)?;
            }
            return Ok(true);
        }
        if let Some(forest) = find_invariant_forests(&self.cur).into_iter().next() {
            let map = collapse_invariant_forest(&self.cur, &forest)?;
            self.record(Move::CollapseForest { edges: forest.into_iter().collect() }, map)?;
            return Ok(true);
        }
        let g = self.cur.graph();
        if let Some(v) = (0..g.vertex_count()).find(|&v| !g.is_anchor(v) && g.valence(v) == 1) {
            let map = valence_one_homotopy(&self.cur, v)?;
            self.record(Move::ValenceOne { vertex: v }, map)?;
            return Ok(true);
        }
        Ok(false)
    }

    /// Valence-two homotopy that does not raise the growth rate, choosing
    /// the smallest resulting rate and then the smallest parameters.
    fn try_valence_two(&mut self) -> Result<bool, ClassifyError> {
        let Some(before) = self.current_lambda() else { return Ok(false) };
        let g = self.cur.graph();
        let mut best: Option<(AlgebraicRoot, usize, usize, GraphMap)> = None;
        for v in 0..g.vertex_count() {
            if g.is_anchor(v) || g.valence(v) != 2 {
                continue;
            }
            let dirs = g.directions_at(v);
            if dirs[0].edge() == dirs[1].edge() {
                continue;
            }
            let mut edges = [dirs[0].edge(), dirs[1].edge()];
            edges.sort_unstable();
            for e in edges {
                let Ok(map) = valence_two_homotopy_collapsing(&self.cur, v, e) else { continue };
                let Some(l) = untightened_lambda(&map.tightened(), self.opts.tol) else { continue };
                if l.cmp_exact(&before) == Ordering::Greater {
                    continue;
                }
                let better = best.as_ref().is_none_or(|(b, ..)| l.cmp_exact(b) == Ordering::Less);
                if better {
                    best = Some((l, v, e, map));
                }
            }
        }
        match best {
            Some((_, vertex, collapsed, map)) => {
                self.record(Move::ValenceTwo { vertex, collapsed }, map)?;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// Fold at the first crossed illegal turn, pulled back to the point
    /// where the two directions first share an image.
    fn fold_illegal(&mut self) -> Result<bool, ClassifyError> {
        let gs = gates(&self.cur).map_err(|e| MoveError::NotAForest(vec![e.0]))?;
        let g = self.cur.graph();
        for (_, _, (a, b)) in gs.crossings(&self.cur) {
            let Some(k) = gs.depth((a, b)) else { continue };
            let (mut x, mut y) = (a, b);
            for _ in 1..k {
                x = gs.derivative(x);
                y = gs.derivative(y);
            }
            if g.is_phantom(x.edge()) || g.is_phantom(y.edge()) {
                continue;
            }
            if g.is_anchor(g.term(x)) && g.is_anchor(g.term(y)) && g.term(x) != g.term(y) {
                continue;
            }
            let (x, y) = if x <= y { (x, y) } else { (y, x) };
            match fold(&self.cur, x, y) {
                Ok(out) => {
                    for (mv, map) in out.moves.into_iter().zip(out.maps) {
                        self.record(mv, map)?;
                    }
                    return Ok(true);
                }
                Err(MoveError::AnchorsJoined) | Err(MoveError::NotHomotopyEquivalence) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(false)
    }
}

/// Invariant edge set witnessing reducibility: the closure of the first
/// edge whose closure is proper.
fn reducibility_witness(m: &TransitionMatrix) -> Option<Vec<usize>> {
    (0..m.dim()).map(|j| m.closure(j)).find(|c| c.len() < m.dim())
}

pub fn classify(f: &GraphMap, opts: &ClassifyOptions) -> Result<Classification, ClassifyError> {
    let g = f.graph();
    if g.has_anchors() && !opts.anchored {
        return Err(ClassifyError::Precondition("graph has anchors; enable the anchored model".into()));
    }
    if g.rank() < 1 || g.real_edge_count() == 0 {
        return Err(ClassifyError::Precondition("rank must be at least 1".into()));
    }
    if !f.is_pi1_surjective() {
        return Err(ClassifyError::Precondition("map is not surjective on the fundamental group".into()));
    }
    let mut run = Run { opts: *opts, log: Vec::new(), cur: f.clone() };
    loop {
        if run.clean()? {
            continue;
        }
        let m = transition_matrix(&run.cur)?;
        if let Some(period) = automorphism_order(&run.cur) {
            let perron = perron(&m, opts.tol)?;
            return Ok(finish(run, Outcome::Periodic { period, perron }));
        }
        if !is_irreducible(&m) {
            let witness = reducibility_witness(&m).unwrap_or_default();
            let block = m.submatrix(&witness);
            let witness: Vec<usize> = witness.iter().map(|&i| m.edges()[i]).collect();
            let perron = perron(&m, opts.tol)?;
            return Ok(finish(run, Outcome::Reducible { witness, block, perron }));
        }
        let pd = perron(&m, opts.tol)?;
        let crossed = gates(&run.cur).map(|gs| !gs.crossings(&run.cur).is_empty()).unwrap_or(true);
        if crossed {
            if run.try_valence_two()? || run.fold_illegal()? {
                continue;
            }
            return Err(ClassifyError::Stuck { map: Box::new(run.cur), move_log: run.log });
        }
        let certificate = certify_train_track(&run.cur, opts.certificate_depth);
        debug_assert!(certificate.holds);
        return Ok(finish(run, Outcome::TrainTrackGeneric { perron: pd, certificate }));
    }
}

fn finish(run: Run, outcome: Outcome) -> Classification {
    Classification { outcome, move_log: run.log, map: run.cur, anchored_model: run.opts.anchored }
}

impl Classification {
    /// Directed edge permutation of a periodic outcome, by edge.
    pub fn period_permutation(&self) -> Option<Vec<DirEdge>> {
        match self.outcome {
            Outcome::Periodic { .. } => Some(
                self.map.graph().real_edges().into_iter().map(|e| self.map.edge_images()[e].steps()[0]).collect(),
            ),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::rose_map;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn run(ws: &[&str]) -> Classification {
        classify(&rose_map(ws).unwrap(), &ClassifyOptions::default()).unwrap()
    }

    #[test]
    fn periodic_examples() {
        let c = run(&["a", "b"]);
        assert!(matches!(c.outcome, Outcome::Periodic { period: 1, .. }));
        let c = run(&["b", "a"]);
        assert!(matches!(c.outcome, Outcome::Periodic { period: 2, .. }));
        assert!(c.outcome.perron().root.equals_rational(&BigRational::from_integer(BigInt::from(1))));
        assert!(c.move_log.is_empty());
    }

    #[test]
    fn fibonacci_is_generic() {
        let c = run(&["ab", "a"]);
        match &c.outcome {
            Outcome::TrainTrackGeneric { perron, certificate } => {
                assert!((perron.lambda - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-9);
                assert!(certificate.holds);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reducible_example() {
        let c = run(&["a", "ab"]);
        match &c.outcome {
            Outcome::Reducible { witness, block, .. } => {
                assert_eq!(witness, &vec![0]);
                assert_eq!(block.rows(), &[vec![1]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn folding_reaches_train_track() {
        let c = run(&["aca'", "a'", "a'b"]);
        assert!(matches!(c.outcome, Outcome::TrainTrackGeneric { .. }));
        assert!(c.move_log.iter().any(|r| matches!(r.mv, Move::Fold { .. })));
        let lambdas: Vec<_> = c.move_log.iter().filter_map(|r| r.lambda.clone()).collect();
        for w in lambdas.windows(2) {
            assert_ne!(w[1].cmp_exact(&w[0]), Ordering::Greater);
        }
    }

    #[test]
    fn preconditions() {
        let f = rose_map(&["aa", "b"]).unwrap();
        assert!(matches!(classify(&f, &ClassifyOptions::default()), Err(ClassifyError::Precondition(_))));
        let g = crate::graph::Graph::anchored_rose(2, 1);
        let f = GraphMap::identity(g);
        assert!(matches!(classify(&f, &ClassifyOptions::default()), Err(ClassifyError::Precondition(_))));
        let opts = ClassifyOptions { anchored: true, ..Default::default() };
        let c = classify(&f, &opts).unwrap();
        assert!(c.anchored_model);
        assert!(matches!(c.outcome, Outcome::Periodic { period: 1, .. }));
    }

    #[test]
    fn budget_is_reported() {
        let f = rose_map(&["aca'", "a'", "a'b"]).unwrap();
        let opts = ClassifyOptions { max_moves: 3, ..Default::default() };
        match classify(&f, &opts) {
            Err(ClassifyError::Budget { move_log, .. }) => assert_eq!(move_log.len(), 3),
            other => panic!("{other:?}"),
        }
    }
}
