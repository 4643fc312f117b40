//! Lengths of iterated images without materializing long paths.
//!
//! A reduced path is summarized by its edge counts and the multiset of turns
//! it takes. If no turn is sent to a degenerate turn, the image of the path
//! is reduced and both summaries update linearly. Short paths are also kept
//! verbatim so cancellations there are handled exactly.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{DirEdge, EdgePath};
use crate::map::GraphMap;

/// Paths up to this many steps are stored explicitly.
pub const MATERIALIZE_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrowthError {
    #[error("need 1 <= n_min and n_min + 3 <= n_max, got {n_min}..{n_max}")]
    Range { n_min: usize, n_max: usize },
    #[error("edge {0} has a degenerate image")]
    Degenerate(usize),
    #[error("length overflow at iterate {n}")]
    Overflow { n: usize, partial: Vec<Vec<u128>> },
    #[error("cancellation beyond the explicit window at iterate {n} of edge {edge}")]
    Window { edge: usize, n: usize, partial: Vec<Vec<u128>> },
}

/// Unordered turn, smaller direction first.
pub type Turn = (DirEdge, DirEdge);

pub fn turn(a: DirEdge, b: DirEdge) -> Turn {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Turns taken inside a path.
pub fn path_turns(p: &EdgePath) -> impl Iterator<Item = Turn> + '_ {
    p.steps().windows(2).map(|w| turn(w[0].reverse(), w[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("count overflow")]
    Overflow,
    #[error("cancellation outside the explicit window")]
    Window,
    #[error("edge {0} has a degenerate image")]
    Degenerate(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnCountedWord {
    counts: Vec<u128>,
    turns: BTreeMap<Turn, u128>,
    word: Option<EdgePath>,
}

impl TurnCountedWord {
    pub fn from_path(p: &EdgePath, edge_count: usize) -> Self {
        let p = p.tightened();
        let mut counts = vec![0u128; edge_count];
        for d in p.steps() {
            counts[d.edge()] += 1;
        }
        let mut turns = BTreeMap::new();
        for t in path_turns(&p) {
            *turns.entry(t).or_insert(0) += 1;
        }
        TurnCountedWord { counts, turns, word: Some(p) }
    }

    pub fn edge(e: usize, edge_count: usize) -> Self {
        Self::from_path(&EdgePath::single(DirEdge::positive(e)), edge_count)
    }

    /// Occurrences of each unoriented edge.
    pub fn counts(&self) -> &[u128] {
        &self.counts
    }

    pub fn len(&self) -> u128 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn turns(&self) -> &BTreeMap<Turn, u128> {
        &self.turns
    }

    /// The path itself while it is short.
    pub fn word(&self) -> Option<&EdgePath> {
        self.word.as_ref()
    }

    /// Tightened image under a tight map.
    pub fn apply(&self, f: &GraphMap) -> Result<Self, StepError> {
        let n = f.graph().edge_count();
        if let Some(w) = &self.word {
            let img = f.apply_raw(w).tightened();
            if img.len() <= MATERIALIZE_CAP {
                return Ok(Self::from_path(&img, n));
            }
        }
        let first = |d: DirEdge| f.image(d).first();
        for (&(a, b), &c) in &self.turns {
            if c == 0 {
                continue;
            }
            match (first(a), first(b)) {
                (Some(x), Some(y)) if x != y => {}
                (None, _) => return Err(StepError::Degenerate(a.edge())),
                (_, None) => return Err(StepError::Degenerate(b.edge())),
                _ => return Err(StepError::Window),
            }
        }
        let mut counts = vec![0u128; n];
        let mut turns: BTreeMap<Turn, u128> = BTreeMap::new();
        let add = |slot: &mut u128, v: u128| -> Result<(), StepError> {
            *slot = slot.checked_add(v).ok_or(StepError::Overflow)?;
            Ok(())
        };
        for (e, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let img = &f.edge_images()[e];
            for d in img.steps() {
                add(&mut counts[d.edge()], c)?;
            }
            for t in path_turns(img) {
                add(turns.entry(t).or_insert(0), c)?;
            }
        }
        for (&(a, b), &c) in &self.turns {
            let t = turn(first(a).expect("checked"), first(b).expect("checked"));
            add(turns.entry(t).or_insert(0), c)?;
        }
        Ok(TurnCountedWord { counts, turns, word: None })
    }
}

/// Per-edge counts of `f^n(e)` for every real edge `e`.
pub fn iterate_counts(f: &GraphMap, n: usize) -> Result<Vec<TurnCountedWord>, StepError> {
    let f = f.tightened();
    let ec = f.graph().edge_count();
    f.graph()
        .real_edges()
        .into_iter()
        .map(|e| {
            let mut w = TurnCountedWord::edge(e, ec);
            for _ in 0..n {
                w = w.apply(&f)?;
            }
            Ok(w)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthEstimate {
    pub n_min: usize,
    pub n_max: usize,
    /// Least-squares slope of `ln Σ_e |f^n(e)|` against `n`.
    pub slope: f64,
    /// `lengths[k][i]` is the length of `f^(n_min + k)` applied to real edge `edges[i]`.
    pub lengths: Vec<Vec<u128>>,
    pub edges: Vec<usize>,
}

pub fn growth_estimate(f: &GraphMap, n_min: usize, n_max: usize) -> Result<GrowthEstimate, GrowthError> {
    if n_min < 1 || n_max < n_min + 3 {
        return Err(GrowthError::Range { n_min, n_max });
    }
    let f = f.tightened();
    let g = f.graph();
    if let Some(&e) = f.degenerate_edges().first() {
        return Err(GrowthError::Degenerate(e));
    }
    let edges = g.real_edges();
    let real_len = |w: &TurnCountedWord| -> u128 { edges.iter().map(|&e| w.counts()[e]).sum() };
    let mut words: Vec<TurnCountedWord> =
        edges.iter().map(|&e| TurnCountedWord::edge(e, g.edge_count())).collect();
    let mut lengths = Vec::new();
    for n in 1..=n_max {
        for (i, w) in words.iter_mut().enumerate() {
            *w = w.apply(&f).map_err(|err| match err {
                StepError::Overflow => GrowthError::Overflow { n, partial: lengths.clone() },
                StepError::Window => GrowthError::Window { edge: edges[i], n, partial: lengths.clone() },
                StepError::Degenerate(e) => GrowthError::Degenerate(e),
            })?;
        }
        if n >= n_min {
            lengths.push(words.iter().map(real_len).collect());
        }
    }
    let pts: Vec<(f64, f64)> = lengths
        .iter()
        .enumerate()
        .map(|(k, row)| ((n_min + k) as f64, (row.iter().sum::<u128>() as f64).ln()))
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(GrowthEstimate { n_min, n_max, slope: num / den, lengths, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::rose_map;
    use crate::spectra::transition_matrix;

    #[test]
    fn identity_has_zero_slope() {
        let g = growth_estimate(&rose_map(&["a", "b"]).unwrap(), 1, 6).unwrap();
        assert_eq!(g.slope, 0.0);
        assert!(g.lengths.iter().flatten().all(|&l| l == 1));
    }

    #[test]
    fn fibonacci_lengths_are_fibonacci_numbers() {
        let f = rose_map(&["ab", "a"]).unwrap();
        let g = growth_estimate(&f, 5, 15).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((g.slope - phi.ln()).abs() < 0.02 * phi.ln());
        // |f^n(a)| = F(n+2), |f^n(b)| = F(n+1)
        let fib = |k: usize| (0..k).fold((0u128, 1u128), |(a, b), _| (b, a + b)).0;
        for (k, row) in g.lengths.iter().enumerate() {
            let n = 5 + k;
            assert_eq!(row, &vec![fib(n + 2), fib(n + 1)]);
        }
    }

    #[test]
    fn counting_mode_matches_materialized() {
        // long enough to leave the explicit window
        let f = rose_map(&["abc", "a", "b"]).unwrap();
        let m = transition_matrix(&f).unwrap();
        let mut p = m.clone();
        let mut w = TurnCountedWord::edge(0, 3);
        for _ in 0..40 {
            w = w.apply(&f).unwrap();
        }
        for _ in 1..40 {
            p = p.mul(&m).unwrap();
        }
        assert!(w.word().is_none());
        let col: Vec<u128> = (0..3).map(|i| p.get(i, 0) as u128).collect();
        assert_eq!(w.counts(), &col[..]);
    }

    #[test]
    fn cancellation_beyond_window_is_reported() {
        // a' b crosses the turn {a, b}, which the Fibonacci map folds
        let f = rose_map(&["ab", "a"]).unwrap();
        let p = crate::map::parse_word("a'b", 2).unwrap();
        let mut w = TurnCountedWord::from_path(&p, 2);
        assert_eq!(w.apply(&f).unwrap().len(), 1);
        w.word = None;
        assert_eq!(w.apply(&f), Err(StepError::Window));
    }

    #[test]
    fn range_checked() {
        let f = rose_map(&["ab", "a"]).unwrap();
        assert!(matches!(growth_estimate(&f, 0, 5), Err(GrowthError::Range { .. })));
        assert!(matches!(growth_estimate(&f, 2, 4), Err(GrowthError::Range { .. })));
    }
}
