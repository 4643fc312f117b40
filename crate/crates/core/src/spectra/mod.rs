//! Transition matrices and their Perron-Frobenius data.

pub mod growth;
pub mod poly;

use thiserror::Error;

use crate::map::GraphMap;
pub use growth::{growth_estimate, GrowthError, GrowthEstimate, TurnCountedWord};
pub use poly::{char_poly, AlgebraicRoot, Poly, RootError, Sturm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectraError {
    #[error("edge {0} has a degenerate image")]
    DegenerateImage(usize),
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("dimension mismatch: matrix {matrix}, vector {vector}")]
    Dimension { matrix: usize, vector: usize },
    #[error("spectral radius is not positive")]
    NonPositiveRoot,
    #[error("entry overflow")]
    Overflow,
}

/// `m[i][j]` counts occurrences, in either orientation, of real edge
/// `edges[i]` in the image of real edge `edges[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    edges: Vec<usize>,
    m: Vec<Vec<u64>>,
}

impl TransitionMatrix {
    pub fn from_rows(m: Vec<Vec<u64>>) -> Self {
        let n = m.len();
        assert!(m.iter().all(|r| r.len() == n), "matrix must be square");
        TransitionMatrix { edges: (0..n).collect(), m }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Edge id of each row and column.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.m[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().flatten().all(|&v| v == 0)
    }

    pub fn mul(&self, other: &TransitionMatrix) -> Result<TransitionMatrix, SpectraError> {
        let n = self.dim();
        let mut out = vec![vec![0u64; n]; n];
        for i in 0..n {
            for k in 0..n {
                if self.m[i][k] == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = self.m[i][k].checked_mul(other.m[k][j]).ok_or(SpectraError::Overflow)?;
                    out[i][j] = out[i][j].checked_add(v).ok_or(SpectraError::Overflow)?;
                }
            }
        }
        Ok(TransitionMatrix { edges: self.edges.clone(), m: out })
    }

    /// Column sums, i.e. image lengths when no cancellation occurs.
    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.dim()).map(|j| self.m.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn char_poly(&self) -> Poly {
        char_poly(&self.m)
    }

    /// Arc `j -> i` when `m[i][j] > 0`.
    fn successors(&self) -> Vec<Vec<usize>> {
        (0..self.dim())
            .map(|j| (0..self.dim()).filter(|&i| self.m[i][j] > 0).collect())
            .collect()
    }

    /// Indices reachable from `j` by at least zero arcs.
    pub fn closure(&self, j: usize) -> Vec<usize> {
        let succ = self.successors();
        let mut seen = vec![false; self.dim()];
        seen[j] = true;
        let mut stack = vec![j];
        while let Some(x) = stack.pop() {
            for &y in &succ[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        (0..self.dim()).filter(|&i| seen[i]).collect()
    }

    /// Strongly connected components in Tarjan order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let succ = self.successors();
        let n = self.dim();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comps = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            // iterative DFS: (vertex, next successor position)
            let mut work = vec![(root, 0usize)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = work.last_mut() {
                if *pos < succ[v].len() {
                    let w = succ[v][*pos];
                    *pos += 1;
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    work.pop();
                    if let Some(&(u, _)) = work.last() {
                        low[u] = low[u].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("nonempty");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }

    pub fn submatrix(&self, idx: &[usize]) -> TransitionMatrix {
        TransitionMatrix {
            edges: idx.iter().map(|&i| self.edges[i]).collect(),
            m: idx.iter().map(|&i| idx.iter().map(|&j| self.m[i][j]).collect()).collect(),
        }
    }
}

pub fn transition_matrix(f: &GraphMap) -> Result<TransitionMatrix, SpectraError> {
    counts_matrix(f, true)
}

/// Counts in the images as stored, without tightening; degenerate images
/// give zero columns.
pub fn untightened_matrix(f: &GraphMap) -> TransitionMatrix {
    counts_matrix(f, false).expect("no degeneracy check without tightening")
}

fn counts_matrix(f: &GraphMap, tighten: bool) -> Result<TransitionMatrix, SpectraError> {
    let g = f.graph();
    let edges = g.real_edges();
    let mut pos = vec![usize::MAX; g.edge_count()];
    for (i, &e) in edges.iter().enumerate() {
        pos[e] = i;
    }
    let n = edges.len();
    let mut m = vec![vec![0u64; n]; n];
    for (j, &e) in edges.iter().enumerate() {
        let img = if tighten { f.edge_images()[e].tightened() } else { f.edge_images()[e].clone() };
        if tighten && img.is_empty() {
            return Err(SpectraError::DegenerateImage(e));
        }
        for d in img.steps() {
            if pos[d.edge()] != usize::MAX {
                m[pos[d.edge()]][j] += 1;
            }
        }
    }
    Ok(TransitionMatrix { edges, m })
}

/// Strong connectivity of the arc digraph; the empty and `[0]` matrices are
/// not irreducible.
pub fn is_irreducible(m: &TransitionMatrix) -> bool {
    let n = m.dim();
    if n == 0 || (n == 1 && m.get(0, 0) == 0) {
        return false;
    }
    m.components().len() == 1
}

#[derive(Debug, Clone)]
pub struct PerronData {
    pub lambda: f64,
    pub root: AlgebraicRoot,
    /// Nonnegative, max entry 1.
    pub eigenvector: Vec<f64>,
    pub char_poly: Poly,
    pub nonunique_eigenvector: bool,
}

impl PerronData {
    pub fn isolating_interval(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        let (lo, hi) = self.root.interval();
        (lo.to_f64().unwrap_or(f64::NAN), hi.to_f64().unwrap_or(f64::NAN))
    }
}

fn power_hint(m: &TransitionMatrix) -> f64 {
    let n = m.dim();
    let mut x = vec![1.0f64; n];
    let mut lambda = 0.0;
    for _ in 0..2000 {
        // M + I keeps the iteration from oscillating on periodic matrices
        let mut y: Vec<f64> = (0..n)
            .map(|i| x[i] + (0..n).map(|j| m.get(i, j) as f64 * x[j]).sum::<f64>())
            .collect();
        let norm = y.iter().cloned().fold(0.0, f64::max);
        if norm == 0.0 {
            return 0.0;
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let delta = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        lambda = norm - 1.0;
        if delta < 1e-14 {
            break;
        }
    }
    lambda
}

/// Solve `a x = b` by partial pivoting; `None` when singular to working
/// precision.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c] == 0.0 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn normalize(x: &mut [f64]) -> bool {
    let (imax, _) = x
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap_or((0, &0.0));
    let s = x.get(imax).copied().unwrap_or(0.0);
    if s == 0.0 || !s.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= s);
    true
}

fn residual(m: &TransitionMatrix, lambda: f64, x: &[f64]) -> f64 {
    (0..m.dim())
        .map(|i| {
            let mx: f64 = (0..m.dim()).map(|j| m.get(i, j) as f64 * x[j]).sum();
            (mx - lambda * x[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Inverse iteration with the shift just above `lambda`.
fn eigenvector(m: &TransitionMatrix, lambda: f64, tol: f64) -> Vec<f64> {
    let n = m.dim();
    let mut x = vec![1.0; n];
    let mut best = (f64::INFINITY, x.clone());
    for shift in [1e-7, 1e-10, 1e-5] {
        let mu = lambda + shift * lambda.abs().max(1.0);
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| m.get(i, j) as f64 - if i == j { mu } else { 0.0 }).collect())
            .collect();
        x = vec![1.0; n];
        for _ in 0..60 {
            let Some(mut y) = solve(a.clone(), x.clone()) else { break };
            if !normalize(&mut y) {
                break;
            }
            x = y;
            let r = residual(m, lambda, &x);
            if r < best.0 {
                best = (r, x.clone());
            }
            if r <= tol * 1e-3 {
                return x;
            }
        }
    }
    best.1
}

/// Spectral radius certified by an isolating interval of its minimal
/// square-free factor, and an eigenvector by inverse iteration.
pub fn perron(m: &TransitionMatrix, tol: f64) -> Result<PerronData, SpectraError> {
    if m.dim() == 0 || m.is_zero() {
        return Err(SpectraError::ZeroMatrix);
    }
    let cp = m.char_poly();
    let hint = power_hint(m);
    let root = AlgebraicRoot::largest_root(&cp, Some(hint), tol)
        .expect("characteristic polynomial of a nonnegative matrix has a real root");
    // the float value is taken from a much narrower bracket than `tol`
    let mut fine = root.clone();
    fine.refine(tol.min(1e-14 * hint.max(1.0)));
    let lambda = fine.to_f64();
    let mut x = eigenvector(m, lambda, tol);
    // tiny negative noise from the solve
    for v in x.iter_mut() {
        if *v < 0.0 && *v > -tol {
            *v = 0.0;
        }
    }
    Ok(PerronData {
        lambda,
        root,
        eigenvector: x,
        char_poly: cp,
        nonunique_eigenvector: !is_irreducible(m),
    })
}

/// Sup norm of `M x - λ x`.
pub fn switch_check(m: &TransitionMatrix, data: &PerronData) -> Result<f64, SpectraError> {
    if data.eigenvector.len() != m.dim() {
        return Err(SpectraError::Dimension { matrix: m.dim(), vector: data.eigenvector.len() });
    }
    Ok(residual(m, data.lambda, &data.eigenvector))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSchedule {
    /// Weights of the edges themselves, the eigenvector.
    pub base: Vec<f64>,
    /// `sectors[t][i] = x_i / λ^(t+1)` for `t = 0..=t_max`.
    pub sectors: Vec<Vec<f64>>,
}

impl WeightSchedule {
    /// Sum of all listed weights.
    pub fn partial_sum(&self) -> f64 {
        self.base.iter().sum::<f64>() + self.sectors.iter().flatten().sum::<f64>()
    }
}

pub fn weight_schedule(data: &PerronData, t_max: usize) -> Result<WeightSchedule, SpectraError> {
    if data.lambda <= 0.0 {
        return Err(SpectraError::NonPositiveRoot);
    }
    let mut sectors = Vec::with_capacity(t_max + 1);
    let mut level = data.eigenvector.clone();
    for _ in 0..=t_max {
        level = level.iter().map(|v| v / data.lambda).collect();
        sectors.push(level.clone());
    }
    Ok(WeightSchedule { base: data.eigenvector.clone(), sectors })
}
