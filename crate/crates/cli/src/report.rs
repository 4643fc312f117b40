//! Report structures. Field order here is the field order of the JSON
//! output, and the text renderings are derived from the same values.

use std::fmt::Write as _;

use serde::Serialize;
use traintrack_core::driver::{BackTrack, Certificate, Classification, MoveRecord, Outcome};
use traintrack_core::graph::{DirEdge, EdgePath};
use traintrack_core::map::GraphMap;
use traintrack_core::mapclass::{Adjustment, Plan, SlideLetter};
use traintrack_core::moves::Move;
use traintrack_core::spectra::{AlgebraicRoot, GrowthEstimate, PerronData, TransitionMatrix};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// `x` to 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.11}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaReport {
    pub value: String,
    pub char_poly: String,
    /// Rational bracket `(lo, hi]`, or `[v, v]` when exact.
    pub interval: [String; 2],
    pub exact: bool,
}

impl LambdaReport {
    pub fn new(root: &AlgebraicRoot, char_poly: String) -> Self {
        let (lo, hi) = root.interval();
        LambdaReport {
            value: sig12(root.to_f64()),
            char_poly,
            interval: [lo.to_string(), hi.to_string()],
            exact: root.is_exact(),
        }
    }

    fn text(&self) -> String {
        if self.exact {
            format!("{} (exact {}; char poly {})", self.value, self.interval[0], self.char_poly)
        } else {
            format!("{} in ({}, {}] (char poly {})", self.value, self.interval[0], self.interval[1], self.char_poly)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeReport {
    pub name: String,
    pub init: usize,
    pub term: usize,
    pub phantom: bool,
    pub image: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MapReport {
    pub vertices: usize,
    pub edges: Vec<EdgeReport>,
}

/// Names directed edges either after the input generators or as `e0`, ...
#[derive(Debug, Clone)]
pub struct Namer {
    names: Option<Vec<String>>,
}

impl Namer {
    /// Use `names` only if `f` still lives on the input rose.
    pub fn for_map(f: &GraphMap, input_rank: usize, names: &[String]) -> Self {
        let g = f.graph();
        let same = g.vertex_count() == 1 && g.edge_count() == input_rank && names.len() == input_rank;
        Namer { names: same.then(|| names.to_vec()) }
    }

    pub fn plain() -> Self {
        Namer { names: None }
    }

    pub fn edge(&self, e: usize) -> String {
        match &self.names {
            Some(n) => n[e].clone(),
            None => format!("e{e}"),
        }
    }

    pub fn dir(&self, d: DirEdge) -> String {
        format!("{}{}", self.edge(d.edge()), if d.is_reversed() { "'" } else { "" })
    }

    pub fn path(&self, p: &EdgePath) -> String {
        if p.is_empty() {
            return "1".into();
        }
        let parts: Vec<String> = p.steps().iter().map(|&d| self.dir(d)).collect();
        parts.join(" ")
    }
}

impl MapReport {
    pub fn new(f: &GraphMap, namer: &Namer) -> Self {
        let g = f.graph();
        let edges = (0..g.edge_count())
            .map(|e| {
                let rec = g.edge(e);
                EdgeReport {
                    name: namer.edge(e),
                    init: rec.init,
                    term: rec.term,
                    phantom: rec.phantom,
                    image: namer.path(&f.edge_images()[e]),
                }
            })
            .collect();
        MapReport { vertices: g.vertex_count(), edges }
    }

    fn text(&self, out: &mut String) {
        for e in &self.edges {
            let ph = if e.phantom { " phantom" } else { "" };
            let _ = writeln!(out, "  {} (v{} -> v{}{ph}) -> {}", e.name, e.init, e.term, e.image);
        }
    }
}

pub fn describe_move(m: &Move) -> String {
    let n = Namer::plain();
    match m {
        Move::Subdivide { edge, split } => format!("subdivide {} at {split}", n.dir(*edge)),
        Move::Fold { first, second } => format!("fold {} {}", n.dir(*first), n.dir(*second)),
        Move::PullTight => "pull_tight".into(),
        Move::ValenceOne { vertex } => format!("valence_one v{vertex}"),
        Move::ValenceTwo { vertex, collapsed } => format!("valence_two v{vertex} collapsing e{collapsed}"),
        Move::CollapseForest { edges } => {
            let es: Vec<String> = edges.iter().map(|e| format!("e{e}")).collect();
            format!("collapse_forest {}", es.join(" "))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MoveReport {
    pub step: usize,
    pub kind: &'static str,
    pub detail: String,
    pub lambda: Option<String>,
}

impl MoveReport {
    pub fn new(r: &MoveRecord) -> Self {
        MoveReport {
            step: r.step,
            kind: r.mv.name(),
            detail: describe_move(&r.mv),
            lambda: r.lambda.as_ref().map(|l| sig12(l.to_f64())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub holds: bool,
    pub depth: usize,
    pub gate_criterion: bool,
    /// `(edge, power)` of the first cancellation found.
    pub failure: Option<FailureReport>,
    pub back_tracking: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureReport {
    pub edge: String,
    pub power: usize,
}

impl CertificateReport {
    pub fn new(c: &Certificate, back: Option<&BackTrack>, namer: &Namer) -> Self {
        CertificateReport {
            holds: c.holds,
            depth: c.depth,
            gate_criterion: c.gate_criterion,
            failure: c.failure.map(|(e, k)| FailureReport { edge: namer.edge(e), power: k }),
            back_tracking: back.map(|b| describe_back_track(b, namer)),
        }
    }

    pub fn text(&self) -> String {
        let mut s = format!(
            "{} to depth {} (gate criterion {})",
            if self.holds { "holds" } else { "fails" },
            self.depth,
            if self.gate_criterion { "met" } else { "not met" }
        );
        if let Some(f) = &self.failure {
            let _ = write!(s, "; {} cancels under f^{}", f.edge, f.power);
        }
        if let Some(b) = &self.back_tracking {
            let _ = write!(s, "; {b}");
        }
        s
    }
}

pub fn describe_back_track(b: &BackTrack, namer: &Namer) -> String {
    match b {
        BackTrack::Cancellation { edge, power, position } => {
            format!("f^{power}({}) cancels at position {position}", namer.edge(*edge))
        }
        BackTrack::IllegalTurn { edge, position, first, second } => format!(
            "f({}) crosses the illegal turn {{{}, {}}} at position {position}",
            namer.edge(*edge),
            namer.dir(*first),
            namer.dir(*second)
        ),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Flags {
    pub nonunique_eigenvector: bool,
    pub anchored_model: Option<&'static str>,
    pub twist_action: Option<&'static str>,
}

impl Flags {
    fn text(&self) -> Option<String> {
        let mut parts = Vec::new();
        if self.nonunique_eigenvector {
            parts.push("nonunique_eigenvector".to_string());
        }
        if let Some(a) = self.anchored_model {
            parts.push(format!("anchored_model: {a}"));
        }
        if let Some(t) = self.twist_action {
            parts.push(format!("twist_action: {t}"));
        }
        (!parts.is_empty()).then(|| parts.join(", "))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub tag: &'static str,
    pub period: Option<usize>,
    pub witness: Option<Vec<String>>,
    pub block: Option<Vec<Vec<u64>>>,
    pub lambda: LambdaReport,
    pub eigenvector: Vec<f64>,
    pub certificate: Option<CertificateReport>,
    pub representative: MapReport,
    pub move_log: Vec<MoveReport>,
    pub twists: Option<Vec<u8>>,
    pub flags: Flags,
}

impl ClassifyReport {
    pub fn new(c: &Classification, namer: &Namer, twists: Option<Vec<u8>>) -> Self {
        let perron = c.outcome.perron();
        let (period, witness, block, certificate) = match &c.outcome {
            Outcome::Periodic { period, .. } => (Some(*period), None, None, None),
            Outcome::Reducible { witness, block, .. } => {
                (None, Some(witness.iter().map(|&e| namer.edge(e)).collect()), Some(block.rows().to_vec()), None)
            }
            Outcome::TrainTrackGeneric { certificate, .. } => {
                (None, None, None, Some(CertificateReport::new(certificate, None, namer)))
            }
        };
        let twisted = twists.as_ref().is_some_and(|t| t.iter().any(|&b| b != 0));
        ClassifyReport {
            tag: c.outcome.kind(),
            period,
            witness,
            block,
            lambda: LambdaReport::new(&perron.root, perron.char_poly.to_string()),
            eigenvector: perron.eigenvector.clone(),
            certificate,
            representative: MapReport::new(&c.map, namer),
            move_log: c.move_log.iter().map(MoveReport::new).collect(),
            twists,
            flags: Flags {
                nonunique_eigenvector: perron.nonunique_eigenvector,
                anchored_model: c.anchored_model.then_some("approximate"),
                twist_action: twisted.then_some("assumed_trivial"),
            },
        }
    }

    pub fn text(&self, out: &mut String) {
        let _ = writeln!(out, "tag: {}", self.tag);
        if let Some(p) = self.period {
            let _ = writeln!(out, "period: {p}");
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "invariant subgraph: {}", w.join(" "));
        }
        let _ = writeln!(out, "lambda: {}", self.lambda.text());
        let _ = writeln!(out, "eigenvector: {}", floats(&self.eigenvector));
        if let Some(c) = &self.certificate {
            let _ = writeln!(out, "certificate: {}", c.text());
        }
        let _ = writeln!(out, "representative: {} vertices", self.representative.vertices);
        self.representative.text(out);
        let _ = writeln!(out, "moves: {}", self.move_log.len());
        for m in &self.move_log {
            let l = m.lambda.as_deref().unwrap_or("-");
            let _ = writeln!(out, "  {:>3}. {} (lambda {l})", m.step, m.detail);
        }
        if let Some(t) = &self.twists {
            let bits: Vec<String> = t.iter().map(u8::to_string).collect();
            let _ = writeln!(out, "twists: {}", bits.join(" "));
        }
        if let Some(f) = self.flags.text() {
            let _ = writeln!(out, "flags: {f}");
        }
    }
}

fn floats(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| sig12(x)).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Debug, Clone, Serialize)]
pub struct PerronReport {
    pub edges: Vec<String>,
    pub matrix: Vec<Vec<u64>>,
    pub irreducible: bool,
    pub lambda: LambdaReport,
    pub eigenvector: Vec<f64>,
    pub switch_residual: f64,
    pub flags: Flags,
}

impl PerronReport {
    pub fn new(m: &TransitionMatrix, d: &PerronData, residual: f64, namer: &Namer, anchored: bool) -> Self {
        PerronReport {
            edges: m.edges().iter().map(|&e| namer.edge(e)).collect(),
            matrix: m.rows().to_vec(),
            irreducible: !d.nonunique_eigenvector,
            lambda: LambdaReport::new(&d.root, d.char_poly.to_string()),
            eigenvector: d.eigenvector.clone(),
            switch_residual: residual,
            flags: Flags {
                nonunique_eigenvector: d.nonunique_eigenvector,
                anchored_model: anchored.then_some("approximate"),
                twist_action: None,
            },
        }
    }

    pub fn text(&self, out: &mut String) {
        let _ = writeln!(out, "edges: {}", self.edges.join(" "));
        let _ = writeln!(out, "matrix:");
        for r in &self.matrix {
            let cells: Vec<String> = r.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "  {}", cells.join(" "));
        }
        let _ = writeln!(out, "irreducible: {}", self.irreducible);
        let _ = writeln!(out, "lambda: {}", self.lambda.text());
        let _ = writeln!(out, "eigenvector: {}", floats(&self.eigenvector));
        let _ = writeln!(out, "switch residual: {:.3e}", self.switch_residual);
        if let Some(f) = self.flags.text() {
            let _ = writeln!(out, "flags: {f}");
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub total: String,
    /// Per-edge lengths, decimal strings since they may exceed 2^53.
    pub lengths: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub tag: &'static str,
    pub edges: Vec<String>,
    pub rows: Vec<GrowthRow>,
    pub slope: String,
    pub log_lambda: String,
    pub lambda: LambdaReport,
}

impl GrowthReport {
    pub fn new(c: &Classification, g: &GrowthEstimate, namer: &Namer) -> Self {
        let perron = c.outcome.perron();
        let rows = g
            .lengths
            .iter()
            .enumerate()
            .map(|(i, ls)| GrowthRow {
                n: g.n_min + i,
                total: ls.iter().sum::<u128>().to_string(),
                lengths: ls.iter().map(u128::to_string).collect(),
            })
            .collect();
        GrowthReport {
            tag: c.outcome.kind(),
            edges: g.edges.iter().map(|&e| namer.edge(e)).collect(),
            rows,
            slope: sig12(g.slope),
            log_lambda: sig12(perron.lambda.ln()),
            lambda: LambdaReport::new(&perron.root, perron.char_poly.to_string()),
        }
    }

    pub fn text(&self, out: &mut String) {
        let _ = writeln!(out, "tag: {}", self.tag);
        let _ = writeln!(out, "lambda: {}", self.lambda.text());
        let _ = writeln!(out, "{:>4}  {:>24}  {}", "n", "total", self.edges.join(" "));
        for r in &self.rows {
            let _ = writeln!(out, "{:>4}  {:>24}  {}", r.n, r.total, r.lengths.join(" "));
        }
        let _ = writeln!(out, "slope: {}", self.slope);
        let _ = writeln!(out, "log lambda: {}", self.log_lambda);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanStepReport {
    pub case: &'static str,
    pub terminal: bool,
    pub targets: Vec<String>,
    pub action: String,
    pub citation: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdjustReport {
    pub h: Vec<String>,
    pub g_perm_is_identity: bool,
    pub residue: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub steps: Vec<PlanStepReport>,
    pub adjust: Option<AdjustReport>,
}

impl PlanReport {
    pub fn new(p: &Plan, adjust: Option<&Adjustment>) -> Self {
        PlanReport {
            steps: p
                .steps
                .iter()
                .map(|s| PlanStepReport {
                    case: s.case.as_str(),
                    terminal: s.terminal,
                    targets: s.targets.clone(),
                    action: s.action.clone(),
                    citation: s.citation.clone(),
                })
                .collect(),
            adjust: adjust.map(|a| AdjustReport {
                h: a.h.letters.iter().map(SlideLetter::to_string).collect(),
                g_perm_is_identity: a.g_perm.is_identity(),
                residue: a.residue.clone(),
            }),
        }
    }

    pub fn text(&self, out: &mut String) {
        for (i, s) in self.steps.iter().enumerate() {
            let t = if s.terminal { " terminal" } else { "" };
            let _ = writeln!(out, "{}. [{}]{t} {}: {} ({})", i + 1, s.case, s.targets.join(","), s.action, s.citation);
        }
        if let Some(a) = &self.adjust {
            let h = if a.h.is_empty() { "1".to_string() } else { a.h.join(" ") };
            let _ = writeln!(out, "adjusting word h: {h}");
            let _ = writeln!(out, "h o f fixes every summand: {}", a.g_perm_is_identity);
            let _ = writeln!(out, "residue: {}", a.residue);
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComposeReport {
    pub rank: usize,
    pub images: Vec<String>,
    pub twists: Option<Vec<u8>>,
    pub document: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub certificate: CertificateReport,
    pub flags: Flags,
}

/// One processed input.
#[derive(Debug, Clone, Serialize)]
pub struct Entry<T: Serialize> {
    pub source: String,
    pub status: &'static str,
    pub result: Option<T>,
    pub error: Option<CliError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl<T: Serialize> Entry<T> {
    pub fn new(source: String, r: Result<T, CliError>, timing_ms: Option<f64>) -> Self {
        match r {
            Ok(t) => Entry { source, status: "ok", result: Some(t), error: None, timing_ms },
            Err(e) => Entry { source, status: "error", result: None, error: Some(e), timing_ms },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T: Serialize> {
    pub format_version: u32,
    pub command: &'static str,
    pub reports: Vec<Entry<T>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig12(1.618033988749895), "1.61803398875");
        assert_eq!(sig12(1.0), "1.00000000000");
        assert_eq!(sig12(12.5), "12.5000000000");
        assert_eq!(sig12(0.5), "0.500000000000");
        assert_eq!(sig12(0.0), "0.00000000000");
    }
}
