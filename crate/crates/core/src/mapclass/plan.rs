//! Decision tree from a connected-sum description to an ordered list of
//! classification steps, one case tag per step.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::manifold::{ManifoldSpec, SpecError, Summand, SummandKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::I => "i",
            Case::Ii => "ii",
            Case::Iii => "iii",
            Case::Iv => "iv",
            Case::V => "v",
            Case::Vi => "vi",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub case: Case,
    /// Summand ids, or derived piece names of the form `id/piece`.
    pub targets: Vec<String>,
    pub terminal: bool,
    pub action: String,
    pub citation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    /// Summand ids that appear in a terminal step, with multiplicity.
    pub fn terminal_targets(&self) -> Vec<&str> {
        self.steps
            .iter()
            .filter(|s| s.terminal)
            .flat_map(|s| s.targets.iter().map(String::as_str))
            .collect()
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "{}. [{}]{} {}: {} ({})",
                i + 1,
                s.case,
                if s.terminal { " terminal" } else { "" },
                s.targets.join(","),
                s.action,
                s.citation
            )?;
        }
        Ok(())
    }
}

fn step(case: Case, targets: Vec<String>, terminal: bool, action: &str, citation: &str) -> PlanStep {
    PlanStep { case, targets, terminal, action: action.to_string(), citation: citation.to_string() }
}

fn ids(summands: &[&Summand]) -> Vec<String> {
    summands.iter().map(|s| s.id.clone()).collect()
}

/// Steps for a connected sum of sphere-body and handlebody summands.
fn mixed_steps(parts: &[&Summand], holes: u32, steps: &mut Vec<PlanStep>) {
    let targets = ids(parts);
    let handlebodies = parts.iter().filter(|s| s.kind == SummandKind::Handlebody).count();
    if handlebodies == 0 {
        let cap = if holes > 0 {
            format!("cap {holes} boundary sphere(s) with balls, leaving a sphere body of rank {}", parts.len())
        } else {
            format!("sphere body of rank {}; no boundary spheres to cap", parts.len())
        };
        steps.push(step(Case::Iii, targets.clone(), false, &cap, "Laudenbach sphere-twist kernel"));
        steps.push(step(
            Case::Iii,
            targets,
            true,
            "classify the induced outer automorphism of the free group by a train track representative",
            "Bestvina-Handel train tracks",
        ));
    } else if parts.len() == 1 {
        steps.push(step(
            Case::V,
            targets,
            true,
            "classify the handlebody automorphism as periodic, rigidly reducible or generic",
            "classification of handlebody automorphisms",
        ));
    } else {
        let pieces: Vec<String> = ["H", "Q", "Q'", "H'"].iter().map(|p| format!("mixed/{p}")).collect();
        steps.push(step(
            Case::Iv,
            targets.clone(),
            false,
            &format!(
                "cut along the canonical splitting surface into H and Q, then cut H into Q' and H'; pieces {}",
                pieces.join(", ")
            ),
            "canonical Heegaard splitting of a mixed body",
        ));
        steps.push(step(
            Case::V,
            targets,
            true,
            "classify the restrictions to Q, Q' and H' as compression body automorphisms",
            "train tracks for compression bodies",
        ));
    }
}

pub fn plan(spec: &ManifoldSpec) -> Result<Plan, SpecError> {
    let summands = spec.summands();
    if summands.is_empty() {
        return Err(SpecError::Empty);
    }
    let irreducible: Vec<&Summand> = summands.iter().filter(|s| s.kind == SummandKind::Irreducible).collect();
    let mixed: Vec<&Summand> = summands.iter().filter(|s| s.kind != SummandKind::Irreducible).collect();
    let mut steps = Vec::new();
    let mut holes = spec.boundary_spheres();
    if !irreducible.is_empty() && summands.len() > 1 {
        steps.push(step(
            Case::I,
            summands.iter().map(|s| s.id.clone()).collect(),
            false,
            "write f = h o g with g rigidly reducible on the essential spheres; each irreducible summand \
             gets one hole and the remaining summands form a holed mixed body",
            "adjusting automorphisms",
        ));
        holes += irreducible.len() as u32;
    }
    if !mixed.is_empty() {
        mixed_steps(&mixed, holes, &mut steps);
    }
    for s in irreducible {
        if s.has_boundary() {
            steps.push(step(
                Case::Ii,
                vec![s.id.clone()],
                false,
                "split off the characteristic compression body Q; the rest is irreducible and boundary-irreducible",
                "Bonahon characteristic compression body",
            ));
            steps.push(step(
                Case::V,
                vec![format!("{}/Q", s.id)],
                true,
                "classify the induced compression body automorphism",
                "classification of compression body automorphisms",
            ));
        }
        steps.push(step(
            Case::Vi,
            vec![s.id.clone()],
            true,
            "classify within the irreducible, boundary-irreducible summand",
            "classification of irreducible manifolds",
        ));
    }
    Ok(Plan { steps })
}
