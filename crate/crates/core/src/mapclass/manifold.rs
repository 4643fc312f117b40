//! Connected-sum descriptions and summand permutations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Label shared by every `S^2 x S^1` summand.
pub const S2XS1_LABEL: &str = "s2xs1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummandKind {
    Irreducible,
    S2xs1,
    Handlebody,
}

impl SummandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SummandKind::Irreducible => "irreducible",
            SummandKind::S2xs1 => "s2xs1",
            SummandKind::Handlebody => "handlebody",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "irreducible" => Some(SummandKind::Irreducible),
            "s2xs1" => Some(SummandKind::S2xs1),
            "handlebody" => Some(SummandKind::Handlebody),
            _ => None,
        }
    }
}

impl fmt::Display for SummandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    pub id: String,
    pub kind: SummandKind,
    pub label: String,
    /// Handlebody genus, or the total boundary genus of an irreducible
    /// summand (absent or zero when closed).
    pub genus: Option<u32>,
}

impl Summand {
    pub fn has_boundary(&self) -> bool {
        match self.kind {
            SummandKind::Irreducible => self.genus.unwrap_or(0) > 0,
            SummandKind::Handlebody => true,
            SummandKind::S2xs1 => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("no summands")]
    Empty,
    #[error("duplicate summand id {0}")]
    DuplicateId(String),
    #[error("unknown summand id {0}")]
    UnknownId(String),
    #[error("summand {0}: handlebody needs a positive genus")]
    HandlebodyGenus(String),
    #[error("summand {0}: s2xs1 summands take no genus and only the reserved label")]
    S2xs1Label(String),
    #[error("summand {0}: label {S2XS1_LABEL} is reserved")]
    ReservedLabel(String),
    #[error("permutation is not a bijection on summand ids")]
    NotBijective,
    #[error("permutation sends {from} to {to} across labels")]
    LabelViolation { from: String, to: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    summands: Vec<Summand>,
    /// Holes, capped off before anything else is done.
    boundary_spheres: u32,
}

impl ManifoldSpec {
    pub fn new(summands: Vec<Summand>, boundary_spheres: u32) -> Result<Self, SpecError> {
        if summands.is_empty() {
            return Err(SpecError::Empty);
        }
        let mut ids = BTreeSet::new();
        for s in &summands {
            if !ids.insert(s.id.as_str()) {
                return Err(SpecError::DuplicateId(s.id.clone()));
            }
            match s.kind {
                SummandKind::Handlebody if s.genus.unwrap_or(0) == 0 => {
                    return Err(SpecError::HandlebodyGenus(s.id.clone()));
                }
                SummandKind::S2xs1 if s.label != S2XS1_LABEL || s.genus.is_some() => {
                    return Err(SpecError::S2xs1Label(s.id.clone()));
                }
                SummandKind::Irreducible | SummandKind::Handlebody if s.label == S2XS1_LABEL => {
                    return Err(SpecError::ReservedLabel(s.id.clone()));
                }
                _ => {}
            }
        }
        Ok(ManifoldSpec { summands, boundary_spheres })
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn boundary_spheres(&self) -> u32 {
        self.boundary_spheres
    }

    pub fn summand(&self, id: &str) -> Option<&Summand> {
        self.summands.iter().find(|s| s.id == id)
    }

    fn label(&self, id: &str) -> Result<&str, SpecError> {
        self.summand(id).map(|s| s.label.as_str()).ok_or_else(|| SpecError::UnknownId(id.to_string()))
    }

    /// Identity permutation on the summand ids.
    pub fn identity_perm(&self) -> SummandPerm {
        SummandPerm(self.summands.iter().map(|s| (s.id.clone(), s.id.clone())).collect())
    }
}

/// A permutation of summand ids; ids not listed are fixed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SummandPerm(pub BTreeMap<String, String>);

impl SummandPerm {
    pub fn get<'a>(&'a self, id: &'a str) -> &'a str {
        self.0.get(id).map_or(id, String::as_str)
    }

    /// Complete to every summand id and check bijectivity.
    fn completed(&self, spec: &ManifoldSpec) -> Result<BTreeMap<String, String>, SpecError> {
        for (a, b) in &self.0 {
            spec.label(a)?;
            spec.label(b)?;
        }
        let full: BTreeMap<String, String> =
            spec.summands.iter().map(|s| (s.id.clone(), self.get(&s.id).to_string())).collect();
        let images: BTreeSet<&String> = full.values().collect();
        if images.len() != full.len() {
            return Err(SpecError::NotBijective);
        }
        Ok(full)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|(a, b)| a == b)
    }
}

/// Whether the permutation preserves labels.
pub fn validate_perm(spec: &ManifoldSpec, perm: &SummandPerm) -> Result<bool, SpecError> {
    let full = perm.completed(spec)?;
    for (a, b) in &full {
        if spec.label(a)? != spec.label(b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlideLetter {
    /// Exchange two summands of the same label.
    Interchange { first: String, second: String },
    /// Slide of a summand around a loop, kept symbolic.
    SimpleSlide { summand: String, loop_tag: String },
}

impl fmt::Display for SlideLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlideLetter::Interchange { first, second } => write!(f, "interchange({first},{second})"),
            SlideLetter::SimpleSlide { summand, loop_tag } => write!(f, "slide({summand},{loop_tag})"),
        }
    }
}

/// Letters act left to right: the first letter is applied first.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlideWord {
    pub letters: Vec<SlideLetter>,
}

impl SlideWord {
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The summand permutation of the word; simple slides fix every summand.
    pub fn permutation(&self) -> SummandPerm {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for l in &self.letters {
            if let SlideLetter::Interchange { first, second } = l {
                for id in [first, second] {
                    map.entry(id.clone()).or_insert_with(|| id.clone());
                }
                for v in map.values_mut() {
                    if v == first {
                        *v = second.clone();
                    } else if v == second {
                        *v = first.clone();
                    }
                }
            }
        }
        SummandPerm(map)
    }

    /// `self ∘ perm`: first `perm`, then the word.
    pub fn after(&self, perm: &SummandPerm) -> SummandPerm {
        let w = self.permutation();
        let mut out: BTreeMap<String, String> = BTreeMap::new();
        for id in perm.0.keys().chain(w.0.keys()) {
            out.insert(id.clone(), w.get(perm.get(id)).to_string());
        }
        SummandPerm(out)
    }
}

impl fmt::Display for SlideWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.letters.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Interchanges whose product, applied after `perm`, fixes every summand.
pub fn factor_interchanges(spec: &ManifoldSpec, perm: &SummandPerm) -> Result<SlideWord, SpecError> {
    let mut cur = perm.completed(spec)?;
    for (a, b) in &cur {
        if spec.label(a)? != spec.label(b)? {
            return Err(SpecError::LabelViolation { from: a.clone(), to: b.clone() });
        }
    }
    let ids: Vec<String> = cur.keys().cloned().collect();
    let mut letters = Vec::new();
    for x in &ids {
        while cur[x] != *x {
            let y = cur[x].clone();
            // postcompose with (x y)
            for v in cur.values_mut() {
                if v == x {
                    *v = y.clone();
                } else if *v == y {
                    *v = x.clone();
                }
            }
            letters.push(SlideLetter::Interchange { first: x.clone(), second: y });
        }
    }
    Ok(SlideWord { letters })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adjustment {
    /// Adjusting word with `h ∘ f` fixing every summand, so `f = h⁻¹ ∘ g`.
    pub h: SlideWord,
    /// Summand permutation of `g = h ∘ f`; always the identity.
    pub g_perm: SummandPerm,
    pub residue: String,
}

pub fn adjust_decompose(spec: &ManifoldSpec, f_perm: &SummandPerm) -> Result<Adjustment, SpecError> {
    let h = factor_interchanges(spec, f_perm)?;
    let full = SummandPerm(f_perm.completed(spec)?);
    let g_perm = h.after(&full);
    debug_assert!(g_perm.is_identity());
    let residue = "the restrictions of g to the summands are fixed only up to composing \
                   with an adjusting automorphism; no normal form is chosen"
        .to_string();
    Ok(Adjustment { h, g_perm, residue })
}
