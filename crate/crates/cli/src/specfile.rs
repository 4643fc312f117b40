//! `.spec` documents describing a connected sum and, optionally, how an
//! automorphism permutes its summands.
//!
//! ```text
//! version 1
//! manifold
//! A1 irreducible A
//! A2 irreducible A
//! S s2xs1 s2xs1
//! holes 1
//! perm A1->A2 A2->A1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use traintrack_core::mapclass::{ManifoldSpec, Summand, SummandKind, SummandPerm};

use crate::error::{CliError, ParseError};
use crate::lex::{tokens, Token};

const KEYWORDS: [&str; 4] = ["version", "manifold", "holes", "perm"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDocument {
    pub summands: Vec<Summand>,
    pub holes: u32,
    pub perm: Option<BTreeMap<String, String>>,
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut version_seen = false;
        let mut content_seen = false;
        let mut in_block = false;
        let mut block_seen = false;
        let mut summands: Vec<Summand> = Vec::new();
        let mut holes: Option<u32> = None;
        let mut perm_tokens: Vec<Token> = Vec::new();
        let mut perm_seen = false;
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let toks = tokens(raw, line);
            let Some(head) = toks.first() else { continue };
            let no_more = |n: usize| toks.get(n).map_or(Ok(()), |t| Err(t.error("unexpected token")));
            match head.text {
                "version" => {
                    if version_seen || content_seen {
                        return Err(head.error("`version` must be the first line"));
                    }
                    version_seen = true;
                    let v = toks.get(1).ok_or_else(|| head.error_after("missing version number"))?;
                    if v.text != "1" {
                        return Err(v.error(format!("unsupported version {}", v.text)));
                    }
                    no_more(2)?;
                }
                "manifold" => {
                    content_seen = true;
                    if block_seen {
                        return Err(head.error("duplicate `manifold` block"));
                    }
                    no_more(1)?;
                    block_seen = true;
                    in_block = true;
                }
                "holes" => {
                    content_seen = true;
                    in_block = false;
                    if holes.is_some() {
                        return Err(head.error("duplicate `holes` line"));
                    }
                    let n = toks.get(1).ok_or_else(|| head.error_after("missing hole count"))?;
                    holes = Some(n.text.parse().map_err(|_| n.error("hole count must be a nonnegative integer"))?);
                    no_more(2)?;
                }
                "perm" => {
                    content_seen = true;
                    in_block = false;
                    if perm_seen {
                        return Err(head.error("duplicate `perm` line"));
                    }
                    perm_seen = true;
                    perm_tokens.extend_from_slice(&toks[1..]);
                }
                _ if in_block => summands.push(summand(&toks)?),
                _ => return Err(head.error(format!("unexpected `{}` outside the manifold block", head.text))),
            }
        }

        if summands.is_empty() {
            let message = if block_seen { "the manifold block lists no summands" } else { "missing `manifold` block" };
            return Err(ParseError { line: last_line + 1, column: 1, message: message.into() });
        }
        let ids: BTreeSet<&str> = summands.iter().map(|s| s.id.as_str()).collect();
        let perm = if perm_seen {
            let mut map = BTreeMap::new();
            for t in &perm_tokens {
                let (a, b) = t.text.split_once("->").ok_or_else(|| t.error("expected `from->to`"))?;
                for (part, offset) in [(a, 0), (b, a.chars().count() + 2)] {
                    if !ids.contains(part) {
                        let at = ParseError { column: t.column + offset, ..t.error("") };
                        return Err(ParseError { message: format!("unknown summand `{part}`"), ..at });
                    }
                }
                if map.insert(a.to_string(), b.to_string()).is_some() {
                    return Err(t.error(format!("`{a}` mapped twice")));
                }
            }
            Some(map)
        } else {
            None
        };
        Ok(SpecDocument { summands, holes: holes.unwrap_or(0), perm })
    }

    pub fn to_spec(&self) -> Result<ManifoldSpec, CliError> {
        ManifoldSpec::new(self.summands.clone(), self.holes).map_err(|e| CliError::precondition("mapclass", e))
    }

    pub fn summand_perm(&self) -> Option<SummandPerm> {
        self.perm.clone().map(SummandPerm)
    }
}

fn summand(toks: &[Token]) -> Result<Summand, ParseError> {
    let id = toks[0];
    if KEYWORDS.contains(&id.text) {
        return Err(id.error("summand id is a keyword"));
    }
    let kind_tok = toks.get(1).ok_or_else(|| id.error_after("expected `id kind label [genus]`"))?;
    let kind = SummandKind::parse(kind_tok.text)
        .ok_or_else(|| kind_tok.error("kind must be irreducible, s2xs1 or handlebody"))?;
    let label = toks.get(2).ok_or_else(|| kind_tok.error_after("missing label"))?;
    let genus = match toks.get(3) {
        Some(g) => Some(g.text.parse().map_err(|_| g.error("genus must be a nonnegative integer"))?),
        None => None,
    };
    if let Some(t) = toks.get(4) {
        return Err(t.error("unexpected token"));
    }
    Ok(Summand { id: id.text.to_string(), kind, label: label.text.to_string(), genus })
}

impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "version 1")?;
        writeln!(f, "manifold")?;
        for s in &self.summands {
            write!(f, "{} {} {}", s.id, s.kind, s.label)?;
            if let Some(g) = s.genus {
                write!(f, " {g}")?;
            }
            writeln!(f)?;
        }
        if self.holes > 0 {
            writeln!(f, "holes {}", self.holes)?;
        }
        if let Some(p) = &self.perm {
            let pairs: Vec<String> = p.iter().map(|(a, b)| format!("{a}->{b}")).collect();
            if pairs.is_empty() {
                writeln!(f, "perm")?;
            } else {
                writeln!(f, "perm {}", pairs.join(" "))?;
            }
        }
        Ok(())
    }
}
