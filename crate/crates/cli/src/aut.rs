//! `.aut` documents: generator images on a rose, optional twist bits and
//! phantom (anchor) generators.
//!
//! ```text
//! version 1
//! rank 2
//! a -> a b
//! b -> a
//! twists 0 1
//! ```

use std::collections::BTreeMap;
use std::fmt;

use traintrack_core::graph::{Anchor, DirEdge, EdgePath, EdgeRecord, Graph};
use traintrack_core::map::GraphMap;

use crate::error::{CliError, ParseError};
use crate::lex::{is_generator, tokens, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutDocument {
    pub generators: Vec<String>,
    /// `(generator index, inverted)` letters of each image.
    pub images: Vec<Vec<(usize, bool)>>,
    pub twists: Option<Vec<u8>>,
    /// Indices of phantom generators, ascending.
    pub anchors: Vec<usize>,
}

struct Pending<'a> {
    name: Token<'a>,
    word: Vec<Token<'a>>,
}

impl AutDocument {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut version_seen = false;
        let mut content_seen = false;
        let mut rank: Option<(usize, usize)> = None;
        let mut twists: Option<(Token, Vec<u8>)> = None;
        let mut anchor_tokens: Vec<Token> = Vec::new();
        let mut lines: Vec<Pending> = Vec::new();
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let toks = tokens(raw, line);
            let Some(head) = toks.first() else { continue };
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
                    if let Some(t) = toks.get(2) {
                        return Err(t.error("unexpected token"));
                    }
                }
                "rank" => {
                    content_seen = true;
                    if rank.is_some() {
                        return Err(head.error("duplicate `rank` line"));
                    }
                    if !lines.is_empty() {
                        return Err(head.error("`rank` must precede the image lines"));
                    }
                    let k = toks.get(1).ok_or_else(|| head.error_after("missing rank"))?;
                    let n: usize = k.text.parse().map_err(|_| k.error("rank must be a positive integer"))?;
                    if n == 0 {
                        return Err(k.error("rank must be a positive integer"));
                    }
                    if let Some(t) = toks.get(2) {
                        return Err(t.error("unexpected token"));
                    }
                    rank = Some((n, line));
                }
                "twists" => {
                    content_seen = true;
                    if twists.is_some() {
                        return Err(head.error("duplicate `twists` line"));
                    }
                    let mut bits = Vec::new();
                    for t in &toks[1..] {
                        match t.text {
                            "0" => bits.push(0),
                            "1" => bits.push(1),
                            _ => return Err(t.error("twist coordinates are 0 or 1")),
                        }
                    }
                    twists = Some((*head, bits));
                }
                "anchor" => {
                    content_seen = true;
                    if toks.len() == 1 {
                        return Err(head.error_after("`anchor` needs at least one generator"));
                    }
                    anchor_tokens.extend_from_slice(&toks[1..]);
                }
                _ => {
                    content_seen = true;
                    if rank.is_none() {
                        return Err(head.error("expected `rank` before the image lines"));
                    }
                    if !is_generator(head.text) {
                        return Err(head.error(format!("`{}` is not a generator name", head.text)));
                    }
                    match toks.get(1) {
                        Some(t) if t.text == "->" => {}
                        Some(t) => return Err(t.error("expected `->`")),
                        None => return Err(head.error_after("expected `->`")),
                    }
                    lines.push(Pending { name: *head, word: toks[2..].to_vec() });
                }
            }
        }

        let eof = ParseError { line: last_line + 1, column: 1, message: String::new() };
        let Some((k, rank_line)) = rank else {
            return Err(ParseError { message: "missing `rank` line".into(), ..eof });
        };
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, p) in lines.iter().enumerate() {
            if index.insert(p.name.text, i).is_some() {
                return Err(p.name.error(format!("generator `{}` has two image lines", p.name.text)));
            }
        }
        if lines.len() != k {
            let message = format!("rank {k} declared on line {rank_line} but {} image lines given", lines.len());
            return Err(ParseError { message, ..eof });
        }
        let letter = |t: &Token| -> Result<(usize, bool), ParseError> {
            let (name, inv) = match t.text.strip_suffix('\'') {
                Some(n) => (n, true),
                None => (t.text, false),
            };
            if !is_generator(name) {
                return Err(t.error(format!("`{}` is not a generator or its inverse", t.text)));
            }
            index.get(name).map(|&i| (i, inv)).ok_or_else(|| t.error(format!("undeclared generator `{name}`")))
        };
        let images = lines.iter().map(|p| p.word.iter().map(letter).collect()).collect::<Result<Vec<_>, _>>()?;
        let mut anchors = Vec::new();
        for t in &anchor_tokens {
            let i = *index.get(t.text).ok_or_else(|| t.error(format!("undeclared generator `{}`", t.text)))?;
            if anchors.contains(&i) {
                return Err(t.error(format!("`{}` listed twice", t.text)));
            }
            anchors.push(i);
        }
        if anchors.len() == k {
            return Err(anchor_tokens[0].error("at least one generator must be a real edge"));
        }
        anchors.sort_unstable();
        let twists = match twists {
            Some((t, bits)) if bits.len() != k => {
                return Err(t.error(format!("expected {k} twist coordinates, got {}", bits.len())))
            }
            Some((_, bits)) => Some(bits),
            None => None,
        };
        Ok(AutDocument { generators: lines.iter().map(|p| p.name.text.to_string()).collect(), images, twists, anchors })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn word(&self, i: usize) -> EdgePath {
        EdgePath::new(self.images[i].iter().map(|&(e, r)| DirEdge::new(e, r)).collect())
    }

    pub fn graph(&self) -> Graph {
        if self.anchors.is_empty() {
            return Graph::rose(self.rank());
        }
        let edges = (0..self.rank())
            .map(|i| EdgeRecord { init: 0, term: 0, phantom: self.anchors.contains(&i) })
            .collect();
        let anchors = BTreeMap::from([(0, Anchor { genus: self.anchors.len() as u32, tag: 0 })]);
        Graph::from_parts(1, edges, anchors).expect("single-vertex graph")
    }

    pub fn to_map(&self) -> Result<GraphMap, CliError> {
        let words = (0..self.rank()).map(|i| self.word(i)).collect();
        GraphMap::new(self.graph(), vec![0], words).map_err(|e| CliError::precondition("graphmap-core", e))
    }

    /// Document for a rose map, naming generators after `names` when the
    /// rank matches and `a`, `b`, ... (then `x1`, ...) otherwise.
    pub fn from_rose_map(f: &GraphMap, names: Option<&[String]>, twists: Option<Vec<u8>>) -> Self {
        let k = f.graph().edge_count();
        let generators = match names {
            Some(n) if n.len() == k => n.to_vec(),
            _ => default_names(k),
        };
        let images = f
            .edge_images()
            .iter()
            .map(|p| p.steps().iter().map(|d| (d.edge(), d.is_reversed())).collect())
            .collect();
        let anchors = (0..k).filter(|&e| f.graph().is_phantom(e)).collect();
        AutDocument { generators, images, twists, anchors }
    }

    pub fn format_word(&self, i: usize) -> String {
        let parts: Vec<String> = self.images[i]
            .iter()
            .map(|&(e, inv)| format!("{}{}", self.generators[e], if inv { "'" } else { "" }))
            .collect();
        parts.join(" ")
    }

    pub fn image_lines(&self) -> Vec<String> {
        (0..self.rank())
            .map(|i| {
                let w = self.format_word(i);
                if w.is_empty() {
                    format!("{} ->", self.generators[i])
                } else {
                    format!("{} -> {w}", self.generators[i])
                }
            })
            .collect()
    }
}

pub fn default_names(k: usize) -> Vec<String> {
    if k <= 26 {
        (0..k).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    } else {
        (0..k).map(|i| format!("x{i}")).collect()
    }
}

impl fmt::Display for AutDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "version 1")?;
        writeln!(f, "rank {}", self.rank())?;
        for l in self.image_lines() {
            writeln!(f, "{l}")?;
        }
        if let Some(t) = &self.twists {
            let bits: Vec<String> = t.iter().map(u8::to_string).collect();
            writeln!(f, "twists {}", bits.join(" "))?;
        }
        if !self.anchors.is_empty() {
            let names: Vec<&str> = self.anchors.iter().map(|&i| self.generators[i].as_str()).collect();
            writeln!(f, "anchor {}", names.join(" "))?;
        }
        Ok(())
    }
}
