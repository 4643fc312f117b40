//! Whitespace tokens with 1-based positions; `#` starts a comment.

use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub line: usize,
    /// Column of the first character, counted in characters.
    pub column: usize,
}

impl Token<'_> {
    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column, message: message.into() }
    }

    /// Error positioned just past the token.
    pub fn error_after(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column + self.text.chars().count() + 1, message: message.into() }
    }
}

pub fn tokens(raw: &str, line: usize) -> Vec<Token<'_>> {
    let body = raw.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut col = 0;
    for (byte, ch) in body.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token { text: &body[b..byte], line, column: c });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token { text: &body[b..], line, column: c });
    }
    out
}

/// `[a-z][a-z0-9_]*`
pub fn is_generator(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z')) && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}
