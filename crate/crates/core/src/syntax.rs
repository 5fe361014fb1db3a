//! Tokenizer and token cursor shared by the term, rule, config and trace parsers.

use std::fmt;

use thiserror::Error;

/// A syntax error with a 1-based line/column position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Lowercase identifier, possibly dotted (`def.win`, `empty.buffer`).
    Ident(String),
    /// Uppercase variable, may carry trailing primes (`T'`).
    Var(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    At,
    Plus,
    Minus,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Arrow,
    DotDot,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::At => f.write_str("`@`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Arrow => f.write_str("`<-`"),
            Tok::DotDot => f.write_str("`..`"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let push = |tok: Tok, out: &mut Vec<Token>| {
            out.push(Token {
                tok,
                line: tline,
                col: tcol,
            })
        };
        if c.is_ascii_lowercase() {
            let start = i;
            let mut j = i;
            loop {
                while j < chars.len() && is_ident_continue(chars[j]) {
                    j += 1;
                }
                // a dot continues the identifier only when a letter follows
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_alphabetic() {
                    j += 1;
                    continue;
                }
                break;
            }
            let s: String = chars[start..j].iter().collect();
            push(Tok::Ident(s), &mut out);
            advance(j - i, &mut i, &mut col);
            continue;
        }
        if c.is_ascii_uppercase() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && is_ident_continue(chars[j]) {
                j += 1;
            }
            while j < chars.len() && chars[j] == '\'' {
                j += 1;
            }
            let s: String = chars[start..j].iter().collect();
            push(Tok::Var(s), &mut out);
            advance(j - i, &mut i, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[start..j].iter().collect();
            let n: i64 = s
                .parse()
                .map_err(|_| ParseError::new(tline, tcol, format!("integer `{s}` out of range")))?;
            push(Tok::Int(n), &mut out);
            advance(j - i, &mut i, &mut col);
            continue;
        }
        let (tok, len) = match (c, next) {
            ('<', Some('-')) => (Tok::Arrow, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', _) => (Tok::Eq, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('@', _) => (Tok::At, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) | ('¬', _) => (Tok::Minus, 1),
            ('/', _) => (Tok::Slash, 1),
            _ => {
                return Err(ParseError::new(
                    tline,
                    tcol,
                    format!("unexpected character `{c}`"),
                ))
            }
        };
        push(tok, &mut out);
        advance(len, &mut i, &mut col);
    }
    Ok(out)
}

/// Cursor over a token slice with positioned error helpers.
pub(crate) struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    /// position reported for errors at end of input
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], end: (usize, usize)) -> Self {
        Cursor { toks, pos: 0, end }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, offset: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + offset).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn position(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.end)
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.position();
        ParseError::new(line, col, message)
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub fn int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(if neg { -n } else { *n })
            }
            _ => Err(self.unexpected("integer")),
        }
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

/// End-of-input position for a text, used for errors past the last token.
pub(crate) fn end_position(text: &str) -> (usize, usize) {
    let line = text.lines().count().max(1);
    let col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_identifiers_and_ranges() {
        let toks: Vec<Tok> = tokenize("def.win(p,2) 0..10 empty.buffer")
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect();
        assert_eq!(toks[0], Tok::Ident("def.win".into()));
        assert!(toks.contains(&Tok::DotDot));
        assert_eq!(toks.last(), Some(&Tok::Ident("empty.buffer".into())));
    }

    #[test]
    fn primed_variables_and_arrows() {
        let toks: Vec<Tok> = tokenize("del(P,T') <- X <= 3 # trailing\n")
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect();
        assert!(toks.contains(&Tok::Var("T'".into())));
        assert!(toks.contains(&Tok::Arrow));
        assert!(toks.contains(&Tok::Le));
    }

    #[test]
    fn bad_character_is_positioned() {
        let err = tokenize("a\n  $").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
    }
}
