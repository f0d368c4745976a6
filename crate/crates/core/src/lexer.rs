//! Tokenizer shared by the `.dfoci`, operator and Q-table key formats.

use std::fmt;

use crate::error::Error;
use crate::logic::{Atom, Literal, Term};
use crate::symbol::Sym;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Slash,
    Tilde,
    /// `->`
    Arrow,
    /// `-+1->`
    NextArrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::NextArrow => f.write_str("`-+1->`"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, Error> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let single = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '/' => Some(Tok::Slash),
            '~' => Some(Tok::Tilde),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line: start.0, col: start.1 });
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' {
            let rest: String = chars[i..chars.len().min(i + 5)].iter().collect();
            let (tok, len) = if rest.starts_with("->") {
                (Tok::Arrow, 2)
            } else if rest.starts_with("-+1->") {
                (Tok::NextArrow, 5)
            } else {
                return Err(syntax(start, "expected `->` or `-+1->`"));
            };
            out.push(Token { tok, line: start.0, col: start.1 });
            i += len;
            col += len;
            continue;
        }
        if is_ident_char(c) {
            let mut s = String::new();
            while i < chars.len() {
                let ch = chars[i];
                let hyphen_inside = ch == '-' && chars.get(i + 1).is_some_and(|n| is_ident_char(*n));
                if is_ident_char(ch) || hyphen_inside {
                    s.push(ch);
                    i += 1;
                    col += 1;
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(s), line: start.0, col: start.1 });
            continue;
        }
        return Err(syntax(start, &format!("unexpected character {c:?}")));
    }
    Ok(out)
}

fn syntax((line, col): (usize, usize), msg: &str) -> Error {
    Error::Syntax { line, col, msg: msg.to_owned() }
}

/// Recursive-descent cursor over a token list.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Cursor {
    pub fn new(text: &str) -> Result<Cursor, Error> {
        let toks = tokenize(text)?;
        let lines = text.lines().count().max(1);
        let last_col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
        Ok(Cursor { toks, pos: 0, eof: (lines, last_col) })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn line(&self) -> usize {
        self.position().0
    }

    pub fn position(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.eof, |t| (t.line, t.col))
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.position();
        Error::Syntax { line, col, msg: msg.into() }
    }

    fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), Error> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn ident(&mut self) -> Result<String, Error> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    pub fn keyword(&mut self, kw: &str) -> bool {
        if self.peek_ident() == Some(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn variable(&mut self) -> Result<String, Error> {
        let at = self.position();
        let name = self.ident()?;
        if !Sym::is_variable_name(&name) {
            return Err(syntax(at, &format!("expected variable, found `{name}`")));
        }
        Ok(name)
    }

    pub fn natural(&mut self) -> Result<usize, Error> {
        let at = self.position();
        let s = self.ident()?;
        s.parse()
            .map_err(|_| syntax(at, &format!("expected natural number, found `{s}`")))
    }

    /// `[~] ident [ ( term {, term} ) ]`
    pub fn literal(&mut self) -> Result<Literal, Error> {
        let positive = !self.eat(&Tok::Tilde);
        let name = self.ident()?;
        let args = self.opt_termlist()?;
        Ok(Literal {
            atom: Atom::from_parts(Sym::new(&name), args),
            positive,
        })
    }

    pub fn opt_termlist(&mut self) -> Result<Vec<Term>, Error> {
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(Term::from_name(&self.ident()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RParen)?;
        }
        Ok(args)
    }

    /// Comma-separated, non-empty literal list.
    pub fn literal_list(&mut self) -> Result<Vec<Literal>, Error> {
        let mut out = vec![self.literal()?];
        while self.eat(&Tok::Comma) {
            out.push(self.literal()?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyphenated_identifiers_and_arrows() {
        let toks: Vec<Tok> = tokenize("{in-taxi(P)}-+1->taxi-at(L) ->R")
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::LBrace,
                Tok::Ident("in-taxi".into()),
                Tok::LParen,
                Tok::Ident("P".into()),
                Tok::RParen,
                Tok::RBrace,
                Tok::NextArrow,
                Tok::Ident("taxi-at".into()),
                Tok::LParen,
                Tok::Ident("L".into()),
                Tok::RParen,
                Tok::Arrow,
                Tok::Ident("R".into()),
            ]
        );
    }

    #[test]
    fn positions_and_comments() {
        let toks = tokenize("# header\n  at(p1) # trailing\nx").unwrap();
        assert_eq!((toks[0].line, toks[0].col), (2, 3));
        assert_eq!((toks.last().unwrap().line, toks.last().unwrap().col), (3, 1));
    }

    #[test]
    fn stray_hyphen_is_rejected() {
        let err = tokenize("a -b").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, col: 3, .. }));
    }
}
