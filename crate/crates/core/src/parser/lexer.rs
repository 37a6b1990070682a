use std::fmt;

use crate::diag::{Code, Diagnostic, SourceLocation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(usize),
    LArrow,
    RArrow,
    Dot,
    DColon,
    Colon,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LArrow => f.write_str("`<-`"),
            Tok::RArrow => f.write_str("`->`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::DColon => f.write_str("`::`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) fn loc(file: &str, pos: Pos) -> SourceLocation {
    SourceLocation::new(file, pos.line, pos.col)
}

/// Splits `src` into tokens. `#` starts a comment running to the end of the line.
pub(crate) fn lex(file: &str, src: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    // Position of the last character consumed, used for the end-of-input token.
    let mut last = Pos { line: 1, col: 1 };

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(ch) = c {
                last = Pos { line, col };
                if ch == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                    s.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(s), pos });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            match s.parse::<usize>() {
                Ok(n) => out.push(Token { tok: Tok::Int(n), pos }),
                Err(_) => errors.push(
                    Diagnostic::error(Code::LexError, format!("integer literal `{s}` is too large")).located(loc(file, pos)),
                ),
            }
            continue;
        }
        bump!();
        let tok = match c {
            '<' if chars.peek() == Some(&'-') => {
                bump!();
                Tok::LArrow
            }
            '-' if chars.peek() == Some(&'>') => {
                bump!();
                Tok::RArrow
            }
            ':' if chars.peek() == Some(&':') => {
                bump!();
                Tok::DColon
            }
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            ';' => Tok::Semi,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '*' => Tok::Star,
            other => {
                errors.push(
                    Diagnostic::error(Code::LexError, format!("unexpected character {other:?}")).located(loc(file, pos)),
                );
                continue;
            }
        };
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::Eof, pos: last });
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}
