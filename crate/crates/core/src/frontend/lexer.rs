//! Tokenizer for the Verilog subset.

use super::{FrontendError, Result};
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// System identifier such as `$signed`, payload without the `$`.
    SysIdent(String),
    /// Integer literal: value, declared width, base character or `None`
    /// for plain decimals.
    Number {
        value: u64,
        width: Option<u32>,
        base: Option<char>,
    },
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Colon,
    Comma,
    Dot,
    At,
    Question,
    Assign,       // =
    Plus,
    Minus,
    Star,
    StarStar,
    Slash,
    Percent,
    Bang,
    Tilde,
    Amp,
    AmpAmp,
    Pipe,
    PipePipe,
    Caret,
    Lt,
    LtEq,         // both `<=` comparison and nonblocking assign
    Gt,
    GtEq,
    EqEq,
    BangEq,
    Shl,
    Shr,
    Implies,      // |->
    ImpliesNext,  // |=>
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::SysIdent(s) => format!("`${s}`"),
            Tok::Number { value, .. } => format!("number {value}"),
            other => format!("{other:?}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    origin: &'a str,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn peek3(&self) -> Option<char> {
        self.chars.get(self.pos + 2).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, line: u32, col: u32, len: u32) -> SourceSpan {
        let _ = self;
        SourceSpan::new(self.origin, line, col, len)
    }
}

pub fn lex(text: &str, origin: &str) -> Result<Vec<Token>> {
    let mut cur = Cursor {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        origin,
    };
    let mut out = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, col) = (cur.line, cur.col);
        match c {
            c if c.is_whitespace() => {
                cur.bump();
            }
            '/' if cur.peek2() == Some('/') => {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            '/' if cur.peek2() == Some('*') => {
                cur.bump();
                cur.bump();
                loop {
                    match cur.bump() {
                        Some('*') if cur.peek() == Some('/') => {
                            cur.bump();
                            break;
                        }
                        Some(_) => {}
                        None => {
                            return Err(FrontendError::syntax(
                                cur.span_from(line, col, 2),
                                "unterminated block comment",
                            ))
                        }
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                let len = s.chars().count() as u32;
                out.push(Token {
                    tok: Tok::Ident(s),
                    span: cur.span_from(line, col, len),
                });
            }
            '$' => {
                cur.bump();
                let mut s = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                if s.is_empty() {
                    return Err(FrontendError::syntax(
                        cur.span_from(line, col, 1),
                        "stray `$`",
                    ));
                }
                let len = s.chars().count() as u32 + 1;
                out.push(Token {
                    tok: Tok::SysIdent(s),
                    span: cur.span_from(line, col, len),
                });
            }
            c if c.is_ascii_digit() => {
                let tok = lex_number(&mut cur)?;
                let len = (cur.col - col).max(1);
                out.push(Token {
                    tok,
                    span: cur.span_from(line, col, len),
                });
            }
            '\'' => {
                // Unsized based literal such as `'b0`.
                cur.bump();
                let tok = lex_based(&mut cur, None, line, col)?;
                let len = (cur.col - col).max(1);
                out.push(Token {
                    tok,
                    span: cur.span_from(line, col, len),
                });
            }
            _ => {
                let tok = lex_punct(&mut cur, line, col)?;
                let len = (cur.col - col).max(1);
                out.push(Token {
                    tok,
                    span: cur.span_from(line, col, len),
                });
            }
        }
    }
    Ok(out)
}

fn lex_number(cur: &mut Cursor) -> Result<Tok> {
    let (line, col) = (cur.line, cur.col);
    let mut digits = String::new();
    while let Some(c) = cur.peek() {
        if c.is_ascii_digit() || c == '_' {
            if c != '_' {
                digits.push(c);
            }
            cur.bump();
        } else {
            break;
        }
    }
    if cur.peek() == Some('\'') {
        let width: u32 = digits.parse().map_err(|_| {
            FrontendError::syntax(cur.span_from(line, col, 1), "bad literal width")
        })?;
        if width == 0 || width > 64 {
            return Err(FrontendError::unsupported(
                cur.span_from(line, col, digits.len() as u32),
                format!("literal width {width} (supported: 1..=64)"),
            ));
        }
        cur.bump();
        lex_based(cur, Some(width), line, col)
    } else {
        let value: u64 = digits.parse().map_err(|_| {
            FrontendError::syntax(
                cur.span_from(line, col, digits.len() as u32),
                "decimal literal out of range",
            )
        })?;
        Ok(Tok::Number {
            value,
            width: None,
            base: None,
        })
    }
}

fn lex_based(cur: &mut Cursor, width: Option<u32>, line: u32, col: u32) -> Result<Tok> {
    let base = cur.bump().ok_or_else(|| {
        FrontendError::syntax(cur.span_from(line, col, 1), "truncated based literal")
    })?;
    let radix = match base.to_ascii_lowercase() {
        'b' => 2,
        'd' => 10,
        'h' => 16,
        other => {
            return Err(FrontendError::unsupported(
                cur.span_from(line, col, 1),
                format!("literal base `{other}`"),
            ))
        }
    };
    let mut digits = String::new();
    while let Some(c) = cur.peek() {
        if c.is_ascii_alphanumeric() || c == '_' {
            if c != '_' {
                digits.push(c);
            }
            cur.bump();
        } else {
            break;
        }
    }
    if digits.is_empty() {
        return Err(FrontendError::syntax(
            cur.span_from(line, col, 1),
            "based literal without digits",
        ));
    }
    if digits.chars().any(|c| matches!(c, 'x' | 'X' | 'z' | 'Z')) {
        return Err(FrontendError::unsupported(
            cur.span_from(line, col, digits.len() as u32),
            "x/z literal digits",
        ));
    }
    let value = u64::from_str_radix(&digits, radix).map_err(|_| {
        FrontendError::syntax(
            cur.span_from(line, col, digits.len() as u32),
            "based literal out of range",
        )
    })?;
    if let Some(w) = width {
        if w < 64 && value >= (1u64 << w) {
            return Err(FrontendError::syntax(
                cur.span_from(line, col, digits.len() as u32),
                format!("literal value does not fit in {w} bits"),
            ));
        }
    }
    Ok(Tok::Number {
        value,
        width,
        base: Some(base.to_ascii_lowercase()),
    })
}

fn lex_punct(cur: &mut Cursor, line: u32, col: u32) -> Result<Tok> {
    let c = cur.bump().unwrap();
    let tok = match c {
        '(' => Tok::LParen,
        ')' => Tok::RParen,
        '[' => Tok::LBracket,
        ']' => Tok::RBracket,
        '{' => Tok::LBrace,
        '}' => Tok::RBrace,
        ';' => Tok::Semi,
        ':' => Tok::Colon,
        ',' => Tok::Comma,
        '.' => Tok::Dot,
        '@' => Tok::At,
        '?' => Tok::Question,
        '+' => Tok::Plus,
        '-' => Tok::Minus,
        '/' => Tok::Slash,
        '%' => Tok::Percent,
        '^' => Tok::Caret,
        '~' => Tok::Tilde,
        '*' => {
            if cur.peek() == Some('*') {
                cur.bump();
                Tok::StarStar
            } else {
                Tok::Star
            }
        }
        '=' => {
            if cur.peek() == Some('=') {
                cur.bump();
                Tok::EqEq
            } else {
                Tok::Assign
            }
        }
        '!' => {
            if cur.peek() == Some('=') {
                cur.bump();
                Tok::BangEq
            } else {
                Tok::Bang
            }
        }
        '&' => {
            if cur.peek() == Some('&') {
                cur.bump();
                Tok::AmpAmp
            } else {
                Tok::Amp
            }
        }
        '|' => {
            if cur.peek() == Some('|') {
                cur.bump();
                Tok::PipePipe
            } else if cur.peek() == Some('-') && cur.peek2() == Some('>') {
                cur.bump();
                cur.bump();
                Tok::Implies
            } else if cur.peek() == Some('=')
                && cur.peek2() == Some('>')
                && cur.peek3() != Some('=')
            {
                cur.bump();
                cur.bump();
                Tok::ImpliesNext
            } else {
                Tok::Pipe
            }
        }
        '<' => {
            if cur.peek() == Some('=') {
                cur.bump();
                Tok::LtEq
            } else if cur.peek() == Some('<') {
                cur.bump();
                Tok::Shl
            } else {
                Tok::Lt
            }
        }
        '>' => {
            if cur.peek() == Some('=') {
                cur.bump();
                Tok::GtEq
            } else if cur.peek() == Some('>') {
                cur.bump();
                Tok::Shr
            } else {
                Tok::Gt
            }
        }
        other => {
            return Err(FrontendError::syntax(
                cur.span_from(line, col, 1),
                format!("unexpected character `{other}`"),
            ))
        }
    };
    Ok(tok)
}
