//! Tokenizer for the expression grammar.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Number(f64),
    /// A variable `x<k>` with its 1-based index.
    Variable(usize),
    /// One of the known function names (`exp`, `ln`, `abs`, `sqrt`, `sin`, `cos`).
    Function(&'static str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

pub const FUNCTION_NAMES: [&str; 6] = ["exp", "ln", "abs", "sqrt", "sin", "cos"];

/// A token together with the byte offset of its first character.
#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub token: Token,
    pub offset: usize,
}

/// Tokenizes `src`, appending a final `End` token at `src.len()`.
pub fn tokenize(src: &str) -> Result<Vec<Spanned>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'+' => {
                out.push(Spanned { token: Token::Plus, offset: i });
                i += 1;
            }
            b'-' => {
                out.push(Spanned { token: Token::Minus, offset: i });
                i += 1;
            }
            b'*' => {
                out.push(Spanned { token: Token::Star, offset: i });
                i += 1;
            }
            b'/' => {
                out.push(Spanned { token: Token::Slash, offset: i });
                i += 1;
            }
            b'^' => {
                out.push(Spanned { token: Token::Caret, offset: i });
                i += 1;
            }
            b'(' => {
                out.push(Spanned { token: Token::LParen, offset: i });
                i += 1;
            }
            b')' => {
                out.push(Spanned { token: Token::RParen, offset: i });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // exponent suffix: e or E, optional sign, at least one digit
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    expected: format!("a numeric literal, found `{text}`"),
                })?;
                out.push(Spanned { token: Token::Number(value), offset: start });
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric()) {
                    i += 1;
                }
                let name = &src[start..i];
                if let Some(func) = FUNCTION_NAMES.iter().find(|f| **f == name) {
                    out.push(Spanned { token: Token::Function(func), offset: start });
                } else if let Some(rest) = name.strip_prefix('x') {
                    let index: usize = rest.parse().map_err(|_| Error::Syntax {
                        offset: start,
                        expected: format!("a variable like x1, found `{name}`"),
                    })?;
                    out.push(Spanned { token: Token::Variable(index), offset: start });
                } else {
                    return Err(Error::Syntax {
                        offset: start,
                        expected: format!(
                            "a variable (x1..xn) or function (exp, ln, abs, sqrt, sin, cos), found `{name}`"
                        ),
                    });
                }
            }
            _ => {
                return Err(Error::Syntax {
                    offset: i,
                    expected: format!("a token, found `{}`", &src[i..].chars().next().unwrap()),
                });
            }
        }
    }
    out.push(Spanned { token: Token::End, offset: src.len() });
    Ok(out)
}
