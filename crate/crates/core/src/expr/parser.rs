//! Pratt parser for the expression grammar.
//!
//! Precedence, loosest to tightest: `+ -`, unary `-`, `* /`, `^`
//! (right-associative). A leading minus therefore negates a whole
//! product (`-1/x1^2` is `-(1/x1^2)`) while exponentiation still binds
//! tighter than negation (`-x1^2` is `-(x1^2)`).

use super::ast::ExprNode;
use super::lexer::{tokenize, Spanned, Token};
use crate::error::{Error, Result};

const PRIMARY_HINT: &str = "a number, variable x<k>, function call, `(`, or unary `-`";

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    arity: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: Token, expected: &str) -> Result<()> {
        if self.peek().token == token {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.peek().offset,
                expected: expected.to_string(),
            })
        }
    }

    /// Left/right binding powers for infix operators.
    fn infix_power(token: &Token) -> Option<(u8, u8)> {
        match token {
            Token::Plus | Token::Minus => Some((10, 11)),
            Token::Star | Token::Slash => Some((20, 21)),
            Token::Caret => Some((30, 30)), // right-associative
            _ => None,
        }
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<ExprNode> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let op = self.peek().token.clone();
            let Some((lbp, rbp)) = Self::infix_power(&op) else {
                break;
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.parse_expr(rbp)?;
            lhs = match op {
                Token::Plus => ExprNode::Add(Box::new(lhs), Box::new(rhs)),
                Token::Minus => ExprNode::Sub(Box::new(lhs), Box::new(rhs)),
                Token::Star => ExprNode::Mul(Box::new(lhs), Box::new(rhs)),
                Token::Slash => ExprNode::Div(Box::new(lhs), Box::new(rhs)),
                Token::Caret => ExprNode::Pow(Box::new(lhs), Box::new(rhs)),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<ExprNode> {
        let Spanned { token, offset } = self.bump();
        match token {
            Token::Number(v) => Ok(ExprNode::Constant(v)),
            Token::Variable(index) => {
                if index == 0 || index > self.arity {
                    Err(Error::Arity { index, arity: self.arity })
                } else {
                    Ok(ExprNode::Variable(index))
                }
            }
            Token::Minus => {
                // binds tighter than `*` and `/` but looser than `^`, as in
                // Python/C: `-x1^2` is `-(x1^2)`, while `a/-b/c` keeps the
                // quotient chain left-associative as `(a/(-b))/c`.
                let operand = self.parse_expr(25)?;
                Ok(ExprNode::Neg(Box::new(operand)))
            }
            Token::LParen => {
                let inner = self.parse_expr(0)?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Token::Function(name) => {
                self.expect(Token::LParen, "`(` after function name")?;
                let arg = Box::new(self.parse_expr(0)?);
                self.expect(Token::RParen, "`)` closing the function argument")?;
                Ok(match name {
                    "exp" => ExprNode::Exp(arg),
                    "ln" => ExprNode::Ln(arg),
                    "abs" => ExprNode::Abs(arg),
                    "sqrt" => ExprNode::Sqrt(arg),
                    "sin" => ExprNode::Sin(arg),
                    "cos" => ExprNode::Cos(arg),
                    _ => unreachable!(),
                })
            }
            _ => Err(Error::Syntax {
                offset,
                expected: PRIMARY_HINT.to_string(),
            }),
        }
    }
}

/// Parses `src` as an expression in variables `x1..x<arity>`.
pub fn parse_expr_text(src: &str, arity: usize) -> Result<ExprNode> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, arity };
    let expr = p.parse_expr(0)?;
    if p.peek().token != Token::End {
        return Err(Error::Syntax {
            offset: p.peek().offset,
            expected: "an operator or end of input".to_string(),
        });
    }
    Ok(expr)
}
