//! Scalar expressions in variables `x1..xn`: parsing, evaluation,
//! symbolic differentiation, and simplification.
//!
//! The grammar covers `+ - * / ^`, unary minus, parentheses, numeric
//! literals with optional exponents, and the function calls `exp`, `ln`,
//! `abs`, `sqrt`, `sin`, `cos`. `^` is right-associative and binds
//! tighter than unary minus.

mod ast;
mod deriv;
mod lexer;
mod parser;
mod simplify;

pub use ast::ExprNode;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A parsed scalar function of `arity` variables.
///
/// `origin_value` handles removable singularities at the origin: functions
/// like `exp(-1/(x1^2))` have no value at `x = 0` as written, but extend
/// continuously by 0. When set, [`ParsedFunction::evaluate`] returns the
/// stored value for any point with Euclidean norm below `1e-12` instead of
/// evaluating the tree there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedFunction {
    pub arity: usize,
    pub body: ExprNode,
    pub source_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_value: Option<f64>,
}

/// Norm below which `origin_value` substitutes for tree evaluation.
pub const ORIGIN_SNAP_NORM: f64 = 1e-12;

impl ParsedFunction {
    /// Builds a function from an already-constructed tree, validating that
    /// every variable index is within `1..=arity`.
    pub fn from_node(body: ExprNode, arity: usize) -> Result<Self> {
        let max = body.max_variable();
        if max > arity {
            return Err(Error::Arity { index: max, arity });
        }
        let source_text = body.to_string();
        Ok(ParsedFunction { arity, body, source_text, origin_value: None })
    }

    /// Attaches an explicit origin value (continuous extension at `x = 0`).
    pub fn with_origin_value(mut self, value: f64) -> Self {
        self.origin_value = Some(value);
        self
    }

    /// Evaluates at `point`, which must have length `arity`.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.arity {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, function has arity {}",
                point.len(),
                self.arity
            )));
        }
        if let Some(v) = self.origin_value {
            let norm_sq: f64 = point.iter().map(|x| x * x).sum();
            if norm_sq < ORIGIN_SNAP_NORM * ORIGIN_SNAP_NORM {
                return Ok(v);
            }
        }
        self.body.eval(point)
    }

    /// Exact symbolic partial derivative with respect to `x<var>`.
    pub fn differentiate(&self, var: usize) -> Result<Self> {
        if var == 0 || var > self.arity {
            return Err(Error::Arity { index: var, arity: self.arity });
        }
        let body = deriv::differentiate(&self.body, var);
        let source_text = body.to_string();
        Ok(ParsedFunction {
            arity: self.arity,
            body,
            source_text,
            origin_value: None,
        })
    }

    /// Constant-folded, identity-eliminated copy.
    pub fn simplified(&self) -> Self {
        let body = simplify::simplify(&self.body);
        let source_text = body.to_string();
        ParsedFunction {
            arity: self.arity,
            body,
            source_text,
            origin_value: self.origin_value,
        }
    }
}

impl std::fmt::Display for ParsedFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.body)
    }
}

/// Parses `src` as a function of `arity` variables.
pub fn parse(src: &str, arity: usize) -> Result<ParsedFunction> {
    let body = parser::parse_expr_text(src, arity)?;
    Ok(ParsedFunction {
        arity,
        body,
        source_text: src.to_string(),
        origin_value: None,
    })
}

/// Parses and evaluates in one step.
pub fn evaluate(src: &str, point: &[f64]) -> Result<f64> {
    parse(src, point.len())?.evaluate(point)
}
