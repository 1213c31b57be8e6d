//! Expression tree, evaluation, and printing.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A node in a scalar expression tree over variables `x1..xn`.
///
/// Variables are 1-based: `Variable(1)` is `x1`. Arity is tracked by the
/// surrounding [`ParsedFunction`](super::ParsedFunction), not by the tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExprNode {
    Constant(f64),
    Variable(usize),
    Add(Box<ExprNode>, Box<ExprNode>),
    Sub(Box<ExprNode>, Box<ExprNode>),
    Mul(Box<ExprNode>, Box<ExprNode>),
    Div(Box<ExprNode>, Box<ExprNode>),
    Pow(Box<ExprNode>, Box<ExprNode>),
    Neg(Box<ExprNode>),
    Exp(Box<ExprNode>),
    Ln(Box<ExprNode>),
    Abs(Box<ExprNode>),
    Sqrt(Box<ExprNode>),
    Sin(Box<ExprNode>),
    Cos(Box<ExprNode>),
}

impl ExprNode {
    /// Largest variable index appearing in the tree (0 for constants).
    pub fn max_variable(&self) -> usize {
        use ExprNode::*;
        match self {
            Constant(_) => 0,
            Variable(i) => *i,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
                a.max_variable().max(b.max_variable())
            }
            Neg(a) | Exp(a) | Ln(a) | Abs(a) | Sqrt(a) | Sin(a) | Cos(a) => a.max_variable(),
        }
    }

    /// Evaluates the tree at `point` (`point[i-1]` is the value of `xi`).
    ///
    /// Domain violations (log of a non-positive number, division by zero,
    /// fractional power of a negative base, …) and non-finite results are
    /// reported as [`Error::Domain`]. Variables beyond the point length are
    /// reported as [`Error::Arity`].
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        use ExprNode::*;
        let v = match self {
            Constant(c) => *c,
            Variable(i) => {
                if *i == 0 || *i > point.len() {
                    return Err(Error::Arity {
                        index: *i,
                        arity: point.len(),
                    });
                }
                point[*i - 1]
            }
            Add(a, b) => a.eval(point)? + b.eval(point)?,
            Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Div(a, b) => {
                let d = b.eval(point)?;
                if d == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.eval(point)? / d
            }
            Pow(a, b) => {
                let base = a.eval(point)?;
                let exp = b.eval(point)?;
                if base < 0.0 && exp.fract() != 0.0 {
                    return Err(Error::Domain(format!(
                        "fractional power {exp} of negative base {base}"
                    )));
                }
                if base == 0.0 && exp < 0.0 {
                    return Err(Error::Domain(format!("zero raised to negative power {exp}")));
                }
                base.powf(exp)
            }
            Neg(a) => -a.eval(point)?,
            Exp(a) => a.eval(point)?.exp(),
            Ln(a) => {
                let u = a.eval(point)?;
                if u <= 0.0 {
                    return Err(Error::Domain(format!("ln of non-positive value {u}")));
                }
                u.ln()
            }
            Abs(a) => a.eval(point)?.abs(),
            Sqrt(a) => {
                let u = a.eval(point)?;
                if u < 0.0 {
                    return Err(Error::Domain(format!("sqrt of negative value {u}")));
                }
                u.sqrt()
            }
            Sin(a) => a.eval(point)?.sin(),
            Cos(a) => a.eval(point)?.cos(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("non-finite result {v}")))
        }
    }

    /// Printing precedence. Higher binds tighter.
    fn prec(&self) -> u8 {
        use ExprNode::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(_) => 3,
            Constant(c) if *c < 0.0 => 3, // prints with a leading minus
            Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        use ExprNode::*;
        let p = self.prec();
        if p < min_prec {
            write!(f, "(")?;
        }
        match self {
            Constant(c) => write!(f, "{c}")?,
            Variable(i) => write!(f, "x{i}")?,
            Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            Pow(a, b) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^")?;
                b.fmt_prec(f, 4)?;
            }
            Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 4)?;
            }
            Exp(a) => write_call(f, "exp", a)?,
            Ln(a) => write_call(f, "ln", a)?,
            Abs(a) => write_call(f, "abs", a)?,
            Sqrt(a) => write_call(f, "sqrt", a)?,
            Sin(a) => write_call(f, "sin", a)?,
            Cos(a) => write_call(f, "cos", a)?,
        }
        if p < min_prec {
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &str, arg: &ExprNode) -> fmt::Result {
    write!(f, "{name}(")?;
    arg.fmt_prec(f, 0)?;
    write!(f, ")")
}

impl fmt::Display for ExprNode {
    /// Prints an expression that reparses to the same value at every point.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Box<ExprNode> {
        Box::new(ExprNode::Constant(v))
    }
    fn x(i: usize) -> Box<ExprNode> {
        Box::new(ExprNode::Variable(i))
    }

    #[test]
    fn eval_arithmetic() {
        // x1^2 + 3*x2 at (2, 4) = 16
        let e = ExprNode::Add(
            Box::new(ExprNode::Pow(x(1), c(2.0))),
            Box::new(ExprNode::Mul(c(3.0), x(2))),
        );
        assert_eq!(e.eval(&[2.0, 4.0]).unwrap(), 16.0);
    }

    #[test]
    fn eval_division_by_zero() {
        let e = ExprNode::Div(c(1.0), x(1));
        assert!(matches!(e.eval(&[0.0]), Err(Error::Domain(_))));
        assert_eq!(e.eval(&[4.0]).unwrap(), 0.25);
    }

    #[test]
    fn eval_ln_domain() {
        let e = ExprNode::Ln(x(1));
        assert!(matches!(e.eval(&[-1.0]), Err(Error::Domain(_))));
        assert!(matches!(e.eval(&[0.0]), Err(Error::Domain(_))));
        assert!((e.eval(&[std::f64::consts::E]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_sqrt_domain() {
        let e = ExprNode::Sqrt(x(1));
        assert!(matches!(e.eval(&[-0.5]), Err(Error::Domain(_))));
        assert_eq!(e.eval(&[0.0]).unwrap(), 0.0);
        assert_eq!(e.eval(&[9.0]).unwrap(), 3.0);
    }

    #[test]
    fn eval_pow_negative_base() {
        // integer exponents of negative bases are fine
        let cube = ExprNode::Pow(x(1), c(3.0));
        assert_eq!(cube.eval(&[-2.0]).unwrap(), -8.0);
        // fractional exponents of negative bases are not
        let frac = ExprNode::Pow(x(1), c(0.5));
        assert!(matches!(frac.eval(&[-2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_overflow_is_domain_error() {
        let e = ExprNode::Exp(x(1));
        assert!(matches!(e.eval(&[1e9]), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_variable_out_of_range() {
        let e = ExprNode::Variable(3);
        assert!(matches!(
            e.eval(&[1.0, 2.0]),
            Err(Error::Arity { index: 3, arity: 2 })
        ));
    }

    #[test]
    fn display_respects_precedence() {
        // (x1 + 1) * x2 must keep its parentheses
        let e = ExprNode::Mul(Box::new(ExprNode::Add(x(1), c(1.0))), x(2));
        assert_eq!(e.to_string(), "(x1 + 1)*x2");
        // a / (b * c) keeps the denominator grouped
        let e = ExprNode::Div(x(1), Box::new(ExprNode::Mul(x(2), x(3))));
        assert_eq!(e.to_string(), "x1/(x2*x3)");
        // (-x1)^2 is not -x1^2
        let e = ExprNode::Pow(Box::new(ExprNode::Neg(x(1))), c(2.0));
        assert_eq!(e.to_string(), "(-x1)^2");
        let e = ExprNode::Neg(Box::new(ExprNode::Pow(x(1), c(2.0))));
        assert_eq!(e.to_string(), "-x1^2");
    }
}
