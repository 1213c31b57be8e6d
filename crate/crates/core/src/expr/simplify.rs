//! Constant folding and algebraic identity elimination.

use super::ast::ExprNode;

/// Simplifies `expr` by folding constant subtrees and dropping unit/zero
/// identities (`u + 0`, `u*1`, `u*0`, `0/u`, `u/1`, `u^1`, `u^0`, `--u`).
///
/// The value is preserved at every point where both the input and the
/// output are defined. Constant subtrees are folded only when the folded
/// value is finite, so `1/0` stays an evaluation-time domain error.
pub fn simplify(expr: &ExprNode) -> ExprNode {
    let mut current = expr.clone();
    // identity elimination can expose new folding opportunities; iterate
    // to a fixed point (depth-bounded trees settle in a few passes)
    for _ in 0..8 {
        let next = simplify_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn constant_of(e: &ExprNode) -> Option<f64> {
    match e {
        ExprNode::Constant(c) => Some(*c),
        _ => None,
    }
}

fn simplify_once(expr: &ExprNode) -> ExprNode {
    use ExprNode::*;
    // simplify children first
    let e = match expr {
        Constant(_) | Variable(_) => expr.clone(),
        Add(a, b) => Add(Box::new(simplify_once(a)), Box::new(simplify_once(b))),
        Sub(a, b) => Sub(Box::new(simplify_once(a)), Box::new(simplify_once(b))),
        Mul(a, b) => Mul(Box::new(simplify_once(a)), Box::new(simplify_once(b))),
        Div(a, b) => Div(Box::new(simplify_once(a)), Box::new(simplify_once(b))),
        Pow(a, b) => Pow(Box::new(simplify_once(a)), Box::new(simplify_once(b))),
        Neg(a) => Neg(Box::new(simplify_once(a))),
        Exp(a) => Exp(Box::new(simplify_once(a))),
        Ln(a) => Ln(Box::new(simplify_once(a))),
        Abs(a) => Abs(Box::new(simplify_once(a))),
        Sqrt(a) => Sqrt(Box::new(simplify_once(a))),
        Sin(a) => Sin(Box::new(simplify_once(a))),
        Cos(a) => Cos(Box::new(simplify_once(a))),
    };

    // fold fully-constant nodes when the result is finite
    let all_const = match &e {
        Constant(_) | Variable(_) => false, // already minimal
        Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
            constant_of(a).is_some() && constant_of(b).is_some()
        }
        Neg(a) | Exp(a) | Ln(a) | Abs(a) | Sqrt(a) | Sin(a) | Cos(a) => constant_of(a).is_some(),
    };
    if all_const {
        if let Ok(v) = e.eval(&[]) {
            return Constant(v);
        }
    }

    // identity elimination
    match &e {
        Add(a, b) => {
            if constant_of(a) == Some(0.0) {
                return (**b).clone();
            }
            if constant_of(b) == Some(0.0) {
                return (**a).clone();
            }
        }
        Sub(a, b) => {
            if constant_of(b) == Some(0.0) {
                return (**a).clone();
            }
            if constant_of(a) == Some(0.0) {
                return Neg(b.clone());
            }
        }
        Mul(a, b) => {
            if constant_of(a) == Some(1.0) {
                return (**b).clone();
            }
            if constant_of(b) == Some(1.0) {
                return (**a).clone();
            }
            if constant_of(a) == Some(0.0) || constant_of(b) == Some(0.0) {
                return Constant(0.0);
            }
        }
        Div(a, b) => {
            if constant_of(b) == Some(1.0) {
                return (**a).clone();
            }
            if constant_of(a) == Some(0.0) {
                return Constant(0.0);
            }
        }
        Pow(a, b) => {
            if constant_of(b) == Some(1.0) {
                return (**a).clone();
            }
            if constant_of(b) == Some(0.0) {
                return Constant(1.0);
            }
        }
        Neg(a) => {
            if let Neg(inner) = a.as_ref() {
                return (**inner).clone();
            }
        }
        _ => {}
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parser::parse_expr_text;

    #[test]
    fn unit_and_zero_identities() {
        let e = parse_expr_text("x1 * 1 + 0", 1).unwrap();
        assert_eq!(simplify(&e), ExprNode::Variable(1));
    }

    #[test]
    fn constant_folding() {
        let e = parse_expr_text("2 * 3", 0).unwrap();
        assert_eq!(simplify(&e), ExprNode::Constant(6.0));
        let e = parse_expr_text("2^3 + 1", 0).unwrap();
        assert_eq!(simplify(&e), ExprNode::Constant(9.0));
    }

    #[test]
    fn division_by_zero_is_not_folded() {
        let e = parse_expr_text("1/0", 0).unwrap();
        assert_eq!(simplify(&e), e);
        assert!(simplify(&e).eval(&[]).is_err());
    }

    #[test]
    fn double_negation() {
        let e = parse_expr_text("-(-x1)", 1).unwrap();
        assert_eq!(simplify(&e), ExprNode::Variable(1));
    }

    #[test]
    fn derivative_noise_collapses() {
        // d/dx1 (x1^2) produces 2*x1^1*1; simplify should reach 2*x1
        let e = parse_expr_text("x1^2", 1).unwrap();
        let d = crate::expr::deriv::differentiate(&e, 1);
        let s = simplify(&d);
        let want = ExprNode::Mul(
            Box::new(ExprNode::Constant(2.0)),
            Box::new(ExprNode::Variable(1)),
        );
        assert_eq!(s, want);
    }

    #[test]
    fn value_preserved_on_common_domain() {
        let sources = ["x1*1 + 0*x2", "(x1 + 0)/(1*x2)", "x1^1 - -(-x2)", "0 - x1"];
        let points = [[0.7, 1.3], [-2.0, 0.4], [5.5, -3.25]];
        for src in sources {
            let e = parse_expr_text(src, 2).unwrap();
            let s = simplify(&e);
            for p in &points {
                let a = e.eval(p).unwrap();
                let b = s.eval(p).unwrap();
                assert!(
                    (a - b).abs() <= 1e-12 * (1.0 + a.abs()),
                    "{src} at {p:?}: {a} vs {b}"
                );
            }
        }
    }
}
