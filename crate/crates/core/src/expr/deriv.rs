//! Symbolic differentiation.

use super::ast::ExprNode;

fn b(e: ExprNode) -> Box<ExprNode> {
    Box::new(e)
}

/// Exact symbolic partial derivative of `expr` with respect to `x<var>`.
///
/// `abs` differentiates to `sign(u)·u'`, with the sign written as `u/|u|`
/// so that evaluation at `u = 0` surfaces as a domain error rather than a
/// silent wrong value. Powers with a constant exponent use the power rule
/// (valid for negative bases at integer exponents); powers with a variable
/// exponent go through `u^v = exp(v·ln u)`.
pub fn differentiate(expr: &ExprNode, var: usize) -> ExprNode {
    use ExprNode::*;
    match expr {
        Constant(_) => Constant(0.0),
        Variable(i) => {
            if *i == var {
                Constant(1.0)
            } else {
                Constant(0.0)
            }
        }
        Add(u, v) => Add(b(differentiate(u, var)), b(differentiate(v, var))),
        Sub(u, v) => Sub(b(differentiate(u, var)), b(differentiate(v, var))),
        Mul(u, v) => Add(
            b(Mul(b(differentiate(u, var)), v.clone())),
            b(Mul(u.clone(), b(differentiate(v, var)))),
        ),
        Div(u, v) => Div(
            b(Sub(
                b(Mul(b(differentiate(u, var)), v.clone())),
                b(Mul(u.clone(), b(differentiate(v, var)))),
            )),
            b(Pow(v.clone(), b(Constant(2.0)))),
        ),
        Pow(u, v) => match v.as_ref() {
            // power rule: d(u^c) = c·u^(c-1)·u'
            Constant(c) => Mul(
                b(Mul(b(Constant(*c)), b(Pow(u.clone(), b(Constant(c - 1.0)))))),
                b(differentiate(u, var)),
            ),
            // general rule via u^v = exp(v·ln u):
            // d(u^v) = u^v · (v'·ln u + v·u'/u)
            _ => Mul(
                b(Pow(u.clone(), v.clone())),
                b(Add(
                    b(Mul(b(differentiate(v, var)), b(Ln(u.clone())))),
                    b(Div(b(Mul(v.clone(), b(differentiate(u, var)))), u.clone())),
                )),
            ),
        },
        Neg(u) => Neg(b(differentiate(u, var))),
        Exp(u) => Mul(b(Exp(u.clone())), b(differentiate(u, var))),
        Ln(u) => Div(b(differentiate(u, var)), u.clone()),
        // sign(u)·u', with sign(u) spelled u/|u| (domain error at u = 0)
        Abs(u) => Mul(
            b(Div(u.clone(), b(Abs(u.clone())))),
            b(differentiate(u, var)),
        ),
        Sqrt(u) => Div(
            b(differentiate(u, var)),
            b(Mul(b(Constant(2.0)), b(Sqrt(u.clone())))),
        ),
        Sin(u) => Mul(b(Cos(u.clone())), b(differentiate(u, var))),
        Cos(u) => Neg(b(Mul(b(Sin(u.clone())), b(differentiate(u, var))))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::expr::parser::parse_expr_text;

    fn deriv_at(src: &str, arity: usize, var: usize, point: &[f64]) -> f64 {
        let e = parse_expr_text(src, arity).unwrap();
        differentiate(&e, var).eval(point).unwrap()
    }

    /// Central finite difference with step 1e-5.
    fn central_diff(e: &ExprNode, var: usize, point: &[f64]) -> f64 {
        let h = 1e-5;
        let mut hi = point.to_vec();
        let mut lo = point.to_vec();
        hi[var - 1] += h;
        lo[var - 1] -= h;
        (e.eval(&hi).unwrap() - e.eval(&lo).unwrap()) / (2.0 * h)
    }

    #[test]
    fn square_differentiates_to_double() {
        for x in [0.3, 1.0, -2.5] {
            assert!((deriv_at("x1^2", 1, 1, &[x]) - 2.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_wrt_absent_variable_is_zero() {
        assert_eq!(deriv_at("x1^2", 2, 2, &[3.0, 4.0]), 0.0);
    }

    #[test]
    fn flat_bump_derivative() {
        // d/dx exp(-1/x^2) = exp(-1/x^2) · 2/x^3; at x = 0.5 that is 16·e^{-4}
        let got = deriv_at("exp(-1/(x1^2))", 1, 1, &[0.5]);
        let want = 16.0 * (-4.0f64).exp();
        assert!((got - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn abs_derivative_is_sign_times_inner() {
        let e = parse_expr_text("abs(x1)", 1).unwrap();
        let d = differentiate(&e, 1);
        assert_eq!(d.eval(&[2.5]).unwrap(), 1.0);
        assert_eq!(d.eval(&[-2.5]).unwrap(), -1.0);
        // sign(0) is a domain error, not a silent 0
        assert!(matches!(d.eval(&[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn variable_exponent_uses_general_rule() {
        // d/dx x^x = x^x (ln x + 1)
        let e = parse_expr_text("x1^x1", 1).unwrap();
        let d = differentiate(&e, 1);
        for x in [0.5f64, 1.0, 2.0] {
            let want = x.powf(x) * (x.ln() + 1.0);
            assert!((d.eval(&[x]).unwrap() - want).abs() < 1e-12 * (1.0 + want.abs()));
        }
        // but requires a positive base
        assert!(d.eval(&[-1.0]).is_err());
    }

    #[test]
    fn negative_base_integer_power_rule() {
        // power rule keeps integer powers usable at negative bases
        let e = parse_expr_text("x1^3", 1).unwrap();
        let d = differentiate(&e, 1);
        assert_eq!(d.eval(&[-2.0]).unwrap(), 12.0);
    }

    #[test]
    fn matches_finite_differences() {
        let cases: [(&str, usize, Vec<Vec<f64>>); 5] = [
            ("x1^2 + 3*x2", 2, vec![vec![0.7, -1.2], vec![2.0, 4.0]]),
            ("sin(x1)*cos(x2)", 2, vec![vec![0.4, 1.1]]),
            ("sqrt(x1 + 2)", 1, vec![vec![0.5], vec![3.0]]),
            ("ln(x1^2 + 1)", 1, vec![vec![-0.8], vec![1.4]]),
            ("exp(-1/(x1^2))", 1, vec![vec![0.6], vec![-0.9]]),
        ];
        for (src, arity, points) in cases {
            let e = parse_expr_text(src, arity).unwrap();
            for point in points {
                for var in 1..=arity {
                    let sym = differentiate(&e, var).eval(&point).unwrap();
                    let fd = central_diff(&e, var, &point);
                    assert!(
                        (sym - fd).abs() <= 1e-6 * (1.0 + sym.abs()),
                        "{src} d/dx{var} at {point:?}: symbolic {sym} vs fd {fd}"
                    );
                }
            }
        }
    }
}
