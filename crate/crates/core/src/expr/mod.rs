//! Exact differential polynomials (and rational functions) over the rationals
//! in jet coordinates.

mod coord;
mod jet;
mod parse;
mod poly;

pub use coord::{Context, Coord, MultiIndex};
pub use jet::{DisplayExpr, JetExpression};
pub use parse::{parse_ast, parse_expression, Ast, Mode};
pub use poly::{rat, ratio, Monomial, Polynomial, Rational};

pub(crate) use jet::write_polynomial;

use std::collections::BTreeMap;

use crate::error::Result;

pub fn partial_derivative(e: &JetExpression, z: &Coord) -> JetExpression {
    e.partial(z)
}

pub fn substitute(
    e: &JetExpression,
    rules: &BTreeMap<Coord, JetExpression>,
) -> Result<JetExpression> {
    e.substitute(rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> Context {
        Context::new(&["x", "t"], &["u"]).unwrap()
    }

    fn p(s: &str) -> JetExpression {
        parse_expression(s, &ctx()).unwrap()
    }

    fn coord(s: &str) -> Coord {
        match parse_ast(s, &ctx(), Mode::Scalar).unwrap() {
            Ast::Coord(c) => c,
            _ => unreachable!(),
        }
    }

    #[test]
    fn partial_examples() {
        assert_eq!(partial_derivative(&p("u*u_x"), &coord("u_x")), p("u"));
        assert_eq!(partial_derivative(&p("x*u^2"), &coord("u")), p("2*x*u"));
        assert!(partial_derivative(&p("u_xx"), &coord("u")).is_zero());
    }

    #[test]
    fn substitute_examples() {
        let mut rules = BTreeMap::new();
        rules.insert(coord("u_t"), p("u_xx"));
        assert!(substitute(&p("u_t - u_xx"), &rules).unwrap().is_zero());
    }

    const ATOMS: [&str; 6] = ["u", "u_x", "x", "t", "u_xt", "u_xx"];

    fn arb_poly() -> impl Strategy<Value = JetExpression> {
        proptest::collection::vec(
            (
                -4i64..5,
                proptest::collection::vec((0usize..6, 0u32..3), 0..3),
            ),
            0..4,
        )
        .prop_map(|terms| {
            let mut acc = JetExpression::zero();
            for (c, factors) in terms {
                let mut t = JetExpression::from(c);
                for (a, e) in factors {
                    t = t.mul(&p(ATOMS[a]).pow(e as i64).unwrap());
                }
                acc = acc.add(&t);
            }
            acc
        })
    }

    fn arb_expr() -> impl Strategy<Value = JetExpression> {
        (arb_poly(), 0usize..6, 1i64..4, proptest::bool::ANY).prop_map(|(a, atom, c, rational)| {
            if !rational {
                return a;
            }
            let den = p(ATOMS[atom]).add(&JetExpression::from(c));
            a.div(&den).unwrap()
        })
    }

    fn eval_at(e: &JetExpression, seed: i64) -> Option<Rational> {
        e.eval(&|c: &Coord| {
            let h = match c {
                Coord::Indep(m) => *m as i64 * 7 + 3,
                Coord::Jet(j, s) => {
                    11 + *j as i64 * 5 + s.counts().iter().map(|&k| k as i64 * 13).sum::<i64>()
                }
            };
            ratio((h * seed * 31 + seed * seed) % 97 - 48, (seed % 7) + 2)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(a in arb_expr(), b in arb_expr(), c in arb_expr()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }

        #[test]
        fn leibniz(a in arb_expr(), b in arb_expr(), z in 0usize..6) {
            let z = coord(ATOMS[z]);
            let lhs = a.mul(&b).partial(&z);
            let rhs = a.partial(&z).mul(&b).add(&a.mul(&b.partial(&z)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn canonical_zero_iff_equal_values(a in arb_expr(), b in arb_expr()) {
            let same = a.sub(&a.add(&b).sub(&b));
            prop_assert!(same.is_zero());
            let diff = a.sub(&b);
            let mut agree = 0;
            let mut disagree = 0;
            for seed in 1..40 {
                if let (Some(x), Some(y)) = (eval_at(&a, seed), eval_at(&b, seed)) {
                    if x == y { agree += 1 } else { disagree += 1 }
                }
            }
            prop_assert!(agree + disagree >= 5);
            // zero difference iff no evaluation point separates the two
            prop_assert_eq!(diff.is_zero(), disagree == 0);
        }

        #[test]
        fn print_parse_identity(a in arb_expr()) {
            let s = a.to_string_in(&ctx());
            prop_assert_eq!(parse_expression(&s, &ctx()).unwrap(), a);
        }
    }
}
