//! Total derivatives, prolongation, the Euler operator, and evolution
//! systems with restriction to their infinite prolongation.

mod format;
mod system;

pub use format::{parse_system, write_system};
pub use system::{EquationSystem, NormalFormReport, RawSystem, DEFAULT_PROLONGATION_CAP};

use crate::expr::{Coord, JetExpression, MultiIndex};

/// A tuple of jet expressions, one per dependent variable (or per equation).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Section(pub Vec<JetExpression>);

impl Section {
    pub fn zero(m: usize) -> Self {
        Section(vec![JetExpression::zero(); m])
    }

    pub fn components(&self) -> &[JetExpression] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(JetExpression::is_zero)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `D_mu e = ∂e/∂x^mu + Σ u^j_{σ+mu} ∂e/∂u^j_σ` on free jets.
pub fn total_derivative(e: &JetExpression, mu: usize) -> JetExpression {
    let mut acc = JetExpression::zero();
    for c in e.coords() {
        let d = e.partial(&c);
        if d.is_zero() {
            continue;
        }
        match &c {
            Coord::Indep(nu) => {
                if *nu as usize == mu {
                    acc = acc.add(&d);
                }
            }
            Coord::Jet(j, sigma) => {
                let next = JetExpression::var(Coord::Jet(*j, sigma.with_added(mu)));
                acc = acc.add(&next.mul(&d));
            }
        }
    }
    acc
}

/// Iterated total derivative `D_σ e`.
pub fn prolong(e: &JetExpression, sigma: &MultiIndex) -> JetExpression {
    let mut out = e.clone();
    for mu in sigma.directions() {
        out = total_derivative(&out, mu);
    }
    out
}

/// Variational derivative with respect to each of the first `m` dependent
/// variables, extended to cover every dependent index present in `density`.
pub fn euler_operator(density: &JetExpression, m: usize) -> Section {
    let coords = density.coords();
    let m = coords
        .iter()
        .filter_map(|c| match c {
            Coord::Jet(j, _) => Some(*j as usize + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0)
        .max(m);
    let mut out = vec![JetExpression::zero(); m];
    for c in &coords {
        if let Coord::Jet(j, sigma) = c {
            let term = prolong(&density.partial(c), sigma);
            let slot = &mut out[*j as usize];
            *slot = if sigma.order() % 2 == 0 {
                slot.add(&term)
            } else {
                slot.sub(&term)
            };
        }
    }
    Section(out)
}

pub fn is_total_divergence(e: &JetExpression) -> bool {
    euler_operator(e, 0).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, Context};
    use proptest::prelude::*;

    fn ctx() -> Context {
        Context::new(&["x", "t"], &["u"]).unwrap()
    }

    fn p(s: &str) -> JetExpression {
        parse_expression(s, &ctx()).unwrap()
    }

    #[test]
    fn total_derivative_examples() {
        assert_eq!(total_derivative(&p("u*u_x"), 0), p("u_x^2 + u*u_xx"));
        assert_eq!(total_derivative(&p("x"), 0), p("1"));
        assert_eq!(total_derivative(&p("u_x"), 1), p("u_xt"));
    }

    #[test]
    fn prolong_examples() {
        let xx = MultiIndex::from_counts(&[2]);
        assert_eq!(prolong(&p("u"), &xx), p("u_xx"));
        assert_eq!(prolong(&p("u*u_x"), &xx), p("3*u_x*u_xx + u*u_xxx"));
        assert_eq!(prolong(&p("u*x"), &MultiIndex::empty()), p("u*x"));
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_operator(&p("u^3"), 1).0, vec![p("3*u^2")]);
        assert_eq!(euler_operator(&p("u_x^2/2"), 1).0, vec![p("-u_xx")]);
        assert!(euler_operator(&total_derivative(&p("u*u_xx"), 0), 1).is_zero());
    }

    #[test]
    fn divergence_examples() {
        assert!(is_total_divergence(&p("u_x*u_xx")));
        assert!(!is_total_divergence(&p("u^2")));
        assert!(is_total_divergence(&JetExpression::zero()));
    }

    const ATOMS: [&str; 7] = ["u", "u_x", "x", "t", "u_t", "u_xx", "u_xt"];

    fn arb() -> impl Strategy<Value = JetExpression> {
        proptest::collection::vec((-3i64..4, proptest::collection::vec(0usize..7, 0..3)), 0..4)
            .prop_map(|terms| {
                let mut acc = JetExpression::zero();
                for (c, fs) in terms {
                    let mut t = JetExpression::from(c);
                    for f in fs {
                        t = t.mul(&p(ATOMS[f]));
                    }
                    acc = acc.add(&t);
                }
                acc
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn total_derivatives_commute(e in arb()) {
            prop_assert_eq!(total_derivative(&total_derivative(&e, 0), 1), total_derivative(&total_derivative(&e, 1), 0));
        }

        #[test]
        fn euler_kills_divergences(e in arb(), mu in 0usize..2) {
            prop_assert!(euler_operator(&total_derivative(&e, mu), 1).is_zero());
        }

        #[test]
        fn total_derivative_is_derivation(a in arb(), b in arb()) {
            let lhs = total_derivative(&a.mul(&b), 0);
            let rhs = total_derivative(&a, 0).mul(&b).add(&a.mul(&total_derivative(&b, 0)));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
