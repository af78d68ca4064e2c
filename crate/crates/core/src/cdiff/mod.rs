//! C-differential operators `Σ_σ a_σ D_σ` with form-valued coefficients:
//! linearizations and their iterated lifts, formal adjoints, composition,
//! restriction to an equation, and tensor extensions `[Δ]_p`.

mod extension;
mod linearization;
mod operator;

pub use extension::{alt_p, extend_p, include_p, ExtendedOperator, PairTensor, Tensor};
pub use linearization::{
    adjoint_lifted, green_check, green_check_with, lift_labels, lift_linearize, linearize,
    linearize_functions,
};
pub use operator::{
    parse_operator, BlockLabel, CDiffOperator, Entry, EntryJson, OperatorJson, TermJson,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Context, JetExpression, MultiIndex};
    use crate::idf::{IDForm, IdfSpace};
    use crate::jet::{parse_system, EquationSystem};
    use crate::sampling::random_polynomial;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space() -> IdfSpace {
        IdfSpace::new(Context::new(&["x", "t"], &["u"]).unwrap(), 1).unwrap()
    }

    fn random_scalar_operator(rng: &mut ChaCha8Rng, max_order: u16) -> CDiffOperator {
        let s = space();
        let mut op = CDiffOperator::zero_plain(1, 1);
        for _ in 0..rng.gen_range(1..=3) {
            let ox = rng.gen_range(0..=max_order);
            let ot = rng.gen_range(0..=(max_order - ox).min(1));
            let c: JetExpression = random_polynomial(s.context(), 2, 1, rng);
            op.add_term(0, 0, MultiIndex::from_counts(&[ox, ot]), c.into());
        }
        op
    }

    #[test]
    fn restriction_of_heat_linearization() {
        let sys =
            parse_system("[system]\nindependent = x, t\ndependent = u\n[equations]\nu_t = u_xx\n")
                .and_then(EquationSystem::from_raw)
                .unwrap();
        let s = space();
        let l = linearize(&sys).restrict(&sys, &s).unwrap();
        let u: IDForm = s.parse("u").unwrap();
        assert!(l.apply_on(&[u], &sys, &s).unwrap()[0].is_zero());
        assert_eq!(l.restrict(&sys, &s).unwrap(), l);
        let xu = s.parse("x*u_x").unwrap();
        let on = linearize(&sys).apply(std::slice::from_ref(&xu)).unwrap();
        assert_eq!(
            s.restrict(&on[0], &sys).unwrap(),
            l.apply_on(&[xu], &sys, &s).unwrap()[0]
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn adjoint_is_involutive_antihomomorphism(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_scalar_operator(&mut rng, 3);
            let b = random_scalar_operator(&mut rng, 3);
            prop_assert_eq!(a.adjoint().adjoint(), a.clone());
            prop_assert_eq!(a.compose(&b).unwrap().adjoint(), b.adjoint().compose(&a.adjoint()).unwrap());
            prop_assert!(green_check(&a, &space()).unwrap());
        }

        #[test]
        fn restriction_commutes_with_application(seed in any::<u64>()) {
            let sys = parse_system("[system]\nindependent = x, t\ndependent = u\n[equations]\nu_t = u*u_x + u_xx\n")
                .and_then(EquationSystem::from_raw)
                .unwrap();
            let s = space();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let op = random_scalar_operator(&mut rng, 2);
            let arg: IDForm = random_polynomial(s.context(), 2, 1, &mut rng).into();
            let lhs = s.restrict(&op.apply(std::slice::from_ref(&arg)).unwrap()[0], &sys).unwrap();
            let rhs = op.restrict(&sys, &s).unwrap().apply_on(&[arg], &sys, &s).unwrap();
            prop_assert_eq!(lhs, rhs[0].clone());
        }
    }
}
