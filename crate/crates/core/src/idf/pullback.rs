use std::collections::BTreeMap;

use super::form::{IDForm, IdfSpace};
use super::generator::{Generator, SlotSet};
use crate::error::{Error, Result};
use crate::expr::{Coord, JetExpression, MultiIndex};
use crate::jet::prolong;

/// Pull a form on the target jets `v^a_σ` back along the map `v^a = F^a`:
/// `v^a_σ ↦ D_σ F^a`, `d^v_K v^a_σ ↦ d^v_K(D_σ F^a)`, `d_K x ↦ d_K x`.
pub fn pullback(w: &IDForm, f: &[JetExpression], source: &IdfSpace) -> Result<IDForm> {
    let mut prolonged: BTreeMap<(u16, MultiIndex), JetExpression> = BTreeMap::new();
    let mut image = |a: u16, sigma: &MultiIndex| -> Result<JetExpression> {
        let fa = f.get(a as usize).ok_or_else(|| {
            Error::UndeclaredGenerator(format!("target component {} of {}", a, f.len()))
        })?;
        Ok(prolonged
            .entry((a, sigma.clone()))
            .or_insert_with(|| prolong(fa, sigma))
            .clone())
    };
    let mut out = IDForm::zero();
    for (word, c) in w.terms() {
        let mut rules = BTreeMap::new();
        for coord in c.coords() {
            if let Coord::Jet(a, sigma) = &coord {
                rules.insert(coord.clone(), image(*a, sigma)?);
            }
        }
        let mut acc: IDForm = c.substitute(&rules)?.into();
        for g in word {
            let img = match g {
                Generator::Base { .. } => IDForm::generator(g.clone()),
                Generator::Vertical { slots, j, sigma } => {
                    source.d_vertical_set(&image(*j, sigma)?.into(), *slots)?
                }
            };
            acc = acc.mul(&img);
        }
        out = out.add(&acc);
    }
    Ok(out)
}

/// `W_a^K`: for `K = ∅` the derivation `∂/∂v^a` on coefficients; otherwise
/// the derivation removing `d^v_K v^a`, with Koszul sign from the factors
/// it passes.
pub fn w_derivation(w: &IDForm, a: usize, k: SlotSet) -> IDForm {
    let target = Coord::jet(a, MultiIndex::empty());
    if k.is_empty() {
        w.derive(
            SlotSet::empty(),
            |c| Ok(c.partial(&target).into()),
            |_| Ok(IDForm::zero()),
        )
    } else {
        let hit = Generator::vertical(k, a, MultiIndex::empty());
        w.derive(
            k,
            |_| Ok(IDForm::zero()),
            |g| {
                Ok(if *g == hit {
                    IDForm::one()
                } else {
                    IDForm::zero()
                })
            },
        )
    }
    .expect("infallible")
}

/// `F̂* ∘ W_a^K`.
pub fn w_derivation_pulled_back(
    w: &IDForm,
    a: usize,
    k: SlotSet,
    f: &[JetExpression],
    source: &IdfSpace,
) -> Result<IDForm> {
    pullback(&w_derivation(w, a, k), f, source)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftComponent {
    pub component: usize,
    pub slots: SlotSet,
    pub form: IDForm,
}

/// The lifted generators `d^v_K F^a` for `K ⊆ {1, ..., level - 1}`, ordered
/// by `K` (as a bitmask), then by `a`.
pub fn liouville_lift(
    f: &[JetExpression],
    space: &IdfSpace,
    level: usize,
) -> Result<Vec<LiftComponent>> {
    if level == 0 || level > space.slots() {
        return Err(Error::SlotOutOfRange {
            slot: level,
            max: space.slots(),
        });
    }
    let mut out = Vec::new();
    for k in SlotSet::full(level - 1).subsets() {
        for (a, fa) in f.iter().enumerate() {
            out.push(LiftComponent {
                component: a,
                slots: k,
                form: space.d_vertical_set(&fa.clone().into(), k)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, Context};
    use crate::sampling::{random_cartan_form, random_expression, FormShape};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn source(k: usize) -> IdfSpace {
        IdfSpace::new(Context::new(&["x", "t"], &["u"]).unwrap(), k).unwrap()
    }

    fn heat_f(s: &IdfSpace) -> Vec<JetExpression> {
        vec![parse_expression("u_t - u_xx", s.context()).unwrap()]
    }

    #[test]
    fn heat_pullback_of_cartan_generator() {
        let s = source(2);
        let t = s.target(&["v"]).unwrap();
        let w = t.parse("dv[1]v").unwrap();
        assert_eq!(
            pullback(&w, &heat_f(&s), &s).unwrap(),
            s.parse("dv[1]u_t - dv[1]u_xx").unwrap()
        );
        let w = t.parse("v_x*d[2]x").unwrap();
        assert_eq!(
            pullback(&w, &heat_f(&s), &s).unwrap(),
            s.parse("(u_xt - u_xxx)*d[2]x").unwrap()
        );
        assert!(matches!(
            pullback(&t.parse("v").unwrap(), &[], &s),
            Err(Error::UndeclaredGenerator(_))
        ));
    }

    #[test]
    fn w_derivation_examples() {
        let s = source(2);
        let t = s.target(&["v"]).unwrap();
        let w = t.parse("v*dv[1]v").unwrap();
        assert_eq!(
            w_derivation(&w, 0, SlotSet::empty()),
            t.parse("dv[1]v").unwrap()
        );
        assert_eq!(
            w_derivation(&w, 0, SlotSet::single(1)),
            t.parse("v").unwrap()
        );
        let w = t.parse("dv[1]v_x*dv[1]v").unwrap();
        assert_eq!(
            w_derivation(&w, 0, SlotSet::single(1)),
            t.parse("-dv[1]v_x").unwrap()
        );
        let w = t.parse("dv[2]v_x*dv[1]v").unwrap();
        assert_eq!(
            w_derivation(&w, 0, SlotSet::single(1)),
            t.parse("dv[2]v_x").unwrap()
        );
        let pulled = w_derivation_pulled_back(
            &t.parse("v^2").unwrap(),
            0,
            SlotSet::empty(),
            &heat_f(&s),
            &s,
        )
        .unwrap();
        assert_eq!(pulled, s.parse("2*u_t - 2*u_xx").unwrap());
    }

    #[test]
    fn heat_liouville_lift() {
        let s = source(2);
        let lift = liouville_lift(&heat_f(&s), &s, 2).unwrap();
        let forms: Vec<_> = lift.iter().map(|l| l.form.clone()).collect();
        assert_eq!(
            forms,
            vec![
                s.parse("u_t - u_xx").unwrap(),
                s.parse("dv[1]u_t - dv[1]u_xx").unwrap()
            ]
        );
        assert_eq!(lift[1].slots, SlotSet::single(1));
        assert_eq!(liouville_lift(&heat_f(&s), &s, 1).unwrap().len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pullback_commutes_with_slot_differentials(seed in any::<u64>(), i in 1usize..3) {
            let s = source(2);
            let t = s.target(&["v"]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = vec![random_expression(s.context(), 2, 1, &mut rng)];
            let shape = FormShape { terms: 2, max_generators: 1, max_order: 1, max_slot_set: 1, coefficient_degree: 2 };
            let w = random_cartan_form(&t, &mut rng, &shape);
            let lhs = pullback(&t.d(&w, i).unwrap(), &f, &s).unwrap();
            let rhs = s.d(&pullback(&w, &f, &s).unwrap(), i).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
