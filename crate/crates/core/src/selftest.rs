//! Seeded randomized property suites, shared by the `selftest` subcommand
//! and the acceptance target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cdiff::{extend_p, green_check, CDiffOperator, Tensor};
use crate::error::Result;
use crate::expr::{Context, MultiIndex};
use crate::idf::{pullback, Generator, IDForm, IdfSpace, SlotSet};
use crate::sampling::{random_form, random_polynomial_of_degree, FormShape};

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// First few failing case indices.
    pub failed_cases: Vec<usize>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn run_suite(
    name: &str,
    cases: usize,
    seed: u64,
    mut case: impl FnMut(&mut ChaCha8Rng) -> Result<bool>,
) -> SuiteReport {
    let mut failed = Vec::new();
    let mut failures = 0;
    for i in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        if !case(&mut rng).unwrap_or(false) {
            failures += 1;
            if failed.len() < 8 {
                failed.push(i);
            }
        }
    }
    log::debug!("suite {name}: {failures}/{cases} failures");
    SuiteReport {
        name: name.to_string(),
        cases,
        failures,
        failed_cases: failed,
    }
}

fn xt_u() -> Context {
    Context::new(&["x", "t"], &["u"]).expect("valid context")
}

fn sign_for(a: &[Generator], b: &[Generator]) -> bool {
    let da = IDForm::word_degree(a);
    let db = IDForm::word_degree(b);
    da.iter().zip(&db).map(|(x, y)| x * y).sum::<u32>() % 2 == 1
}

/// Differential and product axioms of the iterated forms on `k ≤ 3` slots.
pub fn idf_axioms(cases: usize, seed: u64) -> SuiteReport {
    run_suite("idf-axioms", cases, seed, |rng| {
        let k = rng.gen_range(1..=3);
        let s = IdfSpace::new(xt_u(), k)?;
        let shape = FormShape {
            terms: 2,
            max_generators: 4,
            max_order: 2,
            max_slot_set: k,
            coefficient_degree: 3,
        };
        let w = random_form(&s, rng, &shape);
        for i in 1..=k {
            let d = s.d(&w, i)?;
            let dh = s.d_horizontal(&w, i)?;
            let dv = s.d_vertical(&w, i)?;
            if d != dh.add(&dv) || !s.d(&d, i)?.is_zero() {
                return Ok(false);
            }
            if !s.d_horizontal(&dh, i)?.is_zero() || !s.d_vertical(&dv, i)?.is_zero() {
                return Ok(false);
            }
            if !s
                .d_horizontal(&dv, i)?
                .add(&s.d_vertical(&dh, i)?)
                .is_zero()
            {
                return Ok(false);
            }
            for j in i + 1..=k {
                if s.d(&s.d(&w, j)?, i)? != s.d(&d, j)? {
                    return Ok(false);
                }
            }
        }
        let small = FormShape {
            max_generators: 2,
            ..shape
        };
        let a = random_form(&s, rng, &small);
        let b = random_form(&s, rng, &small);
        if a.mul(&b).mul(&w) != a.mul(&b.mul(&w)) {
            return Ok(false);
        }
        for (wa, ca) in a.terms() {
            for (wb, cb) in b.terms() {
                let x = IDForm::monomial(ca.clone(), wa.clone());
                let y = IDForm::monomial(cb.clone(), wb.clone());
                let swapped = y.mul(&x);
                let expected = if sign_for(wa, wb) {
                    swapped.neg()
                } else {
                    swapped
                };
                if x.mul(&y) != expected {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })
}

/// `F̂*` is multiplicative and commutes with every `d_i`, for `F = u_t - u_xx`
/// over a rank-one target bundle.
pub fn pullback_morphism(cases: usize, seed: u64) -> SuiteReport {
    run_suite("pullback", cases, seed, |rng| {
        let k = rng.gen_range(1..=2);
        let s = IdfSpace::new(xt_u(), k)?;
        let t = s.target(&["v"])?;
        let f = vec![s.parse("u_t - u_xx")?.as_function().expect("function")];
        let shape = FormShape {
            terms: 2,
            max_generators: 2,
            max_order: 1,
            max_slot_set: k,
            coefficient_degree: 2,
        };
        let a = random_form(&t, rng, &shape);
        let b = random_form(&t, rng, &shape);
        let pa = pullback(&a, &f, &s)?;
        let pb = pullback(&b, &f, &s)?;
        if pullback(&a.mul(&b), &f, &s)? != pa.mul(&pb) {
            return Ok(false);
        }
        for i in 1..=k {
            if pullback(&t.d(&a, i)?, &f, &s)? != s.d(&pa, i)? {
                return Ok(false);
            }
        }
        Ok(true)
    })
}

/// Scalar operator with a few random terms of order at most `max_order`.
pub fn random_scalar_operator<R: Rng>(ctx: &Context, rng: &mut R, max_order: u16) -> CDiffOperator {
    let mut op = CDiffOperator::zero_plain(1, 1);
    for _ in 0..rng.gen_range(1..=3) {
        let ox = rng.gen_range(0..=max_order);
        let ot = rng.gen_range(0..=(max_order - ox).min(1));
        let c = random_polynomial_of_degree(ctx, 2, 1, 2, rng);
        op.add_term(0, 0, MultiIndex::from_counts(&[ox, ot]), c.into());
    }
    op
}

/// Green identity, involution and anti-homomorphism of the formal adjoint.
pub fn adjoint_laws(cases: usize, seed: u64) -> SuiteReport {
    let s = IdfSpace::new(xt_u(), 1).expect("space");
    run_suite("adjoint", cases, seed, |rng| {
        let a = random_scalar_operator(s.context(), rng, 3);
        let b = random_scalar_operator(s.context(), rng, 3);
        Ok(green_check(&a, &s)?
            && a.adjoint().adjoint() == a
            && a.compose(&b)?.adjoint() == b.adjoint().compose(&a.adjoint())?)
    })
}

fn random_slot_form<R: Rng>(s: &IdfSpace, p: usize, slot: usize, rng: &mut R) -> IDForm {
    let mut acc = IDForm::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let word: Vec<Generator> = (0..p)
            .map(|_| {
                Generator::vertical(
                    SlotSet::single(slot),
                    0,
                    MultiIndex::from_counts(&[rng.gen_range(0..3), 0]),
                )
            })
            .collect();
        let c = random_polynomial_of_degree(s.context(), 2, 1, 2, rng);
        acc = acc.add(&IDForm::monomial(c, word));
    }
    acc
}

/// `[Δ₂∘Δ₁]_p = [Δ₂]_p∘[Δ₁]_p` and `[id]_p = id` on slot-2 tensors.
pub fn extension_functoriality(cases: usize, seed: u64) -> SuiteReport {
    let s = IdfSpace::new(xt_u(), 2).expect("space");
    let coefficients = FormShape {
        terms: 2,
        max_generators: 1,
        max_order: 1,
        max_slot_set: 1,
        coefficient_degree: 2,
    };
    run_suite("extension", cases, seed, |rng| {
        let p = rng.gen_range(0..=2);
        let mut ops = Vec::new();
        for _ in 0..2 {
            let mut op = CDiffOperator::zero_plain(1, 1);
            for _ in 0..2 {
                let sigma = MultiIndex::from_counts(&[rng.gen_range(0..3), rng.gen_range(0..2)]);
                // Coefficients live in slot 1 only.
                op.add_term(
                    0,
                    0,
                    sigma,
                    keep_slot(&random_form(&s, rng, &coefficients), 1),
                );
            }
            ops.push(op);
        }
        let left = keep_slot(&random_form(&s, rng, &coefficients), 1);
        let arg = Tensor::from_parts(&left, &random_slot_form(&s, p, 2, rng), 2)?;
        let lhs =
            extend_p(&ops[1].compose(&ops[0])?, p, 2).apply(std::slice::from_ref(&arg), None)?;
        let mid = extend_p(&ops[0], p, 2).apply(std::slice::from_ref(&arg), None)?;
        let rhs = extend_p(&ops[1], p, 2).apply(&mid, None)?;
        let id =
            extend_p(&CDiffOperator::identity(1), p, 2).apply(std::slice::from_ref(&arg), None)?;
        Ok(lhs == rhs && id == vec![arg])
    })
}

/// Drops every term with a generator outside `slot`.
fn keep_slot(w: &IDForm, slot: usize) -> IDForm {
    let mut out = IDForm::zero();
    for (word, c) in w.terms() {
        if word.iter().all(|g| g.slots() == SlotSet::single(slot)) {
            out = out.add(&IDForm::monomial(c.clone(), word.clone()));
        }
    }
    out
}

pub fn all_suites(cases: usize, seed: u64) -> Vec<SuiteReport> {
    vec![
        idf_axioms(cases, seed),
        pullback_morphism(cases, seed),
        adjoint_laws(cases, seed),
        extension_functoriality(cases, seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_a_few_cases() {
        for r in all_suites(6, 11) {
            assert!(r.passed(), "{r:?}");
        }
    }
}
