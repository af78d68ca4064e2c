//! Seeded random expressions and forms for self-checks and tests.

use rand::Rng;

use crate::expr::{Context, Coord, JetExpression, MultiIndex};
use crate::idf::{Generator, IDForm, IdfSpace, SlotSet};

#[derive(Clone, Debug)]
pub struct FormShape {
    pub terms: usize,
    pub max_generators: usize,
    pub max_order: usize,
    /// Largest `|K|` for a generator slot set.
    pub max_slot_set: usize,
    /// Largest total degree of a coefficient monomial.
    pub coefficient_degree: usize,
}

fn random_sigma<R: Rng>(n: usize, max_order: usize, rng: &mut R) -> MultiIndex {
    let order = rng.gen_range(0..=max_order);
    let mut counts = vec![0u16; n];
    for _ in 0..order {
        counts[rng.gen_range(0..n)] += 1;
    }
    MultiIndex::from_counts(&counts)
}

pub fn random_coord<R: Rng>(ctx: &Context, max_order: usize, rng: &mut R) -> Coord {
    if rng.gen_bool(0.2) {
        Coord::indep(rng.gen_range(0..ctx.n()))
    } else {
        Coord::jet(
            rng.gen_range(0..ctx.m()),
            random_sigma(ctx.n(), max_order, rng),
        )
    }
}

/// Small-integer polynomial with up to `terms` terms of degree at most 2.
pub fn random_polynomial<R: Rng>(
    ctx: &Context,
    terms: usize,
    max_order: usize,
    rng: &mut R,
) -> JetExpression {
    random_polynomial_of_degree(ctx, terms, max_order, 2, rng)
}

pub fn random_polynomial_of_degree<R: Rng>(
    ctx: &Context,
    terms: usize,
    max_order: usize,
    degree: usize,
    rng: &mut R,
) -> JetExpression {
    let mut acc = JetExpression::zero();
    for _ in 0..rng.gen_range(1..=terms.max(1)) {
        let mut t = JetExpression::from(rng.gen_range(-3i64..=3));
        for _ in 0..rng.gen_range(0..=degree) {
            t = t.mul(&JetExpression::var(random_coord(ctx, max_order, rng)));
        }
        acc = acc.add(&t);
    }
    acc
}

/// Like [`random_polynomial`], occasionally divided by `1 + c`.
pub fn random_expression<R: Rng>(
    ctx: &Context,
    terms: usize,
    max_order: usize,
    rng: &mut R,
) -> JetExpression {
    let num = random_polynomial(ctx, terms, max_order, rng);
    if rng.gen_bool(0.25) {
        let den =
            JetExpression::var(random_coord(ctx, max_order, rng)).add(&JetExpression::from(1));
        num.div(&den).expect("nonzero denominator")
    } else {
        num
    }
}

pub fn random_slot_set<R: Rng>(slots: usize, max_size: usize, rng: &mut R) -> SlotSet {
    loop {
        let k = SlotSet::from_bits(rng.gen_range(1..(1u16 << slots)) as u8);
        if k.len() as usize <= max_size.max(1) {
            return k;
        }
    }
}

pub fn random_generator<R: Rng>(space: &IdfSpace, shape: &FormShape, rng: &mut R) -> Generator {
    let ctx = space.context();
    let k = random_slot_set(space.slots(), shape.max_slot_set, rng);
    if rng.gen_bool(0.25) {
        Generator::base(k, rng.gen_range(0..ctx.n()))
    } else {
        Generator::vertical(
            k,
            rng.gen_range(0..ctx.m()),
            random_sigma(ctx.n(), shape.max_order, rng),
        )
    }
}

/// Random form with polynomial coefficients.
pub fn random_form<R: Rng>(space: &IdfSpace, rng: &mut R, shape: &FormShape) -> IDForm {
    random_form_with(space, rng, shape, false)
}

/// Random form whose generators are all vertical.
pub fn random_cartan_form<R: Rng>(space: &IdfSpace, rng: &mut R, shape: &FormShape) -> IDForm {
    random_form_with(space, rng, shape, true)
}

fn random_form_with<R: Rng>(
    space: &IdfSpace,
    rng: &mut R,
    shape: &FormShape,
    cartan: bool,
) -> IDForm {
    let mut acc = IDForm::zero();
    for _ in 0..rng.gen_range(1..=shape.terms.max(1)) {
        let c = random_polynomial_of_degree(
            space.context(),
            2,
            shape.max_order,
            shape.coefficient_degree,
            rng,
        );
        let mut word = Vec::new();
        for _ in 0..rng.gen_range(0..=shape.max_generators) {
            let mut g = random_generator(space, shape, rng);
            while cartan && !g.is_vertical() {
                g = random_generator(space, shape, rng);
            }
            word.push(g);
        }
        acc = acc.add(&IDForm::monomial(c, word));
    }
    acc
}
