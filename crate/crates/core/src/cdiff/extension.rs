use std::collections::BTreeMap;

use super::operator::CDiffOperator;
use crate::error::{Error, Result};
use crate::expr::{JetExpression, MultiIndex, Rational};
use crate::idf::{total_derivative_form, Generator, IDForm, IdfSpace, SlotSet};
use crate::jet::EquationSystem;

/// Split a Cartan form in slot `k` with function coefficients into
/// `(word, coefficient)` pairs.
fn slot_words(q: &IDForm, k: usize) -> Result<Vec<(Vec<Generator>, JetExpression)>> {
    let only_k = SlotSet::single(k);
    q.terms()
        .map(|(w, c)| {
            if w.iter().all(|g| g.is_vertical() && g.slots() == only_k) {
                Ok((w.clone(), c.clone()))
            } else {
                Err(Error::Degree(format!("expected a Cartan form in slot {k}")))
            }
        })
        .collect()
}

/// Element of `Q ⊗ C_*Λ^p_k`: a map from canonical slot-`k` Cartan words to
/// left factors, with function coefficients absorbed into the left factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Tensor {
    slot: usize,
    terms: BTreeMap<Vec<Generator>, IDForm>,
}

impl Tensor {
    pub fn zero(slot: usize) -> Self {
        Tensor {
            slot,
            terms: BTreeMap::new(),
        }
    }

    /// `s ⊗ q`.
    pub fn from_parts(s: &IDForm, q: &IDForm, slot: usize) -> Result<Self> {
        let mut out = Tensor::zero(slot);
        for (w, c) in slot_words(q, slot)? {
            out.add_term(w, s.scale(&c));
        }
        Ok(out)
    }

    /// `s ⊗ 1`.
    pub fn scalar(s: IDForm, slot: usize) -> Self {
        let mut out = Tensor::zero(slot);
        out.add_term(Vec::new(), s);
        out
    }

    fn add_term(&mut self, w: Vec<Generator>, s: IDForm) {
        if s.is_zero() {
            return;
        }
        let e = self.terms.entry(w.clone()).or_default();
        *e = e.add(&s);
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Generator>, &IDForm)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        let mut out = self.clone();
        for (w, s) in &other.terms {
            out.add_term(w.clone(), s.clone());
        }
        out
    }

    pub fn neg(&self) -> Tensor {
        Tensor {
            slot: self.slot,
            terms: self
                .terms
                .iter()
                .map(|(w, s)| (w.clone(), s.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, k: &JetExpression) -> Tensor {
        let mut out = Tensor::zero(self.slot);
        for (w, s) in &self.terms {
            out.add_term(w.clone(), s.scale(k));
        }
        out
    }

    /// `a·(s ⊗ q) = (a·s) ⊗ q`.
    pub fn left_mul(&self, a: &IDForm) -> Tensor {
        let mut out = Tensor::zero(self.slot);
        for (w, s) in &self.terms {
            out.add_term(w.clone(), a.mul(s));
        }
        out
    }

    /// Degree of the right factor, if homogeneous.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(Vec::len);
        let first = it.next().unwrap_or(0);
        it.all(|d| d == first).then_some(first)
    }

    /// `D_mu(s ⊗ q) = D_mu s ⊗ q + s ⊗ D_mu q`, on free jets or on `sys`.
    pub fn total_derivative(
        &self,
        mu: usize,
        on: Option<(&EquationSystem, &IdfSpace)>,
    ) -> Result<Tensor> {
        let d = |w: &IDForm| -> Result<IDForm> {
            match on {
                None => Ok(total_derivative_form(w, mu)),
                Some((sys, space)) => space.internal_total_derivative(w, mu, sys),
            }
        };
        let mut out = Tensor::zero(self.slot);
        for (w, s) in &self.terms {
            out.add_term(w.clone(), d(s)?);
            let dq = d(&IDForm::monomial(JetExpression::one(), w.clone()))?;
            for (w2, c) in slot_words(&dq, self.slot)? {
                out.add_term(w2, s.scale(&c));
            }
        }
        Ok(out)
    }

    pub fn prolong(
        &self,
        sigma: &MultiIndex,
        on: Option<(&EquationSystem, &IdfSpace)>,
    ) -> Result<Tensor> {
        let mut out = self.clone();
        for mu in sigma.directions() {
            out = out.total_derivative(mu, on)?;
        }
        Ok(out)
    }

    /// Left factors restricted to the equation.
    pub fn restrict(&self, sys: &EquationSystem, space: &IdfSpace) -> Result<Tensor> {
        let mut out = Tensor::zero(self.slot);
        for (w, s) in &self.terms {
            let q = space.restrict(&IDForm::monomial(JetExpression::one(), w.clone()), sys)?;
            let s = space.restrict(s, sys)?;
            for (w2, c) in slot_words(&q, self.slot)? {
                out.add_term(w2, s.scale(&c));
            }
        }
        Ok(out)
    }

    /// The product `Σ s·q`.
    pub fn contract(&self) -> IDForm {
        self.terms.iter().fold(IDForm::zero(), |acc, (w, s)| {
            acc.add(&s.mul(&IDForm::monomial(JetExpression::one(), w.clone())))
        })
    }

    pub fn display(&self, space: &IdfSpace) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, s)| {
                let right = space.display(&IDForm::monomial(JetExpression::one(), w.clone()));
                format!("({}) ⊗ {right}", space.display(s))
            })
            .collect();
        parts.join(" + ")
    }
}

/// `[Δ]_p`: the operator acting on `Q ⊗ C_*Λ^p_k` by moving total
/// derivatives across the right factor with the Leibniz rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedOperator {
    op: CDiffOperator,
    p: usize,
    slot: usize,
}

pub fn extend_p(op: &CDiffOperator, p: usize, slot: usize) -> ExtendedOperator {
    ExtendedOperator {
        op: op.clone(),
        p,
        slot,
    }
}

impl ExtendedOperator {
    pub fn operator(&self) -> &CDiffOperator {
        &self.op
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn apply(
        &self,
        args: &[Tensor],
        on: Option<(&EquationSystem, &IdfSpace)>,
    ) -> Result<Vec<Tensor>> {
        if args.len() != self.op.cols() {
            return Err(Error::Shape(format!(
                "operator has {} columns, argument has {}",
                self.op.cols(),
                args.len()
            )));
        }
        let mut out = vec![Tensor::zero(self.slot); self.op.rows()];
        for (c, arg) in args.iter().enumerate() {
            if arg.is_zero() {
                continue;
            }
            if arg.slot != self.slot || arg.degree() != Some(self.p) {
                return Err(Error::Degree(format!(
                    "argument is not in Q ⊗ Λ^{} of slot {}",
                    self.p, self.slot
                )));
            }
            let arg = match on {
                Some((sys, space)) => arg.restrict(sys, space)?,
                None => arg.clone(),
            };
            let mut derivs: BTreeMap<MultiIndex, Tensor> = BTreeMap::new();
            for (r, slot) in out.iter_mut().enumerate() {
                for (sigma, a) in self.op.entry(r, c) {
                    if !derivs.contains_key(sigma) {
                        derivs.insert(sigma.clone(), arg.prolong(sigma, on)?);
                    }
                    *slot = slot.add(&derivs[sigma].left_mul(a));
                }
            }
        }
        match on {
            Some((sys, space)) => out.iter().map(|t| t.restrict(sys, space)).collect(),
            None => Ok(out),
        }
    }
}

/// Element of `C_*Λ^1_k ⊗ C_*Λ^{p-1}_k`, expanded over pairs of canonical
/// words with function coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PairTensor {
    slot: usize,
    terms: BTreeMap<(Vec<Generator>, Vec<Generator>), JetExpression>,
}

impl PairTensor {
    pub fn zero(slot: usize) -> Self {
        PairTensor {
            slot,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_pair(theta: &IDForm, eta: &IDForm, slot: usize) -> Result<Self> {
        let mut out = PairTensor::zero(slot);
        for (w1, c1) in slot_words(theta, slot)? {
            if w1.len() != 1 {
                return Err(Error::Degree("first factor must be a Cartan 1-form".into()));
            }
            for (w2, c2) in slot_words(eta, slot)? {
                out.add_term((w1.clone(), w2), c1.mul(&c2));
            }
        }
        Ok(out)
    }

    fn add_term(&mut self, key: (Vec<Generator>, Vec<Generator>), c: JetExpression) {
        if c.is_zero() {
            return;
        }
        let e = self
            .terms
            .entry(key.clone())
            .or_insert_with(JetExpression::zero);
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &PairTensor) -> PairTensor {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `alt_p(θ ⊗ η) = θ·η`.
pub fn alt_p(t: &PairTensor, p: usize) -> Result<IDForm> {
    let mut out = IDForm::zero();
    for ((w1, w2), c) in &t.terms {
        if w1.len() + w2.len() != p {
            return Err(Error::Degree(format!("tensor is not of total degree {p}")));
        }
        let mut word = w1.clone();
        word.extend(w2.iter().cloned());
        out = out.add(&IDForm::monomial(c.clone(), word));
    }
    Ok(out)
}

/// Right inverse of `alt_p`: `g_1⋯g_p ↦ (1/p) Σ_i (-1)^{i-1} g_i ⊗ g_1⋯ĝ_i⋯g_p`.
pub fn include_p(omega: &IDForm, p: usize, slot: usize) -> Result<PairTensor> {
    let mut out = PairTensor::zero(slot);
    if p == 0 {
        return Err(Error::Degree("inclusion needs p ≥ 1".into()));
    }
    let weight = JetExpression::from(Rational::new(1.into(), (p as i64).into()));
    for (w, c) in slot_words(omega, slot)? {
        if w.len() != p {
            return Err(Error::Degree(format!("form is not of degree {p}")));
        }
        for i in 0..p {
            let mut rest = w.clone();
            let g = rest.remove(i);
            let c = c.mul(&weight);
            out.add_term((vec![g], rest), if i % 2 == 1 { c.neg() } else { c });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdiff::parse_operator;
    use crate::expr::Context;
    use crate::sampling::{random_polynomial, FormShape};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space() -> IdfSpace {
        IdfSpace::new(Context::new(&["x", "t"], &["u"]).unwrap(), 2).unwrap()
    }

    #[test]
    fn dx_acts_on_cartan_factor() {
        let s = space();
        let dx = parse_operator("Dx", &s).unwrap();
        let arg = Tensor::from_parts(&IDForm::one(), &s.parse("dv[2]u").unwrap(), 2).unwrap();
        let out = extend_p(&dx, 1, 2).apply(&[arg], None).unwrap();
        assert_eq!(out[0].contract(), s.parse("dv[2]u_x").unwrap());
        assert_eq!(
            out[0],
            Tensor::from_parts(&IDForm::one(), &s.parse("dv[2]u_x").unwrap(), 2).unwrap()
        );
    }

    #[test]
    fn extension_of_identity() {
        let s = space();
        let t = Tensor::from_parts(
            &s.parse("u*dv[1]u_x").unwrap(),
            &s.parse("u_x*dv[2]u").unwrap(),
            2,
        )
        .unwrap();
        let id = CDiffOperator::identity(1);
        assert_eq!(
            extend_p(&id, 1, 2)
                .apply(std::slice::from_ref(&t), None)
                .unwrap(),
            vec![t]
        );
    }

    #[test]
    fn alternation() {
        let s = space();
        let theta = s.parse("dv[2]u").unwrap();
        let tt = PairTensor::from_pair(&theta, &theta, 2).unwrap();
        assert!(!tt.is_zero());
        assert!(alt_p(&tt, 2).unwrap().is_zero());
        let eta = s.parse("u*dv[2]u_x").unwrap();
        let pair = PairTensor::from_pair(&theta, &eta, 2).unwrap();
        assert_eq!(alt_p(&pair, 2).unwrap(), theta.mul(&eta));
        assert_eq!(
            alt_p(
                &PairTensor::from_pair(&theta, &IDForm::one(), 2).unwrap(),
                1
            )
            .unwrap(),
            theta
        );
        assert!(alt_p(&pair, 3).is_err());
    }

    fn random_cartan_in_slot(p: usize, rng: &mut ChaCha8Rng) -> IDForm {
        let s = space();
        let mut acc = IDForm::zero();
        for _ in 0..rng.gen_range(1..=3) {
            let word: Vec<Generator> = (0..p)
                .map(|_| {
                    Generator::vertical(
                        SlotSet::single(2),
                        0,
                        MultiIndex::from_counts(&[rng.gen_range(0..3)]),
                    )
                })
                .collect();
            acc = acc.add(&IDForm::monomial(
                random_polynomial(s.context(), 2, 1, rng),
                word,
            ));
        }
        acc
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn inclusion_is_right_inverse(seed in any::<u64>(), p in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let omega = random_cartan_in_slot(p, &mut rng);
            let inc = include_p(&omega, p, 2).unwrap();
            prop_assert_eq!(alt_p(&inc, p).unwrap(), omega.clone());
            let twice = include_p(&alt_p(&inc, p).unwrap(), p, 2).unwrap();
            prop_assert_eq!(twice, inc);
        }

        #[test]
        fn extension_respects_composition(seed in any::<u64>()) {
            let s = space();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shape = FormShape { terms: 2, max_generators: 0, max_order: 1, max_slot_set: 1, coefficient_degree: 2 };
            let random_op = |rng: &mut ChaCha8Rng| {
                let mut op = CDiffOperator::zero_plain(1, 1);
                for _ in 0..2 {
                    let sigma = MultiIndex::from_counts(&[rng.gen_range(0..3), rng.gen_range(0..2)]);
                    op.add_term(0, 0, sigma, crate::sampling::random_form(&s, rng, &shape));
                }
                op
            };
            let d1 = random_op(&mut rng);
            let d2 = random_op(&mut rng);
            let arg = Tensor::from_parts(&random_polynomial(s.context(), 2, 1, &mut rng).into(), &random_cartan_in_slot(1, &mut rng), 2).unwrap();
            let lhs = extend_p(&d2.compose(&d1).unwrap(), 1, 2).apply(std::slice::from_ref(&arg), None).unwrap();
            let mid = extend_p(&d1, 1, 2).apply(&[arg], None).unwrap();
            let rhs = extend_p(&d2, 1, 2).apply(&mid, None).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
