use std::collections::BTreeMap;

use super::generator::{Generator, SlotSet};
use crate::error::{Error, Result};
use crate::expr::{
    parse_ast, write_polynomial, Ast, Context, Coord, JetExpression, Mode, MultiIndex,
};
use crate::jet::{total_derivative, EquationSystem};

/// Finite sum of coefficients times canonical generator products.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct IDForm {
    terms: BTreeMap<Vec<Generator>, JetExpression>,
}

/// Sort a generator word, tracking the Koszul sign. `None` if the word
/// contains an odd generator twice.
fn canonicalize(mut word: Vec<Generator>) -> Option<(Vec<Generator>, bool)> {
    let mut negative = false;
    for i in 1..word.len() {
        let mut j = i;
        while j > 0 && word[j - 1] > word[j] {
            if word[j - 1].slots().pairing(word[j].slots()) % 2 == 1 {
                negative = !negative;
            }
            word.swap(j - 1, j);
            j -= 1;
        }
    }
    if word.windows(2).any(|w| w[0] == w[1] && w[0].is_odd()) {
        return None;
    }
    Some((word, negative))
}

impl IDForm {
    pub fn zero() -> Self {
        IDForm::default()
    }

    pub fn one() -> Self {
        JetExpression::one().into()
    }

    pub fn generator(g: Generator) -> Self {
        IDForm::monomial(JetExpression::one(), vec![g])
    }

    /// `c * g_1 * ... * g_r`, reordered canonically.
    pub fn monomial(c: JetExpression, word: Vec<Generator>) -> Self {
        let mut out = IDForm::zero();
        if let Some((w, neg)) = canonicalize(word) {
            out.add_term(w, if neg { c.neg() } else { c });
        }
        out
    }

    fn add_term(&mut self, word: Vec<Generator>, c: JetExpression) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Vec<Generator>, &JetExpression)> {
        self.terms.iter()
    }

    /// Number of terms; the empty case is [`Self::is_zero`].
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &[Generator]) -> JetExpression {
        self.terms
            .get(word)
            .cloned()
            .unwrap_or_else(JetExpression::zero)
    }

    /// The coefficient if this form has degree zero.
    pub fn as_function(&self) -> Option<JetExpression> {
        match self.terms.len() {
            0 => Some(JetExpression::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &IDForm) -> IDForm {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &IDForm) -> IDForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> IDForm {
        IDForm {
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c.neg()))
                .collect(),
        }
    }

    /// Multiply every coefficient by a function.
    pub fn scale(&self, f: &JetExpression) -> IDForm {
        let mut out = IDForm::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.mul(f));
        }
        out
    }

    pub fn mul(&self, other: &IDForm) -> IDForm {
        let mut out = IDForm::zero();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let mut word = wa.clone();
                word.extend(wb.iter().cloned());
                if let Some((w, neg)) = canonicalize(word) {
                    let c = ca.mul(cb);
                    out.add_term(w, if neg { c.neg() } else { c });
                }
            }
        }
        out
    }

    pub fn map_coefficients(
        &self,
        f: impl Fn(&JetExpression) -> Result<JetExpression>,
    ) -> Result<IDForm> {
        let mut out = IDForm::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Multi-degree of a generator word, as slot counts.
    pub fn word_degree(word: &[Generator]) -> [u32; SlotSet::MAX_SLOT] {
        let mut d = [0; SlotSet::MAX_SLOT];
        for g in word {
            for s in g.slots().slots() {
                d[s - 1] += 1;
            }
        }
        d
    }

    /// Multi-degree if every term shares it.
    pub fn degree(&self) -> Option<[u32; SlotSet::MAX_SLOT]> {
        let mut it = self.terms.keys().map(|w| IDForm::word_degree(w));
        let first = it.next().unwrap_or([0; SlotSet::MAX_SLOT]);
        if it.all(|d| d == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Only vertical generators occur.
    pub fn is_cartan(&self) -> bool {
        self.terms
            .keys()
            .all(|w| w.iter().all(Generator::is_vertical))
    }

    /// Apply a derivation of parity mask `mask`, given its values on
    /// coefficients and on single generators.
    pub fn derive(
        &self,
        mask: SlotSet,
        on_coefficient: impl Fn(&JetExpression) -> Result<IDForm>,
        on_generator: impl Fn(&Generator) -> Result<IDForm>,
    ) -> Result<IDForm> {
        let mut out = IDForm::zero();
        for (word, c) in &self.terms {
            let dc = on_coefficient(c)?;
            if !dc.is_zero() {
                out = out.add(&dc.mul(&IDForm::monomial(JetExpression::one(), word.clone())));
            }
            let mut parity = 0;
            for (i, g) in word.iter().enumerate() {
                let img = on_generator(g)?;
                if !img.is_zero() {
                    let prefix = IDForm::monomial(c.clone(), word[..i].to_vec());
                    let suffix = IDForm::monomial(JetExpression::one(), word[i + 1..].to_vec());
                    let term = prefix.mul(&img).mul(&suffix);
                    out = if parity % 2 == 1 {
                        out.sub(&term)
                    } else {
                        out.add(&term)
                    };
                }
                parity += mask.pairing(g.slots());
            }
        }
        Ok(out)
    }
}

impl From<JetExpression> for IDForm {
    fn from(c: JetExpression) -> Self {
        let mut out = IDForm::zero();
        out.add_term(Vec::new(), c);
        out
    }
}

impl From<i64> for IDForm {
    fn from(c: i64) -> Self {
        JetExpression::from(c).into()
    }
}

/// Total derivative `D_mu`, extended to forms: it kills `d_K x` and sends
/// `d^v_K u_σ` to `d^v_K u_{σ+mu}`.
pub fn total_derivative_form(w: &IDForm, mu: usize) -> IDForm {
    w.derive(
        SlotSet::empty(),
        |c| Ok(total_derivative(c, mu).into()),
        |g| {
            Ok(match g {
                Generator::Base { .. } => IDForm::zero(),
                Generator::Vertical { slots, j, sigma } => IDForm::generator(Generator::vertical(
                    *slots,
                    *j as usize,
                    sigma.with_added(mu),
                )),
            })
        },
    )
    .expect("infallible")
}

/// Iterated `D_σ` on forms.
pub fn prolong_form(w: &IDForm, sigma: &MultiIndex) -> IDForm {
    sigma
        .directions()
        .into_iter()
        .fold(w.clone(), |acc, mu| total_derivative_form(&acc, mu))
}

/// Jet coordinates and a fixed number of slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdfSpace {
    ctx: Context,
    slots: usize,
}

impl IdfSpace {
    pub fn new(ctx: Context, slots: usize) -> Result<Self> {
        if slots == 0 || slots > SlotSet::MAX_SLOT {
            return Err(Error::SlotOutOfRange {
                slot: slots,
                max: SlotSet::MAX_SLOT,
            });
        }
        Ok(IdfSpace { ctx, slots })
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    /// Same base and slots, new fibre coordinates (for pullback targets).
    pub fn target(&self, dependent: &[&str]) -> Result<IdfSpace> {
        let indep: Vec<&str> = self.ctx.independent().iter().map(String::as_str).collect();
        IdfSpace::new(Context::new(&indep, dependent)?, self.slots)
    }

    fn check_slot(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.slots {
            Err(Error::SlotOutOfRange {
                slot: i,
                max: self.slots,
            })
        } else {
            Ok(())
        }
    }

    fn check_slots(&self, k: SlotSet) -> Result<()> {
        if k.is_empty() {
            return Err(Error::Degree("empty slot set".into()));
        }
        k.slots().into_iter().try_for_each(|s| self.check_slot(s))
    }

    pub fn base(&self, k: SlotSet, mu: usize) -> Result<IDForm> {
        self.check_slots(k)?;
        Ok(IDForm::generator(Generator::base(k, mu)))
    }

    pub fn vertical(&self, k: SlotSet, j: usize, sigma: MultiIndex) -> Result<IDForm> {
        self.check_slots(k)?;
        Ok(IDForm::generator(Generator::vertical(k, j, sigma)))
    }

    pub fn total_derivative(&self, w: &IDForm, mu: usize) -> IDForm {
        total_derivative_form(w, mu)
    }

    /// `D_mu` followed by restriction to the equation.
    pub fn internal_total_derivative(
        &self,
        w: &IDForm,
        mu: usize,
        sys: &EquationSystem,
    ) -> Result<IDForm> {
        self.restrict(&total_derivative_form(w, mu), sys)
    }

    /// `d^v_i`.
    pub fn d_vertical(&self, w: &IDForm, i: usize) -> Result<IDForm> {
        self.check_slot(i)?;
        let si = SlotSet::single(i);
        w.derive(
            si,
            |c| {
                let mut acc = IDForm::zero();
                for coord in c.coords() {
                    if let Coord::Jet(j, sigma) = &coord {
                        let g = Generator::vertical(si, *j as usize, sigma.clone());
                        acc = acc.add(&IDForm::monomial(c.partial(&coord), vec![g]));
                    }
                }
                Ok(acc)
            },
            |g| {
                Ok(match g {
                    Generator::Vertical { slots, .. } if !slots.contains(i) => {
                        IDForm::generator(g.with_slots(slots.with(i)))
                    }
                    _ => IDForm::zero(),
                })
            },
        )
    }

    /// `d^h_i = Σ_mu d_i x^mu · D_mu + δ_i`.
    pub fn d_horizontal(&self, w: &IDForm, i: usize) -> Result<IDForm> {
        self.check_slot(i)?;
        let si = SlotSet::single(i);
        let mut acc = w.derive(
            si,
            |_| Ok(IDForm::zero()),
            |g| {
                Ok(match g {
                    Generator::Base { slots, .. } if !slots.contains(i) => {
                        IDForm::generator(g.with_slots(slots.with(i)))
                    }
                    _ => IDForm::zero(),
                })
            },
        )?;
        for mu in 0..self.n() {
            let dx = IDForm::generator(Generator::base(si, mu));
            acc = acc.add(&dx.mul(&self.total_derivative(w, mu)));
        }
        Ok(acc)
    }

    /// Slot differential `d_i = d^h_i + d^v_i`.
    pub fn d(&self, w: &IDForm, i: usize) -> Result<IDForm> {
        Ok(self.d_horizontal(w, i)?.add(&self.d_vertical(w, i)?))
    }

    /// `d^v_K`, the composite of `d^v_i` over `i ∈ K` (they commute).
    pub fn d_vertical_set(&self, w: &IDForm, k: SlotSet) -> Result<IDForm> {
        let mut out = w.clone();
        for i in k.slots().into_iter().rev() {
            out = self.d_vertical(&out, i)?;
        }
        Ok(out)
    }

    /// Rewrite coefficients and Cartan generators in internal coordinates.
    pub fn restrict(&self, w: &IDForm, sys: &EquationSystem) -> Result<IDForm> {
        let t = sys.leading();
        let mut out = IDForm::zero();
        for (word, c) in w.terms() {
            let mut acc: IDForm = sys.restrict(c)?.into();
            for g in word {
                let img = match g {
                    Generator::Vertical { slots, j, sigma } if sigma.count(t) > 0 => {
                        let f = sys.restricted_coord(*j as usize, sigma)?;
                        self.d_vertical_set(&f.into(), *slots)?
                    }
                    _ => IDForm::generator(g.clone()),
                };
                acc = acc.mul(&img);
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    pub fn is_internal(&self, w: &IDForm, sys: &EquationSystem) -> bool {
        let t = sys.leading();
        w.terms().all(|(word, c)| {
            sys.is_internal(c)
                && word.iter().all(|g| match g {
                    Generator::Vertical { sigma, .. } => sigma.count(t) == 0,
                    _ => true,
                })
        })
    }

    pub fn parse(&self, text: &str) -> Result<IDForm> {
        let ast = parse_ast(text, &self.ctx, Mode::Form)?;
        self.eval(&ast)
    }

    fn eval(&self, ast: &Ast) -> Result<IDForm> {
        Ok(match ast {
            Ast::Number(n) => {
                JetExpression::from(crate::expr::Rational::from_integer(n.clone())).into()
            }
            Ast::Coord(c) => JetExpression::var(c.clone()).into(),
            Ast::Generator {
                vertical,
                slots,
                coord,
            } => {
                let k = SlotSet::from_slots(slots);
                self.check_slots(k)?;
                match coord {
                    Coord::Indep(mu) if !vertical => self.base(k, *mu as usize)?,
                    Coord::Jet(j, sigma) if *vertical => {
                        self.vertical(k, *j as usize, sigma.clone())?
                    }
                    _ => return Err(Error::Degree("malformed generator".into())),
                }
            }
            Ast::TotalD(_) => {
                return Err(Error::Syntax {
                    pos: 0,
                    msg: "operators are not forms".into(),
                })
            }
            Ast::Add(a, b) => self.eval(a)?.add(&self.eval(b)?),
            Ast::Sub(a, b) => self.eval(a)?.sub(&self.eval(b)?),
            Ast::Mul(a, b) => self.eval(a)?.mul(&self.eval(b)?),
            Ast::Div(a, b, pos) => {
                let den = self.eval(b)?.as_function().ok_or(Error::Syntax {
                    pos: *pos,
                    msg: "division by a form of positive degree".into(),
                })?;
                let a = self.eval(a)?;
                let inv = JetExpression::one().div(&den)?;
                a.scale(&inv)
            }
            Ast::Neg(a) => self.eval(a)?.neg(),
            Ast::Pow(a, e) => {
                let base = self.eval(a)?;
                if let Some(f) = base.as_function() {
                    f.pow(*e)?.into()
                } else if *e < 0 {
                    return Err(Error::Degree("negative power of a form".into()));
                } else {
                    (0..*e).fold(IDForm::one(), |acc, _| acc.mul(&base))
                }
            }
        })
    }

    /// Terms in canonical generator order, e.g. `u_x*dv[1]u + u*dv[1]u_x`.
    pub fn display(&self, w: &IDForm) -> String {
        if w.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (word, c)) in w.terms().enumerate() {
            let gens: Vec<String> = word.iter().map(|g| g.to_string_in(&self.ctx)).collect();
            let gens = gens.join("*");
            let term = if word.is_empty() {
                c.to_string_in(&self.ctx)
            } else if c.is_one() {
                gens
            } else if c.neg().is_one() {
                format!("-{gens}")
            } else if c.is_compound() {
                format!("({})*{gens}", c.to_string_in(&self.ctx))
            } else {
                format!("{}*{gens}", write_polynomial(c.numerator(), &self.ctx))
            };
            if i == 0 {
                out.push_str(&term);
            } else if let Some(rest) = term.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&term);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::jet::parse_system;
    use crate::sampling::{random_form, FormShape};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(k: usize) -> IdfSpace {
        IdfSpace::new(Context::new(&["x", "t"], &["u"]).unwrap(), k).unwrap()
    }

    #[test]
    fn odd_generators_square_to_zero() {
        let s = space(2);
        let g = s.parse("dv[1]u").unwrap();
        assert!(g.mul(&g).is_zero());
        let h = s.parse("dv[1,2]u").unwrap();
        assert!(!h.mul(&h).is_zero());
        let a = s.parse("dv[1]u*dv[2]u_x").unwrap();
        assert_eq!(a, s.parse("dv[2]u_x*dv[1]u").unwrap());
        let b = s.parse("dv[1]u*dv[1]u_x").unwrap();
        assert_eq!(b, s.parse("-dv[1]u_x*dv[1]u").unwrap());
    }

    #[test]
    fn differential_examples() {
        let s = space(2);
        let p = |t: &str| s.parse(t).unwrap();
        assert_eq!(s.d(&p("d[2]x"), 1).unwrap(), p("d[1,2]x"));
        assert_eq!(
            s.d_horizontal(&p("u_x"), 1).unwrap(),
            p("u_xx*d[1]x + u_xt*d[1]t")
        );
        assert_eq!(
            s.d_vertical(&p("u*u_x"), 1).unwrap(),
            p("u_x*dv[1]u + u*dv[1]u_x")
        );
        assert_eq!(
            s.d_horizontal(&p("dv[2]u"), 1).unwrap(),
            p("d[1]x*dv[2]u_x + d[1]t*dv[2]u_t")
        );
        assert_eq!(s.d(&p("x"), 1).unwrap(), p("d[1]x"));
        assert!(s.d(&p("u"), 3).is_err());
    }

    #[test]
    fn printing_round_trips() {
        let s = space(2);
        let w = s
            .parse("u_x*dv[1]u - 1/2*u*dv[1,2]u_x + (u + 1)*d[1]x*dv[2]u")
            .unwrap();
        let text = s.display(&w);
        assert_eq!(s.parse(&text).unwrap(), w);
        assert_eq!(s.display(&s.parse("dv[1]u").unwrap()), "dv[1]u");
        assert_eq!(
            s.display(&s.parse("-3*u*dv[1]u_x").unwrap()),
            "-3*u*dv[1]u_x"
        );
    }

    #[test]
    fn restriction_to_heat() {
        let sys =
            parse_system("[system]\nindependent = x, t\ndependent = u\n[equations]\nu_t = u_xx\n")
                .and_then(EquationSystem::from_raw)
                .unwrap();
        let s = space(1);
        let w = s.parse("u_t*dv[1]u_t").unwrap();
        assert_eq!(
            s.restrict(&w, &sys).unwrap(),
            s.parse("u_xx*dv[1]u_xx").unwrap()
        );
        assert!(s.is_internal(&s.restrict(&w, &sys).unwrap(), &sys));
        let _ = parse_expression("u", s.context()).unwrap();
    }

    fn shape() -> FormShape {
        FormShape {
            terms: 2,
            max_generators: 2,
            max_order: 1,
            max_slot_set: 2,
            coefficient_degree: 2,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn differentials_square_to_zero(seed in any::<u64>(), i in 1usize..3) {
            let s = space(2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_form(&s, &mut rng, &shape());
            prop_assert!(s.d(&s.d(&w, i).unwrap(), i).unwrap().is_zero());
            prop_assert!(s.d_vertical(&s.d_vertical(&w, i).unwrap(), i).unwrap().is_zero());
            prop_assert!(s.d_horizontal(&s.d_horizontal(&w, i).unwrap(), i).unwrap().is_zero());
            let hv = s.d_horizontal(&s.d_vertical(&w, i).unwrap(), i).unwrap();
            let vh = s.d_vertical(&s.d_horizontal(&w, i).unwrap(), i).unwrap();
            prop_assert!(hv.add(&vh).is_zero());
        }

        #[test]
        fn distinct_slots_commute(seed in any::<u64>()) {
            let s = space(2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_form(&s, &mut rng, &shape());
            let a = s.d(&s.d(&w, 1).unwrap(), 2).unwrap();
            let b = s.d(&s.d(&w, 2).unwrap(), 1).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn slot_differential_is_graded_derivation(seed in any::<u64>(), i in 1usize..3) {
            let s = space(2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_form(&s, &mut rng, &shape());
            let b = random_form(&s, &mut rng, &shape());
            let lhs = s.d(&a.mul(&b), i).unwrap();
            let mut rhs = s.d(&a, i).unwrap().mul(&b);
            for (word, c) in a.terms() {
                let piece = IDForm::monomial(c.clone(), word.clone());
                let sign = IDForm::word_degree(word)[i - 1] % 2 == 1;
                let t = piece.mul(&s.d(&b, i).unwrap());
                rhs = if sign { rhs.sub(&t) } else { rhs.add(&t) };
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn product_is_associative(seed in any::<u64>()) {
            let s = space(2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_form(&s, &mut rng, &shape());
            let b = random_form(&s, &mut rng, &shape());
            let c = random_form(&s, &mut rng, &shape());
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }
    }
}
