use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse_ast, Ast, JetExpression, Mode, MultiIndex, Rational};
use crate::idf::{prolong_form, IDForm, IdfSpace, SlotSet};
use crate::jet::EquationSystem;

/// Row or column index of an operator matrix: a component and, for lifted
/// operators, the slot set of the block it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BlockLabel {
    pub component: usize,
    #[serde(serialize_with = "serialize_slots")]
    pub slots: SlotSet,
}

fn serialize_slots<S: serde::Serializer>(
    k: &SlotSet,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(k.slots())
}

impl BlockLabel {
    pub fn plain(component: usize) -> Self {
        BlockLabel {
            component,
            slots: SlotSet::empty(),
        }
    }
}

/// One matrix entry `Σ_σ a_σ D_σ`, coefficients on the left.
pub type Entry = BTreeMap<MultiIndex, IDForm>;

fn add_to_entry(e: &mut Entry, sigma: MultiIndex, a: IDForm) {
    if a.is_zero() {
        return;
    }
    let slot = e.entry(sigma.clone()).or_default();
    *slot = slot.add(&a);
    if slot.is_zero() {
        e.remove(&sigma);
    }
}

/// Matrix C-differential operator with form-valued coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CDiffOperator {
    rows: Vec<BlockLabel>,
    cols: Vec<BlockLabel>,
    entries: Vec<Entry>,
    restricted: bool,
}

impl CDiffOperator {
    pub fn zero(rows: Vec<BlockLabel>, cols: Vec<BlockLabel>) -> Self {
        let entries = vec![Entry::new(); rows.len() * cols.len()];
        CDiffOperator {
            rows,
            cols,
            entries,
            restricted: false,
        }
    }

    pub fn zero_plain(rows: usize, cols: usize) -> Self {
        CDiffOperator::zero(
            (0..rows).map(BlockLabel::plain).collect(),
            (0..cols).map(BlockLabel::plain).collect(),
        )
    }

    pub fn identity(m: usize) -> Self {
        let mut op = CDiffOperator::zero_plain(m, m);
        for i in 0..m {
            op.add_term(i, i, MultiIndex::empty(), IDForm::one());
        }
        op
    }

    /// `D_σ` as a 1×1 operator.
    pub fn total_derivative(sigma: MultiIndex) -> Self {
        let mut op = CDiffOperator::zero_plain(1, 1);
        op.add_term(0, 0, sigma, IDForm::one());
        op
    }

    /// Multiplication by a form, as a 1×1 operator.
    pub fn multiplication(a: IDForm) -> Self {
        let mut op = CDiffOperator::zero_plain(1, 1);
        op.add_term(0, 0, MultiIndex::empty(), a);
        op
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_labels(&self) -> &[BlockLabel] {
        &self.rows
    }

    pub fn col_labels(&self) -> &[BlockLabel] {
        &self.cols
    }

    pub fn is_restricted(&self) -> bool {
        self.restricted
    }

    pub fn with_labels(mut self, rows: Vec<BlockLabel>, cols: Vec<BlockLabel>) -> Result<Self> {
        if rows.len() != self.rows() || cols.len() != self.cols() {
            return Err(Error::Shape("relabelling changes the shape".into()));
        }
        self.rows = rows;
        self.cols = cols;
        Ok(self)
    }

    pub fn entry(&self, r: usize, c: usize) -> &Entry {
        &self.entries[r * self.cols() + c]
    }

    pub fn add_term(&mut self, r: usize, c: usize, sigma: MultiIndex, a: IDForm) {
        let n = self.cols();
        add_to_entry(&mut self.entries[r * n + c], sigma, a);
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Entry::is_empty)
    }

    /// Highest order of a total derivative present.
    pub fn order(&self) -> usize {
        self.entries
            .iter()
            .flat_map(|e| e.keys().map(MultiIndex::order))
            .max()
            .unwrap_or(0)
    }

    /// Sub-matrix on the chosen row and column indices.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> CDiffOperator {
        let mut out = CDiffOperator::zero(
            rows.iter().map(|&r| self.rows[r]).collect(),
            cols.iter().map(|&c| self.cols[c]).collect(),
        );
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.entries[i * cols.len() + j] = self.entry(r, c).clone();
            }
        }
        out.restricted = self.restricted;
        out
    }

    /// Row/column indices whose labels carry the given slot set.
    pub fn indices_with_slots(labels: &[BlockLabel], k: SlotSet) -> Vec<usize> {
        labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.slots == k)
            .map(|(i, _)| i)
            .collect()
    }

    fn check_same_shape(&self, other: &CDiffOperator) -> Result<()> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &CDiffOperator) -> Result<CDiffOperator> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (i, e) in other.entries.iter().enumerate() {
            for (sigma, a) in e {
                add_to_entry(&mut out.entries[i], sigma.clone(), a.clone());
            }
        }
        out.restricted = self.restricted || other.restricted;
        Ok(out)
    }

    pub fn neg(&self) -> CDiffOperator {
        let mut out = self.clone();
        for e in &mut out.entries {
            for a in e.values_mut() {
                *a = a.neg();
            }
        }
        out
    }

    pub fn sub(&self, other: &CDiffOperator) -> Result<CDiffOperator> {
        self.add(&other.neg())
    }

    /// `self ∘ inner`, total derivatives moved right by the Leibniz rule.
    pub fn compose(&self, inner: &CDiffOperator) -> Result<CDiffOperator> {
        if self.cols() != inner.rows() {
            return Err(Error::Shape(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows(),
                self.cols(),
                inner.rows(),
                inner.cols()
            )));
        }
        let mut out = CDiffOperator::zero(self.rows.clone(), inner.cols.clone());
        out.restricted = self.restricted || inner.restricted;
        for r in 0..self.rows() {
            for b in 0..self.cols() {
                let outer = self.entry(r, b);
                if outer.is_empty() {
                    continue;
                }
                for c in 0..inner.cols() {
                    for (tau, a1) in inner.entry(b, c) {
                        for (sigma, a2) in outer {
                            for rho in sigma.sub_indices() {
                                let rest = sigma.checked_sub(&rho).expect("sub-index");
                                let coeff = a2.mul(&prolong_form(a1, &rest));
                                if coeff.is_zero() {
                                    continue;
                                }
                                let k = Rational::from_integer(sigma.binomial(&rho).into());
                                out.add_term(r, c, rho.add(tau), coeff.scale(&k.into()));
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Formal adjoint: transpose, and `Σ a_σ D_σ ↦ Σ (-1)^{|σ|} D_σ ∘ a_σ`.
    pub fn adjoint(&self) -> CDiffOperator {
        let mut out = CDiffOperator::zero(self.cols.clone(), self.rows.clone());
        out.restricted = self.restricted;
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                for (sigma, a) in self.entry(r, c) {
                    let sign = if sigma.order() % 2 == 1 { -1 } else { 1 };
                    for rho in sigma.sub_indices() {
                        let rest = sigma.checked_sub(&rho).expect("sub-index");
                        let k = sign * sigma.binomial(&rho) as i64;
                        let coeff = prolong_form(a, &rest).scale(&JetExpression::from(k));
                        out.add_term(c, r, rho, coeff);
                    }
                }
            }
        }
        out
    }

    /// Coefficients rewritten in internal coordinates of `sys`.
    pub fn restrict(&self, sys: &EquationSystem, space: &IdfSpace) -> Result<CDiffOperator> {
        let mut out = CDiffOperator::zero(self.rows.clone(), self.cols.clone());
        for (i, e) in self.entries.iter().enumerate() {
            for (sigma, a) in e {
                add_to_entry(&mut out.entries[i], sigma.clone(), space.restrict(a, sys)?);
            }
        }
        out.restricted = true;
        Ok(out)
    }

    fn check_args(&self, args: &[IDForm]) -> Result<()> {
        if args.len() != self.cols() {
            return Err(Error::Shape(format!(
                "operator has {} columns, argument has {}",
                self.cols(),
                args.len()
            )));
        }
        Ok(())
    }

    /// Evaluate on free jets.
    pub fn apply(&self, args: &[IDForm]) -> Result<Vec<IDForm>> {
        self.check_args(args)?;
        let mut out = vec![IDForm::zero(); self.rows()];
        for (c, arg) in args.iter().enumerate() {
            if arg.is_zero() {
                continue;
            }
            let mut derivs: BTreeMap<MultiIndex, IDForm> = BTreeMap::new();
            for (r, slot) in out.iter_mut().enumerate() {
                for (sigma, a) in self.entry(r, c) {
                    let d = derivs
                        .entry(sigma.clone())
                        .or_insert_with(|| prolong_form(arg, sigma));
                    *slot = slot.add(&a.mul(d));
                }
            }
        }
        Ok(out)
    }

    /// Evaluate with internal total derivatives on `sys`; the result is in
    /// internal coordinates.
    pub fn apply_on(
        &self,
        args: &[IDForm],
        sys: &EquationSystem,
        space: &IdfSpace,
    ) -> Result<Vec<IDForm>> {
        self.check_args(args)?;
        let mut out = vec![IDForm::zero(); self.rows()];
        for (c, arg) in args.iter().enumerate() {
            if arg.is_zero() {
                continue;
            }
            let arg = space.restrict(arg, sys)?;
            let mut derivs: BTreeMap<MultiIndex, IDForm> = BTreeMap::new();
            for (r, slot) in out.iter_mut().enumerate() {
                for (sigma, a) in self.entry(r, c) {
                    if !derivs.contains_key(sigma) {
                        let mut d = arg.clone();
                        for mu in sigma.directions() {
                            d = space.internal_total_derivative(&d, mu, sys)?;
                        }
                        derivs.insert(sigma.clone(), d);
                    }
                    *slot = slot.add(&a.mul(&derivs[sigma]));
                }
            }
        }
        out.into_iter().map(|w| space.restrict(&w, sys)).collect()
    }

    /// Scalar display `coefficient*D_σ` terms, ascending in σ with the
    /// zeroth-order term last, e.g. `Dt - 6*u*Dx - Dx^3 - 6*u_x`.
    pub fn entry_string(&self, r: usize, c: usize, space: &IdfSpace) -> String {
        write_entry(self.entry(r, c), space)
    }

    /// `expr` for 1×1 operators, `[[a, b], [c, d]]` otherwise.
    pub fn display(&self, space: &IdfSpace) -> String {
        if self.rows() == 1 && self.cols() == 1 {
            return self.entry_string(0, 0, space);
        }
        let rows: Vec<String> = (0..self.rows())
            .map(|r| {
                let cells: Vec<String> = (0..self.cols())
                    .map(|c| self.entry_string(r, c, space))
                    .collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }

    pub fn to_json(&self, space: &IdfSpace) -> OperatorJson {
        let mut entries = Vec::new();
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                let terms: Vec<TermJson> = self
                    .entry(r, c)
                    .iter()
                    .map(|(sigma, a)| TermJson {
                        sigma: space.context().sigma_letters(sigma),
                        coefficient: space.display(a),
                    })
                    .collect();
                if !terms.is_empty() {
                    entries.push(EntryJson {
                        row: r,
                        col: c,
                        terms,
                    });
                }
            }
        }
        OperatorJson {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            restricted: self.restricted,
            entries,
            text: self.display(space),
        }
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct TermJson {
    pub sigma: String,
    pub coefficient: String,
}

#[derive(Serialize, Debug, Clone)]
pub struct EntryJson {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Serialize, Debug, Clone)]
pub struct OperatorJson {
    pub rows: Vec<BlockLabel>,
    pub cols: Vec<BlockLabel>,
    pub restricted: bool,
    pub entries: Vec<EntryJson>,
    pub text: String,
}

fn write_derivative(sigma: &MultiIndex, space: &IdfSpace) -> String {
    let letters = space.context().sigma_letters(sigma);
    let dirs: Vec<usize> = (0..sigma.counts().len())
        .filter(|&mu| sigma.count(mu) > 0)
        .collect();
    if dirs.len() == 1 && sigma.order() > 1 {
        let l = &letters[..1];
        format!("D{l}^{}", sigma.order())
    } else {
        format!("D{letters}")
    }
}

fn write_entry(e: &Entry, space: &IdfSpace) -> String {
    if e.is_empty() {
        return "0".into();
    }
    let mut ordered: Vec<(&MultiIndex, &IDForm)> =
        e.iter().filter(|(s, _)| !s.is_empty()).collect();
    ordered.extend(e.iter().filter(|(s, _)| s.is_empty()));
    let mut out = String::new();
    for (i, (sigma, a)) in ordered.into_iter().enumerate() {
        let coeff = space.display(a);
        let term = if sigma.is_empty() {
            coeff
        } else {
            let d = write_derivative(sigma, space);
            if coeff == "1" {
                d
            } else if coeff == "-1" {
                format!("-{d}")
            } else if a.len() > 1 || a.as_function().is_some_and(|f| f.is_compound()) {
                format!("({coeff})*{d}")
            } else {
                format!("{coeff}*{d}")
            }
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

/// Parse a scalar operator such as `Dt - 6*u*Dx - Dx^3`. Products are
/// compositions, so `Dx*u` means `u*Dx + u_x`.
pub fn parse_operator(text: &str, space: &IdfSpace) -> Result<CDiffOperator> {
    let ast = parse_ast(text, space.context(), Mode::Operator)?;
    eval_operator(&ast, space)
}

fn eval_operator(ast: &Ast, space: &IdfSpace) -> Result<CDiffOperator> {
    Ok(match ast {
        Ast::TotalD(sigma) => CDiffOperator::total_derivative(sigma.clone()),
        Ast::Add(a, b) => eval_operator(a, space)?.add(&eval_operator(b, space)?)?,
        Ast::Sub(a, b) => eval_operator(a, space)?.sub(&eval_operator(b, space)?)?,
        Ast::Mul(a, b) => eval_operator(a, space)?.compose(&eval_operator(b, space)?)?,
        Ast::Neg(a) => eval_operator(a, space)?.neg(),
        Ast::Pow(a, e) => {
            let base = eval_operator(a, space)?;
            if *e < 0 {
                return Err(Error::Degree("negative power of an operator".into()));
            }
            let mut acc = CDiffOperator::identity(1);
            for _ in 0..*e {
                acc = acc.compose(&base)?;
            }
            acc
        }
        Ast::Div(a, b, pos) => {
            let den = eval_operator(b, space)?;
            let f = den
                .entry(0, 0)
                .iter()
                .next()
                .filter(|(s, _)| s.is_empty() && den.entry(0, 0).len() == 1)
                .and_then(|(_, a)| a.as_function())
                .ok_or(Error::Syntax {
                    pos: *pos,
                    msg: "division by an operator".into(),
                })?;
            let inv = JetExpression::one().div(&f)?;
            CDiffOperator::multiplication(inv.into()).compose(&eval_operator(a, space)?)?
        }
        _ => CDiffOperator::multiplication(eval_form(ast, space)?),
    })
}

fn eval_form(ast: &Ast, space: &IdfSpace) -> Result<IDForm> {
    match ast {
        Ast::Number(n) => Ok(JetExpression::from(Rational::from_integer(n.clone())).into()),
        Ast::Coord(c) => Ok(JetExpression::var(c.clone()).into()),
        Ast::Generator {
            vertical: true,
            slots,
            coord: crate::expr::Coord::Jet(j, sigma),
        } => space.vertical(SlotSet::from_slots(slots), *j as usize, sigma.clone()),
        Ast::Generator {
            vertical: false,
            slots,
            coord: crate::expr::Coord::Indep(mu),
        } => space.base(SlotSet::from_slots(slots), *mu as usize),
        _ => Err(Error::Syntax {
            pos: 0,
            msg: "unexpected operator syntax".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, Context};

    fn space() -> IdfSpace {
        IdfSpace::new(Context::new(&["x", "t"], &["u"]).unwrap(), 2).unwrap()
    }

    fn op(s: &str) -> CDiffOperator {
        parse_operator(s, &space()).unwrap()
    }

    #[test]
    fn composition_examples() {
        assert_eq!(op("Dx*u"), op("u*Dx + u_x"));
        assert_eq!(op("Dx*Dx"), op("Dx^2"));
        let d = op("Dt - 6*u*Dx - 6*u_x - Dx^3");
        assert_eq!(d.compose(&CDiffOperator::identity(1)).unwrap(), d);
        assert_eq!(CDiffOperator::identity(1).compose(&d).unwrap(), d);
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(op("Dx").adjoint(), op("-Dx"));
        let kdv = op("Dt - 6*u*Dx - 6*u_x - Dx^3");
        assert_eq!(kdv.adjoint(), op("-Dt + 6*u*Dx + Dx^3"));
        assert_eq!(kdv.adjoint().adjoint(), kdv);
    }

    #[test]
    fn printing() {
        let s = space();
        assert_eq!(op("-Dt + 6*u*Dx + Dx^3").display(&s), "-Dt + 6*u*Dx + Dx^3");
        assert_eq!(
            op("Dt - 6*u*Dx - 6*u_x - Dx^3").display(&s),
            "Dt - 6*u*Dx - Dx^3 - 6*u_x"
        );
        assert_eq!(op("(u + 1)*Dxt").display(&s), "(u + 1)*Dxt");
        assert_eq!(
            op("-6*dv[1]u*Dx - 6*dv[1]u_x").display(&s),
            "-6*dv[1]u*Dx - 6*dv[1]u_x"
        );
        let text = op("Dt - 6*u*Dx - 6*u_x - Dx^3").display(&s);
        assert_eq!(op(&text), op("Dt - 6*u*Dx - 6*u_x - Dx^3"));
    }

    #[test]
    fn application() {
        let s = space();
        let heat = op("Dt - Dx^2");
        let args: Vec<IDForm> = vec![parse_expression("x*u_x", s.context()).unwrap().into()];
        let out = heat.apply(&args).unwrap();
        assert_eq!(out[0], s.parse("x*u_xt - 2*u_xx - x*u_xxx").unwrap());
        assert_eq!(heat.apply(&[IDForm::zero()]).unwrap(), vec![IDForm::zero()]);
        assert!(heat.apply(&[]).is_err());
    }
}
