use std::collections::BTreeMap;

use crate::cdiff::{BlockLabel, Tensor};
use crate::error::{Error, Result};
use crate::expr::{Coord, JetExpression, Monomial, MultiIndex, Polynomial, Rational};
use crate::idf::{Generator, IDForm, SlotSet};
use crate::jet::EquationSystem;

pub const DEFAULT_ANSATZ_CAP: usize = 20_000;

/// Truncation of the unknowns: jet order `order` (N), polynomial degree
/// `degree` (D) in the fibre coordinates and, separately, in the base
/// coordinates when `xt` is set; Cartan words of length up to (or exactly)
/// `cartan` in slots `1..k-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzSpace {
    pub order: usize,
    pub degree: usize,
    pub cartan: usize,
    pub cartan_exact: bool,
    pub xt: bool,
    /// Only block components `(j, L)` with `|L|` equal to this are unknown.
    pub slot_degree: Option<usize>,
    pub cap: usize,
}

impl AnsatzSpace {
    pub fn new(order: usize, degree: usize) -> Self {
        AnsatzSpace {
            order,
            degree,
            cartan: 0,
            cartan_exact: false,
            xt: false,
            slot_degree: None,
            cap: DEFAULT_ANSATZ_CAP,
        }
    }

    pub fn with_xt(mut self, xt: bool) -> Self {
        self.xt = xt;
        self
    }

    pub fn with_cartan(mut self, c: usize, exact: bool) -> Self {
        self.cartan = c;
        self.cartan_exact = exact;
        self
    }

    pub fn with_slot_degree(mut self, s: Option<usize>) -> Self {
        self.slot_degree = s;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }
}

/// One candidate term: `monomial · left ⊗ right` in component `column`.
/// The same shape indexes coefficients of operator images (with `column`
/// read as a row).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnsatzElement {
    pub column: usize,
    pub right: Vec<Generator>,
    pub left: Vec<Generator>,
    pub monomial: Monomial,
}

impl AnsatzElement {
    pub fn left_form(&self) -> IDForm {
        let c: JetExpression =
            Polynomial::term(Rational::from_integer(1.into()), self.monomial.clone()).into();
        IDForm::monomial(c, self.left.clone())
    }

    pub fn tensor(&self, slot: usize) -> Tensor {
        Tensor::from_parts(
            &self.left_form(),
            &IDForm::monomial(JetExpression::one(), self.right.clone()),
            slot,
        )
        .expect("right factor is a slot word")
    }
}

/// Fibre coordinates `u^j_σ` free of the leading variable, `|σ| ≤ order`.
pub fn internal_coords(sys: &EquationSystem, order: usize) -> Vec<Coord> {
    let mut out = Vec::new();
    for j in 0..sys.m() {
        for sigma in MultiIndex::all_up_to(sys.n(), order) {
            if sigma.count(sys.leading()) == 0 {
                out.push(Coord::jet(j, sigma));
            }
        }
    }
    out.sort();
    out
}

fn monomials_up_to(coords: &[Coord], degree: usize) -> Vec<Monomial> {
    fn rec(
        coords: &[Coord],
        start: usize,
        left: usize,
        cur: &mut Vec<(Coord, u32)>,
        out: &mut Vec<Monomial>,
    ) {
        out.push(Monomial::from_powers(cur.clone()));
        if left == 0 {
            return;
        }
        for i in start..coords.len() {
            match cur.last_mut() {
                Some((c, e)) if *c == coords[i] => *e += 1,
                _ => cur.push((coords[i].clone(), 1)),
            }
            rec(coords, i, left - 1, cur, out);
            match cur.last_mut() {
                Some((_, e)) if *e > 1 => *e -= 1,
                _ => {
                    cur.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(coords, 0, degree, &mut Vec::new(), &mut out);
    out.sort();
    out.dedup();
    out
}

fn words(gens: &[Generator], max_len: usize, exact: bool) -> Vec<Vec<Generator>> {
    let mut out = Vec::new();
    fn rec(
        gens: &[Generator],
        start: usize,
        len: usize,
        exact: bool,
        cur: &mut Vec<Generator>,
        out: &mut Vec<Vec<Generator>>,
    ) {
        if !exact || cur.len() == len {
            out.push(cur.clone());
        }
        if cur.len() == len {
            return;
        }
        for i in start..gens.len() {
            cur.push(gens[i].clone());
            rec(gens, i + 1, len, exact, cur, out);
            cur.pop();
        }
    }
    rec(gens, 0, max_len, exact, &mut Vec::new(), &mut out);
    out
}

/// Slot-`i` Cartan generators `d^v_i u^j_σ` on internal coordinates.
fn cartan_generators(sys: &EquationSystem, slots: &[usize], order: usize) -> Vec<Generator> {
    let mut out = Vec::new();
    for &i in slots {
        for c in internal_coords(sys, order) {
            if let Coord::Jet(j, sigma) = c {
                out.push(Generator::vertical(SlotSet::single(i), j as usize, sigma));
            }
        }
    }
    out.sort();
    out
}

/// Shape of the unknowns for one solve.
#[derive(Clone, Debug)]
pub struct AnsatzLayout<'a> {
    pub labels: &'a [BlockLabel],
    /// Level `k`; left Cartan factors use slots `1..k-1`, right ones slot `k`.
    pub level: usize,
    /// Degree of the right (slot-`k`) factor.
    pub right_degree: usize,
}

pub fn active_columns(labels: &[BlockLabel], ansatz: &AnsatzSpace) -> Vec<usize> {
    (0..labels.len())
        .filter(|&c| {
            ansatz
                .slot_degree
                .is_none_or(|s| labels[c].slots.len() as usize == s)
        })
        .collect()
}

/// All candidate terms, in canonical order.
pub fn enumerate(
    sys: &EquationSystem,
    ansatz: &AnsatzSpace,
    layout: &AnsatzLayout,
) -> Result<Vec<AnsatzElement>> {
    let fibre = monomials_up_to(&internal_coords(sys, ansatz.order), ansatz.degree);
    let monomials: Vec<Monomial> = if ansatz.xt {
        let base: Vec<Coord> = (0..sys.n()).map(Coord::indep).collect();
        let base = monomials_up_to(&base, ansatz.degree);
        let mut all: Vec<Monomial> = base
            .iter()
            .flat_map(|b| fibre.iter().map(move |f| b.mul(f)))
            .collect();
        all.sort();
        all.dedup();
        all
    } else {
        fibre
    };
    let left_slots: Vec<usize> = (1..layout.level).collect();
    let left = words(
        &cartan_generators(sys, &left_slots, ansatz.order),
        ansatz.cartan,
        ansatz.cartan_exact,
    );
    let right = words(
        &cartan_generators(sys, &[layout.level], ansatz.order),
        layout.right_degree,
        true,
    );
    let columns = active_columns(layout.labels, ansatz);
    let size = columns.len() * left.len() * right.len() * monomials.len();
    if size > ansatz.cap {
        return Err(Error::AnsatzOverflow {
            size,
            cap: ansatz.cap,
        });
    }
    let mut out = Vec::with_capacity(size);
    for &column in &columns {
        for r in &right {
            for l in &left {
                for m in &monomials {
                    out.push(AnsatzElement {
                        column,
                        right: r.clone(),
                        left: l.clone(),
                        monomial: m.clone(),
                    });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Coefficients of a tuple of tensors over `(component, right, left, monomial)`.
pub fn decompose(tensors: &[Tensor]) -> Result<BTreeMap<AnsatzElement, Rational>> {
    let mut out = BTreeMap::new();
    for (column, t) in tensors.iter().enumerate() {
        for (right, s) in t.terms() {
            for (left, c) in s.terms() {
                let p = c
                    .as_polynomial()
                    .ok_or_else(|| Error::NonPolynomial(format!("{c:?}")))?;
                for (m, v) in p.terms() {
                    let key = AnsatzElement {
                        column,
                        right: right.clone(),
                        left: left.clone(),
                        monomial: m.clone(),
                    };
                    out.insert(key, v.clone());
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::parse_system;

    fn kdv() -> EquationSystem {
        parse_system(
            "[system]\nindependent = x, t\ndependent = u\n[equations]\nu_t = 6*u*u_x + u_xxx\n",
        )
        .and_then(EquationSystem::from_raw)
        .unwrap()
    }

    #[test]
    fn ansatz_sizes() {
        let sys = kdv();
        let labels = [BlockLabel::plain(0)];
        let layout = AnsatzLayout {
            labels: &labels,
            level: 1,
            right_degree: 0,
        };
        // 1, three linear, six quadratic monomials in u, u_x, u_xx.
        assert_eq!(
            enumerate(&sys, &AnsatzSpace::new(2, 2), &layout)
                .unwrap()
                .len(),
            10
        );
        // Base monomials of degree ≤ 1 times fibre monomials of degree ≤ 1.
        assert_eq!(
            enumerate(&sys, &AnsatzSpace::new(1, 1).with_xt(true), &layout)
                .unwrap()
                .len(),
            9
        );
        let capped = AnsatzSpace::new(2, 2).with_cap(5);
        assert!(matches!(
            enumerate(&sys, &capped, &layout),
            Err(Error::AnsatzOverflow { .. })
        ));
        let e = enumerate(&sys, &AnsatzSpace::new(0, 0), &layout).unwrap();
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn cartan_words() {
        let sys = kdv();
        let labels = [BlockLabel::plain(0)];
        let layout = AnsatzLayout {
            labels: &labels,
            level: 2,
            right_degree: 1,
        };
        let a = AnsatzSpace::new(1, 0).with_cartan(1, false);
        // Left words: empty, dv[1]u, dv[1]u_x; right words: dv[2]u, dv[2]u_x.
        assert_eq!(enumerate(&sys, &a, &layout).unwrap().len(), 6);
    }
}
