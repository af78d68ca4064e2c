//! Bounded-order exact kernels of C-differential operators on an equation:
//! symmetries, cosymmetries, lifted cosymmetries, and the symmetry bracket.

mod ansatz;

pub use ansatz::{
    active_columns, decompose, enumerate, internal_coords, AnsatzElement, AnsatzLayout,
    AnsatzSpace, DEFAULT_ANSATZ_CAP,
};

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::cdiff::{adjoint_lifted, extend_p, BlockLabel, CDiffOperator, ExtendedOperator, Tensor};
use crate::error::{Error, Result};
use crate::expr::{Coord, JetExpression, Rational};
use crate::idf::{Generator, IDForm, IdfSpace, SlotSet};
use crate::jet::{EquationSystem, Section};
use crate::linalg::{Echelon, SparseSystem, SparseVector, SystemDims};

/// Operator images of every ansatz element, as coefficient maps.
pub struct Assembled {
    pub elements: Vec<AnsatzElement>,
    pub images: Vec<BTreeMap<AnsatzElement, Rational>>,
}

pub fn assemble(
    op: &ExtendedOperator,
    sys: &EquationSystem,
    space: &IdfSpace,
    elements: Vec<AnsatzElement>,
) -> Result<Assembled> {
    let slot = op.slot();
    let cols = op.operator().cols();
    let images = elements
        .par_iter()
        .map(|e| {
            let mut args = vec![Tensor::zero(slot); cols];
            args[e.column] = e.tensor(slot);
            decompose(&op.apply(&args, Some((sys, space)))?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assembled { elements, images })
}

/// Exact basis of the kernel within an ansatz.
#[derive(Clone, Debug)]
pub struct KernelBasis {
    pub labels: Vec<BlockLabel>,
    pub slot: usize,
    pub elements: Vec<Vec<Tensor>>,
    pub dims: SystemDims,
    ansatz: Vec<AnsatzElement>,
    vectors: Vec<SparseVector>,
}

impl KernelBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn ansatz_size(&self) -> usize {
        self.ansatz.len()
    }

    /// Elements as tuples of forms (right factors multiplied in).
    pub fn forms(&self) -> Vec<Vec<IDForm>> {
        self.elements
            .iter()
            .map(|e| e.iter().map(Tensor::contract).collect())
            .collect()
    }

    /// Elements as function sections; `None` if some value is not a function.
    pub fn sections(&self) -> Option<Vec<Section>> {
        self.forms()
            .into_iter()
            .map(|e| {
                e.iter()
                    .map(IDForm::as_function)
                    .collect::<Option<Vec<_>>>()
                    .map(Section)
            })
            .collect()
    }

    /// `a` for one component, `[a, b]` otherwise.
    pub fn display_element(&self, i: usize, space: &IdfSpace) -> String {
        let parts: Vec<String> = self.forms()[i].iter().map(|w| space.display(w)).collect();
        if parts.len() == 1 {
            parts[0].clone()
        } else {
            format!("[{}]", parts.join(", "))
        }
    }

    pub fn display_all(&self, space: &IdfSpace) -> Vec<String> {
        (0..self.len())
            .map(|i| self.display_element(i, space))
            .collect()
    }

    /// Whether a tuple lies in the span of this basis.
    pub fn contains(&self, element: &[Tensor]) -> Result<bool> {
        let index: BTreeMap<&AnsatzElement, usize> = self
            .ansatz
            .iter()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        let mut v = SparseVector::new();
        for (key, c) in decompose(element)? {
            match index.get(&key) {
                Some(&i) => {
                    v.insert(i, c);
                }
                None => return Ok(false),
            }
        }
        let mut span = Echelon::new();
        for b in &self.vectors {
            span.insert(b);
        }
        Ok(span.contains(&v))
    }

    /// Whether a function section lies in the span.
    pub fn contains_section(&self, s: &Section) -> Result<bool> {
        let t: Vec<Tensor> =
            s.0.iter()
                .map(|f| Tensor::scalar(f.clone().into(), self.slot))
                .collect();
        self.contains(&t)
    }
}

/// Solve `Δ(Σ c_i e_i) = 0` on `sys` over the ansatz.
pub fn solve_kernel(
    op: &ExtendedOperator,
    sys: &EquationSystem,
    space: &IdfSpace,
    ansatz: &AnsatzSpace,
    level: usize,
) -> Result<KernelBasis> {
    let labels = op.operator().col_labels().to_vec();
    let layout = AnsatzLayout {
        labels: &labels,
        level,
        right_degree: op.p(),
    };
    let elements = enumerate(sys, ansatz, &layout)?;
    log::debug!("ansatz of {} elements", elements.len());
    let Assembled { elements, images } = assemble(op, sys, space, elements)?;
    let mut keys: BTreeMap<&AnsatzElement, usize> = BTreeMap::new();
    for img in &images {
        for k in img.keys() {
            let next = keys.len();
            keys.entry(k).or_insert(next);
        }
    }
    let mut rows = vec![SparseVector::new(); keys.len()];
    for (i, img) in images.iter().enumerate() {
        for (k, c) in img {
            rows[keys[k]].insert(i, c.clone());
        }
    }
    let mut system = SparseSystem::new(elements.len());
    for r in rows {
        system.push_row(r);
    }
    let (null, dims) = system.solve();
    log::debug!(
        "determining system {}x{} of rank {}",
        dims.rows,
        dims.cols,
        dims.rank
    );
    let slot = op.slot();
    let mut out = Vec::new();
    for v in &null {
        let mut tuple = vec![Tensor::zero(slot); labels.len()];
        for (i, c) in v {
            let e = &elements[*i];
            tuple[e.column] =
                tuple[e.column].add(&e.tensor(slot).scale(&JetExpression::from(c.clone())));
        }
        out.push(tuple);
    }
    for t in &out {
        if op
            .apply(t, Some((sys, space)))?
            .iter()
            .any(|r| !r.is_zero())
        {
            return Err(Error::Verification("kernel element not annihilated".into()));
        }
    }
    Ok(KernelBasis {
        labels,
        slot,
        elements: out,
        dims,
        ansatz: elements,
        vectors: null,
    })
}

/// Idf space with `level` slots over the system's coordinates.
pub fn space_for(sys: &EquationSystem, level: usize) -> Result<IdfSpace> {
    IdfSpace::new(sys.context().clone(), level.max(1))
}

/// Kernel of `ℓ_F` restricted to the equation.
pub fn symmetries(sys: &EquationSystem, ansatz: &AnsatzSpace) -> Result<KernelBasis> {
    let space = space_for(sys, 1)?;
    let op = crate::cdiff::linearize(sys).restrict(sys, &space)?;
    solve_kernel(&extend_p(&op, 0, 1), sys, &space, ansatz, 1)
}

/// Kernel of the adjoint linearization restricted to the equation.
pub fn cosymmetries(sys: &EquationSystem, ansatz: &AnsatzSpace) -> Result<KernelBasis> {
    let space = space_for(sys, 1)?;
    let op = crate::cdiff::linearize(sys)
        .adjoint()
        .restrict(sys, &space)?;
    solve_kernel(&extend_p(&op, 0, 1), sys, &space, ansatz, 1)
}

/// Kernel of `[ℓ̂^{k}|_E]_{p-1}`, with unknowns in `Q ⊗ C_*Λ^{p-1}_k`.
pub fn lifted_cosymmetries(
    sys: &EquationSystem,
    level: usize,
    p: usize,
    ansatz: &AnsatzSpace,
) -> Result<KernelBasis> {
    if p == 0 {
        return Err(Error::Degree("p must be at least 1".into()));
    }
    let space = space_for(sys, level)?;
    let op = adjoint_lifted(sys, level, &space)?;
    solve_kernel(&extend_p(&op, p - 1, level), sys, &space, ansatz, level)
}

/// `alt_p` applied to a kernel element: for `p = 1` the element itself; for
/// `p ≥ 2`, per block `L`, the form `Σ_j d^v_k u^j · ψ^{(j, L)}`.
pub fn alternate(basis: &KernelBasis, element: usize, p: usize) -> Vec<(SlotSet, IDForm)> {
    let forms = &basis.forms()[element];
    let mut out: BTreeMap<SlotSet, IDForm> = BTreeMap::new();
    for (label, w) in basis.labels.iter().zip(forms) {
        let value = if p == 1 {
            w.clone()
        } else {
            let theta = IDForm::generator(Generator::vertical(
                SlotSet::single(basis.slot),
                label.component,
                crate::expr::MultiIndex::empty(),
            ));
            theta.mul(w)
        };
        let e = out.entry(label.slots).or_default();
        *e = e.add(&value);
    }
    out.into_iter().collect()
}

/// Evolutionary derivation `E_φ(g) = Σ D_σ(φ^j) ∂g/∂u^j_σ` on the equation.
pub fn evolutionary(
    phi: &Section,
    g: &JetExpression,
    sys: &EquationSystem,
) -> Result<JetExpression> {
    let mut acc = JetExpression::zero();
    for c in g.coords() {
        if let Coord::Jet(j, sigma) = &c {
            let d = sys.internal_prolong(&phi.0[*j as usize], sigma)?;
            acc = acc.add(&d.mul(&g.partial(&c)));
        }
    }
    sys.restrict(&acc)
}

/// `{φ₁, φ₂} = E_{φ₁}(φ₂) - E_{φ₂}(φ₁)`.
pub fn lie_bracket(phi1: &Section, phi2: &Section, sys: &EquationSystem) -> Result<Section> {
    if phi1.len() != sys.m() || phi2.len() != sys.m() {
        return Err(Error::Shape(
            "bracket arguments need one component per dependent variable".into(),
        ));
    }
    let phi1 = sys.restrict_section(phi1)?;
    let phi2 = sys.restrict_section(phi2)?;
    let mut out = Vec::with_capacity(sys.m());
    for a in 0..sys.m() {
        out.push(evolutionary(&phi1, &phi2.0[a], sys)?.sub(&evolutionary(&phi2, &phi1.0[a], sys)?));
    }
    Ok(Section(out))
}

/// Keep only basis elements that are annihilated by `op` (used to predict
/// lifts from block structure).
pub fn annihilated_by(
    op: &CDiffOperator,
    candidates: &[Section],
    sys: &EquationSystem,
    space: &IdfSpace,
) -> Result<Vec<Section>> {
    let mut images = Vec::new();
    for s in candidates {
        let args: Vec<IDForm> = s.0.iter().map(|f| IDForm::from(f.clone())).collect();
        images.push(op.apply_on(&args, sys, space)?);
    }
    // Combinations Σ c_i candidates_i with Σ c_i images_i = 0.
    let mut keys: BTreeMap<(usize, Vec<Generator>, crate::expr::Monomial), usize> = BTreeMap::new();
    let mut rows: Vec<SparseVector> = Vec::new();
    for (i, img) in images.iter().enumerate() {
        for (r, w) in img.iter().enumerate() {
            for (word, c) in w.terms() {
                let p = c
                    .as_polynomial()
                    .ok_or_else(|| Error::NonPolynomial(format!("{c:?}")))?;
                for (m, v) in p.terms() {
                    let next = keys.len();
                    let idx = *keys.entry((r, word.clone(), m.clone())).or_insert(next);
                    if idx == rows.len() {
                        rows.push(SparseVector::new());
                    }
                    rows[idx].insert(i, v.clone());
                }
            }
        }
    }
    let mut system = SparseSystem::new(candidates.len());
    for r in rows {
        system.push_row(r);
    }
    let (null, _) = system.solve();
    Ok(null
        .iter()
        .map(|v| {
            let mut acc = Section::zero(candidates.first().map_or(0, Section::len));
            for (i, c) in v {
                for (a, f) in candidates[*i].0.iter().enumerate() {
                    acc.0[a] = acc.0[a].add(&f.scale(c));
                }
            }
            acc
        })
        .collect())
}
