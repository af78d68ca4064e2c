//! Bounded-order data for the first term of the `Λ_{k-1}C`-spectral
//! sequence of an evolution system: vanishing evidence below row `n - 1`,
//! the kernel row `n - 1`, and a truncated cokernel in row `n`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cdiff::{adjoint_lifted, extend_p, BlockLabel, CDiffOperator, Tensor};
use crate::error::{Error, Result};
use crate::expr::MultiIndex;
use crate::idf::{IDForm, IdfSpace};
use crate::jet::EquationSystem;
use crate::linalg::{Echelon, SparseSystem, SparseVector};
use crate::solver::{
    active_columns, alternate, assemble, enumerate, lifted_cosymmetries, solve_kernel, space_for,
    AnsatzLayout, AnsatzSpace, KernelBasis,
};

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub dim: usize,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Kernel,
    Cokernel,
    Vanishing,
    Note,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub q: Option<usize>,
    pub kind: CellKind,
    pub basis: Vec<String>,
    pub dims: Option<Dims>,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct ReportConfig {
    pub order: usize,
    pub degree: usize,
    pub cartan: usize,
    pub cartan_exact: bool,
    pub xt: bool,
    pub slot_degree: Option<usize>,
    pub n: usize,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct E1Report {
    pub system: String,
    pub k: usize,
    pub p: usize,
    pub cells: Vec<Cell>,
    pub config: ReportConfig,
}

impl E1Report {
    pub fn cell(&self, q: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.q == Some(q))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("system {}  k = {}  p = {}\n", self.system, self.k, self.p);
        for c in &self.cells {
            let q = c.q.map_or("-".to_string(), |q| q.to_string());
            let kind = match c.kind {
                CellKind::Kernel => "kernel",
                CellKind::Cokernel => "cokernel",
                CellKind::Vanishing => "vanishing",
                CellKind::Note => "note",
            };
            out.push_str(&format!("q = {q}  {kind}"));
            if let Some(d) = &c.dims {
                out.push_str(&format!(
                    "  dim {}  (system {}x{}, rank {})",
                    d.dim, d.rows, d.cols, d.rank
                ));
            }
            if !c.certified && c.kind != CellKind::Note {
                out.push_str("  [at bounds, not certified]");
            }
            out.push('\n');
            for b in &c.basis {
                out.push_str(&format!("    {b}\n"));
            }
            if let Some(n) = &c.note {
                out.push_str(&format!("    {n}\n"));
            }
        }
        out
    }
}

/// The horizontal differential on horizontal degree 0: the column `(D_1, ..., D_n)`.
pub fn horizontal_differential(n: usize) -> CDiffOperator {
    let mut op = CDiffOperator::zero_plain(n, 1);
    for mu in 0..n {
        op.add_term(mu, 0, MultiIndex::unit(mu), IDForm::one());
    }
    op
}

/// Cross-reference for the `p = 0` column.
pub fn zero_column_note(k: usize) -> Cell {
    let note = if k >= 2 {
        format!(
            "column p = 0 at level {k} is isomorphic to the whole E1 term at level {}; rerun with --k {}",
            k - 1,
            k - 1
        )
    } else {
        "column p = 0 at level 1 is horizontal cohomology, outside the scope of bounded-order computation".to_string()
    };
    Cell {
        q: None,
        kind: CellKind::Note,
        basis: Vec::new(),
        dims: None,
        certified: true,
        note: Some(note),
    }
}

/// Rows `q < n - 1`: kernel of the horizontal differential on slot-`k`
/// Cartan `p`-forms with `Λ_{k-1}` coefficients.
pub fn vanishing_cell(
    sys: &EquationSystem,
    k: usize,
    p: usize,
    ansatz: &AnsatzSpace,
    q: usize,
) -> Result<Cell> {
    if q > 0 {
        return Ok(Cell {
            q: Some(q),
            kind: CellKind::Note,
            basis: Vec::new(),
            dims: None,
            certified: false,
            note: Some("rows 0 < q < n - 1 need horizontal forms and are not computed".into()),
        });
    }
    let space = space_for(sys, k)?;
    let op = horizontal_differential(sys.n()).restrict(sys, &space)?;
    let basis = solve_kernel(
        &extend_p(&op, p, k),
        sys,
        &space,
        &ansatz.clone().with_slot_degree(None),
        k,
    )?;
    let dims = Dims {
        rows: basis.dims.rows,
        cols: basis.dims.cols,
        rank: basis.dims.rank,
        dim: basis.len(),
    };
    Ok(Cell {
        q: Some(0),
        kind: if basis.is_empty() {
            CellKind::Vanishing
        } else {
            CellKind::Kernel
        },
        basis: basis.display_all(&space),
        dims: Some(dims),
        certified: false,
        note: None,
    })
}

fn alt_strings(basis: &KernelBasis, p: usize, space: &IdfSpace) -> Vec<String> {
    (0..basis.len())
        .map(|i| {
            if p == 1 {
                basis.display_element(i, space)
            } else {
                let parts: Vec<String> = alternate(basis, i, p)
                    .into_iter()
                    .map(|(l, w)| {
                        if l.is_empty() {
                            space.display(&w)
                        } else {
                            format!("[{l}] {}", space.display(&w))
                        }
                    })
                    .collect();
                parts.join("; ")
            }
        })
        .collect()
}

/// Row `q = n - 1`: `alt_p` of the kernel of `[ℓ̂^{k}|_E]_{p-1}`.
pub fn kernel_cell(sys: &EquationSystem, k: usize, p: usize, ansatz: &AnsatzSpace) -> Result<Cell> {
    let space = space_for(sys, k)?;
    let basis = lifted_cosymmetries(sys, k, p, ansatz)?;
    let dims = Dims {
        rows: basis.dims.rows,
        cols: basis.dims.cols,
        rank: basis.dims.rank,
        dim: basis.len(),
    };
    Ok(Cell {
        q: Some(sys.n() - 1),
        kind: CellKind::Kernel,
        basis: alt_strings(&basis, p, &space),
        dims: Some(dims),
        certified: true,
        note: None,
    })
}

/// Truncated cokernel of an extended operator: the target space `T` is
/// the ansatz over the operator's rows; the result is `T / (image ∩ T)`
/// with standard-basis representatives.
pub struct TruncatedCokernel {
    pub target_size: usize,
    pub domain_size: usize,
    pub rank: usize,
    pub rows: Vec<BlockLabel>,
    pub representatives: Vec<Vec<Tensor>>,
}

pub fn truncated_cokernel(
    sys: &EquationSystem,
    k: usize,
    p: usize,
    ansatz: &AnsatzSpace,
) -> Result<TruncatedCokernel> {
    let space = space_for(sys, k)?;
    let op = extend_p(&adjoint_lifted(sys, k, &space)?, p - 1, k);
    let cols: Vec<BlockLabel> = op.operator().col_labels().to_vec();
    let rows: Vec<BlockLabel> = op.operator().row_labels().to_vec();
    let domain = enumerate(
        sys,
        ansatz,
        &AnsatzLayout {
            labels: &cols,
            level: k,
            right_degree: p - 1,
        },
    )?;
    let target = enumerate(
        sys,
        ansatz,
        &AnsatzLayout {
            labels: &rows,
            level: k,
            right_degree: p - 1,
        },
    )?;
    let domain_size = domain.len();
    let assembled = assemble(&op, sys, &space, domain)?;
    let target_index: BTreeMap<_, usize> = target
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();
    // Combinations of images whose coordinates outside T vanish.
    let mut outside: BTreeMap<_, usize> = BTreeMap::new();
    let mut outside_rows: Vec<SparseVector> = Vec::new();
    for (i, img) in assembled.images.iter().enumerate() {
        for (key, c) in img {
            if target_index.contains_key(key) {
                continue;
            }
            let next = outside.len();
            let r = *outside.entry(key.clone()).or_insert(next);
            if r == outside_rows.len() {
                outside_rows.push(SparseVector::new());
            }
            outside_rows[r].insert(i, c.clone());
        }
    }
    let mut system = SparseSystem::new(assembled.images.len());
    for r in outside_rows {
        system.push_row(r);
    }
    let (combos, _) = system.solve();
    let mut inside = Echelon::new();
    for v in &combos {
        let mut w = SparseVector::new();
        for (i, c) in v {
            for (key, x) in &assembled.images[*i] {
                if let Some(&t) = target_index.get(key) {
                    let e = w.entry(t).or_insert_with(|| crate::expr::rat(0));
                    *e += c * x;
                }
            }
        }
        w.retain(|_, x| *x != crate::expr::rat(0));
        inside.insert(&w);
    }
    let pivots: std::collections::BTreeSet<usize> = inside.pivot_columns().into_iter().collect();
    let active = active_columns(&rows, ansatz);
    let representatives = target
        .iter()
        .enumerate()
        .filter(|(i, e)| !pivots.contains(i) && active.contains(&e.column))
        .map(|(_, e)| {
            let mut t = vec![Tensor::zero(k); rows.len()];
            t[e.column] = e.tensor(k);
            t
        })
        .collect();
    Ok(TruncatedCokernel {
        target_size: target.len(),
        domain_size,
        rank: inside.rank(),
        rows,
        representatives,
    })
}

fn display_tuple(t: &[Tensor], space: &IdfSpace) -> String {
    let parts: Vec<String> = t.iter().map(|x| space.display(&x.contract())).collect();
    if parts.len() == 1 {
        parts[0].clone()
    } else {
        format!("[{}]", parts.join(", "))
    }
}

/// Row `q = n`.
pub fn cokernel_cell(
    sys: &EquationSystem,
    k: usize,
    p: usize,
    ansatz: &AnsatzSpace,
) -> Result<Cell> {
    let space = space_for(sys, k)?;
    let c = truncated_cokernel(sys, k, p, ansatz)?;
    let basis: Vec<String> = if p == 1 {
        c.representatives
            .iter()
            .map(|t| display_tuple(t, &space))
            .collect()
    } else {
        c.representatives
            .iter()
            .map(|t| {
                let theta_sum = t.iter().enumerate().fold(IDForm::zero(), |acc, (r, x)| {
                    let theta = IDForm::generator(crate::idf::Generator::vertical(
                        crate::idf::SlotSet::single(k),
                        c.rows[r].component,
                        MultiIndex::empty(),
                    ));
                    acc.add(&theta.mul(&x.contract()))
                });
                space.display(&theta_sum)
            })
            .collect()
    };
    let dims = Dims {
        rows: c.target_size,
        cols: c.domain_size,
        rank: c.rank,
        dim: basis.len(),
    };
    Ok(Cell {
        q: Some(sys.n()),
        kind: CellKind::Cokernel,
        basis,
        dims: Some(dims),
        certified: false,
        note: Some("quotient of the truncated target by the image of the truncated domain".into()),
    })
}

/// All rows of column `p` at level `k`, plus the zero-column note.
pub fn two_lines_report(
    sys: &EquationSystem,
    k: usize,
    p: usize,
    ansatz: &AnsatzSpace,
) -> Result<E1Report> {
    if p == 0 {
        return Err(Error::Degree(
            "the report needs p ≥ 1; column p = 0 is described by the zero-column note".into(),
        ));
    }
    if k == 0 || k > crate::idf::SlotSet::MAX_SLOT {
        return Err(Error::SlotOutOfRange {
            slot: k,
            max: crate::idf::SlotSet::MAX_SLOT,
        });
    }
    let n = sys.n();
    let mut cells = Vec::new();
    for q in 0..n.saturating_sub(1) {
        cells.push(vanishing_cell(sys, k, p, ansatz, q)?);
    }
    cells.push(kernel_cell(sys, k, p, ansatz)?);
    cells.push(cokernel_cell(sys, k, p, ansatz)?);
    cells.push(zero_column_note(k));
    Ok(E1Report {
        system: sys.name().to_string(),
        k,
        p,
        cells,
        config: ReportConfig {
            order: ansatz.order,
            degree: ansatz.degree,
            cartan: ansatz.cartan,
            cartan_exact: ansatz.cartan_exact,
            xt: ansatz.xt,
            slot_degree: ansatz.slot_degree,
            n,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::parse_system;

    fn system(rhs: &str) -> EquationSystem {
        parse_system(&format!(
            "[system]\nname = s\nindependent = x, t\ndependent = u\n[equations]\nu_t = {rhs}\n"
        ))
        .and_then(EquationSystem::from_raw)
        .unwrap()
    }

    #[test]
    fn kdv_first_column() {
        let r =
            two_lines_report(&system("6*u*u_x + u_xxx"), 1, 1, &AnsatzSpace::new(2, 2)).unwrap();
        assert_eq!(r.cell(1).unwrap().basis, vec!["1", "u", "3*u^2 + u_xx"]);
        assert_eq!(r.cell(0).unwrap().kind, CellKind::Vanishing);
        assert_eq!(r.cell(2).unwrap().kind, CellKind::Cokernel);
    }

    #[test]
    fn heat_vanishing_at_level_two() {
        let cell = vanishing_cell(&system("u_xx"), 2, 1, &AnsatzSpace::new(2, 2), 0).unwrap();
        assert_eq!(cell.kind, CellKind::Vanishing);
        let d = cell.dims.unwrap();
        assert_eq!(d.dim, 0);
        assert_eq!(d.rank, d.cols);
    }

    #[test]
    fn heat_cokernel_is_finite() {
        let cell = cokernel_cell(&system("u_xx"), 1, 1, &AnsatzSpace::new(1, 1)).unwrap();
        let d = cell.dims.clone().unwrap();
        assert_eq!(d.dim, d.rows - d.rank);
        assert!(!cell.certified);
        assert!(!cell.basis.is_empty());
    }

    #[test]
    fn zero_column_notes() {
        assert!(zero_column_note(2).note.unwrap().contains("--k 1"));
        assert!(zero_column_note(3).note.unwrap().contains("--k 2"));
        assert!(zero_column_note(1)
            .note
            .unwrap()
            .contains("horizontal cohomology"));
    }
}
