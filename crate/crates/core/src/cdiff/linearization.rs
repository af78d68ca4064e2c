use super::operator::{BlockLabel, CDiffOperator};
use crate::error::{Error, Result};
use crate::expr::{Coord, JetExpression, MultiIndex};
use crate::idf::{IDForm, IdfSpace, SlotSet};
use crate::jet::{is_total_divergence, EquationSystem};

/// Linearization of a family of functions: entry `(a, j)` is
/// `Σ_σ ∂F^a/∂u^j_σ D_σ`.
pub fn linearize_functions(f: &[JetExpression], m: usize) -> CDiffOperator {
    let mut op = CDiffOperator::zero_plain(f.len(), m);
    for (a, fa) in f.iter().enumerate() {
        for c in fa.coords() {
            if let Coord::Jet(j, sigma) = &c {
                op.add_term(a, *j as usize, sigma.clone(), fa.partial(&c).into());
            }
        }
    }
    op
}

/// `ℓ_F` for `F^a = u^a_t - f^a`.
pub fn linearize(sys: &EquationSystem) -> CDiffOperator {
    linearize_functions(&sys.defining_functions(), sys.m())
}

/// Block labels `(a, K)` for `K ⊆ {1, ..., level - 1}`, `K` outer.
pub fn lift_labels(components: usize, level: usize) -> Vec<BlockLabel> {
    let mut out = Vec::new();
    for k in SlotSet::full(level.saturating_sub(1)).subsets() {
        for a in 0..components {
            out.push(BlockLabel {
                component: a,
                slots: k,
            });
        }
    }
    out
}

/// Linearization of the lifted family `d^v_K F^a`: block `((a, K), (j, L))`
/// is `Σ_σ d^v_{K∖L}(∂F^a/∂u^j_σ) D_σ` for `L ⊆ K` and zero otherwise.
/// Distinct slots never pair, so the Leibniz expansion carries no signs.
pub fn lift_linearize(
    sys: &EquationSystem,
    level: usize,
    space: &IdfSpace,
) -> Result<CDiffOperator> {
    if level == 0 {
        return Err(Error::SlotOutOfRange {
            slot: 0,
            max: space.slots(),
        });
    }
    if level > space.slots() {
        return Err(Error::SlotOutOfRange {
            slot: level,
            max: space.slots(),
        });
    }
    let base = linearize(sys);
    let rows = lift_labels(sys.m(), level);
    let cols = rows.clone();
    let mut op = CDiffOperator::zero(rows.clone(), cols.clone());
    for (r, row) in rows.iter().enumerate() {
        for (c, col) in cols.iter().enumerate() {
            if !col.slots.is_subset(row.slots) {
                continue;
            }
            let diff = row.slots.minus(col.slots);
            for (sigma, a) in base.entry(row.component, col.component) {
                op.add_term(r, c, sigma.clone(), space.d_vertical_set(a, diff)?);
            }
        }
    }
    Ok(op)
}

/// `ℓ̂^{k}|_E`: adjoint of the lifted linearization, restricted to `sys`.
pub fn adjoint_lifted(
    sys: &EquationSystem,
    level: usize,
    space: &IdfSpace,
) -> Result<CDiffOperator> {
    lift_linearize(sys, level, space)?
        .adjoint()
        .restrict(sys, space)
}

/// Green identity with an explicitly supplied adjoint.
pub fn green_check_with(
    op: &CDiffOperator,
    adjoint: &CDiffOperator,
    space: &IdfSpace,
) -> Result<bool> {
    if adjoint.rows() != op.cols() || adjoint.cols() != op.rows() {
        return Err(Error::Shape("adjoint has the wrong shape".into()));
    }
    // Fresh dependent variables are the indices past the system's own.
    let m = space.context().m();
    let var = |j: usize| IDForm::from(JetExpression::var(Coord::jet(j, MultiIndex::empty())));
    let phi: Vec<IDForm> = (0..op.cols()).map(|i| var(m + i)).collect();
    let psi: Vec<IDForm> = (0..op.rows()).map(|i| var(m + op.cols() + i)).collect();
    let lhs = op.apply(&phi)?;
    let rhs = adjoint.apply(&psi)?;
    let mut total = JetExpression::zero();
    for (p, l) in psi.iter().zip(&lhs) {
        total = total.add(&as_function(&p.mul(l))?);
    }
    for (r, f) in rhs.iter().zip(&phi) {
        total = total.sub(&as_function(&r.mul(f))?);
    }
    Ok(is_total_divergence(&total))
}

fn as_function(w: &IDForm) -> Result<JetExpression> {
    w.as_function()
        .ok_or_else(|| Error::Degree("green_check needs function coefficients".into()))
}

/// `ψ·Δ(φ) - Δ*(ψ)·φ` is a total divergence, for fresh `φ`, `ψ`.
pub fn green_check(op: &CDiffOperator, space: &IdfSpace) -> Result<bool> {
    green_check_with(op, &op.adjoint(), space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdiff::parse_operator;
    use crate::jet::parse_system;

    fn system(src: &str) -> EquationSystem {
        parse_system(src)
            .and_then(EquationSystem::from_raw)
            .unwrap()
    }

    fn kdv() -> EquationSystem {
        system("[system]\nindependent = x, t\ndependent = u\n[equations]\nu_t = 6*u*u_x + u_xxx\n")
    }

    fn space_for(sys: &EquationSystem, k: usize) -> IdfSpace {
        IdfSpace::new(sys.context().clone(), k).unwrap()
    }

    #[test]
    fn linearization_examples() {
        let k = kdv();
        let s = space_for(&k, 1);
        assert_eq!(
            linearize(&k),
            parse_operator("Dt - 6*u*Dx - 6*u_x - Dx^3", &s).unwrap()
        );
        let wave = system(
            "[system]\nindependent = x, t\ndependent = u, v\n[equations]\nu_t = v\nv_t = u_xx\n",
        );
        let s = space_for(&wave, 1);
        assert_eq!(linearize(&wave).display(&s), "[[Dt, -1], [-Dx^2, Dt]]");
    }

    #[test]
    fn kdv_lift_blocks() {
        let k = kdv();
        let s = space_for(&k, 2);
        let lifted = lift_linearize(&k, 2, &s).unwrap();
        assert_eq!(lifted.rows(), 2);
        assert_eq!(lifted.entry_string(1, 0, &s), "-6*dv[1]u*Dx - 6*dv[1]u_x");
        assert!(lifted.entry(0, 1).is_empty());
        assert_eq!(lifted.block(&[0], &[0]), linearize(&k));
        assert_eq!(
            lifted
                .block(&[1], &[1])
                .with_labels(vec![BlockLabel::plain(0)], vec![BlockLabel::plain(0)])
                .unwrap(),
            linearize(&k)
        );
        assert_eq!(lift_linearize(&k, 1, &s).unwrap(), linearize(&k));
    }

    #[test]
    fn green_identity() {
        let k = kdv();
        let s = space_for(&k, 1);
        assert!(green_check(&linearize(&k), &s).unwrap());
        let dx = parse_operator("Dx", &s).unwrap();
        assert!(green_check(&dx, &s).unwrap());
        assert!(!green_check_with(&dx, &dx, &s).unwrap());
    }
}
