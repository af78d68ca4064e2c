use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use super::{prolong, total_derivative, Section};
use crate::error::{Error, Result};
use crate::expr::{Context, Coord, JetExpression, MultiIndex};

pub const DEFAULT_PROLONGATION_CAP: usize = 24;

/// An unvalidated system as read from input: left-hand side coordinates and
/// right-hand sides, in file order.
#[derive(Clone, Debug)]
pub struct RawSystem {
    pub name: String,
    pub context: Context,
    pub leading: usize,
    pub equations: Vec<(Coord, JetExpression)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormReport {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

impl RawSystem {
    /// Structural evolution-form check: every equation solved for the first
    /// leading-variable derivative of a distinct dependent variable, with a
    /// right-hand side free of leading-variable derivatives, and every
    /// dependent variable covered.
    pub fn is_normal_form(&self) -> NormalFormReport {
        let ctx = &self.context;
        let t = self.leading;
        let mut diagnostics = Vec::new();
        let mut seen = vec![false; ctx.m()];
        for (i, (lhs, rhs)) in self.equations.iter().enumerate() {
            let lhs_name = ctx.coord_name(lhs);
            match lhs {
                Coord::Jet(j, sigma) if *sigma == MultiIndex::unit(t) => {
                    let j = *j as usize;
                    if seen[j] {
                        diagnostics.push(format!(
                            "equation {}: `{}` is solved for more than once",
                            i + 1,
                            ctx.dependent()[j]
                        ));
                    }
                    seen[j] = true;
                }
                Coord::Jet(_, sigma) if sigma.count(t) as usize == sigma.order() && sigma.order() > 1 => {
                    diagnostics.push(format!(
                        "equation {}: `{lhs_name}` is a higher pure {}-derivative; rewrite as a first-order system",
                        i + 1,
                        ctx.independent()[t]
                    ));
                }
                _ => diagnostics.push(format!(
                    "equation {}: left-hand side `{lhs_name}` is not a first derivative in the leading variable `{}`",
                    i + 1,
                    ctx.independent()[t]
                )),
            }
            for c in rhs.coords() {
                if let Coord::Jet(_, sigma) = &c {
                    if sigma.count(t) > 0 {
                        diagnostics.push(format!(
                            "equation {}: right-hand side contains `{}`",
                            i + 1,
                            ctx.coord_name(&c)
                        ));
                    }
                }
            }
        }
        for (j, s) in seen.iter().enumerate() {
            if !s {
                diagnostics.push(format!(
                    "no evolution equation for `{}`",
                    ctx.dependent()[j]
                ));
            }
        }
        NormalFormReport {
            ok: diagnostics.is_empty(),
            diagnostics,
        }
    }
}

/// An evolution system `u^j_t = f^j` together with the rewriting that
/// eliminates every coordinate containing a leading-variable derivative.
#[derive(Debug)]
pub struct EquationSystem {
    name: String,
    context: Context,
    leading: usize,
    rhs: Vec<JetExpression>,
    cap: usize,
    cache: RwLock<HashMap<Coord, JetExpression>>,
}

impl Clone for EquationSystem {
    fn clone(&self) -> Self {
        EquationSystem {
            name: self.name.clone(),
            context: self.context.clone(),
            leading: self.leading,
            rhs: self.rhs.clone(),
            cap: self.cap,
            cache: RwLock::new(self.cache.read().expect("cache lock").clone()),
        }
    }
}

impl EquationSystem {
    pub fn from_raw(raw: RawSystem) -> Result<Self> {
        let report = raw.is_normal_form();
        if !report.ok {
            return Err(Error::InvalidSystem(report.diagnostics.join("; ")));
        }
        let mut rhs = vec![JetExpression::zero(); raw.context.m()];
        for (lhs, f) in raw.equations {
            if let Coord::Jet(j, _) = lhs {
                rhs[j as usize] = f;
            }
        }
        Ok(EquationSystem {
            name: raw.name,
            context: raw.context,
            leading: raw.leading,
            rhs,
            cap: DEFAULT_PROLONGATION_CAP,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self.cache = RwLock::new(HashMap::new());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn leading(&self) -> usize {
        self.leading
    }

    pub fn n(&self) -> usize {
        self.context.n()
    }

    pub fn m(&self) -> usize {
        self.context.m()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn rhs(&self) -> &[JetExpression] {
        &self.rhs
    }

    /// The defining functions `F^a = u^a_t - f^a`.
    pub fn defining_functions(&self) -> Vec<JetExpression> {
        self.rhs
            .iter()
            .enumerate()
            .map(|(a, f)| JetExpression::var(Coord::jet(a, MultiIndex::unit(self.leading))).sub(f))
            .collect()
    }

    pub fn is_internal_coord(&self, c: &Coord) -> bool {
        match c {
            Coord::Indep(_) => true,
            Coord::Jet(_, sigma) => sigma.count(self.leading) == 0,
        }
    }

    pub fn is_internal(&self, e: &JetExpression) -> bool {
        e.coords().iter().all(|c| self.is_internal_coord(c))
    }

    /// Internal-coordinate expression of `u^j_σ` on the prolonged equation.
    pub fn restricted_coord(&self, j: usize, sigma: &MultiIndex) -> Result<JetExpression> {
        let t = self.leading;
        if sigma.count(t) == 0 {
            return Ok(JetExpression::var(Coord::jet(j, sigma.clone())));
        }
        if sigma.order() > self.cap {
            return Err(Error::ProlongationCap {
                order: sigma.order(),
                cap: self.cap,
            });
        }
        let key = Coord::jet(j, sigma.clone());
        if let Some(e) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(e.clone());
        }
        let rest = sigma.with_removed(t).expect("has a t");
        let t_count = rest.count(t) as usize;
        let mut spatial = rest.clone();
        for _ in 0..t_count {
            spatial = spatial.with_removed(t).expect("t count");
        }
        let mut g = prolong(&self.rhs[j], &spatial);
        for _ in 0..t_count {
            g = self.restrict(&total_derivative(&g, t))?;
        }
        if g.jet_order() > self.cap {
            return Err(Error::ProlongationCap {
                order: g.jet_order(),
                cap: self.cap,
            });
        }
        self.cache
            .write()
            .expect("cache lock")
            .insert(key, g.clone());
        Ok(g)
    }

    /// Rewrite every coordinate carrying a leading-variable derivative.
    pub fn restrict(&self, e: &JetExpression) -> Result<JetExpression> {
        let mut rules = BTreeMap::new();
        for c in e.coords() {
            if let Coord::Jet(j, sigma) = &c {
                if sigma.count(self.leading) > 0 {
                    rules.insert(c.clone(), self.restricted_coord(*j as usize, sigma)?);
                }
            }
        }
        e.substitute(&rules)
    }

    pub fn restrict_section(&self, s: &Section) -> Result<Section> {
        Ok(Section(
            s.0.iter()
                .map(|e| self.restrict(e))
                .collect::<Result<_>>()?,
        ))
    }

    /// Total derivative on the prolonged equation: `D_mu` followed by restriction.
    pub fn internal_total_derivative(&self, e: &JetExpression, mu: usize) -> Result<JetExpression> {
        self.restrict(&total_derivative(e, mu))
    }

    pub fn internal_prolong(&self, e: &JetExpression, sigma: &MultiIndex) -> Result<JetExpression> {
        let mut out = self.restrict(e)?;
        for mu in sigma.directions() {
            out = self.internal_total_derivative(&out, mu)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::jet::parse_system;
    use proptest::prelude::*;

    fn kdv() -> EquationSystem {
        parse_system("[system]\nname = kdv\nindependent = x, t\ndependent = u\n[equations]\nu_t = 6*u*u_x + u_xxx\n")
            .and_then(EquationSystem::from_raw)
            .unwrap()
    }

    fn heat() -> EquationSystem {
        parse_system(
            "[system]\nname = heat\nindependent = x, t\ndependent = u\n[equations]\nu_t = u_xx\n",
        )
        .and_then(EquationSystem::from_raw)
        .unwrap()
    }

    #[test]
    fn restriction_examples() {
        let k = kdv();
        let p = |s: &str| parse_expression(s, k.context()).unwrap();
        assert_eq!(k.restrict(&p("u_t")).unwrap(), p("6*u*u_x + u_xxx"));
        assert_eq!(
            k.restrict(&p("u_xt")).unwrap(),
            p("6*u_x^2 + 6*u*u_xx + u_xxxx")
        );
        let h = heat();
        assert_eq!(h.restrict(&p("u_tt")).unwrap(), p("u_xxxx"));
    }

    #[test]
    fn normal_form_examples() {
        let ok = |src: &str| parse_system(src).unwrap().is_normal_form().ok;
        assert!(ok(
            "[system]\nindependent = x, t\ndependent = u\n[equations]\nu_t = u_xx\n"
        ));
        assert!(ok(
            "[system]\nindependent = x, t\ndependent = u, v\n[equations]\nu_t = v\nv_t = u_xx\n"
        ));
        let bad =
            parse_system("[system]\nindependent = x, t\ndependent = u\n[equations]\nu_x = u\n")
                .unwrap();
        let r = bad.is_normal_form();
        assert!(!r.ok);
        assert!(r.diagnostics[0].contains("u_x"));
        assert!(!ok(
            "[system]\nindependent = x, t\ndependent = u\n[equations]\nu_t = u_xt\n"
        ));
        assert!(!ok(
            "[system]\nindependent = x, t\ndependent = u, v\n[equations]\nu_t = v\n"
        ));
    }

    #[test]
    fn prolongation_cap_is_reported() {
        let k = kdv().with_cap(5);
        let p = |s: &str| parse_expression(s, k.context()).unwrap();
        assert!(k.restrict(&p("u_t")).is_ok());
        assert!(matches!(
            k.restrict(&p("u_tt")),
            Err(Error::ProlongationCap { .. })
        ));
    }

    const ATOMS: [&str; 7] = ["u", "u_x", "x", "u_t", "u_xt", "u_tt", "u_xx"];

    fn arb(ctx: Context) -> impl Strategy<Value = JetExpression> {
        proptest::collection::vec((-3i64..4, proptest::collection::vec(0usize..7, 0..3)), 0..4)
            .prop_map(move |terms| {
                let mut acc = JetExpression::zero();
                for (c, fs) in terms {
                    let mut t = JetExpression::from(c);
                    for f in fs {
                        t = t.mul(&parse_expression(ATOMS[f], &ctx).unwrap());
                    }
                    acc = acc.add(&t);
                }
                acc
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn restriction_is_idempotent(e in arb(kdv().context().clone())) {
            let k = kdv();
            let once = k.restrict(&e).unwrap();
            prop_assert!(k.is_internal(&once));
            prop_assert_eq!(k.restrict(&once).unwrap(), once);
        }

        #[test]
        fn restriction_commutes_with_spatial_derivative(e in arb(kdv().context().clone())) {
            let k = kdv();
            let lhs = k.restrict(&total_derivative(&e, 0)).unwrap();
            let rhs = k.internal_total_derivative(&k.restrict(&e).unwrap(), 0).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn restriction_commutes_with_leading_derivative(e in arb(heat().context().clone())) {
            let h = heat();
            let lhs = h.restrict(&total_derivative(&e, 1)).unwrap();
            let rhs = h.internal_total_derivative(&h.restrict(&e).unwrap(), 1).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
