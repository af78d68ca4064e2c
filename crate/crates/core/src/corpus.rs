//! Built-in evolution systems with reference symmetry and cosymmetry bases.

use crate::error::Result;
use crate::jet::{parse_system, EquationSystem};
use crate::solver::AnsatzSpace;

/// A kernel basis expected at stated bounds, in canonical print form.
#[derive(Clone, Debug)]
pub struct Golden {
    pub order: usize,
    pub degree: usize,
    pub xt: bool,
    pub basis: &'static [&'static str],
}

impl Golden {
    pub fn ansatz(&self) -> AnsatzSpace {
        AnsatzSpace::new(self.order, self.degree).with_xt(self.xt)
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub symmetries: Golden,
    pub cosymmetries: Golden,
    pub notes: &'static str,
}

impl CorpusEntry {
    pub fn system(&self) -> Result<EquationSystem> {
        EquationSystem::from_raw(parse_system(self.source)?)
    }
}

const ENTRIES: &[CorpusEntry] = &[
    CorpusEntry {
        name: "heat",
        source: include_str!("../corpus/heat.eq"),
        symmetries: Golden {
            order: 1,
            degree: 1,
            xt: true,
            basis: &["1", "u_x", "u", "x", "x*u + 2*t*u_x"],
        },
        cosymmetries: Golden {
            order: 2,
            degree: 2,
            xt: false,
            basis: &["1"],
        },
        notes: "Linear; every solution f(x, t) is a symmetry.",
    },
    CorpusEntry {
        name: "burgers",
        source: include_str!("../corpus/burgers.eq"),
        symmetries: Golden {
            order: 2,
            degree: 2,
            xt: false,
            basis: &["u_x", "u*u_x + u_xx"],
        },
        cosymmetries: Golden {
            order: 2,
            degree: 2,
            xt: false,
            basis: &["1"],
        },
        notes: "Only the mass is conserved at these bounds.",
    },
    CorpusEntry {
        name: "kdv",
        source: include_str!("../corpus/kdv.eq"),
        symmetries: Golden {
            order: 3,
            degree: 2,
            xt: false,
            basis: &["u_x", "6*u*u_x + u_xxx"],
        },
        cosymmetries: Golden {
            order: 2,
            degree: 2,
            xt: false,
            basis: &["1", "u", "3*u^2 + u_xx"],
        },
        notes: "Mass, momentum and energy densities.",
    },
    CorpusEntry {
        name: "transport",
        source: include_str!("../corpus/transport.eq"),
        symmetries: Golden {
            order: 1,
            degree: 1,
            xt: false,
            basis: &["1", "u_x", "u"],
        },
        cosymmetries: Golden {
            order: 1,
            degree: 1,
            xt: false,
            basis: &["1", "u_x", "u"],
        },
        notes: "Linear first order; any f(u) is a cosymmetry.",
    },
    CorpusEntry {
        name: "wave2",
        source: include_str!("../corpus/wave2.eq"),
        symmetries: Golden {
            order: 1,
            degree: 1,
            xt: false,
            basis: &["[1, 0]", "[u_x, v_x]", "[u, v]"],
        },
        cosymmetries: Golden {
            order: 1,
            degree: 1,
            xt: false,
            basis: &["[0, 1]", "[-v_x, u_x]", "[-v, u]"],
        },
        notes: "First-order form of u_tt = u_xx.",
    },
];

pub fn load_corpus() -> Vec<CorpusEntry> {
    ENTRIES.to_vec()
}

pub fn find(name: &str) -> Option<CorpusEntry> {
    ENTRIES.iter().find(|e| e.name == name).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdiff::linearize;
    use crate::solver::{cosymmetries, space_for, symmetries};

    #[test]
    fn goldens_are_solver_output() {
        for e in load_corpus() {
            let sys = e.system().unwrap();
            let s = space_for(&sys, 1).unwrap();
            let sy = symmetries(&sys, &e.symmetries.ansatz()).unwrap();
            let co = cosymmetries(&sys, &e.cosymmetries.ansatz()).unwrap();
            assert_eq!(sy.display_all(&s), e.symmetries.basis, "{}", e.name);
            assert_eq!(co.display_all(&s), e.cosymmetries.basis, "{}", e.name);
        }
    }

    #[test]
    fn goldens_are_annihilated() {
        for e in load_corpus() {
            let sys = e.system().unwrap();
            let s = space_for(&sys, 1).unwrap();
            let l = linearize(&sys).restrict(&sys, &s).unwrap();
            let lstar = linearize(&sys).adjoint().restrict(&sys, &s).unwrap();
            for (op, g) in [(&l, &e.symmetries), (&lstar, &e.cosymmetries)] {
                for text in g.basis {
                    let parts: Vec<_> = text
                        .trim_matches(|c| c == '[' || c == ']')
                        .split(", ")
                        .map(|p| s.parse(p).unwrap())
                        .collect();
                    let img = op.apply_on(&parts, &sys, &s).unwrap();
                    assert!(img.iter().all(|f| f.is_zero()), "{} {}", e.name, text);
                }
            }
        }
    }

    #[test]
    fn entries_are_in_evolution_form() {
        for e in load_corpus() {
            let raw = parse_system(e.source).unwrap();
            assert!(raw.is_normal_form().ok, "{}", e.name);
            assert_eq!(raw.name, e.name);
        }
    }

    #[test]
    fn lookup() {
        assert!(find("kdv").is_some());
        assert!(find("nls").is_none());
    }
}
