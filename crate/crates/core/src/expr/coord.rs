use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Counts of derivatives per independent variable. Trailing zero counts are
/// never stored, so two multi-indices compare equal regardless of the
/// number of independent variables in scope.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(SmallVec<[u16; 4]>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(SmallVec::new())
    }

    pub fn from_counts(counts: &[u16]) -> Self {
        let mut v: SmallVec<[u16; 4]> = counts.iter().copied().collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        MultiIndex(v)
    }

    /// The multi-index with a single derivative in direction `mu`.
    pub fn unit(mu: usize) -> Self {
        let mut v = SmallVec::from_elem(0, mu + 1);
        v[mu] = 1;
        MultiIndex(v)
    }

    pub fn count(&self, mu: usize) -> u16 {
        self.0.get(mu).copied().unwrap_or(0)
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn counts(&self) -> &[u16] {
        &self.0
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let len = self.0.len().max(other.0.len());
        let v: SmallVec<[u16; 4]> = (0..len).map(|i| self.count(i) + other.count(i)).collect();
        MultiIndex::from_counts(&v)
    }

    pub fn with_added(&self, mu: usize) -> MultiIndex {
        self.add(&MultiIndex::unit(mu))
    }

    /// `self - other` if `other <= self` componentwise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let len = self.0.len().max(other.0.len());
        let mut v: SmallVec<[u16; 4]> = SmallVec::with_capacity(len);
        for i in 0..len {
            v.push(self.count(i).checked_sub(other.count(i))?);
        }
        Some(MultiIndex::from_counts(&v))
    }

    pub fn with_removed(&self, mu: usize) -> Option<MultiIndex> {
        self.checked_sub(&MultiIndex::unit(mu))
    }

    /// Directions in non-decreasing order, one entry per derivative.
    pub fn directions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order());
        for (mu, &c) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(mu, c as usize));
        }
        out
    }

    /// All `tau <= self` componentwise, in canonical order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::empty()];
        for (mu, &c) in self.0.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
            for base in &out {
                for k in 0..=c {
                    let mut counts: SmallVec<[u16; 4]> = base.0.clone();
                    counts.resize(mu + 1, 0);
                    counts[mu] = k;
                    next.push(MultiIndex::from_counts(&counts));
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Product of binomial coefficients `C(self_mu, tau_mu)`.
    pub fn binomial(&self, tau: &MultiIndex) -> u64 {
        let mut b = 1u64;
        for mu in 0..self.0.len() {
            b *= binom(self.count(mu) as u64, tau.count(mu) as u64);
        }
        b
    }

    /// Every multi-index over `n` variables with order at most `max_order`.
    pub fn all_up_to(n: usize, max_order: usize) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::empty()];
        let mut frontier = vec![MultiIndex::empty()];
        for _ in 0..max_order {
            let mut next = Vec::new();
            for m in &frontier {
                for mu in 0..n {
                    let c = m.with_added(mu);
                    if !next.contains(&c) {
                        next.push(c);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out.sort();
        out
    }
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| {
            let len = self.0.len().max(other.0.len());
            for i in 0..len {
                match self.count(i).cmp(&other.count(i)) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "σ{:?}", self.0.as_slice())
    }
}

/// A coordinate on the jet space: an independent variable `x^mu` or a jet
/// coordinate `u^j_sigma`. The derived order is the canonical coordinate order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Coord {
    Indep(u16),
    Jet(u16, MultiIndex),
}

impl Coord {
    pub fn indep(mu: usize) -> Self {
        Coord::Indep(mu as u16)
    }

    pub fn dep(j: usize) -> Self {
        Coord::Jet(j as u16, MultiIndex::empty())
    }

    pub fn jet(j: usize, sigma: MultiIndex) -> Self {
        Coord::Jet(j as u16, sigma)
    }

    pub fn jet_order(&self) -> usize {
        match self {
            Coord::Indep(_) => 0,
            Coord::Jet(_, s) => s.order(),
        }
    }
}

/// Names of independent and dependent variables in scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    independent: Vec<String>,
    dependent: Vec<String>,
}

fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

impl Context {
    pub fn new<S: AsRef<str>>(independent: &[S], dependent: &[S]) -> Result<Self> {
        let independent: Vec<String> = independent.iter().map(|s| s.as_ref().to_string()).collect();
        let dependent: Vec<String> = dependent.iter().map(|s| s.as_ref().to_string()).collect();
        for name in &independent {
            if name.len() != 1 || !valid_identifier(name) {
                return Err(Error::InvalidSystem(format!(
                    "independent variable `{name}` must be a single letter"
                )));
            }
        }
        for name in &dependent {
            if !valid_identifier(name) {
                return Err(Error::InvalidSystem(format!(
                    "invalid dependent variable name `{name}`"
                )));
            }
        }
        let mut all: Vec<&String> = independent.iter().chain(dependent.iter()).collect();
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSystem("duplicate variable names".into()));
        }
        Ok(Context {
            independent,
            dependent,
        })
    }

    pub fn n(&self) -> usize {
        self.independent.len()
    }

    pub fn m(&self) -> usize {
        self.dependent.len()
    }

    pub fn independent(&self) -> &[String] {
        &self.independent
    }

    pub fn dependent(&self) -> &[String] {
        &self.dependent
    }

    pub fn indep_index(&self, name: &str) -> Option<usize> {
        self.independent.iter().position(|s| s == name)
    }

    pub fn dep_index(&self, name: &str) -> Option<usize> {
        self.dependent.iter().position(|s| s == name)
    }

    /// A context with additional dependent variables appended. Names that
    /// would collide get a numeric suffix.
    pub fn with_extra_dependent(&self, names: &[&str]) -> Context {
        let mut ctx = self.clone();
        for base in names {
            let mut name = base.to_string();
            let mut i = 0;
            while ctx.dep_index(&name).is_some() || ctx.indep_index(&name).is_some() {
                i += 1;
                name = format!("{base}{i}");
            }
            ctx.dependent.push(name);
        }
        ctx
    }

    pub fn coord_name(&self, c: &Coord) -> String {
        match c {
            Coord::Indep(mu) => self.independent[*mu as usize].clone(),
            Coord::Jet(j, sigma) => {
                let mut s = self.dependent[*j as usize].clone();
                if !sigma.is_empty() {
                    s.push('_');
                    for mu in sigma.directions() {
                        s.push_str(&self.independent[mu]);
                    }
                }
                s
            }
        }
    }

    /// Multi-index from derivative letters such as `xxt`.
    pub fn parse_letters(&self, letters: &str) -> Option<MultiIndex> {
        let mut counts = vec![0u16; self.n()];
        for ch in letters.chars() {
            let mu = self.indep_index(&ch.to_string())?;
            counts[mu] += 1;
        }
        Some(MultiIndex::from_counts(&counts))
    }

    pub fn sigma_letters(&self, sigma: &MultiIndex) -> String {
        sigma
            .directions()
            .iter()
            .map(|&mu| self.independent[mu].as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_merge_is_commutative() {
        let a = MultiIndex::from_counts(&[2, 0, 1]);
        let b = MultiIndex::from_counts(&[0, 3]);
        assert_eq!(a.add(&b), b.add(&a));
        assert_eq!(a.add(&b).order(), 6);
        assert_eq!(MultiIndex::from_counts(&[1, 0, 0]), MultiIndex::unit(0));
    }

    #[test]
    fn coordinate_order() {
        let x = Coord::indep(0);
        let u = Coord::dep(0);
        let ux = Coord::jet(0, MultiIndex::unit(0));
        let ut = Coord::jet(0, MultiIndex::unit(1));
        let v = Coord::dep(1);
        assert!(x < u && u < ut && ut < ux && ux < v);
    }

    #[test]
    fn sub_indices_and_binomials() {
        let s = MultiIndex::from_counts(&[2, 1]);
        assert_eq!(s.sub_indices().len(), 6);
        assert_eq!(s.binomial(&MultiIndex::from_counts(&[1, 1])), 2);
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 6);
    }

    #[test]
    fn context_names() {
        let ctx = Context::new(&["x", "t"], &["u"]).unwrap();
        let c = Coord::jet(0, ctx.parse_letters("txx").unwrap());
        assert_eq!(ctx.coord_name(&c), "u_xxt");
        assert!(Context::new(&["xy"], &["u"]).is_err());
        assert!(Context::new(&["x"], &["x"]).is_err());
        let ext = ctx.with_extra_dependent(&["u", "psi"]);
        assert_eq!(
            ext.dependent(),
            &["u".to_string(), "u1".into(), "psi".into()]
        );
    }
}
