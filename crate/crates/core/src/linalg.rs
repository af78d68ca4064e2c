//! Exact sparse linear algebra over ℚ.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::expr::Rational;

pub type SparseVector = BTreeMap<usize, Rational>;

fn axpy(target: &mut SparseVector, k: &Rational, x: &SparseVector) {
    for (i, v) in x {
        let e = target.entry(*i).or_insert_with(Rational::zero);
        *e += k * v;
        if e.is_zero() {
            target.remove(i);
        }
    }
}

fn scale(v: &mut SparseVector, k: &Rational) {
    for e in v.values_mut() {
        *e *= k;
    }
}

/// Row echelon data: pivot column → row with a unit pivot, every row
/// reduced against every other pivot (reduced row echelon form).
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseVector>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    /// Reduce `v` against the current pivots.
    pub fn reduce(&self, v: &SparseVector) -> SparseVector {
        let mut v = v.clone();
        // Pivots are reduced against each other, so one pass suffices.
        let hits: Vec<usize> = v
            .keys()
            .filter(|c| self.pivots.contains_key(c))
            .cloned()
            .collect();
        for c in hits {
            if let Some(k) = v.get(&c).cloned() {
                axpy(&mut v, &-k, &self.pivots[&c]);
            }
        }
        v
    }

    /// Add a vector; pivots are taken at the largest column. Returns whether
    /// the rank grew.
    pub fn insert(&mut self, v: &SparseVector) -> bool {
        let mut r = self.reduce(v);
        let Some((&p, lead)) = r.iter().next_back() else {
            return false;
        };
        let inv = lead.recip();
        scale(&mut r, &inv);
        for row in self.pivots.values_mut() {
            if let Some(k) = row.get(&p).cloned() {
                axpy(row, &-k, &r);
            }
        }
        self.pivots.insert(p, r);
        true
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().cloned().collect()
    }

    pub fn contains(&self, v: &SparseVector) -> bool {
        self.reduce(v).is_empty()
    }

    /// The reduced rows, ascending by pivot.
    pub fn rows(&self) -> impl Iterator<Item = (&usize, &SparseVector)> {
        self.pivots.iter()
    }

    /// Solutions of `row · x = 0` for all inserted rows, in `ncols` unknowns.
    pub fn nullspace(&self, ncols: usize) -> Vec<SparseVector> {
        let mut basis = Echelon::new();
        for f in (0..ncols).filter(|c| !self.pivots.contains_key(c)) {
            let mut v = SparseVector::new();
            v.insert(f, Rational::one());
            for (p, row) in &self.pivots {
                if let Some(k) = row.get(&f) {
                    v.insert(*p, -k.clone());
                }
            }
            basis.insert(&v);
        }
        basis.canonical_basis()
    }

    /// Reduced basis of the span, each vector scaled to coprime integers
    /// with a positive pivot.
    pub fn canonical_basis(&self) -> Vec<SparseVector> {
        self.pivots.values().map(primitive).collect()
    }
}

/// Scale to coprime integer entries with positive last entry.
pub fn primitive(v: &SparseVector) -> SparseVector {
    let mut lcm = num_bigint::BigInt::one();
    for e in v.values() {
        lcm = lcm.lcm(e.denom());
    }
    let mut g = num_bigint::BigInt::zero();
    for e in v.values() {
        g = g.gcd(&(e.numer() * (&lcm / e.denom())));
    }
    if g.is_zero() {
        return v.clone();
    }
    let mut k = Rational::new(lcm, g);
    if v.values().next_back().is_some_and(|x| x.is_negative()) {
        k = -k;
    }
    v.iter().map(|(i, e)| (*i, e * &k)).collect()
}

/// Sparse system of linear equations over ℚ.
#[derive(Clone, Debug, Default)]
pub struct SparseSystem {
    rows: Vec<SparseVector>,
    ncols: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SystemDims {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
}

impl SparseSystem {
    pub fn new(ncols: usize) -> Self {
        SparseSystem {
            rows: Vec::new(),
            ncols,
        }
    }

    pub fn push_row(&mut self, row: SparseVector) {
        if !row.is_empty() {
            self.rows.push(row);
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn echelon(&self) -> Echelon {
        let mut e = Echelon::new();
        for r in &self.rows {
            e.insert(r);
        }
        e
    }

    /// Canonical nullspace basis, with the dimensions of the solved system.
    pub fn solve(&self) -> (Vec<SparseVector>, SystemDims) {
        let e = self.echelon();
        let dims = SystemDims {
            rows: self.rows.len(),
            cols: self.ncols,
            rank: e.rank(),
        };
        (e.nullspace(self.ncols), dims)
    }
}
