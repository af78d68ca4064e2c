use std::fmt;

use crate::expr::{Context, Coord, MultiIndex};

/// Subset of `{1, ..., 8}` stored as a bitmask (bit `i - 1` for slot `i`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SlotSet(u8);

impl SlotSet {
    pub const MAX_SLOT: usize = 8;

    pub fn empty() -> Self {
        SlotSet(0)
    }

    pub fn single(slot: usize) -> Self {
        debug_assert!((1..=Self::MAX_SLOT).contains(&slot));
        SlotSet(1 << (slot - 1))
    }

    pub fn from_slots(slots: &[usize]) -> Self {
        slots.iter().fold(SlotSet::empty(), |acc, &s| acc.with(s))
    }

    /// All slots `1..=k`.
    pub fn full(k: usize) -> Self {
        SlotSet(((1u16 << k) - 1) as u8)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Self {
        SlotSet(bits)
    }

    pub fn contains(self, slot: usize) -> bool {
        self.0 & (1 << (slot - 1)) != 0
    }

    pub fn with(self, slot: usize) -> Self {
        SlotSet(self.0 | (1 << (slot - 1)))
    }

    pub fn union(self, other: SlotSet) -> Self {
        SlotSet(self.0 | other.0)
    }

    pub fn minus(self, other: SlotSet) -> Self {
        SlotSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: SlotSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    /// Koszul inner product of the indicator vectors.
    pub fn pairing(self, other: SlotSet) -> u32 {
        (self.0 & other.0).count_ones()
    }

    pub fn slots(self) -> Vec<usize> {
        (1..=Self::MAX_SLOT).filter(|&s| self.contains(s)).collect()
    }

    /// Every subset of `self`, in increasing bitmask order.
    pub fn subsets(self) -> Vec<SlotSet> {
        let mut out = Vec::new();
        let mut sub: u8 = 0;
        loop {
            out.push(SlotSet(sub));
            if sub == self.0 {
                break;
            }
            sub = (sub.wrapping_sub(self.0)) & self.0;
        }
        out.sort();
        out
    }
}

impl fmt::Debug for SlotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.slots())
    }
}

impl fmt::Display for SlotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.slots().iter().map(|s| s.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Generator {
    /// `d_K x^mu`.
    Base { slots: SlotSet, mu: u16 },
    /// `d^v_K u^j_σ`.
    Vertical {
        slots: SlotSet,
        j: u16,
        sigma: MultiIndex,
    },
}

impl Generator {
    pub fn base(slots: SlotSet, mu: usize) -> Self {
        Generator::Base {
            slots,
            mu: mu as u16,
        }
    }

    pub fn vertical(slots: SlotSet, j: usize, sigma: MultiIndex) -> Self {
        Generator::Vertical {
            slots,
            j: j as u16,
            sigma,
        }
    }

    pub fn slots(&self) -> SlotSet {
        match self {
            Generator::Base { slots, .. } | Generator::Vertical { slots, .. } => *slots,
        }
    }

    /// Generators of odd total degree square to zero.
    pub fn is_odd(&self) -> bool {
        self.slots().len() % 2 == 1
    }

    pub fn is_vertical(&self) -> bool {
        matches!(self, Generator::Vertical { .. })
    }

    pub fn with_slots(&self, slots: SlotSet) -> Generator {
        match self {
            Generator::Base { mu, .. } => Generator::Base { slots, mu: *mu },
            Generator::Vertical { j, sigma, .. } => Generator::Vertical {
                slots,
                j: *j,
                sigma: sigma.clone(),
            },
        }
    }

    pub fn to_string_in(&self, ctx: &Context) -> String {
        match self {
            Generator::Base { slots, mu } => {
                format!("d[{slots}]{}", ctx.coord_name(&Coord::Indep(*mu)))
            }
            Generator::Vertical { slots, j, sigma } => {
                format!(
                    "dv[{slots}]{}",
                    ctx.coord_name(&Coord::Jet(*j, sigma.clone()))
                )
            }
        }
    }
}
