//! Fixed-width token sets.
//!
//! A `TokenSet` is the unit of node knowledge: a bit vector indexed by token
//! id in `[0, k)`. All set operations require equal widths; bits beyond the
//! width are kept zero so that `Eq` and `Hash` see canonical values.

const BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenSet {
    width: usize,
    blocks: Vec<u64>,
}

impl TokenSet {
    pub fn new(width: usize) -> Self {
        TokenSet {
            width,
            blocks: vec![0; width.div_ceil(BITS)],
        }
    }

    /// The set holding every token in `[0, width)`.
    pub fn full(width: usize) -> Self {
        let mut s = TokenSet::new(width);
        for b in s.blocks.iter_mut() {
            *b = u64::MAX;
        }
        s.clear_tail();
        s
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(width: usize, ids: I) -> Self {
        let mut s = TokenSet::new(width);
        for id in ids {
            s.insert(id);
        }
        s
    }

    fn clear_tail(&mut self) {
        let tail = self.width % BITS;
        if tail != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        if self.width == 0 {
            self.blocks.clear();
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn insert(&mut self, id: usize) -> bool {
        assert!(id < self.width, "token id {id} out of width {}", self.width);
        let mask = 1u64 << (id % BITS);
        let fresh = self.blocks[id / BITS] & mask == 0;
        self.blocks[id / BITS] |= mask;
        fresh
    }

    pub fn contains(&self, id: usize) -> bool {
        assert!(id < self.width, "token id {id} out of width {}", self.width);
        self.blocks[id / BITS] >> (id % BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn missing(&self) -> usize {
        self.width - self.len()
    }

    pub fn union_with(&mut self, other: &TokenSet) {
        assert_eq!(self.width, other.width);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn symmetric_difference(&self, other: &TokenSet) -> TokenSet {
        assert_eq!(self.width, other.width);
        TokenSet {
            width: self.width,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    /// Elements of `self` absent from `other`.
    pub fn difference(&self, other: &TokenSet) -> TokenSet {
        assert_eq!(self.width, other.width);
        TokenSet {
            width: self.width,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &TokenSet) -> bool {
        assert_eq!(self.width, other.width);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(i, &block)| {
            let mut b = block;
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let bit = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(i * BITS + bit)
                }
            })
        })
    }

    /// The index-th smallest member.
    pub fn nth(&self, mut index: usize) -> Option<usize> {
        for (i, &block) in self.blocks.iter().enumerate() {
            let ones = block.count_ones() as usize;
            if index < ones {
                let mut b = block;
                for _ in 0..index {
                    b &= b - 1;
                }
                return Some(i * BITS + b.trailing_zeros() as usize);
            }
            index -= ones;
        }
        None
    }

    pub fn min(&self) -> Option<usize> {
        self.blocks
            .iter()
            .position(|&b| b != 0)
            .map(|i| i * BITS + self.blocks[i].trailing_zeros() as usize)
    }

    pub(crate) fn blocks(&self) -> &[u64] {
        &self.blocks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn basic_ops() {
        let mut s = TokenSet::new(130);
        assert!(s.insert(0));
        assert!(s.insert(129));
        assert!(!s.insert(129));
        assert!(s.contains(0) && s.contains(129) && !s.contains(64));
        assert_eq!(s.len(), 2);
        assert_eq!(s.missing(), 128);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 129]);
        assert_eq!(s.nth(1), Some(129));
        assert_eq!(s.nth(2), None);
        assert_eq!(s.min(), Some(0));
    }

    #[test]
    fn full_set_is_canonical() {
        let f = TokenSet::full(70);
        assert_eq!(f.len(), 70);
        assert_eq!(f, TokenSet::from_ids(70, 0..70));
    }

    proptest! {
        #[test]
        fn set_semantics_match_btreeset(
            a in proptest::collection::btree_set(0usize..150, 0..40),
            b in proptest::collection::btree_set(0usize..150, 0..40),
        ) {
            let k = 150;
            let sa = TokenSet::from_ids(k, a.iter().copied());
            let sb = TokenSet::from_ids(k, b.iter().copied());

            let sym: BTreeSet<usize> = a.symmetric_difference(&b).copied().collect();
            prop_assert_eq!(sa.symmetric_difference(&sb).iter().collect::<BTreeSet<_>>(), sym);

            let diff: BTreeSet<usize> = a.difference(&b).copied().collect();
            prop_assert_eq!(sa.difference(&sb).iter().collect::<BTreeSet<_>>(), diff);

            let mut un = sa.clone();
            un.union_with(&sb);
            let union: BTreeSet<usize> = a.union(&b).copied().collect();
            prop_assert_eq!(un.iter().collect::<BTreeSet<_>>(), union);

            prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
            prop_assert_eq!(sa.len(), a.len());
        }
    }
}
