// SPDX-License-Identifier: MIT OR Apache-2.0

//! Ordered set of accepted split positions with owner lookup.
//!
//! A 64-ary hierarchy of bit words answers successor and predecessor queries
//! in `O(log_64 T)` word operations.

const NONE: usize = usize::MAX;

pub(crate) struct SplitSet {
    levels: Vec<Vec<u64>>,
    owner: Vec<usize>,
    len: usize,
}

impl SplitSet {
    /// Positions `0..=max_pos`.
    pub(crate) fn new(max_pos: usize) -> Self {
        let mut levels = Vec::new();
        let mut bits = max_pos + 1;
        loop {
            let words = bits.div_ceil(64);
            levels.push(vec![0u64; words]);
            if words == 1 {
                break;
            }
            bits = words;
        }
        Self {
            levels,
            owner: vec![NONE; max_pos + 1],
            len: 0,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn insert(&mut self, pos: usize, node: usize) {
        if self.owner[pos] == NONE {
            self.len += 1;
        }
        self.owner[pos] = node;
        let mut i = pos;
        for level in &mut self.levels {
            level[i / 64] |= 1 << (i % 64);
            i /= 64;
        }
    }

    /// Smallest member `>= pos`, with its owner.
    pub(crate) fn next(&self, pos: usize) -> Option<(usize, usize)> {
        let mut i = pos;
        let mut l = 0;
        loop {
            let level = self.levels.get(l)?;
            let w = i / 64;
            let word = *level.get(w)?;
            let masked = word & (!0u64 << (i % 64));
            if masked != 0 {
                i = w * 64 + masked.trailing_zeros() as usize;
                break;
            }
            i = w + 1;
            l += 1;
        }
        while l > 0 {
            l -= 1;
            i = i * 64 + self.levels[l][i].trailing_zeros() as usize;
        }
        Some((i, self.owner[i]))
    }

    /// Largest member `<= pos`, with its owner.
    pub(crate) fn prev(&self, pos: usize) -> Option<(usize, usize)> {
        let mut i = pos;
        let mut l = 0;
        loop {
            let level = self.levels.get(l)?;
            let w = i / 64;
            let bit = i % 64;
            let mask = if bit == 63 {
                !0u64
            } else {
                (1u64 << (bit + 1)) - 1
            };
            let masked = level[w] & mask;
            if masked != 0 {
                i = w * 64 + 63 - masked.leading_zeros() as usize;
                break;
            }
            if w == 0 {
                return None;
            }
            i = w - 1;
            l += 1;
        }
        while l > 0 {
            l -= 1;
            i = i * 64 + 63 - self.levels[l][i].leading_zeros() as usize;
        }
        Some((i, self.owner[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;
    use std::collections::BTreeMap;

    #[test]
    fn matches_btreemap() {
        let mut rng = seeded_rng(4);
        for max_pos in [0usize, 1, 63, 64, 65, 4095, 4096, 5000, 300_000] {
            let mut set = SplitSet::new(max_pos);
            let mut reference = BTreeMap::new();
            for step in 0..2000 {
                let p = rng.random_range(0..=max_pos);
                if step % 3 == 0 {
                    set.insert(p, step);
                    reference.insert(p, step);
                }
                let q = rng.random_range(0..=max_pos);
                let next = reference.range(q..).next().map(|(&a, &b)| (a, b));
                let prev = reference.range(..=q).next_back().map(|(&a, &b)| (a, b));
                assert_eq!(set.next(q), next, "next({q}) max {max_pos}");
                assert_eq!(set.prev(q), prev, "prev({q}) max {max_pos}");
                assert_eq!(set.len(), reference.len());
            }
        }
    }

    #[test]
    fn boundaries() {
        let mut set = SplitSet::new(200);
        assert_eq!(set.next(0), None);
        assert_eq!(set.prev(200), None);
        set.insert(0, 7);
        set.insert(200, 9);
        assert_eq!(set.next(1), Some((200, 9)));
        assert_eq!(set.prev(199), Some((0, 7)));
        assert_eq!(set.next(200), Some((200, 9)));
        assert_eq!(set.prev(0), Some((0, 7)));
    }
}
