//! Fenwick tree over `0..len` holding small non-negative counts.
//!
//! Doubles as an order-statistic set: with 0/1 counts, [`Fenwick::kth`]
//! finds the k-th smallest present element by binary lifting in
//! O(log len).

#[derive(Clone, Debug)]
pub struct Fenwick {
    // 1-based internal layout; tree[0] unused.
    tree: Vec<i64>,
    top_bit: usize,
}

impl Fenwick {
    /// All counts zero.
    pub fn new(len: usize) -> Self {
        Fenwick {
            tree: vec![0; len + 1],
            top_bit: top_bit(len),
        }
    }

    /// Every element of `0..len` present once; built in O(len).
    pub fn full(len: usize) -> Self {
        let mut tree = vec![0i64; len + 1];
        for (i, slot) in tree.iter_mut().enumerate().skip(1) {
            *slot = (i & i.wrapping_neg()) as i64;
        }
        Fenwick {
            tree,
            top_bit: top_bit(len),
        }
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    pub fn add(&mut self, index: usize, delta: i64) {
        debug_assert!(index < self.len());
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of counts at indices `< end`.
    pub fn prefix(&self, end: usize) -> i64 {
        let mut i = end.min(self.len());
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        acc
    }

    /// Smallest index whose inclusive prefix sum reaches `k` (k ≥ 1).
    /// Returns `None` when the total is below `k`.
    pub fn kth(&self, k: i64) -> Option<usize> {
        if k < 1 {
            return None;
        }
        let mut pos = 0usize;
        let mut remaining = k;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] < remaining {
                pos = next;
                remaining -= self.tree[next];
            }
            step >>= 1;
        }
        (pos < self.len()).then_some(pos)
    }
}

fn top_bit(len: usize) -> usize {
    if len == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - len.leading_zeros())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kth_tracks_removals() {
        let mut f = Fenwick::full(10);
        assert_eq!(f.prefix(f.len()), 10);
        assert_eq!(f.kth(1), Some(0));
        assert_eq!(f.kth(10), Some(9));
        assert_eq!(f.kth(11), None);
        f.add(0, -1);
        f.add(4, -1);
        assert_eq!(f.kth(1), Some(1));
        assert_eq!(f.kth(4), Some(5));
        assert_eq!(f.prefix(5), 3);
    }

    #[test]
    fn full_matches_incremental_build() {
        for len in 0..40 {
            let full = Fenwick::full(len);
            let mut inc = Fenwick::new(len);
            for i in 0..len {
                inc.add(i, 1);
            }
            for end in 0..=len {
                assert_eq!(full.prefix(end), inc.prefix(end));
            }
        }
    }
}
