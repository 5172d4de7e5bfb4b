//! Permutations in one-line notation, their cycles, and the two
//! symmetries (inversion and reversal conjugation) that preserve the
//! Mallows measure.
//!
//! Externally every index and value is 1-based, matching the usual
//! one-line notation `π_1 … π_n`. Internally the images are stored
//! 0-based as `u32`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::fenwick::Fenwick;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    image: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Permutation {
            image: (0..n as u32).collect(),
        })
    }

    /// Builds a permutation from 1-based one-line notation.
    pub fn from_one_line(values: &[usize]) -> Result<Self> {
        let n = values.len();
        let image = values
            .iter()
            .map(|&v| {
                if v == 0 || v > n {
                    Err(Error::NotABijection {
                        n,
                        reason: format!("value {v} not in 1..={n}"),
                    })
                } else {
                    Ok((v - 1) as u32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_zero_based(image)
    }

    /// Builds a permutation from 0-based images, validating the bijection.
    pub fn from_zero_based(image: Vec<u32>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut seen = vec![false; n];
        for &v in &image {
            let v = v as usize;
            if v >= n {
                return Err(Error::NotABijection {
                    n,
                    reason: format!("value {} not in 1..={n}", v + 1),
                });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::NotABijection {
                    n,
                    reason: format!("value {} repeated", v + 1),
                });
            }
        }
        Ok(Permutation { image })
    }

    /// Caller guarantees `image` is a bijection of `0..len`; checked in
    /// debug builds.
    pub(crate) fn from_zero_based_unchecked(image: Vec<u32>) -> Self {
        debug_assert!(Self::from_zero_based(image.clone()).is_ok());
        Permutation { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    /// Always false: the empty permutation is rejected by every constructor.
    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// `π_s` for a 1-based index `s`.
    pub fn value(&self, s: usize) -> Result<usize> {
        self.check_index(s)?;
        Ok(self.image[s - 1] as usize + 1)
    }

    pub fn as_zero_based(&self) -> &[u32] {
        &self.image
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.image.iter().map(|&v| v as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    pub(crate) fn check_index(&self, s: usize) -> Result<()> {
        if s == 0 || s > self.len() {
            Err(out_of_range("index", s as i64, format!("1..={}", self.len())))
        } else {
            Ok(())
        }
    }

    /// Number of pairs `s < t` with `π_s > π_t`, in O(n log n).
    pub fn inversions(&self) -> u64 {
        let mut seen = Fenwick::new(self.len());
        let mut count = 0u64;
        for &v in self.image.iter().rev() {
            count += seen.prefix(v as usize) as u64;
            seen.add(v as usize, 1);
        }
        count
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Permutation { image: inv }
    }

    /// `r ∘ π ∘ r` with `r(s) = n + 1 − s`.
    pub fn reverse_conjugate(&self) -> Self {
        let last = self.len() as u32 - 1;
        Permutation {
            image: self.image.iter().rev().map(|&v| last - v).collect(),
        }
    }

    /// `π ∘ r`: the graph reflected across the vertical line `x = (n+1)/2`.
    pub fn reflect_positions(&self) -> Self {
        Permutation {
            image: self.image.iter().rev().copied().collect(),
        }
    }

    /// `(self ∘ other)(s) = self(other(s))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::MismatchedSupport {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Permutation {
            image: other.image.iter().map(|&j| self.image[j as usize]).collect(),
        })
    }

    /// `|π_s − s|`.
    pub fn displacement(&self, s: usize) -> Result<usize> {
        self.check_index(s)?;
        Ok((self.image[s - 1] as usize).abs_diff(s - 1))
    }

    pub fn cycle_decomposition(&self) -> CycleDecomposition {
        CycleDecomposition::of(self)
    }

    /// The graph `{(s, π_s)}` as a planar point set.
    pub fn graph(&self) -> PlanarPoints {
        PlanarPoints {
            points: self
                .image
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as i64 + 1, v as i64 + 1))
                .collect(),
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{self}]")
    }
}

/// Space-separated 1-based one-line notation, e.g. `8 6 3 5 4 1 2 7`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &v) in self.image.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad entry {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_line(&values)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(values: Vec<usize>) -> Result<Self> {
        Self::from_one_line(&values)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.one_line()
    }
}

/// Orbits of a permutation.
///
/// Cycle ids are assigned in order of each cycle's smallest member, and
/// each cycle lists its members in orbit order starting from that
/// smallest member. All entries are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleDecomposition {
    pub cycles: Vec<Vec<usize>>,
    /// `membership[s - 1]` is the id of the cycle containing `s`.
    pub membership: Vec<usize>,
    /// Cycle lengths, non-increasing.
    pub sorted_lengths: Vec<usize>,
}

impl CycleDecomposition {
    fn of(p: &Permutation) -> Self {
        let n = p.len();
        let mut membership = vec![usize::MAX; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if membership[start] != usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut cycle = Vec::new();
            let mut cur = start;
            while membership[cur] == usize::MAX {
                membership[cur] = id;
                cycle.push(cur + 1);
                cur = p.image[cur] as usize;
            }
            cycles.push(cycle);
        }
        let mut sorted_lengths: Vec<usize> = cycles.iter().map(Vec::len).collect();
        sorted_lengths.sort_unstable_by(|a, b| b.cmp(a));
        CycleDecomposition {
            cycles,
            membership,
            sorted_lengths,
        }
    }

    pub fn num_cycles(&self) -> usize {
        self.cycles.len()
    }

    /// The cycle `C_s` containing the 1-based index `s`.
    pub fn cycle_of(&self, s: usize) -> &[usize] {
        &self.cycles[self.membership[s - 1]]
    }
}

/// A finite planar point set with pairwise distinct x and pairwise
/// distinct y coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarPoints {
    points: Vec<(i64, i64)>,
}

impl PlanarPoints {
    pub fn new(points: Vec<(i64, i64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty);
        }
        let mut xs: Vec<i64> = points.iter().map(|p| p.0).collect();
        let mut ys: Vec<i64> = points.iter().map(|p| p.1).collect();
        xs.sort_unstable();
        ys.sort_unstable();
        if xs.windows(2).any(|w| w[0] == w[1]) {
            return Err(crate::error::invalid("points", "two points share an x coordinate"));
        }
        if ys.windows(2).any(|w| w[0] == w[1]) {
            return Err(crate::error::invalid("points", "two points share a y coordinate"));
        }
        Ok(PlanarPoints { points })
    }

    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The permutation `λ` with `λ_i = |{points with y ≤ y_i}|`, points
    /// indexed by increasing x.
    pub fn relative_order(&self) -> Permutation {
        let mut by_x: Vec<(i64, i64)> = self.points.clone();
        by_x.sort_unstable();
        let mut order: Vec<usize> = (0..by_x.len()).collect();
        order.sort_unstable_by_key(|&i| by_x[i].1);
        let mut image = vec![0u32; by_x.len()];
        for (rank, &i) in order.iter().enumerate() {
            image[i] = rank as u32;
        }
        Permutation::from_zero_based_unchecked(image)
    }
}

/// Convenience wrapper for [`PlanarPoints::relative_order`] on raw points.
pub fn relative_order(points: &[(i64, i64)]) -> Result<Permutation> {
    Ok(PlanarPoints::new(points.to_vec())?.relative_order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn example_perm() -> Permutation {
        "8 6 3 5 4 1 2 7".parse().unwrap()
    }

    fn naive_inversions(p: &Permutation) -> u64 {
        let v = p.as_zero_based();
        let mut c = 0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i] > v[j] {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(Permutation::identity(0), Err(Error::Empty));
        assert!(Permutation::from_one_line(&[]).is_err());
        assert!(Permutation::from_one_line(&[1, 1]).is_err());
        assert!(Permutation::from_one_line(&[0, 1]).is_err());
        assert!(Permutation::from_one_line(&[1, 3]).is_err());
        assert!("1 two 3".parse::<Permutation>().is_err());
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(Permutation::identity(4).unwrap().inversions(), 0);
        assert_eq!(Permutation::from_one_line(&[2, 1]).unwrap().inversions(), 1);
        // pair count done by hand: 7+5+2+3+2+0+0 = 19
        let p = example_perm();
        assert_eq!(naive_inversions(&p), 19);
        assert_eq!(p.inversions(), 19);
    }

    #[test]
    fn cycle_examples() {
        let d = example_perm().cycle_decomposition();
        assert_eq!(d.cycles, vec![vec![1, 8, 7, 2, 6], vec![3], vec![4, 5]]);
        assert_eq!(d.sorted_lengths, vec![5, 2, 1]);
        assert_eq!(d.cycle_of(7), &[1, 8, 7, 2, 6]);

        let id = Permutation::identity(3).unwrap().cycle_decomposition();
        assert_eq!(id.cycles, vec![vec![1], vec![2], vec![3]]);

        let c = Permutation::from_one_line(&[2, 3, 1]).unwrap().cycle_decomposition();
        assert_eq!(c.num_cycles(), 1);
        assert_eq!(c.sorted_lengths, vec![3]);
    }

    #[test]
    fn inverse_and_reversal_examples() {
        let p = Permutation::from_one_line(&[2, 3, 1]).unwrap();
        assert_eq!(p.inverse().one_line(), vec![3, 1, 2]);
        assert!(p.compose(&p.inverse()).unwrap().is_identity());
        let id = Permutation::identity(5).unwrap();
        assert_eq!(id.inverse(), id);
        assert_eq!(id.reverse_conjugate(), id);
        let swap = Permutation::from_one_line(&[2, 1]).unwrap();
        assert_eq!(swap.reverse_conjugate(), swap);
        assert_eq!(
            example_perm().reverse_conjugate().cycle_decomposition().sorted_lengths,
            vec![5, 2, 1]
        );
    }

    #[test]
    fn symmetries_exhaustive_up_to_seven() {
        for n in 1..=7usize {
            for perm in (1..=n).permutations(n) {
                let p = Permutation::from_one_line(&perm).unwrap();
                let inv = p.inversions();
                let lengths = p.cycle_decomposition().sorted_lengths;
                for q in [p.inverse(), p.reverse_conjugate()] {
                    assert_eq!(q.inversions(), inv);
                    assert_eq!(q.cycle_decomposition().sorted_lengths, lengths);
                }
                assert_eq!(p.graph().relative_order(), p);
            }
        }
    }

    #[test]
    fn relative_order_examples() {
        assert_eq!(
            relative_order(&[(2, 5), (7, 1), (9, 3)]).unwrap().one_line(),
            vec![3, 1, 2]
        );
        assert!(relative_order(&[(1, 10), (4, 20), (9, 30)]).unwrap().is_identity());
        assert_eq!(relative_order(&[]), Err(Error::Empty));
        assert!(relative_order(&[(1, 2), (1, 3)]).is_err());
        assert!(relative_order(&[(1, 2), (3, 2)]).is_err());
    }

    #[test]
    fn displacement_examples() {
        let id = Permutation::identity(4).unwrap();
        assert!((1..=4).all(|s| id.displacement(s).unwrap() == 0));
        let swap = Permutation::from_one_line(&[2, 1]).unwrap();
        assert_eq!(swap.displacement(1).unwrap(), 1);
        assert!(swap.displacement(3).is_err());
        assert!(swap.displacement(0).is_err());
    }

    #[test]
    fn text_format() {
        let p = example_perm();
        assert_eq!(p.to_string(), "8 6 3 5 4 1 2 7");
        assert_eq!(serde_json::to_string(&p).unwrap(), "[8,6,3,5,4,1,2,7]");
    }

    fn arb_perm(max_n: usize) -> impl Strategy<Value = Permutation> {
        (1..=max_n)
            .prop_flat_map(|n| Just((0..n as u32).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|v| Permutation::from_zero_based(v).unwrap())
    }

    proptest! {
        #[test]
        fn fast_inversions_match_pair_count(p in arb_perm(500)) {
            prop_assert_eq!(p.inversions(), naive_inversions(&p));
        }

        #[test]
        fn cycles_partition_and_are_orbits(p in arb_perm(200)) {
            let d = p.cycle_decomposition();
            prop_assert_eq!(d.sorted_lengths.iter().sum::<usize>(), p.len());
            for cycle in &d.cycles {
                for w in 0..cycle.len() {
                    let next = cycle[(w + 1) % cycle.len()];
                    prop_assert_eq!(p.value(cycle[w]).unwrap(), next);
                }
            }
        }

        #[test]
        fn text_round_trip(p in arb_perm(100)) {
            prop_assert_eq!(p.to_string().parse::<Permutation>().unwrap(), p);
        }
    }
}
