//! Small-set helpers over `u64` vertex masks.
//!
//! Every algorithm in the crate works on graphs with at most [`MAX_VERTICES`]
//! vertices, so a vertex set fits in one machine word.

pub(crate) type Bits = u64;

pub const MAX_VERTICES: usize = 64;

#[inline]
pub(crate) fn bit(i: usize) -> Bits {
    1u64 << i
}

#[inline]
pub(crate) fn has(set: Bits, i: usize) -> bool {
    set & bit(i) != 0
}

/// Iterates the members of `set` in increasing order.
pub(crate) fn members(mut set: Bits) -> impl Iterator<Item = usize> + Clone {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let i = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(i)
        }
    })
}

/// Removes bit `i` and shifts every higher bit down by one.
#[inline]
pub(crate) fn squeeze(set: Bits, i: usize) -> Bits {
    let low = bit(i) - 1;
    (set & low) | ((set >> 1) & !low)
}

/// All subsets of `set`, in increasing numeric order.
pub(crate) fn subsets(set: Bits) -> impl Iterator<Item = Bits> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == set {
            None
        } else {
            Some((cur.wrapping_sub(set)) & set)
        };
        Some(cur)
    })
}

/// Reflexive-transitive closure of a parent relation. `parents[v]` holds the
/// direct parents of `v`; the result holds every ancestor of `v`, `v`
/// included. Cycles are fine.
pub(crate) fn ancestor_closure(parents: &[Bits]) -> Vec<Bits> {
    let n = parents.len();
    let mut anc: Vec<Bits> = (0..n).map(|v| bit(v) | parents[v]).collect();
    loop {
        let mut changed = false;
        for v in 0..n {
            let mut acc = anc[v];
            for p in members(anc[v] & !bit(v)) {
                acc |= anc[p];
            }
            if acc != anc[v] {
                anc[v] = acc;
                changed = true;
            }
        }
        if !changed {
            return anc;
        }
    }
}

/// True iff the relation has no directed cycle.
pub(crate) fn acyclic(parents: &[Bits]) -> bool {
    let n = parents.len();
    let mut remaining: Bits = if n == 64 { !0 } else { bit(n) - 1 };
    loop {
        if remaining == 0 {
            return true;
        }
        let sources = members(remaining)
            .filter(|&v| parents[v] & remaining == 0)
            .fold(0, |acc, v| acc | bit(v));
        if sources == 0 {
            return false;
        }
        remaining &= !sources;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_powerset() {
        let all: Vec<_> = subsets(0b1010).collect();
        assert_eq!(all, vec![0, 0b10, 0b1000, 0b1010]);
        assert_eq!(subsets(0).count(), 1);
    }

    #[test]
    fn squeeze_drops_a_position() {
        assert_eq!(squeeze(0b1011, 1), 0b101);
        assert_eq!(squeeze(0b1011, 0), 0b101);
        assert_eq!(squeeze(0b1000, 2), 0b100);
    }

    #[test]
    fn closure_and_cycles() {
        // 0 -> 1 -> 2
        let parents = vec![0, bit(0), bit(1)];
        let anc = ancestor_closure(&parents);
        assert_eq!(anc[2], 0b111);
        assert!(acyclic(&parents));
        let cyclic = vec![bit(2), bit(0), bit(1)];
        assert!(!acyclic(&cyclic));
        assert_eq!(ancestor_closure(&cyclic)[0], 0b111);
    }
}
