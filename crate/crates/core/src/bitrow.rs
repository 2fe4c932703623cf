//! Fixed-length bit vectors used for incidence rows.

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut row = Self::zeros(len);
        for i in indices {
            row.set(i);
        }
        row
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] |= 1 << (i & 63);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    /// True when the two rows share a set bit.
    pub fn intersects(&self, other: &BitRow) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .any(|(a, b)| a & b != 0)
    }

    /// Number of set bits shared with `other`.
    pub fn intersection_count(&self, other: &BitRow) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// New row of length `positions.len()` whose bit `t` is `self[positions[t]]`.
    pub fn gather(&self, positions: &[usize]) -> BitRow {
        let mut out = BitRow::zeros(positions.len());
        for (t, &p) in positions.iter().enumerate() {
            if self.get(p) {
                out.set(t);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut r = BitRow::zeros(130);
        r.set(0);
        r.set(64);
        r.set(129);
        assert_eq!(r.count_ones(), 3);
        assert_eq!(r.iter_ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert!(r.get(129) && !r.get(128));
        let g = r.gather(&[129, 1, 64]);
        assert_eq!(g.iter_ones().collect::<Vec<_>>(), vec![0, 2]);
        let other = BitRow::from_indices(130, [5, 64]);
        assert!(r.intersects(&other));
        assert_eq!(r.intersection_count(&other), 1);
    }
}
