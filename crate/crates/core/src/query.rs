use alloc::vec::Vec;
use core::fmt;

/// A nonempty set of file indices; bit `i` stands for file `i` (0-based).
///
/// Displayed 1-based, e.g. `{1,3}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetQuery(u64);

impl SubsetQuery {
    /// `None` for the empty set.
    pub fn from_bits(bits: u64) -> Option<Self> {
        (bits != 0).then_some(Self(bits))
    }

    pub fn from_files<I: IntoIterator<Item = usize>>(files: I) -> Option<Self> {
        let mut bits = 0u64;
        for f in files {
            if f >= crate::MAX_FILES {
                return None;
            }
            bits |= 1 << f;
        }
        Self::from_bits(bits)
    }

    pub fn singleton(file: usize) -> Self {
        assert!(file < crate::MAX_FILES);
        Self(1 << file)
    }

    /// All files `0..num_files`.
    pub fn full(num_files: usize) -> Self {
        assert!((1..=crate::MAX_FILES).contains(&num_files));
        Self((1u64 << num_files) - 1)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// Hamming weight.
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(self, file: usize) -> bool {
        file < 64 && self.0 >> file & 1 == 1
    }

    /// Largest index + 1.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn fits(self, num_files: usize) -> bool {
        self.span() <= num_files
    }

    /// Files in increasing order.
    pub fn files(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        core::iter::from_fn(move || {
            (rest != 0).then(|| {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                i
            })
        })
    }

    /// Position of `file` within the answer, i.e. how many smaller files the
    /// query also retrieves.
    pub fn rank_of(self, file: usize) -> Option<usize> {
        self.contains(file)
            .then(|| (self.0 & ((1u64 << file) - 1)).count_ones() as usize)
    }

    pub fn shifted(self, offset: usize) -> Option<Self> {
        (self.span() + offset <= crate::MAX_FILES).then(|| Self(self.0 << offset))
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }
}

impl fmt::Debug for SubsetQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SubsetQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.files().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// All `w`-subsets of `0..num_files` in lexicographic order of their sorted
/// index lists: `{1,2}, {1,3}, {2,3}` for `(3, 2)`.
pub fn subsets_of_weight(num_files: usize, w: usize) -> Vec<SubsetQuery> {
    let mut out = Vec::new();
    if w == 0 || w > num_files || num_files > crate::MAX_FILES {
        return out;
    }
    let mut idx: Vec<usize> = (0..w).collect();
    loop {
        out.push(SubsetQuery::from_files(idx.iter().copied()).expect("nonempty"));
        // advance to the next combination
        let mut i = w;
        while i > 0 && idx[i - 1] == num_files - w + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..w {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
