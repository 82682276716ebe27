//! Row-bitmask membership over the grid `[N]^2`.

use thiserror::Error;

/// Largest supported grid side.
pub const MAX_SIDE: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid side {0} is outside [1, {MAX_SIDE}]")]
    BadSide(usize),
    #[error("point ({x}, {y}) is outside [1, {n}]^2")]
    OutOfRange { x: i64, y: i64, n: usize },
}

/// A subset of `[N]^2` (1-indexed). Row `y` is a bitmask over `x`, with `x`
/// stored at bit `x - 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GridSet {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for GridSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridSet")
            .field("n", &self.n)
            .field("len", &self.len())
            .finish()
    }
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

impl GridSet {
    pub fn new(n: usize) -> Result<Self, GridError> {
        if n == 0 || n > MAX_SIDE {
            return Err(GridError::BadSide(n));
        }
        let words = words_for(n);
        Ok(Self {
            n,
            words,
            bits: vec![0; n * words],
        })
    }

    /// Assembles a set from `n` rows of `words_for(n)` words each.
    pub(crate) fn from_row_words(n: usize, bits: Vec<u64>) -> Self {
        let words = words_for(n);
        debug_assert_eq!(bits.len(), n * words);
        Self { n, words, bits }
    }

    pub fn from_points<I>(n: usize, points: I) -> Result<Self, GridError>
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        let mut s = Self::new(n)?;
        for (x, y) in points {
            s.insert(x, y)?;
        }
        Ok(s)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    /// Words per row.
    pub fn row_words(&self) -> usize {
        self.words
    }

    fn check(&self, x: i64, y: i64) -> Result<(usize, usize), GridError> {
        let n = self.n as i64;
        if x < 1 || y < 1 || x > n || y > n {
            return Err(GridError::OutOfRange { x, y, n: self.n });
        }
        Ok((x as usize - 1, y as usize - 1))
    }

    pub fn insert(&mut self, x: i64, y: i64) -> Result<bool, GridError> {
        let (xi, yi) = self.check(x, y)?;
        let w = &mut self.bits[yi * self.words + xi / 64];
        let mask = 1u64 << (xi % 64);
        let fresh = *w & mask == 0;
        *w |= mask;
        Ok(fresh)
    }

    /// Membership; points outside the grid are simply absent.
    pub fn contains(&self, x: i64, y: i64) -> bool {
        match self.check(x, y) {
            Ok((xi, yi)) => self.bits[yi * self.words + xi / 64] >> (xi % 64) & 1 == 1,
            Err(_) => false,
        }
    }

    /// Row `y` (1-indexed).
    #[inline]
    pub fn row(&self, y: usize) -> &[u64] {
        let start = (y - 1) * self.words;
        &self.bits[start..start + self.words]
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Points of row `y` in increasing `x`.
    pub fn row_points(&self, y: usize) -> impl Iterator<Item = i64> + '_ {
        self.row(y).iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some((k * 64 + b + 1) as i64)
            })
        })
    }

    /// All points, ordered by `y` then `x`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (1..=self.n).flat_map(move |y| self.row_points(y).map(move |x| (x, y as i64)))
    }

    /// All points, ordered lexicographically by `(x, y)`.
    pub fn points_xy(&self) -> Vec<(i64, i64)> {
        let mut pts: Vec<_> = self.iter().collect();
        pts.sort_unstable();
        pts
    }

    /// The reflection `(x, y) -> (y, x)`.
    pub fn transpose(&self) -> GridSet {
        let mut t = GridSet::new(self.n).expect("side already validated");
        for (x, y) in self.iter() {
            t.insert(y, x).expect("in range");
        }
        t
    }
}
