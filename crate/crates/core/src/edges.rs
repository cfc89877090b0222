//! Edge-indexed coordinates.
//!
//! The `n(n-1)/2` unordered vertex pairs `{i, j}`, `0 <= i < j < n`, are laid
//! out row-major: `(0,1), (0,2), ..., (0,n-1), (1,2), ...`. Every module and
//! file format uses this order.

use crate::error::{Error, Result};

/// Number of unordered pairs on `n` vertices.
pub const fn edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `{i, j}` in canonical order. Requires `i != j`, both `< n`.
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(j < n && i != j);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Inverse of [`edge_index`].
pub fn edge_pair(n: usize, index: usize) -> (usize, usize) {
    debug_assert!(index < edge_count(n));
    let mut row_start = 0;
    for i in 0..n {
        let row_len = n - i - 1;
        if index < row_start + row_len {
            return (i, i + 1 + index - row_start);
        }
        row_start += row_len;
    }
    unreachable!("edge index {index} out of range for n = {n}")
}

/// Iterates over all pairs in canonical order.
pub fn edge_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// A point of `[0, inf)^(n choose 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector {
    n: usize,
    values: Vec<f64>,
}

impl EdgeVector {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("need at least 2 vertices, got {n}")));
        }
        let expected = edge_count(n);
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        if let Some((k, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
        {
            return Err(Error::Invariant(format!(
                "coordinate {k} must be a finite nonnegative number, got {v}"
            )));
        }
        Ok(Self { n, values })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_raw(n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), edge_count(n));
        debug_assert!(values.iter().all(|v| *v >= 0.0));
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[edge_index(self.n, i, j)]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_row_major() {
        let pairs: Vec<_> = edge_pairs(4).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            assert_eq!(edge_index(4, i, j), k);
            assert_eq!(edge_index(4, j, i), k);
            assert_eq!(edge_pair(4, k), (i, j));
        }
    }

    #[test]
    fn index_roundtrip_larger_n() {
        let n = 37;
        for k in 0..edge_count(n) {
            let (i, j) = edge_pair(n, k);
            assert_eq!(edge_index(n, i, j), k);
        }
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(matches!(
            EdgeVector::new(3, vec![0.1, 0.2]),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
        assert!(EdgeVector::new(3, vec![0.1, -0.2, 0.3]).is_err());
        assert!(EdgeVector::new(3, vec![0.1, f64::NAN, 0.3]).is_err());
        assert!(EdgeVector::new(1, vec![]).is_err());
        let x = EdgeVector::new(3, vec![0.1, 0.5, 0.9]).unwrap();
        assert_eq!(x.get(1, 2), 0.9);
    }
}
