//! Compressed sparse row storage keyed by word ids.

use std::collections::HashMap;

use crate::corpus::WordId;

/// Row-major sparse matrix over a `rows x cols` grid of word ids.
///
/// Column indices within each row are strictly increasing, so lookups are a
/// binary search over the row slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    row_ptr: Vec<usize>,
    cols: Vec<WordId>,
    vals: Vec<T>,
}

impl<T: Copy> Csr<T> {
    /// Builds from `(row, col, value)` entries. Duplicate keys are not allowed.
    pub fn from_entries(rows: usize, mut entries: Vec<(WordId, WordId, T)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &entries {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = entries.iter().map(|e| e.1).collect();
        let vals = entries.iter().map(|e| e.2).collect();
        Csr {
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row_range(&self, row: WordId) -> std::ops::Range<usize> {
        self.row_ptr[row as usize]..self.row_ptr[row as usize + 1]
    }

    pub fn row(&self, row: WordId) -> (&[WordId], &[T]) {
        let r = self.row_range(row);
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn has_row(&self, row: WordId) -> bool {
        (row as usize) < self.rows() && !self.row_range(row).is_empty()
    }

    /// Position of `(row, col)` in the value array.
    pub fn position(&self, row: WordId, col: WordId) -> Option<usize> {
        if row as usize >= self.rows() {
            return None;
        }
        let r = self.row_range(row);
        self.cols[r.clone()]
            .binary_search(&col)
            .ok()
            .map(|i| r.start + i)
    }

    pub fn get(&self, row: WordId, col: WordId) -> Option<T> {
        self.position(row, col).map(|i| self.vals[i])
    }

    pub fn cols(&self) -> &[WordId] {
        &self.cols
    }

    pub fn values(&self) -> &[T] {
        &self.vals
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (WordId, WordId, T)> + '_ {
        (0..self.rows()).flat_map(move |r| {
            self.row_range(r as WordId)
                .map(move |i| (r as WordId, self.cols[i], self.vals[i]))
        })
    }

    /// Same sparsity pattern, new values.
    pub fn with_values<U>(&self, vals: Vec<U>) -> Csr<U> {
        assert_eq!(vals.len(), self.vals.len());
        Csr {
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals,
        }
    }

    /// Column-major view, returned as the CSR of the transpose.
    pub fn transpose(&self, cols: usize) -> Csr<T> {
        let entries = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        Csr::from_entries(cols, entries)
    }
}

impl Csr<u64> {
    pub fn from_counts(rows: usize, counts: &HashMap<(WordId, WordId), u64>) -> Self {
        let entries = counts
            .iter()
            .filter(|(_, &n)| n > 0)
            .map(|(&(a, b), &n)| (a, b, n))
            .collect();
        Csr::from_entries(rows, entries)
    }

    pub fn row_total(&self, row: WordId) -> u64 {
        self.row(row).1.iter().sum()
    }

    /// Maximum-likelihood row normalization.
    pub fn normalized(&self) -> Csr<f64> {
        let mut vals = Vec::with_capacity(self.nnz());
        for r in 0..self.rows() {
            let (_, counts) = self.row(r as WordId);
            let total: u64 = counts.iter().sum();
            vals.extend(counts.iter().map(|&n| n as f64 / total as f64));
        }
        self.with_values(vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_transpose() {
        let m = Csr::from_entries(3, vec![(2, 0, 5u64), (0, 2, 1), (0, 1, 3)]);
        assert_eq!(m.get(0, 1), Some(3));
        assert_eq!(m.get(0, 0), None);
        assert!(!m.has_row(1));
        assert_eq!(m.row_total(0), 4);
        let t = m.transpose(3);
        assert_eq!(t.get(1, 0), Some(3));
        assert_eq!(t.get(0, 2), Some(5));
        let n = m.normalized();
        assert_eq!(n.get(0, 1), Some(0.75));
        assert_eq!(n.get(2, 0), Some(1.0));
    }
}
