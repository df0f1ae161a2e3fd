//! Compressed sparse row storage for the assembled operators.

use std::fmt::Write as _;

use faer::sparse::{SparseColMat, SymbolicSparseColMat};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    /// Column indices, sorted within each row.
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given sorted, duplicate-free row patterns.
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for r in rows {
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let rows = a
            .iter()
            .map(|row| (0..row.len()).filter(|&j| row[j] != 0.0).collect())
            .collect();
        let mut m = Self::from_pattern(rows);
        for i in 0..m.n {
            for p in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.values[p] = a[i][m.col_idx[p]];
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::identity(d.len());
        m.values.copy_from_slice(d);
        m
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|p| self.row_ptr[i] + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    /// Adds to an existing pattern entry; panics if `(i, j)` is not in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self.position(i, j).expect("entry outside sparsity pattern");
        self.values[p] += v;
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn quadratic_form(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut col = vec![0.0; self.n];
        for (j, v) in self.col_idx.iter().zip(&self.values) {
            col[*j] += v.abs();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Keeps rows and columns with `map[i] = Some(new index)`; new indices must be increasing.
    pub fn restrict(&self, map: &[Option<usize>]) -> CsrMatrix {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n {
            if map[i].is_none() {
                continue;
            }
            for (j, v) in self.row(i) {
                if let Some(nj) = map[j] {
                    col_idx.push(nj);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n: row_ptr.len() - 1, row_ptr, col_idx, values }
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        a
    }

    /// The same matrix in faer's column storage. Valid for symmetric patterns, where the
    /// CSR arrays of `A` are the CSC arrays of `A^T`; the values are transposed explicitly.
    pub fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        // column j of A is row j of A^T; build A^T in CSR = A in CSC
        let mut counts = vec![0usize; self.n + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.n {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                row_idx[next[j]] = i;
                vals[next[j]] = self.values[p];
                next[j] += 1;
            }
        }
        let symbolic = SymbolicSparseColMat::new_checked(self.n, self.n, col_ptr, None, row_idx);
        if symbolic.compute_nnz() != vals.len() {
            return Err(Error::InvalidParameter("inconsistent sparse structure".into()));
        }
        Ok(SparseColMat::new(symbolic, vals))
    }

    /// Coordinate text: `row col value` per line, zero-based, 17 significant digits.
    pub fn to_coo_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let _ = writeln!(s, "{i} {j} {v:.16e}");
            }
        }
        s
    }

    pub fn from_coo_text(n: usize, text: &str) -> Result<CsrMatrix> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("bad matrix line '{line}'"));
            let [i, j, v] = toks[..] else { return Err(bad()) };
            let i: usize = i.parse().map_err(|_| bad())?;
            let j: usize = j.parse().map_err(|_| bad())?;
            let v: f64 = v.parse().map_err(|_| bad())?;
            if i >= n || j >= n {
                return Err(bad());
            }
            rows[i].push((j, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (j, v) in r {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix { n, row_ptr, col_idx, values })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix {
        CsrMatrix::from_dense(&[
            vec![4.0, -1.0, 0.0],
            vec![-1.0, 4.0, -2.0],
            vec![0.0, -2.0, 5.0],
        ])
    }

    #[test]
    fn basic_operations() {
        let a = sample();
        assert_eq!(a.nnz(), 7);
        assert_eq!(a.get(1, 2), -2.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.mul(&[1.0, 1.0, 1.0]), vec![3.0, 1.0, 3.0]);
        assert_eq!(a.row_sums(), vec![3.0, 1.0, 3.0]);
        assert_eq!(a.norm1(), 7.0);
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(a.quadratic_form(&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]), 9.0);
    }

    #[test]
    fn restriction_deletes_rows_and_columns() {
        let a = sample();
        let r = a.restrict(&[Some(0), None, Some(1)]);
        assert_eq!(r.to_dense(), vec![vec![4.0, 0.0], vec![0.0, 5.0]]);
    }

    #[test]
    fn coo_round_trip() {
        let a = sample();
        let text = a.to_coo_text();
        assert!(text.lines().next().unwrap().starts_with("0 0 4.0000000000000000e0"));
        assert_eq!(CsrMatrix::from_coo_text(3, &text).unwrap(), a);
        assert!(CsrMatrix::from_coo_text(2, &text).is_err());
    }

    #[test]
    fn faer_conversion_preserves_entries() {
        let a = sample();
        let f = a.to_faer().unwrap();
        let d = f.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[(i, j)], a.get(i, j));
            }
        }
    }
}
