//! Sparse storage, constraint elimination and a profile Cholesky solver.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicates are summed in insertion order, so equal input gives
    /// bitwise-equal output.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, Vec::new())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[a..b].binary_search(&c) {
            Ok(k) => self.values[a + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `Aᵀ x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        for (r, xr) in x.iter().enumerate().take(self.nrows) {
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m = m.max((v - self.get(c, r)).abs());
            }
        }
        m
    }
}

/// Disjoint sets with path halving; the root is the smallest member.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Result of eliminating linear equality rows over `n` variables: every
/// variable becomes a combination of the `dim` remaining free ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Elimination {
    pub dim: usize,
    pub rank: usize,
    pub raw_rows: usize,
    pub map: Vec<Vec<(usize, f64)>>,
}

/// Rank-revealing Gauss–Jordan elimination with complete pivoting. Rows are
/// scaled to unit max-norm; pivots below `tol` count as dependent.
pub fn eliminate(rows: &[Vec<(usize, f64)>], n: usize, tol: f64) -> Elimination {
    let mut cols: Vec<usize> = rows.iter().flatten().map(|&(c, _)| c).collect();
    cols.sort_unstable();
    cols.dedup();
    let m = rows.len();
    let c = cols.len();
    let mut a = vec![vec![0.0; c]; m];
    for (r, row) in rows.iter().enumerate() {
        for &(v, x) in row {
            let k = cols.binary_search(&v).unwrap();
            a[r][k] += x;
        }
        let s = a[r].iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if s > 0.0 {
            a[r].iter_mut().for_each(|x| *x /= s);
        }
    }
    let mut pivot_col = Vec::new();
    let mut is_pivot = vec![false; c];
    for r in 0..m.min(c) {
        let mut best = (0.0, 0, 0);
        for (i, row) in a.iter().enumerate().skip(r) {
            for (j, x) in row.iter().enumerate() {
                if !is_pivot[j] && x.abs() > best.0 {
                    best = (x.abs(), i, j);
                }
            }
        }
        if best.0 <= tol {
            break;
        }
        let (_, pi, pj) = best;
        a.swap(r, pi);
        let p = a[r][pj];
        a[r].iter_mut().for_each(|x| *x /= p);
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[pj] != 0.0 {
                let f = row[pj];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                row[pj] = 0.0;
            }
        }
        is_pivot[pj] = true;
        pivot_col.push(pj);
    }
    let mut dependent = vec![None; n];
    for (r, &pj) in pivot_col.iter().enumerate() {
        dependent[cols[pj]] = Some(r);
    }
    let mut new_index = vec![usize::MAX; n];
    let mut dim = 0;
    for v in 0..n {
        if dependent[v].is_none() {
            new_index[v] = dim;
            dim += 1;
        }
    }
    let map = (0..n)
        .map(|v| match dependent[v] {
            None => vec![(new_index[v], 1.0)],
            Some(r) => a[r]
                .iter()
                .enumerate()
                .filter(|&(j, x)| !is_pivot[j] && *x != 0.0)
                .map(|(j, x)| (new_index[cols[j]], -x))
                .collect(),
        })
        .collect();
    Elimination {
        dim,
        rank: pivot_col.len(),
        raw_rows: m,
        map,
    }
}

/// Reverse Cuthill–McKee ordering of the symmetric pattern of `a`;
/// returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows;
    let degree: Vec<usize> = (0..n).map(|r| a.indptr[r + 1] - a.indptr[r]).collect();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&r| (degree[r], r));
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut nbrs = Vec::new();
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            nbrs.clear();
            nbrs.extend(a.row(x).map(|(c, _)| c).filter(|&c| !visited[c]));
            nbrs.sort_by_key(|&c| (degree[c], c));
            for &c in &nbrs {
                visited[c] = true;
                queue.push_back(c);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor in variable-band (skyline) storage.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors a symmetric positive definite matrix after RCM reordering.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Self::with_ordering(a, rcm_ordering(a))
    }

    pub fn with_ordering(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows;
        if a.ncols != n {
            return Err(Error::ShapeMismatch {
                rows: a.nrows,
                cols: a.ncols,
            });
        }
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (i, f) in first.iter_mut().enumerate() {
            for (c, _) in a.row(perm[i]) {
                *f = (*f).min(iperm[c]);
            }
        }
        let mut offset = vec![0; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; offset[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for (c, v) in a.row(perm[i]) {
                let j = iperm[c];
                if j <= i {
                    data[offset[i] + j - first[i]] += v;
                }
            }
            diag[i] = data[offset[i] + i - first[i]];
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[offset[i] + j - fi];
                let ri = &data[offset[i] + k0 - fi..offset[i] + j - fi];
                let rj = &data[offset[j] + k0 - fj..offset[j] + j - fj];
                for (x, y) in ri.iter().zip(rj) {
                    s -= x * y;
                }
                if j < i {
                    data[offset[i] + j - fi] = s / data[offset[j] + j - fj];
                } else {
                    if !(s > 1e-13 * diag[i].abs()) {
                        return Err(Error::NotPositiveDefinite { row: perm[i], pivot: s });
                    }
                    data[offset[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(SkylineCholesky {
            n,
            perm,
            first,
            offset,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor.
    pub fn profile(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let mut s = y[i];
            for (k, l) in (fi..i).zip(row) {
                s -= l * y[k];
            }
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in (fi..i).zip(row) {
                y[k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
