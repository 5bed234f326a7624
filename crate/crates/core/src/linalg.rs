//! Sparse symmetric factorization used by the shift-invert eigensolver:
//! reverse Cuthill–McKee ordering and a skyline (profile) LDLᵀ that also
//! reports the inertia of the factored matrix.

use std::collections::VecDeque;

use nalgebra_sparse::CsrMatrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FactorError {
    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),
    #[error("zero or non-finite pivot at row {0}")]
    ZeroPivot(usize),
    #[error("shift length {got} does not match dimension {expected}")]
    ShiftLength { expected: usize, got: usize },
}

/// Reverse Cuthill–McKee ordering of the sparsity graph of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_order(a: &CsrMatrix<f64>) -> Vec<usize> {
    let n = a.nrows();
    let (offsets, cols) = (a.row_offsets(), a.col_indices());
    let neighbors = |i: usize| cols[offsets[i]..offsets[i + 1]].iter().copied().filter(move |&j| j != i);
    let degree: Vec<usize> = (0..n).map(|i| neighbors(i).count()).collect();

    let bfs_levels = |start: usize, visited: &[bool]| -> Vec<usize> {
        // returns the last BFS level (farthest nodes)
        let mut seen = visited.to_vec();
        seen[start] = true;
        let mut level = vec![start];
        loop {
            let mut next = Vec::new();
            for &v in &level {
                for w in neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return level;
            }
            level = next;
        }
    };

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // lowest-degree unvisited node, then walk to a pseudo-peripheral node
        let mut start = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (degree[v], v)).unwrap();
        for _ in 0..2 {
            let far = bfs_levels(start, &visited);
            start = *far.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = neighbors(v).filter(|&w| !visited[w]).collect();
            nb.sort_unstable_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// `P (A − diag(shift)) Pᵀ = L D Lᵀ` stored by rows over the lower profile.
#[derive(Debug, Clone)]
pub struct SkylineLdl {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
    negative: usize,
}

impl SkylineLdl {
    /// Factors `A − diag(shift)` for symmetric `A` under the ordering `perm`
    /// (`perm[new] = old`). Only the lower triangle of `A` is read.
    pub fn factor(a: &CsrMatrix<f64>, shift: &[f64], perm: &[usize]) -> Result<Self, FactorError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(FactorError::NotSquare(n, a.ncols()));
        }
        if shift.len() != n {
            return Err(FactorError::ShiftLength { expected: n, got: shift.len() });
        }
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (offsets, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for &c in &cols[offsets[old]..offsets[old + 1]] {
                first[i] = first[i].min(inv[c]);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for old in 0..n {
            let i = inv[old];
            for k in offsets[old]..offsets[old + 1] {
                let j = inv[cols[k]];
                if j <= i {
                    data[start[i] + j - first[i]] += vals[k];
                }
            }
            data[start[i] + i - first[i]] -= shift[old];
        }

        let mut negative = 0;
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = data.split_at_mut(start[i]);
            let row = &mut rest[..i - fi + 1];
            // row[k - fi] holds w_k = L_ik·D_k while the row is in progress
            for j in fi..i {
                let fj = first[j];
                let rj = &done[start[j]..start[j + 1]];
                let k0 = fi.max(fj);
                let mut s = 0.0;
                for k in k0..j {
                    s += row[k - fi] * rj[k - fj];
                }
                row[j - fi] -= s;
            }
            let mut d = row[i - fi];
            for k in fi..i {
                let dk = done[start[k + 1] - 1];
                let w = row[k - fi];
                d -= w * w / dk;
                row[k - fi] = w / dk;
            }
            if d == 0.0 || !d.is_finite() {
                return Err(FactorError::ZeroPivot(i));
            }
            if d < 0.0 {
                negative += 1;
            }
            row[i - fi] = d;
        }
        Ok(SkylineLdl { perm: perm.to_vec(), first, start, data, negative })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of negative pivots, i.e. eigenvalues of `A − diag(shift)` below zero.
    pub fn negative_pivots(&self) -> usize {
        self.negative
    }

    /// Stored profile entries, a measure of fill.
    pub fn profile_len(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let mut s = x[i];
            for k in fi..i {
                s -= row[k - fi] * x[k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.data[self.start[i + 1] - 1];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let xi = x[i];
            for k in fi..i {
                x[k] -= row[k - fi] * xi;
            }
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

/// Half-bandwidth of `a` under `perm`.
pub fn bandwidth(a: &CsrMatrix<f64>, perm: &[usize]) -> usize {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    a.triplet_iter().map(|(i, j, _)| inv[i].abs_diff(inv[j])).max().unwrap_or(0)
}
