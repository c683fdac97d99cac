//! Envelope (skyline) LDLᵀ factorization under a reverse Cuthill–McKee ordering.
//!
//! No pivoting is performed, so the factorization is intended for symmetric
//! positive definite and symmetric quasi-definite matrices, both of which admit
//! an LDLᵀ factorization under any symmetric permutation.

use std::collections::VecDeque;

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill–McKee permutation of the symmetrized pattern of `a`.
///
/// `perm[new] = old`. Ties are broken by node index so the result is deterministic.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for nb in adj.iter_mut() {
        nb.sort_unstable();
        nb.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&i| (degree[i], i));

    for &seed in &seeds {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashSet::new();
    seen.insert(start);
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &u in levels.last().unwrap() {
            for &w in &adj[u] {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        next.sort_unstable();
        levels.push(next);
    }
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut node = seed;
    let mut ecc = bfs_levels(node, adj).len();
    for _ in 0..8 {
        let levels = bfs_levels(node, adj);
        let cand = *levels
            .last()
            .unwrap()
            .iter()
            .min_by_key(|&&w| (degree[w], w))
            .unwrap();
        let cand_ecc = bfs_levels(cand, adj).len();
        if cand_ecc > ecc {
            node = cand;
            ecc = cand_ecc;
        } else {
            break;
        }
    }
    node
}

/// LDLᵀ factor stored by rows of the lower envelope in permuted numbering.
#[derive(Debug, Clone)]
pub struct SkylineLdl {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl SkylineLdl {
    /// Factorizes a symmetric matrix. With `require_spd`, a non-positive pivot is an error.
    pub fn factor(a: &SparseMatrix, require_spd: bool) -> Result<Self> {
        a.check_square()?;
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with_permutation(a, perm, require_spd)
    }

    pub fn factor_with_permutation(a: &SparseMatrix, perm: Vec<usize>, require_spd: bool) -> Result<Self> {
        a.check_square()?;
        let n = a.nrows();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
            if c < first[r] {
                first[r] = c;
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i]));
        }
        let mut lower = vec![0.0; offset[n]];
        let mut diag = vec![0.0; n];
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pi == pj {
                diag[pi] += v;
            } else if pi > pj {
                // only the lower triangle is read; symmetry is the caller's contract
                lower[offset[pi] + pj - first[pi]] += v;
            }
        }

        for i in 0..n {
            let fi = first[i];
            let row_i = offset[i];
            // g_ij = a_ij - sum_k g_ik l_jk, stored in place in row i
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = lower[row_i + j - fi];
                if k0 < j {
                    let gi = &lower[row_i + k0 - fi..row_i + j - fi];
                    let lj = &lower[offset[j] + k0 - fj..offset[j] + j - fj];
                    s -= gi.iter().zip(lj).map(|(a, b)| a * b).sum::<f64>();
                }
                lower[row_i + j - fi] = s;
            }
            let mut d = diag[i];
            for j in fi..i {
                let g = lower[row_i + j - fi];
                let l = g / diag[j];
                d -= g * l;
                lower[row_i + j - fi] = l;
            }
            if require_spd && !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: perm[i], value: d });
            }
            if d == 0.0 || !d.is_finite() {
                return Err(Error::SingularPivot { pivot: perm[i] });
            }
            diag[i] = d;
        }
        Ok(Self { n, perm, first, offset, lower, diag })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal envelope entries.
    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    /// Number of negative pivots (the inertia's negative count).
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|&&d| d < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.lower[self.offset[i]..self.offset[i + 1]];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for (yi, d) in y.iter_mut().zip(&self.diag) {
            *yi /= d;
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.lower[self.offset[i]..self.offset[i + 1]];
            for (v, l) in y[fi..i].iter_mut().zip(row) {
                *v -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }
}
