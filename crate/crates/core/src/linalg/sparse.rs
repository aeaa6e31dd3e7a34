use std::collections::VecDeque;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Square complex matrix in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix, summing duplicate entries.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidParams(format!(
                    "entry ({i}, {j}) outside a {n}x{n} matrix"
                )));
            }
            rows[i].push((j, v));
        }
        Ok(Self::from_rows(n, rows))
    }

    fn from_rows(n: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &Mat<C64>) -> Self {
        let n = m.nrows();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| m[(i, j)] != C64::new(0.0, 0.0))
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_rows(n, rows)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect();
        Self::from_rows(n, rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Largest `|a_ij - conj(a_ji)|` over all stored entries.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Row-sum bound on every eigenvalue modulus.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `sum_k c_k M_k` over matrices of a common dimension.
    pub fn lincomb(n: usize, terms: &[(f64, &CsrMatrix)]) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for &(c, m) in terms {
            if c == 0.0 {
                continue;
            }
            for (i, j, v) in m.triplets() {
                rows[i].push((j, v * c));
            }
        }
        Self::from_rows(n, rows)
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_order(m: &CsrMatrix) -> Vec<usize> {
    let n = m.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in m.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = peripheral_node(seed, &adj);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
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

// A few sweeps of the George-Liu heuristic within the component of `seed`.
fn peripheral_node(seed: usize, adj: &[Vec<usize>]) -> usize {
    let mut node = seed;
    let mut ecc = 0;
    for _ in 0..4 {
        let levels = bfs_levels(node, adj);
        let depth = levels.iter().filter_map(|&l| l).max().unwrap_or(0);
        if depth <= ecc && ecc > 0 {
            break;
        }
        ecc = depth;
        let far = levels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == Some(depth))
            .map(|(i, _)| i)
            .min_by_key(|&i| (adj[i].len(), i))
            .unwrap_or(node);
        if far == node {
            break;
        }
        node = far;
    }
    node
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for &w in &adj[v] {
            if level[w].is_none() {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

/// Envelope (profile) Cholesky factor of `shift*I + sign*M` in a fixed ordering.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<C64>,
}

/// Profile of `M` under `perm`: first nonzero column of each permuted row.
pub fn envelope_profile(m: &CsrMatrix, perm: &[usize]) -> Vec<usize> {
    let n = m.dim();
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    (0..n)
        .map(|i| {
            let (cols, _) = m.row(perm[i]);
            cols.iter().map(|&c| inv[c]).filter(|&j| j <= i).min().unwrap_or(i).min(i)
        })
        .collect()
}

impl EnvelopeCholesky {
    /// Factors `shift*I + sign*M`; returns `None` when a pivot is not positive.
    pub fn factor(
        m: &CsrMatrix,
        shift: f64,
        sign: f64,
        perm: &[usize],
        first: &[usize],
    ) -> Option<Self> {
        let n = m.dim();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![C64::new(0.0, 0.0); start[n]];
        for i in 0..n {
            let (cols, vals) = m.row(perm[i]);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= i {
                    data[start[i] + j - first[i]] += v * sign;
                }
            }
            data[start[i] + i - first[i]] += shift;
        }

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = data.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let row_j = &done[start[j]..start[j] + (j - fj + 1)];
                let k0 = fi.max(fj);
                let mut s = row_i[j - fi];
                for k in k0..j {
                    s -= row_i[k - fi] * row_j[k - fj].conj();
                }
                row_i[j - fi] = s / row_j[j - fj].re;
            }
            let mut d = row_i[i - fi].re;
            for k in fi..i {
                d -= row_i[k - fi].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            row_i[i - fi] = C64::new(d.sqrt(), 0.0);
        }
        Some(Self {
            perm: perm.to_vec(),
            first: first.to_vec(),
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Smallest diagonal entry of the factor squared; a cheap definiteness margin.
    pub fn min_pivot(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.data[self.start[i + 1] - 1].re.powi(2))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn solve_into(&self, b: &[C64], x: &mut [C64]) {
        let n = self.dim();
        let mut y: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let mut s = y[i];
            for k in fi..i {
                s -= row[k - fi] * y[k];
            }
            y[i] = s / row[i - fi].re;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let xi = y[i] / row[i - fi].re;
            y[i] = xi;
            for k in fi..i {
                let c = row[k - fi].conj() * xi;
                y[k] -= c;
            }
        }
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, c(2.0)));
            if i + 1 < n {
                t.push((i, i + 1, c(-1.0)));
                t.push((i + 1, i, c(-1.0)));
            }
        }
        CsrMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, &[(0, 1, c(1.0)), (0, 1, c(2.5)), (1, 0, c(3.5))]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), c(3.5));
        assert_eq!(m.asymmetry(), 0.0);
    }

    #[test]
    fn out_of_range_entry_rejected() {
        assert!(CsrMatrix::from_triplets(2, &[(2, 0, c(1.0))]).is_err());
    }

    #[test]
    fn rcm_is_a_permutation_and_keeps_band_narrow() {
        // A path graph labelled in scrambled order.
        let n = 50;
        let label: Vec<usize> = (0..n).map(|i| (i * 17) % n).collect();
        let mut t = Vec::new();
        for i in 0..n {
            t.push((label[i], label[i], c(2.0)));
            if i + 1 < n {
                t.push((label[i], label[i + 1], c(-1.0)));
                t.push((label[i + 1], label[i], c(-1.0)));
            }
        }
        let m = CsrMatrix::from_triplets(n, &t).unwrap();
        let perm = rcm_order(&m);
        let mut seen = perm.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let first = envelope_profile(&m, &perm);
        let bandwidth = first.iter().enumerate().map(|(i, &f)| i - f).max().unwrap();
        assert_eq!(bandwidth, 1);
    }

    #[test]
    fn envelope_cholesky_solves_shifted_system() {
        let m = laplacian_1d(30);
        let perm = rcm_order(&m);
        let first = envelope_profile(&m, &perm);
        // 5I - L is positive definite since the spectrum of L lies in (0, 4).
        let f = EnvelopeCholesky::factor(&m, 5.0, -1.0, &perm, &first).expect("definite");
        let x_true: Vec<C64> = (0..30).map(|i| C64::new(i as f64, 1.0 - i as f64 * 0.1)).collect();
        let mut lx = vec![C64::new(0.0, 0.0); 30];
        m.apply_into(&x_true, &mut lx);
        let b: Vec<C64> = x_true.iter().zip(&lx).map(|(x, l)| x * 5.0 - l).collect();
        let mut x = vec![C64::new(0.0, 0.0); 30];
        f.solve_into(&b, &mut x);
        let err = x.iter().zip(&x_true).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn envelope_cholesky_rejects_indefinite() {
        let m = laplacian_1d(10);
        let perm = rcm_order(&m);
        let first = envelope_profile(&m, &perm);
        // 3I - L has eigenvalues of both signs.
        assert!(EnvelopeCholesky::factor(&m, 3.0, -1.0, &perm, &first).is_none());
    }

    #[test]
    fn hermitian_complex_factorization() {
        let i = C64::new(0.0, 1.0);
        let m = CsrMatrix::from_triplets(
            3,
            &[
                (0, 0, c(4.0)),
                (0, 1, i),
                (1, 0, -i),
                (1, 1, c(3.0)),
                (1, 2, c(1.0) + i),
                (2, 1, c(1.0) - i),
                (2, 2, c(5.0)),
            ],
        )
        .unwrap();
        let perm = vec![0, 1, 2];
        let first = envelope_profile(&m, &perm);
        let f = EnvelopeCholesky::factor(&m, 0.0, 1.0, &perm, &first).unwrap();
        let b = vec![c(1.0), i, c(-2.0)];
        let mut x = vec![c(0.0); 3];
        f.solve_into(&b, &mut x);
        let mut r = vec![c(0.0); 3];
        m.apply_into(&x, &mut r);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-13);
        }
    }
}
