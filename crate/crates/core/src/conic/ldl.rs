//! Sparse LDL' factorization of symmetric quasi-definite matrices.
//!
//! The symbolic phase runs a minimum-degree ordering on the explicit
//! elimination graph and records the filled pattern of `L` as a by-product.
//! The numeric phase is a left-looking column factorization into that fixed
//! pattern, so a pattern is analysed once and refactored every iteration.
//! Quasi-definite matrices factor stably under any symmetric ordering, so
//! the ordering ignores pivot signs.

use std::collections::{BTreeSet, HashMap};

/// Fill-reducing permutation and the pattern of the lower factor.
#[derive(Debug, Clone)]
pub struct Symbolic {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// `iperm[old] = new`
    iperm: Vec<usize>,
    /// Column pointers of `L` (new ordering), diagonal stored first.
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    /// For row `j`, the `(col, position)` of every off-diagonal `L[j, col]`.
    row_entries: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
}

impl Symbolic {
    /// Analyses a symmetric pattern given as off-diagonal adjacency pairs
    /// `(i, j)` over `n` nodes (either orientation, duplicates allowed).
    pub fn analyse(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, j) in pairs {
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
        let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
        let mut eliminated = vec![false; n];
        let mut perm = Vec::with_capacity(n);
        let mut patterns: Vec<Vec<usize>> = Vec::with_capacity(n);
        while let Some((_, v)) = queue.pop_first() {
            eliminated[v] = true;
            perm.push(v);
            let nbrs: Vec<usize> = adj[v].iter().copied().filter(|&a| !eliminated[a]).collect();
            for &a in &nbrs {
                queue.remove(&(adj[a].len(), a));
                adj[a].remove(&v);
                for &b in &nbrs {
                    if b != a {
                        adj[a].insert(b);
                    }
                }
                queue.insert((adj[a].len(), a));
            }
            adj[v].clear();
            patterns.push(nbrs);
        }
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowidx = Vec::new();
        let mut index = HashMap::new();
        let mut row_entries: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        colptr.push(0);
        for (j, pat) in patterns.iter().enumerate() {
            index.insert((j, j), rowidx.len());
            rowidx.push(j);
            let mut rows: Vec<usize> = pat.iter().map(|&old| iperm[old]).collect();
            rows.sort_unstable();
            for i in rows {
                debug_assert!(i > j);
                index.insert((i, j), rowidx.len());
                row_entries[i].push((j, rowidx.len()));
                rowidx.push(i);
            }
            colptr.push(rowidx.len());
        }
        Symbolic { n, perm, iperm, colptr, rowidx, row_entries, index }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rowidx.len()
    }

    /// Position in the factor's value array of the entry for original
    /// indices `(a, b)`, symmetric in its arguments.
    pub fn position(&self, a: usize, b: usize) -> usize {
        let (i, j) = (self.iperm[a], self.iperm[b]);
        let key = if i >= j { (i, j) } else { (j, i) };
        self.index[&key]
    }
}

/// Numeric factor `P K P^T = L D L^T` with unit lower `L`.
#[derive(Debug, Clone)]
pub struct Factor {
    /// Diagonal positions hold `D`, the rest `L`.
    vals: Vec<f64>,
    work: Vec<f64>,
    /// Number of pivots replaced because their sign or size was off.
    pub bad_pivots: usize,
}

impl Factor {
    pub fn new(sym: &Symbolic) -> Self {
        Factor { vals: vec![0.0; sym.nnz()], work: vec![0.0; sym.dim()], bad_pivots: 0 }
    }

    /// Matrix values (in factor positions) before factorization; callers
    /// accumulate into this with [`Symbolic::position`].
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }

    /// Factorizes in place the matrix currently stored in the value array.
    /// `signs[old]` is the expected sign of each pivot; a pivot with the
    /// wrong sign or below `eps` in magnitude is replaced by `signs * delta`.
    pub fn factorize(&mut self, sym: &Symbolic, signs: &[f64], eps: f64, delta: f64) {
        let n = sym.n;
        self.bad_pivots = 0;
        let w = &mut self.work;
        for j in 0..n {
            let (start, end) = (sym.colptr[j], sym.colptr[j + 1]);
            for p in start..end {
                w[sym.rowidx[p]] = self.vals[p];
            }
            for &(k, pos_jk) in &sym.row_entries[j] {
                let ljk = self.vals[pos_jk];
                if ljk == 0.0 {
                    continue;
                }
                let f = ljk * self.vals[sym.colptr[k]];
                for p in pos_jk..sym.colptr[k + 1] {
                    w[sym.rowidx[p]] -= f * self.vals[p];
                }
            }
            let sign = signs[sym.perm[j]];
            let mut d = w[j];
            if !(sign * d > eps) {
                d = sign * delta;
                self.bad_pivots += 1;
            }
            self.vals[start] = d;
            w[j] = 0.0;
            for p in start + 1..end {
                let i = sym.rowidx[p];
                self.vals[p] = w[i] / d;
                w[i] = 0.0;
            }
        }
    }

    /// Solves `K x = rhs` in place (original ordering).
    pub fn solve(&mut self, sym: &Symbolic, rhs: &mut [f64]) {
        let n = sym.n;
        let w = &mut self.work;
        for new in 0..n {
            w[new] = rhs[sym.perm[new]];
        }
        for j in 0..n {
            let (start, end) = (sym.colptr[j], sym.colptr[j + 1]);
            let wj = w[j];
            for p in start + 1..end {
                w[sym.rowidx[p]] -= self.vals[p] * wj;
            }
        }
        for j in 0..n {
            w[j] /= self.vals[sym.colptr[j]];
        }
        for j in (0..n).rev() {
            let (start, end) = (sym.colptr[j], sym.colptr[j + 1]);
            let mut acc = w[j];
            for p in start + 1..end {
                acc -= self.vals[p] * w[sym.rowidx[p]];
            }
            w[j] = acc;
        }
        for new in 0..n {
            rhs[sym.perm[new]] = w[new];
            w[new] = 0.0;
        }
    }
}


#[cfg(test)]
mod quasi_definite {
    use super::*;

    #[test]
    fn indefinite_saddle_point_system() {
        // [[-2, 0, 1], [0, -1, 1], [1, 1, 0.5]]
        let dense = [[-2.0, 0.0, 1.0], [0.0, -1.0, 1.0], [1.0, 1.0, 0.5]];
        let sym = Symbolic::analyse(3, [(2, 0), (2, 1)]);
        let mut f = Factor::new(&sym);
        for i in 0..3 {
            for j in 0..=i {
                if dense[i][j] != 0.0 {
                    let p = sym.position(i, j);
                    f.values_mut()[p] += dense[i][j];
                }
            }
        }
        f.factorize(&sym, &[-1.0, -1.0, 1.0], 1e-14, 1e-8);
        assert_eq!(f.bad_pivots, 0);
        let x_true = [0.5, -1.0, 2.0];
        let mut rhs: Vec<f64> = (0..3).map(|i| (0..3).map(|j| dense[i][j] * x_true[j]).sum()).collect();
        f.solve(&sym, &mut rhs);
        for i in 0..3 {
            assert!((rhs[i] - x_true[i]).abs() < 1e-12);
        }
    }
}
