//! Banded LU for `I - Q`, where `Q` is the kernel restricted to a domain
//! from which every state can leak out.
//!
//! `I - Q` is then a nonsingular M-matrix, so elimination without pivoting
//! is stable and the Schur complements stay M-matrices. Pivots are formed
//! the Grassmann-Taksar-Heyman way: the row sum of each Schur complement is
//! the (updated) leak out of the domain, so the pivot is the leak plus the
//! off-diagonal magnitudes and never involves a subtraction. With a
//! nonnegative right-hand side both triangular sweeps are subtraction-free
//! as well, which gives componentwise relative accuracy.
//!
//! States are reordered with reverse Cuthill-McKee to keep the band narrow;
//! lattice domains end up with bandwidth on the order of their width.

#![allow(clippy::needless_range_loop)]

use std::collections::VecDeque;

use crate::chain::{Chain, StateSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct BandLu {
    n: usize,
    width: usize,
    stride: usize,
    /// position -> local index
    order: Vec<usize>,
    /// local index -> position
    position: Vec<usize>,
    band: Vec<f64>,
}

impl BandLu {
    /// Factors `I - Q` for the domain `members` (global indices, local index
    /// = position in the slice). `local` maps global indices to local ones,
    /// `usize::MAX` marking states outside the domain.
    pub(crate) fn factor(chain: &Chain, members: &[usize], local: &[usize]) -> Result<Self> {
        let n = members.len();
        let mut leak = vec![0.0; n];
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, &g) in members.iter().enumerate() {
            for (h, p) in chain.row(g) {
                let j = local[h];
                if j == usize::MAX {
                    leak[i] += p;
                } else if j != i {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }

        let order = reverse_cuthill_mckee(&adjacency);
        let mut position = vec![0; n];
        for (p, &i) in order.iter().enumerate() {
            position[i] = p;
        }
        let width = adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().map(move |&j| (i, j)))
            .map(|(i, j)| position[i].abs_diff(position[j]))
            .max()
            .unwrap_or(0);
        let stride = 2 * width + 1;

        let mut lu = Self {
            n,
            width,
            stride,
            order,
            position,
            band: vec![0.0; n * stride],
        };
        let mut leak_pos = vec![0.0; n];
        for (i, &g) in members.iter().enumerate() {
            let pi = lu.position[i];
            leak_pos[pi] = leak[i];
            for (h, p) in chain.row(g) {
                let j = local[h];
                if j != usize::MAX && j != i {
                    let idx = lu.index(pi, lu.position[j]);
                    lu.band[idx] -= p;
                }
            }
        }
        lu.eliminate(&mut leak_pos, chain, members)?;
        Ok(lu)
    }

    #[inline]
    fn index(&self, row: usize, col: usize) -> usize {
        row * self.stride + col + self.width - row
    }

    fn eliminate(&mut self, leak: &mut [f64], chain: &Chain, members: &[usize]) -> Result<()> {
        let (n, w) = (self.n, self.width);
        for k in 0..n {
            let hi = (k + w).min(n.saturating_sub(1));
            let mut pivot = leak[k];
            for j in k + 1..=hi {
                pivot -= self.band[self.index(k, j)];
            }
            if !(pivot > 0.0 && pivot.is_finite()) {
                let state = chain.label(members[self.order[k]]);
                return Err(Error::Solve(format!(
                    "pivot {pivot:e} at state `{state}`: the domain does not leak"
                )));
            }
            let kk = self.index(k, k);
            self.band[kk] = pivot;
            for i in k + 1..=hi {
                let ik = self.index(i, k);
                let a = self.band[ik];
                if a == 0.0 {
                    continue;
                }
                let l = a / pivot;
                self.band[ik] = l;
                for j in k + 1..=hi {
                    if j == i {
                        continue;
                    }
                    let ukj = self.band[self.index(k, j)];
                    if ukj != 0.0 {
                        let ij = self.index(i, j);
                        self.band[ij] -= l * ukj;
                    }
                }
                leak[i] -= l * leak[k];
            }
        }
        Ok(())
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    pub(crate) fn bandwidth(&self) -> usize {
        self.width
    }

    /// Solves `(I - Q) x = rhs`; both vectors use local indexing.
    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, w) = (self.n, self.width);
        let mut y: Vec<f64> = self.order.iter().map(|&i| rhs[i]).collect();
        for i in 0..n {
            let mut acc = y[i];
            for k in i.saturating_sub(w)..i {
                acc -= self.band[self.index(i, k)] * y[k];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..=(i + w).min(n - 1) {
                acc -= self.band[self.index(i, j)] * y[j];
            }
            y[i] = acc / self.band[self.index(i, i)];
        }
        self.unpermute(y)
    }

    /// Solves `(I - Q)^T x = rhs`; both vectors use local indexing.
    pub(crate) fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, w) = (self.n, self.width);
        let mut z: Vec<f64> = self.order.iter().map(|&i| rhs[i]).collect();
        for i in 0..n {
            let mut acc = z[i];
            for k in i.saturating_sub(w)..i {
                acc -= self.band[self.index(k, i)] * z[k];
            }
            z[i] = acc / self.band[self.index(i, i)];
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for k in i + 1..=(i + w).min(n.saturating_sub(1)) {
                acc -= self.band[self.index(k, i)] * z[k];
            }
            z[i] = acc;
        }
        self.unpermute(z)
    }

    fn unpermute(&self, by_position: Vec<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (p, v) in by_position.into_iter().enumerate() {
            out[self.order[p]] = v;
        }
        out
    }
}

/// Reverse Cuthill-McKee ordering of an undirected graph given as sorted
/// adjacency lists. Each component is started from a minimum-degree vertex.
pub(crate) fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut neighbours = Vec::new();
    for &root in &by_degree {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            neighbours.clear();
            neighbours.extend(adjacency[v].iter().copied().filter(|&u| !visited[u]));
            neighbours.sort_by_key(|&u| (degree[u], u));
            for &u in &neighbours {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// A factored domain `D` together with its global/local index maps.
#[derive(Debug, Clone)]
pub struct DomainSolver {
    domain: StateSet,
    local: Vec<usize>,
    lu: BandLu,
}

impl DomainSolver {
    /// Factors `I - P|_D`. Fails with `DivergentDomain` when some state of
    /// `D` cannot leave `D`.
    pub fn new(chain: &Chain, domain: &StateSet) -> Result<Self> {
        assert_eq!(domain.universe_size(), chain.len());
        let escape = chain.states_reaching(&domain.complement());
        if let Some(stuck) = domain.iter().find(|&s| !escape.contains(s)) {
            return Err(Error::DivergentDomain(chain.label(stuck).to_string()));
        }
        let mut local = vec![usize::MAX; chain.len()];
        for (i, s) in domain.iter().enumerate() {
            local[s] = i;
        }
        let lu = BandLu::factor(chain, domain.as_slice(), &local)?;
        Ok(Self {
            domain: domain.clone(),
            local,
            lu,
        })
    }

    pub fn domain(&self) -> &StateSet {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.lu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lu.len() == 0
    }

    pub fn bandwidth(&self) -> usize {
        self.lu.bandwidth()
    }

    /// Position of `state` in the domain's sorted member list.
    pub fn local_index(&self, state: usize) -> Option<usize> {
        match self.local.get(state) {
            Some(&i) if i != usize::MAX => Some(i),
            _ => None,
        }
    }

    /// Solves `(I - P|_D) x = rhs` with both vectors indexed like
    /// `domain().as_slice()`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.len());
        self.lu.solve(rhs)
    }

    pub fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.len());
        self.lu.solve_transpose(rhs)
    }

    /// Right-hand side `x -> sum_{y in set} p_1(x, y) * weight(y)` over the
    /// domain.
    pub fn inflow(&self, chain: &Chain, weight: impl Fn(usize) -> f64) -> Vec<f64> {
        self.domain
            .iter()
            .map(|x| {
                chain
                    .row(x)
                    .filter(|&(y, _)| !self.domain.contains(y))
                    .map(|(y, p)| p * weight(y))
                    .sum()
            })
            .collect()
    }

    /// Column `G_D(., y)` in local indexing.
    pub fn green_column(&self, y: usize) -> Option<Vec<f64>> {
        let j = self.local_index(y)?;
        let mut e = vec![0.0; self.len()];
        e[j] = 1.0;
        Some(self.lu.solve(&e))
    }

    /// Row `G_D(x, .)` in local indexing.
    pub fn green_row(&self, x: usize) -> Option<Vec<f64>> {
        let i = self.local_index(x)?;
        let mut e = vec![0.0; self.len()];
        e[i] = 1.0;
        Some(self.lu.solve_transpose(&e))
    }
}
