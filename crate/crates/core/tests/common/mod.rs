#![allow(dead_code)]

//! Test-only oracles that share no code with the library's solvers.

use tripwalk::{generators, Chain, Partition, StateSet};

/// The seeded corpus used by the property suites: `count` chains with
/// 3..=12 states and varying sparsity.
pub fn corpus(count: u64) -> Vec<(Chain, Partition)> {
    (0..count)
        .map(|seed| {
            let n = 3 + (seed % 10) as usize;
            let sparsity = [0.2, 0.45, 0.7][(seed % 3) as usize];
            let fractions =
                [(0.4, 0.3, 0.3), (0.3, 0.4, 0.3), (0.35, 0.35, 0.3)][(seed / 3 % 3) as usize];
            generators::random_chain(n, 1000 + seed, sparsity, fractions).unwrap()
        })
        .collect()
}

/// Dense `I - P|_D` inverse by Gauss-Jordan with partial pivoting.
pub fn dense_green(chain: &Chain, domain: &StateSet) -> Vec<Vec<f64>> {
    let members = domain.as_slice();
    let m = members.len();
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row: Vec<f64> = (0..m)
                .map(|j| (i == j) as u8 as f64 - chain.prob(members[i], members[j]))
                .collect();
            row.extend((0..m).map(|j| (i == j) as u8 as f64));
            row
        })
        .collect();
    for c in 0..m {
        let p = (c..m)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        a.swap(c, p);
        let d = a[c][c];
        a[c].iter_mut().for_each(|v| *v /= d);
        let pivot = a[c].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != c {
                let f = row[c];
                row.iter_mut().zip(&pivot).for_each(|(v, pv)| *v -= f * pv);
            }
        }
    }
    a.into_iter().map(|r| r[m..].to_vec()).collect()
}

/// Entry `(x, y)` of [`dense_green`] by global state indices.
pub fn dense_entry(g: &[Vec<f64>], domain: &StateSet, x: usize, y: usize) -> f64 {
    let pos = |s| domain.as_slice().iter().position(|&v| v == s);
    match (pos(x), pos(y)) {
        (Some(i), Some(j)) => g[i][j],
        _ => 0.0,
    }
}

/// `sum_{k < steps} (Q^k)(x, y)` together with the geometric tail bound
/// `‖Q‖^steps / (1 - ‖Q‖)` in the row-sum norm (infinite when ‖Q‖ = 1).
pub fn path_sum(chain: &Chain, domain: &StateSet, x: usize, y: usize, steps: usize) -> (f64, f64) {
    let n = chain.len();
    let norm = domain
        .iter()
        .map(|s| chain.prob_into(s, domain))
        .fold(0.0, f64::max);
    let mut dist = vec![0.0; n];
    dist[x] = 1.0;
    let mut total = 0.0;
    for _ in 0..steps {
        total += dist[y];
        let mut next = vec![0.0; n];
        for s in domain.iter() {
            if dist[s] == 0.0 {
                continue;
            }
            for (t, p) in chain.row(s) {
                if domain.contains(t) {
                    next[t] += dist[s] * p;
                }
            }
        }
        dist = next;
    }
    let tail = if norm < 1.0 {
        norm.powi(steps as i32) / (1.0 - norm)
    } else {
        f64::INFINITY
    };
    (total, tail)
}

/// Spectral radius of `P|_D` from Gelfand's formula, `‖Q^k‖_∞^(1/k)`.
/// For a nonnegative `Q` the norm is the largest entry of `Q^k 1`.
pub fn spectral_radius(chain: &Chain, domain: &StateSet, k: usize) -> f64 {
    let n = chain.len();
    let mut r = vec![0.0; n];
    for s in domain.iter() {
        r[s] = 1.0;
    }
    for _ in 0..k {
        let mut next = vec![0.0; n];
        for s in domain.iter() {
            next[s] = chain
                .row(s)
                .filter(|&(t, _)| domain.contains(t))
                .map(|(t, p)| p * r[t])
                .sum();
        }
        r = next;
    }
    r.iter().cloned().fold(0.0, f64::max).powf(1.0 / k as f64)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
