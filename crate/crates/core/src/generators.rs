//! Chain and partition families: the three-state fixture, birth-death
//! paths, lazy walks on grids with a separating ring, and random chains.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{validate_absorption, Chain, Class, Partition};
use crate::error::{Error, Result};

/// The three-state fixture: `a -> {b, c}`, `b -> {a, c}` with probability
/// one half each, `c` absorbing; `A = {a}`, `B = {b}`, `C = {c}`.
pub fn triad() -> (Chain, Partition) {
    let chain = Chain::from_dense(
        vec!["a".into(), "b".into(), "c".into()],
        &[
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 0.0, 1.0],
        ],
    )
    .expect("fixture is stochastic");
    let partition = Partition::from_classes(&chain, vec![Class::A, Class::B, Class::C])
        .expect("fixture partition is valid");
    (chain, partition)
}

/// What happens to a step off either end of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// The step bounces back to the neighbouring site.
    Reflecting,
    /// The step is replaced by staying put.
    Sticky,
}

/// Nearest-neighbour walk on `0..n` stepping right with probability
/// `p_right`. States of `C` are absorbing.
pub fn path_chain(
    n: usize,
    p_right: f64,
    a: &[usize],
    b: &[usize],
    c: &[usize],
    boundary: Boundary,
) -> Result<(Chain, Partition)> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "a path needs at least two sites".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p_right) {
        return Err(Error::InvalidArgument(format!(
            "p_right = {p_right} is not a probability"
        )));
    }
    let mut classes: Vec<Option<Class>> = vec![None; n];
    for (set, class) in [(a, Class::A), (b, Class::B), (c, Class::C)] {
        for &i in set {
            let slot = classes
                .get_mut(i)
                .ok_or_else(|| Error::InvalidArgument(format!("site {i} outside 0..{n}")))?;
            if let Some(prev) = slot.replace(class) {
                return Err(Error::PartitionClass {
                    state: i.to_string(),
                    found: prev.letter(),
                    expected: "exactly one class per site",
                });
            }
        }
    }
    let classes = classes
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or(Error::PartitionClass {
                state: i.to_string(),
                found: '-',
                expected: "exactly one class per site",
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = (0..n)
        .map(|i| {
            if classes[i] == Class::C {
                return vec![(i, 1.0)];
            }
            let mut row = Vec::with_capacity(3);
            let moves = [
                (i.checked_sub(1), 1.0 - p_right),
                ((i + 1 < n).then_some(i + 1), p_right),
            ];
            for (target, p) in moves {
                match (target, boundary) {
                    (Some(j), _) => row.push((j, p)),
                    (None, Boundary::Sticky) => row.push((i, p)),
                    (None, Boundary::Reflecting) => {
                        let back = if i == 0 { 1 } else { n - 2 };
                        row.push((back, p));
                    }
                }
            }
            row
        })
        .collect();
    let chain = Chain::from_sparse_rows((0..n).map(|i| i.to_string()).collect(), rows)?;
    let partition = Partition::from_classes(&chain, classes)?;
    Ok((chain, partition))
}

/// Grid with a square ring around its centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    /// Probability of staying put.
    pub laziness: f64,
    /// Cells at Chebyshev distance `< inner_radius` from the centre form A.
    pub inner_radius: usize,
    /// Cells at distance in `[inner_radius, outer_radius)` form C.
    pub outer_radius: usize,
}

impl GridSpec {
    pub fn new(width: usize, height: usize, inner_radius: usize, outer_radius: usize) -> Self {
        Self {
            width,
            height,
            laziness: 0.0,
            inner_radius,
            outer_radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.laziness) {
            return Err(Error::Geometry(format!(
                "laziness {} not in [0, 1)",
                self.laziness
            )));
        }
        if self.inner_radius == 0 || self.inner_radius >= self.outer_radius {
            return Err(Error::Geometry(format!(
                "radii must satisfy 1 <= r1 < r2, got r1 = {}, r2 = {}",
                self.inner_radius, self.outer_radius
            )));
        }
        if 2 * self.outer_radius >= self.width.min(self.height) {
            return Err(Error::Geometry(format!(
                "outer radius {} does not fit a {}x{} grid",
                self.outer_radius, self.width, self.height
            )));
        }
        Ok(())
    }

    fn center(&self) -> (usize, usize) {
        ((self.width - 1) / 2, (self.height - 1) / 2)
    }

    fn cell(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    fn distance(&self, col: usize, row: usize) -> usize {
        let (cx, cy) = self.center();
        col.abs_diff(cx).max(row.abs_diff(cy))
    }

    fn neighbours(&self, col: usize, row: usize) -> [Option<(usize, usize)>; 4] {
        [
            col.checked_sub(1).map(|c| (c, row)),
            (col + 1 < self.width).then_some((col + 1, row)),
            row.checked_sub(1).map(|r| (col, r)),
            (row + 1 < self.height).then_some((col, row + 1)),
        ]
    }

    fn ring_classes(&self) -> Vec<Class> {
        let mut classes = Vec::with_capacity(self.width * self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                let d = self.distance(col, row);
                classes.push(if d < self.inner_radius {
                    Class::A
                } else if d < self.outer_radius {
                    Class::C
                } else {
                    Class::B
                });
            }
        }
        classes
    }

    fn build(&self, classes: Vec<Class>) -> Result<(Chain, Partition)> {
        let step = (1.0 - self.laziness) / 4.0;
        let mut rows = Vec::with_capacity(classes.len());
        for row in 0..self.height {
            for col in 0..self.width {
                let here = self.cell(col, row);
                if classes[here] == Class::C {
                    rows.push(vec![(here, 1.0)]);
                    continue;
                }
                let mut entries = vec![(here, self.laziness)];
                for nb in self.neighbours(col, row) {
                    match nb {
                        Some((c, r)) => entries.push((self.cell(c, r), step)),
                        None => entries[0].1 += step,
                    }
                }
                rows.push(entries);
            }
        }
        let labels = (0..self.height)
            .flat_map(|row| (0..self.width).map(move |col| format!("{col}:{row}")))
            .collect();
        let chain = Chain::from_sparse_rows(labels, rows)?;
        let partition = Partition::from_classes(&chain, classes)?;
        Ok((chain, partition))
    }

    /// Whether some 4-neighbour path leads from A to B avoiding C.
    fn a_meets_b(&self, classes: &[Class]) -> bool {
        let mut seen = vec![false; classes.len()];
        let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
        for row in 0..self.height {
            for col in 0..self.width {
                if classes[self.cell(col, row)] == Class::A {
                    seen[self.cell(col, row)] = true;
                    queue.push_back((col, row));
                }
            }
        }
        while let Some((col, row)) = queue.pop_front() {
            for (c, r) in self.neighbours(col, row).into_iter().flatten() {
                let i = self.cell(c, r);
                match classes[i] {
                    Class::B => return true,
                    Class::A if !seen[i] => {
                        seen[i] = true;
                        queue.push_back((c, r));
                    }
                    _ => {}
                }
            }
        }
        false
    }
}

/// Lazy simple random walk on a grid with reflecting walls. The centre
/// square is A, the ring around it is C (absorbing) and the rest is B.
pub fn grid_annulus(spec: &GridSpec) -> Result<(Chain, Partition)> {
    spec.validate()?;
    let classes = spec.ring_classes();
    if spec.a_meets_b(&classes) {
        return Err(Error::Geometry("ring does not separate A from B".into()));
    }
    spec.build(classes)
}

/// [`grid_annulus`] with `gap` ring cells relabelled B, starting at the
/// inner ring cell directly right of the centre and spreading outwards by
/// Manhattan distance from it.
pub fn punctured_annulus(spec: &GridSpec, gap: usize) -> Result<(Chain, Partition)> {
    spec.validate()?;
    let mut classes = spec.ring_classes();
    let (cx, cy) = spec.center();
    let seed = (cx + spec.inner_radius, cy);
    let mut ring: Vec<(usize, usize, usize)> = (0..spec.height)
        .flat_map(|row| (0..spec.width).map(move |col| (col, row)))
        .filter(|&(col, row)| classes[spec.cell(col, row)] == Class::C)
        .map(|(col, row)| (col.abs_diff(seed.0) + row.abs_diff(seed.1), row, col))
        .collect();
    if gap == 0 || gap >= ring.len() {
        return Err(Error::Geometry(format!(
            "gap must be in 1..{}, got {gap}",
            ring.len()
        )));
    }
    ring.sort_unstable();
    for &(_, row, col) in &ring[..gap] {
        classes[spec.cell(col, row)] = Class::B;
    }
    spec.build(classes)
}

pub const RANDOM_CHAIN_RETRIES: usize = 1000;

/// A seeded random chain. Each entry of an A or B row is zero with
/// probability `sparsity`; surviving weights are uniform and normalized.
/// C rows are self-loops. Classes are drawn with the given `(A, B, C)`
/// fractions. Draws are repeated until C is reachable from everywhere.
pub fn random_chain(
    n: usize,
    seed: u64,
    sparsity: f64,
    class_fractions: (f64, f64, f64),
) -> Result<(Chain, Partition)> {
    let (fa, fb, fc) = class_fractions;
    if n < 3 {
        return Err(Error::InvalidArgument("random chains need n >= 3".into()));
    }
    if !(fa > 0.0 && fc > 0.0 && fb >= 0.0) {
        return Err(Error::InvalidArgument(
            "class fractions for A and C must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&sparsity) {
        return Err(Error::InvalidArgument(format!(
            "sparsity {sparsity} not in [0, 1)"
        )));
    }
    let total = fa + fb + fc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    for _ in 0..RANDOM_CHAIN_RETRIES {
        let classes: Vec<Class> = (0..n)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                if u < fa {
                    Class::A
                } else if u < fa + fb {
                    Class::B
                } else {
                    Class::C
                }
            })
            .collect();
        if !classes.contains(&Class::A) || !classes.contains(&Class::C) {
            continue;
        }
        let rows = (0..n)
            .map(|i| {
                if classes[i] == Class::C {
                    return vec![(i, 1.0)];
                }
                let mut row: Vec<(usize, f64)> = Vec::new();
                for j in 0..n {
                    if rng.random::<f64>() >= sparsity {
                        row.push((j, 1.0 - rng.random::<f64>()));
                    }
                }
                if row.is_empty() {
                    row.push((rng.random_range(0..n), 1.0));
                }
                let sum: f64 = row.iter().map(|e| e.1).sum();
                row.iter_mut().for_each(|e| e.1 /= sum);
                row
            })
            .collect();
        let chain = Chain::from_sparse_rows(labels.clone(), rows)?;
        let partition = Partition::from_classes(&chain, classes)?;
        if validate_absorption(&chain, &partition).ok {
            return Ok((chain, partition));
        }
    }
    Err(Error::RetriesExhausted(RANDOM_CHAIN_RETRIES))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::excursion_stats;

    #[test]
    fn reflecting_three_site_path() {
        let (chain, partition) =
            path_chain(3, 0.5, &[0], &[1], &[2], Boundary::Reflecting).unwrap();
        assert_eq!(chain.prob(0, 1), 1.0);
        let s = excursion_stats(&chain, &partition).unwrap();
        assert!((s.psi[&0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn separating_site_blocks_psi() {
        let (chain, partition) =
            path_chain(5, 0.5, &[0, 1], &[3, 4], &[2], Boundary::Reflecting).unwrap();
        let s = excursion_stats(&chain, &partition).unwrap();
        assert!(s.psi.values().all(|&v| v == 0.0));
        assert!(validate_absorption(&chain, &partition).ok);
        let (chain, _) = path_chain(4, 0.3, &[0], &[1], &[2, 3], Boundary::Sticky).unwrap();
        assert!((chain.prob(0, 0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn path_rejects_bad_partitions() {
        let err = path_chain(3, 0.5, &[0], &[0], &[2], Boundary::Reflecting).unwrap_err();
        assert_eq!(err.kind(), "partition-class");
        let err = path_chain(3, 0.5, &[0], &[], &[2], Boundary::Reflecting).unwrap_err();
        assert_eq!(err.kind(), "partition-class");
    }

    #[test]
    fn grid_rejects_bad_specs() {
        assert!(grid_annulus(&GridSpec::new(11, 11, 0, 3)).is_err());
        assert!(grid_annulus(&GridSpec::new(11, 11, 3, 3)).is_err());
        assert!(grid_annulus(&GridSpec::new(11, 11, 2, 6)).is_err());
        let mut spec = GridSpec::new(11, 11, 2, 4);
        spec.laziness = 1.0;
        assert_eq!(grid_annulus(&spec).unwrap_err().kind(), "geometry");
    }

    #[test]
    fn annulus_classes() {
        let (chain, partition) = grid_annulus(&GridSpec::new(11, 11, 2, 4)).unwrap();
        assert_eq!(chain.len(), 121);
        assert_eq!(partition.a().len(), 9);
        assert_eq!(partition.c().len(), 40);
        assert_eq!(partition.b().len(), 72);
        assert!(validate_absorption(&chain, &partition).ok);
    }

    #[test]
    fn puncture_bounds() {
        let spec = GridSpec::new(11, 11, 2, 4);
        assert!(punctured_annulus(&spec, 0).is_err());
        assert!(punctured_annulus(&spec, 40).is_err());
        let (chain, partition) = punctured_annulus(&spec, 1).unwrap();
        // The inner ring cell right of the centre is now in B.
        assert_eq!(partition.class_of(chain.index_of("7:5").unwrap()), Class::B);
    }

    #[test]
    fn random_chain_is_deterministic_and_valid() {
        let (c1, p1) = random_chain(12, 42, 0.5, (0.4, 0.3, 0.3)).unwrap();
        let (c2, p2) = random_chain(12, 42, 0.5, (0.4, 0.3, 0.3)).unwrap();
        assert_eq!(c1.to_dense(), c2.to_dense());
        assert_eq!(p1, p2);
        assert!(validate_absorption(&c1, &p1).ok);
        assert!(random_chain(2, 0, 0.5, (0.4, 0.3, 0.3)).is_err());
        assert!(random_chain(5, 0, 0.5, (0.0, 0.3, 0.3)).is_err());
    }
}
