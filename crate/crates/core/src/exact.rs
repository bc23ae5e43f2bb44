//! Exact Green's functions, hitting distributions, hitting times and the
//! excursion probabilities ψ, σ, ρ, φ, all by linear solves on the chain.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::chain::{require_absorption, Chain, Partition, StateSet};
use crate::error::{Error, Result};
use crate::solver::DomainSolver;

/// `G_D(x, y)` for every pair of a domain, dense and row-major in the
/// domain's state order.
#[derive(Debug, Clone, PartialEq)]
pub struct GreensMatrix {
    domain: StateSet,
    local: Vec<Option<usize>>,
    values: Vec<f64>,
}

impl GreensMatrix {
    pub fn domain(&self) -> &StateSet {
        &self.domain
    }

    /// `G_D(x, y)`; zero when either state lies outside the domain.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        match (self.local[x], self.local[y]) {
            (Some(i), Some(j)) => self.values[i * self.domain.len() + j],
            _ => 0.0,
        }
    }

    /// Entries as `((x, y), value)` in row-major domain order.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let members = self.domain.as_slice();
        let m = members.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| ((members[k / m], members[k % m]), v))
    }
}

/// Where the walk started at `start` first lands in `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingDist {
    pub start: usize,
    pub target: StateSet,
    pub mass: BTreeMap<usize, f64>,
    /// Probability of never reaching the target.
    pub defect: f64,
}

impl HittingDist {
    pub fn mass_at(&self, y: usize) -> f64 {
        self.mass.get(&y).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.mass.values().sum()
    }

    /// Total mass landing in `set`.
    pub fn mass_in(&self, set: &StateSet) -> f64 {
        self.mass
            .iter()
            .filter(|(y, _)| set.contains(**y))
            .map(|(_, m)| m)
            .sum()
    }

    fn point_mass(start: usize, target: &StateSet) -> Self {
        Self {
            start,
            target: target.clone(),
            mass: target
                .iter()
                .map(|y| (y, if y == start { 1.0 } else { 0.0 }))
                .collect(),
            defect: 0.0,
        }
    }

    fn from_masses(start: usize, target: &StateSet, masses: Vec<f64>) -> Self {
        let mass: BTreeMap<usize, f64> = target
            .iter()
            .zip(masses)
            .map(|(y, m)| (y, m.clamp(0.0, 1.0)))
            .collect();
        let defect = (1.0 - mass.values().sum::<f64>()).clamp(0.0, 1.0);
        Self {
            start,
            target: target.clone(),
            mass,
            defect,
        }
    }
}

/// `E^x[T_target]` for every state, zero on the target.
#[derive(Debug, Clone, PartialEq)]
pub struct HitTimeVector {
    pub target: StateSet,
    pub values: Vec<f64>,
}

impl HitTimeVector {
    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }
}

/// Excursion probabilities between A and B before C, and the expected
/// exit-time suprema.
///
/// * `psi[a]   = P^a(T_B < T_C)`
/// * `sigma[b] = P^b(T_A < T_C)`
/// * `rho[a]   = P^a(T_B < T_C, then back to A before C)`
/// * `phi[b]   = P^b(T_A < T_C, then back to B before C)`
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionStats {
    pub psi: BTreeMap<usize, f64>,
    pub sigma: BTreeMap<usize, f64>,
    pub rho: BTreeMap<usize, f64>,
    pub phi: BTreeMap<usize, f64>,
    pub psi_sup: f64,
    pub sigma_sup: f64,
    /// `max_a E^a(T_{B∪C})`
    pub f_a: f64,
    /// `max_b E^b(T_{A∪C})`, zero when B is empty.
    pub f_b: f64,
    /// `E^a(T_{B∪C})` for a in A and `E^b(T_{A∪C})` for b in B.
    pub exit_time: BTreeMap<usize, f64>,
}

fn check_state(chain: &Chain, x: usize) -> Result<()> {
    if x >= chain.len() {
        Err(Error::InvalidArgument(format!(
            "state index {x} out of range for {} states",
            chain.len()
        )))
    } else {
        Ok(())
    }
}

/// `G_D(x, y)`, the expected number of visits to `y` before leaving `D`
/// for the walk started at `x`. Zero when `x` or `y` is outside `D`.
pub fn greens_function(chain: &Chain, domain: &StateSet, x: usize, y: usize) -> Result<f64> {
    check_state(chain, x)?;
    check_state(chain, y)?;
    if !domain.contains(x) || !domain.contains(y) {
        return Ok(0.0);
    }
    let solver = DomainSolver::new(chain, domain)?;
    let column = solver.green_column(y).expect("y is in the domain");
    Ok(column[solver.local_index(x).unwrap()])
}

/// The whole fundamental matrix `(I - P|_D)^{-1}` from one factorization.
pub fn greens_matrix(chain: &Chain, domain: &StateSet) -> Result<GreensMatrix> {
    let solver = DomainSolver::new(chain, domain)?;
    Ok(greens_matrix_with(&solver))
}

pub(crate) fn greens_matrix_with(solver: &DomainSolver) -> GreensMatrix {
    let members = solver.domain().as_slice();
    let m = members.len();
    let columns: Vec<Vec<f64>> = members
        .par_iter()
        .map(|&y| solver.green_column(y).unwrap())
        .collect();
    let mut values = vec![0.0; m * m];
    for (j, column) in columns.iter().enumerate() {
        for (i, v) in column.iter().enumerate() {
            values[i * m + j] = *v;
        }
    }
    let mut local = vec![None; solver.domain().universe_size()];
    for (i, &s) in members.iter().enumerate() {
        local[s] = Some(i);
    }
    GreensMatrix {
        domain: solver.domain().clone(),
        local,
        values,
    }
}

/// `H_T(x, .)` by solving the absorbing system on the part of `T^c` the
/// walk can actually visit. Mass that never arrives is reported as `defect`.
pub fn hitting_distribution(chain: &Chain, target: &StateSet, x: usize) -> Result<HittingDist> {
    check_state(chain, x)?;
    if target.is_empty() {
        return Err(Error::InvalidArgument("hitting target is empty".into()));
    }
    if target.contains(x) {
        return Ok(HittingDist::point_mass(x, target));
    }
    let outside = target.complement();
    let reaching = chain.states_reaching(target);
    // States visited before T that can still reach T. Everything else
    // visited before T contributes nothing.
    let domain = chain
        .reachable_within(x, &outside)
        .difference(target)
        .difference(&reaching.complement());
    if !domain.contains(x) {
        return Ok(HittingDist::from_masses(x, target, vec![0.0; target.len()]));
    }
    let solver = DomainSolver::new(chain, &domain)?;
    let ix = solver.local_index(x).unwrap();
    let masses = target
        .iter()
        .map(|y| {
            let rhs: Vec<f64> = domain.iter().map(|z| chain.prob(z, y)).collect();
            if rhs.iter().all(|&v| v == 0.0) {
                0.0
            } else {
                solver.solve(&rhs)[ix]
            }
        })
        .collect();
    Ok(HittingDist::from_masses(x, target, masses))
}

/// `H_T(x, y) = sum_{z in T^c} G_{T^c}(x, z) p_1(z, y)`, computed from the
/// Green's function row of `x`.
pub fn hitting_distribution_last_exit(
    chain: &Chain,
    target: &StateSet,
    x: usize,
) -> Result<HittingDist> {
    check_state(chain, x)?;
    if target.is_empty() {
        return Err(Error::InvalidArgument("hitting target is empty".into()));
    }
    if target.contains(x) {
        return Err(Error::InvalidArgument(format!(
            "start `{}` lies in the target",
            chain.label(x)
        )));
    }
    // G_{T^c}(x, z) vanishes for z the walk cannot visit, so the Green's
    // function of the visited part of T^c gives the same row.
    let domain = chain
        .reachable_within(x, &target.complement())
        .difference(target);
    let solver = DomainSolver::new(chain, &domain)?;
    let row = solver.green_row(x).unwrap();
    let mut mass: BTreeMap<usize, f64> = target.iter().map(|y| (y, 0.0)).collect();
    for (z, g) in domain.iter().zip(&row) {
        for (y, p) in chain.row(z) {
            if let Some(m) = mass.get_mut(&y) {
                *m += g * p;
            }
        }
    }
    let masses = mass.into_values().collect();
    Ok(HittingDist::from_masses(x, target, masses))
}

/// Solves `(I - P|_{T^c}) h = 1` for the expected hitting times of `T`.
pub fn expected_hitting_time(chain: &Chain, target: &StateSet) -> Result<HitTimeVector> {
    if target.is_empty() {
        return Err(Error::InvalidArgument("hitting target is empty".into()));
    }
    let solver = DomainSolver::new(chain, &target.complement())?;
    Ok(expected_hitting_time_with(&solver))
}

pub(crate) fn expected_hitting_time_with(solver: &DomainSolver) -> HitTimeVector {
    let domain = solver.domain();
    let h = solver.solve(&vec![1.0; solver.len()]);
    let mut values = vec![0.0; domain.universe_size()];
    for (s, v) in domain.iter().zip(h) {
        values[s] = v;
    }
    HitTimeVector {
        target: domain.complement(),
        values,
    }
}

/// `P^x(T_y < T_{D^c})` for `x, y` in `D`, from the absorbing system on
/// `D \ {y}`.
pub fn first_passage_prob(chain: &Chain, y: usize, domain: &StateSet, x: usize) -> Result<f64> {
    check_state(chain, x)?;
    check_state(chain, y)?;
    if !domain.contains(x) || !domain.contains(y) {
        return Err(Error::InvalidArgument(
            "first passage needs both states inside the domain".into(),
        ));
    }
    if x == y {
        return Ok(1.0);
    }
    let rest = domain.difference(&StateSet::from_indices(chain.len(), [y]));
    let solver = DomainSolver::new(chain, &rest)?;
    let rhs: Vec<f64> = rest.iter().map(|z| chain.prob(z, y)).collect();
    Ok(solver.solve(&rhs)[solver.local_index(x).unwrap()])
}

/// Computes ψ, σ, ρ, φ and the exit-time suprema.
pub fn excursion_stats(chain: &Chain, partition: &Partition) -> Result<ExcursionStats> {
    require_absorption(chain, partition)?;
    let on_a = DomainSolver::new(chain, partition.a())?;
    let on_b = DomainSolver::new(chain, partition.b())?;
    Ok(excursion_stats_with(chain, partition, &on_a, &on_b))
}

pub(crate) fn excursion_stats_with(
    chain: &Chain,
    partition: &Partition,
    on_a: &DomainSolver,
    on_b: &DomainSolver,
) -> ExcursionStats {
    let (a_set, b_set) = (partition.a(), partition.b());
    let indicator = |set: &StateSet, s: usize| if set.contains(s) { 1.0 } else { 0.0 };

    let psi_vec = on_a.solve(&on_a.inflow(chain, |s| indicator(b_set, s)));
    let sigma_vec = on_b.solve(&on_b.inflow(chain, |s| indicator(a_set, s)));
    let psi: BTreeMap<usize, f64> = a_set.iter().zip(psi_vec).collect();
    let sigma: BTreeMap<usize, f64> = b_set.iter().zip(sigma_vec).collect();

    let rho_vec = on_a.solve(&on_a.inflow(chain, |s| sigma.get(&s).copied().unwrap_or(0.0)));
    let phi_vec = on_b.solve(&on_b.inflow(chain, |s| psi.get(&s).copied().unwrap_or(0.0)));
    let rho: BTreeMap<usize, f64> = a_set.iter().zip(rho_vec).collect();
    let phi: BTreeMap<usize, f64> = b_set.iter().zip(phi_vec).collect();

    let time_a = on_a.solve(&vec![1.0; on_a.len()]);
    let time_b = on_b.solve(&vec![1.0; on_b.len()]);
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let f_a = max(&time_a);
    let f_b = max(&time_b);
    let exit_time = a_set
        .iter()
        .zip(time_a)
        .chain(b_set.iter().zip(time_b))
        .collect();

    ExcursionStats {
        psi_sup: psi.values().copied().fold(0.0, f64::max),
        sigma_sup: sigma.values().copied().fold(0.0, f64::max),
        psi,
        sigma,
        rho,
        phi,
        f_a,
        f_b,
        exit_time,
    }
}
