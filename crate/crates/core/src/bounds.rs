//! Lower/exact/upper evaluation of the excursion bounds for `G_{A∪B}` and
//! `E(T_C)`, the separation defect `H_C - H_{C∪A}`, and the monotonicity of
//! Green's functions and hitting distributions in their sets.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{require_absorption, Chain, Class, Partition, StateSet};
use crate::error::{Error, Result};
use crate::exact::{self, ExcursionStats, HitTimeVector};
use crate::solver::DomainSolver;

/// Slack at or below this counts as tight.
pub const TIGHT_TOL: f64 = 1e-9;
/// Negative slack down to `-NOISE_TOL` is float noise; below it is a violation.
pub const NOISE_TOL: f64 = 1e-9;
/// Denominators at or below this make a bound vacuous.
pub const VACUITY_TOL: f64 = 1e-12;
pub const DEFAULT_REPORT_CAP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    Green,
    HittingTime,
    Separation,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Green => "green",
            Quantity::HittingTime => "hitting_time",
            Quantity::Separation => "separation",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classes of the report's arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassPair {
    AA,
    BB,
    AB,
    BA,
    A,
    B,
    BC,
}

impl ClassPair {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassPair::AA => "AA",
            ClassPair::BB => "BB",
            ClassPair::AB => "AB",
            ClassPair::BA => "BA",
            ClassPair::A => "A",
            ClassPair::B => "B",
            ClassPair::BC => "BC",
        }
    }
}

impl fmt::Display for ClassPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated inequality `lower <= exact <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub quantity: Quantity,
    pub class_pair: ClassPair,
    pub x: usize,
    pub y: Option<usize>,
    pub lower: f64,
    pub exact: f64,
    /// `f64::INFINITY` when vacuous.
    pub upper: f64,
    pub slack_lower: f64,
    pub slack_upper: f64,
    pub vacuous: bool,
    pub tight: bool,
    /// The bound was obtained by exchanging the roles of A and B.
    pub mirrored: bool,
    /// Some slack in `[-NOISE_TOL, 0)` was clamped to zero.
    pub noise: bool,
    /// Some slack fell below `-NOISE_TOL`.
    pub violated: bool,
}

impl BoundReport {
    pub fn new(
        quantity: Quantity,
        class_pair: ClassPair,
        x: usize,
        y: Option<usize>,
        lower: f64,
        exact: f64,
        upper: f64,
    ) -> Self {
        let vacuous = upper.is_infinite();
        let mut noise = false;
        let mut violated = false;
        let mut settle = |slack: f64| {
            if slack >= 0.0 {
                slack
            } else if slack >= -NOISE_TOL {
                noise = true;
                0.0
            } else {
                violated = true;
                slack
            }
        };
        let slack_lower = settle(exact - lower);
        let slack_upper = if vacuous {
            f64::INFINITY
        } else {
            settle(upper - exact)
        };
        if slack_lower.is_nan() || slack_upper.is_nan() {
            violated = true;
        }
        Self {
            quantity,
            class_pair,
            x,
            y,
            lower,
            exact,
            upper,
            slack_lower,
            slack_upper,
            vacuous,
            tight: !vacuous && slack_upper <= TIGHT_TOL,
            mirrored: false,
            noise,
            violated,
        }
    }

    pub fn holds(&self) -> bool {
        !self.violated
    }
}

/// `p(b, c, C, A) = H_C(b, c) - H_{C∪A}(b, c)` against its bound `σ_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub b: usize,
    pub c: usize,
    pub h_c: f64,
    pub h_ca: f64,
    pub defect_p: f64,
    pub bound: f64,
}

impl SeparationReport {
    pub fn holds(&self) -> bool {
        self.defect_p >= -1e-12 && self.defect_p <= self.bound + TIGHT_TOL
    }

    /// The same inequality as a CSV-ready row: `0 <= p <= σ_b`.
    pub fn to_bound_report(&self) -> BoundReport {
        let mut report = BoundReport::new(
            Quantity::Separation,
            ClassPair::BC,
            self.b,
            Some(self.c),
            0.0,
            self.defect_p,
            self.bound,
        );
        // The lower side has its own, tighter noise floor.
        if self.defect_p >= -1e-12 && report.slack_lower < 0.0 {
            report.slack_lower = 0.0;
        }
        report.violated = !self.holds();
        report
    }
}

/// Outcome of a monotonicity check for nested sets `inner ⊆ outer`.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotonicityReport {
    /// `G_inner(x, y) <= G_outer(x, y)`.
    Green {
        inner: f64,
        outer: f64,
        ordered: bool,
    },
    /// `H_inner(x, y) >= H_outer(x, y)`, plus the split of `H_outer(x, .)`
    /// into landing in `inner` (`T_inner = T_outer`) and in `outer \ inner`.
    Hitting {
        inner: f64,
        outer: f64,
        ordered: bool,
        same_time: f64,
        later: f64,
        transience_defect: f64,
    },
}

impl MonotonicityReport {
    pub fn ordered(&self) -> bool {
        match self {
            MonotonicityReport::Green { ordered, .. }
            | MonotonicityReport::Hitting { ordered, .. } => *ordered,
        }
    }
}

const MONOTONE_TOL: f64 = 1e-10;

/// Green's case when `x, y ∈ inner`; hitting case when `y ∈ inner` and
/// `x ∉ outer`.
pub fn monotonicity_check(
    chain: &Chain,
    inner: &StateSet,
    outer: &StateSet,
    x: usize,
    y: usize,
) -> Result<MonotonicityReport> {
    if let Some(s) = inner.iter().find(|&s| !outer.contains(s)) {
        return Err(Error::Subset(chain.label(s).to_string()));
    }
    if inner.contains(x) && inner.contains(y) {
        let g_inner = exact::greens_function(chain, inner, x, y)?;
        let g_outer = exact::greens_function(chain, outer, x, y)?;
        return Ok(MonotonicityReport::Green {
            inner: g_inner,
            outer: g_outer,
            ordered: g_inner <= g_outer + MONOTONE_TOL,
        });
    }
    if inner.contains(y) && !outer.contains(x) {
        let h_inner = exact::hitting_distribution(chain, inner, x)?;
        let h_outer = exact::hitting_distribution(chain, outer, x)?;
        let (hi, ho) = (h_inner.mass_at(y), h_outer.mass_at(y));
        let same_time = h_outer.mass_in(inner);
        let later = h_outer.mass_in(&outer.difference(inner));
        return Ok(MonotonicityReport::Hitting {
            inner: hi,
            outer: ho,
            ordered: hi + MONOTONE_TOL >= ho,
            same_time,
            later,
            transience_defect: (1.0 - same_time - later).max(0.0),
        });
    }
    Err(Error::InvalidArgument(
        "monotonicity needs x, y in the inner set, or y inside and x outside the outer set".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Region {
    A,
    B,
    AB,
}

type Cache = Mutex<HashMap<(Region, usize), Arc<Vec<f64>>>>;

/// Everything the bounds need for one chain and partition: factorizations
/// of `I - P` on A, B and A ∪ B, the excursion statistics and `E(T_C)`.
#[derive(Debug)]
pub struct BoundsContext<'c> {
    chain: &'c Chain,
    partition: &'c Partition,
    on_a: DomainSolver,
    on_b: DomainSolver,
    on_ab: DomainSolver,
    stats: ExcursionStats,
    time_to_c: HitTimeVector,
    columns: Cache,
    rows: Cache,
}

impl<'c> BoundsContext<'c> {
    pub fn new(chain: &'c Chain, partition: &'c Partition) -> Result<Self> {
        require_absorption(chain, partition)?;
        let on_a = DomainSolver::new(chain, partition.a())?;
        let on_b = DomainSolver::new(chain, partition.b())?;
        let on_ab = DomainSolver::new(chain, &partition.transient())?;
        let stats = exact::excursion_stats_with(chain, partition, &on_a, &on_b);
        let time_to_c = exact::expected_hitting_time_with(&on_ab);
        Ok(Self {
            chain,
            partition,
            on_a,
            on_b,
            on_ab,
            stats,
            time_to_c,
            columns: Mutex::default(),
            rows: Mutex::default(),
        })
    }

    pub fn chain(&self) -> &'c Chain {
        self.chain
    }

    pub fn partition(&self) -> &'c Partition {
        self.partition
    }

    pub fn stats(&self) -> &ExcursionStats {
        &self.stats
    }

    pub fn time_to_c(&self) -> &HitTimeVector {
        &self.time_to_c
    }

    fn solver(&self, region: Region) -> &DomainSolver {
        match region {
            Region::A => &self.on_a,
            Region::B => &self.on_b,
            Region::AB => &self.on_ab,
        }
    }

    fn cached(
        &self,
        cache: &Cache,
        region: Region,
        state: usize,
        compute: impl FnOnce(&DomainSolver) -> Option<Vec<f64>>,
    ) -> Option<Arc<Vec<f64>>> {
        if let Some(v) = cache.lock().unwrap().get(&(region, state)) {
            return Some(v.clone());
        }
        let v = Arc::new(compute(self.solver(region))?);
        cache.lock().unwrap().insert((region, state), v.clone());
        Some(v)
    }

    fn green(&self, region: Region, x: usize, y: usize) -> f64 {
        let solver = self.solver(region);
        let Some(ix) = solver.local_index(x) else {
            return 0.0;
        };
        match self.cached(&self.columns, region, y, |s| s.green_column(y)) {
            Some(column) => column[ix],
            None => 0.0,
        }
    }

    fn green_row(&self, region: Region, x: usize) -> Option<Arc<Vec<f64>>> {
        self.cached(&self.rows, region, x, |s| s.green_row(x))
    }

    /// `G_A`, `G_B` or `G_{A∪B}` entry by class letter set: `"A"`, `"B"`, `"AB"`.
    pub fn green_on(&self, classes: &[Class], x: usize, y: usize) -> f64 {
        let region = match classes {
            [Class::A] => Region::A,
            [Class::B] => Region::B,
            [Class::A, Class::B] | [Class::B, Class::A] => Region::AB,
            _ => panic!("green_on expects A, B or A ∪ B"),
        };
        self.green(region, x, y)
    }

    fn prefetch_columns(&self) {
        let jobs: Vec<(Region, usize)> = self
            .partition
            .a()
            .iter()
            .flat_map(|a| [(Region::A, a), (Region::AB, a)])
            .chain(
                self.partition
                    .b()
                    .iter()
                    .flat_map(|b| [(Region::B, b), (Region::AB, b)]),
            )
            .collect();
        let computed: Vec<_> = jobs
            .par_iter()
            .map(|&(r, y)| ((r, y), Arc::new(self.solver(r).green_column(y).unwrap())))
            .collect();
        self.columns.lock().unwrap().extend(computed);
    }

    fn class_of(&self, state: usize) -> Class {
        self.partition.class_of(state)
    }

    fn require(&self, state: usize, allowed: &[Class], expected: &'static str) -> Result<Class> {
        if state >= self.chain.len() {
            return Err(Error::InvalidArgument(format!(
                "state index {state} out of range"
            )));
        }
        let class = self.class_of(state);
        if allowed.contains(&class) {
            Ok(class)
        } else {
            Err(Error::PartitionClass {
                state: self.chain.label(state).to_string(),
                found: class.letter(),
                expected,
            })
        }
    }

    /// `base + num / (1 - den)` or `+inf` when the denominator vanishes.
    fn excursion_upper(base: f64, num: f64, den: f64, scale: f64) -> f64 {
        let gap = 1.0 - den;
        if gap <= VACUITY_TOL {
            f64::INFINITY
        } else {
            base + num / gap * scale
        }
    }

    /// Bounds for `G_{A∪B}(x, y)`.
    ///
    /// * A×A: `G_A(a,a') <= G <= G_A(a,a') + ρ_a/(1-ρ_{a'}) G_A(a',a')`
    /// * B×B: the same with `G_B` and φ.
    /// * A×B: `0 <= G(a,b) <= ψ_a/(1-φ_b) G_B(b,b)`
    /// * B×A: `0 <= G(b,a) <= σ_b/(1-ρ_a) G_A(a,a)`, the A×B bound with the
    ///   roles of A and B exchanged.
    pub fn greens_bounds(&self, x: usize, y: usize) -> Result<BoundReport> {
        let cx = self.require(x, &[Class::A, Class::B], "A or B")?;
        let cy = self.require(y, &[Class::A, Class::B], "A or B")?;
        let s = &self.stats;
        let exact = self.green(Region::AB, x, y);
        let (pair, lower, upper) = match (cx, cy) {
            (Class::A, Class::A) => {
                let g = self.green(Region::A, x, y);
                let upper =
                    Self::excursion_upper(g, s.rho[&x], s.rho[&y], self.green(Region::A, y, y));
                (ClassPair::AA, g, upper)
            }
            (Class::B, Class::B) => {
                let g = self.green(Region::B, x, y);
                let upper =
                    Self::excursion_upper(g, s.phi[&x], s.phi[&y], self.green(Region::B, y, y));
                (ClassPair::BB, g, upper)
            }
            (Class::A, Class::B) => {
                let upper =
                    Self::excursion_upper(0.0, s.psi[&x], s.phi[&y], self.green(Region::B, y, y));
                (ClassPair::AB, 0.0, upper)
            }
            (Class::B, Class::A) => {
                let upper =
                    Self::excursion_upper(0.0, s.sigma[&x], s.rho[&y], self.green(Region::A, y, y));
                (ClassPair::BA, 0.0, upper)
            }
            _ => unreachable!(),
        };
        let mut report = BoundReport::new(Quantity::Green, pair, x, Some(y), lower, exact, upper);
        report.mirrored = pair == ClassPair::BA;
        Ok(report)
    }

    /// Bounds for `E^x(T_C)`:
    /// `E^a(T_{B∪C}) <= E^a(T_C) <= E^a(T_{B∪C}) + ψ_a (f_B + σ f_A)/(1 - ψσ)`
    /// and the mirrored statement for `x ∈ B`.
    pub fn hitting_time_bounds(&self, x: usize) -> Result<BoundReport> {
        let class = self.require(x, &[Class::A, Class::B], "A or B")?;
        let s = &self.stats;
        let lower = s.exit_time[&x];
        let exact = self.time_to_c.get(x);
        let product = s.psi_sup * s.sigma_sup;
        let (pair, weight, excess) = match class {
            Class::A => (ClassPair::A, s.psi[&x], s.f_b + s.sigma_sup * s.f_a),
            _ => (ClassPair::B, s.sigma[&x], s.f_a + s.psi_sup * s.f_b),
        };
        let upper = Self::excursion_upper(lower, weight * excess, product, 1.0);
        Ok(BoundReport::new(
            Quantity::HittingTime,
            pair,
            x,
            None,
            lower,
            exact,
            upper,
        ))
    }

    /// `p(b, c, C, A)` for every `c ∈ C`, sharing one Green's row per set.
    pub fn separation_row(&self, b: usize) -> Result<Vec<SeparationReport>> {
        self.require(b, &[Class::B], "B")?;
        let g_ab = self.green_row(Region::AB, b).unwrap();
        let g_b = self.green_row(Region::B, b).unwrap();
        let c_set = self.partition.c();
        let mut h_c = vec![0.0; self.chain.len()];
        let mut h_ca = vec![0.0; self.chain.len()];
        for (z, g) in self.on_ab.domain().iter().zip(g_ab.iter()) {
            for (y, p) in self.chain.row(z) {
                if c_set.contains(y) {
                    h_c[y] += g * p;
                }
            }
        }
        for (z, g) in self.on_b.domain().iter().zip(g_b.iter()) {
            for (y, p) in self.chain.row(z) {
                if c_set.contains(y) {
                    h_ca[y] += g * p;
                }
            }
        }
        let bound = self.stats.sigma[&b];
        Ok(c_set
            .iter()
            .map(|c| SeparationReport {
                b,
                c,
                h_c: h_c[c],
                h_ca: h_ca[c],
                defect_p: h_c[c] - h_ca[c],
                bound,
            })
            .collect())
    }

    pub fn separation_defect(&self, b: usize, c: usize) -> Result<SeparationReport> {
        self.require(c, &[Class::C], "C")?;
        let row = self.separation_row(b)?;
        Ok(row.into_iter().find(|r| r.c == c).unwrap())
    }

    fn green_pairs(&self) -> Vec<(usize, usize)> {
        let (a, b) = (self.partition.a(), self.partition.b());
        let product = |xs: &StateSet, ys: &StateSet| -> Vec<(usize, usize)> {
            xs.iter()
                .flat_map(|x| ys.iter().map(move |y| (x, y)))
                .collect()
        };
        let mut pairs = product(a, a);
        pairs.extend(product(b, b));
        pairs.extend(product(a, b));
        pairs.extend(product(b, a));
        pairs
    }

    fn assemble(
        &self,
        pairs: &[(usize, usize)],
        hitting: &[usize],
        separation: &[(usize, usize)],
    ) -> Result<FullReport> {
        let mut bounds = pairs
            .par_iter()
            .map(|&(x, y)| self.greens_bounds(x, y))
            .collect::<Result<Vec<_>>>()?;
        for &x in hitting {
            bounds.push(self.hitting_time_bounds(x)?);
        }
        let mut separation_reports = Vec::with_capacity(separation.len());
        let mut i = 0;
        while i < separation.len() {
            let b = separation[i].0;
            let row = self.separation_row(b)?;
            while i < separation.len() && separation[i].0 == b {
                let c = separation[i].1;
                separation_reports.push(row.iter().find(|r| r.c == c).unwrap().clone());
                i += 1;
            }
        }
        Ok(FullReport {
            bounds,
            separation: separation_reports,
        })
    }

    /// Every admissible report, in the order: Green A×A, B×B, A×B, B×A
    /// (lexicographic by state index within each block), hitting times over
    /// A ∪ B, then separation over B × C.
    pub fn full_report(&self, cap: usize) -> Result<FullReport> {
        let transient = self.partition.transient();
        if transient.len() > cap {
            return Err(Error::CapExceeded {
                count: transient.len(),
                cap,
            });
        }
        self.prefetch_columns();
        let separation: Vec<(usize, usize)> = self
            .partition
            .b()
            .iter()
            .flat_map(|b| self.partition.c().iter().map(move |c| (b, c)))
            .collect();
        self.assemble(&self.green_pairs(), transient.as_slice(), &separation)
    }

    /// A seeded sample, without replacement, of up to `count` Green pairs,
    /// `count` hitting-time states and `count` separation pairs, laid out in the
    /// same order as [`full_report`](Self::full_report).
    pub fn sampled_report(&self, count: usize, seed: u64) -> Result<FullReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let transient = self.partition.transient();
        let t = transient.as_slice();
        let block = |x: usize, y: usize| match (self.class_of(x), self.class_of(y)) {
            (Class::A, Class::A) => 0,
            (Class::B, Class::B) => 1,
            (Class::A, Class::B) => 2,
            _ => 3,
        };
        let mut draw = |total: usize| -> Vec<usize> {
            index::sample(&mut rng, total, count.min(total)).into_vec()
        };
        let mut pairs: Vec<(usize, usize)> = draw(t.len() * t.len())
            .into_iter()
            .map(|k| (t[k / t.len()], t[k % t.len()]))
            .collect();
        pairs.sort_by_key(|&(x, y)| (block(x, y), x, y));

        let mut hitting: Vec<usize> = draw(t.len()).into_iter().map(|k| t[k]).collect();
        hitting.sort_unstable();

        let (b, c) = (self.partition.b().as_slice(), self.partition.c().as_slice());
        let mut separation: Vec<(usize, usize)> = draw(b.len() * c.len())
            .into_iter()
            .map(|k| (b[k / c.len()], c[k % c.len()]))
            .collect();
        separation.sort_unstable();
        self.assemble(&pairs, &hitting, &separation)
    }
}

/// Bound reports followed by separation reports.
#[derive(Debug, Clone, PartialEq)]
pub struct FullReport {
    pub bounds: Vec<BoundReport>,
    pub separation: Vec<SeparationReport>,
}

impl FullReport {
    /// All rows as [`BoundReport`]s in report order.
    pub fn rows(&self) -> Vec<BoundReport> {
        self.bounds
            .iter()
            .cloned()
            .chain(
                self.separation
                    .iter()
                    .map(SeparationReport::to_bound_report),
            )
            .collect()
    }

    pub fn violations(&self) -> usize {
        self.bounds.iter().filter(|r| r.violated).count()
            + self.separation.iter().filter(|r| !r.holds()).count()
    }

    pub fn len(&self) -> usize {
        self.bounds.len() + self.separation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn greens_bounds(
    chain: &Chain,
    partition: &Partition,
    x: usize,
    y: usize,
) -> Result<BoundReport> {
    BoundsContext::new(chain, partition)?.greens_bounds(x, y)
}

pub fn hitting_time_bounds(chain: &Chain, partition: &Partition, x: usize) -> Result<BoundReport> {
    BoundsContext::new(chain, partition)?.hitting_time_bounds(x)
}

pub fn separation_defect(
    chain: &Chain,
    partition: &Partition,
    b: usize,
    c: usize,
) -> Result<SeparationReport> {
    BoundsContext::new(chain, partition)?.separation_defect(b, c)
}

pub fn full_report(chain: &Chain, partition: &Partition, cap: usize) -> Result<FullReport> {
    BoundsContext::new(chain, partition)?.full_report(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_chain, build_partition};
    use crate::generators::triad;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn triad_green_bounds() {
        let (chain, partition) = triad();
        let r = greens_bounds(&chain, &partition, 0, 0).unwrap();
        assert!(close(r.lower, 1.0) && close(r.exact, 4.0 / 3.0) && close(r.upper, 4.0 / 3.0));
        assert!(r.tight && !r.vacuous && r.holds());
        let r = greens_bounds(&chain, &partition, 0, 1).unwrap();
        assert_eq!(r.class_pair, ClassPair::AB);
        assert!(close(r.lower, 0.0) && close(r.exact, 2.0 / 3.0) && close(r.upper, 2.0 / 3.0));
        assert!(r.tight);
        let r = greens_bounds(&chain, &partition, 1, 0).unwrap();
        assert!(r.mirrored && r.tight);
        let err = greens_bounds(&chain, &partition, 2, 0).unwrap_err();
        assert_eq!(err.kind(), "partition-class");
    }

    #[test]
    fn triad_hitting_time_bounds() {
        let (chain, partition) = triad();
        for x in [0, 1] {
            let r = hitting_time_bounds(&chain, &partition, x).unwrap();
            assert!(close(r.lower, 1.0) && close(r.exact, 2.0) && close(r.upper, 2.0));
            assert!(r.tight);
        }
    }

    #[test]
    fn triad_separation_is_tight() {
        let (chain, partition) = triad();
        let r = separation_defect(&chain, &partition, 1, 2).unwrap();
        assert!(close(r.h_c, 1.0) && close(r.h_ca, 0.5));
        assert!(close(r.defect_p, 0.5) && close(r.bound, 0.5));
        assert!(r.holds() && r.to_bound_report().tight);
        assert!(separation_defect(&chain, &partition, 0, 2).is_err());
        assert!(separation_defect(&chain, &partition, 1, 0).is_err());
    }

    #[test]
    fn shielded_b_has_no_defect() {
        // a <-> c <-> b: every route from b to a crosses c.
        let chain = build_chain(
            vec!["a", "c", "b"],
            &[
                vec![0.5, 0.5, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.5, 0.5],
            ],
        )
        .unwrap();
        let partition =
            build_partition(&chain, [("a", Class::A), ("b", Class::B), ("c", Class::C)]).unwrap();
        let r = separation_defect(&chain, &partition, 2, 1).unwrap();
        assert_eq!(r.bound, 0.0);
        assert!(r.defect_p.abs() < 1e-15);
    }

    #[test]
    fn triad_full_report_layout() {
        let (chain, partition) = triad();
        let report = full_report(&chain, &partition, DEFAULT_REPORT_CAP).unwrap();
        let rows = report.rows();
        assert_eq!(rows.len(), 7);
        let pairs: Vec<_> = rows.iter().map(|r| r.class_pair).collect();
        use ClassPair::*;
        assert_eq!(pairs, vec![AA, BB, AB, BA, A, B, BC]);
        assert_eq!(report.violations(), 0);
        assert!(matches!(
            full_report(&chain, &partition, 1),
            Err(Error::CapExceeded { count: 2, cap: 1 })
        ));
    }

    #[test]
    fn empty_b_bounds_collapse() {
        let (chain, _) = triad();
        let partition =
            build_partition(&chain, [("a", Class::A), ("b", Class::A), ("c", Class::C)]).unwrap();
        let report = full_report(&chain, &partition, DEFAULT_REPORT_CAP).unwrap();
        assert_eq!(report.bounds.len(), 4 + 2);
        for r in report.rows() {
            assert!(r.tight, "{r:?}");
            assert!((r.lower - r.upper).abs() < 1e-12);
        }
    }

    #[test]
    fn sticky_b_breaks_the_unmirrored_cross_bound() {
        // a -> b surely, b lingers then leaves for c without touching A, so
        // σ_b = 0 while G_{A∪B}(a, b) = 10. The σ-branch bounds G(b, a) = 0
        // instead, and the ψ-branch correctly bounds G(a, b).
        let chain = build_chain(
            vec!["a", "b", "c"],
            &[
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.9, 0.1],
                vec![0.0, 0.0, 1.0],
            ],
        )
        .unwrap();
        let partition =
            build_partition(&chain, [("a", Class::A), ("b", Class::B), ("c", Class::C)]).unwrap();
        let ctx = BoundsContext::new(&chain, &partition).unwrap();
        let s = ctx.stats();
        let sigma_branch = s.sigma[&1] / (1.0 - s.rho[&0]) * ctx.green_on(&[Class::A], 0, 0);
        assert_eq!(sigma_branch, 0.0);
        let ab = ctx.greens_bounds(0, 1).unwrap();
        assert!((ab.exact - 10.0).abs() < 1e-12);
        assert!(ab.exact > sigma_branch);
        assert!(ab.holds() && ab.tight);
        let ba = ctx.greens_bounds(1, 0).unwrap();
        assert!(ba.holds() && ba.exact == 0.0);
    }

    #[test]
    fn vacuous_upper_is_infinite() {
        let r = BoundReport::new(
            Quantity::Green,
            ClassPair::AA,
            0,
            Some(0),
            1.0,
            2.0,
            f64::INFINITY,
        );
        assert!(r.vacuous && !r.tight && r.holds());
        assert_eq!(
            BoundsContext::excursion_upper(1.0, 0.5, 1.0 - 1e-13, 1.0),
            f64::INFINITY
        );
    }

    #[test]
    fn slack_noise_and_violation() {
        let r = BoundReport::new(
            Quantity::Green,
            ClassPair::AA,
            0,
            Some(0),
            1.0,
            2.0,
            2.0 - 1e-10,
        );
        assert!(r.noise && r.holds() && r.slack_upper == 0.0);
        let r = BoundReport::new(Quantity::Green, ClassPair::AA, 0, Some(0), 1.0, 2.0, 1.9);
        assert!(r.violated);
    }

    #[test]
    fn monotonicity_cases() {
        let (chain, _) = triad();
        let a = StateSet::from_indices(3, [0]);
        let ab = StateSet::from_indices(3, [0, 1]);
        let r = monotonicity_check(&chain, &a, &ab, 0, 0).unwrap();
        assert_eq!(
            r,
            MonotonicityReport::Green {
                inner: 1.0,
                outer: 4.0 / 3.0,
                ordered: true
            }
        );
        let r = monotonicity_check(&chain, &ab, &ab, 0, 1).unwrap();
        match r {
            MonotonicityReport::Green { inner, outer, .. } => assert_eq!(inner, outer),
            _ => panic!(),
        }
        // Hitting case: from b, targets {a} ⊆ {a, c}.
        let tgt = StateSet::from_indices(3, [0, 2]);
        let r = monotonicity_check(&chain, &a, &tgt, 1, 0).unwrap();
        match r {
            MonotonicityReport::Hitting {
                inner,
                outer,
                ordered,
                same_time,
                later,
                transience_defect,
            } => {
                assert!(ordered);
                assert!((inner - 0.5).abs() < 1e-14 && (outer - 0.5).abs() < 1e-14);
                assert!((same_time - 0.5).abs() < 1e-14 && (later - 0.5).abs() < 1e-14);
                assert!(transience_defect < 1e-14);
            }
            _ => panic!(),
        }
        assert_eq!(
            monotonicity_check(&chain, &ab, &a, 0, 0)
                .unwrap_err()
                .kind(),
            "subset"
        );
    }
}
