//! Seeded Monte Carlo estimates of the exact quantities, used as an
//! independent oracle for the linear-algebra routes.
//!
//! Path `i` of a run with seed `s` draws from ChaCha8 keyed by
//! `ChaCha8Rng::seed_from_u64(s)` on stream `i` (`set_stream(i)`). Paths are
//! simulated in parallel but reduced in path-index order, so an estimate
//! depends only on `(chain, arguments, seed, n_paths, cap)`.
//!
//! Each step draws one `u ~ U[0, 1)` and takes the first state, in state
//! order, whose cumulative row probability exceeds `u`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::chain::{Chain, Class, Partition, StateSet};
use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 1_000_000;
pub const DEFAULT_PATHS: usize = 100_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;
/// Truncated fraction above which an estimate is unreliable.
pub const TRUNCATION_THRESHOLD: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Maximum number of steps per path.
    pub cap: usize,
    pub confidence_level: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: DEFAULT_PATHS,
            seed: 0,
            cap: DEFAULT_CAP,
            confidence_level: DEFAULT_CONFIDENCE,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidArgument("n_paths must be positive".into()));
        }
        if self.cap == 0 {
            return Err(Error::InvalidArgument("cap must be positive".into()));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "confidence level {} not in (0, 1)",
                self.confidence_level
            )));
        }
        Ok(())
    }
}

/// Two-sided standard normal quantile for a confidence level.
pub fn z_for_confidence(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning {
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationEstimate {
    pub mean: f64,
    pub ci_half_width: f64,
    /// Centre of the interval: the mean for normal intervals, the Wilson
    /// centre for proportions.
    pub ci_center: f64,
    pub n_paths: usize,
    pub n_truncated: usize,
    pub seed: u64,
    pub confidence_level: f64,
    pub warning: Option<TruncationWarning>,
}

impl SimulationEstimate {
    fn new(mean: f64, half: f64, center: f64, truncated: usize, cfg: &SimConfig) -> Self {
        let fraction = truncated as f64 / cfg.n_paths as f64;
        Self {
            mean,
            ci_half_width: half,
            ci_center: center,
            n_paths: cfg.n_paths,
            n_truncated: truncated,
            seed: cfg.seed,
            confidence_level: cfg.confidence_level,
            warning: (fraction > TRUNCATION_THRESHOLD).then_some(TruncationWarning { fraction }),
        }
    }

    /// A value known without sampling noise.
    fn certain(value: f64, cfg: &SimConfig) -> Self {
        Self::new(value, 0.0, value, 0, cfg)
    }

    /// Normal-approximation interval for the mean of per-path samples.
    fn from_samples(samples: &[f64], truncated: usize, cfg: &SimConfig) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let half = if samples.len() > 1 {
            let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            z_for_confidence(cfg.confidence_level) * (var / n).sqrt()
        } else {
            0.0
        };
        Self::new(mean, half, mean, truncated, cfg)
    }

    /// Wilson score interval for `successes` out of `n_paths`.
    fn wilson(successes: usize, truncated: usize, cfg: &SimConfig) -> Self {
        let n = cfg.n_paths as f64;
        let p = successes as f64 / n;
        let z = z_for_confidence(cfg.confidence_level);
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Self::new(p, half, center, truncated, cfg)
    }

    pub fn unreliable(&self) -> bool {
        self.warning.is_some()
    }

    pub fn lower(&self) -> f64 {
        self.ci_center - self.ci_half_width
    }

    pub fn upper(&self) -> f64 {
        self.ci_center + self.ci_half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    HitTarget,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub stop_reason: StopReason,
}

/// The random stream for path `index` of a run seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
fn step(chain: &Chain, state: usize, rng: &mut impl Rng) -> usize {
    let (cols, probs) = chain.row_slices(state);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (&j, &p) in cols.iter().zip(probs) {
        acc += p;
        if u < acc {
            return j;
        }
    }
    // Rounding left the cumulative sum just below one.
    *cols.last().expect("rows are nonempty")
}

/// Walks from `start`, calling `visit` on every state including the first,
/// until it returns `false` or `cap` steps have been taken. Returns the
/// number of steps and whether the walk was cut off by the cap.
fn walk(
    chain: &Chain,
    start: usize,
    rng: &mut impl Rng,
    cap: usize,
    mut visit: impl FnMut(usize) -> bool,
) -> (usize, bool) {
    let mut state = start;
    if !visit(state) {
        return (0, false);
    }
    for k in 1..=cap {
        state = step(chain, state, rng);
        if !visit(state) {
            return (k, false);
        }
    }
    (cap, true)
}

fn check_state(chain: &Chain, x: usize) -> Result<()> {
    if x < chain.len() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "state index {x} out of range"
        )))
    }
}

/// One realized path `S_0 = start, S_1, ...`, stopped on entering `stop`
/// or after `cap` steps. Uses stream 0 of `seed`.
pub fn sample_path(
    chain: &Chain,
    start: usize,
    stop: &StateSet,
    seed: u64,
    cap: usize,
) -> Result<Trajectory> {
    check_state(chain, start)?;
    if cap == 0 {
        return Err(Error::InvalidArgument("cap must be positive".into()));
    }
    let mut rng = path_rng(seed, 0);
    let mut states = Vec::new();
    let (_, truncated) = walk(chain, start, &mut rng, cap, |s| {
        states.push(s);
        !stop.contains(s)
    });
    Ok(Trajectory {
        states,
        stop_reason: if truncated {
            StopReason::Truncated
        } else {
            StopReason::HitTarget
        },
    })
}

/// Runs `per_path` for every path index in parallel and returns the results
/// in index order.
fn run_paths<T: Send>(cfg: &SimConfig, per_path: impl Fn(&mut ChaCha8Rng) -> T + Sync) -> Vec<T> {
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| per_path(&mut path_rng(cfg.seed, i)))
        .collect()
}

/// Mean number of visits to `y` before leaving `domain`, from `x`.
pub fn estimate_green(
    chain: &Chain,
    domain: &StateSet,
    x: usize,
    y: usize,
    cfg: &SimConfig,
) -> Result<SimulationEstimate> {
    cfg.validate()?;
    check_state(chain, x)?;
    check_state(chain, y)?;
    if !domain.contains(x) || !domain.contains(y) {
        return Ok(SimulationEstimate::certain(0.0, cfg));
    }
    let results = run_paths(cfg, |rng| {
        let mut visits = 0u64;
        let (_, truncated) = walk(chain, x, rng, cfg.cap, |s| {
            if !domain.contains(s) {
                return false;
            }
            visits += u64::from(s == y);
            true
        });
        (visits as f64, truncated)
    });
    let truncated = results.iter().filter(|r| r.1).count();
    let samples: Vec<f64> = results.into_iter().map(|r| r.0).collect();
    Ok(SimulationEstimate::from_samples(&samples, truncated, cfg))
}

/// Landing frequencies on `target`, with Wilson intervals per state.
pub fn estimate_hitting_distribution(
    chain: &Chain,
    target: &StateSet,
    x: usize,
    cfg: &SimConfig,
) -> Result<BTreeMap<usize, SimulationEstimate>> {
    cfg.validate()?;
    check_state(chain, x)?;
    if target.is_empty() {
        return Err(Error::InvalidArgument("hitting target is empty".into()));
    }
    if target.contains(x) {
        return Ok(target
            .iter()
            .map(|y| {
                (
                    y,
                    SimulationEstimate::certain(if y == x { 1.0 } else { 0.0 }, cfg),
                )
            })
            .collect());
    }
    let landings = run_paths(cfg, |rng| {
        let mut last = x;
        let (_, truncated) = walk(chain, x, rng, cfg.cap, |s| {
            last = s;
            !target.contains(s)
        });
        (!truncated).then_some(last)
    });
    let truncated = landings.iter().filter(|l| l.is_none()).count();
    let mut counts: BTreeMap<usize, usize> = target.iter().map(|y| (y, 0)).collect();
    for y in landings.into_iter().flatten() {
        *counts.get_mut(&y).unwrap() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(y, k)| (y, SimulationEstimate::wilson(k, truncated, cfg)))
        .collect())
}

/// Mean of `T_target` from `x`. Truncated paths contribute `cap`.
pub fn estimate_hitting_time(
    chain: &Chain,
    target: &StateSet,
    x: usize,
    cfg: &SimConfig,
) -> Result<SimulationEstimate> {
    cfg.validate()?;
    check_state(chain, x)?;
    if target.contains(x) {
        return Ok(SimulationEstimate::certain(0.0, cfg));
    }
    let results = run_paths(cfg, |rng| {
        walk(chain, x, rng, cfg.cap, |s| !target.contains(s))
    });
    let truncated = results.iter().filter(|r| r.1).count();
    let samples: Vec<f64> = results.into_iter().map(|r| r.0 as f64).collect();
    Ok(SimulationEstimate::from_samples(&samples, truncated, cfg))
}

/// Frequencies of the two excursion events from a state of A (or B).
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionEstimate {
    /// `{T_B < T_C}` from A, `{T_A < T_C}` from B.
    pub reach: SimulationEstimate,
    /// Reach the other class, then come back before C.
    pub round_trip: SimulationEstimate,
}

/// Simulates the events behind ψ and ρ (from A) or σ and φ (from B)
/// directly: first entry into the other class, then the next entry into
/// the starting class, both before C.
pub fn estimate_excursion_events(
    chain: &Chain,
    partition: &Partition,
    state: usize,
    cfg: &SimConfig,
) -> Result<ExcursionEstimate> {
    cfg.validate()?;
    check_state(chain, state)?;
    let home = partition.class_of(state);
    let away = match home {
        Class::A => Class::B,
        Class::B => Class::A,
        Class::C => {
            return Err(Error::PartitionClass {
                state: chain.label(state).to_string(),
                found: 'C',
                expected: "A or B",
            })
        }
    };
    let results = run_paths(cfg, |rng| {
        let mut reached = false;
        let mut returned = false;
        let (_, truncated) = walk(chain, state, rng, cfg.cap, |s| {
            let class = partition.class_of(s);
            if class == Class::C {
                return false;
            }
            if !reached {
                reached = class == away;
                true
            } else if class == home {
                returned = true;
                false
            } else {
                true
            }
        });
        (reached, returned, truncated)
    });
    let truncated = results.iter().filter(|r| r.2).count();
    let reached = results.iter().filter(|r| r.0).count();
    let returned = results.iter().filter(|r| r.1).count();
    Ok(ExcursionEstimate {
        reach: SimulationEstimate::wilson(reached, truncated, cfg),
        round_trip: SimulationEstimate::wilson(returned, truncated, cfg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Unreliable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::Unreliable => "unreliable",
        }
    }
}

/// Checks `exact` against the estimate's interval rescaled to `z` standard
/// errors. Estimates with too many truncated paths are `Unreliable`.
pub fn compare(exact: f64, estimate: &SimulationEstimate, z: f64) -> Verdict {
    assert!(z > 0.0, "z must be positive");
    if estimate.unreliable() {
        return Verdict::Unreliable;
    }
    let z_level = z_for_confidence(estimate.confidence_level);
    let width = estimate.ci_half_width * z / z_level;
    let slack = 1e-12 * exact.abs().max(1.0);
    if (exact - estimate.ci_center).abs() <= width + slack {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    }
}
