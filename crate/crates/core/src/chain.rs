//! Finite chains, the A/B/C partition and hitting-time semantics.
//!
//! States are addressed by their position in the chain's state list. Labels
//! are only used at the edges (documents, error messages, reports).

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance on row sums.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// A set of states of a fixed chain, kept both as a sorted index list and a
/// membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSet {
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl StateSet {
    pub fn empty(n: usize) -> Self {
        Self {
            members: Vec::new(),
            mask: vec![false; n],
        }
    }

    /// Builds a set over `n` states. Out-of-range indices are ignored by
    /// panicking, since they indicate a programming error.
    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = vec![false; n];
        for i in indices {
            assert!(i < n, "state index {i} out of range for {n} states");
            mask[i] = true;
        }
        Self::from_mask(mask)
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let members = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        Self { members, mask }
    }

    pub fn universe_size(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, state: usize) -> bool {
        self.mask.get(state).copied().unwrap_or(false)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(self.mask.iter().map(|m| !m).collect())
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.mask.len(), other.mask.len());
        Self::from_mask(
            self.mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a || *b)
                .collect(),
        )
    }

    pub fn difference(&self, other: &Self) -> Self {
        assert_eq!(self.mask.len(), other.mask.len());
        Self::from_mask(
            self.mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a && !*b)
                .collect(),
        )
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.iter().all(|&s| other.contains(s))
    }
}

/// A finite random walk: state labels and a row-stochastic one-step kernel
/// stored in compressed sparse rows.
#[derive(Debug, Clone)]
pub struct Chain {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    probs: Vec<f64>,
}

impl Chain {
    /// Builds a chain from a dense matrix. See [`build_chain`].
    pub fn from_dense(labels: Vec<String>, transition: &[Vec<f64>]) -> Result<Self> {
        let n = labels.len();
        if transition.len() != n {
            return Err(Error::Dimension(format!(
                "{} states but {} transition rows",
                n,
                transition.len()
            )));
        }
        let mut rows = Vec::with_capacity(n);
        for (i, row) in transition.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            rows.push(row.iter().copied().enumerate().collect::<Vec<_>>());
        }
        Self::from_sparse_rows(labels, rows)
    }

    /// Builds a chain from per-row `(column, probability)` lists. Zero
    /// entries are dropped and repeated columns are summed.
    pub fn from_sparse_rows(labels: Vec<String>, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Dimension("a chain needs at least one state".into()));
        }
        if rows.len() != n {
            return Err(Error::Dimension(format!(
                "{} states but {} transition rows",
                n,
                rows.len()
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateState(label.clone()));
            }
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut probs = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let start = cols.len();
            for (j, p) in row {
                if j >= n {
                    return Err(Error::Dimension(format!(
                        "row {i} references column {j} of {n}"
                    )));
                }
                if p.is_nan() || p.is_infinite() {
                    return Err(Error::InvalidEntry {
                        from: labels[i].clone(),
                        to: labels[j].clone(),
                        value: p,
                    });
                }
                if p < 0.0 {
                    return Err(Error::NegativeEntry {
                        from: labels[i].clone(),
                        to: labels[j].clone(),
                        value: p,
                    });
                }
                if p > 1.0 {
                    return Err(Error::InvalidEntry {
                        from: labels[i].clone(),
                        to: labels[j].clone(),
                        value: p,
                    });
                }
                if p == 0.0 {
                    continue;
                }
                if cols.len() > start && *cols.last().unwrap() == j {
                    *probs.last_mut().unwrap() += p;
                } else {
                    cols.push(j);
                    probs.push(p);
                }
            }
            let sum: f64 = probs[start..].iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::RowSum {
                    row: i,
                    state: labels[i].clone(),
                    sum,
                });
            }
            // Rounding noise of the summation itself is left alone, which also
            // makes renormalization idempotent across a write/read cycle.
            let noise = 2.0 * (cols.len() - start) as f64 * f64::EPSILON;
            if (sum - 1.0).abs() > noise {
                probs[start..].iter_mut().for_each(|p| *p /= sum);
            }
            row_ptr.push(cols.len());
        }

        Ok(Self {
            labels,
            index,
            row_ptr,
            cols,
            probs,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, state: usize) -> &str {
        &self.labels[state]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    /// Nonzero entries of row `state`, in increasing column order.
    #[inline]
    pub fn row(&self, state: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + Clone + '_ {
        let span = self.row_ptr[state]..self.row_ptr[state + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.probs[span].iter().copied())
    }

    pub(crate) fn row_slices(&self, state: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[state]..self.row_ptr[state + 1];
        (&self.cols[span.clone()], &self.probs[span])
    }

    /// One-step probability `p_1(x, y)`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        let (cols, probs) = self.row_slices(x);
        match cols.binary_search(&y) {
            Ok(k) => probs[k],
            Err(_) => 0.0,
        }
    }

    /// Probability of jumping from `x` into `set` in one step.
    pub fn prob_into(&self, x: usize, set: &StateSet) -> f64 {
        self.row(x)
            .filter(|&(j, _)| set.contains(j))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Dense copy of the kernel, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                let mut row = vec![0.0; self.len()];
                for (j, p) in self.row(i) {
                    row[j] = p;
                }
                row
            })
            .collect()
    }

    /// Parses a set of labels into a [`StateSet`].
    pub fn state_set<S: AsRef<str>>(&self, labels: &[S]) -> Result<StateSet> {
        let idx = labels
            .iter()
            .map(|l| self.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(StateSet::from_indices(self.len(), idx))
    }

    /// States that can reach `target` along positive-probability edges,
    /// including the target itself.
    pub fn states_reaching(&self, target: &StateSet) -> StateSet {
        let n = self.len();
        let mut pred_ptr = vec![0usize; n + 1];
        for &j in &self.cols {
            pred_ptr[j + 1] += 1;
        }
        for i in 0..n {
            pred_ptr[i + 1] += pred_ptr[i];
        }
        let mut fill = pred_ptr.clone();
        let mut preds = vec![0usize; self.cols.len()];
        for i in 0..n {
            for (j, _) in self.row(i) {
                preds[fill[j]] = i;
                fill[j] += 1;
            }
        }

        let mut seen = target.mask().to_vec();
        let mut queue: VecDeque<usize> = target.iter().collect();
        while let Some(v) = queue.pop_front() {
            for &u in &preds[pred_ptr[v]..pred_ptr[v + 1]] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        StateSet::from_mask(seen)
    }

    /// States reachable from `start` by paths whose states before the last
    /// all lie in `within`.
    pub fn reachable_within(&self, start: usize, within: &StateSet) -> StateSet {
        let mut seen = vec![false; self.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            if !within.contains(v) {
                continue;
            }
            for (j, _) in self.row(v) {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        StateSet::from_mask(seen)
    }
}

/// Validates a labelled dense transition matrix.
///
/// Rows within `1e-12` of summing to one are renormalized; anything further
/// off is rejected.
pub fn build_chain<S: Into<String>>(states: Vec<S>, transition: &[Vec<f64>]) -> Result<Chain> {
    Chain::from_dense(states.into_iter().map(Into::into).collect(), transition)
}

/// One of the three pieces of the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    A,
    B,
    C,
}

impl Class {
    pub fn letter(self) -> char {
        match self {
            Class::A => 'A',
            Class::B => 'B',
            Class::C => 'C',
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Disjoint cover of the state space by A, B and C. A and C are nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    classes: Vec<Class>,
    a: StateSet,
    b: StateSet,
    c: StateSet,
}

impl Partition {
    pub fn class_of(&self, state: usize) -> Class {
        self.classes[state]
    }

    pub fn classes(&self) -> &[Class] {
        &self.classes
    }

    pub fn a(&self) -> &StateSet {
        &self.a
    }

    pub fn b(&self) -> &StateSet {
        &self.b
    }

    pub fn c(&self) -> &StateSet {
        &self.c
    }

    pub fn set(&self, class: Class) -> &StateSet {
        match class {
            Class::A => &self.a,
            Class::B => &self.b,
            Class::C => &self.c,
        }
    }

    /// A ∪ B, the states from which the walk has not yet stopped.
    pub fn transient(&self) -> StateSet {
        self.a.union(&self.b)
    }

    /// Builds a partition from a per-state class vector.
    pub fn from_classes(chain: &Chain, classes: Vec<Class>) -> Result<Self> {
        if classes.len() != chain.len() {
            return Err(Error::Dimension(format!(
                "{} class labels for {} states",
                classes.len(),
                chain.len()
            )));
        }
        let set = |k| {
            StateSet::from_indices(
                classes.len(),
                classes
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &c)| (c == k).then_some(i)),
            )
        };
        let (a, b, c) = (set(Class::A), set(Class::B), set(Class::C));
        if a.is_empty() {
            return Err(Error::EmptyClass('A'));
        }
        if c.is_empty() {
            return Err(Error::EmptyClass('C'));
        }
        Ok(Self { classes, a, b, c })
    }
}

/// Validates a state → class assignment against `chain`.
pub fn build_partition<S, I>(chain: &Chain, assignment: I) -> Result<Partition>
where
    S: AsRef<str>,
    I: IntoIterator<Item = (S, Class)>,
{
    let mut classes: Vec<Option<Class>> = vec![None; chain.len()];
    for (label, class) in assignment {
        let i = chain.index_of(label.as_ref())?;
        if classes[i].replace(class).is_some() {
            return Err(Error::DuplicateAssignment(label.as_ref().to_string()));
        }
    }
    let classes = classes
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| Error::MissingState(chain.label(i).to_string())))
        .collect::<Result<Vec<_>>>()?;
    Partition::from_classes(chain, classes)
}

/// Whether every state of A ∪ B has a support path into C.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityReport {
    pub ok: bool,
    pub offending_states: Vec<usize>,
}

/// Checks that the walk reaches C almost surely from every state of A ∪ B.
///
/// On a finite chain this is plain graph reachability: a substochastic class
/// with an exit leaks with probability one.
pub fn validate_absorption(chain: &Chain, partition: &Partition) -> ReachabilityReport {
    let reaching = chain.states_reaching(partition.c());
    let offending_states: Vec<usize> = (0..chain.len())
        .filter(|&s| partition.class_of(s) != Class::C && !reaching.contains(s))
        .collect();
    ReachabilityReport {
        ok: offending_states.is_empty(),
        offending_states,
    }
}

/// Like [`validate_absorption`] but as a `Result`, for solver preconditions.
pub fn require_absorption(chain: &Chain, partition: &Partition) -> Result<()> {
    let report = validate_absorption(chain, partition);
    if report.ok {
        Ok(())
    } else {
        Err(Error::Unreachable(
            report
                .offending_states
                .iter()
                .map(|&s| chain.label(s).to_string())
                .collect(),
        ))
    }
}

/// First hitting time of a target set, counted from time zero:
/// `T = inf{k >= 0 : S_k in target}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingSpec {
    target: StateSet,
}

impl StoppingSpec {
    pub fn new(target: StateSet) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::InvalidArgument("stopping target is empty".into()));
        }
        Ok(Self { target })
    }

    pub fn target(&self) -> &StateSet {
        &self.target
    }

    /// The hitting time along a realized path, or `None` if the path never
    /// enters the target.
    pub fn hitting_time(&self, path: &[usize]) -> Option<usize> {
        path.iter().position(|&s| self.target.contains(s))
    }
}
