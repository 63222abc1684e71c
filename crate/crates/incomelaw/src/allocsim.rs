//! Combinatorics of integer income allocations.
//!
//! `N` labeled agents share a total income `Y` (in integer money units), each
//! agent sitting at one of a set of income levels. An *allocation* assigns a
//! level to every agent; an *occupancy* records only how many agents sit at
//! each level. Many allocations realize the same occupancy — its
//! *multiplicity* `N! / prod(a_k!)` — and when every allocation is treated as
//! equally likely, the occupancy with the largest multiplicity dominates. At
//! desk scale that maximizer is already exponential-shaped, which is the
//! combinatorial root of the income law fitted elsewhere in this crate.
//!
//! The module provides exact counting ([`count_allocations`]), multiplicity
//! and entropy of a given occupancy ([`occupancy_multiplicity`]), exhaustive
//! enumeration and maximization over occupancies ([`enumerate_occupancies`],
//! [`argmax_occupancy`]), exactly-uniform sampling of allocations
//! ([`sample_uniform`]), and the continuum limit ([`continuum_density`],
//! [`mu_from_production`]).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expofit::ExponentialLaw;
use crate::special::ln_factorial;

/// Enumeration stops with an error once this many occupancy vectors have
/// been visited.
pub const OCCUPANCY_CAP: u64 = 5_000_000;

/// Hard bound on recursion nodes, so that hopeless searches fail fast
/// instead of running for hours before hitting [`OCCUPANCY_CAP`].
const NODE_CAP: u64 = 200_000_000;

/// Errors from allocation counting, enumeration, and sampling.
#[derive(Debug, Error, PartialEq)]
pub enum AllocError {
    /// Structurally invalid space parameters.
    #[error("invalid allocation space: {reason}")]
    InvalidSpace { reason: String },
    /// An occupancy that does not satisfy the agent-count or income-sum
    /// constraint of its space.
    #[error("occupancy violates space constraints: {reason}")]
    ConstraintViolation { reason: String },
    /// The occupancy search space exceeds the enumeration cap.
    #[error("occupancy search space exceeds {cap} candidates; refusing to enumerate")]
    SearchSpaceTooLarge { cap: u64 },
    /// An empty allocation list has no distribution.
    #[error("cannot build a distribution from zero allocations")]
    EmptyInput,
    /// Density queried below the support edge.
    #[error("income {x} is below the support edge {mu}; the density is zero there")]
    BelowSupport { x: f64, mu: f64 },
    /// Negative marginal employment level.
    #[error("marginal employment level must be >= 0, got {sigma}")]
    NegativeSigma { sigma: f64 },
}

/// The space of allocations: `n_agents` labeled agents, total income
/// `total_income`, each agent at one of `levels` (strictly increasing).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationSpace {
    /// Number of labeled agents (N).
    pub n_agents: u64,
    /// Total income to distribute (Y), in integer money units.
    pub total_income: u64,
    /// Admissible income levels, strictly increasing.
    pub levels: Vec<u64>,
}

impl AllocationSpace {
    /// The default space: levels `0, 1, …, total_income`.
    pub fn new(n_agents: u64, total_income: u64) -> Result<Self, AllocError> {
        Self::with_levels(n_agents, total_income, (0..=total_income).collect())
    }

    /// A space with an explicit level set.
    pub fn with_levels(
        n_agents: u64,
        total_income: u64,
        levels: Vec<u64>,
    ) -> Result<Self, AllocError> {
        if n_agents == 0 {
            return Err(AllocError::InvalidSpace {
                reason: "need at least one agent".to_owned(),
            });
        }
        if levels.is_empty() {
            return Err(AllocError::InvalidSpace {
                reason: "need at least one income level".to_owned(),
            });
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AllocError::InvalidSpace {
                reason: "income levels must be strictly increasing".to_owned(),
            });
        }
        Ok(Self {
            n_agents,
            total_income,
            levels,
        })
    }

    /// Whether the levels are exactly `0 ..= total_income`, the contiguous
    /// default for which closed-form counting and exact sampling exist.
    pub fn has_contiguous_levels(&self) -> bool {
        self.levels.len() as u64 == self.total_income + 1
            && self.levels.first() == Some(&0)
            && self.levels.last() == Some(&self.total_income)
    }
}

/// One assignment of incomes to the labeled agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    /// Income of each agent, `incomes.len() == n_agents`.
    pub incomes: Vec<u64>,
}

impl Allocation {
    /// The occupancy counts this allocation realizes.
    pub fn occupancy_counts(&self) -> BTreeMap<u64, u64> {
        let mut counts = BTreeMap::new();
        for &income in &self.incomes {
            *counts.entry(income).or_insert(0) += 1;
        }
        counts
    }
}

/// How many agents sit at each level, with the exact number of allocations
/// realizing it and the log of that number.
#[derive(Debug, Clone, PartialEq)]
pub struct Occupancy {
    /// Agents per level; only levels with at least one agent appear.
    pub counts: BTreeMap<u64, u64>,
    /// Number of distinct allocations with these counts: `N! / prod(a_k!)`.
    pub multiplicity: BigUint,
    /// `ln(multiplicity)`.
    pub entropy: f64,
}

fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
    }
    acc
}

/// Exact number of allocations in the space.
///
/// For the contiguous default levels this is the composition count
/// `C(Y + N - 1, N - 1)`; for general level sets it is computed by dynamic
/// programming over agents and income.
pub fn count_allocations(space: &AllocationSpace) -> BigUint {
    if space.has_contiguous_levels() {
        return binomial(space.total_income + space.n_agents - 1, space.n_agents - 1);
    }
    let y = space.total_income as usize;
    // ways[y] = number of level assignments to the agents processed so far
    // with income sum y.
    let mut ways = vec![BigUint::zero(); y + 1];
    ways[0] = BigUint::one();
    for _ in 0..space.n_agents {
        let mut next = vec![BigUint::zero(); y + 1];
        for (income, w) in ways.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for &level in &space.levels {
                let reach = income + level as usize;
                if reach <= y {
                    next[reach] += w;
                }
            }
        }
        ways = next;
    }
    ways[y].clone()
}

/// Validates `counts` against the space and computes its multiplicity and
/// entropy.
pub fn occupancy_multiplicity(
    space: &AllocationSpace,
    counts: &BTreeMap<u64, u64>,
) -> Result<Occupancy, AllocError> {
    let mut n_sum: u64 = 0;
    let mut y_sum: u64 = 0;
    for (&level, &count) in counts {
        if count == 0 {
            continue;
        }
        if space.levels.binary_search(&level).is_err() {
            return Err(AllocError::ConstraintViolation {
                reason: format!("level {level} is not in the space"),
            });
        }
        n_sum += count;
        y_sum += level * count;
    }
    if n_sum != space.n_agents {
        return Err(AllocError::ConstraintViolation {
            reason: format!("counts sum to {n_sum} agents, space has {}", space.n_agents),
        });
    }
    if y_sum != space.total_income {
        return Err(AllocError::ConstraintViolation {
            reason: format!(
                "incomes sum to {y_sum}, space requires {}",
                space.total_income
            ),
        });
    }

    let mut multiplicity = factorial(space.n_agents);
    let mut entropy = ln_factorial(space.n_agents);
    let mut clean = BTreeMap::new();
    for (&level, &count) in counts {
        if count == 0 {
            continue;
        }
        multiplicity /= factorial(count);
        entropy -= ln_factorial(count);
        clean.insert(level, count);
    }
    Ok(Occupancy {
        counts: clean,
        multiplicity,
        entropy,
    })
}

/// Depth-first walk over every occupancy vector of the space, assigning
/// counts to levels from the highest level downward with exact feasibility
/// bounds, so only branches leading to valid occupancies are entered.
///
/// The visitor receives the candidate's nonzero `(level, count)` pairs in
/// ascending level order, plus its log-multiplicity (maintained
/// incrementally, so visiting is O(size of the occupancy)).
struct OccupancyWalker<'a, F: FnMut(&[(u64, u64)], f64)> {
    levels: &'a [u64],
    visit: F,
    stack: Vec<(u64, u64)>,
    scratch: Vec<(u64, u64)>,
    /// Running `sum(ln a_k!)` over the stack, so the visitor gets the
    /// candidate's log-multiplicity for free.
    ln_denominator: f64,
    ln_n_factorial: f64,
    leaves: u64,
    nodes: u64,
}

impl<F: FnMut(&[(u64, u64)], f64)> OccupancyWalker<'_, F> {
    fn emit(&mut self, extra: Option<(u64, u64)>) -> Result<(), AllocError> {
        self.leaves += 1;
        if self.leaves > OCCUPANCY_CAP {
            return Err(AllocError::SearchSpaceTooLarge { cap: OCCUPANCY_CAP });
        }
        // The stack is pushed in descending level order and `extra` is
        // always at the smallest level, so this assembles ascending order.
        self.scratch.clear();
        let mut ln_denominator = self.ln_denominator;
        if let Some((level, count)) = extra {
            if count > 0 {
                self.scratch.push((level, count));
                ln_denominator += ln_factorial(count);
            }
        }
        self.scratch.extend(self.stack.iter().rev());
        let ln_multiplicity = self.ln_n_factorial - ln_denominator;
        let scratch = std::mem::take(&mut self.scratch);
        (self.visit)(&scratch, ln_multiplicity);
        self.scratch = scratch;
        Ok(())
    }

    /// Explores levels `levels[..=k]` with `agents` agents and `income`
    /// income still to place.
    fn walk(&mut self, k: usize, agents: u64, income: u64) -> Result<(), AllocError> {
        self.nodes += 1;
        if self.nodes > NODE_CAP {
            return Err(AllocError::SearchSpaceTooLarge { cap: OCCUPANCY_CAP });
        }
        if agents == 0 {
            if income == 0 {
                self.emit(None)?;
            }
            return Ok(());
        }
        // All remaining agents are forced to income zero.
        if income == 0 && self.levels[0] == 0 {
            return self.emit(Some((0, agents)));
        }
        let level = self.levels[k];
        if k == 0 {
            if level * agents == income {
                self.emit(Some((level, agents)))?;
            }
            return Ok(());
        }
        let below_max = self.levels[k - 1];
        let below_min = self.levels[0];
        // count c at this level must leave a feasible remainder:
        //   (agents - c) * below_min <= income - c*level <= (agents - c) * below_max
        let c_cap = income.checked_div(level).unwrap_or(agents).min(agents);
        for c in 0..=c_cap {
            let rest_agents = agents - c;
            let rest_income = income - c * level;
            if rest_income > rest_agents * below_max || rest_income < rest_agents * below_min {
                continue;
            }
            if c > 0 {
                self.stack.push((level, c));
                self.ln_denominator += ln_factorial(c);
            }
            let r = self.walk(k - 1, rest_agents, rest_income);
            if c > 0 {
                self.stack.pop();
                self.ln_denominator -= ln_factorial(c);
            }
            r?;
        }
        Ok(())
    }
}

fn walk_occupancies<F: FnMut(&[(u64, u64)], f64)>(
    space: &AllocationSpace,
    visit: F,
) -> Result<(), AllocError> {
    let mut walker = OccupancyWalker {
        levels: &space.levels,
        visit,
        stack: Vec::new(),
        scratch: Vec::new(),
        ln_denominator: 0.0,
        ln_n_factorial: ln_factorial(space.n_agents),
        leaves: 0,
        nodes: 0,
    };
    walker.walk(space.levels.len() - 1, space.n_agents, space.total_income)
}

/// Every occupancy vector of the space, each with its exact multiplicity.
///
/// # Errors
///
/// [`AllocError::SearchSpaceTooLarge`] past [`OCCUPANCY_CAP`] candidates.
pub fn enumerate_occupancies(space: &AllocationSpace) -> Result<Vec<Occupancy>, AllocError> {
    let mut all: Vec<BTreeMap<u64, u64>> = Vec::new();
    walk_occupancies(space, |counts, _| {
        all.push(counts.iter().copied().collect())
    })?;
    all.into_iter()
        .map(|c| occupancy_multiplicity(space, &c))
        .collect()
}

/// Compares two sparse count vectors (ascending by level, zero counts
/// omitted) as if they were dense vectors over all levels, lexicographically.
fn lex_counts(a: &[(u64, u64)], b: &[(u64, u64)]) -> Ordering {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            // The side that still has a nonzero count at the smaller level
            // is the larger dense vector at that position.
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(&(la, ca)), Some(&(lb, cb))) => match la.cmp(&lb) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    match ca.cmp(&cb) {
                        Ordering::Equal => {}
                        other => return other,
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

/// The occupancy with the largest multiplicity.
///
/// The search tracks candidates by log-multiplicity; whenever two candidates
/// are within 1e-6 of each other in log space the comparison is redone with
/// exact big-integer multiplicities, so floating-point noise can never pick
/// the wrong winner. Exact ties go to the lexicographically smallest count
/// vector (by level).
///
/// # Errors
///
/// [`AllocError::SearchSpaceTooLarge`] past [`OCCUPANCY_CAP`] candidates.
pub fn argmax_occupancy(space: &AllocationSpace) -> Result<Occupancy, AllocError> {
    let mut best: Option<(Vec<(u64, u64)>, f64)> = None;
    walk_occupancies(space, |counts, ln_mult| {
        let replace = match &best {
            None => true,
            Some((best_counts, best_ln)) => {
                if ln_mult > best_ln + 1e-6 {
                    true
                } else if ln_mult < best_ln - 1e-6 {
                    false
                } else {
                    // Too close to trust floats: compare exactly.
                    let cand = exact_multiplicity(space.n_agents, counts);
                    let incumbent = exact_multiplicity(space.n_agents, best_counts);
                    match cand.cmp(&incumbent) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => lex_counts(counts, best_counts) == Ordering::Less,
                    }
                }
            }
        };
        if replace {
            best = Some((counts.to_vec(), ln_mult));
        }
    })?;
    let (counts, _) = best.ok_or_else(|| AllocError::ConstraintViolation {
        reason: format!(
            "no assignment of {} agents to the levels realizes total income {}",
            space.n_agents, space.total_income
        ),
    })?;
    occupancy_multiplicity(space, &counts.into_iter().collect())
}

fn exact_multiplicity(n_agents: u64, counts: &[(u64, u64)]) -> BigUint {
    let mut m = factorial(n_agents);
    for &(_, count) in counts {
        m /= factorial(count);
    }
    m
}

/// Draws `m` allocations, each exactly uniform over all compositions of the
/// total income into `n_agents` nonnegative parts.
///
/// Uses the stars-and-bars bijection: a composition corresponds to an
/// (N-1)-subset of the Y+N-1 slot positions (the bars), drawn with Floyd's
/// algorithm so no rejection is needed. The generator is the ChaCha stream
/// cipher with 8 rounds, seeded from `seed` — the same seed yields the same
/// draws on every platform.
///
/// # Panics
///
/// If the space does not have the contiguous default levels `0..=Y`, for
/// which the bijection is defined.
pub fn sample_uniform(space: &AllocationSpace, seed: u64, m: usize) -> Vec<Allocation> {
    assert!(
        space.has_contiguous_levels(),
        "uniform sampling requires the contiguous level set 0..=total_income"
    );
    let n = space.n_agents;
    let y = space.total_income;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots = y + n - 1;
    let mut bars: HashSet<u64> = HashSet::with_capacity((n - 1) as usize);
    let mut sorted: Vec<u64> = Vec::with_capacity((n - 1) as usize);

    (0..m)
        .map(|_| {
            if n == 1 {
                return Allocation { incomes: vec![y] };
            }
            bars.clear();
            // Floyd's algorithm: uniform (n-1)-subset of 0..slots.
            for j in (slots - (n - 1))..slots {
                let t = rng.random_range(0..=j);
                if !bars.insert(t) {
                    bars.insert(j);
                }
            }
            sorted.clear();
            sorted.extend(bars.iter().copied());
            sorted.sort_unstable();

            let mut incomes = Vec::with_capacity(n as usize);
            let mut prev: i128 = -1;
            for &bar in &sorted {
                incomes.push((bar as i128 - prev - 1) as u64);
                prev = bar as i128;
            }
            incomes.push((slots as i128 - 1 - prev) as u64);
            Allocation { incomes }
        })
        .collect()
}

/// Pools the incomes of all allocations into per-level frequencies.
pub fn empirical_distribution(allocs: &[Allocation]) -> Result<BTreeMap<u64, f64>, AllocError> {
    if allocs.is_empty() {
        return Err(AllocError::EmptyInput);
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut total: u64 = 0;
    for alloc in allocs {
        for &income in &alloc.incomes {
            *counts.entry(income).or_insert(0) += 1;
            total += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|(level, c)| (level, c as f64 / total as f64))
        .collect())
}

/// Probability density of the continuum law at income `x`:
/// `(1/theta) * exp(-(x - mu)/theta)` on `x >= mu`.
pub fn continuum_density(law: &ExponentialLaw, x: f64) -> Result<f64, AllocError> {
    if x < law.mu {
        return Err(AllocError::BelowSupport { x, mu: law.mu });
    }
    Ok((-(x - law.mu) / law.theta).exp() / law.theta)
}

/// The support edge implied by the production side:
/// `mu = sigma * omega - sigma * r * mrts`, where `sigma` is the marginal
/// employment level, `omega` the minimum wage, `r` the interest rate, and
/// `mrts` the marginal rate of technical substitution between labor and
/// capital.
pub fn mu_from_production(sigma: f64, omega: f64, r: f64, mrts: f64) -> Result<f64, AllocError> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(AllocError::NegativeSigma { sigma });
    }
    Ok(sigma * omega - sigma * r * mrts)
}
