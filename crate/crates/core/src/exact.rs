//! Desk-scale exact solver: depth-first branch and bound over the hour
//! tensor, plus an independent brute-force enumerator used as a ground-truth
//! oracle for the heuristics and the knapsack reduction tests.
//!
//! Both solvers are deterministic, including tie-breaking: among assignments
//! of equal objective value the lexicographically smallest hour tensor wins.

use crate::model::{
    check_feasibility, objective_from_totals, Assignment, Instance, ModelError, PenaltyWeights,
    SolutionMetrics,
};
use crate::rational::Rational;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Hard limits on the branch-and-bound search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_nodes: u64,
    pub time_limit: Duration,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_nodes: 100_000_000,
            time_limit: Duration::from_secs(60),
        }
    }
}

/// How the search ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// The search completed; no feasible assignment scores strictly higher.
    ProvenOptimal,
    NodeLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::ProvenOptimal => "proven-optimal",
            SolveStatus::NodeLimit => "node-limit",
            SolveStatus::TimeLimit => "time-limit",
        }
    }
}

/// Best assignment found, with metrics and search diagnostics.
#[derive(Debug, Clone)]
pub struct OptimalSolution {
    pub assignment: Assignment,
    pub metrics: SolutionMetrics,
    pub status: SolveStatus,
    pub nodes_explored: u64,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid solve limits: {0}")]
    InvalidLimits(String),
    #[error("search space of {candidates} candidate tensors exceeds limit {limit}")]
    SearchSpaceTooLarge { candidates: u128, limit: u128 },
}

const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Optimistic completion bound used for pruning.
///
/// For each patient, assumes every still-undecided hour that some skilled
/// caregiver with residual capacity could provide is actually provided,
/// ignoring budget sharing and cardinality interactions. Since the penalty
/// terms are non-positive, the weighted-fill sum alone bounds the objective
/// of every feasible completion.
pub fn upper_bound(
    instance: &Instance,
    _weights: &PenaltyWeights,
    partial: &Assignment,
    decided_entries: usize,
) -> Result<Rational, ModelError> {
    let (n, m, s) = (instance.n(), instance.m(), instance.s());
    if partial.dims() != (n, m, s) {
        let (found_n, found_m, found_s) = partial.dims();
        return Err(ModelError::DimensionMismatch {
            n,
            m,
            s,
            found_n,
            found_m,
            found_s,
        });
    }
    let total = n * m * s;
    let decided = decided_entries.min(total);

    let mut patient_service = vec![0u64; m * s];
    let mut patient_hours = vec![0u64; m];
    let mut caregiver_hours = vec![0u64; n];
    for flat in 0..decided {
        let i = flat / (m * s);
        let rest = flat % (m * s);
        let j = rest / s;
        let k = rest % s;
        let h = partial.hours(i, j, k);
        patient_service[j * s + k] += h;
        patient_hours[j] += h;
        caregiver_hours[i] += h;
    }

    Ok(bound_from_state(
        instance,
        &patient_service,
        &patient_hours,
        &caregiver_hours,
        decided,
    ))
}

fn bound_from_state(
    instance: &Instance,
    patient_service: &[u64],
    patient_hours: &[u64],
    caregiver_hours: &[u64],
    decided: usize,
) -> Rational {
    let (n, m, s) = (instance.n(), instance.m(), instance.s());
    let residual_capacity: Vec<u64> = (0..n)
        .map(|i| instance.capacity(i).saturating_sub(caregiver_hours[i]))
        .collect();
    let total_residual_capacity: u64 = residual_capacity.iter().sum();

    let mut bound = Rational::zero();
    for j in 0..m {
        let demand = instance.total_demand(j);
        if demand == 0 {
            bound += instance.utility(j);
            continue;
        }
        let mut extra = 0u64;
        for k in 0..s {
            let residual = instance
                .demand(j, k)
                .saturating_sub(patient_service[j * s + k]);
            if residual == 0 {
                continue;
            }
            let reachable = (0..n).any(|i| {
                instance.skill(i, k)
                    && residual_capacity[i] > 0
                    && (i * m + j) * s + k >= decided
            });
            if reachable {
                extra += residual;
            }
        }
        let achievable = patient_hours[j] + extra.min(total_residual_capacity);
        bound += instance.utility(j)
            * &(Rational::from(achievable.min(demand)) / Rational::from(demand));
    }
    bound
}

struct Search<'a> {
    instance: &'a Instance,
    weights: &'a PenaltyWeights,
    total: usize,
    hours: Vec<u64>,
    patient_service: Vec<u64>,
    patient_hours: Vec<u64>,
    caregiver_hours: Vec<u64>,
    pair_hours: Vec<u64>,
    caregiver_links: Vec<u64>,
    patient_links: Vec<u64>,
    spent: Rational,
    best_hours: Vec<u64>,
    best_objective: Rational,
    nodes: u64,
    max_nodes: u64,
    deadline: Instant,
    interrupted: Option<SolveStatus>,
}

impl<'a> Search<'a> {
    fn new(
        instance: &'a Instance,
        weights: &'a PenaltyWeights,
        limits: &SolveLimits,
    ) -> Search<'a> {
        let (n, m, s) = (instance.n(), instance.m(), instance.s());
        let zero_hours = vec![0u64; n * m * s];
        // The zero assignment is always feasible, so it seeds the incumbent;
        // it is also the lexicographically smallest tensor, consistent with
        // the tie-break rule.
        let zero_objective = objective_from_totals(instance, weights, &vec![0; m], &vec![0; n]);
        Search {
            instance,
            weights,
            total: n * m * s,
            hours: zero_hours.clone(),
            patient_service: vec![0; m * s],
            patient_hours: vec![0; m],
            caregiver_hours: vec![0; n],
            pair_hours: vec![0; n * m],
            caregiver_links: vec![0; n],
            patient_links: vec![0; m],
            spent: Rational::zero(),
            best_hours: zero_hours,
            best_objective: zero_objective,
            nodes: 0,
            max_nodes: limits.max_nodes,
            deadline: Instant::now() + limits.time_limit,
            interrupted: None,
        }
    }

    fn note_node(&mut self) {
        self.nodes += 1;
        if self.nodes >= self.max_nodes {
            self.interrupted = Some(SolveStatus::NodeLimit);
        } else if self.nodes.is_multiple_of(256) && Instant::now() >= self.deadline {
            self.interrupted = Some(SolveStatus::TimeLimit);
        }
    }

    fn descend(&mut self, depth: usize) {
        if self.interrupted.is_some() {
            return;
        }
        if depth == self.total {
            let objective = objective_from_totals(
                self.instance,
                self.weights,
                &self.patient_hours,
                &self.caregiver_hours,
            );
            if objective > self.best_objective
                || (objective == self.best_objective && self.hours < self.best_hours)
            {
                self.best_objective = objective;
                self.best_hours = self.hours.clone();
            }
            return;
        }

        // Prune only on a strict gap: an equal bound may still hide an
        // equal-objective, lexicographically smaller completion.
        let bound = bound_from_state(
            self.instance,
            &self.patient_service,
            &self.patient_hours,
            &self.caregiver_hours,
            depth,
        );
        if bound < self.best_objective {
            return;
        }

        let (m, s) = (self.instance.m(), self.instance.s());
        let i = depth / (m * s);
        let rest = depth % (m * s);
        let j = rest / s;
        let k = rest % s;

        let mut cap = 0u64;
        if self.instance.skill(i, k) {
            let residual_demand =
                self.instance.demand(j, k) - self.patient_service[j * s + k];
            let residual_capacity = self.instance.capacity(i) - self.caregiver_hours[i];
            cap = residual_demand.min(residual_capacity);
            let cost = self.instance.unit_cost(i, j, k);
            if cap > 0 && cost.is_positive() {
                let left = self.instance.budget() - &self.spent;
                cap = (&left / cost).floor_clamped(cap);
            }
            if cap > 0 && self.pair_hours[i * m + j] == 0 {
                let new_link_allowed = self.caregiver_links[i]
                    < self.instance.max_patients_per_caregiver(i)
                    && self.patient_links[j] < self.instance.max_caregivers_per_patient(j);
                if !new_link_allowed {
                    cap = 0;
                }
            }
        }

        for value in (0..=cap).rev() {
            self.note_node();
            if self.interrupted.is_some() {
                return;
            }
            self.apply(depth, i, j, k, value);
            self.descend(depth + 1);
            self.unapply(depth, i, j, k, value);
            if self.interrupted.is_some() {
                return;
            }
        }
    }

    fn apply(&mut self, depth: usize, i: usize, j: usize, k: usize, value: u64) {
        self.hours[depth] = value;
        if value == 0 {
            return;
        }
        let (m, s) = (self.instance.m(), self.instance.s());
        self.patient_service[j * s + k] += value;
        self.patient_hours[j] += value;
        self.caregiver_hours[i] += value;
        if self.pair_hours[i * m + j] == 0 {
            self.caregiver_links[i] += 1;
            self.patient_links[j] += 1;
        }
        self.pair_hours[i * m + j] += value;
        self.spent += &(self.instance.unit_cost(i, j, k) * &Rational::from(value));
    }

    fn unapply(&mut self, depth: usize, i: usize, j: usize, k: usize, value: u64) {
        self.hours[depth] = 0;
        if value == 0 {
            return;
        }
        let (m, s) = (self.instance.m(), self.instance.s());
        self.patient_service[j * s + k] -= value;
        self.patient_hours[j] -= value;
        self.caregiver_hours[i] -= value;
        self.pair_hours[i * m + j] -= value;
        if self.pair_hours[i * m + j] == 0 {
            self.caregiver_links[i] -= 1;
            self.patient_links[j] -= 1;
        }
        self.spent -= &(self.instance.unit_cost(i, j, k) * &Rational::from(value));
    }
}

/// Depth-first branch and bound over the hour tensor in fixed index order
/// (caregiver, then patient, then service), branching from high hour values
/// to low and pruning with [`upper_bound`]'s completion bound.
pub fn solve_exact(
    instance: &Instance,
    weights: &PenaltyWeights,
    limits: &SolveLimits,
) -> Result<OptimalSolution, SolveError> {
    if limits.max_nodes < 1 {
        return Err(SolveError::InvalidLimits("max_nodes must be at least 1".into()));
    }
    if limits.time_limit.is_zero() {
        return Err(SolveError::InvalidLimits("time_limit must be positive".into()));
    }

    let mut search = Search::new(instance, weights, limits);
    search.descend(0);

    let status = search.interrupted.unwrap_or(SolveStatus::ProvenOptimal);
    let assignment =
        Assignment::from_hours(instance.n(), instance.m(), instance.s(), search.best_hours)
            .expect("search tensor has instance dimensions");
    debug_assert!(check_feasibility(instance, &assignment)
        .map(|r| r.is_feasible())
        .unwrap_or(false));
    let metrics = SolutionMetrics::compute(instance, weights, &assignment)?;
    Ok(OptimalSolution {
        assignment,
        metrics,
        status,
        nodes_explored: search.nodes,
    })
}

fn entry_bounds(instance: &Instance) -> Vec<u64> {
    let (n, m, s) = (instance.n(), instance.m(), instance.s());
    let mut bounds = Vec::with_capacity(n * m * s);
    for i in 0..n {
        for j in 0..m {
            for k in 0..s {
                let b = if instance.skill(i, k) {
                    instance.demand(j, k).min(instance.capacity(i))
                } else {
                    0
                };
                bounds.push(b);
            }
        }
    }
    bounds
}

fn candidate_count(bounds: &[u64]) -> u128 {
    let mut count: u128 = 1;
    for &b in bounds {
        count = count.saturating_mul(b as u128 + 1);
        if count > ENUMERATION_LIMIT {
            return count;
        }
    }
    count
}

fn enumerate_impl<F: FnMut(&Assignment, &Rational)>(
    instance: &Instance,
    weights: &PenaltyWeights,
    mut visit: F,
) -> Result<u64, SolveError> {
    let bounds = entry_bounds(instance);
    let candidates = candidate_count(&bounds);
    if candidates > ENUMERATION_LIMIT {
        return Err(SolveError::SearchSpaceTooLarge {
            candidates,
            limit: ENUMERATION_LIMIT,
        });
    }

    let (n, m, s) = (instance.n(), instance.m(), instance.s());
    let mut hours = vec![0u64; bounds.len()];
    let mut visited = 0u64;
    loop {
        visited += 1;
        let assignment = Assignment::from_hours(n, m, s, hours.clone())
            .expect("enumeration tensor has instance dimensions");
        if check_feasibility(instance, &assignment)?.is_feasible() {
            let objective = crate::model::evaluate_objective(instance, weights, &assignment)?;
            visit(&assignment, &objective);
        }

        // Odometer step in lexicographic order: rightmost digit fastest.
        let mut pos = hours.len();
        loop {
            if pos == 0 {
                return Ok(visited);
            }
            pos -= 1;
            if hours[pos] < bounds[pos] {
                hours[pos] += 1;
                break;
            }
            hours[pos] = 0;
        }
    }
}

/// Exhaustively enumerates every integer hour tensor within per-entry
/// bounds, keeps the feasible ones, and returns the objective maximizer.
/// Ties break to the lexicographically smallest tensor. This is the
/// independent oracle the branch-and-bound solver is checked against.
pub fn enumerate_all(
    instance: &Instance,
    weights: &PenaltyWeights,
) -> Result<OptimalSolution, SolveError> {
    let mut best: Option<(Rational, Assignment)> = None;
    let visited = enumerate_impl(instance, weights, |assignment, objective| {
        // First-found wins ties: candidates arrive in ascending lex order.
        let better = match &best {
            None => true,
            Some((incumbent, _)) => objective > incumbent,
        };
        if better {
            best = Some((objective.clone(), assignment.clone()));
        }
    })?;
    let (_, assignment) = best.expect("the zero tensor is always feasible");
    let metrics = SolutionMetrics::compute(instance, weights, &assignment)?;
    Ok(OptimalSolution {
        assignment,
        metrics,
        status: SolveStatus::ProvenOptimal,
        nodes_explored: visited,
    })
}

/// Like [`enumerate_all`] but keeps the whole optimum set, in ascending
/// lexicographic order of the hour tensor.
pub fn enumerate_optima(
    instance: &Instance,
    weights: &PenaltyWeights,
) -> Result<(Rational, Vec<Assignment>), SolveError> {
    let mut best: Option<Rational> = None;
    let mut optima: Vec<Assignment> = Vec::new();
    enumerate_impl(instance, weights, |assignment, objective| {
        match &best {
            Some(incumbent) if objective < incumbent => {}
            Some(incumbent) if objective == incumbent => optima.push(assignment.clone()),
            _ => {
                best = Some(objective.clone());
                optima.clear();
                optima.push(assignment.clone());
            }
        }
    })?;
    Ok((best.expect("the zero tensor is always feasible"), optima))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InstanceBuilder;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn weights(theta: &str, alpha: &str) -> PenaltyWeights {
        PenaltyWeights::new(r(theta), r(alpha)).unwrap()
    }

    #[test]
    fn single_cell_instance_is_solved() {
        let instance = InstanceBuilder::new(1, 1, 1)
            .demand(&[1])
            .capacity(&[1])
            .uniform_cost(r("1"))
            .budget(r("1"))
            .utilities(vec![r("5")])
            .build()
            .unwrap();
        let sol = solve_exact(&instance, &PenaltyWeights::zero(), &SolveLimits::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::ProvenOptimal);
        assert_eq!(sol.metrics.objective, r("5"));
        assert_eq!(sol.assignment.hours(0, 0, 0), 1);
    }

    #[test]
    fn zero_budget_forces_zero_assignment() {
        let instance = InstanceBuilder::new(2, 2, 1)
            .demand(&[1, 1])
            .capacity(&[2, 2])
            .uniform_cost(r("1"))
            .budget(r("0"))
            .build()
            .unwrap();
        let sol = solve_exact(&instance, &PenaltyWeights::zero(), &SolveLimits::default()).unwrap();
        assert_eq!(sol.metrics.objective, Rational::zero());
        assert!(sol.assignment.hours_flat().iter().all(|&h| h == 0));
    }

    #[test]
    fn branch_and_bound_matches_enumeration_with_penalties() {
        let instance = InstanceBuilder::new(2, 2, 1)
            .demand(&[2, 2])
            .capacity(&[2, 2])
            .uniform_cost(r("1"))
            .budget(r("3"))
            .utilities(vec![r("10"), r("6")])
            .build()
            .unwrap();
        let w = weights("2", "1");
        let exact = solve_exact(&instance, &w, &SolveLimits::default()).unwrap();
        let brute = enumerate_all(&instance, &w).unwrap();
        assert_eq!(exact.metrics.objective, brute.metrics.objective);
        assert_eq!(exact.assignment, brute.assignment);
    }

    #[test]
    fn empty_instance_has_zero_objective() {
        let instance = InstanceBuilder::new(1, 0, 1).capacity(&[3]).build().unwrap();
        let sol = enumerate_all(&instance, &PenaltyWeights::zero()).unwrap();
        assert_eq!(sol.metrics.objective, Rational::zero());
        assert_eq!(sol.nodes_explored, 1);
    }

    #[test]
    fn upper_bound_on_complete_assignment_is_current_value() {
        let instance = InstanceBuilder::new(1, 2, 1)
            .demand(&[2, 2])
            .capacity(&[2])
            .budget(r("100"))
            .utilities(vec![r("4"), r("9")])
            .build()
            .unwrap();
        let mut x = Assignment::zeros(1, 2, 1);
        x.set_hours(0, 0, 0, 2);
        // All capacity used, all entries decided: bound equals sum p_j b_j.
        let bound = upper_bound(&instance, &PenaltyWeights::zero(), &x, 2).unwrap();
        assert_eq!(bound, r("4"));
    }

    #[test]
    fn upper_bound_on_empty_partial_is_total_utility() {
        let instance = InstanceBuilder::new(2, 2, 2)
            .demand(&[1, 2, 3, 0])
            .capacity(&[10, 10])
            .budget(r("1000"))
            .utilities(vec![r("4"), r("9")])
            .build()
            .unwrap();
        let x = Assignment::zeros(2, 2, 2);
        let bound = upper_bound(&instance, &PenaltyWeights::zero(), &x, 0).unwrap();
        assert_eq!(bound, r("13"));
    }

    #[test]
    fn node_limit_returns_incumbent() {
        let instance = InstanceBuilder::new(2, 2, 2)
            .demand(&[2, 2, 2, 2])
            .capacity(&[4, 4])
            .uniform_cost(r("1"))
            .budget(r("8"))
            .build()
            .unwrap();
        let limits = SolveLimits {
            max_nodes: 1,
            time_limit: Duration::from_secs(60),
        };
        let sol = solve_exact(&instance, &PenaltyWeights::zero(), &limits).unwrap();
        assert_eq!(sol.status, SolveStatus::NodeLimit);
        assert!(check_feasibility(&instance, &sol.assignment).unwrap().is_feasible());
    }

    #[test]
    fn invalid_limits_are_rejected() {
        let instance = InstanceBuilder::new(1, 1, 1).demand(&[1]).capacity(&[1]).build().unwrap();
        let bad = SolveLimits {
            max_nodes: 0,
            time_limit: Duration::from_secs(1),
        };
        assert!(matches!(
            solve_exact(&instance, &PenaltyWeights::zero(), &bad),
            Err(SolveError::InvalidLimits(_))
        ));
    }

    #[test]
    fn enumeration_rejects_huge_search_spaces() {
        let instance = InstanceBuilder::new(4, 6, 4)
            .demand(&[9; 24])
            .capacity(&[50, 50, 50, 50])
            .budget(r("100000"))
            .build()
            .unwrap();
        assert!(matches!(
            enumerate_all(&instance, &PenaltyWeights::zero()),
            Err(SolveError::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn bound_never_below_the_enumerated_optimum() {
        use rand::RngExt;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for case in 0..50 {
            let n = rng.random_range(1..=2usize);
            let m = rng.random_range(1..=2usize);
            let s = rng.random_range(1..=2usize);
            let skills: Vec<u8> = (0..n * s).map(|_| u8::from(rng.random_bool(0.7))).collect();
            let demand: Vec<u64> = (0..m * s).map(|_| rng.random_range(0..=2)).collect();
            let capacity: Vec<u64> = (0..n).map(|_| rng.random_range(0..=3)).collect();
            let costs: Vec<Rational> = (0..n * m * s)
                .map(|_| Rational::from(rng.random_range(0i64..=2)))
                .collect();
            let utilities: Vec<Rational> = (0..m)
                .map(|_| Rational::from(rng.random_range(0i64..=9)))
                .collect();
            let instance = InstanceBuilder::new(n, m, s)
                .skills(&skills)
                .demand(&demand)
                .capacity(&capacity)
                .unit_costs(costs)
                .budget(Rational::from(rng.random_range(0i64..=6)))
                .utilities(utilities)
                .build()
                .unwrap();
            let w = weights("1", "1");
            let brute = enumerate_all(&instance, &w).unwrap();
            let empty = Assignment::zeros(n, m, s);
            let bound = upper_bound(&instance, &w, &empty, 0).unwrap();
            assert!(
                bound >= brute.metrics.objective,
                "case {case}: bound {bound} below optimum {}",
                brute.metrics.objective
            );
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let instance = InstanceBuilder::new(2, 2, 1)
            .demand(&[2, 1])
            .capacity(&[2, 1])
            .uniform_cost(r("1"))
            .budget(r("2"))
            .utilities(vec![r("3"), r("3")])
            .build()
            .unwrap();
        let w = weights("1", "1");
        let a = solve_exact(&instance, &w, &SolveLimits::default()).unwrap();
        let b = solve_exact(&instance, &w, &SolveLimits::default()).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.nodes_explored, b.nodes_explored);
        assert_eq!(a.metrics.objective, b.metrics.objective);
    }
}
