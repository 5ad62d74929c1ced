//! Tabu-search improvement of a feasible assignment.
//!
//! Each iteration targets equity directly: it collects the patients whose
//! fill-rate sits below the network maximum, lowest first, pairs them with
//! caregivers that still have hours (sorted by how much they could plausibly
//! give that patient), and applies the best admissible single-hour move per
//! pair. Touched caregivers and patients become tabu for a fixed tenure;
//! a tabu move is still allowed when it strictly improves the best solution
//! found so far (aspiration). After the improvement loop a fill sweep with
//! the same structure as the greedy second phase spends any remaining
//! budget. The incumbent — the best assignment seen anywhere along the
//! trajectory — is returned, so the result never scores below the input.
//!
//! Three move families, each shifting exactly one hour and each validated
//! against the full constraint set before scoring:
//!
//! * **insert** — add one hour of a service from the focus caregiver to the
//!   focus patient;
//! * **reallocate** — move one hour of the focus patient's care from its
//!   current caregiver to the focus caregiver;
//! * **rebalance** — move one hour of the focus caregiver's time from its
//!   highest-fill patient to the focus patient, same service.

use crate::greedy::GreedyState;
use crate::model::{
    check_feasibility, evaluate_objective, Assignment, FeasibilityReport, Instance, ModelError,
    PenaltyWeights,
};
use crate::rational::Rational;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Search controls. `tenure` is the number of iterations a touched entity
/// stays tabu; `max_stall` caps consecutive iterations without an incumbent
/// improvement; `seed` drives tie-breaking among equally scored moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabuParams {
    pub time_limit: Duration,
    pub tenure: u64,
    pub max_stall: u64,
    pub seed: u64,
}

impl TabuParams {
    /// Defaults scaled to the instance: tenure 7, stall cap 50·(n+m).
    pub fn defaults_for(instance: &Instance) -> Self {
        TabuParams {
            time_limit: Duration::from_secs(10),
            tenure: 7,
            max_stall: (50 * (instance.n() + instance.m()) as u64).max(1),
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum TabuError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid tabu parameters: {0}")]
    InvalidParams(String),
    #[error("initial assignment is infeasible: {0}")]
    InfeasibleInitial(FeasibilityReport),
}

/// A single-hour modification of the current assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Insert {
        caregiver: usize,
        patient: usize,
        service: usize,
    },
    Reallocate {
        patient: usize,
        service: usize,
        from_caregiver: usize,
        to_caregiver: usize,
    },
    Rebalance {
        caregiver: usize,
        service: usize,
        from_patient: usize,
        to_patient: usize,
    },
}

impl Move {
    fn touched_caregivers(&self) -> [Option<usize>; 2] {
        match *self {
            Move::Insert { caregiver, .. } => [Some(caregiver), None],
            Move::Reallocate {
                from_caregiver,
                to_caregiver,
                ..
            } => [Some(from_caregiver), Some(to_caregiver)],
            Move::Rebalance { caregiver, .. } => [Some(caregiver), None],
        }
    }

    fn touched_patients(&self) -> [Option<usize>; 2] {
        match *self {
            Move::Insert { patient, .. } => [Some(patient), None],
            Move::Reallocate { patient, .. } => [Some(patient), None],
            Move::Rebalance {
                from_patient,
                to_patient,
                ..
            } => [Some(from_patient), Some(to_patient)],
        }
    }
}

/// A feasibility-validated move with its exact objective delta.
#[derive(Debug, Clone)]
pub struct ScoredMove {
    pub mv: Move,
    pub delta: Rational,
}

/// Search trajectory state: tabu expiries, the working assignment, and the
/// best assignment seen so far.
#[derive(Debug, Clone)]
pub struct TabuState {
    /// Per-caregiver expiry iteration; tabu while `iteration < expiry`.
    pub tabu_caregivers: Vec<u64>,
    pub tabu_patients: Vec<u64>,
    pub incumbent: Assignment,
    pub incumbent_objective: Rational,
    pub current: Assignment,
    pub iteration: u64,
}

/// Incrementally maintained view of the current assignment: per-entity hour
/// totals, rates, cost, and objective. Deltas are exact; a full rebuild every
/// 100 accepted moves guards the bookkeeping anyway.
struct Tracker {
    patient_hours: Vec<u64>,
    caregiver_hours: Vec<u64>,
    patient_service_hours: Vec<u64>, // m*s
    cost: Rational,
    fill: Vec<Rational>,
    util: Vec<Rational>,
    objective: Rational,
}

impl Tracker {
    fn rebuild(instance: &Instance, weights: &PenaltyWeights, x: &Assignment) -> Tracker {
        let (n, m, s) = (instance.n(), instance.m(), instance.s());
        let patient_hours: Vec<u64> = (0..m).map(|j| x.patient_hours(j)).collect();
        let caregiver_hours: Vec<u64> = (0..n).map(|i| x.caregiver_hours(i)).collect();
        let patient_service_hours: Vec<u64> = (0..m)
            .flat_map(|j| (0..s).map(move |k| (j, k)))
            .map(|(j, k)| x.patient_service_hours(j, k))
            .collect();
        let fill: Vec<Rational> = (0..m)
            .map(|j| {
                if instance.patient_included(j) {
                    Rational::from(patient_hours[j]) / Rational::from(instance.total_demand(j))
                } else {
                    Rational::one()
                }
            })
            .collect();
        let util: Vec<Rational> = (0..n)
            .map(|i| {
                if instance.caregiver_included(i) {
                    Rational::from(caregiver_hours[i]) / Rational::from(instance.capacity(i))
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let cost = crate::model::total_cost(instance, x).expect("dimensions already checked");
        let objective = objective_from_rates(instance, weights, &fill, &util, &[], &[]);
        Tracker {
            patient_hours,
            caregiver_hours,
            patient_service_hours,
            cost,
            fill,
            util,
            objective,
        }
    }

    fn max_fill(&self, instance: &Instance) -> Rational {
        (0..instance.m())
            .filter(|&j| instance.patient_included(j))
            .map(|j| self.fill[j].clone())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    fn residual_capacity(&self, instance: &Instance, caregiver: usize) -> u64 {
        instance.capacity(caregiver) - self.caregiver_hours[caregiver]
    }

    fn residual_demand(&self, instance: &Instance, patient: usize, service: usize) -> u64 {
        instance.demand(patient, service)
            - self.patient_service_hours[patient * instance.s() + service]
    }

    /// Exact objective after the move, computed from the rate vectors with
    /// only the touched entities overridden.
    fn objective_after(
        &self,
        instance: &Instance,
        weights: &PenaltyWeights,
        mv: Move,
    ) -> Rational {
        let mut fill_over: Vec<(usize, Rational)> = Vec::new();
        let mut util_over: Vec<(usize, Rational)> = Vec::new();
        match mv {
            Move::Insert {
                caregiver, patient, ..
            } => {
                fill_over.push((patient, self.shifted_fill(instance, patient, 1)));
                util_over.push((caregiver, self.shifted_util(instance, caregiver, 1)));
            }
            Move::Reallocate {
                from_caregiver,
                to_caregiver,
                ..
            } => {
                util_over.push((from_caregiver, self.shifted_util(instance, from_caregiver, -1)));
                util_over.push((to_caregiver, self.shifted_util(instance, to_caregiver, 1)));
            }
            Move::Rebalance {
                from_patient,
                to_patient,
                ..
            } => {
                fill_over.push((from_patient, self.shifted_fill(instance, from_patient, -1)));
                fill_over.push((to_patient, self.shifted_fill(instance, to_patient, 1)));
            }
        }
        objective_from_rates(instance, weights, &self.fill, &self.util, &fill_over, &util_over)
    }

    fn shifted_fill(&self, instance: &Instance, patient: usize, delta: i64) -> Rational {
        let hours = (self.patient_hours[patient] as i64 + delta) as u64;
        Rational::from(hours) / Rational::from(instance.total_demand(patient))
    }

    fn shifted_util(&self, instance: &Instance, caregiver: usize, delta: i64) -> Rational {
        let hours = (self.caregiver_hours[caregiver] as i64 + delta) as u64;
        Rational::from(hours) / Rational::from(instance.capacity(caregiver))
    }

    fn apply(
        &mut self,
        instance: &Instance,
        current: &mut Assignment,
        mv: Move,
        delta: &Rational,
    ) {
        let s = instance.s();
        match mv {
            Move::Insert {
                caregiver,
                patient,
                service,
            } => {
                current.add_hours(caregiver, patient, service, 1);
                self.patient_hours[patient] += 1;
                self.caregiver_hours[caregiver] += 1;
                self.patient_service_hours[patient * s + service] += 1;
                self.cost += instance.unit_cost(caregiver, patient, service);
                self.fill[patient] = self.shifted_fill(instance, patient, 0);
                self.util[caregiver] = self.shifted_util(instance, caregiver, 0);
            }
            Move::Reallocate {
                patient,
                service,
                from_caregiver,
                to_caregiver,
            } => {
                let h = current.hours(from_caregiver, patient, service);
                current.set_hours(from_caregiver, patient, service, h - 1);
                current.add_hours(to_caregiver, patient, service, 1);
                self.caregiver_hours[from_caregiver] -= 1;
                self.caregiver_hours[to_caregiver] += 1;
                self.cost += &(instance.unit_cost(to_caregiver, patient, service)
                    - instance.unit_cost(from_caregiver, patient, service));
                self.util[from_caregiver] = self.shifted_util(instance, from_caregiver, 0);
                self.util[to_caregiver] = self.shifted_util(instance, to_caregiver, 0);
            }
            Move::Rebalance {
                caregiver,
                service,
                from_patient,
                to_patient,
            } => {
                let h = current.hours(caregiver, from_patient, service);
                current.set_hours(caregiver, from_patient, service, h - 1);
                current.add_hours(caregiver, to_patient, service, 1);
                self.patient_hours[from_patient] -= 1;
                self.patient_hours[to_patient] += 1;
                self.patient_service_hours[from_patient * s + service] -= 1;
                self.patient_service_hours[to_patient * s + service] += 1;
                self.cost += &(instance.unit_cost(caregiver, to_patient, service)
                    - instance.unit_cost(caregiver, from_patient, service));
                self.fill[from_patient] = self.shifted_fill(instance, from_patient, 0);
                self.fill[to_patient] = self.shifted_fill(instance, to_patient, 0);
            }
        }
        self.objective += delta;
    }
}

/// Objective from rate vectors, with the listed overrides substituted.
/// Mirrors the model evaluation: utility term over all patients, penalty
/// terms over included entities only.
fn objective_from_rates(
    instance: &Instance,
    weights: &PenaltyWeights,
    fill: &[Rational],
    util: &[Rational],
    fill_over: &[(usize, Rational)],
    util_over: &[(usize, Rational)],
) -> Rational {
    let fill_at = |j: usize| -> &Rational {
        fill_over
            .iter()
            .find(|(idx, _)| *idx == j)
            .map(|(_, v)| v)
            .unwrap_or(&fill[j])
    };
    let util_at = |i: usize| -> &Rational {
        util_over
            .iter()
            .find(|(idx, _)| *idx == i)
            .map(|(_, v)| v)
            .unwrap_or(&util[i])
    };

    let mut utility_term = Rational::zero();
    let mut fill_sum = Rational::zero();
    let mut max_fill: Option<Rational> = None;
    let mut included_patients = 0u64;
    for j in 0..instance.m() {
        let f = fill_at(j);
        utility_term += instance.utility(j) * f;
        if instance.patient_included(j) {
            included_patients += 1;
            fill_sum += f;
            max_fill = Some(match max_fill.take() {
                Some(best) if best >= *f => best,
                _ => f.clone(),
            });
        }
    }

    let mut util_sum = Rational::zero();
    let mut max_util: Option<Rational> = None;
    let mut included_caregivers = 0u64;
    for i in 0..instance.n() {
        if instance.caregiver_included(i) {
            let u = util_at(i);
            included_caregivers += 1;
            util_sum += u;
            max_util = Some(match max_util.take() {
                Some(best) if best >= *u => best,
                _ => u.clone(),
            });
        }
    }

    let mut objective = utility_term;
    if let Some(max_fill) = max_fill {
        objective -=
            weights.theta() * &(max_fill * Rational::from(included_patients) - fill_sum);
    }
    if let Some(max_util) = max_util {
        objective -=
            weights.alpha() * &(max_util * Rational::from(included_caregivers) - util_sum);
    }
    objective
}

fn pair_moves(
    instance: &Instance,
    weights: &PenaltyWeights,
    current: &Assignment,
    tracker: &Tracker,
    focus_patient: usize,
    focus_caregiver: usize,
) -> Vec<ScoredMove> {
    let (n, s) = (instance.n(), instance.s());
    let j = focus_patient;
    let i = focus_caregiver;
    let budget_left = instance.budget() - &tracker.cost;
    let links_i = current.caregiver_links(i);
    let links_j = current.patient_links(j);
    let pair_ij_linked = current.link(i, j);

    let new_link_fits = |freed_caregiver_link: bool, freed_patient_link: bool| -> bool {
        if pair_ij_linked {
            return true;
        }
        let caregiver_after = links_i - u64::from(freed_caregiver_link) + 1;
        let patient_after = links_j - u64::from(freed_patient_link) + 1;
        caregiver_after <= instance.max_patients_per_caregiver(i)
            && patient_after <= instance.max_caregivers_per_patient(j)
    };

    let mut candidates: Vec<Move> = Vec::new();

    // Insert: one more hour of service k from i to j.
    if tracker.residual_capacity(instance, i) >= 1 {
        for k in 0..s {
            if !instance.skill(i, k) || tracker.residual_demand(instance, j, k) == 0 {
                continue;
            }
            if *instance.unit_cost(i, j, k) > budget_left {
                continue;
            }
            if !new_link_fits(false, false) {
                continue;
            }
            candidates.push(Move::Insert {
                caregiver: i,
                patient: j,
                service: k,
            });
        }
    }

    // Reallocate: take one of j's assigned hours away from another caregiver.
    if tracker.residual_capacity(instance, i) >= 1 {
        for k in 0..s {
            if !instance.skill(i, k) {
                continue;
            }
            for donor in 0..n {
                if donor == i || current.hours(donor, j, k) == 0 {
                    continue;
                }
                let net = instance.unit_cost(i, j, k) - instance.unit_cost(donor, j, k);
                if net > budget_left {
                    continue;
                }
                let frees_patient_link = current.pair_hours(donor, j) == 1;
                if !new_link_fits(false, frees_patient_link) {
                    continue;
                }
                candidates.push(Move::Reallocate {
                    patient: j,
                    service: k,
                    from_caregiver: donor,
                    to_caregiver: i,
                });
            }
        }
    }

    // Rebalance: shift an hour of i's time from its highest-fill patient.
    let donor_patient = (0..instance.m())
        .filter(|&p| p != j && current.pair_hours(i, p) > 0)
        .max_by(|&a, &b| tracker.fill[a].cmp(&tracker.fill[b]).then(b.cmp(&a)));
    if let Some(from_patient) = donor_patient {
        for k in 0..s {
            if current.hours(i, from_patient, k) == 0
                || tracker.residual_demand(instance, j, k) == 0
                || !instance.skill(i, k)
            {
                continue;
            }
            let net = instance.unit_cost(i, j, k) - instance.unit_cost(i, from_patient, k);
            if net > budget_left {
                continue;
            }
            let frees_caregiver_link = current.pair_hours(i, from_patient) == 1;
            if !new_link_fits(frees_caregiver_link, false) {
                continue;
            }
            candidates.push(Move::Rebalance {
                caregiver: i,
                service: k,
                from_patient,
                to_patient: j,
            });
        }
    }

    // Validate each candidate against the full constraint set, then score.
    let mut scored = Vec::with_capacity(candidates.len());
    for mv in candidates {
        let mut successor = current.clone();
        apply_hours(&mut successor, mv);
        let report = check_feasibility(instance, &successor)
            .expect("successor keeps instance dimensions");
        if !report.is_feasible() {
            continue;
        }
        let after = tracker.objective_after(instance, weights, mv);
        let delta = &after - &tracker.objective;
        scored.push(ScoredMove { mv, delta });
    }
    scored
}

fn apply_hours(x: &mut Assignment, mv: Move) {
    match mv {
        Move::Insert {
            caregiver,
            patient,
            service,
        } => x.add_hours(caregiver, patient, service, 1),
        Move::Reallocate {
            patient,
            service,
            from_caregiver,
            to_caregiver,
        } => {
            let h = x.hours(from_caregiver, patient, service);
            x.set_hours(from_caregiver, patient, service, h - 1);
            x.add_hours(to_caregiver, patient, service, 1);
        }
        Move::Rebalance {
            caregiver,
            service,
            from_patient,
            to_patient,
        } => {
            let h = x.hours(caregiver, from_patient, service);
            x.set_hours(caregiver, from_patient, service, h - 1);
            x.add_hours(caregiver, to_patient, service, 1);
        }
    }
}

/// Candidate moves for one (patient, caregiver) focus pair, each validated
/// feasible and scored with its exact objective delta.
///
/// The current assignment must be feasible and match the instance; this is
/// the caller's contract, enforced by assertion.
pub fn neighborhood(
    instance: &Instance,
    weights: &PenaltyWeights,
    current: &Assignment,
    focus_patient: usize,
    focus_caregiver: usize,
) -> Vec<ScoredMove> {
    assert_eq!(
        current.dims(),
        (instance.n(), instance.m(), instance.s()),
        "assignment dimensions must match the instance"
    );
    assert!(focus_patient < instance.m() && focus_caregiver < instance.n());
    let tracker = Tracker::rebuild(instance, weights, current);
    pair_moves(instance, weights, current, &tracker, focus_patient, focus_caregiver)
}

fn is_tabu(state: &TabuState, mv: Move) -> bool {
    let expiry_hit = |expiries: &[u64], idx: usize| expiries[idx] > state.iteration;
    mv.touched_caregivers()
        .iter()
        .flatten()
        .any(|&c| expiry_hit(&state.tabu_caregivers, c))
        || mv
            .touched_patients()
            .iter()
            .flatten()
            .any(|&p| expiry_hit(&state.tabu_patients, p))
}

fn mark_tabu(state: &mut TabuState, mv: Move, tenure: u64) {
    let expiry = state.iteration + tenure;
    for c in mv.touched_caregivers().iter().flatten() {
        state.tabu_caregivers[*c] = expiry;
    }
    for p in mv.touched_patients().iter().flatten() {
        state.tabu_patients[*p] = expiry;
    }
}

/// Improves `initial` by tabu search and returns the incumbent, whose
/// objective never falls below the initial one. Deterministic for a fixed
/// seed whenever the search ends by convergence rather than the wall clock.
pub fn tabu_improve(
    instance: &Instance,
    weights: &PenaltyWeights,
    initial: &Assignment,
    params: &TabuParams,
) -> Result<Assignment, TabuError> {
    if params.tenure < 1 {
        return Err(TabuError::InvalidParams("tenure must be at least 1".into()));
    }
    if params.max_stall < 1 {
        return Err(TabuError::InvalidParams("max_stall must be at least 1".into()));
    }
    if params.time_limit.is_zero() {
        return Err(TabuError::InvalidParams("time_limit must be positive".into()));
    }
    let report = check_feasibility(instance, initial)?;
    if !report.is_feasible() {
        return Err(TabuError::InfeasibleInitial(report));
    }

    let (n, m) = (instance.n(), instance.m());
    let mut tracker = Tracker::rebuild(instance, weights, initial);
    let mut state = TabuState {
        tabu_caregivers: vec![0; n],
        tabu_patients: vec![0; m],
        incumbent: initial.clone(),
        incumbent_objective: tracker.objective.clone(),
        current: initial.clone(),
        iteration: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let started = Instant::now();
    let mut stall = 0u64;
    let mut accepted = 0u64;

    'outer: while started.elapsed() < params.time_limit {
        let max_fill = tracker.max_fill(instance);
        let mut under_served: Vec<usize> = (0..m)
            .filter(|&j| instance.patient_included(j) && tracker.fill[j] < max_fill)
            .collect();
        under_served.sort_by(|&a, &b| tracker.fill[a].cmp(&tracker.fill[b]).then(a.cmp(&b)));
        if under_served.is_empty() {
            break;
        }

        let mut improved = false;
        for &j in &under_served {
            if started.elapsed() >= params.time_limit {
                break 'outer;
            }
            // Caregivers with hours left, most promising for this patient
            // first: sort by min(residual hours, total coverable demand).
            let mut eligible: Vec<(usize, u64)> = (0..n)
                .filter_map(|i| {
                    let residual = tracker.residual_capacity(instance, i);
                    if residual == 0 {
                        return None;
                    }
                    let coverable: u64 = (0..instance.s())
                        .filter(|&k| instance.skill(i, k))
                        .map(|k| tracker.residual_demand(instance, j, k))
                        .sum();
                    Some((i, residual.min(coverable)))
                })
                .collect();
            eligible.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

            for (i, _) in eligible {
                let moves = pair_moves(instance, weights, &state.current, &tracker, j, i);
                let mut best_delta: Option<Rational> = None;
                let mut ties: Vec<&ScoredMove> = Vec::new();
                for sm in &moves {
                    let aspirating =
                        &tracker.objective + &sm.delta > state.incumbent_objective;
                    if is_tabu(&state, sm.mv) && !aspirating {
                        continue;
                    }
                    match &best_delta {
                        Some(best) if sm.delta < *best => {}
                        Some(best) if sm.delta == *best => ties.push(sm),
                        _ => {
                            best_delta = Some(sm.delta.clone());
                            ties.clear();
                            ties.push(sm);
                        }
                    }
                }
                let chosen = match ties.len() {
                    0 => continue,
                    1 => ties[0].clone(),
                    len => ties[rng.random_range(0..len)].clone(),
                };

                tracker.apply(instance, &mut state.current, chosen.mv, &chosen.delta);
                accepted += 1;
                if accepted.is_multiple_of(100) {
                    let fresh = Tracker::rebuild(instance, weights, &state.current);
                    debug_assert_eq!(fresh.objective, tracker.objective);
                    tracker = fresh;
                }
                mark_tabu(&mut state, chosen.mv, params.tenure);
                if tracker.objective > state.incumbent_objective {
                    state.incumbent = state.current.clone();
                    state.incumbent_objective = tracker.objective.clone();
                    improved = true;
                }
            }
        }

        state.iteration += 1;
        if improved {
            stall = 0;
        } else {
            stall += 1;
            if stall >= params.max_stall {
                break;
            }
        }
    }

    // Fill sweep: same structure as the greedy second phase, run on the
    // working assignment with no artificial fill cap.
    let mut fill_state = GreedyState::from_assignment(instance, Rational::one(), &state.current);
    crate::greedy::phase_two(instance, &mut fill_state, &mut state.current);
    let final_objective = evaluate_objective(instance, weights, &state.current)?;
    if final_objective > state.incumbent_objective {
        state.incumbent = state.current;
        state.incumbent_objective = final_objective;
    }

    debug_assert!(check_feasibility(instance, &state.incumbent)
        .map(|r| r.is_feasible())
        .unwrap_or(false));
    Ok(state.incumbent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{solve_exact, SolveLimits};
    use crate::greedy::greedy_construct;
    use crate::model::InstanceBuilder;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn weights(theta: &str, alpha: &str) -> PenaltyWeights {
        PenaltyWeights::new(r(theta), r(alpha)).unwrap()
    }

    fn quick_params(seed: u64) -> TabuParams {
        TabuParams {
            time_limit: Duration::from_secs(30),
            tenure: 7,
            max_stall: 25,
            seed,
        }
    }

    #[test]
    fn saturated_pair_has_no_moves() {
        // Caregiver at full utilization, patient fully served.
        let instance = InstanceBuilder::new(1, 1, 1)
            .demand(&[2])
            .capacity(&[2])
            .uniform_cost(r("1"))
            .budget(r("10"))
            .build()
            .unwrap();
        let mut x = Assignment::zeros(1, 1, 1);
        x.set_hours(0, 0, 0, 2);
        let moves = neighborhood(&instance, &PenaltyWeights::zero(), &x, 0, 0);
        assert!(moves.is_empty());
    }

    #[test]
    fn single_insert_when_one_hour_fits() {
        let instance = InstanceBuilder::new(1, 1, 1)
            .demand(&[1])
            .capacity(&[1])
            .uniform_cost(r("1"))
            .budget(r("1"))
            .utilities(vec![r("4")])
            .build()
            .unwrap();
        let x = Assignment::zeros(1, 1, 1);
        let moves = neighborhood(&instance, &PenaltyWeights::zero(), &x, 0, 0);
        assert_eq!(moves.len(), 1);
        assert_eq!(
            moves[0].mv,
            Move::Insert {
                caregiver: 0,
                patient: 0,
                service: 0
            }
        );
        assert_eq!(moves[0].delta, r("4"));
    }

    #[test]
    fn move_scores_match_full_reevaluation() {
        // Every generated move's delta must equal the from-scratch objective
        // difference, across a spread of instances and weights.
        let mut samples = 0usize;
        for seed in 0..24u64 {
            let instance = InstanceBuilder::new(2, 3, 2)
                .skills(&[1, 1, 1, (seed % 2) as u8])
                .demand(&[2, 1, 0, 2, 1, (seed % 3)])
                .capacity(&[3, 2 + (seed % 2)])
                .uniform_cost(Rational::ratio(1 + (seed as i64 % 3), 2))
                .budget(Rational::from(4 + seed % 5))
                .utilities(vec![r("5"), r("2"), r("3")])
                .build()
                .unwrap();
            let w = weights(&format!("{}", seed % 4), &format!("{}", (seed + 1) % 3));
            let (constructed, _) = greedy_construct(&instance, Rational::one()).unwrap();
            let zero = Assignment::zeros(instance.n(), instance.m(), instance.s());
            for x in [constructed, zero] {
                let base = evaluate_objective(&instance, &w, &x).unwrap();
                for j in 0..instance.m() {
                    for i in 0..instance.n() {
                        for sm in neighborhood(&instance, &w, &x, j, i) {
                            let mut successor = x.clone();
                            apply_hours(&mut successor, sm.mv);
                            let fresh = evaluate_objective(&instance, &w, &successor).unwrap();
                            assert_eq!(&fresh - &base, sm.delta, "move {:?}", sm.mv);
                            samples += 1;
                        }
                    }
                }
            }
        }
        assert!(samples >= 100, "only {samples} sampled moves");
    }

    #[test]
    fn optimal_initial_keeps_its_objective() {
        let instance = InstanceBuilder::new(2, 2, 1)
            .demand(&[1, 1])
            .capacity(&[1, 1])
            .uniform_cost(r("1"))
            .budget(r("2"))
            .utilities(vec![r("3"), r("3")])
            .build()
            .unwrap();
        let w = weights("1", "1");
        let optimal = solve_exact(&instance, &w, &SolveLimits::default()).unwrap();
        let improved = tabu_improve(&instance, &w, &optimal.assignment, &quick_params(1)).unwrap();
        let objective = evaluate_objective(&instance, &w, &improved).unwrap();
        assert_eq!(objective, optimal.metrics.objective);
    }

    #[test]
    fn zero_initial_with_ample_budget_strictly_improves() {
        let instance = InstanceBuilder::new(2, 2, 1)
            .demand(&[2, 2])
            .capacity(&[2, 2])
            .uniform_cost(r("1"))
            .budget(r("100"))
            .utilities(vec![r("5"), r("5")])
            .build()
            .unwrap();
        let w = PenaltyWeights::zero();
        let zero = Assignment::zeros(2, 2, 1);
        let improved = tabu_improve(&instance, &w, &zero, &quick_params(2)).unwrap();
        let objective = evaluate_objective(&instance, &w, &improved).unwrap();
        assert!(objective.is_positive());

        // The fill sweep should reach what greedy reaches here, and neither
        // may beat the exact optimum.
        let (greedy, _) = greedy_construct(&instance, Rational::one()).unwrap();
        let greedy_objective = evaluate_objective(&instance, &w, &greedy).unwrap();
        let exact = solve_exact(&instance, &w, &SolveLimits::default()).unwrap();
        assert!(objective >= greedy_objective);
        assert!(objective <= exact.metrics.objective);
    }

    #[test]
    fn gap_to_exact_never_widens() {
        // Phase 1's one-caregiver-per-patient rule makes greedy suboptimal
        // here; tabu must not make things worse.
        let instance = InstanceBuilder::new(2, 2, 1)
            .demand(&[2, 2])
            .capacity(&[2, 2])
            .max_caregivers_per_patient(&[2, 2])
            .max_patients_per_caregiver(&[1, 1])
            .uniform_cost(r("1"))
            .budget(r("3"))
            .utilities(vec![r("10"), r("1")])
            .build()
            .unwrap();
        let w = weights("2", "0");
        let (greedy, _) = greedy_construct(&instance, Rational::one()).unwrap();
        let greedy_objective = evaluate_objective(&instance, &w, &greedy).unwrap();
        let improved = tabu_improve(&instance, &w, &greedy, &quick_params(3)).unwrap();
        let tabu_objective = evaluate_objective(&instance, &w, &improved).unwrap();
        let exact = solve_exact(&instance, &w, &SolveLimits::default()).unwrap();
        assert!(tabu_objective >= greedy_objective);
        assert!(tabu_objective <= exact.metrics.objective);
    }

    #[test]
    fn infeasible_initial_is_rejected() {
        let instance = InstanceBuilder::new(1, 1, 1)
            .demand(&[1])
            .capacity(&[1])
            .uniform_cost(r("1"))
            .budget(r("0"))
            .build()
            .unwrap();
        let mut x = Assignment::zeros(1, 1, 1);
        x.set_hours(0, 0, 0, 1); // violates the zero budget
        assert!(matches!(
            tabu_improve(&instance, &PenaltyWeights::zero(), &x, &quick_params(0)),
            Err(TabuError::InfeasibleInitial(_))
        ));
    }

    #[test]
    fn invalid_params_are_rejected() {
        let instance = InstanceBuilder::new(1, 1, 1).demand(&[1]).capacity(&[1]).build().unwrap();
        let x = Assignment::zeros(1, 1, 1);
        let mut params = quick_params(0);
        params.tenure = 0;
        assert!(matches!(
            tabu_improve(&instance, &PenaltyWeights::zero(), &x, &params),
            Err(TabuError::InvalidParams(_))
        ));
    }

    #[test]
    fn tabu_marks_expire_after_the_tenure() {
        let mut state = TabuState {
            tabu_caregivers: vec![0; 3],
            tabu_patients: vec![0; 2],
            incumbent: Assignment::zeros(3, 2, 1),
            incumbent_objective: Rational::zero(),
            current: Assignment::zeros(3, 2, 1),
            iteration: 3,
        };
        let mv = Move::Reallocate {
            patient: 1,
            service: 0,
            from_caregiver: 0,
            to_caregiver: 1,
        };
        assert!(!is_tabu(&state, mv));
        mark_tabu(&mut state, mv, 2);
        // Tabu for the rest of this iteration and the next `tenure - 1`.
        assert!(is_tabu(&state, mv));
        state.iteration = 4;
        assert!(is_tabu(&state, mv));
        state.iteration = 5;
        assert!(!is_tabu(&state, mv));

        // A move touching only unmarked entities never was tabu.
        let untouched = Move::Insert {
            caregiver: 2,
            patient: 0,
            service: 0,
        };
        state.iteration = 3;
        assert!(is_tabu(&state, mv));
        assert!(!is_tabu(&state, untouched));
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let instance = InstanceBuilder::new(3, 3, 2)
            .demand(&[2, 1, 1, 2, 0, 2])
            .capacity(&[3, 2, 2])
            .uniform_cost(r("1"))
            .budget(r("6"))
            .utilities(vec![r("4"), r("6"), r("2")])
            .build()
            .unwrap();
        let w = weights("3", "1");
        let (initial, _) = greedy_construct(&instance, Rational::one()).unwrap();
        let a = tabu_improve(&instance, &w, &initial, &quick_params(9)).unwrap();
        let b = tabu_improve(&instance, &w, &initial, &quick_params(9)).unwrap();
        assert_eq!(a, b);
    }
}
