//! Two-phase greedy construction of an initial feasible assignment.
//!
//! Phase 1 walks patients in descending utility-per-demanded-hour order and
//! gives each at most one previously unused caregiver, preferring candidates
//! whose cost stays within a budget-per-utility threshold. Phase 2 sweeps the
//! remaining demand with every remaining caregiver, with no one-caregiver
//! restriction. Both phases assign hours by solving, per (caregiver, patient)
//! pair, a small subproblem: maximize assigned hours under per-service caps,
//! an aggregate cap, and the residual budget. Every hour is worth the same
//! there, so filling services cheapest-first is optimal.

use crate::model::{Assignment, Instance};
use crate::rational::Rational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GreedyError {
    #[error("fill-rate target must lie in (0, 1], got {0}")]
    InvalidBetaTarget(Rational),
}

/// Mutable bookkeeping for the construction: residual quantities, the
/// cost-efficiency threshold, and which caregivers/patients are still in
/// play. Kept after construction so callers can inspect what the heuristic
/// saw and reuse the fill sweep.
#[derive(Debug, Clone)]
pub struct GreedyState {
    beta_target: Rational,
    residual_budget: Rational,
    residual_capacity: Vec<u64>,
    residual_demand: Vec<u64>, // m*s
    /// Per-patient scalar demand counter. Updated by `total / beta_target`
    /// per assignment, so it drifts from the row sum whenever the target is
    /// below one; it feeds the subproblem's aggregate cap.
    residual_demand_total: Vec<Rational>,
    residual_utility: Vec<Rational>,
    residual_patient_cap: Vec<u64>,   // caregivers still allowed per patient
    residual_caregiver_cap: Vec<u64>, // patients still allowed per caregiver
    /// Budget available per unit of utility: budget / total utility.
    cost_per_utility: Rational,
    min_unit_cost: Rational,
    phase1_used: Vec<bool>,
    phase1_choice: Vec<Option<usize>>,
    active_caregivers: Vec<bool>,
    active_patients: Vec<bool>,
    served_by: Vec<Vec<usize>>,  // patients served by each caregiver
    servers_of: Vec<Vec<usize>>, // caregivers serving each patient
    patient_order: Vec<usize>,
}

impl GreedyState {
    /// Fresh state for an untouched instance.
    pub fn new(instance: &Instance, beta_target: Rational) -> Result<Self, GreedyError> {
        if !beta_target.is_positive() || beta_target > Rational::one() {
            return Err(GreedyError::InvalidBetaTarget(beta_target));
        }
        let (n, m) = (instance.n(), instance.m());
        let total_utility: Rational = instance.utility_all().iter().sum();
        let cost_per_utility = if total_utility.is_zero() {
            Rational::zero()
        } else {
            instance.budget() / &total_utility
        };
        Ok(GreedyState {
            beta_target,
            residual_budget: instance.budget().clone(),
            residual_capacity: instance.capacity_all().to_vec(),
            residual_demand: instance.demand_flat().to_vec(),
            residual_demand_total: (0..m)
                .map(|j| Rational::from(instance.total_demand(j)))
                .collect(),
            residual_utility: instance.utility_all().to_vec(),
            residual_patient_cap: instance.max_caregivers_per_patient_all().to_vec(),
            residual_caregiver_cap: instance.max_patients_per_caregiver_all().to_vec(),
            cost_per_utility,
            min_unit_cost: instance.min_unit_cost(),
            phase1_used: vec![false; n],
            phase1_choice: vec![None; m],
            active_caregivers: vec![true; n],
            // Patients demanding nothing are excluded from both phases.
            active_patients: (0..m).map(|j| instance.patient_included(j)).collect(),
            served_by: vec![Vec::new(); n],
            servers_of: vec![Vec::new(); m],
            patient_order: sorted_patients(instance),
        })
    }

    /// State as if construction had produced `assignment`: residuals derived
    /// from the hour tensor and the model-level cardinality counts. Used to
    /// run the phase-2 fill sweep on top of an arbitrary feasible solution.
    pub(crate) fn from_assignment(
        instance: &Instance,
        beta_target: Rational,
        assignment: &Assignment,
    ) -> Self {
        let (n, m, s) = (instance.n(), instance.m(), instance.s());
        let spent = crate::model::total_cost(instance, assignment)
            .expect("assignment dimensions match instance");
        let residual_budget = {
            let left = instance.budget() - &spent;
            if left.is_negative() {
                Rational::zero()
            } else {
                left
            }
        };
        let residual_capacity: Vec<u64> = (0..n)
            .map(|i| instance.capacity(i).saturating_sub(assignment.caregiver_hours(i)))
            .collect();
        let residual_demand: Vec<u64> = (0..m)
            .flat_map(|j| {
                (0..s).map(move |k| {
                    instance
                        .demand(j, k)
                        .saturating_sub(assignment.patient_service_hours(j, k))
                })
            })
            .collect();
        let residual_demand_total: Vec<Rational> = (0..m)
            .map(|j| {
                Rational::from(
                    residual_demand[j * s..(j + 1) * s]
                        .iter()
                        .sum::<u64>(),
                )
            })
            .collect();
        let residual_utility: Vec<Rational> = (0..m)
            .map(|j| {
                let total = instance.total_demand(j);
                if total == 0 {
                    instance.utility(j).clone()
                } else {
                    instance.utility(j) * &(residual_demand_total[j].clone() / Rational::from(total))
                }
            })
            .collect();
        let residual_patient_cap: Vec<u64> = (0..m)
            .map(|j| {
                instance
                    .max_caregivers_per_patient(j)
                    .saturating_sub(assignment.patient_links(j))
            })
            .collect();
        let residual_caregiver_cap: Vec<u64> = (0..n)
            .map(|i| {
                instance
                    .max_patients_per_caregiver(i)
                    .saturating_sub(assignment.caregiver_links(i))
            })
            .collect();
        let total_residual_utility: Rational = residual_utility.iter().sum();
        let cost_per_utility = if total_residual_utility.is_zero() {
            Rational::zero()
        } else {
            &residual_budget / &total_residual_utility
        };
        let active_caregivers = (0..n)
            .map(|i| residual_caregiver_cap[i] > 0 && residual_capacity[i] > 0)
            .collect();
        let active_patients = (0..m)
            .map(|j| {
                instance.patient_included(j)
                    && residual_patient_cap[j] > 0
                    && !residual_demand_total[j].is_zero()
            })
            .collect();
        GreedyState {
            beta_target,
            residual_budget,
            residual_capacity,
            residual_demand,
            residual_demand_total,
            residual_utility,
            residual_patient_cap,
            residual_caregiver_cap,
            cost_per_utility,
            min_unit_cost: instance.min_unit_cost(),
            phase1_used: vec![false; n],
            phase1_choice: vec![None; m],
            active_caregivers,
            active_patients,
            served_by: (0..n)
                .map(|i| (0..m).filter(|&j| assignment.link(i, j)).collect())
                .collect(),
            servers_of: (0..m)
                .map(|j| (0..n).filter(|&i| assignment.link(i, j)).collect())
                .collect(),
            patient_order: sorted_patients(instance),
        }
    }

    pub fn beta_target(&self) -> &Rational {
        &self.beta_target
    }

    pub fn residual_budget(&self) -> &Rational {
        &self.residual_budget
    }

    pub fn residual_capacity(&self, caregiver: usize) -> u64 {
        self.residual_capacity[caregiver]
    }

    pub fn residual_demand(&self, patient: usize, service: usize) -> u64 {
        self.residual_demand[patient * self.services() + service]
    }

    pub fn residual_demand_total(&self, patient: usize) -> &Rational {
        &self.residual_demand_total[patient]
    }

    pub fn residual_utility(&self, patient: usize) -> &Rational {
        &self.residual_utility[patient]
    }

    pub fn cost_per_utility(&self) -> &Rational {
        &self.cost_per_utility
    }

    pub fn min_unit_cost(&self) -> &Rational {
        &self.min_unit_cost
    }

    pub fn phase1_used(&self, caregiver: usize) -> bool {
        self.phase1_used[caregiver]
    }

    pub fn phase1_choice(&self, patient: usize) -> Option<usize> {
        self.phase1_choice[patient]
    }

    pub fn served_by(&self, caregiver: usize) -> &[usize] {
        &self.served_by[caregiver]
    }

    pub fn servers_of(&self, patient: usize) -> &[usize] {
        &self.servers_of[patient]
    }

    pub fn patient_order(&self) -> &[usize] {
        &self.patient_order
    }

    fn services(&self) -> usize {
        if self.servers_of.is_empty() {
            0
        } else {
            self.residual_demand.len() / self.servers_of.len()
        }
    }

    fn residual_row_sum(&self, patient: usize, s: usize) -> u64 {
        self.residual_demand[patient * s..(patient + 1) * s]
            .iter()
            .sum()
    }
}

/// Patients with positive demand, sorted by descending utility per demanded
/// hour; ties by ascending index.
fn sorted_patients(instance: &Instance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..instance.m())
        .filter(|&j| instance.patient_included(j))
        .collect();
    order.sort_by(|&a, &b| {
        let key_a = instance.utility(a) / &Rational::from(instance.total_demand(a));
        let key_b = instance.utility(b) / &Rational::from(instance.total_demand(b));
        key_b.cmp(&key_a).then(a.cmp(&b))
    });
    order
}

/// Maximize total hours subject to per-service caps, an aggregate cap, and a
/// budget. Every hour counts the same, so taking the cheapest services first
/// is optimal; ties by ascending service index.
fn cheapest_fill(
    costs: &[Rational],
    per_service_caps: &[u64],
    aggregate_cap: u64,
    budget: &Rational,
) -> Vec<u64> {
    let s = costs.len();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| costs[a].cmp(&costs[b]));
    let mut hours = vec![0u64; s];
    let mut remaining = aggregate_cap;
    let mut left = budget.clone();
    for k in order {
        if remaining == 0 {
            break;
        }
        let cap = per_service_caps[k].min(remaining);
        if cap == 0 {
            continue;
        }
        let take = if costs[k].is_zero() {
            cap
        } else {
            (&left / &costs[k]).floor_clamped(cap)
        };
        if take == 0 {
            continue;
        }
        hours[k] = take;
        remaining -= take;
        left -= &(&costs[k] * &Rational::from(take));
    }
    hours
}

/// Per-pair hour subproblem: the most residual-demand hours caregiver `i`
/// can give patient `j` within skills, residual capacity, the scaled demand
/// target, and the residual budget. Returns the zero vector when nothing
/// fits.
pub fn greedy_subproblem(
    instance: &Instance,
    caregiver: usize,
    patient: usize,
    state: &GreedyState,
) -> Vec<u64> {
    let s = instance.s();
    let costs: Vec<Rational> = (0..s)
        .map(|k| instance.unit_cost(caregiver, patient, k).clone())
        .collect();
    let caps: Vec<u64> = (0..s)
        .map(|k| {
            if instance.skill(caregiver, k) {
                state
                    .residual_demand(patient, k)
                    .min(state.residual_capacity[caregiver])
            } else {
                0
            }
        })
        .collect();
    let target = &state.beta_target * &state.residual_demand_total[patient];
    let aggregate = target.floor_clamped(state.residual_capacity[caregiver]);
    cheapest_fill(&costs, &caps, aggregate, &state.residual_budget)
}

struct Candidate {
    caregiver: usize,
    hours: Vec<u64>,
    partial_utility: Rational,
    cost: Rational,
}

fn pair_cost(instance: &Instance, caregiver: usize, patient: usize, hours: &[u64]) -> Rational {
    let mut cost = Rational::zero();
    for (k, &h) in hours.iter().enumerate() {
        if h > 0 {
            cost += instance.unit_cost(caregiver, patient, k) * &Rational::from(h);
        }
    }
    cost
}

impl GreedyState {
    /// Books one (caregiver, patient) assignment event: decrements the
    /// preference counters, budget, capacity, and demand residuals, and
    /// deactivates the caregiver when exhausted.
    fn apply_assignment(
        &mut self,
        instance: &Instance,
        x: &mut Assignment,
        caregiver: usize,
        patient: usize,
        hours: &[u64],
        cost: &Rational,
    ) {
        let s = instance.s();
        let total: u64 = hours.iter().sum();
        self.residual_caregiver_cap[caregiver] =
            self.residual_caregiver_cap[caregiver].saturating_sub(1);
        self.residual_patient_cap[patient] = self.residual_patient_cap[patient].saturating_sub(1);
        self.residual_budget -= cost;
        self.residual_demand_total[patient] -= Rational::from(total) / self.beta_target.clone();
        for (k, &h) in hours.iter().enumerate() {
            if h > 0 {
                x.add_hours(caregiver, patient, k, h);
                self.residual_demand[patient * s + k] -= h;
            }
        }
        self.residual_capacity[caregiver] -= total;
        if !self.served_by[caregiver].contains(&patient) {
            self.served_by[caregiver].push(patient);
        }
        if !self.servers_of[patient].contains(&caregiver) {
            self.servers_of[patient].push(caregiver);
        }
        if self.residual_caregiver_cap[caregiver] == 0 || self.residual_capacity[caregiver] == 0 {
            self.active_caregivers[caregiver] = false;
        }
    }
}

fn phase_one(instance: &Instance, state: &mut GreedyState, x: &mut Assignment) {
    let n = instance.n();
    let s = instance.s();
    let order = state.patient_order.clone();
    for &j in &order {
        if !state.active_patients[j] {
            continue;
        }
        let row_sum = state.residual_row_sum(j, s);

        let mut flag = false;
        let mut best: Option<Candidate> = None;
        for i in 0..n {
            if state.phase1_used[i] || !state.active_caregivers[i] {
                continue;
            }
            let hours = greedy_subproblem(instance, i, j, state);
            let total: u64 = hours.iter().sum();
            let partial_utility = if row_sum == 0 {
                Rational::zero()
            } else {
                &(Rational::from(total) / Rational::from(row_sum)) * &state.residual_utility[j]
            };
            let cost = pair_cost(instance, i, j, &hours);
            let best_utility = best
                .as_ref()
                .map(|b| b.partial_utility.clone())
                .unwrap_or_else(Rational::zero);
            let improves = partial_utility > best_utility;
            let cost_efficient = cost <= &partial_utility * &state.cost_per_utility;
            // Fallback bar starts at infinity: any first improver passes.
            let within_best_cost = best.as_ref().map(|b| cost <= b.cost).unwrap_or(true);
            if improves && cost_efficient {
                flag = true;
                best = Some(Candidate {
                    caregiver: i,
                    hours,
                    partial_utility,
                    cost,
                });
            } else if !flag && improves && within_best_cost {
                best = Some(Candidate {
                    caregiver: i,
                    hours,
                    partial_utility,
                    cost,
                });
            }
        }

        // No candidate with positive partial utility: skip without touching
        // any state.
        if let Some(chosen) = best {
            let caregiver = chosen.caregiver;
            state.phase1_used[caregiver] = true;
            state.phase1_choice[j] = Some(caregiver);
            state.residual_utility[j] -= &chosen.partial_utility;
            state.apply_assignment(instance, x, caregiver, j, &chosen.hours, &chosen.cost);
            if state.residual_patient_cap[j] == 0 || state.residual_row_sum(j, s) == 0 {
                state.active_patients[j] = false;
            }
        }

        let everyone_used = state.phase1_used.iter().filter(|&&u| u).count() == n;
        if state.residual_budget <= state.min_unit_cost || everyone_used {
            break;
        }
    }
}

/// Phase-2 fill sweep: every remaining patient against every remaining
/// caregiver, repeatedly taking whatever the subproblem can still assign.
/// Also reused as the post-improvement filler in the tabu search.
pub(crate) fn phase_two(instance: &Instance, state: &mut GreedyState, x: &mut Assignment) {
    let n = instance.n();
    let s = instance.s();
    let order = state.patient_order.clone();
    for &j in &order {
        if state.residual_budget <= state.min_unit_cost
            || !state.active_caregivers.iter().any(|&a| a)
        {
            break;
        }
        if !state.active_patients[j] {
            continue;
        }
        for i in 0..n {
            if !state.active_caregivers[i] {
                continue;
            }
            let hours = greedy_subproblem(instance, i, j, state);
            let total: u64 = hours.iter().sum();
            if total == 0 {
                continue;
            }
            let cost = pair_cost(instance, i, j, &hours);
            state.apply_assignment(instance, x, i, j, &hours, &cost);
            if state.residual_patient_cap[j] == 0
                || state.residual_row_sum(j, s) == 0
                || state.residual_budget <= state.min_unit_cost
            {
                state.active_patients[j] = false;
                break;
            }
        }
    }
}

/// Builds an initial feasible assignment with the two-phase construction.
/// `beta_target` is the fill-rate target in `(0, 1]`; 1 imposes no
/// artificial cap. Deterministic: identical inputs give identical outputs.
pub fn greedy_construct(
    instance: &Instance,
    beta_target: Rational,
) -> Result<(Assignment, GreedyState), GreedyError> {
    let mut state = GreedyState::new(instance, beta_target)?;
    let mut x = Assignment::zeros(instance.n(), instance.m(), instance.s());
    phase_one(instance, &mut state, &mut x);
    phase_two(instance, &mut state, &mut x);
    debug_assert!(crate::model::check_feasibility(instance, &x)
        .map(|r| r.is_feasible())
        .unwrap_or(false));
    Ok((x, state))
}
