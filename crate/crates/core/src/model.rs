//! Problem data types, feasibility checking, and objective evaluation.
//!
//! An [`Instance`] describes caregivers, patients, and care services: who can
//! do what (`skills`), how much care each patient needs per service
//! (`demand`), how many hours each caregiver can work (`capacity`),
//! preference caps on the number of partners per side, per-hour assignment
//! costs, a global budget, and per-patient utilities.
//!
//! An [`Assignment`] is the integer hour tensor `x[i][j][k]` (hours of
//! service `k` given by caregiver `i` to patient `j`) together with the
//! derived link matrix `z[i][j]`, which is 1 exactly when caregiver `i`
//! serves patient `j` for at least one hour. Links are never free variables:
//! they always follow the hours.
//!
//! The objective rewards total patient utility weighted by fill-rate and
//! penalizes, with weights [`PenaltyWeights`], each patient's deviation from
//! the maximum fill-rate (equity) and each caregiver's deviation from the
//! maximum utilization (efficacy).

use crate::rational::Rational;
use thiserror::Error;

/// Construction-time validation failure for instances and assignments.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("{field}: expected {expected} entries, found {found}")]
    WrongLength {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{field}[{index}]: {reason}")]
    BadEntry {
        field: &'static str,
        index: usize,
        reason: String,
    },
    #[error("{field}: {reason}")]
    BadValue { field: &'static str, reason: String },
}

/// Operation-level error: the assignment's shape does not match the instance.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error(
        "assignment dimensions {found_n}x{found_m}x{found_s} do not match \
         instance dimensions {n}x{m}x{s}"
    )]
    DimensionMismatch {
        n: usize,
        m: usize,
        s: usize,
        found_n: usize,
        found_m: usize,
        found_s: usize,
    },
}

/// A full caregiver-to-patient assignment problem.
///
/// Matrices and tensors are stored flat in row-major order; accessors do the
/// index arithmetic. Dimensions: `n` caregivers, `m` patients, `s` services.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    m: usize,
    s: usize,
    skills: Vec<bool>,                     // n*s
    demand: Vec<u64>,                      // m*s
    capacity: Vec<u64>,                    // n
    max_caregivers_per_patient: Vec<u64>,  // m
    max_patients_per_caregiver: Vec<u64>,  // n
    unit_cost: Vec<Rational>,              // n*m*s
    budget: Rational,
    utility: Vec<Rational>,                // m
    total_demand: Vec<u64>,                // m, cached row sums of demand
}

impl Instance {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn skill(&self, caregiver: usize, service: usize) -> bool {
        self.skills[caregiver * self.s + service]
    }

    #[inline]
    pub fn demand(&self, patient: usize, service: usize) -> u64 {
        self.demand[patient * self.s + service]
    }

    #[inline]
    pub fn capacity(&self, caregiver: usize) -> u64 {
        self.capacity[caregiver]
    }

    pub fn max_caregivers_per_patient(&self, patient: usize) -> u64 {
        self.max_caregivers_per_patient[patient]
    }

    pub fn max_patients_per_caregiver(&self, caregiver: usize) -> u64 {
        self.max_patients_per_caregiver[caregiver]
    }

    #[inline]
    pub fn unit_cost(&self, caregiver: usize, patient: usize, service: usize) -> &Rational {
        &self.unit_cost[(caregiver * self.m + patient) * self.s + service]
    }

    pub fn budget(&self) -> &Rational {
        &self.budget
    }

    pub fn utility(&self, patient: usize) -> &Rational {
        &self.utility[patient]
    }

    /// Total demanded hours of patient `j` across all services.
    pub fn total_demand(&self, patient: usize) -> u64 {
        self.total_demand[patient]
    }

    /// Patients with zero total demand are excluded from equity accounting:
    /// their fill-rate is defined as 1 and they contribute no deviation term.
    pub fn patient_included(&self, patient: usize) -> bool {
        self.total_demand[patient] > 0
    }

    /// Caregivers with zero capacity are excluded from efficacy accounting:
    /// their utilization is defined as 0 and they contribute no deviation term.
    pub fn caregiver_included(&self, caregiver: usize) -> bool {
        self.capacity[caregiver] > 0
    }

    /// Smallest unit cost over all (caregiver, patient, service) triples,
    /// or zero when the instance has no cost entries.
    pub fn min_unit_cost(&self) -> Rational {
        self.unit_cost
            .iter()
            .min()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn skills_flat(&self) -> &[bool] {
        &self.skills
    }

    pub fn demand_flat(&self) -> &[u64] {
        &self.demand
    }

    pub fn capacity_all(&self) -> &[u64] {
        &self.capacity
    }

    pub fn max_caregivers_per_patient_all(&self) -> &[u64] {
        &self.max_caregivers_per_patient
    }

    pub fn max_patients_per_caregiver_all(&self) -> &[u64] {
        &self.max_patients_per_caregiver
    }

    pub fn unit_cost_flat(&self) -> &[Rational] {
        &self.unit_cost
    }

    pub fn utility_all(&self) -> &[Rational] {
        &self.utility
    }

    fn check_dims(&self, assignment: &Assignment) -> Result<(), ModelError> {
        if assignment.n != self.n || assignment.m != self.m || assignment.s != self.s {
            return Err(ModelError::DimensionMismatch {
                n: self.n,
                m: self.m,
                s: self.s,
                found_n: assignment.n,
                found_m: assignment.m,
                found_s: assignment.s,
            });
        }
        Ok(())
    }
}

/// Builder for [`Instance`] with permissive defaults: all skills present,
/// zero demand, zero capacity, unconstraining preference caps, unit costs of
/// one, zero budget, and unit utilities.
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    n: usize,
    m: usize,
    s: usize,
    skills: Vec<bool>,
    demand: Vec<u64>,
    capacity: Vec<u64>,
    max_caregivers_per_patient: Vec<u64>,
    max_patients_per_caregiver: Vec<u64>,
    unit_cost: Vec<Rational>,
    budget: Rational,
    utility: Vec<Rational>,
}

impl InstanceBuilder {
    pub fn new(n: usize, m: usize, s: usize) -> Self {
        InstanceBuilder {
            n,
            m,
            s,
            skills: vec![true; n * s],
            demand: vec![0; m * s],
            capacity: vec![0; n],
            max_caregivers_per_patient: vec![(n as u64).max(1); m],
            max_patients_per_caregiver: vec![(m as u64).max(1); n],
            unit_cost: vec![Rational::one(); n * m * s],
            budget: Rational::zero(),
            utility: vec![Rational::one(); m],
        }
    }

    /// Skill matrix as 0/1 entries, row-major `n*s`.
    pub fn skills(mut self, flat: &[u8]) -> Self {
        self.skills = flat.iter().map(|&v| v != 0).collect();
        self
    }

    /// Demand matrix, row-major `m*s`.
    pub fn demand(mut self, flat: &[u64]) -> Self {
        self.demand = flat.to_vec();
        self
    }

    pub fn capacity(mut self, hours: &[u64]) -> Self {
        self.capacity = hours.to_vec();
        self
    }

    pub fn max_caregivers_per_patient(mut self, caps: &[u64]) -> Self {
        self.max_caregivers_per_patient = caps.to_vec();
        self
    }

    pub fn max_patients_per_caregiver(mut self, caps: &[u64]) -> Self {
        self.max_patients_per_caregiver = caps.to_vec();
        self
    }

    /// Cost tensor, row-major `n*m*s`.
    pub fn unit_costs(mut self, flat: Vec<Rational>) -> Self {
        self.unit_cost = flat;
        self
    }

    /// Same unit cost for every (caregiver, patient, service) triple.
    pub fn uniform_cost(mut self, cost: Rational) -> Self {
        self.unit_cost = vec![cost; self.n * self.m * self.s];
        self
    }

    pub fn budget(mut self, budget: Rational) -> Self {
        self.budget = budget;
        self
    }

    pub fn utilities(mut self, utilities: Vec<Rational>) -> Self {
        self.utility = utilities;
        self
    }

    pub fn build(self) -> Result<Instance, ValidationError> {
        fn check_len<T>(
            field: &'static str,
            values: &[T],
            expected: usize,
        ) -> Result<(), ValidationError> {
            if values.len() != expected {
                return Err(ValidationError::WrongLength {
                    field,
                    expected,
                    found: values.len(),
                });
            }
            Ok(())
        }

        let InstanceBuilder {
            n,
            m,
            s,
            skills,
            demand,
            capacity,
            max_caregivers_per_patient,
            max_patients_per_caregiver,
            unit_cost,
            budget,
            utility,
        } = self;

        check_len("skills", &skills, n * s)?;
        check_len("demand", &demand, m * s)?;
        check_len("capacity", &capacity, n)?;
        check_len("max_caregivers_per_patient", &max_caregivers_per_patient, m)?;
        check_len("max_patients_per_caregiver", &max_patients_per_caregiver, n)?;
        check_len("unit_cost", &unit_cost, n * m * s)?;
        check_len("utility", &utility, m)?;

        for (index, cap) in max_caregivers_per_patient.iter().enumerate() {
            if *cap < 1 {
                return Err(ValidationError::BadEntry {
                    field: "max_caregivers_per_patient",
                    index,
                    reason: "must be at least 1".into(),
                });
            }
        }
        for (index, cap) in max_patients_per_caregiver.iter().enumerate() {
            if *cap < 1 {
                return Err(ValidationError::BadEntry {
                    field: "max_patients_per_caregiver",
                    index,
                    reason: "must be at least 1".into(),
                });
            }
        }
        for (index, cost) in unit_cost.iter().enumerate() {
            if cost.is_negative() {
                return Err(ValidationError::BadEntry {
                    field: "unit_cost",
                    index,
                    reason: format!("negative value {cost}"),
                });
            }
        }
        if budget.is_negative() {
            return Err(ValidationError::BadValue {
                field: "budget",
                reason: format!("negative value {budget}"),
            });
        }
        for (index, p) in utility.iter().enumerate() {
            if p.is_negative() {
                return Err(ValidationError::BadEntry {
                    field: "utility",
                    index,
                    reason: format!("negative value {p}"),
                });
            }
        }

        let total_demand = (0..m)
            .map(|j| demand[j * s..(j + 1) * s].iter().sum())
            .collect();

        Ok(Instance {
            n,
            m,
            s,
            skills,
            demand,
            capacity,
            max_caregivers_per_patient,
            max_patients_per_caregiver,
            unit_cost,
            budget,
            utility,
            total_demand,
        })
    }
}

/// Equity and efficacy penalty weights: `theta` scales each patient's
/// fill-rate deviation from the maximum, `alpha` each caregiver's
/// utilization deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PenaltyWeights {
    theta: Rational,
    alpha: Rational,
}

impl PenaltyWeights {
    pub fn new(theta: Rational, alpha: Rational) -> Result<Self, ValidationError> {
        if theta.is_negative() {
            return Err(ValidationError::BadValue {
                field: "theta",
                reason: format!("negative value {theta}"),
            });
        }
        if alpha.is_negative() {
            return Err(ValidationError::BadValue {
                field: "alpha",
                reason: format!("negative value {alpha}"),
            });
        }
        Ok(PenaltyWeights { theta, alpha })
    }

    pub fn zero() -> Self {
        PenaltyWeights {
            theta: Rational::zero(),
            alpha: Rational::zero(),
        }
    }

    pub fn theta(&self) -> &Rational {
        &self.theta
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }
}

/// Integer hour tensor `x[i][j][k]` with the derived link matrix kept in
/// sync: `z[i][j] = 1` iff the pair has at least one assigned hour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    n: usize,
    m: usize,
    s: usize,
    hours: Vec<u64>, // n*m*s row-major
    links: Vec<bool>, // n*m
}

impl Assignment {
    pub fn zeros(n: usize, m: usize, s: usize) -> Self {
        Assignment {
            n,
            m,
            s,
            hours: vec![0; n * m * s],
            links: vec![false; n * m],
        }
    }

    pub fn from_hours(
        n: usize,
        m: usize,
        s: usize,
        hours: Vec<u64>,
    ) -> Result<Self, ValidationError> {
        if hours.len() != n * m * s {
            return Err(ValidationError::WrongLength {
                field: "hours",
                expected: n * m * s,
                found: hours.len(),
            });
        }
        let mut links = vec![false; n * m];
        for (pair, link) in links.iter_mut().enumerate() {
            *link = hours[pair * s..(pair + 1) * s].iter().any(|&h| h > 0);
        }
        Ok(Assignment { n, m, s, hours, links })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.s)
    }

    #[inline]
    fn idx(&self, caregiver: usize, patient: usize, service: usize) -> usize {
        (caregiver * self.m + patient) * self.s + service
    }

    #[inline]
    pub fn hours(&self, caregiver: usize, patient: usize, service: usize) -> u64 {
        self.hours[self.idx(caregiver, patient, service)]
    }

    /// Overwrites one entry and re-derives the pair's link.
    pub fn set_hours(&mut self, caregiver: usize, patient: usize, service: usize, value: u64) {
        let idx = self.idx(caregiver, patient, service);
        self.hours[idx] = value;
        let pair = caregiver * self.m + patient;
        self.links[pair] = self.hours[pair * self.s..(pair + 1) * self.s]
            .iter()
            .any(|&h| h > 0);
    }

    pub fn add_hours(&mut self, caregiver: usize, patient: usize, service: usize, delta: u64) {
        let current = self.hours(caregiver, patient, service);
        self.set_hours(caregiver, patient, service, current + delta);
    }

    #[inline]
    pub fn link(&self, caregiver: usize, patient: usize) -> bool {
        self.links[caregiver * self.m + patient]
    }

    /// Hours caregiver `i` spends on patient `j`, summed over services.
    pub fn pair_hours(&self, caregiver: usize, patient: usize) -> u64 {
        let pair = caregiver * self.m + patient;
        self.hours[pair * self.s..(pair + 1) * self.s].iter().sum()
    }

    /// Total hours worked by caregiver `i`.
    pub fn caregiver_hours(&self, caregiver: usize) -> u64 {
        (0..self.m).map(|j| self.pair_hours(caregiver, j)).sum()
    }

    /// Total hours received by patient `j`.
    pub fn patient_hours(&self, patient: usize) -> u64 {
        (0..self.n).map(|i| self.pair_hours(i, patient)).sum()
    }

    /// Hours of service `k` received by patient `j`, summed over caregivers.
    pub fn patient_service_hours(&self, patient: usize, service: usize) -> u64 {
        (0..self.n).map(|i| self.hours(i, patient, service)).sum()
    }

    pub fn caregiver_links(&self, caregiver: usize) -> u64 {
        (0..self.m).filter(|&j| self.link(caregiver, j)).count() as u64
    }

    pub fn patient_links(&self, patient: usize) -> u64 {
        (0..self.n).filter(|&i| self.link(i, patient)).count() as u64
    }

    pub fn hours_flat(&self) -> &[u64] {
        &self.hours
    }
}

/// One violated constraint, with the indices where it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Patients may not receive more of a service than they demanded.
    DemandExceeded {
        patient: usize,
        service: usize,
        assigned: u64,
        demanded: u64,
    },
    /// Total assignment cost may not exceed the budget.
    BudgetExceeded { cost: Rational, budget: Rational },
    /// Hours require the skill, an active link, and fit within capacity.
    HourBoundExceeded {
        caregiver: usize,
        patient: usize,
        service: usize,
        hours: u64,
        bound: u64,
    },
    /// A link must be backed by at least one assigned hour.
    LinkWithoutHours { caregiver: usize, patient: usize },
    /// At most `max_caregivers_per_patient` caregivers may serve a patient.
    TooManyCaregivers {
        patient: usize,
        linked: u64,
        cap: u64,
    },
    /// At most `max_patients_per_caregiver` patients per caregiver.
    TooManyPatients {
        caregiver: usize,
        linked: u64,
        cap: u64,
    },
    /// A caregiver's total assigned hours may not exceed their capacity.
    CapacityExceeded {
        caregiver: usize,
        hours: u64,
        capacity: u64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DemandExceeded {
                patient,
                service,
                assigned,
                demanded,
            } => write!(
                f,
                "patient {patient} service {service}: assigned {assigned} exceeds demand {demanded}"
            ),
            Violation::BudgetExceeded { cost, budget } => {
                write!(f, "total cost {cost} exceeds budget {budget}")
            }
            Violation::HourBoundExceeded {
                caregiver,
                patient,
                service,
                hours,
                bound,
            } => write!(
                f,
                "caregiver {caregiver} patient {patient} service {service}: \
                 {hours} hours exceed bound {bound} (skill/link/capacity)"
            ),
            Violation::LinkWithoutHours { caregiver, patient } => write!(
                f,
                "caregiver {caregiver} patient {patient}: link set without assigned hours"
            ),
            Violation::TooManyCaregivers { patient, linked, cap } => write!(
                f,
                "patient {patient}: {linked} caregivers linked, preference cap {cap}"
            ),
            Violation::TooManyPatients { caregiver, linked, cap } => write!(
                f,
                "caregiver {caregiver}: {linked} patients linked, preference cap {cap}"
            ),
            Violation::CapacityExceeded {
                caregiver,
                hours,
                capacity,
            } => write!(
                f,
                "caregiver {caregiver}: {hours} hours assigned, capacity {capacity}"
            ),
        }
    }
}

/// The outcome of checking every model constraint in exact arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_feasible() {
            write!(f, "feasible")
        } else {
            writeln!(f, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

/// Per-patient fill-rates: assigned hours over demanded hours.
///
/// Patients with zero total demand get a fill-rate of 1 and are excluded
/// from equity accounting.
pub fn fill_rates(instance: &Instance, assignment: &Assignment) -> Result<Vec<Rational>, ModelError> {
    instance.check_dims(assignment)?;
    Ok((0..instance.m())
        .map(|j| {
            let demand = instance.total_demand(j);
            if demand == 0 {
                Rational::one()
            } else {
                Rational::from(assignment.patient_hours(j)) / Rational::from(demand)
            }
        })
        .collect())
}

/// Per-caregiver utilization rates: worked hours over capacity.
///
/// Caregivers with zero capacity get a utilization of 0 and are excluded
/// from efficacy accounting.
pub fn utilizations(
    instance: &Instance,
    assignment: &Assignment,
) -> Result<Vec<Rational>, ModelError> {
    instance.check_dims(assignment)?;
    Ok((0..instance.n())
        .map(|i| {
            let capacity = instance.capacity(i);
            if capacity == 0 {
                Rational::zero()
            } else {
                Rational::from(assignment.caregiver_hours(i)) / Rational::from(capacity)
            }
        })
        .collect())
}

/// Exact total assignment cost.
pub fn total_cost(instance: &Instance, assignment: &Assignment) -> Result<Rational, ModelError> {
    instance.check_dims(assignment)?;
    let mut cost = Rational::zero();
    for i in 0..instance.n() {
        for j in 0..instance.m() {
            for k in 0..instance.s() {
                let h = assignment.hours(i, j, k);
                if h > 0 {
                    cost += instance.unit_cost(i, j, k) * &Rational::from(h);
                }
            }
        }
    }
    Ok(cost)
}

/// Checks every constraint of the assignment model in exact arithmetic and
/// reports each violation with its indices. Violations are collected, never
/// thrown.
pub fn check_feasibility(
    instance: &Instance,
    assignment: &Assignment,
) -> Result<FeasibilityReport, ModelError> {
    instance.check_dims(assignment)?;
    let mut violations = Vec::new();
    let (n, m, s) = (instance.n(), instance.m(), instance.s());

    // Per-service demand caps.
    for j in 0..m {
        for k in 0..s {
            let assigned = assignment.patient_service_hours(j, k);
            let demanded = instance.demand(j, k);
            if assigned > demanded {
                violations.push(Violation::DemandExceeded {
                    patient: j,
                    service: k,
                    assigned,
                    demanded,
                });
            }
        }
    }

    // Budget.
    let cost = total_cost(instance, assignment)?;
    if cost > *instance.budget() {
        violations.push(Violation::BudgetExceeded {
            cost,
            budget: instance.budget().clone(),
        });
    }

    // Hour bounds x <= e*z*H and link coverage z <= sum_k x.
    for i in 0..n {
        for j in 0..m {
            let linked = assignment.link(i, j);
            let bound = if linked {
                instance.capacity(i)
            } else {
                0
            };
            for k in 0..s {
                let h = assignment.hours(i, j, k);
                let skill_bound = if instance.skill(i, k) { bound } else { 0 };
                if h > skill_bound {
                    violations.push(Violation::HourBoundExceeded {
                        caregiver: i,
                        patient: j,
                        service: k,
                        hours: h,
                        bound: skill_bound,
                    });
                }
            }
            if linked && assignment.pair_hours(i, j) == 0 {
                violations.push(Violation::LinkWithoutHours {
                    caregiver: i,
                    patient: j,
                });
            }
        }
    }

    // Preference cardinality caps.
    for j in 0..m {
        let linked = assignment.patient_links(j);
        let cap = instance.max_caregivers_per_patient(j);
        if linked > cap {
            violations.push(Violation::TooManyCaregivers {
                patient: j,
                linked,
                cap,
            });
        }
    }
    for i in 0..n {
        let linked = assignment.caregiver_links(i);
        let cap = instance.max_patients_per_caregiver(i);
        if linked > cap {
            violations.push(Violation::TooManyPatients {
                caregiver: i,
                linked,
                cap,
            });
        }
    }

    // Explicit per-caregiver hour cap; keeps utilizations within [0, 1].
    for i in 0..n {
        let hours = assignment.caregiver_hours(i);
        let capacity = instance.capacity(i);
        if hours > capacity {
            violations.push(Violation::CapacityExceeded {
                caregiver: i,
                hours,
                capacity,
            });
        }
    }

    Ok(FeasibilityReport { violations })
}

/// Objective value from pre-aggregated per-entity hour totals.
///
/// Shared by the full evaluation below and by the exact solver, which keeps
/// these totals incrementally during search.
pub(crate) fn objective_from_totals(
    instance: &Instance,
    weights: &PenaltyWeights,
    patient_hours: &[u64],
    caregiver_hours: &[u64],
) -> Rational {
    let mut utility_term = Rational::zero();
    let mut fill_sum = Rational::zero();
    let mut max_fill: Option<Rational> = None;
    let mut included_patients = 0u64;
    for (j, &hours) in patient_hours.iter().enumerate() {
        let fill = if instance.patient_included(j) {
            let fill = Rational::from(hours) / Rational::from(instance.total_demand(j));
            included_patients += 1;
            fill_sum += &fill;
            max_fill = Some(match max_fill.take() {
                Some(best) => best.max(fill.clone()),
                None => fill.clone(),
            });
            fill
        } else {
            Rational::one()
        };
        utility_term += instance.utility(j) * &fill;
    }

    let mut util_sum = Rational::zero();
    let mut max_util: Option<Rational> = None;
    let mut included_caregivers = 0u64;
    for (i, &hours) in caregiver_hours.iter().enumerate() {
        if instance.caregiver_included(i) {
            let util = Rational::from(hours) / Rational::from(instance.capacity(i));
            included_caregivers += 1;
            util_sum += &util;
            max_util = Some(match max_util.take() {
                Some(best) => best.max(util.clone()),
                None => util,
            });
        }
    }

    let mut objective = utility_term;
    if let Some(max_fill) = max_fill {
        let equity = weights.theta() * &(max_fill * Rational::from(included_patients) - fill_sum);
        objective -= equity;
    }
    if let Some(max_util) = max_util {
        let efficacy =
            weights.alpha() * &(max_util * Rational::from(included_caregivers) - util_sum);
        objective -= efficacy;
    }
    objective
}

/// Exact objective value: total utility weighted by fill-rates, minus the
/// equity penalty (fill-rate deviations from the maximum) and the efficacy
/// penalty (utilization deviations from the maximum). Excluded entities
/// contribute no penalty terms.
pub fn evaluate_objective(
    instance: &Instance,
    weights: &PenaltyWeights,
    assignment: &Assignment,
) -> Result<Rational, ModelError> {
    instance.check_dims(assignment)?;
    let patient_hours: Vec<u64> = (0..instance.m()).map(|j| assignment.patient_hours(j)).collect();
    let caregiver_hours: Vec<u64> =
        (0..instance.n()).map(|i| assignment.caregiver_hours(i)).collect();
    Ok(objective_from_totals(
        instance,
        weights,
        &patient_hours,
        &caregiver_hours,
    ))
}

/// Everything worth reporting about one assignment: rates, maxima, cost,
/// and objective value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionMetrics {
    pub fill_rate: Vec<Rational>,
    pub utilization: Vec<Rational>,
    /// Maximum fill-rate over equity-included patients; zero if none.
    pub max_fill: Rational,
    /// Maximum utilization over efficacy-included caregivers; zero if none.
    pub max_util: Rational,
    pub total_cost: Rational,
    pub objective: Rational,
}

impl SolutionMetrics {
    pub fn compute(
        instance: &Instance,
        weights: &PenaltyWeights,
        assignment: &Assignment,
    ) -> Result<Self, ModelError> {
        let fill_rate = fill_rates(instance, assignment)?;
        let utilization = utilizations(instance, assignment)?;
        let max_fill = (0..instance.m())
            .filter(|&j| instance.patient_included(j))
            .map(|j| fill_rate[j].clone())
            .max()
            .unwrap_or_else(Rational::zero);
        let max_util = (0..instance.n())
            .filter(|&i| instance.caregiver_included(i))
            .map(|i| utilization[i].clone())
            .max()
            .unwrap_or_else(Rational::zero);
        Ok(SolutionMetrics {
            fill_rate,
            utilization,
            max_fill,
            max_util,
            total_cost: total_cost(instance, assignment)?,
            objective: evaluate_objective(instance, weights, assignment)?,
        })
    }
}
