//! 0/1 knapsack reduction: maps knapsack instances onto single-caregiver,
//! single-service assignment instances whose optimum equals the knapsack
//! optimum, and extracts the item selection back out. Together with the
//! deliberately naive subset-enumeration solver this forms an independent
//! cross-check for the exact solver.
//!
//! The construction: one caregiver with every skill, one service, one demand
//! unit per patient (so hours are forced binary), at most one caregiver per
//! patient, capacity and patient-count caps equal to the item count, budget
//! equal to the knapsack capacity, utilities equal to item values, and unit
//! costs equal to item weights. Both penalty weights are zero.

use crate::model::{Assignment, Instance, InstanceBuilder, PenaltyWeights};
use crate::rational::Rational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("values and weights differ in length: {values} vs {weights}")]
    LengthMismatch { values: usize, weights: usize },
    #[error("{field}[{index}]: negative value {value}")]
    Negative {
        field: &'static str,
        index: usize,
        value: Rational,
    },
    #[error("capacity is negative: {0}")]
    NegativeCapacity(Rational),
    #[error("{items} items exceed the brute-force limit of {limit}")]
    TooManyItems { items: usize, limit: usize },
    #[error("assignment shape {n}x{m}x{s} is not a reduced instance (need n = s = 1)")]
    NotReducedShape { n: usize, m: usize, s: usize },
    #[error("hours[{patient}] = {hours} is not binary; not from a reduced instance")]
    NotBinary { patient: usize, hours: u64 },
}

const BRUTE_FORCE_ITEM_LIMIT: usize = 20;

/// A 0/1 knapsack instance: pick items maximizing total value with total
/// weight at most the capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackInstance {
    values: Vec<Rational>,
    weights: Vec<Rational>,
    capacity: Rational,
}

impl KnapsackInstance {
    pub fn new(
        values: Vec<Rational>,
        weights: Vec<Rational>,
        capacity: Rational,
    ) -> Result<Self, ReductionError> {
        if values.len() != weights.len() {
            return Err(ReductionError::LengthMismatch {
                values: values.len(),
                weights: weights.len(),
            });
        }
        for (index, v) in values.iter().enumerate() {
            if v.is_negative() {
                return Err(ReductionError::Negative {
                    field: "values",
                    index,
                    value: v.clone(),
                });
            }
        }
        for (index, w) in weights.iter().enumerate() {
            if w.is_negative() {
                return Err(ReductionError::Negative {
                    field: "weights",
                    index,
                    value: w.clone(),
                });
            }
        }
        if capacity.is_negative() {
            return Err(ReductionError::NegativeCapacity(capacity));
        }
        Ok(KnapsackInstance {
            values,
            weights,
            capacity,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn capacity(&self) -> &Rational {
        &self.capacity
    }
}

/// Result of the brute-force knapsack solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackSolution {
    pub value: Rational,
    pub selection: Vec<bool>,
}

/// Builds the assignment instance whose optimum equals the knapsack optimum.
/// Items become patients; selecting an item becomes assigning its single
/// demanded hour.
pub fn knapsack_to_assignment(kp: &KnapsackInstance) -> (Instance, PenaltyWeights) {
    let items = kp.len();
    let instance = InstanceBuilder::new(1, items, 1)
        .skills(&[1])
        .demand(&vec![1; items])
        .capacity(&[items as u64])
        .max_caregivers_per_patient(&vec![1; items])
        // A patient-count cap of |items| is never binding; max(1, ..) keeps
        // the cap invariant satisfied for the zero-item edge case.
        .max_patients_per_caregiver(&[(items as u64).max(1)])
        .unit_costs(kp.weights.clone())
        .budget(kp.capacity.clone())
        .utilities(kp.values.clone())
        .build()
        .expect("reduction parameters satisfy instance invariants");
    (instance, PenaltyWeights::zero())
}

/// Reads the item selection back out of a reduced-instance assignment:
/// item `j` is selected iff its single demanded hour is assigned.
pub fn extract_knapsack_solution(assignment: &Assignment) -> Result<Vec<bool>, ReductionError> {
    let (n, m, s) = assignment.dims();
    if n != 1 || s != 1 {
        return Err(ReductionError::NotReducedShape { n, m, s });
    }
    let mut selection = Vec::with_capacity(m);
    for j in 0..m {
        match assignment.hours(0, j, 0) {
            0 => selection.push(false),
            1 => selection.push(true),
            hours => return Err(ReductionError::NotBinary { patient: j, hours }),
        }
    }
    Ok(selection)
}

/// Exhaustive subset enumeration, deliberately naive. Ties break to the
/// lexicographically smallest selection vector (`false < true`).
pub fn solve_knapsack_bruteforce(kp: &KnapsackInstance) -> Result<KnapsackSolution, ReductionError> {
    let items = kp.len();
    if items > BRUTE_FORCE_ITEM_LIMIT {
        return Err(ReductionError::TooManyItems {
            items,
            limit: BRUTE_FORCE_ITEM_LIMIT,
        });
    }
    let mut best_value = Rational::zero();
    let mut best_selection = vec![false; items];
    for mask in 0u32..(1u32 << items) {
        let mut weight = Rational::zero();
        let mut value = Rational::zero();
        let mut selection = vec![false; items];
        for (item, slot) in selection.iter_mut().enumerate() {
            if mask & (1 << item) != 0 {
                *slot = true;
                weight += &kp.weights[item];
                value += &kp.values[item];
            }
        }
        if weight > kp.capacity {
            continue;
        }
        if value > best_value || (value == best_value && selection < best_selection) {
            best_value = value;
            best_selection = selection;
        }
    }
    Ok(KnapsackSolution {
        value: best_value,
        selection: best_selection,
    })
}
