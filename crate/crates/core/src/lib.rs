//! Caregiver-to-patient assignment for home health care.
//!
//! The model assigns integer hours of care services from caregivers to
//! patients, maximizing total patient utility while penalizing two kinds of
//! unfairness: patients falling behind the best-served patient's fill-rate
//! (equity) and caregivers falling behind the busiest caregiver's
//! utilization (efficacy). Assignments respect skills, per-service demand,
//! caregiver capacities, mutual preference caps on the number of partners,
//! and a global budget.
//!
//! Modules:
//!
//! * [`model`] — problem data, feasibility checking, objective evaluation;
//! * [`exact`] — branch-and-bound optimal solver and a brute-force oracle;
//! * [`greedy`] — two-phase construction of an initial feasible solution;
//! * [`tabu`] — tabu-search improvement with an equity-driven neighborhood;
//! * [`reduction`] — 0/1 knapsack reduction used for cross-checking;
//! * [`io`] — JSON persistence and a seeded instance generator.

pub mod exact;
pub mod greedy;
pub mod io;
pub mod model;
pub mod rational;
pub mod reduction;
pub mod tabu;

pub use exact::{
    enumerate_all, enumerate_optima, solve_exact, upper_bound, OptimalSolution, SolveError,
    SolveLimits, SolveStatus,
};
pub use greedy::{greedy_construct, greedy_subproblem, GreedyError, GreedyState};
pub use io::{
    generate, instance_from_json, instance_to_json, load_instance, load_solution, save_instance,
    save_solution, solution_from_json, solution_to_json, GeneratorParams, IoError,
};
pub use model::{
    check_feasibility, evaluate_objective, fill_rates, total_cost, utilizations, Assignment,
    FeasibilityReport, Instance, InstanceBuilder, ModelError, PenaltyWeights, SolutionMetrics,
    ValidationError, Violation,
};
pub use rational::{ParseRationalError, Rational};
pub use reduction::{
    extract_knapsack_solution, knapsack_to_assignment, solve_knapsack_bruteforce,
    KnapsackInstance, KnapsackSolution, ReductionError,
};
pub use tabu::{neighborhood, tabu_improve, Move, ScoredMove, TabuError, TabuParams, TabuState};
