//! Instance and solution persistence plus seeded random instance generation.
//!
//! Documents are single JSON files with explicit dimension fields and flat
//! row-major arrays, so they diff cleanly and golden files stay stable.
//! Rationals are serialized as decimal strings (falling back to `"a/b"` when
//! the value has no finite decimal form) to avoid any float drift across
//! platforms. Solution documents carry a derived metrics block for human
//! inspection, but only the hour tensor is authoritative on load.

use crate::model::{
    Assignment, Instance, InstanceBuilder, PenaltyWeights, SolutionMetrics, ValidationError,
};
use crate::rational::Rational;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a valid document: {reason}")]
    Malformed { path: String, reason: String },
    #[error("{field}: {reason}")]
    Field { field: String, reason: String },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    version: u32,
    n: usize,
    m: usize,
    s: usize,
    skills: Vec<i64>,
    demand: Vec<i64>,
    capacity: Vec<i64>,
    max_caregivers_per_patient: Vec<i64>,
    max_patients_per_caregiver: Vec<i64>,
    unit_cost: Vec<String>,
    budget: String,
    utility: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetricsDoc {
    theta: String,
    alpha: String,
    fill_rate: Vec<String>,
    utilization: Vec<String>,
    max_fill: String,
    max_util: String,
    total_cost: String,
    objective: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct SolutionDoc {
    version: u32,
    n: usize,
    m: usize,
    s: usize,
    hours: Vec<i64>,
    metrics: MetricsDoc,
}

fn check_version(version: u32) -> Result<(), IoError> {
    if version != DOCUMENT_VERSION {
        return Err(IoError::Field {
            field: "version".into(),
            reason: format!("unsupported version {version}, expected {DOCUMENT_VERSION}"),
        });
    }
    Ok(())
}

fn non_negative_u64(field: &str, values: &[i64]) -> Result<Vec<u64>, IoError> {
    values
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            if v < 0 {
                Err(IoError::Field {
                    field: format!("{field}[{index}]"),
                    reason: format!("negative value {v}"),
                })
            } else {
                Ok(v as u64)
            }
        })
        .collect()
}

fn expect_len<T>(field: &str, values: &[T], expected: usize) -> Result<(), IoError> {
    if values.len() != expected {
        return Err(IoError::Field {
            field: field.into(),
            reason: format!("expected {expected} entries, found {}", values.len()),
        });
    }
    Ok(())
}

fn parse_rational(field: &str, text: &str) -> Result<Rational, IoError> {
    text.parse().map_err(|e| IoError::Field {
        field: field.into(),
        reason: format!("{e}"),
    })
}

fn parse_rationals(field: &str, values: &[String]) -> Result<Vec<Rational>, IoError> {
    values
        .iter()
        .enumerate()
        .map(|(index, text)| parse_rational(&format!("{field}[{index}]"), text))
        .collect()
}

impl InstanceDoc {
    fn from_instance(instance: &Instance) -> Self {
        InstanceDoc {
            version: DOCUMENT_VERSION,
            n: instance.n(),
            m: instance.m(),
            s: instance.s(),
            skills: instance
                .skills_flat()
                .iter()
                .map(|&b| i64::from(b))
                .collect(),
            demand: instance.demand_flat().iter().map(|&v| v as i64).collect(),
            capacity: instance.capacity_all().iter().map(|&v| v as i64).collect(),
            max_caregivers_per_patient: instance
                .max_caregivers_per_patient_all()
                .iter()
                .map(|&v| v as i64)
                .collect(),
            max_patients_per_caregiver: instance
                .max_patients_per_caregiver_all()
                .iter()
                .map(|&v| v as i64)
                .collect(),
            unit_cost: instance.unit_cost_flat().iter().map(|c| c.to_string()).collect(),
            budget: instance.budget().to_string(),
            utility: instance.utility_all().iter().map(|p| p.to_string()).collect(),
        }
    }

    fn into_instance(self) -> Result<Instance, IoError> {
        check_version(self.version)?;
        let (n, m, s) = (self.n, self.m, self.s);
        expect_len("skills", &self.skills, n * s)?;
        expect_len("demand", &self.demand, m * s)?;
        expect_len("capacity", &self.capacity, n)?;
        expect_len(
            "max_caregivers_per_patient",
            &self.max_caregivers_per_patient,
            m,
        )?;
        expect_len(
            "max_patients_per_caregiver",
            &self.max_patients_per_caregiver,
            n,
        )?;
        expect_len("unit_cost", &self.unit_cost, n * m * s)?;
        expect_len("utility", &self.utility, m)?;

        let mut skills = Vec::with_capacity(n * s);
        for (index, &v) in self.skills.iter().enumerate() {
            match v {
                0 => skills.push(0u8),
                1 => skills.push(1u8),
                other => {
                    return Err(IoError::Field {
                        field: format!("skills[{index}]"),
                        reason: format!("expected 0 or 1, found {other}"),
                    })
                }
            }
        }
        let demand = non_negative_u64("demand", &self.demand)?;
        let capacity = non_negative_u64("capacity", &self.capacity)?;
        let patient_caps =
            non_negative_u64("max_caregivers_per_patient", &self.max_caregivers_per_patient)?;
        let caregiver_caps =
            non_negative_u64("max_patients_per_caregiver", &self.max_patients_per_caregiver)?;
        let unit_cost = parse_rationals("unit_cost", &self.unit_cost)?;
        let budget = parse_rational("budget", &self.budget)?;
        let utility = parse_rationals("utility", &self.utility)?;

        Ok(InstanceBuilder::new(n, m, s)
            .skills(&skills)
            .demand(&demand)
            .capacity(&capacity)
            .max_caregivers_per_patient(&patient_caps)
            .max_patients_per_caregiver(&caregiver_caps)
            .unit_costs(unit_cost)
            .budget(budget)
            .utilities(utility)
            .build()?)
    }
}

/// Renders an instance as its canonical JSON document.
pub fn instance_to_json(instance: &Instance) -> String {
    let doc = InstanceDoc::from_instance(instance);
    serde_json::to_string_pretty(&doc).expect("instance document serializes")
}

/// Parses an instance document, validating shapes, value ranges, and
/// instance invariants. Errors name the offending field.
pub fn instance_from_json(text: &str) -> Result<Instance, IoError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| IoError::Malformed {
        path: "<string>".into(),
        reason: e.to_string(),
    })?;
    doc.into_instance()
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, instance_to_json(instance)).map_err(|e| file_err(path, e))
}

pub fn load_instance(path: &Path) -> Result<Instance, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    let doc: InstanceDoc = serde_json::from_str(&text).map_err(|e| IoError::Malformed {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    doc.into_instance()
}

/// Renders an assignment plus derived metrics as a solution document.
/// The metrics block records the weights it was computed with.
pub fn solution_to_json(
    instance: &Instance,
    weights: &PenaltyWeights,
    assignment: &Assignment,
    metrics: &SolutionMetrics,
) -> String {
    let doc = SolutionDoc {
        version: DOCUMENT_VERSION,
        n: instance.n(),
        m: instance.m(),
        s: instance.s(),
        hours: assignment.hours_flat().iter().map(|&h| h as i64).collect(),
        metrics: MetricsDoc {
            theta: weights.theta().to_string(),
            alpha: weights.alpha().to_string(),
            fill_rate: metrics.fill_rate.iter().map(|v| v.to_string()).collect(),
            utilization: metrics.utilization.iter().map(|v| v.to_string()).collect(),
            max_fill: metrics.max_fill.to_string(),
            max_util: metrics.max_util.to_string(),
            total_cost: metrics.total_cost.to_string(),
            objective: metrics.objective.to_string(),
        },
    };
    serde_json::to_string_pretty(&doc).expect("solution document serializes")
}

pub fn save_solution(
    instance: &Instance,
    weights: &PenaltyWeights,
    assignment: &Assignment,
    metrics: &SolutionMetrics,
    path: &Path,
) -> Result<(), IoError> {
    std::fs::write(path, solution_to_json(instance, weights, assignment, metrics))
        .map_err(|e| file_err(path, e))
}

/// Loads the hour tensor from a solution document. The stored metrics block
/// is informational only and is ignored here.
pub fn load_solution(path: &Path) -> Result<Assignment, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    solution_from_json(&text)
}

pub fn solution_from_json(text: &str) -> Result<Assignment, IoError> {
    let doc: SolutionDoc = serde_json::from_str(text).map_err(|e| IoError::Malformed {
        path: "<string>".into(),
        reason: e.to_string(),
    })?;
    check_version(doc.version)?;
    expect_len("hours", &doc.hours, doc.n * doc.m * doc.s)?;
    let hours = non_negative_u64("hours", &doc.hours)?;
    Ok(Assignment::from_hours(doc.n, doc.m, doc.s, hours)?)
}

/// Knobs for the seeded random instance generator. Costs and utilities are
/// sampled in hundredths within their ranges; the budget is
/// `budget_factor` times the cheapest way to cover every coverable demand
/// hour, ignoring capacities.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub caregivers: usize,
    pub patients: usize,
    pub services: usize,
    pub demand_range: (u64, u64),
    pub capacity_range: (u64, u64),
    pub cost_range: (Rational, Rational),
    pub utility_range: (Rational, Rational),
    pub skill_density: f64,
    pub budget_factor: Rational,
    pub patient_cap_range: (u64, u64),
    pub caregiver_cap_range: (u64, u64),
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            caregivers: 5,
            patients: 10,
            services: 4,
            demand_range: (0, 8),
            capacity_range: (20, 40),
            cost_range: ("0.5".parse().unwrap(), "4".parse().unwrap()),
            utility_range: ("1".parse().unwrap(), "10".parse().unwrap()),
            skill_density: 0.6,
            budget_factor: "0.8".parse().unwrap(),
            patient_cap_range: (1, 3),
            caregiver_cap_range: (1, 5),
            seed: 42,
        }
    }
}

impl GeneratorParams {
    fn validate(&self) -> Result<(), IoError> {
        let err = |reason: String| Err(IoError::InvalidParams(reason));
        if self.caregivers == 0 {
            return err("caregivers must be at least 1".into());
        }
        if self.patients == 0 {
            return err("patients must be at least 1".into());
        }
        if self.services == 0 {
            return err("services must be at least 1".into());
        }
        for (name, range) in [
            ("demand_range", self.demand_range),
            ("capacity_range", self.capacity_range),
        ] {
            if range.0 > range.1 {
                return err(format!("{name} is empty: {range:?}"));
            }
        }
        for (name, range) in [
            ("patient_cap_range", self.patient_cap_range),
            ("caregiver_cap_range", self.caregiver_cap_range),
        ] {
            if range.0 > range.1 {
                return err(format!("{name} is empty: {range:?}"));
            }
            if range.0 < 1 {
                return err(format!("{name} must start at 1 or above"));
            }
        }
        for (name, (lo, hi)) in [
            ("cost_range", &self.cost_range),
            ("utility_range", &self.utility_range),
        ] {
            if lo.is_negative() {
                return err(format!("{name} lower bound {lo} is negative"));
            }
            if lo > hi {
                return err(format!("{name} is empty: [{lo}, {hi}]"));
            }
        }
        if !(0.0..=1.0).contains(&self.skill_density) {
            return err(format!("skill_density {} outside [0, 1]", self.skill_density));
        }
        if self.budget_factor.is_negative() {
            return err(format!("budget_factor {} is negative", self.budget_factor));
        }
        Ok(())
    }
}

/// Draws a rational uniformly from the hundredths grid inside `[lo, hi]`.
fn sample_hundredths(
    rng: &mut ChaCha8Rng,
    name: &str,
    lo: &Rational,
    hi: &Rational,
) -> Result<Rational, IoError> {
    let hundred = Rational::from(100u64);
    let lo_scaled = lo * &hundred;
    let hi_scaled = hi * &hundred;
    // Smallest and largest grid points inside the range.
    let hi_cents = hi_scaled.floor_clamped(u64::MAX);
    let lo_cents = {
        let floor = lo_scaled.floor_clamped(u64::MAX);
        if Rational::from(floor) * Rational::ratio(1, 100) < *lo {
            floor + 1
        } else {
            floor
        }
    };
    if lo_cents > hi_cents {
        return Err(IoError::InvalidParams(format!(
            "{name} [{lo}, {hi}] contains no hundredths grid point"
        )));
    }
    let cents = rng.random_range(lo_cents..=hi_cents);
    Ok(Rational::from(cents) * Rational::ratio(1, 100))
}

/// Deterministic random instance generation: the same parameters (seed
/// included) always produce the same instance. Every caregiver ends up with
/// at least one skill.
pub fn generate(params: &GeneratorParams) -> Result<Instance, IoError> {
    params.validate()?;
    let (n, m, s) = (params.caregivers, params.patients, params.services);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut skills = vec![0u8; n * s];
    for i in 0..n {
        let row = &mut skills[i * s..(i + 1) * s];
        for _ in 0..100 {
            for slot in row.iter_mut() {
                *slot = u8::from(rng.random_bool(params.skill_density));
            }
            if row.contains(&1) {
                break;
            }
        }
        if row.iter().all(|&v| v == 0) {
            // Density too small to resample an all-zero row away; force one.
            let k = rng.random_range(0..s);
            row[k] = 1;
        }
    }

    let demand: Vec<u64> = (0..m * s)
        .map(|_| rng.random_range(params.demand_range.0..=params.demand_range.1))
        .collect();
    let capacity: Vec<u64> = (0..n)
        .map(|_| rng.random_range(params.capacity_range.0..=params.capacity_range.1))
        .collect();
    let patient_caps: Vec<u64> = (0..m)
        .map(|_| rng.random_range(params.patient_cap_range.0..=params.patient_cap_range.1))
        .collect();
    let caregiver_caps: Vec<u64> = (0..n)
        .map(|_| rng.random_range(params.caregiver_cap_range.0..=params.caregiver_cap_range.1))
        .collect();

    let mut unit_cost = Vec::with_capacity(n * m * s);
    for _ in 0..n * m * s {
        unit_cost.push(sample_hundredths(
            &mut rng,
            "cost_range",
            &params.cost_range.0,
            &params.cost_range.1,
        )?);
    }
    let mut utility = Vec::with_capacity(m);
    for _ in 0..m {
        utility.push(sample_hundredths(
            &mut rng,
            "utility_range",
            &params.utility_range.0,
            &params.utility_range.1,
        )?);
    }

    // Reference cost: serve every demanded hour with its cheapest skilled
    // caregiver, ignoring capacity and cardinality.
    let mut full_service_cost = Rational::zero();
    for j in 0..m {
        for k in 0..s {
            let hours = demand[j * s + k];
            if hours == 0 {
                continue;
            }
            let cheapest = (0..n)
                .filter(|&i| skills[i * s + k] == 1)
                .map(|i| unit_cost[(i * m + j) * s + k].clone())
                .min();
            if let Some(c) = cheapest {
                full_service_cost += &(c * Rational::from(hours));
            }
        }
    }
    let budget = &params.budget_factor * &full_service_cost;

    Ok(InstanceBuilder::new(n, m, s)
        .skills(&skills)
        .demand(&demand)
        .capacity(&capacity)
        .max_caregivers_per_patient(&patient_caps)
        .max_patients_per_caregiver(&caregiver_caps)
        .unit_costs(unit_cost)
        .budget(budget)
        .utilities(utility)
        .build()?)
}
