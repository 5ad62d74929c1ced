//! Shared fixtures for the solver benchmarks.

use hhc_core::{generate, GeneratorParams, Instance, Rational};

/// Mid-size instance: 10 caregivers, 20 patients, 4 services.
pub fn medium_instance(seed: u64) -> Instance {
    generate(&GeneratorParams {
        caregivers: 10,
        patients: 20,
        services: 4,
        seed,
        ..GeneratorParams::default()
    })
    .expect("benchmark parameters are valid")
}

/// Micro instance small enough for the exact solver to prove optimality.
pub fn micro_instance(seed: u64) -> Instance {
    generate(&GeneratorParams {
        caregivers: 2,
        patients: 2,
        services: 2,
        demand_range: (0, 2),
        capacity_range: (1, 3),
        patient_cap_range: (1, 2),
        caregiver_cap_range: (1, 2),
        budget_factor: Rational::ratio(7, 10),
        seed,
        ..GeneratorParams::default()
    })
    .expect("benchmark parameters are valid")
}
