//! Shared fixtures for the criterion benches.

use clipbandit::policies::{PolicyConfig, ScheduleParams};

/// The four policies compared in the runtime table, at preset settings.
pub fn table_policies() -> Vec<PolicyConfig> {
    let tuned = |c: PolicyConfig| c.with_schedule(ScheduleParams::tuned()).with_p(9);
    vec![
        tuned(PolicyConfig::sgd_ucb()),
        tuned(PolicyConfig::sgd_ucb_median()),
        tuned(PolicyConfig::sgd_ucb_smom()),
        PolicyConfig::rucb_median(),
    ]
}

/// Deterministic Cauchy-like sample for estimator benches.
pub fn heavy_samples(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            (std::f64::consts::PI * (u - 0.5)).tan()
        })
        .collect()
}
