//! The full pipeline: analyze a pool and a random benchmark pool under every
//! model and assemble the report.

use revpref_core::constraints::SolverConfig;
use revpref_core::models::ModelSpec;

use crate::generate::simulate_random_subjects;
use crate::io::SubjectPool;
use crate::metrics::{analyze_pool, indicator_distributions, ModelAnalysis};
use crate::report::{
    Fixed4, IndicatorReport, ModelReport, Provenance, ReportBundle, SubjectError, REPORT_SCHEMA,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateConfig {
    pub models: Vec<ModelSpec>,
    pub random_subjects: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for ReplicateConfig {
    fn default() -> Self {
        Self {
            models: ModelSpec::study_configurations().to_vec(),
            random_subjects: 1000,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }
}

fn model_report(real: &ModelAnalysis, random: &ModelAnalysis) -> ModelReport {
    let pass_rate = real.pass_rate().ok();
    let random_pass_rate = random.pass_rate().ok();
    let psi = pass_rate.zip(random_pass_rate).map(|(a, b)| a - b);
    let analyzed_random = random.passes() + random.fails();
    let psi_sigma = random_pass_rate.map(|p| (p * (1.0 - p) / analyzed_random as f64).sqrt());
    let avg_density = real.avg_density().ok();
    let pairs_total = real.n * real.n.saturating_sub(1) / 2;
    let mut error_details: Vec<SubjectError> = real
        .errors()
        .into_iter()
        .map(|(s, m)| SubjectError {
            subject: s.to_string(),
            message: m.to_string(),
        })
        .chain(random.errors().into_iter().map(|(s, m)| SubjectError {
            subject: format!("random:{s}"),
            message: m.to_string(),
        }))
        .collect();
    error_details.sort_by(|a, b| a.subject.cmp(&b.subject));
    ModelReport {
        model: real.model.to_string(),
        passes: real.passes(),
        fails: real.fails(),
        errors: real.errors().len(),
        pass_rate: pass_rate.map(Fixed4),
        random_passes: random.passes(),
        random_fails: random.fails(),
        random_errors: random.errors().len(),
        random_pass_rate: random_pass_rate.map(Fixed4),
        psi: psi.map(Fixed4),
        psi_sigma: psi_sigma.map(Fixed4),
        avg_density: avg_density.map(Fixed4),
        avg_revealed_pairs: avg_density.map(|d| Fixed4(d * pairs_total as f64)),
        pairs_total,
        density_histogram: real.density_histogram(),
        error_details,
    }
}

/// Runs every model on `pool` and on `cfg.random_subjects` random subjects
/// drawn on the same menus.
pub fn replicate(pool: &SubjectPool, cfg: &ReplicateConfig) -> ReportBundle {
    let random = simulate_random_subjects(
        &pool.alternatives,
        &pool.menus,
        cfg.random_subjects,
        cfg.seed,
    );
    let real = analyze_pool(&cfg.models, pool, &cfg.solver, true);
    let rand = analyze_pool(&cfg.models, &random, &cfg.solver, false);
    let models = real
        .iter()
        .zip(&rand)
        .map(|(a, b)| model_report(a, b))
        .collect();
    let ind = indicator_distributions(pool);
    ReportBundle {
        schema: REPORT_SCHEMA,
        provenance: Provenance {
            seed: cfg.seed,
            random_subjects: cfg.random_subjects,
            models: cfg.models.iter().map(|m| m.to_string()).collect(),
            data_digest: pool.digest(),
            subjects: pool.len(),
            menus: pool.menus.len(),
            alternatives: pool.n(),
            node_budget: cfg.solver.node_budget,
        },
        models,
        indicators: IndicatorReport {
            distinct_chosen: ind.distinct_chosen,
            warp_involved: ind.warp_involved,
            warp_directly_involved: ind.warp_directly_involved,
        },
    }
}
