//! Pool-level metrics: pass rates, predictive success, densities and
//! welfare-relevance indicators.

use rayon::prelude::*;
use revpref_core::constraints::{SolverConfig, DEFAULT_NODE_BUDGET};
use revpref_core::data::ChoiceDataset;
use revpref_core::diagnostics::{distinct_chosen, warp_directly_involved, warp_involved};
use revpref_core::models::{revealed_with, ModelError, ModelSpec, RevealOptions};
use revpref_core::relation::{density, Relation};
use thiserror::Error;

use crate::io::SubjectPool;

/// Environment variable overriding the solver node budget.
pub const BUDGET_ENV: &str = "REVPREF_BUDGET";

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("pools use different menu collections")]
    MenuMismatch,
    #[error("no subject passes {0}")]
    NoPassingSubjects(ModelSpec),
    #[error("no subject could be analyzed under {0}")]
    NoAnalyzedSubjects(ModelSpec),
    #[error("subject {subject}: {message}")]
    Subject { subject: String, message: String },
    #[error("invalid {BUDGET_ENV} value '{0}'")]
    InvalidBudget(String),
}

/// Solver settings with the node budget taken from [`BUDGET_ENV`] when set.
pub fn solver_config_from_env() -> Result<SolverConfig, MetricsError> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(|node_budget| SolverConfig { node_budget })
            .map_err(|_| MetricsError::InvalidBudget(v)),
        Err(_) => Ok(SolverConfig {
            node_budget: DEFAULT_NODE_BUDGET,
        }),
    }
}

/// Result of analyzing one subject under one model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Rationalizable; carries the revealed relation when it was computed.
    Pass(Option<Relation>),
    Fail,
    /// The analysis did not finish (for example, the node budget ran out).
    Error(String),
}

impl Outcome {
    pub fn passed(&self) -> bool {
        matches!(self, Outcome::Pass(_))
    }
}

pub fn analyze_subject(
    model: ModelSpec,
    d: &ChoiceDataset,
    cfg: &SolverConfig,
    with_revealed: bool,
) -> Outcome {
    if !with_revealed {
        return match revpref_core::models::is_rationalizable_with(model, d, cfg) {
            Ok(true) => Outcome::Pass(None),
            Ok(false) => Outcome::Fail,
            Err(e) => Outcome::Error(e.to_string()),
        };
    }
    let opts = RevealOptions {
        solver: *cfg,
        ..RevealOptions::default()
    };
    match revealed_with(model, d, &opts) {
        Ok(r) => Outcome::Pass(Some(r.revealed)),
        Err(ModelError::NotRationalizable) => Outcome::Fail,
        Err(e) => Outcome::Error(e.to_string()),
    }
}

/// Outcomes of every subject of a pool under one model, in pool order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelAnalysis {
    pub model: ModelSpec,
    pub n: usize,
    pub outcomes: Vec<(String, Outcome)>,
}

impl ModelAnalysis {
    pub fn passes(&self) -> usize {
        self.outcomes.iter().filter(|(_, o)| o.passed()).count()
    }

    pub fn fails(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|(_, o)| *o == Outcome::Fail)
            .count()
    }

    pub fn errors(&self) -> Vec<(&str, &str)> {
        self.outcomes
            .iter()
            .filter_map(|(id, o)| match o {
                Outcome::Error(m) => Some((id.as_str(), m.as_str())),
                _ => None,
            })
            .collect()
    }

    /// Share of passing subjects among those analyzed without error.
    pub fn pass_rate(&self) -> Result<f64, MetricsError> {
        let analyzed = self.passes() + self.fails();
        if analyzed == 0 {
            return Err(MetricsError::NoAnalyzedSubjects(self.model));
        }
        Ok(self.passes() as f64 / analyzed as f64)
    }

    fn revealed_relations(&self) -> impl Iterator<Item = &Relation> {
        self.outcomes.iter().filter_map(|(_, o)| match o {
            Outcome::Pass(Some(r)) => Some(r),
            _ => None,
        })
    }

    /// Mean revealed-relation density over passing subjects.
    pub fn avg_density(&self) -> Result<f64, MetricsError> {
        let densities: Vec<f64> = self
            .revealed_relations()
            .map(|r| density(r, self.n))
            .collect();
        if densities.is_empty() {
            return Err(MetricsError::NoPassingSubjects(self.model));
        }
        Ok(densities.iter().sum::<f64>() / densities.len() as f64)
    }

    /// Passing subjects by number of revealed pairs, `0..=n(n-1)/2`.
    pub fn density_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.n * self.n.saturating_sub(1) / 2 + 1];
        for r in self.revealed_relations() {
            h[r.len()] += 1;
        }
        h
    }
}

/// Analyzes every subject of `pool` under each model, in parallel. The
/// result is ordered like `models`, and each analysis like the pool.
pub fn analyze_pool(
    models: &[ModelSpec],
    pool: &SubjectPool,
    cfg: &SolverConfig,
    with_revealed: bool,
) -> Vec<ModelAnalysis> {
    let per_subject: Vec<Vec<Outcome>> = pool
        .subjects
        .par_iter()
        .map(|s| {
            models
                .iter()
                .map(|&m| analyze_subject(m, &s.data, cfg, with_revealed))
                .collect()
        })
        .collect();
    models
        .iter()
        .enumerate()
        .map(|(i, &model)| ModelAnalysis {
            model,
            n: pool.n(),
            outcomes: pool
                .subjects
                .iter()
                .zip(&per_subject)
                .map(|(s, row)| (s.id.clone(), row[i].clone()))
                .collect(),
        })
        .collect()
}

fn strict(analysis: ModelAnalysis) -> Result<ModelAnalysis, MetricsError> {
    if let Some((id, msg)) = analysis.errors().first() {
        return Err(MetricsError::Subject {
            subject: id.to_string(),
            message: msg.to_string(),
        });
    }
    Ok(analysis)
}

/// Share of subjects that pass the model. Solver failures are returned with
/// the subject id.
pub fn pass_rate(model: ModelSpec, pool: &SubjectPool) -> Result<f64, MetricsError> {
    let cfg = solver_config_from_env()?;
    let a = analyze_pool(&[model], pool, &cfg, false).remove(0);
    strict(a)?.pass_rate()
}

/// Pass rate on `real` minus pass rate on `random`.
pub fn psi(
    model: ModelSpec,
    real: &SubjectPool,
    random: &SubjectPool,
) -> Result<f64, MetricsError> {
    if real.menus != random.menus {
        return Err(MetricsError::MenuMismatch);
    }
    Ok(pass_rate(model, real)? - pass_rate(model, random)?)
}

/// Mean revealed-relation density over the subjects that pass the model.
pub fn avg_density(model: ModelSpec, pool: &SubjectPool) -> Result<f64, MetricsError> {
    let cfg = solver_config_from_env()?;
    let a = analyze_pool(&[model], pool, &cfg, true).remove(0);
    strict(a)?.avg_density()
}

/// Histograms over `0..=n` of the number of distinct chosen alternatives,
/// of WARP-involved alternatives and of directly involved alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indicators {
    pub distinct_chosen: Vec<usize>,
    pub warp_involved: Vec<usize>,
    pub warp_directly_involved: Vec<usize>,
}

pub fn indicator_distributions(pool: &SubjectPool) -> Indicators {
    let n = pool.n();
    let mut out = Indicators {
        distinct_chosen: vec![0; n + 1],
        warp_involved: vec![0; n + 1],
        warp_directly_involved: vec![0; n + 1],
    };
    for s in &pool.subjects {
        out.distinct_chosen[distinct_chosen(&s.data)] += 1;
        out.warp_involved[warp_involved(&s.data).len()] += 1;
        out.warp_directly_involved[warp_directly_involved(&s.data).len()] += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use revpref_core::data::Alternative;
    use revpref_core::fixtures;

    fn pool_of(sets: &[ChoiceDataset]) -> SubjectPool {
        let d0 = &sets[0];
        let menus = d0.observations().iter().map(|o| o.menu).collect();
        let alts = (0..d0.n())
            .map(|i| Alternative::new(i, format!("a{i}")))
            .collect();
        SubjectPool::from_choices(
            alts,
            menus,
            sets.iter().enumerate().map(|(i, d)| {
                (
                    format!("s{i}"),
                    d.observations().iter().map(|o| o.choice).collect(),
                )
            }),
        )
        .unwrap()
    }

    #[test]
    fn nc1_passes_everything_and_reveals_nothing() {
        let pool = pool_of(&[fixtures::d_warp(), fixtures::d_warp()]);
        assert_eq!(pass_rate(ModelSpec::nc(1), &pool), Ok(1.0));
        assert_eq!(avg_density(ModelSpec::nc(1), &pool), Ok(0.0));
        assert_eq!(psi(ModelSpec::nc(1), &pool, &pool), Ok(0.0));
    }

    #[test]
    fn sarp_subjects_fail_nc2() {
        let pool = pool_of(&[fixtures::d_sarp(), fixtures::d_sarp()]);
        assert_eq!(pass_rate(ModelSpec::nc(2), &pool), Ok(0.0));
        assert_eq!(
            avg_density(ModelSpec::nc(2), &pool),
            Err(MetricsError::NoPassingSubjects(ModelSpec::nc(2)))
        );
    }

    #[test]
    fn rational_closure_is_complete() {
        let pool = pool_of(&[fixtures::d_rat()]);
        assert_eq!(avg_density(ModelSpec::RATIONAL, &pool), Ok(1.0));
    }

    #[test]
    fn menu_mismatch() {
        let a = pool_of(&[fixtures::d_rat()]);
        let b = pool_of(&[fixtures::d_warp()]);
        assert_eq!(psi(ModelSpec::LA, &a, &b), Err(MetricsError::MenuMismatch));
    }

    #[test]
    fn warp_subject_indicators() {
        let pool = pool_of(&[fixtures::d_warp()]);
        let ind = indicator_distributions(&pool);
        assert_eq!(ind.warp_involved[2], 1);
        assert_eq!(ind.warp_directly_involved[2], 1);
        assert_eq!(ind.distinct_chosen.iter().sum::<usize>(), 1);
    }

    #[test]
    fn budget_errors_are_recorded() {
        let pool = pool_of(&[fixtures::d_sarp()]);
        let cfg = SolverConfig { node_budget: 0 };
        let a = analyze_pool(&[ModelSpec::TRSM], &pool, &cfg, true).remove(0);
        assert_eq!(a.errors().len(), 1);
        assert_eq!(a.errors()[0].0, "s0");
        assert_eq!(
            a.pass_rate(),
            Err(MetricsError::NoAnalyzedSubjects(ModelSpec::TRSM))
        );
    }
}
