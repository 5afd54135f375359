//! Metrics, scheme comparisons and parameter sweeps.

pub mod stats;
mod sweep;

pub use stats::{paired_t, paired_t_diffs, paired_t_records, trend_report, Axis, PairedT, TrendLevel};
pub use sweep::{read_records, run_sweep, sweep_to_csv, write_records, SweepConfig, SweepRow};

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acceptance::SolverConfig;
use crate::error::{Error, Result};
use crate::model::{ModelKind, OfferPlan, ProblemInstance};
use crate::schemes::{plan_for_scheme, SchemeKind};

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub model: ModelKind,
    #[serde(rename = "O")]
    pub n_drivers: usize,
    pub rho: f64,
    pub mu: f64,
    pub seed: u64,
    pub scheme: SchemeKind,
    /// Tuned rate; empty for the individual scheme.
    pub p: Option<f64>,
    pub expected_cost: f64,
    pub cost_saving_pct: f64,
    pub expected_distance: f64,
    pub distance_saving_pct: f64,
    pub fraction_offered: f64,
    /// Empty when nothing is offered.
    pub mean_acceptance: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

/// Identifies the instance a record was computed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceKey {
    pub model: ModelKind,
    pub n_drivers: usize,
    pub rho: f64,
    pub mu: f64,
    pub seed: u64,
}

impl fmt::Display for InstanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} O={} rho={} mu={} seed={}",
            self.model, self.n_drivers, self.rho, self.mu, self.seed
        )
    }
}

impl ExperimentRecord {
    pub fn key(&self) -> InstanceKey {
        InstanceKey {
            model: self.model,
            n_drivers: self.n_drivers,
            rho: self.rho,
            mu: self.mu,
            seed: self.seed,
        }
    }

    /// Deterministic row order: instance key, then scheme.
    pub fn cmp_order(&self, other: &Self) -> std::cmp::Ordering {
        self.model
            .cmp(&other.model)
            .then(self.n_drivers.cmp(&other.n_drivers))
            .then(self.rho.total_cmp(&other.rho))
            .then(self.mu.total_cmp(&other.mu))
            .then(self.seed.cmp(&other.seed))
            .then(self.scheme.cmp(&other.scheme))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ExpectedCost,
    CostSaving,
    ExpectedDistance,
    DistanceSaving,
    FractionOffered,
    MeanAcceptance,
}

impl Metric {
    pub fn of(self, r: &ExperimentRecord) -> Option<f64> {
        match self {
            Metric::ExpectedCost => Some(r.expected_cost),
            Metric::CostSaving => Some(r.cost_saving_pct),
            Metric::ExpectedDistance => Some(r.expected_distance),
            Metric::DistanceSaving => Some(r.distance_saving_pct),
            Metric::FractionOffered => Some(r.fraction_offered),
            Metric::MeanAcceptance => r.mean_acceptance,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "expected_cost" => Metric::ExpectedCost,
            "cost_saving_pct" => Metric::CostSaving,
            "expected_distance" => Metric::ExpectedDistance,
            "distance_saving_pct" => Metric::DistanceSaving,
            "fraction_offered" => Metric::FractionOffered,
            "mean_acceptance" => Metric::MeanAcceptance,
            other => return Err(Error::Config(format!("unknown metric `{other}`"))),
        })
    }
}

/// Percentage saved relative to `baseline`; 0 when the baseline is 0.
pub fn saving_pct(baseline: f64, value: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        100.0 * (baseline - value) / baseline
    }
}

/// Plan-level metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanMetrics {
    pub expected_cost: f64,
    pub cost_saving_pct: f64,
    pub expected_distance: f64,
    pub distance_saving_pct: f64,
    pub fraction_offered: f64,
    pub mean_acceptance: Option<f64>,
}

pub fn plan_metrics(inst: &ProblemInstance, plan: &OfferPlan) -> PlanMetrics {
    let probs: Vec<f64> = plan.acceptance.iter().flatten().copied().collect();
    PlanMetrics {
        expected_cost: plan.expected_cost,
        cost_saving_pct: saving_pct(inst.baseline_cost(), plan.expected_cost),
        expected_distance: plan.expected_distance,
        distance_saving_pct: saving_pct(inst.baseline_distance(), plan.expected_distance),
        fraction_offered: probs.len() as f64 / inst.n_tasks() as f64,
        mean_acceptance: (!probs.is_empty()).then(|| probs.iter().sum::<f64>() / probs.len() as f64),
    }
}

/// Model label of an instance: its generator's model, else the common
/// pair model, else generic.
pub fn instance_model(inst: &ProblemInstance) -> ModelKind {
    inst.lineage
        .as_ref()
        .map(|l| l.model)
        .or_else(|| inst.model_kind())
        .unwrap_or(ModelKind::Generic)
}

/// A record together with the plan it describes.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub record: ExperimentRecord,
    pub plan: OfferPlan,
}

/// Solves `inst` under `scheme` (tuning benchmark rates) and fills in all
/// metrics. Wall time is recorded only when `timing` is set.
pub fn evaluate(inst: &ProblemInstance, scheme: SchemeKind, cfg: &SolverConfig, timing: bool) -> Result<Evaluation> {
    let start = Instant::now();
    let (plan, p) = plan_for_scheme(scheme, inst, cfg)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let m = plan_metrics(inst, &plan);
    let record = ExperimentRecord {
        model: instance_model(inst),
        n_drivers: inst.n_drivers(),
        rho: inst.rho,
        mu: inst.mu,
        seed: inst.seed,
        scheme,
        p,
        expected_cost: m.expected_cost,
        cost_saving_pct: m.cost_saving_pct,
        expected_distance: m.expected_distance,
        distance_saving_pct: m.distance_saving_pct,
        fraction_offered: m.fraction_offered,
        mean_acceptance: m.mean_acceptance,
        wall_time_ms: timing.then_some(elapsed),
    };
    Ok(Evaluation { record, plan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::line_instance;
    use crate::model::{expected_cost, AcceptanceModel};

    #[test]
    fn no_beneficial_offer_gives_null_acceptance() {
        // Zero caps leave nothing to offer.
        let inst = line_instance(&[10.0, 5.0], 0.0, 2, AcceptanceModel::Linear { alpha: 0.2, beta: 0.1 }, 0.0);
        let e = evaluate(&inst, SchemeKind::Individual, &SolverConfig::default(), false).unwrap();
        assert_eq!(e.record.fraction_offered, 0.0);
        assert_eq!(e.record.mean_acceptance, None);
        assert_eq!(e.record.cost_saving_pct, 0.0);
        assert_eq!(e.record.wall_time_ms, None);
    }

    #[test]
    fn all_company_saves_nothing() {
        let inst = line_instance(&[10.0, 5.0], 0.1, 2, AcceptanceModel::Linear { alpha: 0.5, beta: 0.1 }, 5.0);
        let m = plan_metrics(&inst, &OfferPlan::all_company(&inst));
        assert_eq!((m.cost_saving_pct, m.distance_saving_pct), (0.0, 0.0));
    }

    #[test]
    fn record_metrics_match_plan() {
        let inst = line_instance(&[10.0, 12.0, 7.0], 0.1, 2, AcceptanceModel::Linear { alpha: 0.5, beta: 0.1 }, 5.0);
        for scheme in SchemeKind::ALL {
            let e = evaluate(&inst, scheme, &SolverConfig::default(), true).unwrap();
            let r = &e.record;
            assert!((r.expected_cost - expected_cost(&e.plan, &inst).unwrap()).abs() < 1e-9);
            assert!(r.fraction_offered <= (2.0f64 / 3.0).min(1.0));
            assert!(r.mean_acceptance.is_none_or(|a| (0.0..=1.0).contains(&a)));
            assert!(r.wall_time_ms.is_some());
            assert_eq!(r.p.is_none(), scheme == SchemeKind::Individual);
        }
    }

    #[test]
    fn metric_names_parse() {
        assert_eq!("mean_acceptance".parse::<Metric>().unwrap(), Metric::MeanAcceptance);
        assert!("median".parse::<Metric>().is_err());
    }
}
