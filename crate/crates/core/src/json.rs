//! JSON interchange for instances and plans.
//!
//! Floats are written with the shortest representation that parses back to
//! the same bits, so `load(save(x)) == x` exactly.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AcceptanceModel, AcceptanceTable, Allocation, Driver, Lineage, ModelKind, OfferPlan,
    PairParams, Point, ProblemInstance, Task,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    plane_size: f64,
    store: Point,
    rho: f64,
    mu: f64,
    seed: u64,
    model_kind: ModelKind,
    tasks: Vec<TaskEntry>,
    drivers: Vec<DriverEntry>,
    pairs: Vec<PairEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lineage: Option<Lineage>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskEntry {
    id: usize,
    x: f64,
    y: f64,
    c: f64,
    c_prime: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriverEntry {
    id: usize,
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairEntry {
    i: usize,
    j: usize,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    delta: Option<f64>,
    cap: f64,
    detour: f64,
    /// `(compensation, probability)` knots for generic models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<[f64; 2]>>,
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        at: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn instance_from_json(text: &str) -> Result<ProblemInstance> {
    let file: InstanceFile = parse(text)?;
    let kind = file.model_kind;
    let tasks: Vec<Task> = file
        .tasks
        .iter()
        .map(|t| Task {
            id: t.id,
            dest: Point::new(t.x, t.y),
            cost: t.c,
            penalized_cost: t.c_prime,
        })
        .collect();
    let drivers: Vec<Driver> = file
        .drivers
        .iter()
        .map(|d| Driver {
            id: d.id,
            dest: Point::new(d.x, d.y),
        })
        .collect();
    for (k, t) in tasks.iter().enumerate() {
        if t.id != k {
            return Err(Error::Schema {
                at: format!("tasks[{k}].id"),
                message: format!("expected id {k}, got {}", t.id),
            });
        }
    }
    for (k, d) in drivers.iter().enumerate() {
        if d.id != k {
            return Err(Error::Schema {
                at: format!("drivers[{k}].id"),
                message: format!("expected id {k}, got {}", d.id),
            });
        }
    }

    let (ni, nj) = (tasks.len(), drivers.len());
    let mut dense: Vec<Option<PairParams>> = vec![None; ni * nj];
    for (k, e) in file.pairs.iter().enumerate() {
        if e.i >= ni || e.j >= nj {
            return Err(Error::Schema {
                at: format!("pairs[{k}]"),
                message: format!("pair ({}, {}) out of range", e.i, e.j),
            });
        }
        let model = pair_model(kind, e).map_err(|message| Error::Schema {
            at: format!("pairs[{k}]"),
            message,
        })?;
        let slot = &mut dense[e.i * nj + e.j];
        if slot.is_some() {
            return Err(Error::Schema {
                at: format!("pairs[{k}]"),
                message: format!("duplicate pair ({}, {})", e.i, e.j),
            });
        }
        *slot = Some(PairParams {
            task: e.i,
            driver: e.j,
            model,
            cap: e.cap,
            detour: e.detour,
        });
    }
    let mut pairs = Vec::with_capacity(ni * nj);
    for (k, p) in dense.into_iter().enumerate() {
        match p {
            Some(p) => pairs.push(p),
            None => {
                return Err(Error::InvalidInstance(format!(
                    "missing pair entry ({}, {})",
                    k / nj,
                    k % nj
                )))
            }
        }
    }

    let mut inst = ProblemInstance::new(file.store, tasks, drivers, pairs)?;
    inst.plane_size = file.plane_size;
    inst.rho = file.rho;
    inst.mu = file.mu;
    inst.seed = file.seed;
    inst.lineage = file.lineage;
    inst.check()?;
    Ok(inst)
}

fn pair_model(kind: ModelKind, e: &PairEntry) -> std::result::Result<AcceptanceModel, String> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("{name} is required for {kind} pairs"));
    match kind {
        ModelKind::Linear => {
            let beta = need(e.beta, "beta")?;
            if !(beta > 0.0) {
                return Err(format!("beta must be > 0, got {beta}"));
            }
            Ok(AcceptanceModel::Linear {
                alpha: need(e.alpha, "alpha")?,
                beta,
            })
        }
        ModelKind::Logistic => {
            let delta = need(e.delta, "delta")?;
            if !(delta > 0.0) {
                return Err(format!("delta must be > 0, got {delta}"));
            }
            Ok(AcceptanceModel::Logistic {
                gamma: need(e.gamma, "gamma")?,
                delta,
            })
        }
        ModelKind::Generic => {
            let knots = e
                .table
                .as_ref()
                .ok_or_else(|| "table is required for generic pairs".to_string())?;
            AcceptanceTable::new(knots.iter().map(|k| (k[0], k[1])).collect())
                .map(AcceptanceModel::Tabulated)
                .map_err(|err| err.to_string())
        }
    }
}

pub fn instance_to_json(inst: &ProblemInstance) -> Result<String> {
    let kind = inst.model_kind().unwrap_or(ModelKind::Linear);
    if inst.n_tasks() * inst.n_drivers() > 0 && inst.model_kind().is_none() {
        return Err(Error::InvalidInstance(
            "instances mixing acceptance model kinds cannot be serialized".into(),
        ));
    }
    let file = InstanceFile {
        plane_size: inst.plane_size,
        store: inst.store,
        rho: inst.rho,
        mu: inst.mu,
        seed: inst.seed,
        model_kind: kind,
        tasks: inst
            .tasks
            .iter()
            .map(|t| TaskEntry {
                id: t.id,
                x: t.dest.x,
                y: t.dest.y,
                c: t.cost,
                c_prime: t.penalized_cost,
            })
            .collect(),
        drivers: inst
            .drivers
            .iter()
            .map(|d| DriverEntry {
                id: d.id,
                x: d.dest.x,
                y: d.dest.y,
            })
            .collect(),
        pairs: inst
            .pairs()
            .iter()
            .map(|p| {
                let mut e = PairEntry {
                    i: p.task,
                    j: p.driver,
                    alpha: None,
                    beta: None,
                    gamma: None,
                    delta: None,
                    cap: p.cap,
                    detour: p.detour,
                    table: None,
                };
                match &p.model {
                    AcceptanceModel::Linear { alpha, beta } => {
                        e.alpha = Some(*alpha);
                        e.beta = Some(*beta);
                    }
                    AcceptanceModel::Logistic { gamma, delta } => {
                        e.gamma = Some(*gamma);
                        e.delta = Some(*delta);
                    }
                    AcceptanceModel::Tabulated(t) => {
                        e.table = Some(t.knots().iter().map(|&(c, p)| [c, p]).collect());
                    }
                }
                e
            })
            .collect(),
        lineage: inst.lineage.clone(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Schema {
        at: String::new(),
        message: e.to_string(),
    })
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let text = read(path)?;
    instance_from_json(&text).map_err(|e| match e {
        Error::Schema { at, message } => Error::Schema {
            at,
            message: format!("{message} (in {})", path.display()),
        },
        other => other,
    })
}

pub fn save_instance(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &instance_to_json(inst)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    allocations: Vec<AllocationEntry>,
    expected_cost: f64,
    expected_distance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationEntry {
    task: usize,
    kind: AllocationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    driver: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    compensation: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AllocationKind {
    Company,
    Offer,
}

pub fn plan_to_json(plan: &OfferPlan) -> Result<String> {
    let file = PlanFile {
        allocations: plan
            .allocations
            .iter()
            .enumerate()
            .map(|(task, a)| match *a {
                Allocation::Company => AllocationEntry {
                    task,
                    kind: AllocationKind::Company,
                    driver: None,
                    compensation: None,
                },
                Allocation::Offer {
                    driver,
                    compensation,
                } => AllocationEntry {
                    task,
                    kind: AllocationKind::Offer,
                    driver: Some(driver),
                    compensation: Some(compensation),
                },
            })
            .collect(),
        expected_cost: plan.expected_cost,
        expected_distance: plan.expected_distance,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Schema {
        at: String::new(),
        message: e.to_string(),
    })
}

/// Parses a plan and re-evaluates it against `inst`; the stored cost and
/// distance are replaced by recomputed values.
pub fn plan_from_json(text: &str, inst: &ProblemInstance) -> Result<OfferPlan> {
    let file: PlanFile = parse(text)?;
    let mut allocations = vec![Allocation::Company; inst.n_tasks()];
    let mut seen = vec![false; inst.n_tasks()];
    for (k, e) in file.allocations.iter().enumerate() {
        if e.task >= inst.n_tasks() || seen[e.task] {
            return Err(Error::Schema {
                at: format!("allocations[{k}].task"),
                message: format!("task {} unknown or allocated twice", e.task),
            });
        }
        seen[e.task] = true;
        allocations[e.task] = match (e.kind, e.driver, e.compensation) {
            (AllocationKind::Company, _, _) => Allocation::Company,
            (AllocationKind::Offer, Some(driver), Some(compensation)) => Allocation::Offer {
                driver,
                compensation,
            },
            _ => {
                return Err(Error::Schema {
                    at: format!("allocations[{k}]"),
                    message: "offer needs driver and compensation".into(),
                })
            }
        };
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Schema {
            at: "allocations".into(),
            message: format!("task {missing} has no allocation"),
        });
    }
    OfferPlan::evaluate(inst, allocations)
}

pub fn save_plan(plan: &OfferPlan, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &plan_to_json(plan)?)
}

pub fn load_plan(path: impl AsRef<Path>, inst: &ProblemInstance) -> Result<OfferPlan> {
    plan_from_json(&read(path.as_ref())?, inst)
}
