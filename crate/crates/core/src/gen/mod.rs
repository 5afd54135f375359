//! Synthetic instances and logistic calibration.
//!
//! Destinations are uniform on a square plane with the store at its centre.
//! Linear acceptance uses `alpha = mu d_j / (d_i + d_ij)` and
//! `beta = detour * U[0.5, 2]`. Logistic parameters come from a regression
//! fitted to decisions simulated under the linear model.

mod logistic;
pub mod rng;

pub use logistic::{constant_log_loss, fit_logistic, LogisticFit};

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    round2, AcceptanceModel, Driver, Lineage, ModelKind, PairParams, Point, ProblemInstance, Task,
};
use rng::{substream, uniform, StreamKind};

pub const PLANE_SIZE: f64 = 200.0;
/// Smallest generated linear slope.
pub const BETA_FLOOR: f64 = 1e-6;
pub const DEFAULT_FIT_POINTS: usize = 100_000;
/// Regression features, in order.
pub const FEATURES: [&str; 5] = ["d_i", "d_j", "detour", "compensation", "sensitivity"];
const COMPENSATION_FEATURE: usize = 3;
pub const GENERATOR_NAME: &str = "uniform-plane-v1";

/// Upper bound used for compensations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapRule {
    /// Never pay more than the company cost `c_i`.
    #[default]
    Company,
    /// Allow up to the penalized cost `c'_i`.
    Penalized,
}

impl std::str::FromStr for CapRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "company" => Ok(CapRule::Company),
            "penalized" => Ok(CapRule::Penalized),
            other => Err(Error::Config(format!("unknown cap rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_tasks: usize,
    pub n_drivers: usize,
    pub rho: f64,
    pub mu: f64,
    pub seed: u64,
    pub model: ModelKind,
    pub cap_rule: CapRule,
    /// Rows in the simulated dataset behind a logistic calibration.
    pub fit_points: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_tasks: 100,
            n_drivers: 100,
            rho: 0.1,
            mu: 0.5,
            seed: 0,
            model: ModelKind::Linear,
            cap_rule: CapRule::Company,
            fit_points: DEFAULT_FIT_POINTS,
        }
    }
}

impl GenConfig {
    pub fn check(&self) -> Result<()> {
        if self.n_tasks == 0 || self.n_drivers == 0 {
            return Err(Error::Config("task and driver counts must be >= 1".into()));
        }
        if !(0.0..=0.25).contains(&self.rho) {
            return Err(Error::Config(format!("rho must be in [0, 0.25], got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::Config(format!("mu must be in [0, 1], got {}", self.mu)));
        }
        if self.model == ModelKind::Generic {
            return Err(Error::Config("the generator supports linear and logistic models".into()));
        }
        if self.model == ModelKind::Logistic && self.fit_points < 2 {
            return Err(Error::Config("logistic calibration needs at least 2 data points".into()));
        }
        Ok(())
    }
}

fn random_point(seed: u64, kind: StreamKind, index: u64) -> Point {
    let mut r = substream(seed, kind, index);
    let x = round2(uniform(&mut r, 0.0, PLANE_SIZE));
    let y = round2(uniform(&mut r, 0.0, PLANE_SIZE));
    Point::new(x, y)
}

fn store() -> Point {
    Point::new(PLANE_SIZE / 2.0, PLANE_SIZE / 2.0)
}

/// Base acceptance probability `mu d_j / (d_i + d_ij)`, clamped to `[0, 1]`.
pub fn base_probability(mu: f64, d_i: f64, d_j: f64, d_ij: f64) -> f64 {
    let denom = d_i + d_ij;
    if denom <= 0.0 {
        return mu;
    }
    (mu * d_j / denom).clamp(0.0, 1.0)
}

/// Linear slope: detour times a uniform factor in `[0.5, 2]`, floored.
fn sensitivity(detour: f64, factor: f64) -> f64 {
    (detour * factor).max(BETA_FLOOR)
}

/// Geometry and linear parameters of one pair.
#[derive(Debug, Clone, Copy)]
struct PairDraw {
    d_i: f64,
    d_j: f64,
    detour: f64,
    alpha: f64,
    beta: f64,
}

fn pair_draw(seed: u64, mu: f64, store: Point, task: Point, driver: Point, key: u64) -> PairDraw {
    let d_i = store.dist(&task);
    let d_j = store.dist(&driver);
    let d_ij = task.dist(&driver);
    let detour = d_i + d_ij - d_j;
    let mut r = substream(seed, StreamKind::Pair, key);
    let factor = uniform(&mut r, 0.5, 2.0);
    PairDraw {
        d_i,
        d_j,
        detour,
        alpha: base_probability(mu, d_i, d_j, d_ij),
        beta: sensitivity(detour, factor),
    }
}

/// Instance for `cfg`. Logistic instances run a fresh calibration.
pub fn generate(cfg: &GenConfig) -> Result<ProblemInstance> {
    cfg.check()?;
    let fit = match cfg.model {
        ModelKind::Logistic => Some(calibration_fit(cfg.seed, cfg.mu, cfg.fit_points)?),
        _ => None,
    };
    generate_with_fit(cfg, fit.as_ref())
}

/// Instance for `cfg`, reusing `fit` for logistic pairs.
pub fn generate_with_fit(cfg: &GenConfig, fit: Option<&LogisticFit>) -> Result<ProblemInstance> {
    cfg.check()?;
    let store = store();
    let tasks: Vec<Task> = (0..cfg.n_tasks)
        .map(|id| {
            let dest = random_point(cfg.seed, StreamKind::Task, id as u64);
            let cost = store.dist(&dest);
            Task {
                id,
                dest,
                cost,
                penalized_cost: (1.0 + cfg.rho) * cost,
            }
        })
        .collect();
    let drivers: Vec<Driver> = (0..cfg.n_drivers)
        .map(|id| Driver {
            id,
            dest: random_point(cfg.seed, StreamKind::Driver, id as u64),
        })
        .collect();

    let mut pairs = Vec::with_capacity(tasks.len() * drivers.len());
    for t in &tasks {
        for d in &drivers {
            let key = ((t.id as u64) << 32) | d.id as u64;
            let g = pair_draw(cfg.seed, cfg.mu, store, t.dest, d.dest, key);
            let limit = match cfg.cap_rule {
                CapRule::Company => t.cost,
                CapRule::Penalized => t.penalized_cost,
            };
            let (model, cap) = match cfg.model {
                ModelKind::Linear => (
                    AcceptanceModel::Linear {
                        alpha: g.alpha,
                        beta: g.beta,
                    },
                    limit.min((1.0 - g.alpha) / g.beta),
                ),
                _ => {
                    let fit = fit.ok_or_else(|| Error::Config("logistic generation needs a fit".into()))?;
                    (calibrated_model(fit, g.d_i, g.d_j, g.detour, g.beta)?, limit)
                }
            };
            pairs.push(PairParams {
                task: t.id,
                driver: d.id,
                model,
                cap,
                detour: g.detour,
            });
        }
    }

    let mut inst = ProblemInstance::new(store, tasks, drivers, pairs)?;
    inst.plane_size = PLANE_SIZE;
    inst.rho = cfg.rho;
    inst.mu = cfg.mu;
    inst.seed = cfg.seed;
    inst.lineage = Some(Lineage {
        generator: GENERATOR_NAME.into(),
        seed: cfg.seed,
        n_tasks: cfg.n_tasks,
        n_drivers: cfg.n_drivers,
        rho: cfg.rho,
        mu: cfg.mu,
        model: cfg.model,
        fit_coefficients: fit.map(|f| {
            let mut c = vec![f.intercept];
            c.extend(&f.coefficients);
            c
        }),
        fit_seed: fit.map(|_| cfg.seed),
    });
    Ok(inst)
}

/// Logistic parameters of a pair: `gamma = intercept + coef . (d_i, d_j,
/// detour, sensitivity)` and `delta` = the compensation coefficient.
fn calibrated_model(fit: &LogisticFit, d_i: f64, d_j: f64, detour: f64, beta: f64) -> Result<AcceptanceModel> {
    let c = &fit.coefficients;
    let delta = c[COMPENSATION_FEATURE];
    if !(delta > 0.0) {
        return Err(Error::Fit(format!("compensation coefficient not positive ({delta})")));
    }
    let gamma = fit.intercept + c[0] * d_i + c[1] * d_j + c[2] * detour + c[4] * beta;
    Ok(AcceptanceModel::Logistic { gamma, delta })
}

/// Replaces every pair model of `inst` by its logistic calibration, with
/// caps reset to the company cost.
pub fn calibrate_pairs(inst: &ProblemInstance, fit: &LogisticFit) -> Result<ProblemInstance> {
    let mut out = inst.clone();
    let dists: Vec<f64> = (0..inst.n_tasks()).map(|i| inst.task_distance(i)).collect();
    let ddists: Vec<f64> = (0..inst.n_drivers()).map(|j| inst.driver_distance(j)).collect();
    let costs: Vec<f64> = inst.tasks.iter().map(|t| t.cost).collect();
    for p in out.pairs_mut() {
        let beta = match p.model {
            AcceptanceModel::Linear { beta, .. } => beta,
            _ => {
                return Err(Error::Config(format!(
                    "pair ({}, {}) has no linear sensitivity to calibrate from",
                    p.task, p.driver
                )))
            }
        };
        p.model = calibrated_model(fit, dists[p.task], ddists[p.driver], p.detour, beta)?;
        p.cap = costs[p.task];
    }
    if let Some(l) = out.lineage.as_mut() {
        l.model = ModelKind::Logistic;
        let mut c = vec![fit.intercept];
        c.extend(&fit.coefficients);
        l.fit_coefficients = Some(c);
        l.fit_seed = Some(inst.seed);
    }
    Ok(out)
}

/// Simulated offer decisions under the linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionDataset {
    /// Rows of [`FEATURES`].
    pub features: Vec<[f64; 5]>,
    pub accepted: Vec<bool>,
}

impl DecisionDataset {
    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    /// First `1 - holdout` fraction and the rest.
    pub fn split(&self, holdout: f64) -> (DecisionDataset, DecisionDataset) {
        let cut = ((1.0 - holdout) * self.len() as f64).round() as usize;
        (
            DecisionDataset {
                features: self.features[..cut].to_vec(),
                accepted: self.accepted[..cut].to_vec(),
            },
            DecisionDataset {
                features: self.features[cut..].to_vec(),
                accepted: self.accepted[cut..].to_vec(),
            },
        )
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted.iter().filter(|&&a| a).count() as f64 / self.len() as f64
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = FEATURES.to_vec();
        header.push("accepted");
        w.write_record(&header)?;
        for (f, &a) in self.features.iter().zip(&self.accepted) {
            let mut rec: Vec<String> = f.iter().map(|v| v.to_string()).collect();
            rec.push(u8::from(a).to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Maximum compensation in the simulated data, the largest possible
/// store-to-destination distance.
pub fn max_simulated_compensation() -> f64 {
    (PLANE_SIZE / 2.0) * std::f64::consts::SQRT_2
}

/// `n` independent decisions: a fresh task/driver pair per row, a uniform
/// compensation on `[0, 100 sqrt 2]` and a Bernoulli outcome under the
/// linear acceptance probability.
pub fn simulate_decisions(seed: u64, mu: f64, n: usize) -> DecisionDataset {
    let store = store();
    let mut r = substream(seed, StreamKind::Dataset, 0);
    let c_max = max_simulated_compensation();
    let mut features = Vec::with_capacity(n);
    let mut accepted = Vec::with_capacity(n);
    for _ in 0..n {
        let mut pt = || {
            let x = round2(uniform(&mut r, 0.0, PLANE_SIZE));
            let y = round2(uniform(&mut r, 0.0, PLANE_SIZE));
            Point::new(x, y)
        };
        let task = pt();
        let driver = pt();
        let d_i = store.dist(&task);
        let d_j = store.dist(&driver);
        let d_ij = task.dist(&driver);
        let detour = d_i + d_ij - d_j;
        let alpha = base_probability(mu, d_i, d_j, d_ij);
        let beta = sensitivity(detour, uniform(&mut r, 0.5, 2.0));
        let c = uniform(&mut r, 0.0, c_max);
        let p = AcceptanceModel::Linear { alpha, beta }.prob(c);
        let u = uniform(&mut r, 0.0, 1.0);
        features.push([d_i, d_j, detour, c, beta]);
        accepted.push(u < p);
    }
    DecisionDataset { features, accepted }
}

/// Logistic fit on the simulated decisions for `(seed, mu)`.
pub fn calibration_fit(seed: u64, mu: f64, n: usize) -> Result<LogisticFit> {
    let data = simulate_decisions(seed, mu, n);
    fit_logistic(&data.features, &data.accepted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(model: ModelKind) -> GenConfig {
        GenConfig {
            n_tasks: 8,
            n_drivers: 5,
            rho: 0.1,
            mu: 0.5,
            seed: 3,
            model,
            fit_points: 20_000,
            ..Default::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&cfg(ModelKind::Linear)).unwrap();
        let b = generate(&cfg(ModelKind::Linear)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn more_drivers_keep_task_coordinates() {
        let a = generate(&cfg(ModelKind::Linear)).unwrap();
        let mut c = cfg(ModelKind::Linear);
        c.n_drivers = 9;
        let b = generate(&c).unwrap();
        assert_eq!(a.tasks, b.tasks);
        assert_eq!(a.drivers[..], b.drivers[..5]);
        assert_eq!(a.pair(2, 3), b.pair(2, 3));
    }

    #[test]
    fn zero_mu_gives_zero_base_probability() {
        let mut c = cfg(ModelKind::Linear);
        c.mu = 0.0;
        let inst = generate(&c).unwrap();
        for p in inst.pairs() {
            assert!(matches!(p.model, AcceptanceModel::Linear { alpha, .. } if alpha == 0.0));
        }
    }

    #[test]
    fn generated_invariants() {
        let mut c = cfg(ModelKind::Linear);
        c.n_tasks = 60;
        c.n_drivers = 40;
        let inst = generate(&c).unwrap();
        inst.check().unwrap();
        for t in &inst.tasks {
            assert!(t.cost <= 100.0 * 2f64.sqrt() + 1e-9);
            assert!((t.penalized_cost - 1.1 * t.cost).abs() < 1e-12);
            assert_eq!(t.dest.x, round2(t.dest.x));
            assert!((0.0..=PLANE_SIZE).contains(&t.dest.x));
        }
        for p in inst.pairs() {
            let AcceptanceModel::Linear { alpha, beta } = p.model else { panic!() };
            assert!((0.0..=1.0).contains(&alpha));
            assert!(beta >= BETA_FLOOR);
            assert!(p.detour >= -1e-9);
            let c = inst.tasks[p.task].cost;
            assert_eq!(p.cap, c.min((1.0 - alpha) / beta));
        }
    }

    #[test]
    fn penalized_cap_rule_raises_caps() {
        let mut c = cfg(ModelKind::Logistic);
        c.cap_rule = CapRule::Penalized;
        let inst = generate(&c).unwrap();
        for p in inst.pairs() {
            assert_eq!(p.cap, inst.tasks[p.task].penalized_cost);
        }
    }

    #[test]
    fn zero_compensation_rows_never_accept() {
        let data = simulate_decisions(5, 0.7, 5_000);
        for (f, &a) in data.features.iter().zip(&data.accepted) {
            if f[COMPENSATION_FEATURE] == 0.0 {
                assert!(!a);
            }
        }
        assert_eq!(data, simulate_decisions(5, 0.7, 5_000));
    }

    #[test]
    fn acceptance_frequency_matches_model_probability() {
        let data = simulate_decisions(9, 0.5, 200_000);
        let mut expected = 0.0;
        for f in &data.features {
            let [d_i, d_j, detour, c, beta] = *f;
            let d_ij = detour + d_j - d_i;
            expected += AcceptanceModel::Linear {
                alpha: base_probability(0.5, d_i, d_j, d_ij),
                beta,
            }
            .prob(c);
        }
        expected /= data.len() as f64;
        let rate = data.acceptance_rate();
        // Standard error of the mean is at most 0.5 / sqrt(n) ~ 0.0011.
        assert!((rate - expected).abs() < 0.006, "{rate} vs {expected}");
    }

    #[test]
    fn logistic_instances_carry_fit_lineage() {
        let inst = generate(&cfg(ModelKind::Logistic)).unwrap();
        let lin = inst.lineage.as_ref().unwrap();
        assert_eq!(lin.fit_coefficients.as_ref().unwrap().len(), 6);
        let delta = lin.fit_coefficients.as_ref().unwrap()[1 + COMPENSATION_FEATURE];
        for p in inst.pairs() {
            assert!(matches!(p.model, AcceptanceModel::Logistic { delta: d, .. } if d == delta && d > 0.0));
            assert_eq!(p.cap, inst.tasks[p.task].cost);
        }
    }

    #[test]
    fn calibration_matches_generated_logistic() {
        let fit = calibration_fit(3, 0.5, 20_000).unwrap();
        let linear = generate(&cfg(ModelKind::Linear)).unwrap();
        let logistic = generate_with_fit(&cfg(ModelKind::Logistic), Some(&fit)).unwrap();
        let calibrated = calibrate_pairs(&linear, &fit).unwrap();
        assert_eq!(calibrated.pairs(), logistic.pairs());
    }

    #[test]
    fn gamma_is_linear_in_features() {
        let fit = LogisticFit {
            intercept: 0.3,
            coefficients: vec![0.01, -0.02, -0.05, 0.2, 0.7],
            means: vec![0.0; 5],
            scales: vec![1.0; 5],
            log_likelihood: 0.0,
            iterations: 0,
            gradient_norm: 0.0,
        };
        let g = |detour: f64| match calibrated_model(&fit, 50.0, 40.0, detour, 1.0).unwrap() {
            AcceptanceModel::Logistic { gamma, .. } => gamma,
            _ => unreachable!(),
        };
        assert!((g(12.0) - g(10.0) - 2.0 * -0.05).abs() < 1e-12);
        let zero = LogisticFit {
            coefficients: vec![0.0, 0.0, 0.0, 0.2, 0.0],
            ..fit.clone()
        };
        match calibrated_model(&zero, 50.0, 40.0, 10.0, 1.0).unwrap() {
            AcceptanceModel::Logistic { gamma, delta } => assert_eq!((gamma, delta), (0.3, 0.2)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = cfg(ModelKind::Linear);
        c.rho = 0.5;
        assert!(generate(&c).is_err());
        let mut c = cfg(ModelKind::Linear);
        c.n_drivers = 0;
        assert!(generate(&c).is_err());
    }
}
