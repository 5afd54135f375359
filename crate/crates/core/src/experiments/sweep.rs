//! Parallel parameter sweeps with a resumable CSV table.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::BufWriter;
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;

use super::{evaluate, Evaluation, ExperimentRecord, InstanceKey};
use crate::acceptance::SolverConfig;
use crate::error::{Error, Result};
use crate::gen::{calibration_fit, generate_with_fit, CapRule, GenConfig, LogisticFit, DEFAULT_FIT_POINTS};
use crate::model::ModelKind;
use crate::schemes::SchemeKind;

pub type SweepRow = Evaluation;

/// Cartesian grid of instances (`models x drivers x rhos x mus x seeds`)
/// and the schemes evaluated on each.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub models: Vec<ModelKind>,
    pub n_tasks: usize,
    pub drivers: Vec<usize>,
    pub rhos: Vec<f64>,
    pub mus: Vec<f64>,
    pub seeds: Vec<u64>,
    pub schemes: Vec<SchemeKind>,
    pub cap_rule: CapRule,
    pub fit_points: usize,
    pub solver: SolverConfig,
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            models: vec![ModelKind::Linear, ModelKind::Logistic],
            n_tasks: 20,
            drivers: vec![10, 30],
            rhos: vec![0.0, 0.1],
            mus: vec![0.3, 0.7],
            seeds: vec![1, 2, 3],
            schemes: SchemeKind::ALL.to_vec(),
            cap_rule: CapRule::Company,
            fit_points: DEFAULT_FIT_POINTS,
            solver: SolverConfig::default(),
            timing: false,
        }
    }
}

impl SweepConfig {
    pub fn instances(&self) -> Vec<GenConfig> {
        let mut out = Vec::new();
        for &model in &self.models {
            for &n_drivers in &self.drivers {
                for &rho in &self.rhos {
                    for &mu in &self.mus {
                        for &seed in &self.seeds {
                            out.push(GenConfig {
                                n_tasks: self.n_tasks,
                                n_drivers,
                                rho,
                                mu,
                                seed,
                                model,
                                cap_rule: self.cap_rule,
                                fit_points: self.fit_points,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn n_rows(&self) -> usize {
        self.models.len() * self.drivers.len() * self.rhos.len() * self.mus.len() * self.seeds.len() * self.schemes.len()
    }
}

fn key_of(g: &GenConfig) -> InstanceKey {
    InstanceKey {
        model: g.model,
        n_drivers: g.n_drivers,
        rho: g.rho,
        mu: g.mu,
        seed: g.seed,
    }
}

fn same_key(a: &InstanceKey, b: &InstanceKey) -> bool {
    a.model == b.model && a.n_drivers == b.n_drivers && a.rho == b.rho && a.mu == b.mu && a.seed == b.seed
}

fn build_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))
}

/// Evaluates every (instance, scheme) of `cfg` not covered by `done`, on
/// `jobs` workers (0 = one per core). `on_row` sees rows in completion
/// order; the result is sorted. Logistic fits are shared per `(seed, mu)`.
pub fn run_sweep(
    cfg: &SweepConfig,
    jobs: usize,
    done: &[ExperimentRecord],
    on_row: &(dyn Fn(&ExperimentRecord) -> Result<()> + Sync),
) -> Result<Vec<SweepRow>> {
    let todo: Vec<(GenConfig, Vec<SchemeKind>)> = cfg
        .instances()
        .into_iter()
        .filter_map(|g| {
            let key = key_of(&g);
            let schemes: Vec<SchemeKind> = cfg
                .schemes
                .iter()
                .copied()
                .filter(|&s| !done.iter().any(|r| r.scheme == s && same_key(&r.key(), &key)))
                .collect();
            (!schemes.is_empty()).then_some((g, schemes))
        })
        .collect();

    let pool = build_pool(jobs)?;
    pool.install(|| {
        let mut fit_keys: Vec<(u64, f64)> = todo
            .iter()
            .filter(|(g, _)| g.model == ModelKind::Logistic)
            .map(|(g, _)| (g.seed, g.mu))
            .collect();
        fit_keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        fit_keys.dedup();
        let fits: HashMap<(u64, u64), LogisticFit> = fit_keys
            .par_iter()
            .map(|&(seed, mu)| Ok(((seed, mu.to_bits()), calibration_fit(seed, mu, cfg.fit_points)?)))
            .collect::<Result<_>>()?;

        let nested: Vec<Vec<SweepRow>> = todo
            .par_iter()
            .map(|(g, schemes)| {
                let fit = fits.get(&(g.seed, g.mu.to_bits()));
                let inst = generate_with_fit(g, fit)?;
                schemes
                    .iter()
                    .map(|&s| {
                        let e = evaluate(&inst, s, &cfg.solver, cfg.timing)?;
                        on_row(&e.record)?;
                        Ok(e)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut rows: Vec<SweepRow> = nested.into_iter().flatten().collect();
        rows.sort_by(|a, b| a.record.cmp_order(&b.record));
        Ok(rows)
    })
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs the sweep into the CSV at `path`. Rows already in the file are
/// kept and not recomputed. New rows are appended as they finish, then the
/// whole table is rewritten in sorted order.
pub fn sweep_to_csv(cfg: &SweepConfig, path: &Path, jobs: usize) -> Result<Vec<ExperimentRecord>> {
    let existing = match std::fs::metadata(path) {
        Ok(m) if m.len() > 0 => read_records(path)?,
        _ => Vec::new(),
    };
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let writer = Mutex::new(
        csv::WriterBuilder::new()
            .has_headers(existing.is_empty())
            .from_writer(file),
    );
    let rows = run_sweep(cfg, jobs, &existing, &|r| {
        let mut w = writer.lock().expect("csv writer poisoned");
        w.serialize(r)?;
        w.flush().map_err(|e| Error::io(path, e))
    })?;
    drop(writer);

    let mut all = existing;
    all.extend(rows.into_iter().map(|e| e.record));
    all.sort_by(|a, b| a.cmp_order(b));
    let tmp = path.with_extension("csv.tmp");
    write_records(&tmp, &all)?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig {
            models: vec![ModelKind::Linear],
            n_tasks: 4,
            drivers: vec![2, 3],
            rhos: vec![0.1],
            mus: vec![0.5],
            seeds: vec![1, 2],
            ..Default::default()
        }
    }

    #[test]
    fn cardinality_and_order() {
        let rows = run_sweep(&small(), 2, &[], &|_| Ok(())).unwrap();
        assert_eq!(rows.len(), 16);
        assert_eq!(small().n_rows(), 16);
        for w in rows.windows(2) {
            assert!(w[0].record.cmp_order(&w[1].record).is_lt());
        }
    }

    #[test]
    fn csv_is_deterministic_and_resumable() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        sweep_to_csv(&small(), &a, 1).unwrap();
        sweep_to_csv(&small(), &b, 4).unwrap();
        let text = std::fs::read_to_string(&a).unwrap();
        assert_eq!(text, std::fs::read_to_string(&b).unwrap());
        assert!(text.starts_with(
            "model,O,rho,mu,seed,scheme,p,expected_cost,cost_saving_pct,expected_distance,\
             distance_saving_pct,fraction_offered,mean_acceptance,wall_time_ms\n"
        ));

        // Drop half the rows and resume.
        let lines: Vec<&str> = text.lines().collect();
        std::fs::write(&a, lines[..9].join("\n") + "\n").unwrap();
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let done = read_records(&a).unwrap();
        run_sweep(&small(), 1, &done, &|_| {
            calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            Ok(())
        })
        .unwrap();
        assert_eq!(calls.into_inner(), 8);
        sweep_to_csv(&small(), &a, 2).unwrap();
        assert_eq!(std::fs::read_to_string(&a).unwrap(), text);
    }
}
