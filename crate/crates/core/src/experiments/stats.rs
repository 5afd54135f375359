//! Paired t-tests and per-level aggregates.

use statrs::function::beta::beta_reg;

use super::{ExperimentRecord, InstanceKey, Metric};
use crate::error::{Error, Result};

/// Two-sided paired t-test on `a - b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedT {
    pub n: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    /// Infinite (or NaN when every difference is zero) for degenerate input.
    pub t_stat: f64,
    pub p_value: f64,
    /// The differences have zero variance, so `t` is not a number.
    pub degenerate: bool,
}

/// Two-sided p-value of `t` under Student's t with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

pub fn paired_t_diffs(diffs: &[f64]) -> Result<PairedT> {
    let n = diffs.len();
    if n < 2 {
        return Err(Error::Stats(format!("paired t needs at least 2 pairs, got {n}")));
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        let t_stat = if mean == 0.0 { f64::NAN } else { mean.signum() * f64::INFINITY };
        return Ok(PairedT {
            n,
            mean_diff: mean,
            sd_diff: 0.0,
            t_stat,
            p_value: if mean == 0.0 { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    Ok(PairedT {
        n,
        mean_diff: mean,
        sd_diff: sd,
        t_stat: t,
        p_value: t_two_sided_p(t, (n - 1) as f64),
        degenerate: false,
    })
}

pub fn paired_t(a: &[f64], b: &[f64]) -> Result<PairedT> {
    if a.len() != b.len() {
        return Err(Error::Stats(format!("{} values paired with {}", a.len(), b.len())));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    paired_t_diffs(&diffs)
}

/// Paired test of `metric` between two record sets aligned on their
/// instance keys. Pairs where either side lacks the metric are dropped.
pub fn paired_t_records(a: &[ExperimentRecord], b: &[ExperimentRecord], metric: Metric) -> Result<PairedT> {
    if a.len() != b.len() {
        return Err(Error::Stats(format!("{} records paired with {}", a.len(), b.len())));
    }
    let mut xs = Vec::with_capacity(a.len());
    let mut ys = Vec::with_capacity(a.len());
    for (ra, rb) in a.iter().zip(b) {
        if ra.key() != rb.key() {
            return Err(Error::Stats(format!(
                "misaligned records: {} vs {}",
                ra.key(),
                rb.key()
            )));
        }
        if let (Some(x), Some(y)) = (metric.of(ra), metric.of(rb)) {
            xs.push(x);
            ys.push(y);
        }
    }
    paired_t(&xs, &ys)
}

/// Sweep dimension for trend reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Drivers,
    Rho,
    Mu,
}

impl Axis {
    pub fn level(self, key: &InstanceKey) -> f64 {
        match self {
            Axis::Drivers => key.n_drivers as f64,
            Axis::Rho => key.rho,
            Axis::Mu => key.mu,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" | "drivers" => Ok(Axis::Drivers),
            "rho" => Ok(Axis::Rho),
            "mu" => Ok(Axis::Mu),
            other => Err(Error::Config(format!("unknown axis `{other}` (expected O, rho or mu)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendLevel {
    pub level: f64,
    pub mean: f64,
    pub count: usize,
}

/// Mean of `metric` per level of `axis`, levels ascending.
pub fn trend_report(records: &[ExperimentRecord], axis: Axis, metric: Metric) -> Vec<TrendLevel> {
    let mut levels: Vec<TrendLevel> = Vec::new();
    for r in records {
        let Some(v) = metric.of(r) else { continue };
        let level = axis.level(&r.key());
        match levels.iter_mut().find(|l| l.level == level) {
            Some(l) => {
                l.mean += v;
                l.count += 1;
            }
            None => levels.push(TrendLevel { level, mean: v, count: 1 }),
        }
    }
    for l in &mut levels {
        l.mean /= l.count as f64;
    }
    levels.sort_by(|a, b| a.level.total_cmp(&b.level));
    levels
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_differences() {
        let r = paired_t_diffs(&[1.0, -1.0]).unwrap();
        assert_eq!((r.mean_diff, r.t_stat, r.p_value), (0.0, 0.0, 1.0));
        assert!(!r.degenerate);
    }

    #[test]
    fn constant_differences_are_degenerate() {
        let r = paired_t_diffs(&[0.5; 6]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.t_stat, f64::INFINITY);
        assert!(paired_t_diffs(&[0.0; 3]).unwrap().t_stat.is_nan());
    }

    #[test]
    fn reference_p_values() {
        // Reference values computed to 20 digits with arbitrary precision.
        let d = [0.3, -0.1, 0.5, 0.8, 0.2, -0.4, 0.6, 0.1, 0.9, 0.35];
        let r = paired_t_diffs(&d).unwrap();
        assert!((r.t_stat - 2.5727026558880793).abs() < 1e-12);
        assert!((r.p_value - 0.030_054_249_467_061_45).abs() < 1e-10, "{}", r.p_value);
        assert!((t_two_sided_p(2.2621571627409915, 9.0) - 0.05).abs() < 1e-10);
        assert!((t_two_sided_p(-2.2621571627409915, 9.0) - 0.05).abs() < 1e-10);
    }

    #[test]
    fn p_matches_monte_carlo() {
        use rand::Rng;
        use rand_pcg::Pcg64;
        use rand::SeedableRng;
        // Student t with 4 df as Z / sqrt(chi2_4 / 4).
        let mut rng = Pcg64::seed_from_u64(7);
        let mut normal = || {
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let n = 400_000;
        let mut hits = 0;
        for _ in 0..n {
            let z = normal();
            let chi: f64 = (0..4).map(|_| normal().powi(2)).sum();
            if (z / (chi / 4.0).sqrt()).abs() >= 1.5 {
                hits += 1;
            }
        }
        let mc = hits as f64 / n as f64;
        assert!((t_two_sided_p(1.5, 4.0) - mc).abs() < 0.003, "{mc}");
    }

    #[test]
    fn too_few_pairs() {
        assert!(paired_t_diffs(&[1.0]).is_err());
        assert!(paired_t(&[1.0, 2.0], &[1.0]).is_err());
    }
}
