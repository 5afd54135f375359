//! Maximum-likelihood logistic regression by Newton iterations (IRLS) on
//! standardized features.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const GRADIENT_TOL: f64 = 1e-8;
pub const MAX_ITER: usize = 100;
/// Standardized coefficients beyond this norm indicate separated classes.
const DIVERGENCE_NORM: f64 = 1e3;

/// Fitted model `P(y = 1 | x) = 1 / (1 + e^{-(intercept + coef . x)})`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub intercept: f64,
    /// Coefficients on the raw (unstandardized) features.
    pub coefficients: Vec<f64>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    /// Final mean gradient norm on the standardized scale.
    pub gradient_norm: f64,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

impl LogisticFit {
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(x))
    }

    /// Mean negative log-likelihood on `(x, y)`.
    pub fn log_loss<R: AsRef<[f64]>>(&self, x: &[R], y: &[bool]) -> f64 {
        let total: f64 = x
            .iter()
            .zip(y)
            .map(|(row, &yi)| {
                let t = self.linear_predictor(row.as_ref());
                if yi {
                    softplus(-t)
                } else {
                    softplus(t)
                }
            })
            .sum();
        total / y.len() as f64
    }
}

/// Mean negative log-likelihood of predicting the constant `rate`.
pub fn constant_log_loss(rate: f64, y: &[bool]) -> f64 {
    let rate = rate.clamp(1e-15, 1.0 - 1e-15);
    let ones = y.iter().filter(|&&v| v).count() as f64;
    let n = y.len() as f64;
    -(ones * rate.ln() + (n - ones) * (1.0 - rate).ln()) / n
}

/// Fits `y ~ x` with an intercept. Rows of `x` must share one length.
pub fn fit_logistic<R: AsRef<[f64]>>(x: &[R], y: &[bool]) -> Result<LogisticFit> {
    let n = y.len();
    if n == 0 || x.len() != n {
        return Err(Error::Fit(format!("{} feature rows for {} outcomes", x.len(), n)));
    }
    let ones = y.iter().filter(|&&v| v).count();
    if ones == 0 || ones == n {
        return Err(Error::Fit("outcomes contain a single class".into()));
    }
    let p = x[0].as_ref().len();
    if x.iter().any(|r| r.as_ref().len() != p) {
        return Err(Error::Fit("feature rows have different lengths".into()));
    }

    let mut means = vec![0.0; p];
    for r in x {
        for (m, v) in means.iter_mut().zip(r.as_ref()) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    let mut scales = vec![0.0; p];
    for r in x {
        for ((s, v), m) in scales.iter_mut().zip(r.as_ref()).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for (k, s) in scales.iter_mut().enumerate() {
        *s = (*s / n as f64).sqrt();
        if !(*s > 0.0) {
            return Err(Error::Fit(format!("feature {k} is constant")));
        }
    }

    let d = p + 1;
    let z = DMatrix::from_fn(n, d, |i, k| {
        if k == 0 {
            1.0
        } else {
            (x[i].as_ref()[k - 1] - means[k - 1]) / scales[k - 1]
        }
    });
    let yv = DVector::from_fn(n, |i, _| if y[i] { 1.0 } else { 0.0 });

    let nll = |b: &DVector<f64>| -> f64 {
        let eta = &z * b;
        eta.iter()
            .zip(yv.iter())
            .map(|(&t, &yi)| if yi > 0.5 { softplus(-t) } else { softplus(t) })
            .sum()
    };

    let rate = ones as f64 / n as f64;
    let mut beta = DVector::zeros(d);
    beta[0] = (rate / (1.0 - rate)).ln();
    let mut loss = nll(&beta);
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        let eta = &z * &beta;
        let mu = eta.map(sigmoid);
        let grad = z.transpose() * (&yv - &mu);
        grad_norm = grad.norm() / n as f64;
        if grad_norm <= GRADIENT_TOL {
            break;
        }
        iterations += 1;
        let wts = mu.map(|m| m * (1.0 - m));
        let mut zw = z.clone();
        for (mut row, &w) in zw.row_iter_mut().zip(wts.iter()) {
            row *= w;
        }
        let hess = z.transpose() * zw;
        let chol = hess
            .cholesky()
            .ok_or_else(|| Error::Fit(format!("singular information matrix at iteration {iterations}")))?;
        let step = chol.solve(&grad);

        let mut t = 1.0;
        loop {
            let cand = &beta + &step * t;
            let l = nll(&cand);
            if l <= loss || t < 1e-10 {
                beta = cand;
                loss = l;
                break;
            }
            t *= 0.5;
        }
        if beta.rows(1, p).norm() > DIVERGENCE_NORM {
            return Err(Error::Fit(format!(
                "coefficients diverge (norm {:.3e} after {iterations} iterations): classes look separable",
                beta.rows(1, p).norm()
            )));
        }
    }
    if grad_norm > GRADIENT_TOL {
        return Err(Error::Fit(format!(
            "no convergence after {MAX_ITER} iterations (gradient norm {grad_norm:.3e}, log-likelihood {:.6})",
            -loss
        )));
    }

    // A fit that classifies every row correctly means the MLE is at infinity.
    let eta = &z * &beta;
    if eta.iter().zip(y).all(|(&t, &yi)| (t > 0.0) == yi) {
        return Err(Error::Fit("classes are perfectly separable".into()));
    }

    let coefficients: Vec<f64> = (0..p).map(|k| beta[k + 1] / scales[k]).collect();
    let intercept = beta[0] - coefficients.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    Ok(LogisticFit {
        intercept,
        coefficients,
        means,
        scales,
        log_likelihood: -loss,
        iterations,
        gradient_norm: grad_norm,
    })
}
