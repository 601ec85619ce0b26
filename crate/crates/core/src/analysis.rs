//! Exponential growth fits of optimal-cell occurrence series,
//! `y(t) = e^{-a + b t}`, by least squares on `ln y`.

use serde::{Deserialize, Serialize};

use crate::colony::CensusSample;
use crate::error::{BagaError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Intercept magnitude: `ln y = -a + b t`.
    pub a: f64,
    /// Slope (1/time).
    pub b: f64,
    /// Coefficient of determination on the log scale.
    pub r2: f64,
    /// Two-sided p-value of the slope t-test.
    pub p_value: f64,
    pub n: usize,
}

impl RegressionFit {
    /// Model count at time `t`.
    pub fn predict(&self, t: f64) -> f64 {
        (-self.a + self.b * t).exp()
    }
}

/// Strictly increasing copy of `times`: a value not above its predecessor is
/// nudged just past it, in index order.
pub fn break_ties(times: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(times.len());
    for &t in times {
        let t = match out.last() {
            Some(&prev) if t <= prev => prev + 1e-9 * prev.abs().max(1.0),
            _ => t,
        };
        out.push(t);
    }
    out
}

/// The i-th occurrence (1-based) becomes the point `(t_i, i)`.
pub fn occurrences_to_series(times: &[f64]) -> Vec<(f64, f64)> {
    break_ties(times)
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, (i + 1) as f64))
        .collect()
}

/// Binned alternative: census samples with at least one optimal cell.
pub fn census_to_series(census: &[CensusSample]) -> Vec<(f64, f64)> {
    census
        .iter()
        .filter(|s| s.optimal_count > 0)
        .map(|s| (s.time, s.optimal_count as f64))
        .collect()
}

/// Ordinary least squares of `ln y` on `t`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<RegressionFit> {
    let n = points.len();
    if n < 3 {
        return Err(BagaError::Fit(format!("need at least 3 points, got {n}")));
    }
    if let Some(&(t, y)) = points.iter().find(|(_, y)| !(*y > 0.0)) {
        return Err(BagaError::Fit(format!("non-positive count {y} at t={t}")));
    }
    if points.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) {
        return Err(BagaError::Fit("non-finite input".into()));
    }
    let nf = n as f64;
    let t_mean = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let y_mean = ly.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (p, &y) in points.iter().zip(&ly) {
        let dx = p.0 - t_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(BagaError::Fit("all time values are identical".into()));
    }
    let b = sxy / sxx;
    let intercept = y_mean - b * t_mean;
    let sse: f64 = points
        .iter()
        .zip(&ly)
        .map(|(p, &y)| {
            let r = y - (intercept + b * p.0);
            r * r
        })
        .sum();
    // Flat data has nothing to explain; treat an exact fit as r2 = 1.
    let r2 = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else if sse == 0.0 {
        1.0
    } else {
        0.0
    };
    let df = nf - 2.0;
    let p_value = if sse == 0.0 {
        if b == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        let se = (sse / df / sxx).sqrt();
        student_t_two_sided(b / se, df)
    };
    Ok(RegressionFit {
        a: -intercept,
        b,
        r2,
        p_value,
        n,
    })
}

/// Convenience: fit an occurrence-time list directly.
pub fn fit_occurrences(times: &[f64]) -> Result<RegressionFit> {
    fit_exponential(&occurrences_to_series(times))
}

/// Model time at which the fitted count reaches `target`.
pub fn waiting_time(fit: &RegressionFit, target: f64) -> Result<f64> {
    if !(fit.b > 0.0) {
        return Err(BagaError::Fit(format!("slope {} gives no finite waiting time", fit.b)));
    }
    if !(target >= 1.0) {
        return Err(BagaError::Fit(format!("target count {target} must be >= 1")));
    }
    Ok((target.ln() + fit.a) / fit.b)
}

/// Two-sided p-value of a Student t statistic with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const TOL: f64 = 1e-12;
    const MAX_ITER: usize = 10_000;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < TOL {
            break;
        }
    }
    h
}
