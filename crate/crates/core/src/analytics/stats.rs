//! Pooled-variance t-test, Cohen's d and the special functions behind the
//! Student-t tail.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("need at least two observations per group")]
    TooFewObservations,
    #[error("standard deviations must be finite and non-negative")]
    InvalidSd,
    #[error("pooled standard deviation is zero; effect size is undefined")]
    ZeroPooledSd,
}

/// Mean, sample SD (n - 1 denominator) and size of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl GroupSummary {
    pub fn new(mean: f64, sd: f64, n: usize) -> Self {
        Self { mean, sd, n }
    }

    pub fn from_sample(xs: &[f64]) -> Result<Self, StatsError> {
        if xs.len() < 2 {
            return Err(StatsError::TooFewObservations);
        }
        Ok(Self {
            mean: mean(xs),
            sd: sample_sd(xs),
            n: xs.len(),
        })
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

pub fn pooled_sd(sd_e: f64, sd_c: f64, n_e: usize, n_c: usize) -> Result<f64, StatsError> {
    if n_e < 2 || n_c < 2 {
        return Err(StatsError::TooFewObservations);
    }
    if !(sd_e >= 0.0 && sd_c >= 0.0 && sd_e.is_finite() && sd_c.is_finite()) {
        return Err(StatsError::InvalidSd);
    }
    let (ne, nc) = (n_e as f64, n_c as f64);
    Ok((((ne - 1.0) * sd_e * sd_e + (nc - 1.0) * sd_c * sd_c) / (ne + nc - 2.0)).sqrt())
}

pub fn cohens_d(mean_e: f64, mean_c: f64, sp: f64) -> Result<f64, StatsError> {
    if sp == 0.0 {
        return Err(StatsError::ZeroPooledSd);
    }
    Ok((mean_e - mean_c) / sp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: u32,
    /// Two-tailed.
    pub p: f64,
    /// Set when both groups have zero spread but different means; `t` is
    /// then infinite and `p` is 0.
    pub degenerate: bool,
}

/// Independent-samples Student t-test with pooled variance, two-tailed.
pub fn t_test_pooled_two_tailed(e: &GroupSummary, c: &GroupSummary) -> Result<TTest, StatsError> {
    let sp = pooled_sd(e.sd, c.sd, e.n, c.n)?;
    let df = (e.n + c.n - 2) as u32;
    let diff = e.mean - c.mean;
    if sp == 0.0 {
        return Ok(if diff == 0.0 {
            TTest {
                t: 0.0,
                df,
                p: 1.0,
                degenerate: false,
            }
        } else {
            TTest {
                t: f64::INFINITY.copysign(diff),
                df,
                p: 0.0,
                degenerate: true,
            }
        });
    }
    let se = sp * (1.0 / e.n as f64 + 1.0 / c.n as f64).sqrt();
    let t = diff / se;
    Ok(TTest {
        t,
        df,
        p: student_t_two_tailed(t, df as f64),
        degenerate: false,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    reg_inc_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
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
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
