//! Small statistics kit: running moments, the regularized incomplete gamma
//! function, chi-square tail probabilities and a two-sample
//! Kolmogorov-Smirnov test. Used by the samplers' self-checks.

use crate::error::{Error, Result};

/// Streaming moment accumulator (Welford, through the fourth moment).
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let d = x - self.mean;
        let dn = d / n;
        let dn2 = dn * dn;
        let term = d * dn * n1;
        self.mean += dn;
        self.m4 += term * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    /// Standard error of the sample variance, from the sampled fourth
    /// central moment: `Var(s^2) ~ (m4 - s^4 (n-3)/(n-1)) / n`.
    pub fn variance_stderr(&self) -> f64 {
        if self.n < 4 {
            return f64::INFINITY;
        }
        let n = self.n as f64;
        let s2 = self.variance();
        let m4 = self.m4 / n;
        ((m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, accurate to ~1e-14 relative).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection keeps the series in its accurate range
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized upper incomplete gamma `Q(a, x) = Gamma(a, x)/Gamma(a)`.
///
/// Series expansion for `x < a + 1`, Lentz continued fraction otherwise.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || x < 0.0 || !a.is_finite() || !x.is_finite() {
        return Err(Error::Input(format!("gamma_q needs a > 0, x >= 0, got a={a}, x={x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let lg = ln_gamma(a);
    if x < a + 1.0 {
        // P(a,x) by series, Q = 1 - P
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                let p = sum * (-x + a * x.ln() - lg).exp();
                return Ok((1.0 - p).clamp(0.0, 1.0));
            }
        }
        Err(Error::Numeric("incomplete gamma series failed to converge".into()))
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                return Ok((h * (-x + a * x.ln() - lg).exp()).clamp(0.0, 1.0));
            }
        }
        Err(Error::Numeric("incomplete gamma continued fraction failed to converge".into()))
    }
}

/// Right tail of the chi-square distribution with `k` degrees of freedom.
pub fn chi2_sf(x: f64, k: usize) -> Result<f64> {
    gamma_q(k as f64 / 2.0, x / 2.0)
}

/// Asymptotic Kolmogorov survival function `2 sum (-1)^{j-1} e^{-2 j^2 z^2}`.
fn kolmogorov_sf(z: f64) -> f64 {
    if z < 0.1 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..101 {
        let term = (-2.0 * (j as f64) * (j as f64) * z * z).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test; returns `(statistic, p_value)`.
///
/// The p-value uses the asymptotic Kolmogorov distribution with the
/// finite-sample effective size, adequate for the >= 10^3 sample sizes used
/// in the self-checks.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 8 || b.len() < 8 {
        return Err(Error::Input("ks_two_sample needs at least 8 samples per side".into()));
    }
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i].min(ys[j]);
        while i < n && xs[i] <= x {
            i += 1;
        }
        while j < m && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let z = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok((d, kolmogorov_sf(z)))
}
