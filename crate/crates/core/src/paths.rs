//! Brownian paths and reflected bridges on the supported domains.
//!
//! Bridges conditioned to return into the domain are sampled by the image
//! construction: the endpoint `y` is lifted to an image point `e` with
//! probability proportional to the free Gaussian weight `G_t(x - e)`, a free
//! line bridge from `x` to `e` is drawn on a uniform time grid, and the path
//! is folded back into the domain. The folded marginal is exactly the
//! reflected-kernel bridge. The unfolded path is kept alongside: absorption
//! weights need to see boundary crossings, which folding would hide.

use crate::domain::Domain;
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// A path on a uniform time grid of spacing `dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dt: f64,
    points: Vec<f64>,
    /// unfolded pre-image when the domain reflects; `None` on the line
    raw: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Path values inside the domain.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Unfolded path (equal to `points` when the domain has no boundary).
    pub fn raw_points(&self) -> &[f64] {
        self.raw.as_deref().unwrap_or(&self.points)
    }

    pub fn n_steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.n_steps() as f64
    }

    /// Deterministic path on an explicit grid, already inside its domain.
    pub(crate) fn from_parts(dt: f64, points: Vec<f64>) -> Self {
        debug_assert!(dt > 0.0 && points.len() >= 2);
        Trajectory { dt, points, raw: None }
    }
}

fn validate(t: f64, n: usize) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Input(format!("path duration must be positive and finite, got {t}")));
    }
    if n < 1 {
        return Err(Error::Input("a path needs at least one step".into()));
    }
    Ok(t / n as f64)
}

/// Free Brownian motion from `x0` over `[0, t]` with `n` steps.
pub fn sample_free<R: Rng + ?Sized>(t: f64, n: usize, x0: f64, rng: &mut R) -> Result<Trajectory> {
    let dt = validate(t, n)?;
    let sd = dt.sqrt();
    let mut points = Vec::with_capacity(n + 1);
    let mut x = x0;
    points.push(x);
    for _ in 0..n {
        x += sd * rng.sample::<f64, _>(StandardNormal);
        points.push(x);
    }
    Ok(Trajectory { dt, points, raw: None })
}

/// Bridge from `x` to `y` over `[0, t]` under the reflected kernel of
/// `domain`, on `n` uniform steps.
pub fn sample_bridge<R: Rng + ?Sized>(
    domain: &Domain,
    t: f64,
    n: usize,
    x: f64,
    y: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    let dt = validate(t, n)?;
    if !domain.contains(x) || !domain.contains(y) {
        return Err(Error::Input(format!("bridge endpoints ({x}, {y}) outside the domain")));
    }
    let mut images = Vec::new();
    domain.images(t, y, &mut images);
    let e = if images.len() == 1 {
        images[0]
    } else {
        // categorical draw by Gaussian endpoint weight
        let weights: Vec<f64> = images.iter().map(|&e| (-(x - e) * (x - e) / (2.0 * t)).exp()).collect();
        let total: f64 = weights.iter().sum();
        debug_assert!(total > 0.0, "no reachable endpoint image");
        let mut u = rng.gen::<f64>() * total;
        let mut chosen = images[images.len() - 1];
        for (&img, &w) in images.iter().zip(&weights) {
            if u < w {
                chosen = img;
                break;
            }
            u -= w;
        }
        chosen
    };
    // standard bridge: W_k - (k/n) W_n plus the linear trend x -> e
    let sd = dt.sqrt();
    let mut w = Vec::with_capacity(n + 1);
    w.push(0.0);
    let mut acc = 0.0;
    for _ in 0..n {
        acc += sd * rng.sample::<f64, _>(StandardNormal);
        w.push(acc);
    }
    let wn = w[n];
    let inv = 1.0 / n as f64;
    let raw: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(k, &wk)| {
            let frac = k as f64 * inv;
            x + wk - frac * wn + frac * (e - x)
        })
        .collect();
    let needs_fold = !matches!(domain, Domain::Line);
    let points: Vec<f64> = if needs_fold { raw.iter().map(|&p| domain.fold(p)).collect() } else { raw.clone() };
    Ok(Trajectory { dt, points, raw: needs_fold.then_some(raw) })
}
